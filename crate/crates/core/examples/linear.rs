//! Linear equation with additive noise, solved mode by mode.

use fspde::linear::{evolve_linear, residual_integral_form};
use fspde::noise::sample_sheet;
use fspde::{Coefficient, Field, FracParams, GridSpec, LinearModel};

pub fn run() -> fspde::Result<()> {
    let grid = GridSpec::new(10.0, 128, 1.0, 100);
    let u0 = Field::from_fn(&grid, |x| (-x * x).exp());
    let model = LinearModel::new(FracParams::new(1.5, 0.3, 0), Coefficient::Const(0.5), u0)?;
    let sheet = sample_sheet(&grid, 1, 0)?;
    let traj = evolve_linear(&model, &grid, &sheet)?;
    for n in [0, 25, 50, 100] {
        println!("t = {:.2}  |u|_2 = {:.5}", grid.time(n), traj.states[n].l2_norm(grid.dx()));
    }
    println!("integral-form residual {:.2e}", residual_integral_form(&model, &traj, &sheet)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> fspde::Result<()> {
    run()
}
