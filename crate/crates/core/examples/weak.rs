//! Residuals of both weak formulations on a battery of bump test
//! functions, for one path at two resolutions.

use fspde::mild::MildOperator;
use fspde::noise::sample_sheet;
use fspde::weak::{battery_residual_first, battery_residual_second, bump_battery};
use fspde::{Coefficient, CoefficientSpec, Field, FracParams, GridSpec, PicardOptions};

pub fn run() -> fspde::Result<()> {
    let params = FracParams::new(1.8, 0.1, 1);
    let coeffs = CoefficientSpec::new(Coefficient::Sin, vec![Coefficient::Zero, Coefficient::Linear(0.1)], 1.1);
    let coarse = GridSpec::new(8.0, 32, 0.5, 64);
    let fine = coarse.refine(2, 2);
    let fine_sheet = sample_sheet(&fine, 8, 0)?;

    for g in [coarse, fine] {
        let sheet = fine_sheet.aggregate_to(&g)?;
        let op = MildOperator::new(&params, &coeffs, &g)?;
        let u0 = Field::from_fn(&g, |x| (-x * x).exp());
        let (path, _) = op.picard_solve(&u0, &sheet, &PicardOptions::new(1e-11, 60))?;
        let battery = bump_battery(&g, &params)?;
        let r1 = battery_residual_first(&path, &sheet, &battery, g.n_steps, &coeffs, &params)?;
        let r2 = battery_residual_second(&path, &sheet, &battery, g.n_steps, &coeffs, &params)?;
        println!("N = {:>3} M = {:>3}", g.n_points, g.n_steps);
        for (i, (a, b)) in r1.iter().zip(&r2).enumerate() {
            println!("  bump {i}: {a:.3e} {b:.3e}");
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> fspde::Result<()> {
    run()
}
