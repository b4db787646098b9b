//! Nonlinear equation solved by Picard iteration of the mild operator,
//! compared with an exponential time-differencing march.

use fspde::mild::MildOperator;
use fspde::noise::sample_sheet;
use fspde::{Coefficient, CoefficientSpec, Field, FracParams, GridSpec, PicardOptions};

pub fn run() -> fspde::Result<()> {
    let grid = GridSpec::new(8.0, 32, 0.5, 128);
    let params = FracParams::new(1.8, 0.1, 1);
    let coeffs = CoefficientSpec::new(Coefficient::Sin, vec![Coefficient::Zero, Coefficient::Linear(0.1)], 1.1);
    let u0 = Field::from_fn(&grid, |x| (-x * x).exp());
    let sheet = sample_sheet(&grid, 3, 0)?;

    let op = MildOperator::new(&params, &coeffs, &grid)?;
    let (path, diag) = op.picard_solve(&u0, &sheet, &PicardOptions::new(1e-12, 60))?;
    println!("converged {} after {} iterations", diag.converged, diag.iterations);
    for (i, r) in diag.ratios().iter().enumerate().take(6) {
        println!("  ratio {}: {r:.3}", i + 2);
    }
    println!("fixed-point residual {:.2e}", op.fixed_point_residual(&u0, &path, &sheet)?);
    let etd = op.etd_march(&u0, &sheet)?;
    println!("etd vs picard {:.3e}", etd.max_l2_distance(&path));
    Ok(())
}

#[allow(dead_code)]
fn main() -> fspde::Result<()> {
    run()
}
