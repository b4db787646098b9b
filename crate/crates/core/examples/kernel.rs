//! Green function of the fractional operator: values, mass, semigroup
//! and scaling errors, and the large-|x| series.

use fspde::kernel::{check_positivity, check_semigroup, kernel, tail_series_at};
use fspde::{FracParams, GridSpec};

pub fn run() -> fspde::Result<()> {
    let grid = GridSpec::new(40.0, 2048, 1.0, 1);
    let p = FracParams::new(1.5, 0.3, 0);
    let g = kernel(1.0, 0, &p, &grid)?;
    println!("mass            {:.12}", g.mass());
    println!("semigroup error {:.2e}", check_semigroup(0.5, 0.5, &p, &grid)?);
    let (min, density) = check_positivity(1.0, &p, &grid)?;
    println!("min {min:.3e}, density: {density}");

    for x in [5.0, 10.0, 15.0] {
        let i = grid.origin_index() + (x / grid.dx()).round() as usize;
        let series = tail_series_at(1.0, x, 0, 3, &p)?;
        println!("x = {x:>4}: spectral {:.6e}  series {series:.6e}", g.values[i]);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> fspde::Result<()> {
    run()
}
