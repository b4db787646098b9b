//! Space-time white noise on a grid: reproducible sampling, the
//! covariance of the cumulative sheet, aggregation and binary dumps.

use fspde::noise::{sample_sheet, SheetIncrements};
use fspde::GridSpec;

pub fn run() -> fspde::Result<()> {
    let grid = GridSpec::new(4.0, 32, 1.0, 16);
    let n_paths = 2000;
    let mut acc = 0.0;
    for p in 0..n_paths {
        let s = sample_sheet(&grid, 11, p)?;
        let a = s.cumulate(1.0, 2.0)?;
        acc += a * s.cumulate(0.5, 1.0)?;
    }
    // E W(1,2) W(0.5,1) = 0.5 · 1
    println!("sample covariance {:.3} (exact 0.5)", acc / n_paths as f64);

    let fine = sample_sheet(&grid, 11, 0)?;
    let coarse = fine.aggregate(2, 2)?;
    println!("aggregated to N = {}, M = {}", coarse.grid.n_points, coarse.grid.n_steps);

    let mut buf = Vec::new();
    fine.write_dump(&mut buf)?;
    let back = SheetIncrements::read_dump(buf.as_slice())?;
    println!("dump of {} bytes, round trip exact: {}", buf.len(), back.as_slice() == fine.as_slice());
    Ok(())
}

#[allow(dead_code)]
fn main() -> fspde::Result<()> {
    run()
}
