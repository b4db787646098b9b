//! Pathwise self-convergence under joint refinement of space and time.

use fspde::harness::{convergence_study, RunConfig};

pub fn run() -> fspde::Result<()> {
    let cfg = RunConfig::parse(
        "alpha = 1.8\ndelta = 0.1\nm = 1\nL = 8\nN = 32\nT = 0.5\nM = 32\nf = sin\nh1 = linear:0.1\nseed = 5\n",
    )?;
    let r = convergence_study(&cfg, 3)?;
    for (l, d) in r.differences.iter().enumerate() {
        println!("{:?} vs {:?}: {d:.3e}", r.levels[l], r.levels[l + 1]);
    }
    println!("orders {:?}", r.orders);
    Ok(())
}

#[allow(dead_code)]
fn main() -> fspde::Result<()> {
    run()
}
