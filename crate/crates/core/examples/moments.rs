//! Monte Carlo second and fourth moments of the L2 norm.

use fspde::harness::{run_mc, RunConfig};

pub fn run() -> fspde::Result<()> {
    let cfg = RunConfig::parse(
        "alpha = 1.8\ndelta = 0.1\nm = 1\nL = 8\nN = 32\nT = 0.5\nM = 32\nf = sin\nh1 = linear:0.1\nu0 = gaussian\n",
    )?;
    let r = run_mc(&cfg, 100, 2)?;
    for i in (0..r.times.len()).step_by(8) {
        println!("t = {:.3}  E|u|^2 = {:.4} ± {:.4}  E|u|^4 = {:.4}", r.times[i], r.m2[i], r.m2_se[i], r.m4[i]);
    }
    println!("sup E|u|^2 = {:.4}, excluded {}", r.sup_m2, r.excluded);
    Ok(())
}

#[allow(dead_code)]
fn main() -> fspde::Result<()> {
    run()
}
