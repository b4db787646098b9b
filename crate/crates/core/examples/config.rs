//! Reading, validating and re-emitting a run configuration.

use fspde::harness::RunConfig;
use fspde::ValidationMode;

const TEXT: &str = "\
# nonlinear model on [-8, 8)
alpha = 1.8
delta = 0.1
m = 1
L = 8
N = 64
T = 1
M = 128
f = sin
h1 = linear:0.1
u0 = bump:0,2
";

pub fn run() -> fspde::Result<()> {
    let cfg = RunConfig::parse(TEXT)?;
    let report = cfg.validate(ValidationMode::Solver);
    println!("{report:?}");
    let emitted = cfg.emit();
    println!("{emitted}");
    assert_eq!(RunConfig::parse(&emitted)?.emit(), emitted);

    let bad = TEXT.replace("delta = 0.1", "delta = 0.5");
    match RunConfig::parse(&bad).and_then(|c| c.validate(ValidationMode::Solver).into_result()) {
        Ok(()) => println!("unexpectedly accepted"),
        Err(e) => println!("rejected: {e}"),
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> fspde::Result<()> {
    run()
}
