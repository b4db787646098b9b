//! Every example runs to completion.

macro_rules! example {
    ($name:ident, $file:literal) => {
        #[path = $file]
        mod $name;
    };
}

example!(kernel, "../examples/kernel.rs");
example!(noise, "../examples/noise.rs");
example!(linear, "../examples/linear.rs");
example!(picard, "../examples/picard.rs");
example!(weak, "../examples/weak.rs");
example!(moments, "../examples/moments.rs");
example!(converge, "../examples/converge.rs");
example!(config, "../examples/config.rs");

#[test]
fn examples_run() {
    kernel::run().unwrap();
    noise::run().unwrap();
    linear::run().unwrap();
    picard::run().unwrap();
    weak::run().unwrap();
    moments::run().unwrap();
    converge::run().unwrap();
    config::run().unwrap();
}
