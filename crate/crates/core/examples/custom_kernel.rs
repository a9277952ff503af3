//! Plugging a user kernel (Matern 3/2) into the operator through the
//! `Kernel` trait.
//!
//! cargo run --release --example custom_kernel

use std::sync::Arc;

use kle::kernels::distance;
use kle::{builtin, solve_spectrum, Kernel, KleOperator, LanczosConfig, SpaceSpec};

struct Matern32 {
    variance: f64,
    length: f64,
}

impl Kernel for Matern32 {
    fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        let a = 3f64.sqrt() * distance(x, y) / self.length;
        self.variance * (1.0 + a) * (-a).exp()
    }
}

fn main() -> kle::Result<()> {
    let patch = builtin::quarter_annulus(1.0, 2.0);
    let kernel: Arc<dyn Kernel> = Arc::new(Matern32 { variance: 1.0, length: 0.5 });
    let trial = [SpaceSpec::smooth(2, 10), SpaceSpec::smooth(2, 10)];
    let interp = [SpaceSpec::smooth(2, 20), SpaceSpec::smooth(2, 20)];
    let op = KleOperator::from_specs(&patch, &trial, &interp, kernel, 1)?;
    let s = solve_spectrum(&op, &LanczosConfig::new(10))?;
    for (i, l) in s.eigenvalues.iter().enumerate() {
        println!("{:>3} {l:.8}", i + 1);
    }
    Ok(())
}
