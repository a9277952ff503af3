//! Exponential field (bL = 5) on the half-open cylinder shell with the
//! 32x1x8 quadratic C1 trial mesh. The interpolation space is C0 and breaks
//! at the C0 joint of the two arcs.
//!
//! cargo run --release --example cylinder_case1 [threads]

use std::sync::Arc;
use std::time::Instant;

use kle::{
    builtin, solve_spectrum_timed, CovarianceKernel, Kernel, KleOperator, LanczosConfig,
    SpaceSpec, StageTimes,
};

fn main() -> kle::Result<()> {
    let threads = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(1);
    let patch = builtin::half_cylinder_default();
    let kernel: Arc<dyn Kernel> =
        Arc::new(CovarianceKernel::exponential(1.0, 0.5 * builtin::HALF_CYLINDER_LENGTH)?);
    let trial = [SpaceSpec::smooth(2, 32), SpaceSpec::smooth(2, 1), SpaceSpec::smooth(2, 8)];
    let interp = [
        SpaceSpec::new(2, 32, 0).discontinuous_at_c0(true),
        SpaceSpec::new(2, 1, 0),
        SpaceSpec::new(2, 8, 0),
    ];

    let t0 = Instant::now();
    let op = KleOperator::from_specs(&patch, &trial, &interp, kernel, threads)?;
    let setup = t0.elapsed();
    let mut stages = StageTimes::default();
    let t1 = Instant::now();
    let s = solve_spectrum_timed(&op, &LanczosConfig::new(20), &mut stages)?;
    let solve = t1.elapsed();

    for (i, l) in s.eigenvalues.iter().enumerate() {
        println!("{:>3} {l:>14.7}", i + 1);
    }
    println!("trial dofs {}  interpolation dofs {}", op.size(), op.interp_size());
    println!("setup {setup:.2?}  solve {solve:.2?}  matvecs {}", s.matvecs);
    let total = stages.total().as_secs_f64();
    for (k, d) in stages.0.iter().enumerate() {
        println!("stage {} {:>6.1}%", k + 1, 100.0 * d.as_secs_f64() / total);
    }
    Ok(())
}
