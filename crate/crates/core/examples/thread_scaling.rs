//! Wall time of one operator application for 1, 2, 4 threads on a
//! 3D instance. Outputs are bitwise identical across thread counts.
//!
//! cargo run --release --example thread_scaling

use std::sync::Arc;
use std::time::Instant;

use kle::{builtin, CovarianceKernel, Kernel, KleOperator, SpaceSpec};

fn main() -> kle::Result<()> {
    let patch = builtin::half_cylinder_default();
    let kernel: Arc<dyn Kernel> = Arc::new(CovarianceKernel::gaussian(1.0, 5.0)?);
    let trial = [SpaceSpec::smooth(2, 32), SpaceSpec::smooth(2, 4), SpaceSpec::smooth(2, 16)];
    let interp = [
        SpaceSpec::smooth(2, 32).discontinuous_at_c0(true),
        SpaceSpec::smooth(2, 2),
        SpaceSpec::smooth(2, 8),
    ];
    let mut op = KleOperator::from_specs(&patch, &trial, &interp, kernel, 1)?;
    let v: Vec<f64> = (0..op.size()).map(|i| (i as f64 * 0.1).sin()).collect();
    println!("N = {}, interpolation points = {}", op.size(), op.interp_size());
    println!("available cores: {}", std::thread::available_parallelism().map_or(1, |n| n.get()));

    let mut base = None;
    let mut first = None;
    for threads in [1, 2, 4] {
        op.set_threads(threads);
        let t = Instant::now();
        let w = op.apply(&v)?;
        let secs = t.elapsed().as_secs_f64();
        let b = *base.get_or_insert(secs);
        let same = first.get_or_insert_with(|| w.clone()) == &w;
        println!("{threads} threads: {secs:.3} s, speedup {:.2}, identical {same}", b / secs);
    }
    Ok(())
}
