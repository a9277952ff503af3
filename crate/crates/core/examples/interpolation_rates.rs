//! L2 error of the interpolated kernel under uniform h-refinement, with
//! observed log-log slopes (Gaussian: p+1, exponential: 3/2).
//!
//! cargo run --release --example interpolation_rates

use kle::cli::output::loglog_rate;
use kle::reference::kernel_interpolation_error;
use kle::{builtin, BSplineBasis, CovarianceKernel};

fn main() -> kle::Result<()> {
    let patch = builtin::unit_interval();
    let levels = [64usize, 128, 256, 512];
    let h: Vec<f64> = levels.iter().map(|&n| 1.0 / n as f64).collect();
    let kernels = [
        ("gaussian", CovarianceKernel::gaussian(1.0, 0.1)?),
        ("exponential", CovarianceKernel::exponential(1.0, 0.1)?),
    ];
    for (name, kernel) in kernels {
        for p in 1..=4 {
            let errs = levels
                .iter()
                .map(|&n| {
                    let b = BSplineBasis::uniform(p, n, p as i32 - 1)?;
                    kernel_interpolation_error(&patch, &[b], &kernel, p + 4)
                })
                .collect::<kle::Result<Vec<f64>>>()?;
            let slope = loglog_rate(&h, &errs).unwrap_or(f64::NAN);
            let shown: Vec<String> = errs.iter().map(|e| format!("{e:.2e}")).collect();
            println!("{name:<11} p={p}  {}  slope {slope:.2}", shown.join("  "));
        }
    }
    Ok(())
}
