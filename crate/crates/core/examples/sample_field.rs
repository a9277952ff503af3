//! Realizations of a truncated expansion on the unit square, plus the
//! pointwise variance captured by the first M modes.
//!
//! cargo run --release --example sample_field

use std::sync::Arc;

use kle::{
    builtin, parameter_lattice, sample_realizations, solve_spectrum, variance_field,
    CovarianceKernel, Kernel, KleOperator, LanczosConfig, ModeTable, SpaceSpec,
};

fn main() -> kle::Result<()> {
    let patch = builtin::unit_box(2);
    let kernel: Arc<dyn Kernel> = Arc::new(CovarianceKernel::exponential(1.0, 0.5)?);
    let trial = [SpaceSpec::smooth(2, 10), SpaceSpec::smooth(2, 10)];
    let interp = [SpaceSpec::new(2, 20, 0), SpaceSpec::new(2, 20, 0)];
    let op = KleOperator::from_specs(&patch, &trial, &interp, kernel, 1)?;
    let s = solve_spectrum(&op, &LanczosConfig::new(30))?;
    println!("captured variance fraction {:.4}", s.trace());

    let table = ModeTable::new(&s, &patch, op.trial_bases(), parameter_lattice(2, 5))?;
    let var = variance_field(&s, &table, 30);
    let fields = sample_realizations(&s, &table, &vec![0.0; table.len()], 3, 7)?;
    println!("{:>12} {:>8} {:>9} {:>9} {:>9}", "point", "var", "sample 1", "sample 2", "sample 3");
    for p in 0..table.len() {
        let x = &table.physical()[p];
        println!(
            "({:.2}, {:.2}) {:>8.4} {:>9.4} {:>9.4} {:>9.4}",
            x[0], x[1], var[p], fields[0][p], fields[1][p], fields[2][p]
        );
    }
    Ok(())
}
