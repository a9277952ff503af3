//! Gaussian field on a quarter annulus: matrix-free solve, comparison with
//! the dense Galerkin reference, and a VTK file of the weighted modes.
//!
//! cargo run --release --example quarter_annulus

use std::sync::Arc;

use kle::cli::output::{structured_grid_vtk, weighted_modes};
use kle::reference::{assemble_dense_galerkin, solve_dense};
use kle::{
    builtin, parameter_lattice, solve_spectrum, CovarianceKernel, Kernel, KleOperator,
    LanczosConfig, ModeTable, SpaceSpec,
};

fn main() -> kle::Result<()> {
    let patch = builtin::quarter_annulus(1.0, 2.0);
    let gauss = CovarianceKernel::gaussian(1.0, 0.8)?;
    let kernel: Arc<dyn Kernel> = Arc::new(gauss);
    let trial = [SpaceSpec::smooth(2, 12), SpaceSpec::smooth(2, 12)];
    let interp = [SpaceSpec::smooth(3, 12), SpaceSpec::smooth(3, 12)];
    let op = KleOperator::from_specs(&patch, &trial, &interp, kernel, 1)?;
    let s = solve_spectrum(&op, &LanczosConfig::new(8))?;

    let dense = assemble_dense_galerkin(&patch, op.trial_bases(), &gauss, None, 4096)?;
    let reference = solve_dense(&dense, 8)?;
    println!("N = {}, interpolation points = {}", op.size(), op.interp_size());
    println!("{:>4} {:>16} {:>16} {:>10}", "mode", "matrix-free", "dense Galerkin", "rel gap");
    for i in 0..8 {
        let (a, b) = (s.eigenvalues[i], reference.eigenvalues[i]);
        println!("{:>4} {a:>16.10} {b:>16.10} {:>10.2e}", i + 1, (a - b).abs() / b);
    }

    let table = ModeTable::new(&s, &patch, op.trial_bases(), parameter_lattice(2, 33))?;
    let vtk = structured_grid_vtk("quarter annulus", 2, 33, table.physical(), &weighted_modes(&s, &table));
    std::fs::write("quarter_annulus_modes.vtk", vtk)?;
    println!("wrote quarter_annulus_modes.vtk");
    Ok(())
}
