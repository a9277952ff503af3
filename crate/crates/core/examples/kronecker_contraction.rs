//! Kronecker matrix-vector products by direction-wise contraction, checked
//! against the explicit Kronecker matrix.
//!
//! cargo run --release --example kronecker_contraction

use std::time::Instant;

use kle::linalg::DenseMatrix;
use kle::reference::explicit_kronecker;
use kle::tensor::KroneckerFactors;

fn factor(rows: usize, cols: usize, salt: f64) -> DenseMatrix {
    let data: Vec<f64> = (0..rows * cols).map(|k| ((k as f64 + 1.0) * salt).sin()).collect();
    DenseMatrix::from_row_slice(rows, cols, &data)
}

fn main() -> kle::Result<()> {
    let dirs = vec![factor(12, 10, 0.37), factor(8, 9, 0.71), factor(14, 11, 1.13)];
    let x: Vec<f64> = (0..10 * 9 * 11).map(|i| (i as f64 * 0.01).cos()).collect();

    let t = Instant::now();
    let kron = KroneckerFactors::from_directions(dirs.clone());
    let fast = kron.matvec(&x)?;
    let t_fast = t.elapsed();

    let t = Instant::now();
    let full = explicit_kronecker(&dirs);
    let mut slow = vec![0.0; full.rows()];
    full.matvec(&x, &mut slow);
    let t_slow = t.elapsed();

    let err = fast.iter().zip(&slow).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("explicit matrix {}x{}", full.rows(), full.cols());
    println!("contraction {t_fast:.2?}, explicit {t_slow:.2?}, max difference {err:.2e}");
    Ok(())
}
