//! Kronecker-product algebra on flat tensors.
//!
//! A tensor with extents `(n₁, …, n_d)` is stored flat with the first index
//! varying fastest: `i = i₁ + n₁·i₂ + n₁·n₂·i₃` (zero-based). A Kronecker
//! product `D_d ⊗ ⋯ ⊗ D_1` acts on such a vector by applying `D_k` along
//! mode `k`, one fiber at a time, so no product matrix is ever formed.

use crate::error::{KleError, Result};
use crate::linalg::{CholeskyFactor, DenseMatrix, LuFactors};
use crate::quadrature::UnivariateMatrix;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorIndexMap {
    extents: Vec<usize>,
}

impl TensorIndexMap {
    pub fn new(extents: Vec<usize>) -> Self {
        Self { extents }
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn len(&self) -> usize {
        self.extents.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.extents.len());
        let mut flat = 0;
        let mut stride = 1;
        for (&i, &n) in idx.iter().zip(&self.extents) {
            debug_assert!(i < n);
            flat += i * stride;
            stride *= n;
        }
        flat
    }

    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        self.extents
            .iter()
            .map(|&n| {
                let i = flat % n;
                flat /= n;
                i
            })
            .collect()
    }
}

/// A linear map applied along one tensor mode.
pub trait ModeOp {
    fn in_len(&self) -> usize;
    fn out_len(&self) -> usize;
    /// `y = op(x)` for one fiber.
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl ModeOp for DenseMatrix {
    fn in_len(&self) -> usize {
        self.cols()
    }
    fn out_len(&self) -> usize {
        self.rows()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matvec(x, y);
    }
}

impl ModeOp for UnivariateMatrix {
    fn in_len(&self) -> usize {
        self.cols()
    }
    fn out_len(&self) -> usize {
        self.rows()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matvec(x, y);
    }
}

/// Transpose of a matrix-like mode operator.
pub struct Transposed<'a, M>(pub &'a M);

impl ModeOp for Transposed<'_, DenseMatrix> {
    fn in_len(&self) -> usize {
        self.0.rows()
    }
    fn out_len(&self) -> usize {
        self.0.cols()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.0.matvec_transpose(x, y);
    }
}

impl ModeOp for Transposed<'_, UnivariateMatrix> {
    fn in_len(&self) -> usize {
        self.0.rows()
    }
    fn out_len(&self) -> usize {
        self.0.cols()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.0.matvec_transpose(x, y);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriangularSide {
    /// Solve `L y = x`.
    Forward,
    /// Solve `Lᵀ y = x`.
    Backward,
}

pub struct CholeskySolve<'a>(pub &'a CholeskyFactor, pub TriangularSide);

impl ModeOp for CholeskySolve<'_> {
    fn in_len(&self) -> usize {
        self.0.dim()
    }
    fn out_len(&self) -> usize {
        self.0.dim()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(x);
        match self.1 {
            TriangularSide::Forward => self.0.solve_lower_in_place(y),
            TriangularSide::Backward => self.0.solve_upper_in_place(y),
        }
    }
}

pub struct LuSolve<'a>(pub &'a LuFactors, pub bool);

impl ModeOp for LuSolve<'_> {
    fn in_len(&self) -> usize {
        self.0.dim()
    }
    fn out_len(&self) -> usize {
        self.0.dim()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(x);
        if self.1 {
            self.0.solve_transpose_in_place(y);
        } else {
            self.0.solve_in_place(y);
        }
    }
}

/// Apply `ops[k]` along mode `k` for every `k`, fastest mode first.
///
/// `extents` are the input extents; the result has extents `ops[k].out_len()`.
pub fn apply_modes(extents: &[usize], ops: &[&dyn ModeOp], x: &[f64]) -> Result<Vec<f64>> {
    if ops.len() != extents.len() {
        return Err(KleError::Dimension {
            context: "number of Kronecker factors",
            expected: extents.len(),
            actual: ops.len(),
        });
    }
    for (op, &n) in ops.iter().zip(extents) {
        if op.in_len() != n {
            return Err(KleError::Dimension {
                context: "Kronecker factor columns",
                expected: n,
                actual: op.in_len(),
            });
        }
    }
    let expected: usize = extents.iter().product();
    if x.len() != expected {
        return Err(KleError::Dimension {
            context: "Kronecker matvec input",
            expected,
            actual: x.len(),
        });
    }
    let mut cur_ext = extents.to_vec();
    let mut cur = x.to_vec();
    for (k, op) in ops.iter().enumerate() {
        cur = apply_mode(&cur_ext, k, *op, &cur);
        cur_ext[k] = op.out_len();
    }
    Ok(cur)
}

fn apply_mode(extents: &[usize], mode: usize, op: &dyn ModeOp, x: &[f64]) -> Vec<f64> {
    let n = extents[mode];
    let m = op.out_len();
    let inner: usize = extents[..mode].iter().product();
    let outer: usize = extents[mode + 1..].iter().product();
    let mut y = vec![0.0; inner * m * outer];
    if inner == 1 {
        for o in 0..outer {
            op.apply(&x[o * n..(o + 1) * n], &mut y[o * m..(o + 1) * m]);
        }
        return y;
    }
    let mut fin = vec![0.0; n];
    let mut fout = vec![0.0; m];
    for o in 0..outer {
        let xb = o * n * inner;
        let yb = o * m * inner;
        for r in 0..inner {
            for (i, f) in fin.iter_mut().enumerate() {
                *f = x[xb + i * inner + r];
            }
            op.apply(&fin, &mut fout);
            for (i, &f) in fout.iter().enumerate() {
                y[yb + i * inner + r] = f;
            }
        }
    }
    y
}

/// Ordered univariate factors standing for `D_d ⊗ ⋯ ⊗ D_1`.
#[derive(Debug, Clone, PartialEq)]
pub struct KroneckerFactors<F> {
    /// `by_direction[k]` acts on index `i_{k+1}`.
    by_direction: Vec<F>,
}

impl<F> KroneckerFactors<F> {
    /// Factors listed as `(D_d, …, D_1)`: the last one acts on the fastest index.
    pub fn new(mut factors: Vec<F>) -> Self {
        factors.reverse();
        Self {
            by_direction: factors,
        }
    }

    /// Factors listed as `(D_1, …, D_d)`.
    pub fn from_directions(factors: Vec<F>) -> Self {
        Self {
            by_direction: factors,
        }
    }

    pub fn dim(&self) -> usize {
        self.by_direction.len()
    }

    pub fn direction(&self, k: usize) -> &F {
        &self.by_direction[k]
    }

    pub fn directions(&self) -> &[F] {
        &self.by_direction
    }
}

impl<F: ModeOp> KroneckerFactors<F> {
    pub fn in_extents(&self) -> Vec<usize> {
        self.by_direction.iter().map(ModeOp::in_len).collect()
    }

    pub fn out_extents(&self) -> Vec<usize> {
        self.by_direction.iter().map(ModeOp::out_len).collect()
    }

    pub fn shape(&self) -> (usize, usize) {
        (
            self.out_extents().iter().product(),
            self.in_extents().iter().product(),
        )
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        let ops: Vec<&dyn ModeOp> = self.by_direction.iter().map(|f| f as &dyn ModeOp).collect();
        apply_modes(&self.in_extents(), &ops, x)
    }
}

macro_rules! transpose_matvec {
    ($ty:ty) => {
        impl KroneckerFactors<$ty> {
            /// `(D_d ⊗ ⋯ ⊗ D_1)ᵀ x`.
            pub fn matvec_transpose(&self, x: &[f64]) -> Result<Vec<f64>> {
                let t: Vec<Transposed<'_, $ty>> =
                    self.by_direction.iter().map(Transposed).collect();
                let ops: Vec<&dyn ModeOp> = t.iter().map(|f| f as &dyn ModeOp).collect();
                let ext: Vec<usize> = t.iter().map(ModeOp::in_len).collect();
                apply_modes(&ext, &ops, x)
            }
        }
    };
}

transpose_matvec!(DenseMatrix);
transpose_matvec!(UnivariateMatrix);

impl KroneckerFactors<DenseMatrix> {
    /// Explicit dense Kronecker product; for tests and small diagnostics.
    pub fn to_dense(&self) -> DenseMatrix {
        let mut acc = DenseMatrix::identity(1);
        for f in &self.by_direction {
            acc = kron(f, &acc);
        }
        acc
    }
}

/// Dense `A ⊗ B`.
pub fn kron(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let (ar, ac, br, bc) = (a.rows(), a.cols(), b.rows(), b.cols());
    let mut out = DenseMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let v = a.get(i, j);
            if v == 0.0 {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out.set(i * br + k, j * bc + l, v * b.get(k, l));
                }
            }
        }
    }
    out
}

/// Solve `(L_d ⊗ ⋯ ⊗ L_1) y = x` (forward) or with the transposed product
/// (backward).
pub fn kron_solve_cholesky(
    factors: &KroneckerFactors<CholeskyFactor>,
    x: &[f64],
    side: TriangularSide,
) -> Result<Vec<f64>> {
    let solves: Vec<CholeskySolve<'_>> = factors
        .directions()
        .iter()
        .map(|l| CholeskySolve(l, side))
        .collect();
    let ops: Vec<&dyn ModeOp> = solves.iter().map(|s| s as &dyn ModeOp).collect();
    let ext: Vec<usize> = factors.directions().iter().map(CholeskyFactor::dim).collect();
    apply_modes(&ext, &ops, x)
}

/// Apply `(B̃_d ⊗ ⋯ ⊗ B̃_1)⁻¹` (or its transpose) via factor-wise LU solves.
pub fn kron_solve_lu(
    factors: &KroneckerFactors<LuFactors>,
    x: &[f64],
    transpose: bool,
) -> Result<Vec<f64>> {
    let solves: Vec<LuSolve<'_>> = factors
        .directions()
        .iter()
        .map(|lu| LuSolve(lu, transpose))
        .collect();
    let ops: Vec<&dyn ModeOp> = solves.iter().map(|s| s as &dyn ModeOp).collect();
    let ext: Vec<usize> = factors.directions().iter().map(LuFactors::dim).collect();
    apply_modes(&ext, &ops, x)
}
