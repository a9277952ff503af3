//! Implicitly restarted Lanczos for the largest eigenpairs of a symmetric
//! operator given only through matrix-vector products.
//!
//! The Krylov basis is kept fully reorthogonalized (classical Gram-Schmidt,
//! two passes). Restarts apply the unwanted Ritz values as exact shifts of
//! an explicit QR sweep on the projected matrix.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{KleError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LanczosConfig {
    /// Number of wanted eigenpairs `M`.
    pub num_modes: usize,
    /// Krylov basis size; `None` means `max(2M + 1, 20)` capped at `N`.
    pub krylov_dim: Option<usize>,
    /// Ritz pairs are accepted once `‖Av − θv‖ ≤ tol·θ₁`.
    pub tol: f64,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for LanczosConfig {
    fn default() -> Self {
        Self {
            num_modes: 10,
            krylov_dim: None,
            tol: 1e-10,
            max_restarts: 300,
            seed: 0,
        }
    }
}

impl LanczosConfig {
    pub fn new(num_modes: usize) -> Self {
        Self {
            num_modes,
            ..Self::default()
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_krylov_dim(mut self, m: usize) -> Self {
        self.krylov_dim = Some(m);
        self
    }

    /// Basis size actually used for an operator of size `n`.
    pub fn krylov_dim_for(&self, n: usize) -> usize {
        self.krylov_dim
            .unwrap_or((2 * self.num_modes + 1).max(20))
            .min(n)
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.num_modes == 0 || self.num_modes >= n {
            return Err(KleError::InvalidArgument(format!(
                "num_modes must satisfy 0 < M < N = {n}, got {}",
                self.num_modes
            )));
        }
        if self.krylov_dim_for(n) <= self.num_modes {
            return Err(KleError::InvalidArgument(format!(
                "krylov_dim {} must exceed num_modes {}",
                self.krylov_dim_for(n),
                self.num_modes
            )));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(KleError::InvalidArgument(format!("tol must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

/// Raw result of the iteration, in the basis the operator acts on.
#[derive(Debug, Clone)]
pub struct LanczosOutcome {
    /// Descending Ritz values.
    pub values: Vec<f64>,
    /// Unit-norm Ritz vectors.
    pub vectors: Vec<Vec<f64>>,
    /// `‖Ax − θx‖` recomputed with the operator.
    pub residuals: Vec<f64>,
    pub matvecs: usize,
    pub restarts: usize,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Two passes of Gram-Schmidt against `basis`; returns the coefficients.
fn orthogonalize(basis: &[Vec<f64>], w: &mut [f64]) -> Vec<f64> {
    let mut h = vec![0.0; basis.len()];
    for _ in 0..2 {
        let c: Vec<f64> = basis.iter().map(|v| dot(v, w)).collect();
        for (v, &ci) in basis.iter().zip(&c) {
            axpy(-ci, v, w);
        }
        for (hi, ci) in h.iter_mut().zip(c) {
            *hi += ci;
        }
    }
    h
}

struct State<F> {
    apply: F,
    rng: ChaCha8Rng,
    n: usize,
    m: usize,
    basis: Vec<Vec<f64>>,
    h: DMatrix<f64>,
    f: Vec<f64>,
    beta: f64,
    anorm: f64,
    matvecs: usize,
}

impl<F: FnMut(&[f64]) -> Result<Vec<f64>>> State<F> {
    /// A random unit vector orthogonal to the current basis.
    fn random_orthogonal(&mut self) -> Vec<f64> {
        loop {
            let mut w: Vec<f64> = (0..self.n).map(|_| StandardNormal.sample(&mut self.rng)).collect();
            let before = norm(&w);
            orthogonalize(&self.basis, &mut w);
            let nw = norm(&w);
            if nw > 1e-8 * before {
                w.iter_mut().for_each(|x| *x /= nw);
                return w;
            }
        }
    }

    fn breakdown(&self, beta: f64) -> bool {
        beta <= 1e3 * f64::EPSILON * self.anorm.max(f64::MIN_POSITIVE) * (self.n as f64).sqrt()
    }

    /// Grow the factorization from `basis.len()` to `m` columns.
    fn extend(&mut self) -> Result<()> {
        while self.basis.len() <= self.m {
            let j = self.basis.len() - 1;
            let mut w = (self.apply)(&self.basis[j])?;
            if w.len() != self.n {
                return Err(KleError::Dimension {
                    context: "Lanczos matvec",
                    expected: self.n,
                    actual: w.len(),
                });
            }
            self.matvecs += 1;
            let hcol = orthogonalize(&self.basis, &mut w);
            for (i, &hi) in hcol.iter().enumerate() {
                self.h[(i, j)] = hi;
                self.h[(j, i)] = hi;
                self.anorm = self.anorm.max(hi.abs());
            }
            let beta = norm(&w);
            if j + 1 == self.m {
                self.f = w;
                self.beta = beta;
                return Ok(());
            }
            let next = if self.breakdown(beta) {
                self.random_orthogonal()
            } else {
                w.iter().map(|x| x / beta).collect()
            };
            self.basis.push(next);
        }
        Ok(())
    }

    /// Ritz values descending, with eigenvectors of the projected matrix.
    fn ritz(&self) -> (Vec<f64>, DMatrix<f64>) {
        let h = self.h.view((0, 0), (self.m, self.m)).into_owned();
        let h = (&h + h.transpose()) * 0.5;
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..self.m).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vecs = DMatrix::from_fn(self.m, self.m, |r, c| eig.eigenvectors[(r, order[c])]);
        (vals, vecs)
    }

    /// Apply `shifts` implicitly and truncate the factorization to `k` columns.
    fn restart(&mut self, shifts: &[f64], k: usize) {
        let m = self.m;
        let mut h = self.h.view((0, 0), (m, m)).into_owned();
        let mut q = DMatrix::<f64>::identity(m, m);
        let mut rots = Vec::with_capacity(m);
        for &mu in shifts {
            for i in 0..m {
                h[(i, i)] -= mu;
            }
            rots.clear();
            for i in 0..m - 1 {
                let (a, b) = (h[(i, i)], h[(i + 1, i)]);
                let r = a.hypot(b);
                let (c, s) = if r == 0.0 { (1.0, 0.0) } else { (a / r, b / r) };
                for col in 0..m {
                    let (x, y) = (h[(i, col)], h[(i + 1, col)]);
                    h[(i, col)] = c * x + s * y;
                    h[(i + 1, col)] = -s * x + c * y;
                }
                rots.push((c, s));
            }
            for (i, &(c, s)) in rots.iter().enumerate() {
                for row in 0..m {
                    let (x, y) = (h[(row, i)], h[(row, i + 1)]);
                    h[(row, i)] = c * x + s * y;
                    h[(row, i + 1)] = -s * x + c * y;
                    let (x, y) = (q[(row, i)], q[(row, i + 1)]);
                    q[(row, i)] = c * x + s * y;
                    q[(row, i + 1)] = -s * x + c * y;
                }
            }
            for i in 0..m {
                h[(i, i)] += mu;
            }
            h = (&h + h.transpose()) * 0.5;
        }
        let combine = |col: usize, basis: &[Vec<f64>]| {
            let mut out = vec![0.0; self.n];
            for (l, v) in basis.iter().enumerate().take(m) {
                let c = q[(l, col)];
                if c != 0.0 {
                    axpy(c, v, &mut out);
                }
            }
            out
        };
        let new_basis: Vec<Vec<f64>> = (0..k).map(|c| combine(c, &self.basis)).collect();
        let mut f = combine(k, &self.basis);
        let hk = h[(k, k - 1)];
        f.iter_mut().for_each(|x| *x *= hk);
        axpy(q[(m - 1, k - 1)], &self.f, &mut f);

        self.basis = new_basis;
        orthogonalize(&self.basis, &mut f);
        let beta = norm(&f);
        let next = if self.breakdown(beta) {
            self.random_orthogonal()
        } else {
            f.iter().map(|x| x / beta).collect()
        };
        self.h.fill(0.0);
        for r in 0..k {
            for c in 0..k {
                self.h[(r, c)] = h[(r, c)];
            }
        }
        self.basis.push(next);
    }

    fn ritz_vector(&self, y: &DMatrix<f64>, col: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        for (l, v) in self.basis.iter().enumerate().take(self.m) {
            axpy(y[(l, col)], v, &mut x);
        }
        let nx = norm(&x);
        x.iter_mut().for_each(|t| *t /= nx);
        x
    }
}

/// Largest `config.num_modes` eigenpairs of the symmetric map `apply` on `Rⁿ`.
///
/// Non-convergence is not an error here; check `converged`.
pub fn lanczos<F>(n: usize, apply: F, config: &LanczosConfig) -> Result<LanczosOutcome>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    config.validate(n)?;
    let big_m = config.num_modes;
    let m = config.krylov_dim_for(n);
    let keep = big_m + (m - big_m) / 2;
    let mut st = State {
        apply,
        rng: ChaCha8Rng::seed_from_u64(config.seed),
        n,
        m,
        basis: Vec::with_capacity(m + 1),
        h: DMatrix::zeros(m, m),
        f: vec![0.0; n],
        beta: 0.0,
        anorm: 0.0,
        matvecs: 0,
    };
    let v0 = st.random_orthogonal();
    st.basis.push(v0);
    st.extend()?;

    let mut restarts = 0;
    let (vals, y, converged) = loop {
        let (vals, y) = st.ritz();
        let scale = vals[0].abs();
        let converged = (0..big_m).all(|i| (st.beta * y[(m - 1, i)]).abs() <= config.tol * scale);
        if converged || restarts == config.max_restarts || m == n && st.breakdown(st.beta) {
            break (vals, y, converged || m == n);
        }
        st.restart(&vals[keep..], keep);
        st.extend()?;
        restarts += 1;
    };

    let mut values = Vec::with_capacity(big_m);
    let mut vectors = Vec::with_capacity(big_m);
    let mut residuals = Vec::with_capacity(big_m);
    for (i, &theta) in vals.iter().enumerate().take(big_m) {
        let x = st.ritz_vector(&y, i);
        let mut r = (st.apply)(&x)?;
        st.matvecs += 1;
        axpy(-theta, &x, &mut r);
        residuals.push(norm(&r));
        values.push(theta);
        vectors.push(x);
    }
    Ok(LanczosOutcome {
        values,
        vectors,
        residuals,
        matvecs: st.matvecs,
        restarts,
        converged,
    })
}
