//! The matrix-free standard-form operator
//! `Ã′ = L⁻¹ Mᵀ B̃⁻¹ J Γ J B̃⁻ᵀ M L⁻ᵀ`.
//!
//! `L` is the Kronecker Cholesky factor of the trial Gramian, `M` the mixed
//! mass matrix between interpolation and trial spaces, `B̃` the Greville
//! collocation matrix, `J` the diagonal of `√det DF` on the Greville grid
//! and `Γ` the kernel evaluated between Greville images. `Γ` is never
//! stored: stage five recomputes one row at a time.

use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::error::{KleError, Result};
use crate::geometry::{GrevilleGrid, TensorPatch, JACOBIAN_FLOOR};
use crate::kernels::Kernel;
use crate::linalg::{CholeskyFactor, DenseMatrix, LuFactors};
use crate::quadrature::{
    collocation_matrix, mixed_mass_matrix, trial_mass_matrix, UnivariateMatrix,
};
use crate::splines::{BSplineBasis, KnotVector};
use crate::tensor::{kron_solve_cholesky, kron_solve_lu, KroneckerFactors, TriangularSide};

/// Default limit on `max(N, Ñ)` for explicit dense assembly.
pub const DENSE_CAP: usize = 4096;

/// Spline space in one parametric direction, derived from the geometry's
/// own breakpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpaceSpec {
    pub degree: usize,
    /// Total number of elements; must be a multiple of the number of
    /// geometry spans in this direction.
    pub elements: usize,
    /// Continuity across the new breakpoints, `-1 ..= degree-1`.
    pub continuity: i32,
    /// Make geometry lines of continuity C⁰ or lower fully discontinuous.
    pub discontinuous_at_c0: bool,
}

impl SpaceSpec {
    pub fn new(degree: usize, elements: usize, continuity: i32) -> Self {
        Self {
            degree,
            elements,
            continuity,
            discontinuous_at_c0: false,
        }
    }

    /// Maximal smoothness `C^{p-1}`.
    pub fn smooth(degree: usize, elements: usize) -> Self {
        Self::new(degree, elements, degree as i32 - 1)
    }

    pub fn discontinuous_at_c0(mut self, on: bool) -> Self {
        self.discontinuous_at_c0 = on;
        self
    }

    /// Build the space on top of a geometry basis.
    ///
    /// Geometry breakpoints keep their continuity (capped by the requested
    /// one); every geometry span is then split uniformly.
    pub fn build(&self, geometry: &BSplineBasis) -> Result<BSplineBasis> {
        let p = self.degree;
        if self.continuity >= p as i32 || self.continuity < -1 {
            return Err(KleError::InvalidArgument(format!(
                "continuity {} not in [-1, {}] for degree {p}",
                self.continuity,
                p as i32 - 1
            )));
        }
        let geo = geometry.knot_vector();
        let bps = geo.breakpoints();
        let spans = bps.len() - 1;
        if self.elements == 0 || self.elements % spans != 0 {
            return Err(KleError::InvalidArgument(format!(
                "{} elements cannot be split evenly over {spans} geometry spans",
                self.elements
            )));
        }
        let last = bps.len() - 1;
        let mut knots = Vec::new();
        for (i, &(v, m)) in bps.iter().enumerate() {
            let mult = if i == 0 || i == last {
                p + 1
            } else {
                let c_geo = geo.continuity_for_multiplicity(m);
                if self.discontinuous_at_c0 && c_geo <= 0 {
                    p + 1
                } else {
                    (p as i32 - c_geo.min(self.continuity)).clamp(1, p as i32 + 1) as usize
                }
            };
            knots.extend(std::iter::repeat_n(v, mult));
        }
        let coarse = KnotVector::new(knots, p)?;
        let fine = if self.elements / spans > 1 {
            coarse.refine_uniform(self.elements / spans, self.continuity)?
        } else {
            coarse
        };
        Ok(fine.into())
    }
}

/// Build one space per direction of `patch`.
pub fn build_spaces(patch: &TensorPatch, specs: &[SpaceSpec]) -> Result<Vec<BSplineBasis>> {
    if specs.len() != patch.dim() {
        return Err(KleError::Dimension {
            context: "space descriptions",
            expected: patch.dim(),
            actual: specs.len(),
        });
    }
    specs
        .iter()
        .zip(patch.bases())
        .map(|(s, b)| s.build(b))
        .collect()
}

/// Wall time spent in each of the nine stages.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StageTimes(pub [Duration; 9]);

impl StageTimes {
    pub fn total(&self) -> Duration {
        self.0.iter().sum()
    }

    pub fn add(&mut self, other: &StageTimes) {
        for (a, b) in self.0.iter_mut().zip(other.0) {
            *a += b;
        }
    }
}

pub struct KleOperator {
    trial: Vec<BSplineBasis>,
    interp: Vec<BSplineBasis>,
    chol: KroneckerFactors<CholeskyFactor>,
    mass: KroneckerFactors<UnivariateMatrix>,
    colloc: KroneckerFactors<LuFactors>,
    grid: GrevilleGrid,
    kernel: Arc<dyn Kernel>,
    threads: usize,
}

impl std::fmt::Debug for KleOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KleOperator")
            .field("trial_dims", &self.trial_dims())
            .field("interp_dims", &self.interp_dims())
            .field("threads", &self.threads)
            .finish_non_exhaustive()
    }
}

impl KleOperator {
    /// Form and factor all univariate matrices and evaluate the Greville grid.
    pub fn build(
        patch: &TensorPatch,
        trial: Vec<BSplineBasis>,
        interp: Vec<BSplineBasis>,
        kernel: Arc<dyn Kernel>,
        threads: usize,
    ) -> Result<Self> {
        let d = patch.dim();
        for (what, v) in [("trial bases", &trial), ("interpolation bases", &interp)] {
            if v.len() != d {
                return Err(KleError::Dimension {
                    context: what,
                    expected: d,
                    actual: v.len(),
                });
            }
        }
        if threads == 0 {
            return Err(KleError::InvalidArgument("thread count must be at least 1".into()));
        }
        let mut chol = Vec::with_capacity(d);
        let mut mass = Vec::with_capacity(d);
        let mut colloc = Vec::with_capacity(d);
        for (t, i) in trial.iter().zip(&interp) {
            chol.push(trial_mass_matrix(t)?.cholesky_factor()?);
            mass.push(mixed_mass_matrix(i, t)?);
            colloc.push(collocation_matrix(i)?.lu_factor()?);
        }
        let grid = patch.build_greville_grid_with_floor(&interp, JACOBIAN_FLOOR)?;
        Ok(Self {
            trial,
            interp,
            chol: KroneckerFactors::from_directions(chol),
            mass: KroneckerFactors::from_directions(mass),
            colloc: KroneckerFactors::from_directions(colloc),
            grid,
            kernel,
            threads,
        })
    }

    /// Build from per-direction space descriptions.
    pub fn from_specs(
        patch: &TensorPatch,
        trial: &[SpaceSpec],
        interp: &[SpaceSpec],
        kernel: Arc<dyn Kernel>,
        threads: usize,
    ) -> Result<Self> {
        Self::build(
            patch,
            build_spaces(patch, trial)?,
            build_spaces(patch, interp)?,
            kernel,
            threads,
        )
    }

    pub fn dim(&self) -> usize {
        self.trial.len()
    }

    /// Trial-space dimension `N`.
    pub fn size(&self) -> usize {
        self.trial_dims().iter().product()
    }

    /// Interpolation-space dimension `Ñ`.
    pub fn interp_size(&self) -> usize {
        self.grid.len()
    }

    pub fn trial_dims(&self) -> Vec<usize> {
        self.trial.iter().map(BSplineBasis::dim).collect()
    }

    pub fn interp_dims(&self) -> Vec<usize> {
        self.interp.iter().map(BSplineBasis::dim).collect()
    }

    pub fn trial_bases(&self) -> &[BSplineBasis] {
        &self.trial
    }

    pub fn interp_bases(&self) -> &[BSplineBasis] {
        &self.interp
    }

    pub fn grid(&self) -> &GrevilleGrid {
        &self.grid
    }

    pub fn kernel(&self) -> &dyn Kernel {
        self.kernel.as_ref()
    }

    pub fn threads(&self) -> usize {
        self.threads
    }

    pub fn set_threads(&mut self, threads: usize) {
        self.threads = threads.max(1);
    }

    pub fn cholesky_factors(&self) -> &KroneckerFactors<CholeskyFactor> {
        &self.chol
    }

    pub fn mixed_mass(&self) -> &KroneckerFactors<UnivariateMatrix> {
        &self.mass
    }

    pub fn collocation_lu(&self) -> &KroneckerFactors<LuFactors> {
        &self.colloc
    }

    /// Number of Greville points whose Jacobian determinant was floored.
    pub fn floored_jacobians(&self) -> usize {
        self.grid.floored_count()
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut t = StageTimes::default();
        self.apply_timed(v, &mut t)
    }

    /// Apply the operator, adding the time spent per stage to `times`.
    pub fn apply_timed(&self, v: &[f64], times: &mut StageTimes) -> Result<Vec<f64>> {
        if v.len() != self.size() {
            return Err(KleError::Dimension {
                context: "operator input",
                expected: self.size(),
                actual: v.len(),
            });
        }
        let mut clock = Instant::now();
        let mut lap = |k: usize, times: &mut StageTimes| {
            let now = Instant::now();
            times.0[k] += now - clock;
            clock = now;
        };
        let w = kron_solve_cholesky(&self.chol, v, TriangularSide::Backward)?;
        lap(0, times);
        let w = self.mass.matvec(&w)?;
        lap(1, times);
        let mut w = kron_solve_lu(&self.colloc, &w, true)?;
        lap(2, times);
        scale_by(&mut w, self.grid.jacobian_sqrt());
        lap(3, times);
        let mut z = self.kernel_contraction(&w);
        lap(4, times);
        scale_by(&mut z, self.grid.jacobian_sqrt());
        lap(5, times);
        let z = kron_solve_lu(&self.colloc, &z, false)?;
        lap(6, times);
        let z = self.mass.matvec_transpose(&z)?;
        lap(7, times);
        let z = kron_solve_cholesky(&self.chol, &z, TriangularSide::Forward)?;
        lap(8, times);
        Ok(z)
    }

    /// `z = Γ y` over the Greville images, rows split into contiguous blocks
    /// of `⌈Ñ / threads⌉`, one block per worker.
    pub fn kernel_contraction(&self, y: &[f64]) -> Vec<f64> {
        let n = self.grid.len();
        let dim = self.grid.dim();
        let pts = self.grid.points_flat();
        let kernel = self.kernel.as_ref();
        let mut z = vec![0.0; n];
        let block = n.div_ceil(self.threads.max(1)).max(1);
        let fill = |start: usize, out: &mut [f64]| {
            for (i, zi) in out.iter_mut().enumerate() {
                let r = start + i;
                *zi = kernel.row_dot(&pts[r * dim..(r + 1) * dim], pts, dim, y);
            }
        };
        if self.threads <= 1 || n <= block {
            fill(0, &mut z);
        } else {
            std::thread::scope(|s| {
                for (b, chunk) in z.chunks_mut(block).enumerate() {
                    let fill = &fill;
                    s.spawn(move || fill(b * block, chunk));
                }
            });
        }
        z
    }

    /// `P = J B̃⁻ᵀ M L⁻ᵀ` (or without `L⁻ᵀ`) stored as its transpose, `N × Ñ`.
    fn projection_transposed(&self, precondition: bool) -> Result<DenseMatrix> {
        let n = self.size();
        let nt = self.interp_size();
        let mut pt = DenseMatrix::zeros(n, nt);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.fill(0.0);
            e[j] = 1.0;
            let w = if precondition {
                kron_solve_cholesky(&self.chol, &e, TriangularSide::Backward)?
            } else {
                e.clone()
            };
            let w = self.mass.matvec(&w)?;
            let mut w = kron_solve_lu(&self.colloc, &w, true)?;
            scale_by(&mut w, self.grid.jacobian_sqrt());
            for (k, &val) in w.iter().enumerate() {
                pt.set(j, k, val);
            }
        }
        Ok(pt)
    }

    fn dense_from_projection(&self, pt: &DenseMatrix) -> DenseMatrix {
        let nt = self.interp_size();
        let mut gamma = DenseMatrix::zeros(nt, nt);
        for a in 0..nt {
            let xa = self.grid.point(a);
            for b in 0..nt {
                gamma.set(a, b, self.kernel.eval(xa, self.grid.point(b)));
            }
        }
        // W = Pᵀ Γ, then Pᵀ Γ P = W P.
        let w = pt.matmul(&gamma);
        let n = pt.rows();
        let mut out = DenseMatrix::zeros(n, n);
        for i in 0..n {
            let wi = w.row(i);
            for j in 0..n {
                let v: f64 = wi.iter().zip(pt.row(j)).map(|(a, b)| a * b).sum();
                out.set(i, j, v);
            }
        }
        out
    }

    fn check_cap(&self, cap: usize) -> Result<()> {
        let size = self.size().max(self.interp_size());
        if size > cap {
            return Err(KleError::CapExceeded { size, cap });
        }
        Ok(())
    }

    /// Explicit `Ã′`; refuses when `max(N, Ñ)` exceeds `cap`.
    pub fn assemble_dense_ibq(&self, cap: usize) -> Result<DenseMatrix> {
        self.check_cap(cap)?;
        let pt = self.projection_transposed(true)?;
        Ok(self.dense_from_projection(&pt))
    }

    /// Explicit `Ã = Mᵀ G̃ M` without the Cholesky transformation.
    pub fn assemble_dense_ibq_galerkin(&self, cap: usize) -> Result<DenseMatrix> {
        self.check_cap(cap)?;
        let pt = self.projection_transposed(false)?;
        Ok(self.dense_from_projection(&pt))
    }

    /// Recover trial coefficients `v = L⁻ᵀ v′`.
    pub fn recover_coefficients(&self, v_prime: &[f64]) -> Result<Vec<f64>> {
        kron_solve_cholesky(&self.chol, v_prime, TriangularSide::Backward)
    }

    /// `vᵀ B w` with the Kronecker Gramian `B = L Lᵀ`.
    pub fn gram_inner(&self, v: &[f64], w: &[f64]) -> Result<f64> {
        let a = self.gram_lt(v)?;
        let b = self.gram_lt(w)?;
        Ok(a.iter().zip(&b).map(|(x, y)| x * y).sum())
    }

    /// `Lᵀ v`.
    fn gram_lt(&self, v: &[f64]) -> Result<Vec<f64>> {
        let lt: Vec<DenseMatrix> = self
            .chol
            .directions()
            .iter()
            .map(|l| l.to_dense().transpose())
            .collect();
        KroneckerFactors::from_directions(lt).matvec(v)
    }
}

fn scale_by(v: &mut [f64], s: &[f64]) {
    for (a, b) in v.iter_mut().zip(s) {
        *a *= b;
    }
}
