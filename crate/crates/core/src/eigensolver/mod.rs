//! Largest eigenpairs of the standard-form operator and the resulting
//! truncated expansion.

mod lanczos;
mod modes;

pub use lanczos::{lanczos, LanczosConfig, LanczosOutcome};
pub use modes::{eval_eigenfunction, parameter_lattice, sample_realizations, variance_field, ModeTable};

use crate::error::{KleError, Result};
use crate::operator::{KleOperator, StageTimes};

/// Truncated spectrum with trial-space coefficient vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct KleSpectrum {
    /// Descending, nonnegative.
    pub eigenvalues: Vec<f64>,
    /// `B`-orthonormal trial coefficients, one vector per mode.
    pub vectors: Vec<Vec<f64>>,
    /// Residual norms `‖Ã′v′ − λv′‖` of the standard-form problem.
    pub residuals: Vec<f64>,
    /// Operator applications spent.
    pub matvecs: usize,
    pub restarts: usize,
    /// Eigenvalues more negative than `−tol·λ₁` that were clipped to zero.
    pub psd_violations: usize,
}

impl KleSpectrum {
    pub fn num_modes(&self) -> usize {
        self.eigenvalues.len()
    }

    /// The first `m` modes.
    pub fn truncated(&self, m: usize) -> Self {
        let m = m.min(self.num_modes());
        Self {
            eigenvalues: self.eigenvalues[..m].to_vec(),
            vectors: self.vectors[..m].to_vec(),
            residuals: self.residuals[..m].to_vec(),
            ..self.clone()
        }
    }

    pub fn trace(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }
}

/// Flip `v` so that its largest-magnitude entry is positive.
///
/// Entries within a relative `1e-8` of the maximum count as ties and the
/// first of them decides, so symmetric modes get a stable sign.
pub fn apply_sign_convention(v: &mut [f64]) {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if let Some(&x) = v.iter().find(|x| x.abs() >= max * (1.0 - 1e-8)) {
        if x < 0.0 {
            v.iter_mut().for_each(|t| *t = -*t);
        }
    }
}

/// Clip eigenvalues in `(−threshold, 0)` to zero and count the ones below.
pub fn clip_eigenvalues(values: &mut [f64], threshold: f64) -> usize {
    let mut violations = 0;
    for v in values.iter_mut() {
        if *v < 0.0 {
            if *v <= -threshold {
                violations += 1;
            }
            *v = 0.0;
        }
    }
    violations
}

pub fn solve_spectrum(op: &KleOperator, config: &LanczosConfig) -> Result<KleSpectrum> {
    let mut times = StageTimes::default();
    solve_spectrum_timed(op, config, &mut times)
}

/// As [`solve_spectrum`], accumulating per-stage operator time.
pub fn solve_spectrum_timed(
    op: &KleOperator,
    config: &LanczosConfig,
    times: &mut StageTimes,
) -> Result<KleSpectrum> {
    let out = lanczos(op.size(), |v| op.apply_timed(v, times), config)?;
    let converged = out.converged;
    let scale = out.values.first().copied().unwrap_or(0.0).abs();
    let max_residual = out.residuals.iter().fold(0.0f64, |a, &b| a.max(b));
    let mut eigenvalues = out.values;
    let psd_violations = clip_eigenvalues(&mut eigenvalues, config.tol * scale);
    let mut vectors = Vec::with_capacity(out.vectors.len());
    for vp in &out.vectors {
        let mut v = op.recover_coefficients(vp)?;
        let nrm = op.gram_inner(&v, &v)?.sqrt();
        v.iter_mut().for_each(|x| *x /= nrm);
        apply_sign_convention(&mut v);
        vectors.push(v);
    }
    let spectrum = KleSpectrum {
        eigenvalues,
        vectors,
        residuals: out.residuals,
        matvecs: out.matvecs,
        restarts: out.restarts,
        psd_violations,
    };
    if converged {
        Ok(spectrum)
    } else {
        Err(KleError::NoConvergence {
            restarts: out.restarts,
            max_residual,
            best: Box::new(spectrum),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::builtin;
    use crate::kernels::{CovarianceKernel, Kernel};
    use crate::operator::{SpaceSpec, DENSE_CAP};
    use nalgebra::{DMatrix, SymmetricEigen};
    use std::sync::Arc;

    fn op_1d(kernel: CovarianceKernel, p: usize, el: usize) -> KleOperator {
        let patch = builtin::unit_interval();
        let k: Arc<dyn Kernel> = Arc::new(kernel);
        KleOperator::from_specs(
            &patch,
            &[SpaceSpec::smooth(p, el)],
            &[SpaceSpec::new(p, 2 * el, 0)],
            k,
            1,
        )
        .unwrap()
    }

    #[test]
    fn sign_convention() {
        let mut v = vec![0.1, -0.9, 0.5];
        apply_sign_convention(&mut v);
        assert_eq!(v, vec![-0.1, 0.9, -0.5]);
        let mut w = vec![0.0, 0.0];
        apply_sign_convention(&mut w);
        assert_eq!(w, vec![0.0, 0.0]);
        let mut t = vec![-0.5, 0.1, 0.5 + 1e-12];
        apply_sign_convention(&mut t);
        assert_eq!(t[0], 0.5);
    }

    #[test]
    fn clipping() {
        let mut v = vec![1.0, 1e-3, -1e-12, -1e-3];
        assert_eq!(clip_eigenvalues(&mut v, 1e-10), 1);
        assert_eq!(v, vec![1.0, 1e-3, 0.0, 0.0]);
    }

    #[test]
    fn constant_kernel_rank_one() {
        let op = op_1d(CovarianceKernel::constant(1.0).unwrap(), 2, 4);
        let s = solve_spectrum(&op, &LanczosConfig::new(3)).unwrap();
        assert!((s.eigenvalues[0] - 1.0).abs() < 1e-12);
        assert!(s.eigenvalues[1].abs() < 1e-12);
        assert_eq!(s.psd_violations, 0);
    }

    #[test]
    fn b_orthonormal_descending_and_matches_dense() {
        let patch = builtin::quarter_annulus(1.0, 2.0);
        let k: Arc<dyn Kernel> = Arc::new(CovarianceKernel::exponential(1.0, 0.8).unwrap());
        let op = KleOperator::from_specs(
            &patch,
            &[SpaceSpec::smooth(2, 6), SpaceSpec::smooth(2, 6)],
            &[SpaceSpec::new(2, 6, 0), SpaceSpec::new(3, 6, 1)],
            k,
            2,
        )
        .unwrap();
        let s = solve_spectrum(&op, &LanczosConfig::new(8)).unwrap();
        for w in s.eigenvalues.windows(2) {
            assert!(w[0] >= w[1] && w[1] >= 0.0);
        }
        for i in 0..8 {
            assert!(s.residuals[i] <= 1e-10 * s.eigenvalues[0]);
            for j in 0..8 {
                let g = op.gram_inner(&s.vectors[i], &s.vectors[j]).unwrap();
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((g - e).abs() < 1e-8);
            }
        }
        let a = op.assemble_dense_ibq(DENSE_CAP).unwrap();
        let n = op.size();
        let dm = DMatrix::from_row_slice(n, n, a.as_slice());
        let mut ev: Vec<f64> = SymmetricEigen::new(dm).eigenvalues.iter().copied().collect();
        ev.sort_by(|x, y| y.total_cmp(x));
        for i in 0..8 {
            assert!((ev[i] - s.eigenvalues[i]).abs() < 1e-10 * ev[0]);
        }
    }

    #[test]
    fn timings_accumulate() {
        let op = op_1d(CovarianceKernel::exponential(1.0, 1.0).unwrap(), 2, 16);
        let mut t = StageTimes::default();
        let s = solve_spectrum_timed(&op, &LanczosConfig::new(4), &mut t).unwrap();
        assert!(s.matvecs > 0);
        assert!(t.total().as_nanos() > 0);
    }

    #[test]
    fn non_convergence_carries_best() {
        let op = op_1d(CovarianceKernel::exponential(1.0, 1.0).unwrap(), 2, 64);
        let cfg = LanczosConfig {
            max_restarts: 0,
            tol: 1e-15,
            ..LanczosConfig::new(20)
        };
        match solve_spectrum(&op, &cfg) {
            Err(KleError::NoConvergence { best, .. }) => assert_eq!(best.num_modes(), 20),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn truncation() {
        let op = op_1d(CovarianceKernel::exponential(1.0, 1.0).unwrap(), 2, 8);
        let s = solve_spectrum(&op, &LanczosConfig::new(5)).unwrap();
        let t = s.truncated(2);
        assert_eq!(t.num_modes(), 2);
        assert_eq!(t.eigenvalues, s.eigenvalues[..2]);
        assert!(s.trace() <= 1.0 + 1e-8);
    }
}
