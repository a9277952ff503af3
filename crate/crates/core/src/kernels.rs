//! Isotropic covariance kernels `Γ(x, x') = σ² ρ(‖x − x'‖₂)`.

use serde::{Deserialize, Serialize};

use crate::error::{KleError, Result};
use crate::geometry::TensorPatch;

/// A symmetric positive semi-definite covariance function.
///
/// Implementors supply [`Kernel::eval`]; [`Kernel::row_dot`] is the hot
/// loop of the matrix-free operator and may be specialized.
pub trait Kernel: Send + Sync {
    fn eval(&self, x: &[f64], y: &[f64]) -> f64;

    /// `Σ_l Γ(x, p_l) y_l` where `points` holds the `p_l` flat with stride
    /// `dim`. The sum runs in index order.
    fn row_dot(&self, x: &[f64], points: &[f64], dim: usize, y: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (p, &yl) in points.chunks_exact(dim).zip(y) {
            acc += self.eval(x, p) * yl;
        }
        acc
    }
}

#[inline]
pub fn distance(x: &[f64], y: &[f64]) -> f64 {
    squared_distance(x, y).sqrt()
}

#[inline]
fn squared_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelFamily {
    /// `σ² exp(−r / bL)`
    Exponential,
    /// `σ² exp(−r² / (c·bL²))` with `c` from [`GaussDenominator`]
    Gaussian,
    /// `σ²` everywhere; rank one, handy for closed-form checks.
    Constant,
}

impl std::str::FromStr for KernelFamily {
    type Err = KleError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exponential" => Ok(Self::Exponential),
            "gaussian" => Ok(Self::Gaussian),
            "constant" => Ok(Self::Constant),
            _ => Err(KleError::InvalidArgument(format!(
                "unknown kernel family `{s}` (expected exponential, gaussian or constant)"
            ))),
        }
    }
}

impl std::fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Exponential => "exponential",
            Self::Gaussian => "gaussian",
            Self::Constant => "constant",
        })
    }
}

/// Factor in the Gaussian exponent denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum GaussDenominator {
    /// `exp(−(r/bL)²)`
    #[default]
    One,
    /// `exp(−r²/(2 bL²))`
    Two,
}

impl GaussDenominator {
    pub fn factor(self) -> f64 {
        match self {
            Self::One => 1.0,
            Self::Two => 2.0,
        }
    }

    pub fn from_factor(c: u32) -> Result<Self> {
        match c {
            1 => Ok(Self::One),
            2 => Ok(Self::Two),
            _ => Err(KleError::InvalidArgument(format!(
                "Gaussian denominator must be 1 or 2, got {c}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceKernel {
    pub family: KernelFamily,
    pub variance: f64,
    pub corr_length: f64,
    #[serde(default)]
    pub gauss_denominator: GaussDenominator,
}

impl CovarianceKernel {
    pub fn new(family: KernelFamily, variance: f64, corr_length: f64) -> Result<Self> {
        if !(variance > 0.0 && variance.is_finite()) {
            return Err(KleError::InvalidArgument(format!(
                "variance must be positive, got {variance}"
            )));
        }
        if !(corr_length > 0.0 && corr_length.is_finite()) {
            return Err(KleError::InvalidArgument(format!(
                "correlation length must be positive, got {corr_length}"
            )));
        }
        Ok(Self {
            family,
            variance,
            corr_length,
            gauss_denominator: GaussDenominator::One,
        })
    }

    pub fn exponential(variance: f64, corr_length: f64) -> Result<Self> {
        Self::new(KernelFamily::Exponential, variance, corr_length)
    }

    pub fn gaussian(variance: f64, corr_length: f64) -> Result<Self> {
        Self::new(KernelFamily::Gaussian, variance, corr_length)
    }

    pub fn constant(variance: f64) -> Result<Self> {
        Self::new(KernelFamily::Constant, variance, 1.0)
    }

    pub fn with_gauss_denominator(mut self, d: GaussDenominator) -> Self {
        self.gauss_denominator = d;
        self
    }

    fn gauss_scale(&self) -> f64 {
        1.0 / (self.gauss_denominator.factor() * self.corr_length * self.corr_length)
    }

    /// `Γ(F(ξ), F(ξ'))`.
    pub fn eval_pullback(&self, patch: &TensorPatch, xi: &[f64], xi_prime: &[f64]) -> Result<f64> {
        let x = patch.map_point(xi)?;
        let y = patch.map_point(xi_prime)?;
        Ok(self.eval(&x, &y))
    }
}

/// Inner loops monomorphized on the point dimension.
fn row_dot_fixed<const D: usize>(
    x: &[f64],
    points: &[f64],
    y: &[f64],
    f: impl Fn(f64) -> f64,
) -> f64 {
    let mut xs = [0.0; D];
    xs.copy_from_slice(&x[..D]);
    let mut acc = 0.0;
    for (p, &yl) in points.chunks_exact(D).zip(y) {
        let mut r2 = 0.0;
        for k in 0..D {
            let t = xs[k] - p[k];
            r2 += t * t;
        }
        acc += f(r2) * yl;
    }
    acc
}

impl CovarianceKernel {
    /// Covariance as a function of distance.
    pub fn eval_distance(&self, r: f64) -> f64 {
        match self.family {
            KernelFamily::Exponential => self.variance * (-r / self.corr_length).exp(),
            KernelFamily::Gaussian => self.variance * (-r * r * self.gauss_scale()).exp(),
            KernelFamily::Constant => self.variance,
        }
    }
}

impl Kernel for CovarianceKernel {
    fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match self.family {
            KernelFamily::Gaussian => {
                self.variance * (-squared_distance(x, y) * self.gauss_scale()).exp()
            }
            _ => self.eval_distance(distance(x, y)),
        }
    }

    fn row_dot(&self, x: &[f64], points: &[f64], dim: usize, y: &[f64]) -> f64 {
        let s2 = self.variance;
        match self.family {
            KernelFamily::Constant => s2 * y.iter().sum::<f64>(),
            KernelFamily::Exponential => {
                let c = -1.0 / self.corr_length;
                let f = |r2: f64| (c * r2.sqrt()).exp();
                s2 * match dim {
                    1 => row_dot_fixed::<1>(x, points, y, f),
                    2 => row_dot_fixed::<2>(x, points, y, f),
                    3 => row_dot_fixed::<3>(x, points, y, f),
                    _ => unreachable!("dimension 1-3"),
                }
            }
            KernelFamily::Gaussian => {
                let c = -self.gauss_scale();
                let f = |r2: f64| (c * r2).exp();
                s2 * match dim {
                    1 => row_dot_fixed::<1>(x, points, y, f),
                    2 => row_dot_fixed::<2>(x, points, y, f),
                    3 => row_dot_fixed::<3>(x, points, y, f),
                    _ => unreachable!("dimension 1-3"),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::builtin;
    use proptest::prelude::*;

    const E_INV: f64 = 0.367_879_441_171_442_3;

    #[test]
    fn closed_forms() {
        let e = CovarianceKernel::exponential(1.0, 1.0).unwrap();
        assert!((e.eval(&[0.0], &[1.0]) - E_INV).abs() < 1e-15);
        let g = CovarianceKernel::gaussian(1.0, 0.5).unwrap();
        assert!((g.eval(&[0.0, 0.0], &[0.3, 0.4]) - E_INV).abs() < 1e-15);
        let g2 = g.with_gauss_denominator(GaussDenominator::Two);
        assert!((g2.eval(&[0.0], &[0.5]) - (-0.5f64).exp()).abs() < 1e-15);
        for k in [e, g, CovarianceKernel::constant(2.5).unwrap()] {
            let x = [0.2, -1.0, 3.0];
            assert_eq!(k.eval(&x, &x), k.variance);
        }
    }

    #[test]
    fn gaussian_convention_at_correlation_length() {
        let g = CovarianceKernel::gaussian(2.0, 0.7).unwrap();
        assert!((g.eval_distance(0.7) - 2.0 * E_INV).abs() < 1e-15);
    }

    #[test]
    fn invalid_parameters() {
        assert!(CovarianceKernel::exponential(0.0, 1.0).is_err());
        assert!(CovarianceKernel::gaussian(1.0, -1.0).is_err());
        assert!(CovarianceKernel::gaussian(1.0, f64::NAN).is_err());
        assert!("matern".parse::<KernelFamily>().is_err());
        assert_eq!("gaussian".parse::<KernelFamily>().unwrap(), KernelFamily::Gaussian);
        assert!(GaussDenominator::from_factor(3).is_err());
    }

    #[test]
    fn pullback() {
        let k = CovarianceKernel::exponential(1.0, 1.0).unwrap();
        let id = builtin::unit_box(2);
        let a = [0.1, 0.7];
        let b = [0.9, 0.2];
        assert_eq!(k.eval_pullback(&id, &a, &b).unwrap(), k.eval(&a, &b));
        assert_eq!(k.eval_pullback(&id, &a, &a).unwrap(), 1.0);
        let scaled = builtin::interval(2.0);
        let v = k.eval_pullback(&scaled, &[0.0], &[1.0]).unwrap();
        assert!((v - (-2.0f64).exp()).abs() < 1e-15);
        assert!(k.eval_pullback(&scaled, &[0.0], &[1.5]).is_err());
    }

    #[test]
    fn row_dot_matches_generic_loop() {
        let pts: Vec<f64> = (0..60).map(|i| ((i * 37) % 17) as f64 * 0.13).collect();
        let y: Vec<f64> = (0..20).map(|i| (i as f64).cos()).collect();
        for k in [
            CovarianceKernel::exponential(1.3, 0.4).unwrap(),
            CovarianceKernel::gaussian(0.8, 0.9).unwrap(),
            CovarianceKernel::constant(2.0).unwrap(),
        ] {
            for dim in [1usize, 2, 3] {
                let n = pts.len() / dim;
                let p = &pts[..n * dim];
                let yy = &y[..n.min(20)];
                let p = &p[..yy.len() * dim];
                let x = &pts[..dim];
                let expected: f64 = p
                    .chunks_exact(dim)
                    .zip(yy)
                    .map(|(q, &w)| k.eval(x, q) * w)
                    .sum();
                let got = k.row_dot(x, p, dim, yy);
                assert!((got - expected).abs() < 1e-13 * expected.abs().max(1.0));
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn symmetric_and_bounded(
            a in prop::collection::vec(-5.0f64..5.0, 3),
            b in prop::collection::vec(-5.0f64..5.0, 3),
            s2 in 0.1f64..4.0,
            l in 0.05f64..3.0,
        ) {
            for k in [
                CovarianceKernel::exponential(s2, l).unwrap(),
                CovarianceKernel::gaussian(s2, l).unwrap(),
            ] {
                let v = k.eval(&a, &b);
                prop_assert_eq!(v, k.eval(&b, &a));
                prop_assert!(v >= 0.0 && v <= s2);
            }
        }

        #[test]
        fn monotone_decay(mut radii in prop::collection::vec(0.0f64..10.0, 2..50), l in 0.05f64..3.0) {
            radii.sort_by(|x, y| x.partial_cmp(y).unwrap());
            for k in [
                CovarianceKernel::exponential(1.0, l).unwrap(),
                CovarianceKernel::gaussian(1.0, l).unwrap(),
            ] {
                let vals: Vec<f64> = radii.iter().map(|&r| k.eval_distance(r)).collect();
                prop_assert!(vals.windows(2).all(|w| w[1] <= w[0]));
            }
        }
    }
}
