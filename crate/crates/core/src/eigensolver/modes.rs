//! Pointwise evaluation of eigenfunctions, truncated variance and sampling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::KleSpectrum;
use crate::error::{KleError, Result};
use crate::geometry::{TensorPatch, JACOBIAN_FLOOR};
use crate::splines::{BSplineBasis, Side};

/// Nonzero trial functions `B_j(ξ̂)/√det DF(ξ̂)` at one parameter point, as
/// `(flat index, value)`. The flag reports a floored Jacobian.
fn trial_values(
    patch: &TensorPatch,
    trial: &[BSplineBasis],
    xi: &[f64],
) -> Result<(Vec<(usize, f64)>, bool)> {
    let d = patch.dim();
    if trial.len() != d || xi.len() != d {
        return Err(KleError::Dimension {
            context: "eigenfunction evaluation point",
            expected: d,
            actual: xi.len().min(trial.len()),
        });
    }
    let sides = vec![Side::Right; d];
    let (det, floored) = patch.jacobian_determinant_floored(xi, &sides, JACOBIAN_FLOOR)?;
    let scale = 1.0 / det.sqrt();
    let mut out = vec![(0usize, scale)];
    let mut stride = 1;
    for (b, &x) in trial.iter().zip(xi) {
        let act = b.evaluate(x)?;
        let mut next = Vec::with_capacity(out.len() * act.values.len());
        for &(idx, val) in &out {
            for (a, &bv) in act.values.iter().enumerate() {
                next.push((idx + (act.first + a) * stride, val * bv));
            }
        }
        out = next;
        stride *= b.dim();
    }
    Ok((out, floored))
}

/// `φᵢ(F(ξ̂)) = Σⱼ vᵢ[j] B_j(ξ̂)/√det DF(ξ̂)`.
pub fn eval_eigenfunction(
    spectrum: &KleSpectrum,
    patch: &TensorPatch,
    trial: &[BSplineBasis],
    mode: usize,
    xi: &[f64],
) -> Result<f64> {
    let v = spectrum.vectors.get(mode).ok_or_else(|| {
        KleError::InvalidArgument(format!(
            "mode {mode} out of range, spectrum has {}",
            spectrum.num_modes()
        ))
    })?;
    let (vals, _) = trial_values(patch, trial, xi)?;
    Ok(vals.iter().map(|&(j, b)| v[j] * b).sum())
}

/// Uniform lattice of `res` points per direction on `[0, 1]^dim`, first
/// direction fastest.
pub fn parameter_lattice(dim: usize, res: usize) -> Vec<Vec<f64>> {
    let res = res.max(2);
    let total = res.pow(dim as u32);
    (0..total)
        .map(|mut flat| {
            (0..dim)
                .map(|_| {
                    let i = flat % res;
                    flat /= res;
                    i as f64 / (res - 1) as f64
                })
                .collect()
        })
        .collect()
}

/// All modes evaluated on a fixed set of parameter points.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeTable {
    params: Vec<Vec<f64>>,
    physical: Vec<Vec<f64>>,
    /// Point-major: `values[p * modes + i] = φᵢ(x_p)`.
    values: Vec<f64>,
    modes: usize,
    floored: usize,
}

impl ModeTable {
    pub fn new(
        spectrum: &KleSpectrum,
        patch: &TensorPatch,
        trial: &[BSplineBasis],
        params: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let modes = spectrum.num_modes();
        let mut values = Vec::with_capacity(params.len() * modes);
        let mut physical = Vec::with_capacity(params.len());
        let mut floored = 0;
        for xi in &params {
            let (tv, f) = trial_values(patch, trial, xi)?;
            floored += usize::from(f);
            for v in &spectrum.vectors {
                values.push(tv.iter().map(|&(j, b)| v[j] * b).sum());
            }
            physical.push(patch.map_point(xi)?);
        }
        Ok(Self {
            params,
            physical,
            values,
            modes,
            floored,
        })
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn num_modes(&self) -> usize {
        self.modes
    }

    pub fn params(&self) -> &[Vec<f64>] {
        &self.params
    }

    pub fn physical(&self) -> &[Vec<f64>] {
        &self.physical
    }

    pub fn value(&self, point: usize, mode: usize) -> f64 {
        self.values[point * self.modes + mode]
    }

    /// Mode values at one point.
    pub fn at(&self, point: usize) -> &[f64] {
        &self.values[point * self.modes..(point + 1) * self.modes]
    }

    /// Points at which the Jacobian determinant was floored.
    pub fn floored_count(&self) -> usize {
        self.floored
    }
}

/// `Σᵢ λᵢ φᵢ(x)²` at every table point, using the first `m` modes.
pub fn variance_field(spectrum: &KleSpectrum, table: &ModeTable, m: usize) -> Vec<f64> {
    let m = m.min(table.num_modes()).min(spectrum.num_modes());
    (0..table.len())
        .map(|p| {
            table.at(p)[..m]
                .iter()
                .zip(&spectrum.eigenvalues)
                .map(|(phi, lam)| lam * phi * phi)
                .sum()
        })
        .collect()
}

/// Realizations `μ + Σᵢ √λᵢ φᵢ ξᵢ` with `ξᵢ` i.i.d. standard normal.
///
/// Gaussian germs are a modelling choice: the expansion only guarantees
/// uncorrelated `ξᵢ`. Output is bitwise reproducible for a fixed seed.
pub fn sample_realizations(
    spectrum: &KleSpectrum,
    table: &ModeTable,
    mean: &[f64],
    count: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    if mean.len() != table.len() {
        return Err(KleError::Dimension {
            context: "mean field",
            expected: table.len(),
            actual: mean.len(),
        });
    }
    let m = table.num_modes().min(spectrum.num_modes());
    let sqrt_lam: Vec<f64> = spectrum.eigenvalues[..m].iter().map(|l| l.max(0.0).sqrt()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let xi: Vec<f64> = (0..m).map(|_| StandardNormal.sample(&mut rng)).collect();
        let field = (0..table.len())
            .map(|p| {
                let phi = table.at(p);
                mean[p] + (0..m).map(|i| sqrt_lam[i] * phi[i] * xi[i]).sum::<f64>()
            })
            .collect();
        out.push(field);
    }
    Ok(out)
}
