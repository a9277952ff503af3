//! Tensor-product NURBS geometry `F: [0,1]^d → D` and its Jacobian.

pub mod builtin;

use serde::{Deserialize, Serialize};

use crate::error::{KleError, Result};
use crate::splines::{ActiveBasisDerivs, BSplineBasis, Side};
use crate::tensor::TensorIndexMap;

/// Default floor applied to Jacobian determinants near degenerate points.
pub const JACOBIAN_FLOOR: f64 = 1e-14;

/// Relative determinant below which a point counts as inverted rather than
/// merely degenerate.
const INVERTED_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct TensorPatch {
    bases: Vec<BSplineBasis>,
    /// Flat `n × d` coordinates, control points in vectorization order.
    control_points: Vec<f64>,
    weights: Vec<f64>,
}

/// Physical point and Jacobian at one parameter value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointEval {
    pub x: [f64; 3],
    /// `jac[i][j] = ∂Fᵢ/∂ξⱼ`
    pub jac: [[f64; 3]; 3],
}

impl PointEval {
    pub fn determinant(&self, dim: usize) -> f64 {
        let j = &self.jac;
        match dim {
            1 => j[0][0],
            2 => j[0][0] * j[1][1] - j[0][1] * j[1][0],
            _ => {
                j[0][0] * (j[1][1] * j[2][2] - j[1][2] * j[2][1])
                    - j[0][1] * (j[1][0] * j[2][2] - j[1][2] * j[2][0])
                    + j[0][2] * (j[1][0] * j[2][1] - j[1][1] * j[2][0])
            }
        }
    }

    /// Determinant divided by the product of Jacobian column norms.
    fn relative_determinant(&self, dim: usize) -> f64 {
        let det = self.determinant(dim);
        let scale: f64 = (0..dim)
            .map(|c| (0..dim).map(|r| self.jac[r][c].powi(2)).sum::<f64>().sqrt())
            .product();
        if scale > 0.0 {
            det / scale
        } else {
            0.0
        }
    }
}

impl TensorPatch {
    /// `control_points[i]` holds the `d` coordinates of control point `i`.
    pub fn new(
        bases: Vec<BSplineBasis>,
        control_points: Vec<Vec<f64>>,
        weights: Vec<f64>,
    ) -> Result<Self> {
        let d = bases.len();
        if !(1..=3).contains(&d) {
            return Err(KleError::InvalidArgument(format!(
                "patch dimension must be 1, 2 or 3, got {d}"
            )));
        }
        let n: usize = bases.iter().map(BSplineBasis::dim).product();
        if control_points.len() != n {
            return Err(KleError::Dimension {
                context: "control point count",
                expected: n,
                actual: control_points.len(),
            });
        }
        if weights.len() != n {
            return Err(KleError::Dimension {
                context: "weight count",
                expected: n,
                actual: weights.len(),
            });
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(KleError::InvalidArgument(format!(
                "weights must be positive and finite, found {w}"
            )));
        }
        let mut flat = Vec::with_capacity(n * d);
        for p in &control_points {
            if p.len() != d {
                return Err(KleError::Dimension {
                    context: "control point coordinates",
                    expected: d,
                    actual: p.len(),
                });
            }
            if p.iter().any(|c| !c.is_finite()) {
                return Err(KleError::InvalidArgument(
                    "control point coordinates must be finite".into(),
                ));
            }
            flat.extend_from_slice(p);
        }
        Ok(Self {
            bases,
            control_points: flat,
            weights,
        })
    }

    pub fn dim(&self) -> usize {
        self.bases.len()
    }

    pub fn bases(&self) -> &[BSplineBasis] {
        &self.bases
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn control_point(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.control_points[i * d..(i + 1) * d]
    }

    pub fn num_control_points(&self) -> usize {
        self.weights.len()
    }

    fn check_param(&self, xi: &[f64]) -> Result<()> {
        if xi.len() != self.dim() {
            return Err(KleError::Dimension {
                context: "parameter point",
                expected: self.dim(),
                actual: xi.len(),
            });
        }
        if let Some(&v) = xi.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(KleError::Domain { value: v });
        }
        Ok(())
    }

    pub fn map_point(&self, xi: &[f64]) -> Result<Vec<f64>> {
        let e = self.evaluate(xi, &vec![Side::Right; self.dim()])?;
        Ok(e.x[..self.dim()].to_vec())
    }

    /// Point and Jacobian, with a one-sided limit chosen per direction.
    pub fn evaluate(&self, xi: &[f64], sides: &[Side]) -> Result<PointEval> {
        self.check_param(xi)?;
        let act: Vec<ActiveBasisDerivs> = self
            .bases
            .iter()
            .zip(xi)
            .zip(sides)
            .map(|((b, &x), &s)| b.evaluate_derivs(x, s))
            .collect::<Result<_>>()?;
        Ok(self.combine(&act))
    }

    /// Combine per-direction basis values into the rational map.
    fn combine(&self, act: &[ActiveBasisDerivs]) -> PointEval {
        let d = self.dim();
        let ext: Vec<usize> = self.bases.iter().map(BSplineBasis::dim).collect();
        let mut w_sum = 0.0;
        let mut w_d = [0.0; 3];
        let mut s = [0.0; 3];
        let mut s_d = [[0.0; 3]; 3];
        let counts: Vec<usize> = act.iter().map(|a| a.values.len()).collect();
        let total: usize = counts.iter().product();
        let mut local = [0usize; 3];
        for t in 0..total {
            let mut rem = t;
            for k in 0..d {
                local[k] = rem % counts[k];
                rem /= counts[k];
            }
            let mut flat = 0;
            let mut stride = 1;
            let mut val = 1.0;
            let mut grad = [1.0; 3];
            for k in 0..d {
                let a = &act[k];
                flat += (a.first + local[k]) * stride;
                stride *= ext[k];
                val *= a.values[local[k]];
                for (g, gk) in grad.iter_mut().enumerate().take(d) {
                    *gk *= if g == k {
                        a.derivs[local[k]]
                    } else {
                        a.values[local[k]]
                    };
                }
            }
            let w = self.weights[flat];
            let p = &self.control_points[flat * d..(flat + 1) * d];
            w_sum += w * val;
            for j in 0..d {
                w_d[j] += w * grad[j];
            }
            for i in 0..d {
                s[i] += w * val * p[i];
                for j in 0..d {
                    s_d[i][j] += w * grad[j] * p[i];
                }
            }
        }
        let mut x = [0.0; 3];
        let mut jac = [[0.0; 3]; 3];
        for i in 0..d {
            x[i] = s[i] / w_sum;
        }
        for i in 0..d {
            for j in 0..d {
                jac[i][j] = (s_d[i][j] - x[i] * w_d[j]) / w_sum;
            }
        }
        PointEval { x, jac }
    }

    pub fn jacobian_matrix(&self, xi: &[f64]) -> Result<Vec<Vec<f64>>> {
        let e = self.evaluate(xi, &vec![Side::Right; self.dim()])?;
        let d = self.dim();
        Ok((0..d).map(|i| e.jac[i][..d].to_vec()).collect())
    }

    /// Strictly positive Jacobian determinant, or a singular-geometry error.
    pub fn jacobian_determinant(&self, xi: &[f64]) -> Result<f64> {
        let e = self.evaluate(xi, &vec![Side::Right; self.dim()])?;
        let det = e.determinant(self.dim());
        if !(det > 0.0) || !det.is_finite() {
            return Err(KleError::SingularGeometry {
                point: xi.to_vec(),
                det,
            });
        }
        Ok(det)
    }

    /// Determinant clamped from below by `floor`; the flag reports clamping.
    ///
    /// Only inverted points (clearly negative determinant) are errors.
    pub fn jacobian_determinant_floored(
        &self,
        xi: &[f64],
        sides: &[Side],
        floor: f64,
    ) -> Result<(f64, bool)> {
        let e = self.evaluate(xi, sides)?;
        Self::floor_det(&e, self.dim(), xi, floor)
    }

    fn floor_det(e: &PointEval, dim: usize, xi: &[f64], floor: f64) -> Result<(f64, bool)> {
        let det = e.determinant(dim);
        if !det.is_finite() || e.relative_determinant(dim) < -INVERTED_TOL {
            return Err(KleError::SingularGeometry {
                point: xi.to_vec(),
                det,
            });
        }
        if det < floor {
            Ok((floor, true))
        } else {
            Ok((det, false))
        }
    }

    /// Physical points and `√det DF` on the tensor grid of Greville abscissae
    /// of `interp_bases`.
    pub fn build_greville_grid(&self, interp_bases: &[BSplineBasis]) -> Result<GrevilleGrid> {
        self.build_greville_grid_with_floor(interp_bases, JACOBIAN_FLOOR)
    }

    pub fn build_greville_grid_with_floor(
        &self,
        interp_bases: &[BSplineBasis],
        floor: f64,
    ) -> Result<GrevilleGrid> {
        let d = self.dim();
        if interp_bases.len() != d {
            return Err(KleError::Dimension {
                context: "interpolation bases",
                expected: d,
                actual: interp_bases.len(),
            });
        }
        let params: Vec<Vec<(f64, Side)>> = interp_bases
            .iter()
            .map(BSplineBasis::greville_with_sides)
            .collect();
        let acts: Vec<Vec<ActiveBasisDerivs>> = params
            .iter()
            .zip(&self.bases)
            .map(|(ps, b)| {
                ps.iter()
                    .map(|&(x, s)| b.evaluate_derivs(x, s))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        let extents: Vec<usize> = params.iter().map(Vec::len).collect();
        let map = TensorIndexMap::new(extents.clone());
        let total = map.len();
        let mut points = Vec::with_capacity(total * d);
        let mut jacobian_sqrt = Vec::with_capacity(total);
        let mut floored = 0;
        let mut act = Vec::with_capacity(d);
        for flat in 0..total {
            let idx = map.unflatten(flat);
            act.clear();
            act.extend(idx.iter().enumerate().map(|(k, &i)| acts[k][i].clone()));
            let e = self.combine(&act);
            let xi: Vec<f64> = idx.iter().enumerate().map(|(k, &i)| params[k][i].0).collect();
            let (det, was_floored) = Self::floor_det(&e, d, &xi, floor)?;
            floored += usize::from(was_floored);
            points.extend_from_slice(&e.x[..d]);
            jacobian_sqrt.push(det.sqrt());
        }
        Ok(GrevilleGrid {
            dim: d,
            params,
            extents,
            points,
            jacobian_sqrt,
            floored,
        })
    }
}

/// Greville lattice of the interpolation space mapped to physical space.
#[derive(Debug, Clone, PartialEq)]
pub struct GrevilleGrid {
    dim: usize,
    params: Vec<Vec<(f64, Side)>>,
    extents: Vec<usize>,
    /// Flat `Ñ × d` physical coordinates in vectorization order.
    points: Vec<f64>,
    jacobian_sqrt: Vec<f64>,
    floored: usize,
}

impl GrevilleGrid {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.jacobian_sqrt.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jacobian_sqrt.is_empty()
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    /// Greville abscissae (with evaluation sides) of direction `k`.
    pub fn params(&self, k: usize) -> &[(f64, Side)] {
        &self.params[k]
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points_flat(&self) -> &[f64] {
        &self.points
    }

    pub fn jacobian_sqrt(&self) -> &[f64] {
        &self.jacobian_sqrt
    }

    /// Number of grid points whose determinant was raised to the floor.
    pub fn floored_count(&self) -> usize {
        self.floored
    }
}

/// On-disk geometry description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryFile {
    pub dim: usize,
    pub degrees: Vec<usize>,
    pub knots: Vec<Vec<f64>>,
    pub control_points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl GeometryFile {
    pub fn from_patch(patch: &TensorPatch) -> Self {
        Self {
            dim: patch.dim(),
            degrees: patch.bases.iter().map(BSplineBasis::degree).collect(),
            knots: patch.bases.iter().map(|b| b.knots().to_vec()).collect(),
            control_points: (0..patch.num_control_points())
                .map(|i| patch.control_point(i).to_vec())
                .collect(),
            weights: patch.weights.clone(),
        }
    }

    pub fn into_patch(self) -> Result<TensorPatch> {
        if self.degrees.len() != self.dim || self.knots.len() != self.dim {
            return Err(KleError::GeometryFormat(format!(
                "dim is {} but {} degrees and {} knot vectors given",
                self.dim,
                self.degrees.len(),
                self.knots.len()
            )));
        }
        let bases = self
            .knots
            .into_iter()
            .zip(self.degrees)
            .map(|(k, p)| BSplineBasis::new(k, p))
            .collect::<Result<Vec<_>>>()?;
        TensorPatch::new(bases, self.control_points, self.weights)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| KleError::GeometryFormat(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("geometry serializes")
    }
}

pub fn load_patch(path: &std::path::Path) -> Result<TensorPatch> {
    let text = std::fs::read_to_string(path)?;
    GeometryFile::from_json(&text)?.into_patch()
}
