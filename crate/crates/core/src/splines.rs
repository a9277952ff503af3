//! Univariate B-spline machinery on the parameter interval `[0, 1]`.
//!
//! Knot vectors are open (clamped): the end knots `0` and `1` carry
//! multiplicity `p + 1`. Interior knots may be repeated up to `p + 1`
//! times; multiplicity `p` gives a C⁰ line and `p + 1` a C⁻¹ line.
//!
//! Basis values are computed with the triangular Cox–de Boor scheme, which
//! yields the `p + 1` functions that can be nonzero on one knot span.

use crate::error::{KleError, Result};

/// Which one-sided limit to take when a parameter sits on a knot.
///
/// `Right` is the usual right-continuous convention, except at `ξ = 1` where
/// the last nonempty span is used so the basis still sums to one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Side {
    Left,
    #[default]
    Right,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnotVector {
    knots: Vec<f64>,
    degree: usize,
}

impl KnotVector {
    pub fn new(knots: Vec<f64>, degree: usize) -> Result<Self> {
        let p = degree;
        if knots.len() < 2 * (p + 1) {
            return Err(KleError::InvalidKnots(format!(
                "degree {p} needs at least {} knots, got {}",
                2 * (p + 1),
                knots.len()
            )));
        }
        if knots.iter().any(|k| !k.is_finite()) {
            return Err(KleError::InvalidKnots("non-finite knot".into()));
        }
        if knots.windows(2).any(|w| w[1] < w[0]) {
            return Err(KleError::InvalidKnots("knots must be non-decreasing".into()));
        }
        let m = knots.len();
        if knots[0] != 0.0 || knots[m - 1] != 1.0 {
            return Err(KleError::InvalidKnots(
                "knot vector must start at 0 and end at 1".into(),
            ));
        }
        if knots[..=p].iter().any(|&k| k != 0.0) || knots[m - p - 1..].iter().any(|&k| k != 1.0) {
            return Err(KleError::InvalidKnots(format!(
                "end knots must be repeated {} times",
                p + 1
            )));
        }
        if knots[p + 1] == 0.0 || knots[m - p - 2] == 1.0 {
            return Err(KleError::InvalidKnots(format!(
                "end knots repeated more than {} times",
                p + 1
            )));
        }
        let kv = Self { knots, degree };
        if let Some((value, mult)) = kv
            .breakpoints()
            .into_iter()
            .find(|&(_, mult)| mult > p + 1)
        {
            return Err(KleError::InvalidKnots(format!(
                "knot {value} has multiplicity {mult} > {}",
                p + 1
            )));
        }
        Ok(kv)
    }

    /// Uniform open knot vector with `elements` spans and the given
    /// continuity (`-1 ..= p-1`) at every interior breakpoint.
    pub fn uniform(degree: usize, elements: usize, continuity: i32) -> Result<Self> {
        let base = Self::new(
            std::iter::repeat_n(0.0, degree + 1)
                .chain(std::iter::repeat_n(1.0, degree + 1))
                .collect(),
            degree,
        )?;
        if elements == 1 {
            return Ok(base);
        }
        base.refine_uniform(elements, continuity)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Number of basis functions.
    pub fn dim(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    /// Distinct knot values with their multiplicities, in increasing order.
    pub fn breakpoints(&self) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        for &k in &self.knots {
            match out.last_mut() {
                Some((v, m)) if *v == k => *m += 1,
                _ => out.push((k, 1)),
            }
        }
        out
    }

    /// Nonempty knot spans `[a, b)`.
    pub fn spans(&self) -> Vec<(f64, f64)> {
        self.breakpoints()
            .windows(2)
            .map(|w| (w[0].0, w[1].0))
            .collect()
    }

    pub fn num_elements(&self) -> usize {
        self.breakpoints().len() - 1
    }

    /// Continuity order at an interior breakpoint of multiplicity `mult`.
    pub fn continuity_for_multiplicity(&self, mult: usize) -> i32 {
        self.degree as i32 - mult as i32
    }

    /// Index `s` of the knot span containing `xi`, with
    /// `knots[s] <= xi < knots[s+1]` (right) or `knots[s] < xi <= knots[s+1]` (left).
    pub fn find_span(&self, xi: f64, side: Side) -> Result<usize> {
        if !(0.0..=1.0).contains(&xi) {
            return Err(KleError::Domain { value: xi });
        }
        let p = self.degree;
        let n = self.dim();
        let t = &self.knots;
        let right = match side {
            Side::Right => xi < 1.0,
            Side::Left => xi <= 0.0,
        };
        let span = if right {
            // Largest s in [p, n-1] with t[s] <= xi.
            let idx = t[p..=n].partition_point(|&k| k <= xi);
            p + idx - 1
        } else {
            // Smallest s in [p, n-1] with xi <= t[s+1].
            let idx = t[p + 1..=n].partition_point(|&k| k < xi);
            p + idx
        };
        Ok(span.clamp(p, n - 1))
    }
}

/// Basis values on one knot span: functions `first .. first + p` are active.
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveBasis {
    pub first: usize,
    pub values: Vec<f64>,
}

/// Basis values and first derivatives on one knot span.
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveBasisDerivs {
    pub first: usize,
    pub values: Vec<f64>,
    pub derivs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BSplineBasis {
    knot_vector: KnotVector,
}

impl From<KnotVector> for BSplineBasis {
    fn from(knot_vector: KnotVector) -> Self {
        Self { knot_vector }
    }
}

impl BSplineBasis {
    pub fn new(knots: Vec<f64>, degree: usize) -> Result<Self> {
        Ok(KnotVector::new(knots, degree)?.into())
    }

    pub fn uniform(degree: usize, elements: usize, continuity: i32) -> Result<Self> {
        Ok(KnotVector::uniform(degree, elements, continuity)?.into())
    }

    pub fn knot_vector(&self) -> &KnotVector {
        &self.knot_vector
    }

    pub fn knots(&self) -> &[f64] {
        &self.knot_vector.knots
    }

    pub fn degree(&self) -> usize {
        self.knot_vector.degree
    }

    pub fn dim(&self) -> usize {
        self.knot_vector.dim()
    }

    pub fn num_elements(&self) -> usize {
        self.knot_vector.num_elements()
    }

    pub fn spans(&self) -> Vec<(f64, f64)> {
        self.knot_vector.spans()
    }

    pub fn evaluate(&self, xi: f64) -> Result<ActiveBasis> {
        self.evaluate_side(xi, Side::Right)
    }

    pub fn evaluate_side(&self, xi: f64, side: Side) -> Result<ActiveBasis> {
        let span = self.knot_vector.find_span(xi, side)?;
        let values = self.values_on_span(span, xi, self.degree());
        Ok(ActiveBasis {
            first: span - self.degree(),
            values,
        })
    }

    pub fn evaluate_derivs(&self, xi: f64, side: Side) -> Result<ActiveBasisDerivs> {
        let p = self.degree();
        let span = self.knot_vector.find_span(xi, side)?;
        let values = self.values_on_span(span, xi, p);
        let mut derivs = vec![0.0; p + 1];
        if p > 0 {
            // N'_{i,p} = p/(t_{i+p}-t_i) N_{i,p-1} - p/(t_{i+p+1}-t_{i+1}) N_{i+1,p-1}
            let lower = self.values_on_span(span, xi, p - 1);
            let t = self.knots();
            let pf = p as f64;
            for (j, d) in derivs.iter_mut().enumerate() {
                let i = span - p + j;
                let mut acc = 0.0;
                if j >= 1 {
                    let denom = t[i + p] - t[i];
                    if denom > 0.0 {
                        acc += pf * lower[j - 1] / denom;
                    }
                }
                if j < p {
                    let denom = t[i + p + 1] - t[i + 1];
                    if denom > 0.0 {
                        acc -= pf * lower[j] / denom;
                    }
                }
                *d = acc;
            }
        }
        Ok(ActiveBasisDerivs {
            first: span - p,
            values,
            derivs,
        })
    }

    /// Values of the `q + 1` degree-`q` functions supported on `span`
    /// (`q <= p`), i.e. `N_{span-q, q} .. N_{span, q}`.
    fn values_on_span(&self, span: usize, xi: f64, q: usize) -> Vec<f64> {
        let t = self.knots();
        let mut n = vec![0.0; q + 1];
        let mut left = vec![0.0; q + 1];
        let mut right = vec![0.0; q + 1];
        n[0] = 1.0;
        for j in 1..=q {
            left[j] = xi - t[span + 1 - j];
            right[j] = t[span + j] - xi;
            let mut saved = 0.0;
            for r in 0..j {
                let denom = right[r + 1] + left[j - r];
                let temp = if denom == 0.0 { 0.0 } else { n[r] / denom };
                n[r] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            n[j] = saved;
        }
        n
    }

    /// Dense evaluation of all `n` basis functions at `xi`.
    pub fn evaluate_all(&self, xi: f64, side: Side) -> Result<Vec<f64>> {
        let active = self.evaluate_side(xi, side)?;
        let mut out = vec![0.0; self.dim()];
        out[active.first..active.first + active.values.len()].copy_from_slice(&active.values);
        Ok(out)
    }

    /// Knot averages `(t_{i+1} + … + t_{i+p}) / p`; support midpoints for `p = 0`.
    pub fn greville_abscissae(&self) -> Vec<f64> {
        let p = self.degree();
        let t = self.knots();
        (0..self.dim())
            .map(|i| {
                if p == 0 {
                    0.5 * (t[i] + t[i + 1])
                } else {
                    t[i + 1..=i + p].iter().sum::<f64>() / p as f64
                }
            })
            .collect()
    }

    /// Greville abscissae paired with the side used for evaluation there.
    ///
    /// Two coincident abscissae only occur at a C⁻¹ line; the first of the
    /// pair takes the left limit and the second the right limit.
    pub fn greville_with_sides(&self) -> Vec<(f64, Side)> {
        let g = self.greville_abscissae();
        let mut out: Vec<(f64, Side)> = g.iter().map(|&x| (x, Side::Right)).collect();
        for i in 0..g.len().saturating_sub(1) {
            if g[i] == g[i + 1] {
                out[i].1 = Side::Left;
                out[i + 1].1 = Side::Right;
            }
        }
        out
    }

    /// `∫₀¹ Bᵢ` for every basis function (closed form `(t_{i+p+1} - t_i)/(p+1)`).
    pub fn integrals(&self) -> Vec<f64> {
        let p = self.degree();
        let t = self.knots();
        (0..self.dim())
            .map(|i| (t[i + p + 1] - t[i]) / (p + 1) as f64)
            .collect()
    }

    /// Uniform h-refinement: every nonempty span is cut into `subdivisions`
    /// equal pieces; new breakpoints get multiplicity `p - continuity`.
    pub fn refine_uniform(&self, subdivisions: usize, continuity: i32) -> Result<Self> {
        Ok(self.knot_vector.refine_uniform(subdivisions, continuity)?.into())
    }

    /// Degree elevation keeping every breakpoint's continuity.
    pub fn elevate_degree(&self, target: usize) -> Result<Self> {
        Ok(self.knot_vector.elevate_degree(target)?.into())
    }

    /// Raise the multiplicity of every interior breakpoint that is C⁰ or
    /// rougher to `p + 1`.
    pub fn break_at_c0_lines(&self) -> Self {
        let p = self.degree();
        let bps = self.knot_vector.breakpoints();
        let last = bps.len() - 1;
        let knots = bps
            .iter()
            .enumerate()
            .flat_map(|(i, &(v, m))| {
                let m = if i != 0 && i != last && m >= p { p + 1 } else { m };
                std::iter::repeat_n(v, m)
            })
            .collect();
        KnotVector {
            knots,
            degree: p,
        }
        .into()
    }
}

impl KnotVector {
    pub fn refine_uniform(&self, subdivisions: usize, continuity: i32) -> Result<Self> {
        let p = self.degree as i32;
        if subdivisions == 0 {
            return Err(KleError::InvalidArgument(
                "subdivisions must be at least 1".into(),
            ));
        }
        if continuity >= p || continuity < -1 {
            return Err(KleError::InvalidArgument(format!(
                "continuity {continuity} not in [-1, {}]",
                p - 1
            )));
        }
        let mult = (p - continuity) as usize;
        let bps = self.breakpoints();
        let mut knots = Vec::with_capacity(self.knots.len() + bps.len() * subdivisions * mult);
        for (i, &(v, m)) in bps.iter().enumerate() {
            knots.extend(std::iter::repeat_n(v, m));
            if let Some(&(next, _)) = bps.get(i + 1) {
                for j in 1..subdivisions {
                    let x = v + (next - v) * j as f64 / subdivisions as f64;
                    knots.extend(std::iter::repeat_n(x, mult));
                }
            }
        }
        KnotVector::new(knots, self.degree)
    }

    pub fn elevate_degree(&self, target: usize) -> Result<Self> {
        if target < self.degree {
            return Err(KleError::InvalidArgument(format!(
                "target degree {target} below current degree {}",
                self.degree
            )));
        }
        let extra = target - self.degree;
        let knots = self
            .breakpoints()
            .into_iter()
            .flat_map(|(v, m)| std::iter::repeat_n(v, m + extra))
            .collect();
        KnotVector::new(knots, target)
    }

    /// Knot vector of degree `degree` on the same breakpoints, keeping each
    /// interior breakpoint's continuity where the new degree allows it.
    ///
    /// For `degree >= p` this coincides with degree elevation.
    pub fn with_degree(&self, degree: usize) -> Result<Self> {
        let bps = self.breakpoints();
        let last = bps.len() - 1;
        let knots = bps
            .iter()
            .enumerate()
            .flat_map(|(i, &(v, m))| {
                let m = if i == 0 || i == last {
                    degree + 1
                } else {
                    let cont = self.continuity_for_multiplicity(m);
                    (degree as i32 - cont).clamp(1, degree as i32 + 1) as usize
                };
                std::iter::repeat_n(v, m)
            })
            .collect();
        KnotVector::new(knots, degree)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn linear_hats() {
        let b = BSplineBasis::new(vec![0.0, 0.0, 1.0, 1.0], 1).unwrap();
        let a = b.evaluate(0.25).unwrap();
        assert_eq!(a.first, 0);
        assert!(close(&a.values, &[0.75, 0.25], 1e-15));
    }

    #[test]
    fn bernstein_quadratics() {
        let b = BSplineBasis::new(vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0], 2).unwrap();
        let a = b.evaluate(0.5).unwrap();
        assert!(close(&a.values, &[0.25, 0.5, 0.25], 1e-15));
    }

    #[test]
    fn out_of_domain() {
        let b = BSplineBasis::uniform(2, 4, 1).unwrap();
        assert!(matches!(b.evaluate(1.5), Err(KleError::Domain { .. })));
        assert!(matches!(b.evaluate(-1e-3), Err(KleError::Domain { .. })));
        assert!(b.evaluate(f64::NAN).is_err());
    }

    #[test]
    fn right_end_uses_last_span() {
        let b = BSplineBasis::uniform(2, 4, 1).unwrap();
        let a = b.evaluate(1.0).unwrap();
        assert_eq!(a.first, b.dim() - 3);
        assert!((a.values[2] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn one_sided_at_discontinuity() {
        let b = BSplineBasis::new(vec![0.0, 0.0, 0.0, 0.5, 0.5, 0.5, 1.0, 1.0, 1.0], 2).unwrap();
        let l = b.evaluate_all(0.5, Side::Left).unwrap();
        let r = b.evaluate_all(0.5, Side::Right).unwrap();
        assert!(close(&l, &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0], 1e-15));
        assert!(close(&r, &[0.0, 0.0, 0.0, 1.0, 0.0, 0.0], 1e-15));
    }

    #[test]
    fn greville_examples() {
        let b = BSplineBasis::new(vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0], 2).unwrap();
        assert!(close(&b.greville_abscissae(), &[0.0, 0.5, 1.0], 1e-15));
        let b = BSplineBasis::new(vec![0.0, 0.0, 0.0, 0.5, 1.0, 1.0, 1.0], 2).unwrap();
        assert!(close(&b.greville_abscissae(), &[0.0, 0.25, 0.75, 1.0], 1e-15));
        let b = BSplineBasis::new(vec![0.0, 0.0, 0.5, 1.0, 1.0], 1).unwrap();
        assert!(close(&b.greville_abscissae(), &[0.0, 0.5, 1.0], 1e-15));
    }

    #[test]
    fn greville_degree_zero_midpoints() {
        let b = BSplineBasis::new(vec![0.0, 0.5, 1.0], 0).unwrap();
        assert!(close(&b.greville_abscissae(), &[0.25, 0.75], 1e-15));
    }

    #[test]
    fn greville_sides_at_c_minus_one() {
        let b = BSplineBasis::new(vec![0.0, 0.0, 0.0, 0.5, 0.5, 0.5, 1.0, 1.0, 1.0], 2).unwrap();
        let g = b.greville_with_sides();
        assert_eq!(g[2], (0.5, Side::Left));
        assert_eq!(g[3], (0.5, Side::Right));
    }

    #[test]
    fn refine_examples() {
        let b = BSplineBasis::new(vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0], 2).unwrap();
        assert_eq!(
            b.refine_uniform(2, 1).unwrap().knots(),
            &[0.0, 0.0, 0.0, 0.5, 1.0, 1.0, 1.0]
        );
        assert_eq!(
            b.refine_uniform(2, 0).unwrap().knots(),
            &[0.0, 0.0, 0.0, 0.5, 0.5, 1.0, 1.0, 1.0]
        );
        assert_eq!(
            b.refine_uniform(2, -1).unwrap().knots(),
            &[0.0, 0.0, 0.0, 0.5, 0.5, 0.5, 1.0, 1.0, 1.0]
        );
        assert!(matches!(
            b.refine_uniform(2, 2),
            Err(KleError::InvalidArgument(_))
        ));
        assert!(b.refine_uniform(0, 1).is_err());
    }

    #[test]
    fn refine_keeps_existing_knots() {
        let b = BSplineBasis::new(vec![0.0, 0.0, 0.0, 0.5, 0.5, 1.0, 1.0, 1.0], 2).unwrap();
        let r = b.refine_uniform(2, 1).unwrap();
        assert_eq!(
            r.knots(),
            &[0.0, 0.0, 0.0, 0.25, 0.5, 0.5, 0.75, 1.0, 1.0, 1.0]
        );
    }

    #[test]
    fn elevate_examples() {
        let b = BSplineBasis::new(vec![0.0, 0.0, 1.0, 1.0], 1).unwrap();
        assert_eq!(
            b.elevate_degree(2).unwrap().knots(),
            &[0.0, 0.0, 0.0, 1.0, 1.0, 1.0]
        );
        let b = BSplineBasis::new(vec![0.0, 0.0, 0.0, 0.5, 1.0, 1.0, 1.0], 2).unwrap();
        assert_eq!(
            b.elevate_degree(3).unwrap().knots(),
            &[0.0, 0.0, 0.0, 0.0, 0.5, 0.5, 1.0, 1.0, 1.0, 1.0]
        );
        assert_eq!(b.elevate_degree(2).unwrap(), b);
        assert!(matches!(
            b.elevate_degree(1),
            Err(KleError::InvalidArgument(_))
        ));
    }

    #[test]
    fn with_degree_preserves_c0_lines() {
        let kv = KnotVector::new(vec![0.0, 0.0, 0.0, 0.5, 0.5, 1.0, 1.0, 1.0], 2).unwrap();
        assert_eq!(kv.with_degree(4).unwrap(), kv.elevate_degree(4).unwrap());
        let lowered = kv.with_degree(1).unwrap();
        assert_eq!(lowered.knots(), &[0.0, 0.0, 0.5, 1.0, 1.0]);
    }

    #[test]
    fn c0_lines_become_discontinuous() {
        let b = BSplineBasis::new(vec![0.0, 0.0, 0.0, 0.25, 0.5, 0.5, 1.0, 1.0, 1.0], 2).unwrap();
        let d = b.break_at_c0_lines();
        assert_eq!(
            d.knots(),
            &[0.0, 0.0, 0.0, 0.25, 0.5, 0.5, 0.5, 1.0, 1.0, 1.0]
        );
    }

    #[test]
    fn invalid_knot_vectors() {
        assert!(KnotVector::new(vec![0.0, 1.0, 1.0], 1).is_err());
        assert!(KnotVector::new(vec![0.0, 0.0, 0.6, 0.5, 1.0, 1.0], 1).is_err());
        assert!(KnotVector::new(vec![0.0, 0.0, 0.5, 0.5, 0.5, 1.0, 1.0], 1).is_err());
        assert!(KnotVector::new(vec![0.0, 0.0, 0.0, 1.0, 1.0], 1).is_err());
        assert!(KnotVector::new(vec![0.0, 0.0, 2.0, 2.0], 1).is_err());
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let b = BSplineBasis::new(
            vec![0.0, 0.0, 0.0, 0.0, 0.2, 0.5, 0.5, 0.7, 1.0, 1.0, 1.0, 1.0],
            3,
        )
        .unwrap();
        let h = 1e-6;
        for &x in &[0.1, 0.3, 0.45, 0.6, 0.85] {
            let d = b.evaluate_derivs(x, Side::Right).unwrap();
            let plus = b.evaluate_all(x + h, Side::Right).unwrap();
            let minus = b.evaluate_all(x - h, Side::Right).unwrap();
            for (j, dv) in d.derivs.iter().enumerate() {
                let i = d.first + j;
                let fd = (plus[i] - minus[i]) / (2.0 * h);
                assert!((fd - dv).abs() < 1e-6, "x={x} i={i} fd={fd} an={dv}");
            }
        }
    }

    #[test]
    fn integrals_match_gauss() {
        let b = BSplineBasis::uniform(3, 5, 1).unwrap();
        let rule = crate::quadrature::GaussRule::new(4).unwrap();
        let mut acc = vec![0.0; b.dim()];
        for (a, c) in b.spans() {
            for (x, w) in rule.mapped(a, c) {
                let act = b.evaluate(x).unwrap();
                for (j, v) in act.values.iter().enumerate() {
                    acc[act.first + j] += w * v;
                }
            }
        }
        assert!(close(&acc, &b.integrals(), 1e-14));
    }

    fn arbitrary_basis() -> impl Strategy<Value = BSplineBasis> {
        (0usize..5, 1usize..7, prop::collection::vec(0.05f64..0.95, 0..4)).prop_map(
            |(p, elements, extra)| {
                let cont = if p == 0 { -1 } else { (p as i32 - 1).min(1) };
                let mut kv = KnotVector::uniform(p, elements, cont).unwrap();
                // Sprinkle non-uniform knots, multiplicity up to p.
                for (i, x) in extra.into_iter().enumerate() {
                    let mult = if p == 0 { 1 } else { 1 + i % p };
                    let mut knots = kv.knots().to_vec();
                    let exists = knots.iter().filter(|&&k| k == x).count();
                    if exists + mult > p + 1 {
                        continue;
                    }
                    knots.extend(std::iter::repeat_n(x, mult));
                    knots.sort_by(|a, b| a.partial_cmp(b).unwrap());
                    kv = KnotVector::new(knots, p).unwrap();
                }
                kv.into()
            },
        )
    }

    proptest! {
        #[test]
        fn partition_of_unity(b in arbitrary_basis(), xs in prop::collection::vec(0.0f64..=1.0, 50)) {
            for x in xs {
                for side in [Side::Left, Side::Right] {
                    let a = b.evaluate_side(x, side).unwrap();
                    prop_assert_eq!(a.values.len(), b.degree() + 1);
                    prop_assert!(a.values.iter().all(|&v| v >= -1e-15));
                    let s: f64 = a.values.iter().sum();
                    prop_assert!((s - 1.0).abs() < 1e-12);
                }
            }
        }

        #[test]
        fn greville_is_monotone_with_unit_ends(b in arbitrary_basis()) {
            let g = b.greville_abscissae();
            prop_assert!(g.windows(2).all(|w| w[0] <= w[1]));
            if b.degree() > 0 {
                prop_assert_eq!(g[0], 0.0);
                prop_assert!((g[g.len() - 1] - 1.0).abs() < 1e-15);
                let max_interior = b.knot_vector().breakpoints().iter()
                    .skip(1).rev().skip(1).map(|&(_, m)| m).max().unwrap_or(0);
                if max_interior <= b.degree() {
                    prop_assert!(g.windows(2).all(|w| w[0] < w[1]));
                }
            }
        }
    }
}
