//! Gauss–Legendre rules and the univariate matrices of the discretization:
//! trial mass matrices `Z`, mixed mass matrices `M` and Greville collocation
//! matrices `B̃`, together with their factorizations.

use std::f64::consts::PI;

use crate::error::{KleError, Result};
use crate::linalg::{BandedMatrix, CholeskyFactor, DenseMatrix, LuFactors};
use crate::splines::BSplineBasis;

/// Gauss–Legendre rule on `[-1, 1]`, nodes in increasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussRule {
    pub fn new(q: usize) -> Result<Self> {
        if q == 0 {
            return Err(KleError::InvalidArgument(
                "Gauss rule needs at least one point".into(),
            ));
        }
        let mut nodes = vec![0.0; q];
        let mut weights = vec![0.0; q];
        let qf = q as f64;
        for i in 0..q.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (qf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(q, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(q, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[q - 1 - i] = x;
            weights[i] = w;
            weights[q - 1 - i] = w;
        }
        if q % 2 == 1 {
            nodes[q / 2] = 0.0;
        }
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights mapped affinely onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Quadrature points for a spline space: `q` Gauss points on every
/// nonempty span, as `(points, weights)` over `[0, 1]`.
pub fn span_quadrature(spans: &[(f64, f64)], q: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let rule = GaussRule::new(q)?;
    let mut pts = Vec::with_capacity(spans.len() * q);
    let mut wts = Vec::with_capacity(spans.len() * q);
    for &(a, b) in spans {
        for (x, w) in rule.mapped(a, b) {
            pts.push(x);
            wts.push(w);
        }
    }
    Ok((pts, wts))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixRole {
    TrialMass,
    MixedMass,
    Collocation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StoragePolicy {
    /// Dense up to [`DENSE_LIMIT`] rows, banded above.
    #[default]
    Auto,
    Dense,
    Banded,
}

pub const DENSE_LIMIT: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub enum Storage {
    Dense(DenseMatrix),
    Banded(BandedMatrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnivariateMatrix {
    pub role: MatrixRole,
    pub storage: Storage,
}

impl UnivariateMatrix {
    fn from_triplets(
        role: MatrixRole,
        rows: usize,
        cols: usize,
        triplets: &[(usize, usize, f64)],
        policy: StoragePolicy,
    ) -> Self {
        let dense = match policy {
            StoragePolicy::Dense => true,
            StoragePolicy::Banded => false,
            StoragePolicy::Auto => rows.max(cols) <= DENSE_LIMIT,
        };
        let storage = if dense {
            let mut m = DenseMatrix::zeros(rows, cols);
            for &(i, j, v) in triplets {
                m.add(i, j, v);
            }
            Storage::Dense(m)
        } else {
            Storage::Banded(BandedMatrix::from_triplets(rows, cols, triplets))
        };
        Self { role, storage }
    }

    pub fn rows(&self) -> usize {
        match &self.storage {
            Storage::Dense(m) => m.rows(),
            Storage::Banded(m) => m.rows(),
        }
    }

    pub fn cols(&self) -> usize {
        match &self.storage {
            Storage::Dense(m) => m.cols(),
            Storage::Banded(m) => m.cols(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match &self.storage {
            Storage::Dense(m) => m.get(i, j),
            Storage::Banded(m) => m.get(i, j),
        }
    }

    pub fn is_banded(&self) -> bool {
        matches!(self.storage, Storage::Banded(_))
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        match &self.storage {
            Storage::Dense(m) => m.matvec(x, y),
            Storage::Banded(m) => m.matvec(x, y),
        }
    }

    pub fn matvec_transpose(&self, x: &[f64], y: &mut [f64]) {
        match &self.storage {
            Storage::Dense(m) => m.matvec_transpose(x, y),
            Storage::Banded(m) => m.matvec_transpose(x, y),
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match &self.storage {
            Storage::Dense(m) => m.clone(),
            Storage::Banded(m) => m.to_dense(),
        }
    }

    /// `(lower, upper)` bandwidths of the nonzero pattern.
    pub fn bandwidths(&self) -> (usize, usize) {
        match &self.storage {
            Storage::Dense(m) => BandedMatrix::from_dense(m).bandwidths(),
            Storage::Banded(m) => m.bandwidths(),
        }
    }

    pub fn lu_factor(&self) -> Result<LuFactors> {
        match &self.storage {
            Storage::Dense(m) => LuFactors::factor_dense(m),
            Storage::Banded(m) => LuFactors::factor_banded(m),
        }
    }

    pub fn cholesky_factor(&self) -> Result<CholeskyFactor> {
        match &self.storage {
            Storage::Dense(m) => CholeskyFactor::factor_dense(m),
            Storage::Banded(m) => CholeskyFactor::factor_banded(m),
        }
    }
}

fn accumulate_outer(
    triplets: &mut Vec<(usize, usize, f64)>,
    w: f64,
    a_first: usize,
    a: &[f64],
    b_first: usize,
    b: &[f64],
) {
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            triplets.push((a_first + i, b_first + j, w * (ai * bj)));
        }
    }
}

/// Sorts and merges duplicate triplets so the sum order is deterministic.
fn compress(mut t: Vec<(usize, usize, f64)>) -> Vec<(usize, usize, f64)> {
    t.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
    let mut out: Vec<(usize, usize, f64)> = Vec::with_capacity(t.len());
    for (i, j, v) in t {
        match out.last_mut() {
            Some(last) if last.0 == i && last.1 == j => last.2 += v,
            _ => out.push((i, j, v)),
        }
    }
    out
}

/// `Z[i][j] = ∫ Bᵢ Bⱼ` with `p + 1` Gauss points per span.
pub fn trial_mass_matrix(basis: &BSplineBasis) -> Result<UnivariateMatrix> {
    trial_mass_matrix_with(basis, StoragePolicy::Auto)
}

pub fn trial_mass_matrix_with(
    basis: &BSplineBasis,
    policy: StoragePolicy,
) -> Result<UnivariateMatrix> {
    let n = basis.dim();
    let (pts, wts) = span_quadrature(&basis.spans(), basis.degree() + 1)?;
    let mut t = Vec::new();
    for (&x, &w) in pts.iter().zip(&wts) {
        let a = basis.evaluate(x)?;
        accumulate_outer(&mut t, w, a.first, &a.values, a.first, &a.values);
    }
    Ok(UnivariateMatrix::from_triplets(
        MatrixRole::TrialMass,
        n,
        n,
        &compress(t),
        policy,
    ))
}

/// Nonempty spans of the union of both breakpoint sets.
pub fn merged_spans(a: &BSplineBasis, b: &BSplineBasis) -> Vec<(f64, f64)> {
    let mut bps: Vec<f64> = a
        .knot_vector()
        .breakpoints()
        .into_iter()
        .chain(b.knot_vector().breakpoints())
        .map(|(v, _)| v)
        .collect();
    bps.sort_by(|x, y| x.partial_cmp(y).expect("finite knots"));
    bps.dedup();
    bps.windows(2).map(|w| (w[0], w[1])).collect()
}

/// `M[i][j] = ∫ B̃ᵢ Bⱼ` (interpolation rows, trial columns), exact on the
/// merged breakpoints.
pub fn mixed_mass_matrix(
    interp: &BSplineBasis,
    trial: &BSplineBasis,
) -> Result<UnivariateMatrix> {
    mixed_mass_matrix_with(interp, trial, StoragePolicy::Auto)
}

pub fn mixed_mass_matrix_with(
    interp: &BSplineBasis,
    trial: &BSplineBasis,
    policy: StoragePolicy,
) -> Result<UnivariateMatrix> {
    let q = (interp.degree() + trial.degree()).div_ceil(2) + 1;
    let (pts, wts) = span_quadrature(&merged_spans(interp, trial), q)?;
    let mut t = Vec::new();
    for (&x, &w) in pts.iter().zip(&wts) {
        let a = interp.evaluate(x)?;
        let b = trial.evaluate(x)?;
        accumulate_outer(&mut t, w, a.first, &a.values, b.first, &b.values);
    }
    Ok(UnivariateMatrix::from_triplets(
        MatrixRole::MixedMass,
        interp.dim(),
        trial.dim(),
        &compress(t),
        policy,
    ))
}

/// `B̃[i][j] = B̃ⱼ(ξᵢ)` at the Greville abscissae; coincident abscissae at a
/// discontinuity take the left and right limits respectively.
pub fn collocation_matrix(interp: &BSplineBasis) -> Result<UnivariateMatrix> {
    collocation_matrix_with(interp, StoragePolicy::Auto)
}

pub fn collocation_matrix_with(
    interp: &BSplineBasis,
    policy: StoragePolicy,
) -> Result<UnivariateMatrix> {
    let n = interp.dim();
    let mut t = Vec::new();
    for (i, (x, side)) in interp.greville_with_sides().into_iter().enumerate() {
        let a = interp.evaluate_side(x, side)?;
        for (k, &v) in a.values.iter().enumerate() {
            if v != 0.0 {
                t.push((i, a.first + k, v));
            }
        }
    }
    Ok(UnivariateMatrix::from_triplets(
        MatrixRole::Collocation,
        n,
        n,
        &t,
        policy,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dense_close(a: &DenseMatrix, b: &[Vec<f64>], tol: f64) -> bool {
        b.iter()
            .enumerate()
            .all(|(i, row)| row.iter().enumerate().all(|(j, &v)| (a.get(i, j) - v).abs() <= tol))
    }

    #[test]
    fn small_rules() {
        let r = GaussRule::new(1).unwrap();
        assert_eq!(r.nodes(), &[0.0]);
        assert!((r.weights()[0] - 2.0).abs() < 1e-15);
        let r = GaussRule::new(2).unwrap();
        let s = 1.0 / 3.0f64.sqrt();
        assert!((r.nodes()[0] + s).abs() < 1e-15 && (r.nodes()[1] - s).abs() < 1e-15);
        assert!(r.weights().iter().all(|w| (w - 1.0).abs() < 1e-15));
        assert!(GaussRule::new(0).is_err());
    }

    #[test]
    fn five_point_rule_degree_eight() {
        let r = GaussRule::new(5).unwrap();
        let v: f64 = r
            .nodes()
            .iter()
            .zip(r.weights())
            .map(|(x, w)| w * x.powi(8))
            .sum();
        assert!((v - 2.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn rules_are_exact_and_symmetric() {
        for q in 1..=40 {
            let r = GaussRule::new(q).unwrap();
            assert!(r.weights().iter().all(|&w| w > 0.0));
            let s: f64 = r.weights().iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "q={q}");
            for i in 0..q {
                assert!((r.nodes()[i] + r.nodes()[q - 1 - i]).abs() < 1e-15);
            }
            assert!(r.nodes().windows(2).all(|w| w[0] < w[1]));
            for k in 0..2 * q {
                let v: f64 = r
                    .nodes()
                    .iter()
                    .zip(r.weights())
                    .map(|(x, w)| w * x.powi(k as i32))
                    .sum();
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                assert!((v - exact).abs() < 1e-13, "q={q} k={k}: {v} vs {exact}");
            }
        }
    }

    #[test]
    fn mass_matrix_examples() {
        let b = BSplineBasis::new(vec![0.0, 0.0, 1.0, 1.0], 1).unwrap();
        let z = trial_mass_matrix(&b).unwrap().to_dense();
        assert!(dense_close(
            &z,
            &[vec![1.0 / 3.0, 1.0 / 6.0], vec![1.0 / 6.0, 1.0 / 3.0]],
            1e-15
        ));
        let b = BSplineBasis::new(vec![0.0, 0.5, 1.0], 0).unwrap();
        let z = trial_mass_matrix(&b).unwrap().to_dense();
        assert!(dense_close(&z, &[vec![0.5, 0.0], vec![0.0, 0.5]], 1e-15));
    }

    #[test]
    fn bernstein_mass_matches_symbolic_integrals() {
        // ∫ b_i b_j over [0,1] for quadratic Bernstein polynomials:
        // C(2,i)C(2,j)/C(4,i+j) / 5
        let binom = |n: u32, k: u32| -> f64 {
            (1..=k).fold(1.0, |acc, i| acc * (n - k + i) as f64 / i as f64)
        };
        let b = BSplineBasis::new(vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0], 2).unwrap();
        let z = trial_mass_matrix(&b).unwrap().to_dense();
        for i in 0..3u32 {
            for j in 0..3u32 {
                let exact = binom(2, i) * binom(2, j) / binom(4, i + j) / 5.0;
                assert!((z.get(i as usize, j as usize) - exact).abs() < 1e-15);
            }
        }
        assert!((z.get(0, 0) - 0.2).abs() < 1e-15);
        assert!((z.get(1, 1) - 2.0 / 15.0).abs() < 1e-15);
        assert!((z.get(0, 2) - 1.0 / 30.0).abs() < 1e-15);
    }

    #[test]
    fn mixed_equals_trial_for_same_space() {
        let b = BSplineBasis::uniform(3, 7, 1).unwrap();
        let z = trial_mass_matrix(&b).unwrap();
        let m = mixed_mass_matrix(&b, &b).unwrap();
        assert_eq!(z.to_dense(), m.to_dense());
    }

    #[test]
    fn mixed_piecewise_constant_row() {
        let i = BSplineBasis::new(vec![0.0, 1.0], 0).unwrap();
        let t = BSplineBasis::new(vec![0.0, 0.0, 1.0, 1.0], 1).unwrap();
        let m = mixed_mass_matrix(&i, &t).unwrap().to_dense();
        assert!(dense_close(&m, &[vec![0.5, 0.5]], 1e-15));
    }

    #[test]
    fn mixed_column_sums_match_integrals() {
        let interp = BSplineBasis::new(
            vec![0.0, 0.0, 0.0, 0.3, 0.55, 0.55, 1.0, 1.0, 1.0],
            2,
        )
        .unwrap();
        let trial = BSplineBasis::new(
            vec![0.0, 0.0, 0.0, 0.0, 0.2, 0.45, 0.7, 1.0, 1.0, 1.0, 1.0],
            3,
        )
        .unwrap();
        let m = mixed_mass_matrix(&interp, &trial).unwrap().to_dense();
        // Column sums are ∫Bⱼ (interpolation partition of unity); row sums ∫B̃ᵢ.
        let trial_int = trial.integrals();
        let interp_int = interp.integrals();
        for j in 0..trial.dim() {
            let s: f64 = (0..interp.dim()).map(|i| m.get(i, j)).sum();
            assert!((s - trial_int[j]).abs() < 1e-14);
        }
        for i in 0..interp.dim() {
            let s: f64 = (0..trial.dim()).map(|j| m.get(i, j)).sum();
            assert!((s - interp_int[i]).abs() < 1e-14);
        }
        // High-order oracle on a fine uniform grid of spans.
        let fine: Vec<(f64, f64)> = (0..200).map(|k| (k as f64 / 200.0, (k + 1) as f64 / 200.0)).collect();
        let (pts, wts) = span_quadrature(&fine, 12).unwrap();
        for i in 0..interp.dim() {
            for j in 0..trial.dim() {
                let mut acc = 0.0;
                for (&x, &w) in pts.iter().zip(&wts) {
                    let a = interp.evaluate_all(x, crate::splines::Side::Right).unwrap();
                    let b = trial.evaluate_all(x, crate::splines::Side::Right).unwrap();
                    acc += w * a[i] * b[j];
                }
                assert!((acc - m.get(i, j)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn collocation_examples() {
        let b = BSplineBasis::uniform(1, 5, 0).unwrap();
        let c = collocation_matrix(&b).unwrap().to_dense();
        assert_eq!(c, DenseMatrix::identity(6));
        let b = BSplineBasis::new(vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0], 2).unwrap();
        let c = collocation_matrix(&b).unwrap().to_dense();
        assert!(dense_close(
            &c,
            &[vec![1.0, 0.0, 0.0], vec![0.25, 0.5, 0.25], vec![0.0, 0.0, 1.0]],
            1e-15
        ));
    }

    #[test]
    fn collocation_block_diagonal_across_discontinuity() {
        let b = BSplineBasis::new(vec![0.0, 0.0, 0.0, 0.5, 0.5, 0.5, 1.0, 1.0, 1.0], 2).unwrap();
        let c = collocation_matrix(&b).unwrap();
        for i in 0..3 {
            for j in 3..6 {
                assert_eq!(c.get(i, j), 0.0);
                assert_eq!(c.get(j, i), 0.0);
            }
        }
        assert!(c.lu_factor().is_ok());
    }

    #[test]
    fn bandwidths() {
        let trial = BSplineBasis::uniform(2, 80, 1).unwrap();
        let interp = BSplineBasis::uniform(3, 80, 2).unwrap();
        let z = trial_mass_matrix(&trial).unwrap();
        assert!(z.is_banded());
        let (kl, ku) = z.bandwidths();
        assert!(kl <= 2 && ku <= 2);
        let m = mixed_mass_matrix(&interp, &trial).unwrap();
        let (kl, ku) = m.bandwidths();
        assert!(kl <= 5 && ku <= 5);
    }

    #[test]
    fn dense_and_banded_paths_agree() {
        let trial = BSplineBasis::uniform(3, 30, 1).unwrap();
        let interp = BSplineBasis::uniform(2, 41, 0).unwrap().break_at_c0_lines();
        let interp = BSplineBasis::new(interp.knots().to_vec(), 2).unwrap();
        for (d, b) in [
            (
                trial_mass_matrix_with(&trial, StoragePolicy::Dense).unwrap(),
                trial_mass_matrix_with(&trial, StoragePolicy::Banded).unwrap(),
            ),
            (
                mixed_mass_matrix_with(&interp, &trial, StoragePolicy::Dense).unwrap(),
                mixed_mass_matrix_with(&interp, &trial, StoragePolicy::Banded).unwrap(),
            ),
            (
                collocation_matrix_with(&interp, StoragePolicy::Dense).unwrap(),
                collocation_matrix_with(&interp, StoragePolicy::Banded).unwrap(),
            ),
        ] {
            assert_eq!(d.to_dense(), b.to_dense());
        }
        let ones = vec![1.0; interp.dim()];
        for policy in [StoragePolicy::Dense, StoragePolicy::Banded] {
            let c = collocation_matrix_with(&interp, policy).unwrap();
            let lu = c.lu_factor().unwrap();
            let mut x = ones.clone();
            lu.solve_in_place(&mut x);
            assert!(x.iter().all(|v| (v - 1.0).abs() < 1e-12));
            let z = trial_mass_matrix_with(&trial, policy).unwrap();
            let l = z.cholesky_factor().unwrap();
            for i in 0..trial.dim() {
                let mut e = vec![0.0; trial.dim()];
                e[i] = 1.0;
                let mut x = e.clone();
                l.solve_lower_in_place(&mut x);
                l.solve_upper_in_place(&mut x);
                let mut y = vec![0.0; trial.dim()];
                z.matvec(&x, &mut y);
                assert!(y.iter().zip(&e).all(|(a, b)| (a - b).abs() < 1e-10));
            }
        }
    }

    proptest! {
        #[test]
        fn mass_row_sums_are_integrals(p in 0usize..5, elements in 1usize..20) {
            let cont = if p == 0 { -1 } else { p as i32 - 1 };
            let b = BSplineBasis::uniform(p, elements, cont).unwrap();
            let z = trial_mass_matrix(&b).unwrap();
            let ints = b.integrals();
            for i in 0..b.dim() {
                let s: f64 = (0..b.dim()).map(|j| z.get(i, j)).sum();
                prop_assert!((s - ints[i]).abs() < 1e-12);
                for j in 0..b.dim() {
                    prop_assert_eq!(z.get(i, j), z.get(j, i));
                }
            }
            prop_assert!(z.cholesky_factor().is_ok());
        }

        #[test]
        fn collocation_rows_sum_to_one(p in 1usize..5, elements in 1usize..30, cont_drop in 0i32..3) {
            let cont = (p as i32 - 1 - cont_drop).max(-1);
            let b = BSplineBasis::uniform(p, elements, cont).unwrap();
            let c = collocation_matrix(&b).unwrap();
            for i in 0..b.dim() {
                let s: f64 = (0..b.dim()).map(|j| c.get(i, j)).sum();
                prop_assert!((s - 1.0).abs() < 1e-13);
            }
            let lu = c.lu_factor().unwrap();
            let mut x = vec![1.0; b.dim()];
            lu.solve_in_place(&mut x);
            prop_assert!(x.iter().all(|v| (v - 1.0).abs() < 1e-12));
        }
    }
}
