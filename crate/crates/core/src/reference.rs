//! Independent oracles: dense Galerkin assembly with tensor Gauss
//! quadrature, the analytic 1D exponential spectrum, and error metrics.
//!
//! Everything here favours clarity over speed and is meant for desk-scale
//! problems.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::eigensolver::{apply_sign_convention, clip_eigenvalues, KleSpectrum};
use crate::error::{KleError, Result};
use crate::geometry::{TensorPatch, JACOBIAN_FLOOR};
use crate::kernels::Kernel;
use crate::linalg::DenseMatrix;
use crate::quadrature::{collocation_matrix, span_quadrature, trial_mass_matrix};
use crate::splines::{BSplineBasis, Side};
use crate::tensor::{kron_solve_lu, KroneckerFactors, TensorIndexMap};

/// Generalized problem `A v = λ B v` in the trial space.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseGalerkinProblem {
    pub a: DenseMatrix,
    pub b: DenseMatrix,
    /// Gauss points per span in each direction.
    pub quad_order: Vec<usize>,
}

/// Points of a tensor Gauss grid with weights, `√det DF` and the nonzero
/// basis functions at each point.
struct QuadGrid {
    physical: Vec<Vec<f64>>,
    weights: Vec<f64>,
    jac_sqrt: Vec<f64>,
    basis: Vec<Vec<(usize, f64)>>,
}

fn quad_grid(
    patch: &TensorPatch,
    bases: &[BSplineBasis],
    orders: &[usize],
) -> Result<QuadGrid> {
    let d = patch.dim();
    let mut per_dir = Vec::with_capacity(d);
    for (b, &q) in bases.iter().zip(orders) {
        let (pts, wts) = span_quadrature(&b.spans(), q)?;
        let evals = pts
            .iter()
            .map(|&x| b.evaluate(x))
            .collect::<Result<Vec<_>>>()?;
        per_dir.push((pts, wts, evals));
    }
    let extents: Vec<usize> = per_dir.iter().map(|(p, _, _)| p.len()).collect();
    let map = TensorIndexMap::new(extents);
    let dims: Vec<usize> = bases.iter().map(BSplineBasis::dim).collect();
    let sides = vec![Side::Right; d];
    let mut grid = QuadGrid {
        physical: Vec::with_capacity(map.len()),
        weights: Vec::with_capacity(map.len()),
        jac_sqrt: Vec::with_capacity(map.len()),
        basis: Vec::with_capacity(map.len()),
    };
    for flat in 0..map.len() {
        let idx = map.unflatten(flat);
        let xi: Vec<f64> = idx.iter().enumerate().map(|(k, &i)| per_dir[k].0[i]).collect();
        let w: f64 = idx.iter().enumerate().map(|(k, &i)| per_dir[k].1[i]).product();
        let (det, _) = patch.jacobian_determinant_floored(&xi, &sides, JACOBIAN_FLOOR)?;
        let mut funcs = vec![(0usize, 1.0)];
        let mut stride = 1;
        for (k, &i) in idx.iter().enumerate() {
            let act = &per_dir[k].2[i];
            let mut next = Vec::with_capacity(funcs.len() * act.values.len());
            for &(j, v) in &funcs {
                for (a, &bv) in act.values.iter().enumerate() {
                    next.push((j + (act.first + a) * stride, v * bv));
                }
            }
            funcs = next;
            stride *= dims[k];
        }
        grid.physical.push(patch.map_point(&xi)?);
        grid.weights.push(w);
        grid.jac_sqrt.push(det.sqrt());
        grid.basis.push(funcs);
    }
    Ok(grid)
}

/// Dense `A` with `quad_order` Gauss points per span and direction
/// (`None` means `p + 1`), and `B` as the explicit Kronecker product of the
/// univariate Gramians.
///
/// `A(i,j) = Σ_{p,p'} w_p w_p' √det_p √det_p' Γ(x_p, x_p') B_i(ξ_p) B_j(ξ_p')`.
pub fn assemble_dense_galerkin(
    patch: &TensorPatch,
    trial: &[BSplineBasis],
    kernel: &dyn Kernel,
    quad_order: Option<usize>,
    cap: usize,
) -> Result<DenseGalerkinProblem> {
    let d = patch.dim();
    if trial.len() != d {
        return Err(KleError::Dimension {
            context: "trial bases",
            expected: d,
            actual: trial.len(),
        });
    }
    let n: usize = trial.iter().map(BSplineBasis::dim).product();
    if n > cap {
        return Err(KleError::CapExceeded { size: n, cap });
    }
    let orders: Vec<usize> = trial
        .iter()
        .map(|b| quad_order.unwrap_or(b.degree() + 1).max(b.degree() + 1))
        .collect();
    let grid = quad_grid(patch, trial, &orders)?;
    let nq = grid.weights.len();
    let s: Vec<f64> = grid.weights.iter().zip(&grid.jac_sqrt).map(|(w, j)| w * j).collect();

    // C = K_s Φ, with K_s(p, p') = s_p Γ(x_p, x_p') s_p'.
    let mut c = vec![0.0; nq * n];
    for p in 0..nq {
        let crow = &mut c[p * n..(p + 1) * n];
        for pp in 0..nq {
            let k = s[p] * s[pp] * kernel.eval(&grid.physical[p], &grid.physical[pp]);
            for &(j, v) in &grid.basis[pp] {
                crow[j] += k * v;
            }
        }
    }
    let mut a = DenseMatrix::zeros(n, n);
    for p in 0..nq {
        let crow = &c[p * n..(p + 1) * n];
        for &(i, v) in &grid.basis[p] {
            for (j, &cj) in crow.iter().enumerate() {
                a.add(i, j, v * cj);
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            let s = 0.5 * (a.get(i, j) + a.get(j, i));
            a.set(i, j, s);
            a.set(j, i, s);
        }
    }
    let z: Vec<DenseMatrix> = trial
        .iter()
        .map(|t| trial_mass_matrix(t).map(|m| m.to_dense()))
        .collect::<Result<_>>()?;
    Ok(DenseGalerkinProblem {
        a,
        b: explicit_kronecker(&z),
        quad_order: orders,
    })
}

fn to_nalgebra(m: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

/// All eigenvalues of a symmetric matrix, descending.
pub fn symmetric_eigenvalues(m: &DenseMatrix) -> Vec<f64> {
    let a = to_nalgebra(m);
    let a = (&a + a.transpose()) * 0.5;
    let mut ev: Vec<f64> = SymmetricEigen::new(a).eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev
}

/// The `m` largest generalized eigenpairs, via dense Cholesky reduction.
pub fn solve_dense(problem: &DenseGalerkinProblem, m: usize) -> Result<KleSpectrum> {
    let n = problem.a.rows();
    if m > n {
        return Err(KleError::InvalidArgument(format!("{m} modes requested from a problem of size {n}")));
    }
    let b = to_nalgebra(&problem.b);
    let l = b.clone()
        .cholesky()
        .ok_or(KleError::NotPositiveDefinite { minor: 0 })?
        .l();
    let a = to_nalgebra(&problem.a);
    // C = L⁻¹ A L⁻ᵀ
    let x = l.solve_lower_triangular(&a).expect("nonsingular Cholesky factor");
    let c = l
        .solve_lower_triangular(&x.transpose())
        .expect("nonsingular Cholesky factor");
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let lt = l.transpose();
    let mut eigenvalues = Vec::with_capacity(m);
    let mut vectors = Vec::with_capacity(m);
    let mut residuals = Vec::with_capacity(m);
    for &k in order.iter().take(m) {
        let y = eig.eigenvectors.column(k).into_owned();
        let lam = eig.eigenvalues[k];
        residuals.push((&c * &y - &y * lam).norm());
        let v = lt.solve_upper_triangular(&y).expect("nonsingular Cholesky factor");
        let nrm = (v.transpose() * &b * &v)[(0, 0)].sqrt();
        let mut v: Vec<f64> = v.iter().map(|t| t / nrm).collect();
        apply_sign_convention(&mut v);
        eigenvalues.push(lam);
        vectors.push(v);
    }
    let scale = eigenvalues.first().copied().unwrap_or(0.0).abs();
    let psd_violations = clip_eigenvalues(&mut eigenvalues, 1e-10 * scale);
    Ok(KleSpectrum {
        eigenvalues,
        vectors,
        residuals,
        matvecs: 0,
        restarts: 0,
        psd_violations,
    })
}

/// A positive root of the 1D exponential-kernel characteristic equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticRoot {
    pub omega: f64,
    /// Even (cosine) family: `c − ω tan(ωa) = 0`; odd: `ω + c tan(ωa) = 0`.
    pub even: bool,
    pub eigenvalue: f64,
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 1e-14 * mid.abs().max(1e-300) {
            return mid;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Largest `count` eigenvalues of `σ² exp(−|x − y|/(bL))` on an interval of
/// the given length, from the roots of the characteristic equations.
pub fn analytic_exponential_roots(
    corr_length: f64,
    variance: f64,
    domain_length: f64,
    count: usize,
) -> Vec<AnalyticRoot> {
    let c = 1.0 / corr_length;
    let a = 0.5 * domain_length;
    let pi = std::f64::consts::PI;
    // Multiplied through by cos(ωa) to avoid the poles of tan.
    let even = |w: f64| c * (w * a).cos() - w * (w * a).sin();
    let odd = |w: f64| w * (w * a).cos() + c * (w * a).sin();
    let mut roots = Vec::with_capacity(count + 2);
    let per_family = count / 2 + 2;
    for i in 0..per_family {
        let fi = i as f64;
        let lo = fi * pi / a;
        let hi = (fi + 0.5) * pi / a;
        roots.push((bisect(even, lo, hi), true));
        if i > 0 {
            let lo = (fi - 0.5) * pi / a;
            roots.push((bisect(odd, lo, fi * pi / a), false));
        }
    }
    roots.sort_by(|x, y| x.0.total_cmp(&y.0));
    roots
        .into_iter()
        .take(count)
        .map(|(omega, even)| AnalyticRoot {
            omega,
            even,
            eigenvalue: 2.0 * c * variance / (omega * omega + c * c),
        })
        .collect()
}

pub fn analytic_exponential_spectrum_1d(
    corr_length: f64,
    variance: f64,
    domain_length: f64,
    count: usize,
) -> Vec<f64> {
    analytic_exponential_roots(corr_length, variance, domain_length, count)
        .into_iter()
        .map(|r| r.eigenvalue)
        .collect()
}

/// Relative `L²(D̂ × D̂)` error between the scaled pulled-back kernel
/// `G(ξ̂, ξ̂′) = Γ(F(ξ̂), F(ξ̂′)) √det DF(ξ̂) √det DF(ξ̂′)` and its tensor
/// spline interpolant at the Greville points of `interp`, measured with
/// `quad_order` Gauss points per span of the interpolation mesh.
pub fn kernel_interpolation_error(
    patch: &TensorPatch,
    interp: &[BSplineBasis],
    kernel: &dyn Kernel,
    quad_order: usize,
) -> Result<f64> {
    let greville = patch.build_greville_grid(interp)?;
    let nt = greville.len();
    let js = greville.jacobian_sqrt();
    let lu = KroneckerFactors::from_directions(
        interp
            .iter()
            .map(|b| collocation_matrix(b)?.lu_factor())
            .collect::<Result<Vec<_>>>()?,
    );
    // Coefficients C = B̃⁻¹ (J Γ J) B̃⁻ᵀ; B̃ multiplies the first index.
    let mut cols = Vec::with_capacity(nt);
    for l in 0..nt {
        let col: Vec<f64> = (0..nt)
            .map(|k| js[k] * js[l] * kernel.eval(greville.point(k), greville.point(l)))
            .collect();
        cols.push(kron_solve_lu(&lu, &col, false)?);
    }
    // cols[l][k] = (B̃⁻¹ G)(k, l); now solve along l for each k.
    let mut coef = vec![0.0; nt * nt];
    for k in 0..nt {
        let row: Vec<f64> = (0..nt).map(|l| cols[l][k]).collect();
        let solved = kron_solve_lu(&lu, &row, false)?;
        coef[k * nt..(k + 1) * nt].copy_from_slice(&solved);
    }
    drop(cols);

    let orders = vec![quad_order; patch.dim()];
    let grid = quad_grid(patch, interp, &orders)?;
    let nq = grid.weights.len();
    let js_q = &grid.jac_sqrt;
    // T = Φ C (nq × nt)
    let mut t = vec![0.0; nq * nt];
    for p in 0..nq {
        let trow = &mut t[p * nt..(p + 1) * nt];
        for &(k, v) in &grid.basis[p] {
            for (tl, &cl) in trow.iter_mut().zip(&coef[k * nt..(k + 1) * nt]) {
                *tl += v * cl;
            }
        }
    }
    let mut err2 = 0.0;
    let mut ref2 = 0.0;
    for p in 0..nq {
        let trow = &t[p * nt..(p + 1) * nt];
        for pp in 0..nq {
            let approx: f64 = grid.basis[pp].iter().map(|&(l, v)| v * trow[l]).sum();
            let exact = js_q[p] * js_q[pp] * kernel.eval(&grid.physical[p], &grid.physical[pp]);
            let w = grid.weights[p] * grid.weights[pp];
            err2 += w * (exact - approx).powi(2);
            ref2 += w * exact * exact;
        }
    }
    Ok((err2 / ref2).sqrt())
}

/// Spectral norm of a symmetric matrix by power iteration on `MᵀM`.
pub fn spectral_norm(m: &DenseMatrix, tol: f64) -> f64 {
    let n = m.cols();
    if n == 0 {
        return 0.0;
    }
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.01 * ((i * 7919) % 101) as f64).collect();
    let mut y = vec![0.0; m.rows()];
    let mut z = vec![0.0; n];
    let mut est = 0.0;
    for _ in 0..100_000 {
        let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if nx == 0.0 {
            return 0.0;
        }
        x.iter_mut().for_each(|v| *v /= nx);
        m.matvec(&x, &mut y);
        m.matvec_transpose(&y, &mut z);
        let next = z.iter().map(|v| v * v).sum::<f64>().sqrt().sqrt();
        std::mem::swap(&mut x, &mut z);
        if (next - est).abs() <= tol * next {
            return next;
        }
        est = next;
    }
    est
}

/// `(‖A − Ã‖₂/‖A‖₂, ‖A − Ã‖_F/‖A‖_F)`.
pub fn operator_error_norms(a: &DenseMatrix, a_tilde: &DenseMatrix) -> Result<(f64, f64)> {
    if a.rows() != a_tilde.rows() || a.cols() != a_tilde.cols() {
        return Err(KleError::Dimension {
            context: "operator error norms",
            expected: a.rows() * a.cols(),
            actual: a_tilde.rows() * a_tilde.cols(),
        });
    }
    let mut diff = DenseMatrix::zeros(a.rows(), a.cols());
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            diff.set(i, j, a.get(i, j) - a_tilde.get(i, j));
        }
    }
    let two = spectral_norm(&diff, 1e-6) / spectral_norm(a, 1e-6);
    let fro = diff.frobenius_norm() / a.frobenius_norm();
    Ok((two, fro))
}

/// `A_d ⊗ ⋯ ⊗ A_1` entry by entry from the index formula; factors are given
/// first direction first.
pub fn explicit_kronecker(directions: &[DenseMatrix]) -> DenseMatrix {
    let rows = TensorIndexMap::new(directions.iter().map(DenseMatrix::rows).collect());
    let cols = TensorIndexMap::new(directions.iter().map(DenseMatrix::cols).collect());
    let mut out = DenseMatrix::zeros(rows.len(), cols.len());
    for r in 0..rows.len() {
        let ri = rows.unflatten(r);
        for c in 0..cols.len() {
            let ci = cols.unflatten(c);
            let v: f64 = directions
                .iter()
                .enumerate()
                .map(|(k, m)| m.get(ri[k], ci[k]))
                .product();
            out.set(r, c, v);
        }
    }
    out
}
