//! Small dense and banded matrices with LU and Cholesky factorizations.
//!
//! These hold the univariate factors of the Kronecker-structured operators,
//! so sizes are modest (tens to a few thousand rows). Banded storage keeps
//! one contiguous column window per row, which also covers the rectangular
//! mixed mass matrices whose band runs along a slanted diagonal.

use crate::error::{KleError, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_row_slice(rows: usize, cols: usize, data: &[f64]) -> Self {
        assert_eq!(data.len(), rows * cols, "data length must be rows * cols");
        Self {
            rows,
            cols,
            data: data.to_vec(),
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Self {
            rows: r,
            cols: c,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] += v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(y.len(), self.rows);
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    pub fn matvec_transpose(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.rows);
        debug_assert_eq!(y.len(), self.cols);
        y.fill(0.0);
        for (i, &xi) in x.iter().enumerate() {
            for (yj, a) in y.iter_mut().zip(self.row(i)) {
                *yj += a * xi;
            }
        }
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Sparse matrix storing a contiguous column window for every row.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix {
    rows: usize,
    cols: usize,
    first: Vec<usize>,
    len: Vec<usize>,
    width: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
    /// Build from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut lo = vec![usize::MAX; rows];
        let mut hi = vec![0usize; rows];
        for &(i, j, _) in triplets {
            lo[i] = lo[i].min(j);
            hi[i] = hi[i].max(j);
        }
        let mut first = vec![0; rows];
        let mut len = vec![0; rows];
        for i in 0..rows {
            if lo[i] != usize::MAX {
                first[i] = lo[i];
                len[i] = hi[i] - lo[i] + 1;
            }
        }
        let width = len.iter().copied().max().unwrap_or(0);
        let mut data = vec![0.0; rows * width];
        for &(i, j, v) in triplets {
            data[i * width + j - first[i]] += v;
        }
        Self {
            rows,
            cols,
            first,
            len,
            width,
            data,
        }
    }

    pub fn from_dense(m: &DenseMatrix) -> Self {
        let mut t = Vec::new();
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                let v = m.get(i, j);
                if v != 0.0 {
                    t.push((i, j, v));
                }
            }
        }
        Self::from_triplets(m.rows(), m.cols(), &t)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let f = self.first[i];
        if j >= f && j < f + self.len[i] {
            self.data[i * self.width + j - f]
        } else {
            0.0
        }
    }

    /// Stored window of row `i`: first column and values.
    pub fn row_window(&self, i: usize) -> (usize, &[f64]) {
        let s = i * self.width;
        (self.first[i], &self.data[s..s + self.len[i]])
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let (f, vals) = self.row_window(i);
            *yi = vals.iter().zip(&x[f..]).map(|(a, b)| a * b).sum();
        }
    }

    pub fn matvec_transpose(&self, x: &[f64], y: &mut [f64]) {
        y.fill(0.0);
        for (i, &xi) in x.iter().enumerate() {
            let (f, vals) = self.row_window(i);
            for (yj, a) in y[f..].iter_mut().zip(vals) {
                *yj += a * xi;
            }
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            let (f, vals) = self.row_window(i);
            for (k, &v) in vals.iter().enumerate() {
                m.set(i, f + k, v);
            }
        }
        m
    }

    /// `(lower, upper)` bandwidths relative to the main diagonal.
    pub fn bandwidths(&self) -> (usize, usize) {
        let mut kl = 0;
        let mut ku = 0;
        for i in 0..self.rows {
            let (f, vals) = self.row_window(i);
            for (k, &v) in vals.iter().enumerate() {
                if v == 0.0 {
                    continue;
                }
                let j = f + k;
                if j < i {
                    kl = kl.max(i - j);
                } else {
                    ku = ku.max(j - i);
                }
            }
        }
        (kl, ku)
    }
}

/// Dense `n x n` partial-pivot LU, or band LU without pivoting.
///
/// The band path is meant for totally positive matrices (spline collocation
/// at Greville points), for which elimination without pivoting is stable.
#[derive(Debug, Clone)]
pub enum LuFactors {
    Dense {
        n: usize,
        lu: Vec<f64>,
        piv: Vec<usize>,
    },
    Banded {
        n: usize,
        kl: usize,
        ku: usize,
        data: Vec<f64>,
    },
}

fn pivot_threshold(scale: f64, n: usize) -> f64 {
    scale * f64::EPSILON * n.max(1) as f64 * 1e-2
}

impl LuFactors {
    pub fn factor_dense(m: &DenseMatrix) -> Result<Self> {
        let n = m.rows();
        if m.cols() != n {
            return Err(KleError::Dimension {
                context: "LU factorization (square)",
                expected: n,
                actual: m.cols(),
            });
        }
        let tiny = pivot_threshold(m.max_abs(), n);
        let mut a = m.as_slice().to_vec();
        let mut piv = vec![0; n];
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, a[i * n + k].abs()))
                .fold((k, -1.0), |best, c| if c.1 > best.1 { c } else { best });
            if pmax <= tiny {
                return Err(KleError::SingularMatrix { pivot: k });
            }
            piv[k] = p;
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
            }
            let d = a[k * n + k];
            for i in k + 1..n {
                let f = a[i * n + k] / d;
                a[i * n + k] = f;
                if f != 0.0 {
                    for j in k + 1..n {
                        a[i * n + j] -= f * a[k * n + j];
                    }
                }
            }
        }
        Ok(Self::Dense { n, lu: a, piv })
    }

    pub fn factor_banded(m: &BandedMatrix) -> Result<Self> {
        let n = m.rows();
        if m.cols() != n {
            return Err(KleError::Dimension {
                context: "LU factorization (square)",
                expected: n,
                actual: m.cols(),
            });
        }
        let (kl, ku) = m.bandwidths();
        let w = kl + ku + 1;
        let mut data = vec![0.0; n * w];
        let mut scale: f64 = 0.0;
        for i in 0..n {
            let (f, vals) = m.row_window(i);
            for (k, &v) in vals.iter().enumerate() {
                if v != 0.0 {
                    let j = f + k;
                    data[i * w + j + kl - i] = v;
                    scale = scale.max(v.abs());
                }
            }
        }
        let tiny = pivot_threshold(scale, n);
        // entry (i, j) lives at data[i*w + j + kl - i]
        for k in 0..n {
            let d = data[k * w + kl];
            if d.abs() <= tiny {
                return Err(KleError::SingularMatrix { pivot: k });
            }
            for i in k + 1..(k + kl + 1).min(n) {
                let idx = i * w + k + kl - i;
                let f = data[idx] / d;
                data[idx] = f;
                if f != 0.0 {
                    for j in k + 1..(k + ku + 1).min(n) {
                        data[i * w + j + kl - i] -= f * data[k * w + j + kl - k];
                    }
                }
            }
        }
        Ok(Self::Banded { n, kl, ku, data })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Dense { n, .. } | Self::Banded { n, .. } => *n,
        }
    }

    /// Solve `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        match self {
            Self::Dense { n, lu, piv } => {
                let n = *n;
                for k in 0..n {
                    b.swap(k, piv[k]);
                }
                for i in 0..n {
                    let mut s = b[i];
                    for j in 0..i {
                        s -= lu[i * n + j] * b[j];
                    }
                    b[i] = s;
                }
                for i in (0..n).rev() {
                    let mut s = b[i];
                    for j in i + 1..n {
                        s -= lu[i * n + j] * b[j];
                    }
                    b[i] = s / lu[i * n + i];
                }
            }
            Self::Banded { n, kl, ku, data } => {
                let (n, kl, ku) = (*n, *kl, *ku);
                let w = kl + ku + 1;
                for i in 0..n {
                    let mut s = b[i];
                    for j in i.saturating_sub(kl)..i {
                        s -= data[i * w + j + kl - i] * b[j];
                    }
                    b[i] = s;
                }
                for i in (0..n).rev() {
                    let mut s = b[i];
                    for j in i + 1..(i + ku + 1).min(n) {
                        s -= data[i * w + j + kl - i] * b[j];
                    }
                    b[i] = s / data[i * w + kl];
                }
            }
        }
    }

    /// Solve `Aᵀ x = b` in place.
    pub fn solve_transpose_in_place(&self, b: &mut [f64]) {
        match self {
            Self::Dense { n, lu, piv } => {
                let n = *n;
                // Uᵀ z = b
                for i in 0..n {
                    let mut s = b[i];
                    for j in 0..i {
                        s -= lu[j * n + i] * b[j];
                    }
                    b[i] = s / lu[i * n + i];
                }
                // Lᵀ y = z
                for i in (0..n).rev() {
                    let mut s = b[i];
                    for j in i + 1..n {
                        s -= lu[j * n + i] * b[j];
                    }
                    b[i] = s;
                }
                for k in (0..n).rev() {
                    b.swap(k, piv[k]);
                }
            }
            Self::Banded { n, kl, ku, data } => {
                let (n, kl, ku) = (*n, *kl, *ku);
                let w = kl + ku + 1;
                for i in 0..n {
                    let mut s = b[i];
                    for j in i.saturating_sub(ku)..i {
                        s -= data[j * w + i + kl - j] * b[j];
                    }
                    b[i] = s / data[i * w + kl];
                }
                for i in (0..n).rev() {
                    let mut s = b[i];
                    for j in i + 1..(i + kl + 1).min(n) {
                        s -= data[j * w + i + kl - j] * b[j];
                    }
                    b[i] = s;
                }
            }
        }
    }
}

/// Lower Cholesky factor `L` with `A = L Lᵀ`.
#[derive(Debug, Clone)]
pub enum CholeskyFactor {
    Dense { n: usize, l: Vec<f64> },
    /// Row `i` stores `L[i][i-bw ..= i]` (left-padded with zeros).
    Banded { n: usize, bw: usize, data: Vec<f64> },
}

impl CholeskyFactor {
    pub fn factor_dense(m: &DenseMatrix) -> Result<Self> {
        let n = m.rows();
        if m.cols() != n {
            return Err(KleError::Dimension {
                context: "Cholesky factorization (square)",
                expected: n,
                actual: m.cols(),
            });
        }
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut s = m.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if !(s > 0.0) {
                        return Err(KleError::NotPositiveDefinite { minor: i + 1 });
                    }
                    l[i * n + i] = s.sqrt();
                } else {
                    l[i * n + j] = s / l[j * n + j];
                }
            }
        }
        Ok(Self::Dense { n, l })
    }

    pub fn factor_banded(m: &BandedMatrix) -> Result<Self> {
        let n = m.rows();
        if m.cols() != n {
            return Err(KleError::Dimension {
                context: "Cholesky factorization (square)",
                expected: n,
                actual: m.cols(),
            });
        }
        let (kl, ku) = m.bandwidths();
        let bw = kl.max(ku);
        let w = bw + 1;
        // L[i][j] at data[i*w + j + bw - i]
        let mut data = vec![0.0; n * w];
        for i in 0..n {
            for j in i.saturating_sub(bw)..=i {
                let mut s = m.get(i, j);
                for k in i.saturating_sub(bw).max(j.saturating_sub(bw))..j {
                    s -= data[i * w + k + bw - i] * data[j * w + k + bw - j];
                }
                if i == j {
                    if !(s > 0.0) {
                        return Err(KleError::NotPositiveDefinite { minor: i + 1 });
                    }
                    data[i * w + bw] = s.sqrt();
                } else {
                    data[i * w + j + bw - i] = s / data[j * w + bw];
                }
            }
        }
        Ok(Self::Banded { n, bw, data })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Dense { n, .. } | Self::Banded { n, .. } => *n,
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self {
            Self::Dense { n, l } => {
                if j <= i {
                    l[i * n + j]
                } else {
                    0.0
                }
            }
            Self::Banded { bw, data, .. } => {
                if j <= i && i - j <= *bw {
                    data[i * (bw + 1) + j + bw - i]
                } else {
                    0.0
                }
            }
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let n = self.dim();
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                m.set(i, j, self.get(i, j));
            }
        }
        m
    }

    /// Forward substitution: `L y = b`.
    pub fn solve_lower_in_place(&self, b: &mut [f64]) {
        match self {
            Self::Dense { n, l } => {
                let n = *n;
                for i in 0..n {
                    let row = &l[i * n..i * n + i];
                    let s: f64 = row.iter().zip(&b[..i]).map(|(a, x)| a * x).sum();
                    b[i] = (b[i] - s) / l[i * n + i];
                }
            }
            Self::Banded { n, bw, data } => {
                let (n, bw) = (*n, *bw);
                let w = bw + 1;
                for i in 0..n {
                    let j0 = i.saturating_sub(bw);
                    let row = &data[i * w + j0 + bw - i..i * w + bw];
                    let s: f64 = row.iter().zip(&b[j0..i]).map(|(a, x)| a * x).sum();
                    b[i] = (b[i] - s) / data[i * w + bw];
                }
            }
        }
    }

    /// Backward substitution: `Lᵀ y = b`.
    pub fn solve_upper_in_place(&self, b: &mut [f64]) {
        match self {
            Self::Dense { n, l } => {
                let n = *n;
                for i in (0..n).rev() {
                    let xi = b[i] / l[i * n + i];
                    b[i] = xi;
                    for j in 0..i {
                        b[j] -= l[i * n + j] * xi;
                    }
                }
            }
            Self::Banded { n, bw, data } => {
                let (n, bw) = (*n, *bw);
                let w = bw + 1;
                for i in (0..n).rev() {
                    let xi = b[i] / data[i * w + bw];
                    b[i] = xi;
                    for j in i.saturating_sub(bw)..i {
                        b[j] -= data[i * w + j + bw - i] * xi;
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DenseMatrix {
        let data: Vec<f64> = (0..r * c).map(|_| rng.random_range(-1.0..1.0)).collect();
        DenseMatrix::from_row_slice(r, c, &data)
    }

    fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> DenseMatrix {
        let a = random_matrix(rng, n, n);
        let mut s = a.matmul(&a.transpose());
        for i in 0..n {
            s.add(i, i, n as f64);
        }
        s
    }

    fn banded_spd(n: usize, bw: usize) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in i.saturating_sub(bw)..(i + bw + 1).min(n) {
                let v = if i == j {
                    4.0
                } else {
                    1.0 / (1.0 + (i as f64 - j as f64).abs() + 0.1 * (i + j) as f64)
                };
                m.set(i, j, v);
            }
        }
        m
    }

    fn residual_inf(m: &DenseMatrix, x: &[f64], b: &[f64]) -> f64 {
        let mut y = vec![0.0; m.rows()];
        m.matvec(x, &mut y);
        y.iter().zip(b).fold(0.0, |a, (u, v)| a.max((u - v).abs()))
    }

    #[test]
    fn identity_factors() {
        let id = DenseMatrix::identity(4);
        let l = CholeskyFactor::factor_dense(&id).unwrap();
        assert_eq!(l.to_dense(), id);
        let lu = LuFactors::factor_dense(&id).unwrap();
        let mut b = vec![1.0, 2.0, 3.0, 4.0];
        lu.solve_in_place(&mut b);
        assert_eq!(b, vec![1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn hat_mass_cholesky() {
        let z = DenseMatrix::from_rows(&[vec![1.0 / 3.0, 1.0 / 6.0], vec![1.0 / 6.0, 1.0 / 3.0]]);
        let l = CholeskyFactor::factor_dense(&z).unwrap();
        assert!((l.get(0, 0) - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn random_spd_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_spd(&mut rng, 8);
        let l = CholeskyFactor::factor_dense(&a).unwrap().to_dense();
        let r = l.matmul(&l.transpose());
        for i in 0..8 {
            for j in 0..8 {
                assert!((r.get(i, j) - a.get(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cholesky_solves_unit_vectors() {
        let a = banded_spd(12, 2);
        for chol in [
            CholeskyFactor::factor_dense(&a).unwrap(),
            CholeskyFactor::factor_banded(&BandedMatrix::from_dense(&a)).unwrap(),
        ] {
            for i in 0..12 {
                let mut e = vec![0.0; 12];
                e[i] = 1.0;
                let mut x = e.clone();
                chol.solve_lower_in_place(&mut x);
                chol.solve_upper_in_place(&mut x);
                assert!(residual_inf(&a, &x, &e) < 1e-10);
            }
        }
    }

    #[test]
    fn banded_and_dense_cholesky_agree() {
        let a = banded_spd(20, 3);
        let d = CholeskyFactor::factor_dense(&a).unwrap();
        let b = CholeskyFactor::factor_banded(&BandedMatrix::from_dense(&a)).unwrap();
        for i in 0..20 {
            for j in 0..20 {
                assert!((d.get(i, j) - b.get(i, j)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn not_positive_definite_reports_minor() {
        let m = DenseMatrix::from_rows(&[
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 2.0],
            vec![0.0, 2.0, 1.0],
        ]);
        assert!(matches!(
            CholeskyFactor::factor_dense(&m),
            Err(KleError::NotPositiveDefinite { minor: 3 })
        ));
        assert!(matches!(
            CholeskyFactor::factor_banded(&BandedMatrix::from_dense(&m)),
            Err(KleError::NotPositiveDefinite { minor: 3 })
        ));
    }

    #[test]
    fn lu_dense_and_banded_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 15;
        let mut a = banded_spd(n, 2);
        // make it nonsymmetric but diagonally dominant
        for i in 1..n {
            a.add(i, i - 1, 0.3);
        }
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        for lu in [
            LuFactors::factor_dense(&a).unwrap(),
            LuFactors::factor_banded(&BandedMatrix::from_dense(&a)).unwrap(),
        ] {
            let mut x = b.clone();
            lu.solve_in_place(&mut x);
            assert!(residual_inf(&a, &x, &b) < 1e-12);
            let mut xt = b.clone();
            lu.solve_transpose_in_place(&mut xt);
            assert!(residual_inf(&a.transpose(), &xt, &b) < 1e-12);
        }
    }

    #[test]
    fn lu_pivoting_handles_zero_leading_entry() {
        let a = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let lu = LuFactors::factor_dense(&a).unwrap();
        let mut b = vec![2.0, 3.0];
        lu.solve_in_place(&mut b);
        assert_eq!(b, vec![3.0, 2.0]);
        let mut b = vec![2.0, 3.0];
        lu.solve_transpose_in_place(&mut b);
        assert_eq!(b, vec![3.0, 2.0]);
    }

    #[test]
    fn singular_matrix_reports_pivot() {
        let a = DenseMatrix::from_rows(&[
            vec![1.0, 2.0, 0.0],
            vec![2.0, 4.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ]);
        assert!(matches!(
            LuFactors::factor_dense(&a),
            Err(KleError::SingularMatrix { pivot: 1 })
        ));
        assert!(matches!(
            LuFactors::factor_banded(&BandedMatrix::from_dense(&a)),
            Err(KleError::SingularMatrix { pivot: 1 })
        ));
    }

    #[test]
    fn banded_rectangular_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut t = Vec::new();
        for i in 0..7 {
            for j in (i / 2)..(i / 2 + 3).min(4) {
                t.push((i, j, rng.random_range(-1.0..1.0)));
            }
        }
        let b = BandedMatrix::from_triplets(7, 4, &t);
        let d = b.to_dense();
        let x: Vec<f64> = (0..4).map(|i| i as f64 - 1.5).collect();
        let (mut y1, mut y2) = (vec![0.0; 7], vec![0.0; 7]);
        b.matvec(&x, &mut y1);
        d.matvec(&x, &mut y2);
        assert_eq!(y1, y2);
        let z: Vec<f64> = (0..7).map(|i| (i as f64).sin()).collect();
        let (mut w1, mut w2) = (vec![0.0; 4], vec![0.0; 4]);
        b.matvec_transpose(&z, &mut w1);
        d.matvec_transpose(&z, &mut w2);
        for (a, c) in w1.iter().zip(&w2) {
            assert!((a - c).abs() < 1e-15);
        }
    }
}
