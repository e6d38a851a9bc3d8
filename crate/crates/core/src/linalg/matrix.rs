use super::LinalgError;

/// Dense real symmetric matrix, stored row-major.
///
/// Every constructor symmetrizes its input as `(a[i][j] + a[j][i]) / 2`, so
/// `get(i, j) == get(j, i)` holds bit-for-bit.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn diag(values: &[f64]) -> Result<Self, LinalgError> {
        check_finite(values)?;
        let n = values.len();
        let mut m = Self::zeros(n);
        for (i, v) in values.iter().enumerate() {
            m.data[i * n + i] = *v;
        }
        Ok(m)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(LinalgError::Shape(format!(
                "expected {n} columns per row, found a row of length {}",
                bad.len()
            )));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::from_row_major(n, &flat)
    }

    pub fn from_row_major(n: usize, data: &[f64]) -> Result<Self, LinalgError> {
        if data.len() != n * n {
            return Err(LinalgError::Shape(format!(
                "expected {} entries for a {n}x{n} matrix, found {}",
                n * n,
                data.len()
            )));
        }
        check_finite(data)?;
        Ok(Self::from_fn(n, |i, j| data[i * n + j]))
    }

    /// Builds the symmetrization of the matrix `(i, j) -> f(i, j)`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut raw = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                raw[i * n + j] = f(i, j);
            }
        }
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                data[i * n + j] = (raw[i * n + j] + raw[j * n + i]) / 2.0;
            }
        }
        Self { n, data }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n.max(1)).map(<[f64]>::to_vec).collect()
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        self.data
            .chunks(self.n.max(1))
            .take(self.n)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|x| x * c).collect(),
        }
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// Complex Hermitian matrix `re + i·im` with `re` symmetric and `im`
/// antisymmetric, both row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct HermMatrix {
    n: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl HermMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            re: vec![0.0; n * n],
            im: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_real(&SymMatrix::identity(n))
    }

    pub fn from_real(a: &SymMatrix) -> Self {
        Self {
            n: a.n(),
            re: a.as_slice().to_vec(),
            im: vec![0.0; a.n() * a.n()],
        }
    }

    pub fn diag(values: &[f64]) -> Result<Self, LinalgError> {
        Ok(Self::from_real(&SymMatrix::diag(values)?))
    }

    /// Hermitian part of `re + i·im`: `re` is symmetrized and `im`
    /// antisymmetrized.
    pub fn from_parts(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let n = re.len();
        if im.len() != n || re.iter().chain(im).any(|r| r.len() != n) {
            return Err(LinalgError::Shape(
                "real and imaginary parts must both be square of equal size".into(),
            ));
        }
        let re: Vec<f64> = re.iter().flatten().copied().collect();
        let im: Vec<f64> = im.iter().flatten().copied().collect();
        Self::from_row_major(n, &re, &im)
    }

    pub fn from_row_major(n: usize, re: &[f64], im: &[f64]) -> Result<Self, LinalgError> {
        if re.len() != n * n || im.len() != n * n {
            return Err(LinalgError::Shape(format!(
                "expected {} entries per part for a {n}x{n} matrix",
                n * n
            )));
        }
        check_finite(re)?;
        check_finite(im)?;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.re[i * n + j] = (re[i * n + j] + re[j * n + i]) / 2.0;
                out.im[i * n + j] = (im[i * n + j] - im[j * n + i]) / 2.0;
            }
        }
        Ok(out)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn re(&self, i: usize, j: usize) -> f64 {
        self.re[i * self.n + j]
    }

    #[inline]
    pub fn im(&self, i: usize, j: usize) -> f64 {
        self.im[i * self.n + j]
    }

    pub fn re_slice(&self) -> &[f64] {
        &self.re
    }

    pub fn im_slice(&self) -> &[f64] {
        &self.im
    }

    pub fn re_rows(&self) -> Vec<Vec<f64>> {
        self.re.chunks(self.n.max(1)).map(<[f64]>::to_vec).collect()
    }

    pub fn im_rows(&self) -> Vec<Vec<f64>> {
        self.im.chunks(self.n.max(1)).map(<[f64]>::to_vec).collect()
    }

    pub fn is_real(&self) -> bool {
        self.im.iter().all(|x| *x == 0.0)
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.re(i, i)).sum()
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, -1.0)
    }

    fn combine(&self, other: &Self, sign: f64) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        Self {
            n: self.n,
            re: self.re.iter().zip(&other.re).map(|(a, b)| a + sign * b).collect(),
            im: self.im.iter().zip(&other.im).map(|(a, b)| a + sign * b).collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            n: self.n,
            re: self.re.iter().map(|x| x * c).collect(),
            im: self.im.iter().map(|x| x * c).collect(),
        }
    }

    pub fn add_identity(&self, c: f64) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            out.re[i * self.n + i] += c;
        }
        out
    }

    /// `Re trace(self · other)`; for Hermitian arguments this is the full trace.
    pub fn trace_product(&self, other: &Self) -> f64 {
        assert_eq!(self.n, other.n, "dimension mismatch");
        // trace(AB) = sum_ij A_ij B_ji, and B_ji = conj(B_ij) for Hermitian B.
        self.re
            .iter()
            .zip(&other.re)
            .map(|(a, b)| a * b)
            .chain(self.im.iter().zip(&other.im).map(|(a, b)| a * b))
            .sum()
    }

    /// The real `2n × 2n` matrix `[[re, -im], [im, re]]`.
    ///
    /// Its spectrum is the spectrum of `self` with every eigenvalue doubled,
    /// and an eigenvector `(x, y)` corresponds to the complex vector `x + i·y`.
    pub fn real_embedding(&self) -> SymMatrix {
        let n = self.n;
        let m = 2 * n;
        let mut data = vec![0.0; m * m];
        for i in 0..n {
            for j in 0..n {
                let (r, c) = (self.re(i, j), self.im(i, j));
                data[i * m + j] = r;
                data[(i + n) * m + (j + n)] = r;
                data[i * m + (j + n)] = -c;
                data[(i + n) * m + j] = c;
            }
        }
        SymMatrix { n: m, data }
    }

    /// Inverse of [`real_embedding`](Self::real_embedding) for matrices that
    /// commute with the complex structure.
    pub fn from_real_embedding(e: &SymMatrix) -> Result<Self, LinalgError> {
        if !e.n().is_multiple_of(2) {
            return Err(LinalgError::Shape("embedding must have even size".into()));
        }
        let n = e.n() / 2;
        let mut re = vec![0.0; n * n];
        let mut im = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                re[i * n + j] = (e.get(i, j) + e.get(i + n, j + n)) / 2.0;
                im[i * n + j] = (e.get(i + n, j) - e.get(i, j + n)) / 2.0;
            }
        }
        Self::from_row_major(n, &re, &im)
    }

    /// `x* H x` for the complex vector `x = (re_part, im_part)` stacked.
    pub fn quadratic_form(&self, stacked: &[f64]) -> f64 {
        let n = self.n;
        let (x, y) = stacked.split_at(n);
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let (r, c) = (self.re(i, j), self.im(i, j));
                acc += x[i] * (r * x[j] - c * y[j]) + y[i] * (c * x[j] + r * y[j]);
            }
        }
        acc
    }

    pub fn max_abs(&self) -> f64 {
        self.re
            .iter()
            .zip(&self.im)
            .fold(0.0, |m, (a, b)| m.max(a.hypot(*b)))
    }
}

/// Dense complex square matrix used for commutator arithmetic.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct CMatrix {
    pub n: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl CMatrix {
    pub fn from_herm(h: &HermMatrix) -> Self {
        Self {
            n: h.n,
            re: h.re.clone(),
            im: h.im.clone(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.n;
        let mut re = vec![0.0; n * n];
        let mut im = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let (ar, ai) = (self.re[i * n + k], self.im[i * n + k]);
                if ar == 0.0 && ai == 0.0 {
                    continue;
                }
                for j in 0..n {
                    let (br, bi) = (other.re[k * n + j], other.im[k * n + j]);
                    re[i * n + j] += ar * br - ai * bi;
                    im[i * n + j] += ar * bi + ai * br;
                }
            }
        }
        Self { n, re, im }
    }

    pub fn commutator(&self, other: &Self) -> Self {
        let ab = self.mul(other);
        let ba = other.mul(self);
        Self {
            n: self.n,
            re: ab.re.iter().zip(&ba.re).map(|(a, b)| a - b).collect(),
            im: ab.im.iter().zip(&ba.im).map(|(a, b)| a - b).collect(),
        }
    }

    /// Hermitian part `(M + M*)/2`.
    pub fn hermitian_part(&self) -> HermMatrix {
        let n = self.n;
        let mut h = HermMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                h.re[i * n + j] = (self.re[i * n + j] + self.re[j * n + i]) / 2.0;
                h.im[i * n + j] = (self.im[i * n + j] - self.im[j * n + i]) / 2.0;
            }
        }
        h
    }
}

fn check_finite(values: &[f64]) -> Result<(), LinalgError> {
    if values.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(LinalgError::NonFinite)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_symmetrizes_exactly() {
        let a = SymMatrix::from_rows(&[vec![1.0, 0.3], vec![0.1, 2.0]]).unwrap();
        assert_eq!(a.get(0, 1), a.get(1, 0));
        assert!((a.get(0, 1) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_finite_and_ragged() {
        assert!(matches!(
            SymMatrix::from_rows(&[vec![1.0, f64::NAN], vec![0.0, 1.0]]),
            Err(LinalgError::NonFinite)
        ));
        assert!(matches!(
            SymMatrix::from_rows(&[vec![1.0], vec![0.0, 1.0]]),
            Err(LinalgError::Shape(_))
        ));
    }

    #[test]
    fn hermitian_parts_have_the_right_symmetry() {
        let h = HermMatrix::from_parts(
            &[vec![1.0, 2.0], vec![0.0, 3.0]],
            &[vec![5.0, 1.0], vec![-3.0, 7.0]],
        )
        .unwrap();
        assert_eq!(h.re(0, 1), h.re(1, 0));
        assert_eq!(h.im(0, 1), -h.im(1, 0));
        assert_eq!(h.im(0, 0), 0.0);
        assert_eq!(h.im(0, 1), 2.0);
    }

    #[test]
    fn embedding_round_trips() {
        let h = HermMatrix::from_parts(
            &[vec![1.0, 2.0], vec![2.0, -3.0]],
            &[vec![0.0, 0.5], vec![-0.5, 0.0]],
        )
        .unwrap();
        let back = HermMatrix::from_real_embedding(&h.real_embedding()).unwrap();
        assert_eq!(back, h);
    }

    #[test]
    fn quadratic_form_matches_complex_arithmetic() {
        // H = [[2, i], [-i, 1]]
        let h = HermMatrix::from_parts(
            &[vec![2.0, 0.0], vec![0.0, 1.0]],
            &[vec![0.0, 1.0], vec![-1.0, 0.0]],
        )
        .unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // x = (s, i s): 1 + 0.5 + s(i)(i s) + (-i s)(-i)s = 0.5
        let v = [s, 0.0, 0.0, s];
        assert!((h.quadratic_form(&v) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn trace_product_is_real_trace() {
        let a = HermMatrix::diag(&[0.5, -0.5]).unwrap();
        let b = HermMatrix::diag(&[1.0, -1.0]).unwrap();
        assert_eq!(a.trace_product(&b), 1.0);
    }
}
