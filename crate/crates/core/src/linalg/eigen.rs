use super::{HermMatrix, LinalgError, SymMatrix};

const MAX_SWEEPS: usize = 100;
const OFF_DIAGONAL_TOL: f64 = 1e-12;

/// Eigendecomposition `A = V Λ Vᵀ` with eigenvalues in ascending order.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    /// Row-major `n × n`; column `k` is the eigenvector for `values[k]`.
    pub vectors: Vec<f64>,
}

impl Eigen {
    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, k: usize) -> Vec<f64> {
        let n = self.n();
        (0..n).map(|i| self.vectors[i * n + k]).collect()
    }

    /// Index of the eigenvalue of largest magnitude.
    pub fn dominant(&self) -> usize {
        let n = self.n();
        if n == 0 {
            return 0;
        }
        if self.values[n - 1].abs() >= self.values[0].abs() {
            n - 1
        } else {
            0
        }
    }
}

/// Cyclic Jacobi eigensolver for real symmetric matrices.
///
/// Sweeps stop once the off-diagonal Frobenius norm drops below
/// `1e-12 · ‖A‖_F`.
pub fn eigh(a: &SymMatrix) -> Result<Eigen, LinalgError> {
    let n = a.n();
    let mut m = a.as_slice().to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let norm = a.frobenius();
    let threshold = OFF_DIAGONAL_TOL * norm;

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal(&m, n) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate(&mut m, &mut v, n, p, q, c, s);
            }
        }
    }
    if !converged && off_diagonal(&m, n) > threshold {
        return Err(LinalgError::NoConvergence { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].total_cmp(&m[j * n + j]));
    let values = order.iter().map(|&k| m[k * n + k]).collect();
    let mut vectors = vec![0.0; n * n];
    for (new, &old) in order.iter().enumerate() {
        for i in 0..n {
            vectors[i * n + new] = v[i * n + old];
        }
    }
    Ok(Eigen { values, vectors })
}

fn off_diagonal(m: &[f64], n: usize) -> f64 {
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += m[i * n + j] * m[i * n + j];
            }
        }
    }
    acc.sqrt()
}

fn rotate(m: &mut [f64], v: &mut [f64], n: usize, p: usize, q: usize, c: f64, s: f64) {
    for k in 0..n {
        let (kp, kq) = (m[k * n + p], m[k * n + q]);
        m[k * n + p] = c * kp - s * kq;
        m[k * n + q] = s * kp + c * kq;
    }
    for k in 0..n {
        let (pk, qk) = (m[p * n + k], m[q * n + k]);
        m[p * n + k] = c * pk - s * qk;
        m[q * n + k] = s * pk + c * qk;
    }
    // The rotation annihilates the pair exactly in exact arithmetic.
    m[p * n + q] = 0.0;
    m[q * n + p] = 0.0;
    for k in 0..n {
        let (kp, kq) = (v[k * n + p], v[k * n + q]);
        v[k * n + p] = c * kp - s * kq;
        v[k * n + q] = s * kp + c * kq;
    }
}

/// Matrices whose real spectrum can be computed.
pub trait Spectral {
    /// Eigenvalues in ascending order, with multiplicity.
    fn spectrum(&self) -> Result<Vec<f64>, LinalgError>;

    /// Largest absolute eigenvalue.
    fn op_norm(&self) -> Result<f64, LinalgError> {
        Ok(self.spectrum()?.iter().fold(0.0_f64, |m, x| m.max(x.abs())))
    }
}

impl Spectral for SymMatrix {
    fn spectrum(&self) -> Result<Vec<f64>, LinalgError> {
        Ok(eigh(self)?.values)
    }
}

impl Spectral for HermMatrix {
    fn spectrum(&self) -> Result<Vec<f64>, LinalgError> {
        if self.is_real() {
            return real_part(self).spectrum();
        }
        // The embedding repeats every eigenvalue twice; keep one of each pair.
        let doubled = eigh(&self.real_embedding())?.values;
        Ok(doubled.iter().step_by(2).copied().collect())
    }

    fn op_norm(&self) -> Result<f64, LinalgError> {
        if self.is_real() {
            return real_part(self).op_norm();
        }
        if self.re_slice().iter().all(|x| *x == 0.0) {
            // H = iA with A real antisymmetric: ‖H‖² = λ_max(AᵀA).
            let n = self.n();
            let a = self.im_slice();
            let gram = SymMatrix::from_fn(n, |i, j| (0..n).map(|k| a[k * n + i] * a[k * n + j]).sum());
            return Ok(gram.op_norm()?.sqrt());
        }
        Ok(self.spectrum()?.iter().fold(0.0_f64, |m, x| m.max(x.abs())))
    }
}

fn real_part(h: &HermMatrix) -> SymMatrix {
    SymMatrix::from_row_major(h.n(), h.re_slice()).expect("Hermitian real part is finite and square")
}

/// Largest absolute eigenvalue.
pub fn op_norm<M: Spectral + ?Sized>(a: &M) -> Result<f64, LinalgError> {
    a.op_norm()
}

/// Sum of absolute eigenvalues.
pub fn trace_norm(a: &HermMatrix) -> Result<f64, LinalgError> {
    Ok(a.spectrum()?.iter().map(|x| x.abs()).sum())
}

/// Eigenvector of a Hermitian matrix for its largest (`top = true`) or
/// smallest eigenvalue, as a stacked `(re, im)` unit vector, with that
/// eigenvalue.
pub fn extreme_eigenpair(h: &HermMatrix, top: bool) -> Result<(f64, Vec<f64>), LinalgError> {
    if h.is_real() {
        let e = eigh(&real_part(h))?;
        let k = if top { e.n() - 1 } else { 0 };
        let mut v = e.vector(k);
        v.resize(2 * h.n(), 0.0);
        return Ok((e.values[k], v));
    }
    let e = eigh(&h.real_embedding())?;
    let k = if top { e.n() - 1 } else { 0 };
    Ok((e.values[k], e.vector(k)))
}

/// All `n` eigenpairs of a Hermitian matrix, eigenvalues ascending,
/// eigenvectors stacked as `(re, im)` and orthonormal in `ℂⁿ`.
///
/// Each eigenvalue appears twice in the real embedding, with eigenvectors
/// `z` and `i·z`; complex Gram–Schmidt keeps one of each pair.
pub fn herm_eigenpairs(h: &HermMatrix) -> Result<Vec<(f64, Vec<f64>)>, LinalgError> {
    let n = h.n();
    if h.is_real() {
        let e = eigh(&real_part(h))?;
        return Ok((0..n)
            .map(|k| {
                let mut v = e.vector(k);
                v.resize(2 * n, 0.0);
                (e.values[k], v)
            })
            .collect());
    }
    let e = eigh(&h.real_embedding())?;
    let mut out: Vec<(f64, Vec<f64>)> = Vec::with_capacity(n);
    for k in 0..2 * n {
        if out.len() == n {
            break;
        }
        let mut v = e.vector(k);
        for (_, u) in &out {
            // ⟨u, v⟩ = Σ conj(u) v with u = a + ib, v = c + id.
            let (a, b) = u.split_at(n);
            let (c, d) = v.split_at(n);
            let re: f64 = (0..n).map(|i| a[i] * c[i] + b[i] * d[i]).sum();
            let im: f64 = (0..n).map(|i| a[i] * d[i] - b[i] * c[i]).sum();
            for i in 0..n {
                v[i] -= re * a[i] - im * b[i];
                v[n + i] -= re * b[i] + im * a[i];
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.5 {
            v.iter_mut().for_each(|x| *x /= norm);
            out.push((e.values[k], v));
        }
    }
    Ok(out)
}
