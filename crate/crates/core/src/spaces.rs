//! Observables, states and zero-sum functionals for the two flavors of
//! order-unit space: real functions on a finite set, and self-adjoint
//! `n × n` complex matrices.
//!
//! Both flavors share a real coordinate system used by the metric engine.
//! A function on `n` points uses its `n` values. A Hermitian matrix uses its
//! `n` diagonal entries, followed by the real parts of the strict upper
//! triangle in row-major order, followed by the imaginary parts of the same
//! entries: `n²` coordinates in total.

use std::collections::HashSet;

use thiserror::Error;

use crate::linalg::{HermMatrix, LinalgError, Spectral};

/// Weights in `[-NEGATIVE_CLAMP, 0)` are treated as round-off and set to 0.
pub const NEGATIVE_CLAMP: f64 = 1e-15;
/// Total-mass tolerance for states and zero-sum functionals.
pub const MASS_TOL: f64 = 1e-12;
/// Smallest admissible eigenvalue of a density matrix.
pub const PSD_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpaceError {
    #[error("a space needs at least two points, got {0}")]
    TooFewPoints(usize),
    #[error("duplicate point label {0:?}")]
    DuplicateLabel(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("point index {index} out of range for a space of {n} points")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("values must be finite")]
    NonFinite,
    #[error("state weight {weight:e} at position {index} is negative")]
    NegativeWeight { index: usize, weight: f64 },
    #[error("state has total mass {0}, expected 1")]
    NotNormalized(f64),
    #[error("density matrix has eigenvalue {0:e} below zero")]
    NotPositive(f64),
    #[error("functional has total {0:e}, expected 0")]
    NotZeroSum(f64),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A finite point set with distinct labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteSpace {
    labels: Vec<String>,
}

impl FiniteSpace {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self, SpaceError> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() < 2 {
            return Err(SpaceError::TooFewPoints(labels.len()));
        }
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(SpaceError::DuplicateLabel(l.clone()));
            }
        }
        Ok(Self { labels })
    }

    /// Points labelled `"1"`, `"2"`, … `"n"`.
    pub fn numbered(n: usize) -> Result<Self, SpaceError> {
        Self::new((1..=n).map(|i| i.to_string()))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// Which order-unit space an object lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Shape {
    /// Real functions on `n` points.
    Points(usize),
    /// Self-adjoint `n × n` matrices.
    Matrix(usize),
}

impl Shape {
    pub fn dim(self) -> usize {
        match self {
            Shape::Points(n) | Shape::Matrix(n) => n,
        }
    }

    /// Number of real coordinates of an observable.
    pub fn coord_len(self) -> usize {
        match self {
            Shape::Points(n) => n,
            Shape::Matrix(n) => n * n,
        }
    }

    /// Number of coordinates once the order unit is factored out.
    pub fn reduced_len(self) -> usize {
        self.coord_len() - 1
    }

    /// Full coordinates of a basis for the gauge slice: functions vanishing
    /// at the last point, or traceless matrices.
    pub fn gauge_basis(self) -> Vec<Vec<f64>> {
        let full = self.coord_len();
        let unit = |k: usize| {
            let mut e = vec![0.0; full];
            e[k] = 1.0;
            e
        };
        match self {
            Shape::Points(n) => (0..n - 1).map(unit).collect(),
            Shape::Matrix(n) => (0..n - 1)
                .map(|k| {
                    let mut e = unit(k);
                    e[n - 1] = -1.0;
                    e
                })
                .chain((n..full).map(unit))
                .collect(),
        }
    }

    /// Full coordinates of the gauge-slice point with the given reduced
    /// coordinates.
    pub fn expand(self, reduced: &[f64]) -> Vec<f64> {
        match self {
            Shape::Points(_) => {
                let mut full = reduced.to_vec();
                full.push(0.0);
                full
            }
            Shape::Matrix(n) => {
                let mut full = Vec::with_capacity(n * n);
                full.extend_from_slice(&reduced[..n - 1]);
                full.push(-reduced[..n - 1].iter().sum::<f64>());
                full.extend_from_slice(&reduced[n - 1..]);
                full
            }
        }
    }

    /// Pulls a linear functional on full coordinates back to reduced ones.
    pub fn restrict_functional(self, coeffs: &[f64]) -> Vec<f64> {
        match self {
            Shape::Points(n) => coeffs[..n - 1].to_vec(),
            Shape::Matrix(n) => {
                let last = coeffs[n - 1];
                coeffs[..n - 1]
                    .iter()
                    .map(|c| c - last)
                    .chain(coeffs[n..].iter().copied())
                    .collect()
            }
        }
    }
}

fn check_finite(values: &[f64]) -> Result<(), SpaceError> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(SpaceError::NonFinite)
    }
}

/// A real function on a finite point set.
#[derive(Clone, Debug, PartialEq)]
pub struct CommObservable(Vec<f64>);

impl CommObservable {
    pub fn new(values: Vec<f64>) -> Result<Self, SpaceError> {
        check_finite(&values)?;
        Ok(Self(values))
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self(vec![c; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        self.0.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// A self-adjoint matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct MatObservable(HermMatrix);

impl MatObservable {
    pub fn new(matrix: HermMatrix) -> Self {
        Self(matrix)
    }

    pub fn matrix(&self) -> &HermMatrix {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.n()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Observable {
    Comm(CommObservable),
    Mat(MatObservable),
}

impl From<CommObservable> for Observable {
    fn from(f: CommObservable) -> Self {
        Observable::Comm(f)
    }
}

impl From<MatObservable> for Observable {
    fn from(a: MatObservable) -> Self {
        Observable::Mat(a)
    }
}

impl Observable {
    /// Convenience constructor for a function on points.
    pub fn points(values: &[f64]) -> Result<Self, SpaceError> {
        Ok(Observable::Comm(CommObservable::new(values.to_vec())?))
    }

    pub fn matrix(h: HermMatrix) -> Self {
        Observable::Mat(MatObservable(h))
    }

    pub fn shape(&self) -> Shape {
        match self {
            Observable::Comm(f) => Shape::Points(f.len()),
            Observable::Mat(a) => Shape::Matrix(a.n()),
        }
    }

    /// The order unit scaled by `c`.
    pub fn unit(shape: Shape, c: f64) -> Self {
        match shape {
            Shape::Points(n) => Observable::Comm(CommObservable::constant(n, c)),
            Shape::Matrix(n) => Observable::Mat(MatObservable(HermMatrix::identity(n).scale(c))),
        }
    }

    pub fn coords(&self) -> Vec<f64> {
        match self {
            Observable::Comm(f) => f.0.clone(),
            Observable::Mat(a) => herm_coords(&a.0),
        }
    }

    pub fn from_coords(shape: Shape, coords: &[f64]) -> Result<Self, SpaceError> {
        if coords.len() != shape.coord_len() {
            return Err(SpaceError::Shape(format!(
                "{shape:?} needs {} coordinates, got {}",
                shape.coord_len(),
                coords.len()
            )));
        }
        match shape {
            Shape::Points(_) => Ok(Observable::Comm(CommObservable::new(coords.to_vec())?)),
            Shape::Matrix(n) => Ok(Observable::Mat(MatObservable(herm_from_coords(n, coords)?))),
        }
    }

    /// `self + c·e`.
    pub fn shift(&self, c: f64) -> Self {
        match self {
            Observable::Comm(f) => Observable::Comm(CommObservable(f.0.iter().map(|x| x + c).collect())),
            Observable::Mat(a) => Observable::Mat(MatObservable(a.0.add_identity(c))),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        match self {
            Observable::Comm(f) => Observable::Comm(CommObservable(f.0.iter().map(|x| x * c).collect())),
            Observable::Mat(a) => Observable::Mat(MatObservable(a.0.scale(c))),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, SpaceError> {
        match (self, other) {
            (Observable::Comm(f), Observable::Comm(g)) if f.len() == g.len() => Ok(Observable::Comm(
                CommObservable(f.0.iter().zip(&g.0).map(|(a, b)| a + b).collect()),
            )),
            (Observable::Mat(a), Observable::Mat(b)) if a.n() == b.n() => {
                Ok(Observable::Mat(MatObservable(a.0.add(&b.0))))
            }
            _ => Err(shape_mismatch(self.shape(), other.shape())),
        }
    }

    /// Norm of the order-unit space: sup norm, or operator norm.
    pub fn norm(&self) -> Result<f64, SpaceError> {
        match self {
            Observable::Comm(f) => Ok(f.sup_norm()),
            Observable::Mat(a) => Ok(crate::linalg::op_norm(&a.0)?),
        }
    }

    pub fn as_comm(&self) -> Option<&CommObservable> {
        match self {
            Observable::Comm(f) => Some(f),
            Observable::Mat(_) => None,
        }
    }
}

fn shape_mismatch(a: Shape, b: Shape) -> SpaceError {
    SpaceError::Shape(format!("{a:?} vs {b:?}"))
}

pub(crate) fn herm_coords(h: &HermMatrix) -> Vec<f64> {
    let n = h.n();
    let mut out = Vec::with_capacity(n * n);
    out.extend((0..n).map(|i| h.re(i, i)));
    for i in 0..n {
        for j in (i + 1)..n {
            out.push(h.re(i, j));
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            out.push(h.im(i, j));
        }
    }
    out
}

pub(crate) fn herm_from_coords(n: usize, coords: &[f64]) -> Result<HermMatrix, SpaceError> {
    let mut re = vec![0.0; n * n];
    let mut im = vec![0.0; n * n];
    for i in 0..n {
        re[i * n + i] = coords[i];
    }
    let upper = n * (n - 1) / 2;
    let mut k = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            re[i * n + j] = coords[n + k];
            re[j * n + i] = coords[n + k];
            im[i * n + j] = coords[n + upper + k];
            im[j * n + i] = -coords[n + upper + k];
            k += 1;
        }
    }
    Ok(HermMatrix::from_row_major(n, &re, &im)?)
}

/// A probability vector on a finite point set.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbState(Vec<f64>);

impl ProbState {
    /// Validates a probability vector. Weights in `[-1e-15, 0)` are clamped
    /// to zero and the vector is renormalized when its mass is within
    /// `1e-12` of one.
    pub fn new(weights: Vec<f64>) -> Result<Self, SpaceError> {
        check_finite(&weights)?;
        let mut w = weights;
        for (index, x) in w.iter_mut().enumerate() {
            if *x < -NEGATIVE_CLAMP {
                return Err(SpaceError::NegativeWeight { index, weight: *x });
            }
            if *x < 0.0 {
                *x = 0.0;
            }
        }
        let total: f64 = w.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(SpaceError::NotNormalized(total));
        }
        w.iter_mut().for_each(|x| *x /= total);
        Ok(Self(w))
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A density matrix: positive semidefinite with unit (unnormalized) trace.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityState(HermMatrix);

impl DensityState {
    pub fn new(matrix: HermMatrix) -> Result<Self, SpaceError> {
        let tr = matrix.trace();
        if (tr - 1.0).abs() > MASS_TOL {
            return Err(SpaceError::NotNormalized(tr));
        }
        let lowest = matrix.spectrum()?.first().copied().unwrap_or(0.0);
        if lowest < -PSD_TOL {
            return Err(SpaceError::NotPositive(lowest));
        }
        Ok(Self(matrix.scale(1.0 / tr)))
    }

    /// The pure state `|v⟩⟨v|` for a stacked `(re, im)` vector, normalized.
    pub fn pure(stacked: &[f64]) -> Result<Self, SpaceError> {
        let n = stacked.len() / 2;
        if n == 0 || !stacked.len().is_multiple_of(2) {
            return Err(SpaceError::Shape("pure state needs a stacked (re, im) vector".into()));
        }
        let norm2: f64 = stacked.iter().map(|x| x * x).sum();
        if norm2 == 0.0 || !norm2.is_finite() {
            return Err(SpaceError::NonFinite);
        }
        let (x, y) = stacked.split_at(n);
        let mut re = vec![0.0; n * n];
        let mut im = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                // v_i conj(v_j)
                re[i * n + j] = (x[i] * x[j] + y[i] * y[j]) / norm2;
                im[i * n + j] = (y[i] * x[j] - x[i] * y[j]) / norm2;
            }
        }
        Self::new(HermMatrix::from_row_major(n, &re, &im)?)
    }

    pub fn matrix(&self) -> &HermMatrix {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.n()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum State {
    Prob(ProbState),
    Density(DensityState),
}

impl From<ProbState> for State {
    fn from(s: ProbState) -> Self {
        State::Prob(s)
    }
}

impl From<DensityState> for State {
    fn from(s: DensityState) -> Self {
        State::Density(s)
    }
}

impl State {
    pub fn shape(&self) -> Shape {
        match self {
            State::Prob(p) => Shape::Points(p.len()),
            State::Density(d) => Shape::Matrix(d.n()),
        }
    }

    /// `t·self + (1 − t)·other`, revalidated.
    pub fn mix(&self, other: &Self, t: f64) -> Result<Self, SpaceError> {
        match (self, other) {
            (State::Prob(a), State::Prob(b)) if a.len() == b.len() => Ok(State::Prob(ProbState::new(
                a.0.iter().zip(&b.0).map(|(x, y)| t * x + (1.0 - t) * y).collect(),
            )?)),
            (State::Density(a), State::Density(b)) if a.n() == b.n() => Ok(State::Density(
                DensityState::new(a.0.scale(t).add(&b.0.scale(1.0 - t)))?,
            )),
            _ => Err(shape_mismatch(self.shape(), other.shape())),
        }
    }

    /// `self + λ` if the result is a valid state.
    pub fn translate(&self, lambda: &ZeroSumFunctional) -> Result<Self, SpaceError> {
        match (self, lambda) {
            (State::Prob(a), ZeroSumFunctional::Comm(l)) if a.len() == l.len() => Ok(State::Prob(
                ProbState::new(a.0.iter().zip(l).map(|(x, y)| x + y).collect())?,
            )),
            (State::Density(a), ZeroSumFunctional::Mat(l)) if a.n() == l.n() => {
                Ok(State::Density(DensityState::new(a.0.add(l))?))
            }
            _ => Err(shape_mismatch(self.shape(), lambda.shape())),
        }
    }
}

/// A functional `λ` with `λ(e) = 0`: a zero-sum vector, or a traceless
/// Hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub enum ZeroSumFunctional {
    Comm(Vec<f64>),
    Mat(HermMatrix),
}

impl ZeroSumFunctional {
    pub fn comm(values: Vec<f64>) -> Result<Self, SpaceError> {
        check_finite(&values)?;
        let total: f64 = values.iter().sum();
        let mass: f64 = values.iter().map(|x| x.abs()).sum();
        if total.abs() > MASS_TOL * mass.max(1.0) {
            return Err(SpaceError::NotZeroSum(total));
        }
        Ok(ZeroSumFunctional::Comm(values))
    }

    pub fn mat(matrix: HermMatrix) -> Result<Self, SpaceError> {
        let tr = matrix.trace();
        if tr.abs() > MASS_TOL * (1.0 + matrix.max_abs() * matrix.n() as f64) {
            return Err(SpaceError::NotZeroSum(tr));
        }
        Ok(ZeroSumFunctional::Mat(matrix))
    }

    pub fn zero(shape: Shape) -> Self {
        match shape {
            Shape::Points(n) => ZeroSumFunctional::Comm(vec![0.0; n]),
            Shape::Matrix(n) => ZeroSumFunctional::Mat(HermMatrix::zeros(n)),
        }
    }

    pub fn shape(&self) -> Shape {
        match self {
            ZeroSumFunctional::Comm(v) => Shape::Points(v.len()),
            ZeroSumFunctional::Mat(m) => Shape::Matrix(m.n()),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        match self {
            ZeroSumFunctional::Comm(v) => ZeroSumFunctional::Comm(v.iter().map(|x| x * c).collect()),
            ZeroSumFunctional::Mat(m) => ZeroSumFunctional::Mat(m.scale(c)),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            ZeroSumFunctional::Comm(v) => v.iter().all(|x| *x == 0.0),
            ZeroSumFunctional::Mat(m) => m.max_abs() == 0.0,
        }
    }

    /// Coefficients `w` with `λ(a) = w · a.coords()`.
    pub fn pairing_coords(&self) -> Vec<f64> {
        match self {
            ZeroSumFunctional::Comm(v) => v.clone(),
            ZeroSumFunctional::Mat(m) => state_like_pairing_coords(m),
        }
    }

    /// Splits `λ = t·(μ − ν)` with states `μ`, `ν` and `t ≥ 0`.
    ///
    /// Returns `None` for the zero functional.
    pub fn decompose(&self) -> Result<Option<(f64, State, State)>, SpaceError> {
        match self {
            ZeroSumFunctional::Comm(v) => {
                let pos: Vec<f64> = v.iter().map(|x| x.max(0.0)).collect();
                let neg: Vec<f64> = v.iter().map(|x| (-x).max(0.0)).collect();
                let t: f64 = pos.iter().sum();
                if t == 0.0 {
                    return Ok(None);
                }
                let t_neg: f64 = neg.iter().sum();
                let mu = ProbState::new(pos.iter().map(|x| x / t).collect())?;
                let nu = ProbState::new(neg.iter().map(|x| x / t_neg).collect())?;
                Ok(Some((t, State::Prob(mu), State::Prob(nu))))
            }
            ZeroSumFunctional::Mat(m) => {
                let e = crate::linalg::eigh(&m.real_embedding())?;
                let n2 = e.n();
                let part = |positive: bool| {
                    let mut acc = vec![0.0; n2 * n2];
                    for k in 0..n2 {
                        let lam = e.values[k];
                        let keep = if positive { lam > 0.0 } else { lam < 0.0 };
                        if !keep {
                            continue;
                        }
                        let v = e.vector(k);
                        for i in 0..n2 {
                            for j in 0..n2 {
                                acc[i * n2 + j] += lam.abs() * v[i] * v[j];
                            }
                        }
                    }
                    acc
                };
                let pos = HermMatrix::from_real_embedding(&crate::linalg::SymMatrix::from_row_major(
                    n2,
                    &part(true),
                )?)?;
                let neg = HermMatrix::from_real_embedding(&crate::linalg::SymMatrix::from_row_major(
                    n2,
                    &part(false),
                )?)?;
                let t = pos.trace();
                if t <= 0.0 {
                    return Ok(None);
                }
                let t_neg = neg.trace();
                let mu = DensityState::new(pos.scale(1.0 / t))?;
                let nu = DensityState::new(neg.scale(1.0 / t_neg))?;
                Ok(Some((t, State::Density(mu), State::Density(nu))))
            }
        }
    }
}

fn state_like_pairing_coords(m: &HermMatrix) -> Vec<f64> {
    // trace(λ a) = Σ_i λ_ii a_ii + 2 Σ_{i<j} (Re λ_ij Re a_ij + Im λ_ij Im a_ij)
    let n = m.n();
    let mut w = herm_coords(m);
    for x in w.iter_mut().skip(n) {
        *x *= 2.0;
    }
    w
}

/// Anything that can be evaluated on an observable.
pub trait Functional {
    fn shape(&self) -> Shape;
    fn pairing_coords(&self) -> Vec<f64>;
}

impl Functional for ZeroSumFunctional {
    fn shape(&self) -> Shape {
        ZeroSumFunctional::shape(self)
    }

    fn pairing_coords(&self) -> Vec<f64> {
        ZeroSumFunctional::pairing_coords(self)
    }
}

impl Functional for State {
    fn shape(&self) -> Shape {
        State::shape(self)
    }

    fn pairing_coords(&self) -> Vec<f64> {
        match self {
            State::Prob(p) => p.0.clone(),
            State::Density(d) => state_like_pairing_coords(&d.0),
        }
    }
}

/// `Σ λ_x f(x)` on points, `trace(λ a)` on matrices.
pub fn pair<F: Functional + ?Sized>(lambda: &F, a: &Observable) -> Result<f64, SpaceError> {
    if lambda.shape() != a.shape() {
        return Err(shape_mismatch(lambda.shape(), a.shape()));
    }
    Ok(lambda
        .pairing_coords()
        .iter()
        .zip(a.coords())
        .map(|(w, x)| w * x)
        .sum())
}

/// `(max a − min a)/2` over values, or over the spectrum.
pub fn quotient_norm(a: &Observable) -> Result<f64, SpaceError> {
    match a {
        Observable::Comm(f) => Ok((f.max() - f.min()) / 2.0),
        Observable::Mat(m) => {
            let s = m.0.spectrum()?;
            Ok((s[s.len() - 1] - s[0]) / 2.0)
        }
    }
}

/// The point mass at `index`.
pub fn point_state(n: usize, index: usize) -> Result<ProbState, SpaceError> {
    if index >= n {
        return Err(SpaceError::IndexOutOfRange { index, n });
    }
    let mut w = vec![0.0; n];
    w[index] = 1.0;
    ProbState::new(w)
}

/// `μ − ν`.
pub fn difference(mu: &State, nu: &State) -> Result<ZeroSumFunctional, SpaceError> {
    match (mu, nu) {
        (State::Prob(a), State::Prob(b)) if a.len() == b.len() => Ok(ZeroSumFunctional::Comm(
            a.0.iter().zip(&b.0).map(|(x, y)| x - y).collect(),
        )),
        (State::Density(a), State::Density(b)) if a.n() == b.n() => {
            Ok(ZeroSumFunctional::Mat(a.0.sub(&b.0)))
        }
        _ => Err(shape_mismatch(mu.shape(), nu.shape())),
    }
}
