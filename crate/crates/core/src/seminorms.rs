//! Lipschitz seminorm families and their unit balls.
//!
//! Every seminorm `L` here vanishes exactly on multiples of the order unit.
//! The metric engine consumes a seminorm through two surfaces: an explicit
//! list of linear inequalities describing `{a : L(a) ≤ 1}` when the ball is
//! a polyhedron, and a separation oracle that returns a violated valid
//! inequality for any `a` outside the ball.

use thiserror::Error;

use crate::linalg::{self, eigh, CMatrix, HermMatrix, LinalgError, SymMatrix, RANK_TOL};
use crate::metric_engine::MetricTable;
use crate::spaces::{
    quotient_norm, CommObservable, FiniteSpace, Observable, Shape, SpaceError, State,
};

/// Slack allowed before the separation oracle reports a violation.
pub const SEPARATION_SLACK: f64 = 1e-9;
/// Largest point count for which the resistance ball is enumerated.
pub const MAX_ENUMERATED_POINTS: usize = 20;
/// Commutator eigenvectors whose eigenvalue reaches this fraction of the
/// spectral radius each contribute a cut in [`supporting_cuts`].
pub const SPECTRAL_CUT_FRACTION: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeminormError {
    #[error("observable of shape {observable:?} does not match seminorm on {spec:?}")]
    FlavorMismatch { spec: Shape, observable: Shape },
    #[error("invalid operator: {0}")]
    InvalidOperator(String),
    #[error("commutator map is rank deficient: [D, a] = 0 for a non-scalar a")]
    NullSpace,
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("unit ball enumeration needs at most {max} points, got {n}; use the separation oracle")]
    TooLarge { n: usize, max: usize },
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// An undirected edge with a positive weight.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

fn build_edges(
    n: usize,
    edges: impl IntoIterator<Item = (usize, usize, f64)>,
    what: &str,
) -> Result<Vec<Edge>, SeminormError> {
    let mut out: Vec<Edge> = Vec::new();
    for (a, b, weight) in edges {
        if a >= n || b >= n {
            return Err(SeminormError::InvalidGraph(format!(
                "edge ({a}, {b}) references a point outside 0..{n}"
            )));
        }
        if a == b {
            return Err(SeminormError::InvalidGraph(format!("self-loop at point {a}")));
        }
        if !(weight.is_finite() && weight > 0.0) {
            return Err(SeminormError::InvalidGraph(format!(
                "{what} on edge ({a}, {b}) must be positive and finite, got {weight}"
            )));
        }
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        if out.iter().any(|e| e.a == a && e.b == b) {
            return Err(SeminormError::InvalidGraph(format!("duplicate edge ({a}, {b})")));
        }
        out.push(Edge { a, b, weight });
    }
    if !is_connected(n, &out) {
        return Err(SeminormError::Disconnected);
    }
    Ok(out)
}

pub(crate) fn is_connected(n: usize, edges: &[Edge]) -> bool {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut c = x;
        while p[c] != r {
            let next = p[c];
            p[c] = r;
            c = next;
        }
        r
    }
    let mut components = n;
    for e in edges {
        let (ra, rb) = (find(&mut parent, e.a), find(&mut parent, e.b));
        if ra != rb {
            parent[ra] = rb;
            components -= 1;
        }
    }
    components <= 1
}

/// A connected graph with a positive cost on each edge. Non-edges carry
/// infinite cost.
#[derive(Clone, Debug, PartialEq)]
pub struct CostGraph {
    space: FiniteSpace,
    edges: Vec<Edge>,
}

impl CostGraph {
    pub fn new(
        space: FiniteSpace,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self, SeminormError> {
        let edges = build_edges(space.len(), edges, "cost")?;
        Ok(Self { space, edges })
    }

    pub fn space(&self) -> &FiniteSpace {
        &self.space
    }

    pub fn n(&self) -> usize {
        self.space.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn cost(&self, x: usize, y: usize) -> Option<f64> {
        let (a, b) = if x < y { (x, y) } else { (y, x) };
        self.edges.iter().find(|e| e.a == a && e.b == b).map(|e| e.weight)
    }

    /// The same graph with every cost multiplied by `t > 0`.
    pub fn scaled(&self, t: f64) -> Result<Self, SeminormError> {
        Self::new(
            self.space.clone(),
            self.edges.iter().map(|e| (e.a, e.b, e.weight * t)),
        )
    }
}

/// A connected resistor network; `weight` on each edge is its resistance.
#[derive(Clone, Debug, PartialEq)]
pub struct ConductanceGraph {
    space: FiniteSpace,
    edges: Vec<Edge>,
}

impl ConductanceGraph {
    pub fn new(
        space: FiniteSpace,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self, SeminormError> {
        let edges = build_edges(space.len(), edges, "resistance")?;
        Ok(Self { space, edges })
    }

    pub fn space(&self) -> &FiniteSpace {
        &self.space
    }

    pub fn n(&self) -> usize {
        self.space.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// `1/r_xy` on edges, 0 elsewhere.
    pub fn conductance(&self, x: usize, y: usize) -> f64 {
        let (a, b) = if x < y { (x, y) } else { (y, x) };
        self.edges
            .iter()
            .find(|e| e.a == a && e.b == b)
            .map_or(0.0, |e| 1.0 / e.weight)
    }

    /// The same network with edge `index` given resistance `r`.
    pub fn with_resistance(&self, index: usize, r: f64) -> Result<Self, SeminormError> {
        Self::new(
            self.space.clone(),
            self.edges
                .iter()
                .enumerate()
                .map(|(i, e)| (e.a, e.b, if i == index { r } else { e.weight })),
        )
    }

    /// Conductance-weighted Laplacian `D − C`.
    pub fn laplacian(&self) -> SymMatrix {
        let n = self.n();
        let mut data = vec![0.0; n * n];
        for e in &self.edges {
            let c = 1.0 / e.weight;
            data[e.a * n + e.b] -= c;
            data[e.b * n + e.a] -= c;
            data[e.a * n + e.a] += c;
            data[e.b * n + e.b] += c;
        }
        SymMatrix::from_row_major(n, &data).expect("finite conductances")
    }
}

/// How the algebra acts on the Hilbert space of a [`DiracOperator`].
#[derive(Clone, Debug, PartialEq)]
pub enum Representation {
    /// Functions on `n_points` points act diagonally; Hilbert index `k`
    /// carries the value at `points[k]`.
    Diagonal { points: Vec<usize>, n_points: usize },
    /// `n × n` matrices acting on `ℂⁿ`. The commutant of `D` then contains
    /// every polynomial in `D`, so construction fails for `n ≥ 2`; kept for
    /// completeness.
    Identity,
    /// `n × n` matrices acting on `ℂⁿ ⊗ ℂᵏ` by `a ⊗ I_k`, `k = m / n`.
    Amplified { n: usize },
}

/// A skew-adjoint operator `D = re + i·im` (`re` antisymmetric, `im`
/// symmetric) together with a representation of the observables.
#[derive(Clone, Debug, PartialEq)]
pub struct DiracOperator {
    m: usize,
    d: CMatrix,
    rep: Representation,
    shape: Shape,
    from_self_adjoint: bool,
}

impl DiracOperator {
    /// Skew-adjoint operator from its real and imaginary parts.
    pub fn new(
        re: &[Vec<f64>],
        im: &[Vec<f64>],
        rep: Representation,
    ) -> Result<Self, SeminormError> {
        let m = re.len();
        let flat = |rows: &[Vec<f64>]| -> Result<Vec<f64>, SeminormError> {
            if rows.len() != m || rows.iter().any(|r| r.len() != m) {
                return Err(SeminormError::InvalidOperator(format!(
                    "operator parts must be {m}x{m}"
                )));
            }
            Ok(rows.iter().flatten().copied().collect())
        };
        let re = flat(re)?;
        let im = flat(im)?;
        if re.iter().chain(&im).any(|x| !x.is_finite()) {
            return Err(SeminormError::InvalidOperator("entries must be finite".into()));
        }
        let scale = re.iter().chain(&im).fold(0.0_f64, |a, x| a.max(x.abs()));
        let tol = 1e-12 * scale.max(1.0);
        for i in 0..m {
            for j in 0..m {
                if (re[i * m + j] + re[j * m + i]).abs() > tol
                    || (im[i * m + j] - im[j * m + i]).abs() > tol
                {
                    return Err(SeminormError::InvalidOperator(format!(
                        "operator is not skew-adjoint at ({i}, {j})"
                    )));
                }
            }
        }
        // Project onto the skew-adjoint matrices so the symmetry is exact.
        let mut d = CMatrix {
            n: m,
            re: vec![0.0; m * m],
            im: vec![0.0; m * m],
        };
        for i in 0..m {
            for j in 0..m {
                d.re[i * m + j] = (re[i * m + j] - re[j * m + i]) / 2.0;
                d.im[i * m + j] = (im[i * m + j] + im[j * m + i]) / 2.0;
            }
        }
        Self::assemble(d, rep, false)
    }

    /// Real skew-symmetric operator.
    pub fn real(matrix: &[Vec<f64>], rep: Representation) -> Result<Self, SeminormError> {
        let zeros = vec![vec![0.0; matrix.len()]; matrix.len()];
        Self::new(matrix, &zeros, rep)
    }

    /// Real skew-symmetric operator with functions on `m` points acting on
    /// `ℂᵐ` as diagonal matrices.
    pub fn on_points(matrix: &[Vec<f64>]) -> Result<Self, SeminormError> {
        let m = matrix.len();
        Self::real(
            matrix,
            Representation::Diagonal {
                points: (0..m).collect(),
                n_points: m,
            },
        )
    }

    /// Stores `i·H` for a self-adjoint `H`; the commutator norms agree.
    pub fn from_self_adjoint(h: &HermMatrix, rep: Representation) -> Result<Self, SeminormError> {
        let m = h.n();
        let d = CMatrix {
            n: m,
            re: h.im_slice().iter().map(|x| -x).collect(),
            im: h.re_slice().to_vec(),
        };
        Self::assemble(d, rep, true)
    }

    fn assemble(d: CMatrix, rep: Representation, from_self_adjoint: bool) -> Result<Self, SeminormError> {
        let m = d.n;
        let shape = match &rep {
            Representation::Diagonal { points, n_points } => {
                if points.len() != m {
                    return Err(SeminormError::InvalidOperator(format!(
                        "representation assigns {} Hilbert indices, operator has {m}",
                        points.len()
                    )));
                }
                if let Some(p) = points.iter().find(|p| **p >= *n_points) {
                    return Err(SeminormError::InvalidOperator(format!(
                        "representation maps to point {p} outside 0..{n_points}"
                    )));
                }
                if let Some(missing) = (0..*n_points).find(|x| !points.contains(x)) {
                    return Err(SeminormError::InvalidOperator(format!(
                        "representation is not faithful: point {missing} is never used"
                    )));
                }
                if *n_points < 2 {
                    return Err(SpaceError::TooFewPoints(*n_points).into());
                }
                Shape::Points(*n_points)
            }
            Representation::Identity => {
                if m < 2 {
                    return Err(SpaceError::TooFewPoints(m).into());
                }
                Shape::Matrix(m)
            }
            Representation::Amplified { n } => {
                if *n < 2 {
                    return Err(SpaceError::TooFewPoints(*n).into());
                }
                if !m.is_multiple_of(*n) {
                    return Err(SeminormError::InvalidOperator(format!(
                        "Hilbert dimension {m} is not a multiple of {n}"
                    )));
                }
                Shape::Matrix(*n)
            }
        };
        let op = Self {
            m,
            d,
            rep,
            shape,
            from_self_adjoint,
        };
        op.check_null_space()?;
        Ok(op)
    }

    /// `[D, π(a)] = 0` must force `a` to be scalar: the Gram matrix of the
    /// commutator map on the gauge slice has to be nonsingular.
    fn check_null_space(&self) -> Result<(), SeminormError> {
        let images: Vec<HermMatrix> = self
            .shape
            .gauge_basis()
            .iter()
            .map(|b| self.commutator(&Observable::from_coords(self.shape, b)?))
            .collect::<Result<_, _>>()?;
        let k = images.len();
        let gram = SymMatrix::from_fn(k, |i, j| images[i].trace_product(&images[j]));
        let e = eigh(&gram)?;
        let top = e.values.last().copied().unwrap_or(0.0);
        if top <= 0.0 || e.values[0] <= RANK_TOL * top {
            return Err(SeminormError::NullSpace);
        }
        Ok(())
    }

    pub fn hilbert_dim(&self) -> usize {
        self.m
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn representation(&self) -> &Representation {
        &self.rep
    }

    /// Whether the operator was supplied as self-adjoint and stored as `i·D`.
    pub fn is_from_self_adjoint(&self) -> bool {
        self.from_self_adjoint
    }

    pub fn re_rows(&self) -> Vec<Vec<f64>> {
        self.d.re.chunks(self.m).map(<[f64]>::to_vec).collect()
    }

    pub fn im_rows(&self) -> Vec<Vec<f64>> {
        self.d.im.chunks(self.m).map(<[f64]>::to_vec).collect()
    }

    /// The self-adjoint commutator `[D, π(a)]`.
    pub fn commutator(&self, a: &Observable) -> Result<HermMatrix, SeminormError> {
        if a.shape() != self.shape {
            return Err(SeminormError::FlavorMismatch {
                spec: self.shape,
                observable: a.shape(),
            });
        }
        let m = self.m;
        match (&self.rep, a) {
            (Representation::Diagonal { points, .. }, Observable::Comm(f)) => {
                let v: Vec<f64> = points.iter().map(|&p| f.values()[p]).collect();
                let mut re = vec![0.0; m * m];
                let mut im = vec![0.0; m * m];
                for h in 0..m {
                    for l in 0..m {
                        let diff = v[l] - v[h];
                        re[h * m + l] = self.d.re[h * m + l] * diff;
                        im[h * m + l] = self.d.im[h * m + l] * diff;
                    }
                }
                Ok(HermMatrix::from_row_major(m, &re, &im)?)
            }
            (Representation::Identity, Observable::Mat(a)) => {
                Ok(self.d.commutator(&CMatrix::from_herm(a.matrix())).hermitian_part())
            }
            (Representation::Amplified { n }, Observable::Mat(a)) => {
                let k = m / n;
                let h = a.matrix();
                let mut pa = CMatrix {
                    n: m,
                    re: vec![0.0; m * m],
                    im: vec![0.0; m * m],
                };
                for i in 0..*n {
                    for j in 0..*n {
                        for r in 0..k {
                            let at = (i * k + r) * m + j * k + r;
                            pa.re[at] = h.re(i, j);
                            pa.im[at] = h.im(i, j);
                        }
                    }
                }
                Ok(self.d.commutator(&pa).hermitian_part())
            }
            _ => unreachable!("shape check guarantees a matching flavor"),
        }
    }
}

/// Which Lipschitz seminorm is in force.
#[derive(Clone, Debug, PartialEq)]
pub enum SeminormSpec {
    /// `L(a) = ‖[D, π(a)]‖`.
    Dirac(DiracOperator),
    /// `L(f) = max over edges |f(x) − f(y)| / cost(x, y)`.
    GraphLip(CostGraph),
    /// `L(f) = ½ ‖Δf‖₁` for the network Laplacian `Δ`.
    Resistance(ConductanceGraph),
    /// `L(a) = (max a − min a)/2`, over values or over the spectrum.
    Quotient(Shape),
    /// `L(f) = max over pairs |f(x) − f(y)| / d(x, y)`.
    MetricLip(MetricTable),
}

impl SeminormSpec {
    pub fn shape(&self) -> Shape {
        match self {
            SeminormSpec::Dirac(d) => d.shape(),
            SeminormSpec::GraphLip(g) => Shape::Points(g.n()),
            SeminormSpec::Resistance(g) => Shape::Points(g.n()),
            SeminormSpec::Quotient(s) => *s,
            SeminormSpec::MetricLip(t) => Shape::Points(t.len()),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            SeminormSpec::Dirac(_) => "dirac",
            SeminormSpec::GraphLip(_) => "graph_lip",
            SeminormSpec::Resistance(_) => "resistance",
            SeminormSpec::Quotient(_) => "quotient",
            SeminormSpec::MetricLip(_) => "metric_lip",
        }
    }

    /// Whether the unit ball is a polyhedron given by finitely many cuts.
    pub fn is_polyhedral(&self) -> bool {
        match self {
            SeminormSpec::Dirac(_) => false,
            SeminormSpec::Quotient(s) => matches!(s, Shape::Points(_)),
            _ => true,
        }
    }

    pub fn eval(&self, a: &Observable) -> Result<f64, SeminormError> {
        eval(self, a)
    }

    fn check(&self, a: &Observable) -> Result<(), SeminormError> {
        if a.shape() != self.shape() {
            return Err(SeminormError::FlavorMismatch {
                spec: self.shape(),
                observable: a.shape(),
            });
        }
        Ok(())
    }

    fn check_state(&self, s: &State) -> Result<(), SeminormError> {
        if s.shape() != self.shape() {
            return Err(SeminormError::FlavorMismatch {
                spec: self.shape(),
                observable: s.shape(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_states(&self, mu: &State, nu: &State) -> Result<(), SeminormError> {
        self.check_state(mu)?;
        self.check_state(nu)
    }
}

/// `Δf` for the network Laplacian.
pub(crate) fn laplacian_apply(g: &ConductanceGraph, f: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; g.n()];
    for e in g.edges() {
        let flow = (f[e.a] - f[e.b]) / e.weight;
        out[e.a] += flow;
        out[e.b] -= flow;
    }
    out
}

/// Evaluates the seminorm on an observable.
pub fn eval(spec: &SeminormSpec, a: &Observable) -> Result<f64, SeminormError> {
    spec.check(a)?;
    let value = match (spec, a) {
        (SeminormSpec::Dirac(d), _) => linalg::op_norm(&d.commutator(a)?)?,
        (SeminormSpec::GraphLip(g), Observable::Comm(f)) => {
            let v = f.values();
            g.edges()
                .iter()
                .map(|e| (v[e.a] - v[e.b]).abs() / e.weight)
                .fold(0.0, f64::max)
        }
        (SeminormSpec::Resistance(g), Observable::Comm(f)) => {
            0.5 * laplacian_apply(g, f.values()).iter().map(|x| x.abs()).sum::<f64>()
        }
        (SeminormSpec::Quotient(_), _) => quotient_norm(a)?,
        (SeminormSpec::MetricLip(t), Observable::Comm(f)) => {
            let v = f.values();
            let n = v.len();
            let mut best = 0.0_f64;
            for x in 0..n {
                for y in (x + 1)..n {
                    best = best.max((v[x] - v[y]).abs() / t.get(x, y));
                }
            }
            best
        }
        _ => unreachable!("shape check guarantees a matching flavor"),
    };
    Ok(value)
}

/// A valid inequality `coefficients · a.coords() ≤ bound` for the unit ball.
#[derive(Clone, Debug, PartialEq)]
pub struct Cut {
    pub coefficients: Vec<f64>,
    pub bound: f64,
}

impl Cut {
    pub fn lhs(&self, a: &Observable) -> f64 {
        self.coefficients.iter().zip(a.coords()).map(|(c, x)| c * x).sum()
    }

    pub fn is_satisfied_by(&self, a: &Observable, tol: f64) -> bool {
        self.lhs(a) <= self.bound + tol
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum UnitBall {
    Polyhedral(Vec<Cut>),
    /// The ball is not a polyhedron; use [`separation_oracle`].
    Unavailable,
}

fn pair_cut(len: usize, x: usize, y: usize, scale: f64, bound: f64) -> Cut {
    let mut c = vec![0.0; len];
    c[x] = scale;
    c[y] = -scale;
    Cut {
        coefficients: c,
        bound,
    }
}

/// Explicit description of `{a : L(a) ≤ 1}` when it is a polyhedron.
pub fn unit_ball_constraints(spec: &SeminormSpec) -> Result<UnitBall, SeminormError> {
    let shape = spec.shape();
    let len = shape.coord_len();
    let cuts = match spec {
        SeminormSpec::Dirac(_) | SeminormSpec::Quotient(Shape::Matrix(_)) => {
            return Ok(UnitBall::Unavailable)
        }
        SeminormSpec::GraphLip(g) => g
            .edges()
            .iter()
            .flat_map(|e| {
                [
                    pair_cut(len, e.a, e.b, 1.0, e.weight),
                    pair_cut(len, e.b, e.a, 1.0, e.weight),
                ]
            })
            .collect(),
        SeminormSpec::MetricLip(t) => {
            let mut cuts = Vec::new();
            for x in 0..len {
                for y in 0..len {
                    if x != y {
                        cuts.push(pair_cut(len, x, y, 1.0, t.get(x, y)));
                    }
                }
            }
            cuts
        }
        SeminormSpec::Quotient(Shape::Points(n)) => {
            let mut cuts = Vec::new();
            for x in 0..*n {
                for y in 0..*n {
                    if x != y {
                        cuts.push(pair_cut(len, x, y, 0.5, 1.0));
                    }
                }
            }
            cuts
        }
        SeminormSpec::Resistance(g) => {
            let n = g.n();
            if n > MAX_ENUMERATED_POINTS {
                return Err(SeminormError::TooLarge {
                    n,
                    max: MAX_ENUMERATED_POINTS,
                });
            }
            // Sign patterns s with s ≠ ±1; the constant patterns give 0 ≤ 1.
            (1..(1u64 << n) - 1)
                .map(|mask| {
                    let s: Vec<f64> = (0..n)
                        .map(|i| if mask >> i & 1 == 1 { 1.0 } else { -1.0 })
                        .collect();
                    sign_pattern_cut(g, &s)
                })
                .collect()
        }
    };
    Ok(UnitBall::Polyhedral(cuts))
}

/// `½ sᵀ Δ f ≤ 1`, valid because `½ sᵀΔf ≤ ½‖Δf‖₁` for `s ∈ {±1}ⁿ`.
fn sign_pattern_cut(g: &ConductanceGraph, s: &[f64]) -> Cut {
    Cut {
        coefficients: laplacian_apply(g, s).iter().map(|x| 0.5 * x).collect(),
        bound: 1.0,
    }
}

/// Returns `None` when `L(a) ≤ 1 + 1e-9`, otherwise an inequality valid on
/// the unit ball and violated at `a`.
pub fn separation_oracle(spec: &SeminormSpec, a: &Observable) -> Result<Option<Cut>, SeminormError> {
    if eval(spec, a)? <= 1.0 + SEPARATION_SLACK {
        return Ok(None);
    }
    supporting_cut(spec, a)
}

/// A valid inequality for the unit ball whose left side at `a` equals
/// `L(a)` times its bound. `None` when `L(a) = 0`.
pub(crate) fn supporting_cut(spec: &SeminormSpec, a: &Observable) -> Result<Option<Cut>, SeminormError> {
    if eval(spec, a)? == 0.0 {
        return Ok(None);
    }
    let len = spec.shape().coord_len();
    let cut = match (spec, a) {
        (SeminormSpec::Dirac(d), _) => {
            let h = d.commutator(a)?;
            let (top, top_vec) = linalg::extreme_eigenpair(&h, true)?;
            let (bottom, bottom_vec) = linalg::extreme_eigenpair(&h, false)?;
            let (sign, w) = if top.abs() >= bottom.abs() {
                (1.0, top_vec)
            } else {
                (-1.0, bottom_vec)
            };
            // |u*[D, π(b)]u| ≤ ‖[D, π(b)]‖ ≤ 1 on the ball, and the form is
            // linear in b.
            let coefficients = (0..len)
                .map(|k| {
                    let mut e = vec![0.0; len];
                    e[k] = 1.0;
                    let basis = Observable::from_coords(d.shape(), &e)?;
                    Ok(sign * d.commutator(&basis)?.quadratic_form(&w))
                })
                .collect::<Result<Vec<f64>, SeminormError>>()?;
            Cut {
                coefficients,
                bound: 1.0,
            }
        }
        (SeminormSpec::Quotient(Shape::Matrix(_)), Observable::Mat(m)) => {
            let (_, u) = linalg::extreme_eigenpair(m.matrix(), true)?;
            let (_, v) = linalg::extreme_eigenpair(m.matrix(), false)?;
            let pu = State::Density(crate::spaces::DensityState::pure(&u)?);
            let pv = State::Density(crate::spaces::DensityState::pure(&v)?);
            use crate::spaces::Functional;
            let cu = pu.pairing_coords();
            let cv = pv.pairing_coords();
            Cut {
                coefficients: cu.iter().zip(&cv).map(|(a, b)| 0.5 * (a - b)).collect(),
                bound: 1.0,
            }
        }
        (SeminormSpec::Resistance(g), Observable::Comm(f)) => {
            let lf = laplacian_apply(g, f.values());
            let s: Vec<f64> = lf.iter().map(|x| if *x < 0.0 { -1.0 } else { 1.0 }).collect();
            sign_pattern_cut(g, &s)
        }
        (_, Observable::Comm(f)) => {
            // Polyhedral pair families: return the most violated pair.
            let v = f.values();
            let (x, y, scale, bound) = most_violated_pair(spec, v);
            pair_cut(len, x, y, scale, bound)
        }
        _ => unreachable!("eval succeeded, so the flavor matches"),
    };
    Ok(Some(cut))
}

/// For Dirac specs, one cut per commutator eigenvector whose eigenvalue is
/// within [`SPECTRAL_CUT_FRACTION`] of the spectral radius; other specs
/// return [`supporting_cut`] alone.
pub(crate) fn supporting_cuts(spec: &SeminormSpec, a: &Observable) -> Result<Vec<Cut>, SeminormError> {
    match (spec, a) {
        (SeminormSpec::Dirac(d), _) => {
            let pairs = linalg::herm_eigenpairs(&d.commutator(a)?)?;
            let top = pairs.iter().map(|p| p.0.abs()).fold(0.0, f64::max);
            if top == 0.0 {
                return Ok(Vec::new());
            }
            let images: Vec<HermMatrix> = (0..d.shape().coord_len())
                .map(|k| {
                    let mut e = vec![0.0; d.shape().coord_len()];
                    e[k] = 1.0;
                    d.commutator(&Observable::from_coords(d.shape(), &e)?)
                })
                .collect::<Result<_, _>>()?;
            Ok(pairs
                .iter()
                .filter(|(l, _)| l.abs() >= SPECTRAL_CUT_FRACTION * top)
                .map(|(l, w)| Cut {
                    coefficients: images.iter().map(|c| l.signum() * c.quadratic_form(w)).collect(),
                    bound: 1.0,
                })
                .collect())
        }
        _ => Ok(supporting_cut(spec, a)?.into_iter().collect()),
    }
}

fn most_violated_pair(spec: &SeminormSpec, v: &[f64]) -> (usize, usize, f64, f64) {
    let n = v.len();
    let mut best = (0, 0, 1.0, 1.0, f64::NEG_INFINITY);
    let mut consider = |x: usize, y: usize, scale: f64, bound: f64| {
        let ratio = scale * (v[x] - v[y]) / bound;
        if ratio > best.4 {
            best = (x, y, scale, bound, ratio);
        }
    };
    match spec {
        SeminormSpec::GraphLip(g) => {
            for e in g.edges() {
                consider(e.a, e.b, 1.0, e.weight);
                consider(e.b, e.a, 1.0, e.weight);
            }
        }
        SeminormSpec::MetricLip(t) => {
            for x in 0..n {
                for y in 0..n {
                    if x != y {
                        consider(x, y, 1.0, t.get(x, y));
                    }
                }
            }
        }
        SeminormSpec::Quotient(_) => {
            for x in 0..n {
                for y in 0..n {
                    if x != y {
                        consider(x, y, 0.5, 1.0);
                    }
                }
            }
        }
        _ => unreachable!("only pair families reach here"),
    }
    (best.0, best.1, best.2, best.3)
}

/// Realizes the graph Lipschitz seminorm of a cost graph as a commutator
/// seminorm on the directed-edge Hilbert space.
///
/// `D = PF` where `F` flips each directed edge `(x, y) ↦ (y, x)` and `P`
/// divides by the edge cost; functions act by their value at the tail.
pub fn dirac_from_cost(g: &CostGraph) -> Result<DiracOperator, SeminormError> {
    if !is_connected(g.n(), g.edges()) {
        return Err(SeminormError::Disconnected);
    }
    let m = 2 * g.edges().len();
    let mut tails = Vec::with_capacity(m);
    let mut data = vec![0.0; m * m];
    for (k, e) in g.edges().iter().enumerate() {
        let (fwd, back) = (2 * k, 2 * k + 1);
        tails.push(e.a);
        tails.push(e.b);
        data[fwd * m + back] = 1.0 / e.weight;
        data[back * m + fwd] = 1.0 / e.weight;
    }
    let d = HermMatrix::from_real(&SymMatrix::from_row_major(m, &data)?);
    DiracOperator::from_self_adjoint(
        &d,
        Representation::Diagonal {
            points: tails,
            n_points: g.n(),
        },
    )
}

/// Pointwise maximum.
pub fn lattice_join(f: &CommObservable, g: &CommObservable) -> Result<CommObservable, SeminormError> {
    if f.len() != g.len() {
        return Err(SpaceError::Shape(format!("{} points vs {} points", f.len(), g.len())).into());
    }
    Ok(CommObservable::new(
        f.values().iter().zip(g.values()).map(|(a, b)| a.max(*b)).collect(),
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{random_observable, rng_for};
    use proptest::prelude::*;

    pub(crate) fn example71(alpha: f64, beta: f64) -> SeminormSpec {
        SeminormSpec::Dirac(
            DiracOperator::on_points(&[
                vec![0.0, 0.0, alpha],
                vec![0.0, 0.0, beta],
                vec![-alpha, -beta, 0.0],
            ])
            .unwrap(),
        )
    }

    fn pts(v: &[f64]) -> Observable {
        Observable::points(v).unwrap()
    }

    fn single_edge(cost: f64) -> CostGraph {
        CostGraph::new(FiniteSpace::numbered(2).unwrap(), [(0, 1, cost)]).unwrap()
    }

    fn triangle_costs() -> CostGraph {
        CostGraph::new(
            FiniteSpace::numbered(3).unwrap(),
            [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)],
        )
        .unwrap()
    }

    fn closed_form(alpha: f64, beta: f64, f: &[f64]) -> f64 {
        (alpha.powi(2) * (f[2] - f[0]).powi(2) + beta.powi(2) * (f[2] - f[1]).powi(2)).sqrt()
    }

    #[test]
    fn example71_values() {
        let spec = example71(1.0, 2.0);
        assert!((eval(&spec, &pts(&[1.0, 0.0, 0.0])).unwrap() - 1.0).abs() < 1e-12);
        assert!((eval(&spec, &pts(&[0.0, 1.0, 0.0])).unwrap() - 2.0).abs() < 1e-12);
        assert!((eval(&spec, &pts(&[1.0, 1.0, 0.0])).unwrap() - 5f64.sqrt()).abs() < 1e-12);
        let SeminormSpec::Dirac(d) = &spec else { unreachable!() };
        let c = d.commutator(&pts(&[1.0, 0.0, 0.0])).unwrap();
        assert!((linalg::op_norm(&c).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn other_family_values() {
        let r = ConductanceGraph::new(FiniteSpace::numbered(2).unwrap(), [(0, 1, 0.5)]).unwrap();
        let spec = SeminormSpec::Resistance(r);
        assert!((eval(&spec, &pts(&[1.0, 0.0])).unwrap() - 2.0).abs() < 1e-15);
        let spec = SeminormSpec::GraphLip(single_edge(2.0));
        assert_eq!(eval(&spec, &pts(&[1.0, 0.0])).unwrap(), 0.5);
        let spec = SeminormSpec::Quotient(Shape::Matrix(2));
        let a = Observable::matrix(HermMatrix::diag(&[1.0, -1.0]).unwrap());
        assert!((eval(&spec, &a).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn flavor_mismatch_is_rejected() {
        let spec = SeminormSpec::GraphLip(single_edge(2.0));
        assert!(matches!(
            eval(&spec, &pts(&[1.0, 0.0, 0.0])),
            Err(SeminormError::FlavorMismatch { .. })
        ));
        let a = Observable::matrix(HermMatrix::diag(&[1.0, -1.0]).unwrap());
        assert!(eval(&spec, &a).is_err());
    }

    #[test]
    fn dirac_construction_checks() {
        // D couples only points 0 and 1; point 2 is free, so [D, f] = 0 for f = e_2.
        let bad = DiracOperator::on_points(&[
            vec![0.0, 1.0, 0.0],
            vec![-1.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0],
        ]);
        assert_eq!(bad.unwrap_err(), SeminormError::NullSpace);
        let not_skew = DiracOperator::on_points(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert!(matches!(not_skew, Err(SeminormError::InvalidOperator(_))));
        let unfaithful = DiracOperator::real(
            &[vec![0.0, 1.0], vec![-1.0, 0.0]],
            Representation::Diagonal {
                points: vec![0, 0],
                n_points: 2,
            },
        );
        assert!(matches!(unfaithful, Err(SeminormError::InvalidOperator(_))));
    }

    #[test]
    fn graph_validation() {
        let s = FiniteSpace::numbered(3).unwrap();
        assert_eq!(
            CostGraph::new(s.clone(), [(0, 1, 1.0)]).unwrap_err(),
            SeminormError::Disconnected
        );
        assert!(matches!(
            CostGraph::new(s.clone(), [(0, 1, 1.0), (1, 2, -1.0)]),
            Err(SeminormError::InvalidGraph(_))
        ));
        assert!(matches!(
            CostGraph::new(s.clone(), [(0, 1, 1.0), (1, 0, 1.0), (1, 2, 1.0)]),
            Err(SeminormError::InvalidGraph(_))
        ));
        assert!(matches!(
            ConductanceGraph::new(s, [(0, 0, 1.0)]),
            Err(SeminormError::InvalidGraph(_))
        ));
    }

    #[test]
    fn polyhedral_descriptions() {
        let UnitBall::Polyhedral(cuts) = unit_ball_constraints(&SeminormSpec::GraphLip(single_edge(2.0))).unwrap()
        else {
            panic!("graph balls are polyhedral")
        };
        assert_eq!(cuts.len(), 2);
        assert_eq!(cuts[0].coefficients, vec![1.0, -1.0]);
        assert_eq!(cuts[0].bound, 2.0);
        assert_eq!(cuts[1].coefficients, vec![-1.0, 1.0]);

        let t = MetricTable::new(vec!["a".into(), "b".into()], vec![vec![0.0, 3.0], vec![3.0, 0.0]]).unwrap();
        let UnitBall::Polyhedral(cuts) = unit_ball_constraints(&SeminormSpec::MetricLip(t)).unwrap() else {
            panic!()
        };
        assert_eq!(cuts.len(), 2);
        assert!(cuts.iter().all(|c| c.bound == 3.0));

        assert_eq!(unit_ball_constraints(&example71(1.0, 2.0)).unwrap(), UnitBall::Unavailable);

        let big = ConductanceGraph::new(
            FiniteSpace::numbered(21).unwrap(),
            (0..20).map(|i| (i, i + 1, 1.0)),
        )
        .unwrap();
        assert!(matches!(
            unit_ball_constraints(&SeminormSpec::Resistance(big)),
            Err(SeminormError::TooLarge { n: 21, .. })
        ));
    }

    #[test]
    fn resistance_ball_matches_seminorm() {
        let g = ConductanceGraph::new(
            FiniteSpace::numbered(4).unwrap(),
            [(0, 1, 1.0), (1, 2, 0.5), (2, 3, 2.0), (0, 3, 1.5)],
        )
        .unwrap();
        let spec = SeminormSpec::Resistance(g);
        let UnitBall::Polyhedral(cuts) = unit_ball_constraints(&spec).unwrap() else { panic!() };
        assert_eq!(cuts.len(), 14);
        let mut rng = rng_for(11, 0);
        for _ in 0..50 {
            let f = random_observable(&mut rng, Shape::Points(4), 2.0);
            let best = cuts.iter().map(|c| c.lhs(&f)).fold(f64::MIN, f64::max);
            assert!((best - eval(&spec, &f).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn separation_examples() {
        let spec = example71(1.0, 2.0);
        assert_eq!(separation_oracle(&spec, &pts(&[0.5, 0.0, 0.0])).unwrap(), None);
        assert_eq!(separation_oracle(&spec, &pts(&[3.0, 3.0, 3.0])).unwrap(), None);
        let f = pts(&[2.0, 0.0, 0.0]);
        let cut = separation_oracle(&spec, &f).unwrap().expect("L(f) = 2 > 1");
        assert!(cut.lhs(&f) > cut.bound);
        // Only the f1 − f3 direction is active; the cut is ∝ (1, 0, −1) up to sign.
        assert!(cut.coefficients[1].abs() < 1e-12);
        assert!((cut.coefficients[0] + cut.coefficients[2]).abs() < 1e-12);
        assert!((cut.coefficients[0].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dirac_from_cost_examples() {
        let d = SeminormSpec::Dirac(dirac_from_cost(&single_edge(2.0)).unwrap());
        assert!((eval(&d, &pts(&[1.0, 0.0])).unwrap() - 0.5).abs() < 1e-14);
        let t = SeminormSpec::Dirac(dirac_from_cost(&triangle_costs()).unwrap());
        assert!((eval(&t, &pts(&[1.0, 0.0, 0.0])).unwrap() - 1.0).abs() < 1e-14);
        assert!(eval(&t, &pts(&[4.0, 4.0, 4.0])).unwrap().abs() < 1e-14);
    }

    #[test]
    fn lattice_join_examples() {
        let f = CommObservable::new(vec![1.0, 0.0, 0.0]).unwrap();
        let g = CommObservable::new(vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(lattice_join(&f, &g).unwrap().values(), &[1.0, 1.0, 0.0]);
        assert_eq!(lattice_join(&f, &f).unwrap(), f);
        let h = CommObservable::new(vec![4.0, 2.0, 0.0, -1.0]).unwrap();
        let z = CommObservable::constant(4, 0.0);
        assert_eq!(lattice_join(&h, &z).unwrap().values(), &[4.0, 2.0, 0.0, 0.0]);
        assert!(lattice_join(&f, &h).is_err());
    }

    fn all_specs() -> Vec<SeminormSpec> {
        let s4 = FiniteSpace::numbered(4).unwrap();
        let g = CostGraph::new(s4.clone(), [(0, 1, 1.0), (1, 2, 2.0), (2, 3, 0.5), (0, 2, 3.0)]).unwrap();
        let r = ConductanceGraph::new(s4, [(0, 1, 1.0), (1, 2, 2.0), (2, 3, 0.5), (0, 3, 3.0)]).unwrap();
        let t = MetricTable::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![vec![0.0, 1.0, 1.5], vec![1.0, 0.0, 2.0], vec![1.5, 2.0, 0.0]],
        )
        .unwrap();
        let (re, im) = crate::sampling::random_anti_hermitian(&mut crate::sampling::rng_for(11, 0), 6, true);
        let complex = DiracOperator::new(&re, &im, Representation::Amplified { n: 3 }).unwrap();
        vec![
            example71(1.0, 2.0),
            SeminormSpec::Dirac(
                DiracOperator::on_points(&[
                    vec![0.0, 4.0, -1.0, 0.0],
                    vec![-4.0, 0.0, 2.0, -2.0],
                    vec![1.0, -2.0, 0.0, -4.0],
                    vec![0.0, 2.0, 4.0, 0.0],
                ])
                .unwrap(),
            ),
            SeminormSpec::Dirac(dirac_from_cost(&g).unwrap()),
            SeminormSpec::Dirac(complex),
            SeminormSpec::GraphLip(g),
            SeminormSpec::Resistance(r),
            SeminormSpec::MetricLip(t),
            SeminormSpec::Quotient(Shape::Points(3)),
            SeminormSpec::Quotient(Shape::Matrix(3)),
        ]
    }

    #[test]
    fn identity_representation_has_a_commutant() {
        let (re, im) = crate::sampling::random_anti_hermitian(&mut rng_for(2, 0), 3, true);
        let plain = DiracOperator::new(&re, &im, Representation::Identity);
        assert_eq!(plain.unwrap_err(), SeminormError::NullSpace);
        let odd = DiracOperator::new(&re, &im, Representation::Amplified { n: 2 });
        assert!(matches!(odd, Err(SeminormError::InvalidOperator(_))));
    }

    #[test]
    fn null_space_is_exactly_the_constants() {
        for spec in all_specs() {
            let shape = spec.shape();
            assert!(eval(&spec, &Observable::unit(shape, 2.5)).unwrap() < 1e-12, "{}", spec.kind());
            for b in shape.gauge_basis() {
                let a = Observable::from_coords(shape, &b).unwrap();
                assert!(eval(&spec, &a).unwrap() > 1e-6, "{} vanishes on {b:?}", spec.kind());
            }
        }
    }

    #[test]
    fn separation_cuts_hold_on_the_unit_ball() {
        for (s, spec) in all_specs().iter().enumerate() {
            let shape = spec.shape();
            let mut rng = rng_for(5, s as u64);
            let mut cuts = Vec::new();
            while cuts.len() < 5 {
                let f = random_observable(&mut rng, shape, 3.0);
                if let Some(c) = separation_oracle(spec, &f).unwrap() {
                    assert!(c.lhs(&f) > c.bound);
                    cuts.push(c);
                }
            }
            for _ in 0..100 {
                let f = random_observable(&mut rng, shape, 1.0);
                let l = eval(spec, &f).unwrap();
                if l == 0.0 {
                    continue;
                }
                let unit = f.scale(1.0 / l);
                for c in &cuts {
                    assert!(c.is_satisfied_by(&unit, 1e-9), "{}", spec.kind());
                }
            }
        }
    }

    #[test]
    fn dirac_from_cost_matches_graph_lipschitz() {
        let g = CostGraph::new(
            FiniteSpace::numbered(5).unwrap(),
            [(0, 1, 1.0), (1, 2, 0.3), (2, 3, 2.0), (3, 4, 1.1), (0, 4, 0.7), (1, 3, 1.9)],
        )
        .unwrap();
        let d = SeminormSpec::Dirac(dirac_from_cost(&g).unwrap());
        let l = SeminormSpec::GraphLip(g);
        let mut rng = rng_for(9, 0);
        for _ in 0..200 {
            let f = random_observable(&mut rng, Shape::Points(5), 4.0);
            assert!((eval(&d, &f).unwrap() - eval(&l, &f).unwrap()).abs() <= 1e-10);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn seminorm_axioms(seed in 0u64..1_000_000, c in -3.0..3.0f64, k in -4.0..4.0f64) {
            for (s, spec) in all_specs().iter().enumerate() {
                let shape = spec.shape();
                let mut rng = rng_for(seed, s as u64);
                let a = random_observable(&mut rng, shape, 2.0);
                let b = random_observable(&mut rng, shape, 2.0);
                let la = eval(spec, &a).unwrap();
                let lb = eval(spec, &b).unwrap();
                let tol = 1e-9 * (1.0 + la + lb);
                prop_assert!((eval(spec, &a.shift(c)).unwrap() - la).abs() <= tol);
                prop_assert!((eval(spec, &a.scale(-1.0)).unwrap() - la).abs() <= tol);
                prop_assert!((eval(spec, &a.scale(k)).unwrap() - k.abs() * la).abs() <= tol * (1.0 + k.abs()));
                prop_assert!(eval(spec, &a.add(&b).unwrap()).unwrap() <= la + lb + tol);
            }
        }

        #[test]
        fn example71_closed_form(
            alpha in 0.1..5.0f64,
            beta in 0.1..5.0f64,
            f in proptest::collection::vec(-5.0..5.0f64, 3),
        ) {
            let l = eval(&example71(alpha, beta), &pts(&f)).unwrap();
            let expect = closed_form(alpha, beta, &f);
            prop_assert!((l - expect).abs() <= 1e-10 * (1.0 + expect));
        }
    }
}
