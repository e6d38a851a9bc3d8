//! The state metric `ρ_L(μ, ν) = L′(μ − ν)` and the dual norm `L′`.
//!
//! Observables are restricted to the gauge slice (value 0 at the last point,
//! or trace 0), where every seminorm in this crate is a norm. Polyhedral unit
//! balls are handled by one exact linear program. The resistance ball has
//! exponentially many facets, so its facets are added lazily until the LP
//! optimizer is feasible. Dirac balls are curved; a Kelley cutting-plane loop
//! brackets the optimum between the relaxed LP value and a rescaled feasible
//! point.

use thiserror::Error;

use crate::linalg::{solve_lp, trace_norm, IncrementalLp, LinalgError, LinearProgram, LpOutcome};
use crate::sampling::{random_pure_state, rng_for};
use crate::seminorms::{
    eval, supporting_cut, supporting_cuts, unit_ball_constraints, CostGraph, Cut, SeminormError, SeminormSpec, UnitBall,
    SEPARATION_SLACK,
};
use crate::spaces::{
    difference, point_state, DensityState, Observable, ProbState, Shape, SpaceError, State,
    ZeroSumFunctional,
};

pub const DEFAULT_TOL: f64 = 1e-7;
pub const MAX_ITERATIONS: usize = 500;
/// Slack for the triangle inequality in a [`MetricTable`].
pub const TRIANGLE_TOL: f64 = 1e-9;
/// Tolerance used for every entry of [`metric_table`].
pub const TABLE_TOL: f64 = 1e-10;
pub const RADIUS_SAMPLES: usize = 1000;

const BOX_ACTIVE: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("cutting planes did not converge after {iterations} iterations (bounds [{lower}, {upper}])")]
    NoConvergence { iterations: usize, lower: f64, upper: f64 },
    #[error("linear program failed: {0}")]
    Lp(String),
    #[error("invalid metric table: {0}")]
    InvalidTable(String),
    #[error("operation needs a seminorm on functions on points, got {0:?}")]
    NotCommutative(Shape),
    #[error("tolerance must be positive and finite, got {0}")]
    BadTolerance(f64),
    #[error(transparent)]
    Seminorm(#[from] SeminormError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A metric on a finite labelled point set.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricTable {
    labels: Vec<String>,
    d: Vec<f64>,
}

impl MetricTable {
    /// Validates symmetry, zero diagonal, positivity off the diagonal and the
    /// triangle inequality (to within `1e-9`).
    pub fn new(labels: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self, EngineError> {
        let n = labels.len();
        let bad = |m: String| Err(EngineError::InvalidTable(m));
        if n < 2 {
            return bad(format!("a table needs at least two points, got {n}"));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return bad(format!("duplicate label {l:?}"));
            }
        }
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return bad(format!("distances must form a {n}x{n} table"));
        }
        let mut d = vec![0.0; n * n];
        for x in 0..n {
            for y in 0..n {
                let v = rows[x][y];
                if !v.is_finite() {
                    return bad(format!("d({}, {}) is not finite", labels[x], labels[y]));
                }
                if x == y && v != 0.0 {
                    return bad(format!("d({0}, {0}) = {v}, expected 0", labels[x]));
                }
                if x != y && v <= 0.0 {
                    return bad(format!("d({}, {}) = {v} must be positive", labels[x], labels[y]));
                }
                if v != rows[y][x] {
                    return bad(format!("table is not symmetric at ({}, {})", labels[x], labels[y]));
                }
                d[x * n + y] = v;
            }
        }
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    let excess = d[x * n + z] - d[x * n + y] - d[y * n + z];
                    if excess > TRIANGLE_TOL {
                        return bad(format!(
                            "triangle inequality fails: d({0}, {2}) exceeds d({0}, {1}) + d({1}, {2}) by {excess:e}",
                            labels[x], labels[y], labels[z]
                        ));
                    }
                }
            }
        }
        Ok(Self { labels, d })
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

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.d[x * self.len() + y]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.d.chunks(self.len()).map(<[f64]>::to_vec).collect()
    }

    pub fn max_entry(&self) -> f64 {
        self.d.iter().copied().fold(0.0, f64::max)
    }

    /// The table with point `perm[i]` moved to position `i`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self, EngineError> {
        let n = self.len();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(EngineError::InvalidTable("not a permutation".into()));
        }
        let labels = perm.iter().map(|&p| self.labels[p].clone()).collect();
        let rows = perm
            .iter()
            .map(|&x| perm.iter().map(|&y| self.get(x, y)).collect())
            .collect();
        Self::new(labels, rows)
    }
}

/// A certified value with `lower ≤ value ≤ upper`.
#[derive(Clone, Debug, PartialEq)]
pub struct CertifiedValue {
    pub value: f64,
    pub upper: f64,
    pub lower: f64,
    pub iterations: usize,
    /// An observable with `L ≤ 1` on which the functional equals `lower`.
    pub witness: Observable,
}

impl CertifiedValue {
    pub fn gap(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn is_exact(&self) -> bool {
        self.upper == self.lower
    }
}

/// `ρ_L(μ, ν)`.
pub fn state_metric(spec: &SeminormSpec, mu: &State, nu: &State, tol: f64) -> Result<CertifiedValue, EngineError> {
    spec.check_states(mu, nu)?;
    dual_norm(spec, &difference(mu, nu)?, tol)
}

/// `L′(λ) = sup{ |λ(a)| : L(a) ≤ 1 }`.
pub fn dual_norm(spec: &SeminormSpec, lambda: &ZeroSumFunctional, tol: f64) -> Result<CertifiedValue, EngineError> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(EngineError::BadTolerance(tol));
    }
    let shape = spec.shape();
    if lambda.shape() != shape {
        return Err(SeminormError::FlavorMismatch {
            spec: shape,
            observable: lambda.shape(),
        }
        .into());
    }
    let weights = lambda.pairing_coords();
    let objective = shape.restrict_functional(&weights);
    if objective.iter().all(|c| *c == 0.0) {
        return Ok(CertifiedValue {
            value: 0.0,
            upper: 0.0,
            lower: 0.0,
            iterations: 0,
            witness: Observable::unit(shape, 0.0),
        });
    }
    match spec {
        SeminormSpec::Resistance(_) => lazy_facets(spec, &objective),
        SeminormSpec::Dirac(_) | SeminormSpec::Quotient(Shape::Matrix(_)) => kelley(spec, &objective, tol),
        _ => match unit_ball_constraints(spec)? {
            UnitBall::Polyhedral(cuts) => exact(spec, &objective, &cuts),
            UnitBall::Unavailable => kelley(spec, &objective, tol),
        },
    }
}

fn reduce(shape: Shape, cut: &Cut) -> (Vec<f64>, f64) {
    (shape.restrict_functional(&cut.coefficients), cut.bound)
}

fn lp_error(e: impl std::fmt::Display) -> EngineError {
    EngineError::Lp(e.to_string())
}

fn exact(spec: &SeminormSpec, objective: &[f64], cuts: &[Cut]) -> Result<CertifiedValue, EngineError> {
    let shape = spec.shape();
    let mut lp = LinearProgram::new(objective.to_vec());
    for c in cuts {
        let (row, b) = reduce(shape, c);
        lp.push(row, b)?;
    }
    match solve_lp(&lp)? {
        LpOutcome::Optimal { point, value } => Ok(CertifiedValue {
            value,
            upper: value,
            lower: value,
            iterations: 1,
            witness: Observable::from_coords(shape, &shape.expand(&point))?,
        }),
        LpOutcome::Unbounded { .. } => Err(lp_error("unit ball is unbounded on the gauge slice")),
        LpOutcome::Infeasible => Err(lp_error("unit ball is empty")),
    }
}

/// Outer approximation of the unit ball on the gauge slice: a box of
/// half-width `half_width` and the cuts found so far.
struct Relaxation {
    objective: Vec<f64>,
    half_width: f64,
    cuts: Vec<(Vec<f64>, f64)>,
    lp: IncrementalLp,
}

struct Relaxed {
    point: Vec<f64>,
    value: f64,
    box_active: bool,
}

impl Relaxation {
    /// Box half-width `4·max 1/L(b)` over the gauge basis, with the
    /// supporting cuts at `±b`.
    fn new(spec: &SeminormSpec, objective: &[f64]) -> Result<Self, EngineError> {
        let shape = spec.shape();
        let mut bound = 0.0_f64;
        let mut cuts: Vec<(Vec<f64>, f64)> = Vec::new();
        for b in shape.gauge_basis() {
            let a = Observable::from_coords(shape, &b)?;
            bound = bound.max(1.0 / eval(spec, &a)?);
            for sign in [1.0, -1.0] {
                cuts.extend(supporting_cuts(spec, &a.scale(sign))?.iter().map(|c| reduce(shape, c)));
            }
        }
        let half_width = 4.0 * bound;
        let lp = Self::program(objective, half_width, &cuts)?;
        Ok(Self {
            objective: objective.to_vec(),
            half_width,
            cuts,
            lp,
        })
    }

    fn program(objective: &[f64], half_width: f64, cuts: &[(Vec<f64>, f64)]) -> Result<IncrementalLp, EngineError> {
        let d = objective.len();
        let mut rows = Vec::with_capacity(2 * d + cuts.len());
        for k in 0..d {
            for sign in [1.0, -1.0] {
                let mut row = vec![0.0; d];
                row[k] = sign;
                rows.push((row, half_width));
            }
        }
        rows.extend(cuts.iter().cloned());
        Ok(IncrementalLp::new(objective.to_vec(), rows)?)
    }

    fn solve(&mut self) -> Result<Relaxed, EngineError> {
        match self.lp.solve()? {
            LpOutcome::Optimal { point, value } => {
                let box_active = point.iter().any(|x| x.abs() >= self.half_width * (1.0 - BOX_ACTIVE));
                Ok(Relaxed {
                    point,
                    value,
                    box_active,
                })
            }
            LpOutcome::Unbounded { .. } => Err(lp_error("boxed relaxation reported unbounded")),
            LpOutcome::Infeasible => Err(lp_error("relaxation is empty")),
        }
    }

    /// Adds the cuts not already present; returns how many were new.
    fn add(&mut self, cuts: impl IntoIterator<Item = (Vec<f64>, f64)>) -> Result<usize, EngineError> {
        let mut fresh = 0;
        for c in cuts {
            if !self.cuts.contains(&c) {
                self.lp.push(c.0.clone(), c.1)?;
                self.cuts.push(c);
                fresh += 1;
            }
        }
        Ok(fresh)
    }

    fn grow(&mut self) -> Result<(), EngineError> {
        self.half_width *= 2.0;
        self.lp = Self::program(&self.objective, self.half_width, &self.cuts)?;
        Ok(())
    }
}

/// Adds violated facets of a polyhedral ball one at a time.
fn lazy_facets(spec: &SeminormSpec, objective: &[f64]) -> Result<CertifiedValue, EngineError> {
    let shape = spec.shape();
    let mut relax = Relaxation::new(spec, objective)?;
    let mut last = (0.0, f64::INFINITY);
    for iteration in 1..=MAX_ITERATIONS {
        let r = relax.solve()?;
        let a = Observable::from_coords(shape, &shape.expand(&r.point))?;
        let l = eval(spec, &a)?;
        last = (r.value / l.max(1.0), r.value);
        let cuts: Vec<(Vec<f64>, f64)> = supporting_cut(spec, &a)?.iter().map(|c| reduce(shape, c)).collect();
        let fresh = if l > 1.0 + SEPARATION_SLACK { relax.add(cuts)? } else { 0 };
        if r.box_active {
            relax.grow()?;
            continue;
        }
        if fresh == 0 {
            return Ok(CertifiedValue {
                value: r.value,
                upper: r.value,
                lower: r.value,
                iterations: iteration,
                witness: a.scale(1.0 / l.max(1.0)),
            });
        }
    }
    Err(EngineError::NoConvergence {
        iterations: MAX_ITERATIONS,
        lower: last.0,
        upper: last.1,
    })
}

/// Kelley's cutting-plane method for curved unit balls.
fn kelley(spec: &SeminormSpec, objective: &[f64], tol: f64) -> Result<CertifiedValue, EngineError> {
    let shape = spec.shape();
    let mut relax = Relaxation::new(spec, objective)?;
    let mut lower = 0.0_f64;
    let mut upper = f64::INFINITY;
    let mut witness = Observable::unit(shape, 0.0);
    for iteration in 1..=MAX_ITERATIONS {
        let r = relax.solve()?;
        let a = Observable::from_coords(shape, &shape.expand(&r.point))?;
        let l = eval(spec, &a)?;
        let scale = l.max(1.0);
        if r.value / scale > lower {
            lower = r.value / scale;
            witness = a.scale(1.0 / scale);
        }
        let fresh = if l > 1.0 + SEPARATION_SLACK {
            relax.add(supporting_cuts(spec, &a)?.iter().map(|c| reduce(shape, c)))?
        } else {
            0
        };
        if r.box_active {
            relax.grow()?;
            continue;
        }
        upper = upper.min(r.value);
        if upper - lower <= tol {
            return Ok(CertifiedValue {
                value: 0.5 * (upper + lower),
                upper,
                lower,
                iterations: iteration,
                witness,
            });
        }
        if fresh == 0 {
            return Err(EngineError::NoConvergence {
                iterations: iteration,
                lower,
                upper,
            });
        }
    }
    Err(EngineError::NoConvergence {
        iterations: MAX_ITERATIONS,
        lower,
        upper,
    })
}

/// `trace |μ − ν|`.
pub fn trace_distance(mu: &DensityState, nu: &DensityState) -> Result<f64, EngineError> {
    if mu.n() != nu.n() {
        return Err(SpaceError::Shape(format!("{}x{0} vs {}x{1}", mu.n(), nu.n())).into());
    }
    Ok(trace_norm(&mu.matrix().sub(nu.matrix()))?)
}

/// Ground costs for transport.
#[derive(Clone, Debug, PartialEq)]
pub enum Transport {
    /// Any pair may exchange mass at its table distance.
    Table(MetricTable),
    /// Mass moves along edges; transshipment through other points is allowed.
    Graph(CostGraph),
}

/// Kantorovich–Rubinstein distance, via its dual LP over 1-Lipschitz
/// potentials.
///
/// Between two point masses on a table the potential `d(·, y)` is optimal,
/// so the table entry is returned as is.
pub fn monge_kantorovich(transport: &Transport, mu: &ProbState, nu: &ProbState) -> Result<f64, EngineError> {
    if let (Transport::Table(t), Some(x), Some(y)) = (transport, point_mass(mu), point_mass(nu)) {
        if mu.len() == t.len() && nu.len() == t.len() {
            return Ok(t.get(x, y));
        }
    }
    let spec = match transport {
        Transport::Table(t) => SeminormSpec::MetricLip(t.clone()),
        Transport::Graph(g) => SeminormSpec::GraphLip(g.clone()),
    };
    Ok(state_metric(&spec, &State::Prob(mu.clone()), &State::Prob(nu.clone()), DEFAULT_TOL)?.value)
}

fn point_mass(p: &ProbState) -> Option<usize> {
    let w = p.weights();
    let at = w.iter().position(|x| *x == 1.0)?;
    w.iter().enumerate().all(|(i, x)| i == at || *x == 0.0).then_some(at)
}

fn point_labels(spec: &SeminormSpec) -> Result<Vec<String>, EngineError> {
    Ok(match spec {
        SeminormSpec::GraphLip(g) => g.space().labels().to_vec(),
        SeminormSpec::Resistance(g) => g.space().labels().to_vec(),
        SeminormSpec::MetricLip(t) => t.labels().to_vec(),
        _ => match spec.shape() {
            Shape::Points(n) => (1..=n).map(|i| i.to_string()).collect(),
            s => return Err(EngineError::NotCommutative(s)),
        },
    })
}

/// `ρ_L` between point masses. Each entry is certified to within
/// `min(tol, 1e-10)`.
pub fn metric_table(spec: &SeminormSpec, tol: f64) -> Result<MetricTable, EngineError> {
    let labels = point_labels(spec)?;
    let n = labels.len();
    let tol = tol.min(TABLE_TOL);
    let mut rows = vec![vec![0.0; n]; n];
    for x in 0..n {
        for y in (x + 1)..n {
            let v = state_metric(
                spec,
                &State::Prob(point_state(n, x)?),
                &State::Prob(point_state(n, y)?),
                tol,
            )?
            .value;
            rows[x][y] = v;
            rows[y][x] = v;
        }
    }
    MetricTable::new(labels, rows)
}

/// Half the diameter of the state space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Radius {
    pub value: f64,
    /// `false` when `value` is only a sampled lower bound.
    pub exact: bool,
}

/// Half the diameter of the state space: exact for functions on points and
/// for the matrix quotient seminorm, otherwise a lower bound from
/// [`RADIUS_SAMPLES`] pairs of seeded random pure states.
pub fn radius(spec: &SeminormSpec, tol: f64) -> Result<Radius, EngineError> {
    radius_sampled(spec, tol, RADIUS_SAMPLES, 0)
}

pub fn radius_sampled(spec: &SeminormSpec, tol: f64, samples: usize, seed: u64) -> Result<Radius, EngineError> {
    match (spec, spec.shape()) {
        (_, Shape::Points(_)) => Ok(Radius {
            value: metric_table(spec, tol)?.max_entry() / 2.0,
            exact: true,
        }),
        (SeminormSpec::Quotient(_), Shape::Matrix(_)) => Ok(Radius {
            value: 1.0,
            exact: true,
        }),
        (_, Shape::Matrix(n)) => {
            let mut best = 0.0_f64;
            for i in 0..samples {
                let mut rng = rng_for(seed, i as u64);
                let mu = State::Density(random_pure_state(&mut rng, n));
                let nu = State::Density(random_pure_state(&mut rng, n));
                best = best.max(state_metric(spec, &mu, &nu, tol)?.lower);
            }
            Ok(Radius {
                value: best / 2.0,
                exact: false,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::HermMatrix;
    use crate::sampling::{random_density, random_prob_state};
    use crate::seminorms::{dirac_from_cost, DiracOperator};
    use crate::spaces::FiniteSpace;
    use proptest::prelude::*;

    fn example71(alpha: f64, beta: f64) -> SeminormSpec {
        SeminormSpec::Dirac(
            DiracOperator::on_points(&[
                vec![0.0, 0.0, alpha],
                vec![0.0, 0.0, beta],
                vec![-alpha, -beta, 0.0],
            ])
            .unwrap(),
        )
    }

    fn delta(n: usize, i: usize) -> State {
        State::Prob(point_state(n, i).unwrap())
    }

    fn prob(w: &[f64]) -> ProbState {
        ProbState::new(w.to_vec()).unwrap()
    }

    fn diag_state(d: &[f64]) -> DensityState {
        DensityState::new(HermMatrix::diag(d).unwrap()).unwrap()
    }

    fn two_point_table(d: f64) -> MetricTable {
        MetricTable::new(vec!["a".into(), "b".into()], vec![vec![0.0, d], vec![d, 0.0]]).unwrap()
    }

    fn path_costs() -> CostGraph {
        CostGraph::new(FiniteSpace::numbered(3).unwrap(), [(0, 1, 1.0), (1, 2, 1.0)]).unwrap()
    }

    /// Floyd–Warshall shortest paths.
    fn shortest_paths(g: &CostGraph) -> Vec<Vec<f64>> {
        let n = g.n();
        let mut d = vec![vec![f64::INFINITY; n]; n];
        for (i, row) in d.iter_mut().enumerate() {
            row[i] = 0.0;
        }
        for e in g.edges() {
            d[e.a][e.b] = e.weight;
            d[e.b][e.a] = e.weight;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    d[i][j] = d[i][j].min(d[i][k] + d[k][j]);
                }
            }
        }
        d
    }

    #[test]
    fn example71_point_distances() {
        let spec = example71(1.0, 2.0);
        let r = |i, j| state_metric(&spec, &delta(3, i), &delta(3, j), DEFAULT_TOL).unwrap();
        assert!((r(0, 2).value - 1.0).abs() < 1e-6);
        assert!((r(1, 2).value - 0.5).abs() < 1e-6);
        let v = r(0, 1);
        assert!((v.value - 1.25f64.sqrt()).abs() < 1e-6);
        assert!(v.lower <= v.value && v.value <= v.upper && v.gap() <= DEFAULT_TOL);
        assert_eq!(r(1, 1).value, 0.0);
    }

    #[test]
    fn certificate_is_checkable() {
        let spec = example71(1.0, 2.0);
        let (mu, nu) = (State::Prob(prob(&[0.2, 0.5, 0.3])), State::Prob(prob(&[0.6, 0.1, 0.3])));
        let v = state_metric(&spec, &mu, &nu, DEFAULT_TOL).unwrap();
        assert!(eval(&spec, &v.witness).unwrap() <= 1.0 + 1e-9);
        let lambda = difference(&mu, &nu).unwrap();
        let achieved = crate::spaces::pair(&lambda, &v.witness).unwrap();
        assert!((achieved - v.lower).abs() < 1e-12);
        let expect = (0.4f64.powi(2) + 0.4f64.powi(2) / 4.0).sqrt();
        assert!((v.value - expect).abs() < 1e-6);
    }

    #[test]
    fn dual_norm_examples() {
        let spec = example71(1.0, 2.0);
        let l = ZeroSumFunctional::comm(vec![1.0, -1.0, 0.0]).unwrap();
        assert!((dual_norm(&spec, &l, DEFAULT_TOL).unwrap().value - 1.25f64.sqrt()).abs() < 1e-6);
        let zero = ZeroSumFunctional::zero(Shape::Points(3));
        assert_eq!(dual_norm(&spec, &zero, DEFAULT_TOL).unwrap().value, 0.0);
        assert!(matches!(dual_norm(&spec, &l, 0.0), Err(EngineError::BadTolerance(_))));
    }

    #[test]
    fn quotient_matrix_examples() {
        let spec = SeminormSpec::Quotient(Shape::Matrix(2));
        let mu = State::Density(diag_state(&[1.0, 0.0]));
        let nu = State::Density(diag_state(&[0.0, 1.0]));
        assert!((state_metric(&spec, &mu, &nu, DEFAULT_TOL).unwrap().value - 2.0).abs() < 1e-6);
        assert!((trace_distance(&diag_state(&[1.0, 0.0]), &diag_state(&[0.0, 1.0])).unwrap() - 2.0).abs() < 1e-12);
        assert!(trace_distance(&diag_state(&[0.5, 0.5]), &diag_state(&[0.5, 0.5])).unwrap().abs() < 1e-12);
        assert!(
            (trace_distance(&diag_state(&[0.75, 0.25]), &diag_state(&[0.25, 0.75])).unwrap() - 1.0).abs() < 1e-12
        );
        assert!(trace_distance(&diag_state(&[1.0, 0.0]), &diag_state(&[1.0, 0.0, 0.0])).is_err());
    }

    #[test]
    fn transport_examples() {
        let t = Transport::Table(two_point_table(3.0));
        assert!((monge_kantorovich(&t, &prob(&[1.0, 0.0]), &prob(&[0.0, 1.0])).unwrap() - 3.0).abs() < 1e-12);
        assert!((monge_kantorovich(&t, &prob(&[0.5, 0.5]), &prob(&[0.0, 1.0])).unwrap() - 1.5).abs() < 1e-12);
        let g = Transport::Graph(path_costs());
        let sp = shortest_paths(&path_costs());
        let v = monge_kantorovich(&g, &prob(&[1.0, 0.0, 0.0]), &prob(&[0.0, 0.0, 1.0])).unwrap();
        assert!((v - sp[0][2]).abs() < 1e-12);
        assert_eq!(sp[0][2], 2.0);
    }

    #[test]
    fn table_examples() {
        let t = metric_table(&example71(1.0, 2.0), DEFAULT_TOL).unwrap();
        assert!((t.get(0, 1) - 1.25f64.sqrt()).abs() < 1e-9);
        assert!((t.get(0, 2) - 1.0).abs() < 1e-9);
        assert!((t.get(1, 2) - 0.5).abs() < 1e-9);
        let single = CostGraph::new(FiniteSpace::numbered(2).unwrap(), [(0, 1, 2.0)]).unwrap();
        let t = metric_table(&SeminormSpec::GraphLip(single.clone()), DEFAULT_TOL).unwrap();
        assert_eq!(t.get(0, 1), 2.0);
        assert!(metric_table(&SeminormSpec::Quotient(Shape::Matrix(2)), DEFAULT_TOL).is_err());

        let r = radius(&example71(1.0, 2.0), DEFAULT_TOL).unwrap();
        assert!((r.value - 1.25f64.sqrt() / 2.0).abs() < 1e-9 && r.exact);
        assert_eq!(radius(&SeminormSpec::GraphLip(single), DEFAULT_TOL).unwrap().value, 1.0);
        let q = radius(&SeminormSpec::Quotient(Shape::Matrix(3)), DEFAULT_TOL).unwrap();
        assert_eq!(q, Radius { value: 1.0, exact: true });
    }

    #[test]
    fn table_validation() {
        let labels = || vec!["a".to_string(), "b".into(), "c".into()];
        let bad = MetricTable::new(labels(), vec![vec![0.0, 1.0, 3.0], vec![1.0, 0.0, 1.0], vec![3.0, 1.0, 0.0]]);
        assert!(matches!(bad, Err(EngineError::InvalidTable(_))));
        let asym = MetricTable::new(labels(), vec![vec![0.0, 1.0, 1.0], vec![2.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]]);
        assert!(asym.is_err());
        let zero = MetricTable::new(labels(), vec![vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]]);
        assert!(zero.is_err());
    }

    #[test]
    fn matrix_dirac_converges() {
        let (re, im) = crate::sampling::random_anti_hermitian(&mut rng_for(11, 0), 6, true);
        let d = DiracOperator::new(&re, &im, crate::seminorms::Representation::Amplified { n: 3 }).unwrap();
        let spec = SeminormSpec::Dirac(d);
        let mut rng = rng_for(4, 0);
        let mu = State::Density(random_density(&mut rng, 3));
        let nu = State::Density(random_density(&mut rng, 3));
        let v = state_metric(&spec, &mu, &nu, DEFAULT_TOL).unwrap();
        assert!(v.gap() <= DEFAULT_TOL);
        assert!(eval(&spec, &v.witness).unwrap() <= 1.0 + 1e-9);
        let back = state_metric(&spec, &nu, &mu, DEFAULT_TOL).unwrap();
        assert!((back.value - v.value).abs() <= 2.0 * DEFAULT_TOL);
    }

    #[test]
    fn dirac_from_cost_reproduces_shortest_paths() {
        let g = CostGraph::new(
            FiniteSpace::numbered(4).unwrap(),
            [(0, 1, 1.0), (1, 2, 2.0), (2, 3, 0.5), (0, 2, 2.5)],
        )
        .unwrap();
        let sp = shortest_paths(&g);
        let t = metric_table(&SeminormSpec::Dirac(dirac_from_cost(&g).unwrap()), DEFAULT_TOL).unwrap();
        let l = metric_table(&SeminormSpec::GraphLip(g), DEFAULT_TOL).unwrap();
        for x in 0..4 {
            for y in 0..4 {
                assert!((t.get(x, y) - sp[x][y]).abs() < 1e-8);
                assert!((l.get(x, y) - sp[x][y]).abs() < 1e-12);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn example71_closed_form(alpha in 0.2..4.0f64, beta in 0.2..4.0f64, seed in 0u64..10_000) {
            let spec = example71(alpha, beta);
            let mut rng = rng_for(seed, 0);
            let mu = random_prob_state(&mut rng, 3);
            let nu = random_prob_state(&mut rng, 3);
            let (m, n) = (mu.weights(), nu.weights());
            let expect = ((m[0] - n[0]).powi(2) / alpha.powi(2) + (m[1] - n[1]).powi(2) / beta.powi(2)).sqrt();
            let v = state_metric(&spec, &State::Prob(mu), &State::Prob(nu), DEFAULT_TOL).unwrap();
            prop_assert!((v.value - expect).abs() <= 1e-6);
            prop_assert!(v.lower <= expect + 1e-9 && expect <= v.upper + 1e-9);
        }

        #[test]
        fn quotient_matches_trace_distance(n in 2usize..=4, seed in 0u64..10_000) {
            let spec = SeminormSpec::Quotient(Shape::Matrix(n));
            let mut rng = rng_for(seed, 1);
            let mu = random_density(&mut rng, n);
            let nu = random_density(&mut rng, n);
            let v = state_metric(&spec, &State::Density(mu.clone()), &State::Density(nu.clone()), DEFAULT_TOL).unwrap();
            prop_assert!((v.value - trace_distance(&mu, &nu).unwrap()).abs() <= 1e-6);
        }

        #[test]
        fn cost_scaling(t in 0.1..10.0f64, seed in 0u64..10_000) {
            let g = CostGraph::new(
                FiniteSpace::numbered(4).unwrap(),
                [(0, 1, 1.0), (1, 2, 2.0), (2, 3, 0.5), (0, 3, 3.0)],
            ).unwrap();
            let mut rng = rng_for(seed, 2);
            let mu = State::Prob(random_prob_state(&mut rng, 4));
            let nu = State::Prob(random_prob_state(&mut rng, 4));
            let base = state_metric(&SeminormSpec::GraphLip(g.clone()), &mu, &nu, DEFAULT_TOL).unwrap().value;
            let scaled = state_metric(&SeminormSpec::GraphLip(g.scaled(t).unwrap()), &mu, &nu, DEFAULT_TOL).unwrap().value;
            prop_assert!((scaled - t * base).abs() <= 1e-9 * (1.0 + t * base));
        }

        #[test]
        fn table_transport_reproduces_table(seed in 0u64..10_000) {
            // Shortest paths on a random complete graph form a metric.
            let mut rng = rng_for(seed, 3);
            let edges: Vec<(usize, usize, f64)> = (0..4)
                .flat_map(|a| ((a + 1)..4).map(move |b| (a, b)))
                .map(|(a, b)| (a, b, 0.5 + random_prob_state(&mut rng, 2).weights()[0] * 3.0))
                .collect();
            let g = CostGraph::new(FiniteSpace::numbered(4).unwrap(), edges).unwrap();
            let labels = g.space().labels().to_vec();
            let t = MetricTable::new(labels, shortest_paths(&g)).unwrap();
            for x in 0..4 {
                for y in 0..4 {
                    let v = monge_kantorovich(
                        &Transport::Table(t.clone()),
                        &point_state(4, x).unwrap(),
                        &point_state(4, y).unwrap(),
                    ).unwrap();
                    prop_assert!((v - t.get(x, y)).abs() <= 1e-12 * (1.0 + t.get(x, y)));
                }
            }
        }

        #[test]
        fn relabeling_permutes_table(perm in Just(vec![0usize, 1, 2, 3]).prop_shuffle()) {
            let g = CostGraph::new(
                FiniteSpace::numbered(4).unwrap(),
                [(0, 1, 1.0), (1, 2, 2.0), (2, 3, 0.5), (0, 2, 2.5)],
            ).unwrap();
            let t = metric_table(&SeminormSpec::GraphLip(g.clone()), DEFAULT_TOL).unwrap();
            let labels: Vec<String> = perm.iter().map(|&p| g.space().labels()[p].clone()).collect();
            let relabeled = CostGraph::new(
                FiniteSpace::new(labels).unwrap(),
                g.edges().iter().map(|e| {
                    let at = |x: usize| perm.iter().position(|&p| p == x).unwrap();
                    (at(e.a), at(e.b), e.weight)
                }),
            ).unwrap();
            let u = metric_table(&SeminormSpec::GraphLip(relabeled), DEFAULT_TOL).unwrap();
            let expect = t.permuted(&perm).unwrap();
            prop_assert_eq!(u.labels(), expect.labels());
            for x in 0..4 {
                for y in 0..4 {
                    prop_assert!((u.get(x, y) - expect.get(x, y)).abs() <= 1e-12);
                }
            }
        }
    }
}
