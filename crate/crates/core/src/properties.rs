//! Falsifiers for seminorm inequalities and metric axioms.
//!
//! Each checker runs seeded trials (trial `i` draws from stream `(seed, i)`)
//! and records every violation with the inputs needed to replay it. A
//! violation's `margin` is `lhs − rhs` of the inequality `lhs ≤ rhs`, and it
//! is recorded only when the margin exceeds the report's slack.

use rand::Rng;

use crate::linalg::CMatrix;
use crate::metric_engine::{state_metric, EngineError, DEFAULT_TOL};
use crate::sampling::{random_extreme_state, random_observable, random_state, rng_for};
use crate::seminorms::{eval, lattice_join, SeminormSpec};
use crate::spaces::{difference, CommObservable, Functional, Observable, Shape, State, ZeroSumFunctional};

/// Additive slack for inequalities between computed quantities.
pub const SLACK: f64 = 1e-9;
/// Sampling attempts allowed per requested configuration before giving up.
pub const ATTEMPTS_PER_CONFIG: usize = 50;

#[derive(Clone, Debug, PartialEq)]
pub enum Witness {
    Observables(Vec<Observable>),
    States { states: Vec<State>, t: Option<f64> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub axiom: &'static str,
    pub witness: Witness,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub predicate: String,
    /// Configurations actually evaluated.
    pub trials: usize,
    /// Configurations drawn, including rejected infeasible ones.
    pub attempts: usize,
    pub slack: f64,
    pub violations: Vec<Violation>,
    pub note: Option<String>,
}

impl CheckReport {
    fn new(predicate: &str, slack: f64) -> Self {
        Self {
            predicate: predicate.to_string(),
            trials: 0,
            attempts: 0,
            slack,
            violations: Vec::new(),
            note: None,
        }
    }

    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn max_margin(&self) -> Option<f64> {
        self.violations.iter().map(|v| v.margin).reduce(f64::max)
    }

    fn record(&mut self, axiom: &'static str, witness: impl FnOnce() -> Witness, lhs: f64, rhs: f64) {
        let margin = lhs - rhs;
        if margin > self.slack {
            self.violations.push(Violation {
                axiom,
                witness: witness(),
                lhs,
                rhs,
                margin,
            });
        }
    }
}

fn require_points(spec: &SeminormSpec) -> Result<usize, EngineError> {
    match spec.shape() {
        Shape::Points(n) => Ok(n),
        s => Err(EngineError::NotCommutative(s)),
    }
}

fn comm(o: &Observable) -> &CommObservable {
    o.as_comm().expect("points-shaped observable")
}

fn unit_vector(n: usize, i: usize) -> CommObservable {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    CommObservable::new(v).expect("finite")
}

/// `(L(f ∨ g), max(L(f), L(g)))`.
pub fn lattice_terms(spec: &SeminormSpec, f: &CommObservable, g: &CommObservable) -> Result<(f64, f64), EngineError> {
    let l = |h: &CommObservable| eval(spec, &Observable::Comm(h.clone()));
    Ok((l(&lattice_join(f, g)?)?, l(f)?.max(l(g)?)))
}

/// `(L(f ∨ 0), L(f))`.
pub fn weak_lattice_terms(spec: &SeminormSpec, f: &CommObservable) -> Result<(f64, f64), EngineError> {
    let zero = CommObservable::constant(f.len(), 0.0);
    let l = |h: &CommObservable| eval(spec, &Observable::Comm(h.clone()));
    Ok((l(&lattice_join(f, &zero)?)?, l(f)?))
}

/// Pointwise product, or the Jordan product `(ab + ba)/2` for matrices.
pub fn product(a: &Observable, b: &Observable) -> Result<Observable, EngineError> {
    match (a, b) {
        (Observable::Comm(f), Observable::Comm(g)) if f.len() == g.len() => Ok(Observable::Comm(CommObservable::new(
            f.values().iter().zip(g.values()).map(|(x, y)| x * y).collect(),
        )?)),
        (Observable::Mat(x), Observable::Mat(y)) if x.n() == y.n() => Ok(Observable::matrix(
            CMatrix::from_herm(x.matrix()).mul(&CMatrix::from_herm(y.matrix())).hermitian_part(),
        )),
        _ => Err(crate::spaces::SpaceError::Shape(format!("{:?} vs {:?}", a.shape(), b.shape())).into()),
    }
}

/// `(L(ab), L(a)‖b‖ + ‖a‖L(b))`.
pub fn leibniz_terms(spec: &SeminormSpec, a: &Observable, b: &Observable) -> Result<(f64, f64), EngineError> {
    let lhs = eval(spec, &product(a, b)?)?;
    let rhs = eval(spec, a)? * b.norm()? + a.norm()? * eval(spec, b)?;
    Ok((lhs, rhs))
}

/// `L(f ∨ g) ≤ max(L(f), L(g))` on all pairs of indicator functions, the
/// `extra` pairs, then `trials` random pairs.
pub fn check_lattice(spec: &SeminormSpec, trials: usize, seed: u64) -> Result<CheckReport, EngineError> {
    check_lattice_with(spec, trials, seed, &[])
}

pub fn check_lattice_with(
    spec: &SeminormSpec,
    trials: usize,
    seed: u64,
    extra: &[(CommObservable, CommObservable)],
) -> Result<CheckReport, EngineError> {
    let n = require_points(spec)?;
    let mut pairs: Vec<(CommObservable, CommObservable)> = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            pairs.push((unit_vector(n, i), unit_vector(n, j)));
        }
    }
    pairs.extend_from_slice(extra);
    for t in 0..trials {
        let mut rng = rng_for(seed, t as u64);
        let f = random_observable(&mut rng, spec.shape(), 1.0);
        let g = random_observable(&mut rng, spec.shape(), 1.0);
        pairs.push((comm(&f).clone(), comm(&g).clone()));
    }
    let mut report = CheckReport::new("lattice", SLACK);
    for (f, g) in &pairs {
        let (lhs, rhs) = lattice_terms(spec, f, g)?;
        report.record(
            "lattice",
            || Witness::Observables(vec![Observable::Comm(f.clone()), Observable::Comm(g.clone())]),
            lhs,
            rhs,
        );
    }
    report.trials = pairs.len();
    report.attempts = pairs.len();
    Ok(report)
}

/// `L(f ∨ 0) ≤ L(f)` on `±` indicators, differences of indicators, the
/// `extra` observables, then `trials` random ones.
pub fn check_weak_lattice(spec: &SeminormSpec, trials: usize, seed: u64) -> Result<CheckReport, EngineError> {
    check_weak_lattice_with(spec, trials, seed, &[])
}

pub fn check_weak_lattice_with(
    spec: &SeminormSpec,
    trials: usize,
    seed: u64,
    extra: &[CommObservable],
) -> Result<CheckReport, EngineError> {
    let n = require_points(spec)?;
    let mut fs: Vec<CommObservable> = Vec::new();
    for i in 0..n {
        fs.push(unit_vector(n, i));
        fs.push(CommObservable::new(unit_vector(n, i).values().iter().map(|x| -x).collect())?);
        for j in 0..n {
            if i != j {
                let mut v = vec![0.0; n];
                v[i] = 1.0;
                v[j] = -1.0;
                fs.push(CommObservable::new(v)?);
            }
        }
    }
    fs.extend_from_slice(extra);
    for t in 0..trials {
        let mut rng = rng_for(seed, t as u64);
        fs.push(comm(&random_observable(&mut rng, spec.shape(), 1.0)).clone());
    }
    let mut report = CheckReport::new("weak-lattice", SLACK);
    for f in &fs {
        let (lhs, rhs) = weak_lattice_terms(spec, f)?;
        report.record("weak-lattice", || Witness::Observables(vec![Observable::Comm(f.clone())]), lhs, rhs);
    }
    report.trials = fs.len();
    report.attempts = fs.len();
    Ok(report)
}

/// `L(ab) ≤ L(a)‖b‖ + ‖a‖L(b)` on the `extra` pairs, then `trials` random
/// pairs. Matrix observables use the Jordan product.
pub fn check_leibniz(spec: &SeminormSpec, trials: usize, seed: u64) -> Result<CheckReport, EngineError> {
    check_leibniz_with(spec, trials, seed, &[])
}

pub fn check_leibniz_with(
    spec: &SeminormSpec,
    trials: usize,
    seed: u64,
    extra: &[(Observable, Observable)],
) -> Result<CheckReport, EngineError> {
    let shape = spec.shape();
    let mut pairs: Vec<(Observable, Observable)> = extra.to_vec();
    for t in 0..trials {
        let mut rng = rng_for(seed, t as u64);
        let a = random_observable(&mut rng, shape, 1.0);
        let b = random_observable(&mut rng, shape, 1.0);
        pairs.push((a, b));
    }
    let mut report = CheckReport::new("leibniz", SLACK);
    if let Shape::Matrix(_) = shape {
        report.note = Some("matrix products are symmetrized: ab is replaced by (ab + ba)/2".into());
    }
    for (a, b) in &pairs {
        let (lhs, rhs) = leibniz_terms(spec, a, b)?;
        report.record("leibniz", || Witness::Observables(vec![a.clone(), b.clone()]), lhs, rhs);
    }
    report.trials = pairs.len();
    report.attempts = pairs.len();
    Ok(report)
}

/// Recomputes `(lhs, rhs, margin)` for a violation from a seminorm check.
pub fn replay_seminorm(spec: &SeminormSpec, v: &Violation) -> Result<(f64, f64, f64), EngineError> {
    let Witness::Observables(obs) = &v.witness else {
        return Err(EngineError::Lp("witness does not hold observables".into()));
    };
    let (lhs, rhs) = match v.axiom {
        "lattice" => lattice_terms(spec, comm(&obs[0]), comm(&obs[1]))?,
        "weak-lattice" => weak_lattice_terms(spec, comm(&obs[0]))?,
        "leibniz" => leibniz_terms(spec, &obs[0], &obs[1])?,
        other => return Err(EngineError::Lp(format!("unknown axiom {other}"))),
    };
    Ok((lhs, rhs, lhs - rhs))
}

/// A metric on the states of a fixed space.
pub trait StateMetric {
    fn shape(&self) -> Shape;
    fn distance(&self, mu: &State, nu: &State) -> Result<f64, EngineError>;
    /// Absolute error bound of a single `distance` value.
    fn tolerance(&self) -> f64 {
        0.0
    }
}

/// `ρ_L` computed by the engine.
#[derive(Clone, Debug)]
pub struct SpecMetric {
    pub spec: SeminormSpec,
    pub tol: f64,
}

impl SpecMetric {
    pub fn new(spec: SeminormSpec) -> Self {
        Self { spec, tol: DEFAULT_TOL }
    }
}

impl StateMetric for SpecMetric {
    fn shape(&self) -> Shape {
        self.spec.shape()
    }

    fn distance(&self, mu: &State, nu: &State) -> Result<f64, EngineError> {
        Ok(state_metric(&self.spec, mu, nu, self.tol)?.value)
    }

    fn tolerance(&self) -> f64 {
        self.tol
    }
}

/// A metric given by a closure.
pub struct FnMetric<F> {
    shape: Shape,
    f: F,
}

impl<F> FnMetric<F>
where
    F: Fn(&State, &State) -> Result<f64, EngineError>,
{
    pub fn new(shape: Shape, f: F) -> Self {
        Self { shape, f }
    }
}

impl<F> StateMetric for FnMetric<F>
where
    F: Fn(&State, &State) -> Result<f64, EngineError>,
{
    fn shape(&self) -> Shape {
        self.shape
    }

    fn distance(&self, mu: &State, nu: &State) -> Result<f64, EngineError> {
        (self.f)(mu, nu)
    }
}

/// `ρ_L(μ, ν) + a·(1 − δ_μν)·(1 + sin²(w·(μ + ν)))`.
///
/// Still a metric for `a > 0` (the added term lies in `[a, 2a]` off the
/// diagonal), but not translation invariant, so it does not come from a norm.
#[derive(Clone, Debug)]
pub struct PerturbedMetric {
    pub base: SpecMetric,
    pub amplitude: f64,
    pub w: Vec<f64>,
}

impl PerturbedMetric {
    fn bump(&self, mu: &State, nu: &State) -> f64 {
        let (a, b) = (mu.pairing_coords(), nu.pairing_coords());
        if a == b {
            return 0.0;
        }
        let s: f64 = self.w.iter().zip(a.iter().zip(&b)).map(|(w, (x, y))| w * (x + y)).sum();
        self.amplitude * (1.0 + s.sin().powi(2))
    }
}

impl StateMetric for PerturbedMetric {
    fn shape(&self) -> Shape {
        self.base.shape()
    }

    fn distance(&self, mu: &State, nu: &State) -> Result<f64, EngineError> {
        Ok(self.base.distance(mu, nu)? + self.bump(mu, nu))
    }

    fn tolerance(&self) -> f64 {
        self.base.tolerance()
    }
}

/// The frozen perturbation of the three-point Dirac metric with `α = 1`, `β = 2`.
pub fn perturbed_fixture() -> PerturbedMetric {
    let d = crate::seminorms::DiracOperator::on_points(&[
        vec![0.0, 0.0, 1.0],
        vec![0.0, 0.0, 2.0],
        vec![-1.0, -2.0, 0.0],
    ])
    .expect("valid operator");
    PerturbedMetric {
        base: SpecMetric::new(SeminormSpec::Dirac(d)),
        amplitude: 0.1,
        w: vec![3.1, -1.7, 0.4],
    }
}

/// Where checker configurations draw their states from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StateFamily {
    /// Random states with full support.
    All,
    /// Point masses or pure states.
    Extreme,
}

fn draw<R: Rng + ?Sized>(rng: &mut R, family: StateFamily, shape: Shape) -> State {
    match family {
        StateFamily::All => random_state(rng, shape),
        StateFamily::Extreme => random_extreme_state(rng, shape),
    }
}

fn distinct(a: &State, b: &State) -> bool {
    a.pairing_coords()
        .iter()
        .zip(b.pairing_coords())
        .any(|(x, y)| (x - y).abs() > 1e-12)
}

fn metric_slack(d: &dyn StateMetric) -> f64 {
    SLACK + 2.0 * d.tolerance()
}

fn states(list: &[&State], t: Option<f64>) -> Witness {
    Witness::States {
        states: list.iter().map(|s| (*s).clone()).collect(),
        t,
    }
}

/// Sampling settings shared by the metric checkers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sampling {
    /// Feasible configurations to evaluate.
    pub configs: usize,
    pub seed: u64,
    pub family: StateFamily,
}

impl Sampling {
    pub fn new(configs: usize, seed: u64) -> Self {
        Self {
            configs,
            seed,
            family: StateFamily::All,
        }
    }

    pub fn family(self, family: StateFamily) -> Self {
        Self { family, ..self }
    }
}

/// Runs `body` on seeded attempts until `configs` feasible configurations
/// have been evaluated or the attempt budget runs out. `body` returns
/// `false` for an infeasible draw.
fn run_configs(
    report: &mut CheckReport,
    s: Sampling,
    mut body: impl FnMut(&mut rand_chacha::ChaCha8Rng, &mut CheckReport) -> Result<bool, EngineError>,
) -> Result<(), EngineError> {
    let budget = ATTEMPTS_PER_CONFIG * s.configs.max(1) + 100;
    while report.trials < s.configs && report.attempts < budget {
        let mut rng = rng_for(s.seed, report.attempts as u64);
        report.attempts += 1;
        if body(&mut rng, report)? {
            report.trials += 1;
        }
    }
    Ok(())
}

/// Non-negativity, vanishing on the diagonal, positivity off it, symmetry
/// and the triangle inequality on sampled triples.
pub fn check_metric_axioms(d: &dyn StateMetric, s: Sampling) -> Result<CheckReport, EngineError> {
    let shape = d.shape();
    let slack = metric_slack(d);
    let mut report = CheckReport::new("metric-axioms", slack);
    run_configs(&mut report, s, |rng, report| {
        let x = draw(rng, s.family, shape);
        let y = draw(rng, s.family, shape);
        let z = draw(rng, s.family, shape);
        let (dxx, dxy, dyx) = (d.distance(&x, &x)?, d.distance(&x, &y)?, d.distance(&y, &x)?);
        let (dyz, dxz) = (d.distance(&y, &z)?, d.distance(&x, &z)?);
        report.record("identity", || states(&[&x], None), dxx.abs(), 0.0);
        report.record("symmetry", || states(&[&x, &y], None), (dxy - dyx).abs(), 0.0);
        if distinct(&x, &y) {
            report.record("positivity", || states(&[&x, &y], None), 2.0 * slack, dxy);
        }
        report.record("triangle", || states(&[&x, &y, &z], None), dxz, dxy + dyz);
        Ok(true)
    })?;
    Ok(report)
}

/// `ρ(μ, tν₁ + (1 − t)ν₂) ≤ tρ(μ, ν₁) + (1 − t)ρ(μ, ν₂)`.
pub fn check_convex(d: &dyn StateMetric, s: Sampling) -> Result<CheckReport, EngineError> {
    let shape = d.shape();
    let mut report = CheckReport::new("convex", metric_slack(d));
    run_configs(&mut report, s, |rng, report| {
        let (mu, n1, n2) = (draw(rng, s.family, shape), draw(rng, s.family, shape), draw(rng, s.family, shape));
        let t: f64 = rng.random_range(0.0..1.0);
        let (lhs, rhs) = convex_terms(d, &mu, &n1, &n2, t)?;
        report.record("convex", || states(&[&mu, &n1, &n2], Some(t)), lhs, rhs);
        Ok(true)
    })?;
    Ok(report)
}

fn convex_terms(d: &dyn StateMetric, mu: &State, n1: &State, n2: &State, t: f64) -> Result<(f64, f64), EngineError> {
    let lhs = d.distance(mu, &n1.mix(n2, t)?)?;
    let rhs = t * d.distance(mu, n1)? + (1.0 - t) * d.distance(mu, n2)?;
    Ok((lhs, rhs))
}

/// `ρ(μ, ν) = ρ(μ′, ν′)` whenever `ν′ = μ′ + ν − μ`. Configurations shrink
/// `ν` toward `μ` by a random factor and are rejected when `ν′` is not a
/// state or when `μ = ν` or `μ = μ′`.
pub fn check_midpoint_balanced(d: &dyn StateMetric, s: Sampling) -> Result<CheckReport, EngineError> {
    let shape = d.shape();
    let mut report = CheckReport::new("midpoint-balanced", metric_slack(d));
    run_configs(&mut report, s, |rng, report| {
        let Some((mu, nu, mu2, nu2)) = balanced_configuration(rng, s.family, shape)? else {
            return Ok(false);
        };
        let (lhs, rhs) = balanced_terms(d, &mu, &nu, &mu2, &nu2)?;
        report.record("midpoint-balanced", || states(&[&mu, &nu, &mu2, &nu2], None), lhs, rhs);
        Ok(true)
    })?;
    Ok(report)
}

type Quad = (State, State, State, State);

fn balanced_configuration<R: Rng + ?Sized>(
    rng: &mut R,
    family: StateFamily,
    shape: Shape,
) -> Result<Option<Quad>, EngineError> {
    let mu = draw(rng, family, shape);
    let far = draw(rng, family, shape);
    let mu2 = draw(rng, family, shape);
    let shrink = match family {
        StateFamily::All => rng.random_range(0.0..1.0),
        StateFamily::Extreme => 1.0,
    };
    let nu = far.mix(&mu, shrink)?;
    if !distinct(&mu, &nu) || !distinct(&mu, &mu2) {
        return Ok(None);
    }
    let Ok(nu2) = mu2.translate(&difference(&nu, &mu)?) else {
        return Ok(None);
    };
    Ok(Some((mu, nu, mu2, nu2)))
}

fn balanced_terms(d: &dyn StateMetric, mu: &State, nu: &State, mu2: &State, nu2: &State) -> Result<(f64, f64), EngineError> {
    Ok(((d.distance(mu, nu)? - d.distance(mu2, nu2)?).abs(), 0.0))
}

/// `ρ((μ + μ′)/2, (ν + ν′)/2) ≤ (ρ(μ, ν) + ρ(μ′, ν′))/2`.
pub fn check_midpoint_concave(d: &dyn StateMetric, s: Sampling) -> Result<CheckReport, EngineError> {
    let shape = d.shape();
    let mut report = CheckReport::new("midpoint-concave", metric_slack(d));
    run_configs(&mut report, s, |rng, report| {
        let q: Vec<State> = (0..4).map(|_| draw(rng, s.family, shape)).collect();
        let (lhs, rhs) = concave_terms(d, &q[0], &q[1], &q[2], &q[3])?;
        report.record("midpoint-concave", || states(&[&q[0], &q[1], &q[2], &q[3]], None), lhs, rhs);
        Ok(true)
    })?;
    Ok(report)
}

fn concave_terms(d: &dyn StateMetric, mu: &State, nu: &State, mu2: &State, nu2: &State) -> Result<(f64, f64), EngineError> {
    let lhs = d.distance(&mu.mix(mu2, 0.5)?, &nu.mix(nu2, 0.5)?)?;
    let rhs = 0.5 * (d.distance(mu, nu)? + d.distance(mu2, nu2)?);
    Ok((lhs, rhs))
}

/// `ρ(μ, μ + tv) = tρ(ν, ν + v)` with `v = w − ν` for sampled states `ν`,
/// `w`; rejected when `μ + tv` is not a state or `v = 0`.
pub fn check_linear(d: &dyn StateMetric, s: Sampling) -> Result<CheckReport, EngineError> {
    let shape = d.shape();
    let mut report = CheckReport::new("linear", metric_slack(d));
    run_configs(&mut report, s, |rng, report| {
        let (mu, nu, w) = (draw(rng, s.family, shape), draw(rng, s.family, shape), draw(rng, s.family, shape));
        let t: f64 = rng.random_range(0.0..1.0);
        if !distinct(&nu, &w) || t == 0.0 {
            return Ok(false);
        }
        let Ok(target) = mu.translate(&difference(&w, &nu)?.scale(t)) else {
            return Ok(false);
        };
        let (lhs, rhs) = linear_terms(d, &mu, &target, &nu, &w, t)?;
        report.record("linear", || states(&[&mu, &target, &nu, &w], Some(t)), lhs, rhs);
        Ok(true)
    })?;
    Ok(report)
}

fn linear_terms(d: &dyn StateMetric, mu: &State, target: &State, nu: &State, w: &State, t: f64) -> Result<(f64, f64), EngineError> {
    Ok(((d.distance(mu, target)? - t * d.distance(nu, w)?).abs(), 0.0))
}

/// Recomputes `(lhs, rhs, margin)` for a violation from a metric check.
pub fn replay_metric(d: &dyn StateMetric, v: &Violation) -> Result<(f64, f64, f64), EngineError> {
    let Witness::States { states: st, t } = &v.witness else {
        return Err(EngineError::Lp("witness does not hold states".into()));
    };
    let (lhs, rhs) = match v.axiom {
        "identity" => (d.distance(&st[0], &st[0])?.abs(), 0.0),
        "symmetry" => ((d.distance(&st[0], &st[1])? - d.distance(&st[1], &st[0])?).abs(), 0.0),
        "positivity" => (2.0 * metric_slack(d), d.distance(&st[0], &st[1])?),
        "triangle" => (
            d.distance(&st[0], &st[2])?,
            d.distance(&st[0], &st[1])? + d.distance(&st[1], &st[2])?,
        ),
        "convex" => convex_terms(d, &st[0], &st[1], &st[2], t.unwrap_or(0.0))?,
        "midpoint-balanced" => balanced_terms(d, &st[0], &st[1], &st[2], &st[3])?,
        "midpoint-concave" => concave_terms(d, &st[0], &st[1], &st[2], &st[3])?,
        "linear" => linear_terms(d, &st[0], &st[1], &st[2], &st[3], t.unwrap_or(0.0))?,
        other => return Err(EngineError::Lp(format!("unknown axiom {other}"))),
    };
    Ok((lhs, rhs, lhs - rhs))
}

/// Values of `M(λ) = t·ρ(μ, ν)` for `λ = t(μ − ν)` and the spread of `ρ`
/// across pairs of representations of the same difference.
#[derive(Clone, Debug, PartialEq)]
pub struct NormReport {
    pub values: Vec<f64>,
    /// `|ρ(μ, ν) − ρ(μ′, ν′)|` for sampled `μ − ν = μ′ − ν′`.
    pub discrepancies: Vec<f64>,
    pub attempts: usize,
}

impl NormReport {
    pub fn max_discrepancy(&self) -> f64 {
        self.discrepancies.iter().copied().fold(0.0, f64::max)
    }
}

/// Builds the candidate norm `M` on differences of states from a metric.
pub fn norm_from_metric(
    d: &dyn StateMetric,
    requests: &[ZeroSumFunctional],
    s: Sampling,
) -> Result<NormReport, EngineError> {
    let values = requests
        .iter()
        .map(|l| match l.decompose()? {
            None => Ok(0.0),
            Some((t, mu, nu)) => Ok(t * d.distance(&mu, &nu)?),
        })
        .collect::<Result<Vec<f64>, EngineError>>()?;
    let mut discrepancies = Vec::new();
    let mut attempts = 0;
    let budget = ATTEMPTS_PER_CONFIG * s.configs.max(1) + 100;
    while discrepancies.len() < s.configs && attempts < budget {
        let mut rng = rng_for(s.seed, attempts as u64);
        attempts += 1;
        if let Some((mu, nu, mu2, nu2)) = balanced_configuration(&mut rng, s.family, d.shape())? {
            discrepancies.push(balanced_terms(d, &mu, &nu, &mu2, &nu2)?.0);
        }
    }
    Ok(NormReport {
        values,
        discrepancies,
        attempts,
    })
}
