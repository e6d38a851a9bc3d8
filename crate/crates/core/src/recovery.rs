//! Recovering a seminorm from its metric.
//!
//! `L^e(f)` is the Lipschitz constant of `f` with respect to `ρ_L` restricted
//! to point masses. `L_{ρ_L}(f)` takes the same supremum over all pairs of
//! states; it is estimated from below by sampling.

use crate::metric_engine::{metric_table, state_metric, EngineError, MetricTable, DEFAULT_TOL, TABLE_TOL};
use crate::sampling::{random_extreme_state, random_state, rng_for};
use crate::seminorms::{eval, SeminormError, SeminormSpec};
use crate::spaces::{difference, pair, point_state, CommObservable, Observable, Shape, State};

pub const REFINE_STEPS: usize = 50;
pub const REFINE_STEP: f64 = 0.1;
pub const REFINE_DECAY: f64 = 0.5;
/// Relative gap `L^e < L − 1e-6` that flags extreme points as insufficient.
pub const EXTREME_GAP: f64 = 1e-6;

/// Seed offset for refinement streams, kept apart from the sampling streams.
const REFINE_STREAM: u64 = 0x5e_ed0f_2ef1;

/// `max |f(x) − f(y)| / d(x, y)` over point pairs.
pub fn extreme_seminorm(spec: &SeminormSpec, f: &CommObservable, table: &MetricTable) -> Result<f64, EngineError> {
    let n = table.len();
    if spec.shape() != Shape::Points(n) || f.len() != n {
        return Err(SeminormError::FlavorMismatch {
            spec: spec.shape(),
            observable: Shape::Points(f.len()),
        }
        .into());
    }
    let v = f.values();
    let mut best = 0.0_f64;
    for x in 0..n {
        for y in (x + 1)..n {
            best = best.max((v[x] - v[y]).abs() / table.get(x, y));
        }
    }
    Ok(best)
}

struct Search<'a> {
    spec: &'a SeminormSpec,
    /// `f` shifted so that constants become exactly zero.
    gauged: Observable,
}

impl Search<'_> {
    /// `|pair(μ − ν, f)| / ρ⁺(μ, ν)` with `ρ⁺` the certified upper bound, so
    /// the ratio never overstates the true one.
    fn ratio(&self, mu: &State, nu: &State) -> Result<f64, EngineError> {
        let num = pair(&difference(mu, nu)?, &self.gauged)?.abs();
        if num == 0.0 {
            return Ok(0.0);
        }
        let rho = state_metric(self.spec, mu, nu, DEFAULT_TOL)?.upper;
        Ok(if rho > 0.0 { num / rho } else { 0.0 })
    }

    /// Hill climb: move one endpoint toward a random extreme state, shrinking
    /// the step after each rejected move.
    fn refine(&self, mu: &State, nu: &State, start: f64, stream: u64) -> Result<f64, EngineError> {
        let shape = self.spec.shape();
        let mut rng = rng_for(REFINE_STREAM, stream);
        let (mut mu, mut nu, mut best) = (mu.clone(), nu.clone(), start);
        let mut step = REFINE_STEP;
        for k in 0..REFINE_STEPS {
            let target = random_extreme_state(&mut rng, shape);
            let (cm, cn) = if k % 2 == 0 {
                (target.mix(&mu, step)?, nu.clone())
            } else {
                (mu.clone(), target.mix(&nu, step)?)
            };
            let r = self.ratio(&cm, &cn)?;
            if r > best {
                (mu, nu, best) = (cm, cn, r);
            } else {
                step *= REFINE_DECAY;
            }
        }
        Ok(best)
    }
}

/// Lower bound on `L_{ρ_L}(f) = sup |μ(f) − ν(f)| / ρ_L(μ, ν)`.
///
/// Scans all point-mass pairs (functions on points only), then `samples`
/// seeded random pairs; every pair that raises the running maximum is then
/// refined by a short hill climb. Pair `i` and its refinement depend only on
/// `(seed, i)`, so the result is nondecreasing in `samples`.
pub fn sampled_recovered_seminorm(
    spec: &SeminormSpec,
    f: &Observable,
    samples: usize,
    seed: u64,
) -> Result<f64, EngineError> {
    let shape = spec.shape();
    if f.shape() != shape {
        return Err(SeminormError::FlavorMismatch {
            spec: shape,
            observable: f.shape(),
        }
        .into());
    }
    let corner = match f {
        Observable::Comm(c) => c.values()[c.len() - 1],
        Observable::Mat(a) => {
            let n = a.matrix().n();
            a.matrix().re(n - 1, n - 1)
        }
    };
    let search = Search {
        spec,
        gauged: f.shift(-corner),
    };
    let mut best = 0.0_f64;
    let mut records: Vec<(State, State, f64)> = Vec::new();

    if let (Shape::Points(n), Observable::Comm(c)) = (shape, f) {
        let table = metric_table(spec, TABLE_TOL)?;
        let v = c.values();
        for x in 0..n {
            for y in (x + 1)..n {
                let r = (v[x] - v[y]).abs() / table.get(x, y);
                if r > best {
                    best = r;
                    records.push((State::Prob(point_state(n, x)?), State::Prob(point_state(n, y)?), r));
                }
            }
        }
    }
    for i in 0..samples {
        let mut rng = rng_for(seed, i as u64);
        let mu = random_state(&mut rng, shape);
        let nu = random_state(&mut rng, shape);
        let r = search.ratio(&mu, &nu)?;
        if r > best {
            best = r;
            records.push((mu, nu, r));
        }
    }
    let mut out = best;
    for (k, (mu, nu, r)) in records.iter().enumerate() {
        let stream = seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(k as u64);
        out = out.max(search.refine(mu, nu, *r, stream)?);
    }
    Ok(out)
}

/// One observable's row in a [`RecoveryReport`].
#[derive(Clone, Debug, PartialEq)]
pub struct RecoveryRecord {
    pub seminorm: f64,
    pub extreme: f64,
    pub sampled: f64,
    /// `L^e < L − 1e-6`.
    pub extreme_insufficient: bool,
    /// Sampled `L_{ρ_L} ≥ L − tol_report`.
    pub recovery_witnessed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecoveryReport {
    pub records: Vec<RecoveryRecord>,
    pub samples: usize,
    pub seed: u64,
    pub tol_report: f64,
}

/// `L`, `L^e` and sampled `L_{ρ_L}` for each observable on points.
pub fn compare(
    spec: &SeminormSpec,
    observables: &[CommObservable],
    samples: usize,
    seed: u64,
    tol_report: f64,
) -> Result<RecoveryReport, EngineError> {
    let mut records = Vec::with_capacity(observables.len());
    if !observables.is_empty() {
        let table = metric_table(spec, TABLE_TOL)?;
        for f in observables {
            let obs = Observable::Comm(f.clone());
            let l = eval(spec, &obs)?;
            let extreme = extreme_seminorm(spec, f, &table)?;
            let sampled = sampled_recovered_seminorm(spec, &obs, samples, seed)?;
            records.push(RecoveryRecord {
                seminorm: l,
                extreme,
                sampled,
                extreme_insufficient: extreme < l - EXTREME_GAP,
                recovery_witnessed: sampled >= l - tol_report,
            });
        }
    }
    Ok(RecoveryReport {
        records,
        samples,
        seed,
        tol_report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seminorms::{CostGraph, DiracOperator};
    use crate::spaces::FiniteSpace;

    fn example71() -> SeminormSpec {
        SeminormSpec::Dirac(
            DiracOperator::on_points(&[vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 2.0], vec![-1.0, -2.0, 0.0]]).unwrap(),
        )
    }

    fn comm(v: &[f64]) -> CommObservable {
        CommObservable::new(v.to_vec()).unwrap()
    }

    #[test]
    fn extreme_examples() {
        let spec = example71();
        let t = metric_table(&spec, TABLE_TOL).unwrap();
        assert!((extreme_seminorm(&spec, &comm(&[1.0, 0.0, 0.0]), &t).unwrap() - 1.0).abs() < 1e-9);
        assert!((extreme_seminorm(&spec, &comm(&[1.0, 1.0, 0.0]), &t).unwrap() - 2.0).abs() < 1e-9);
        assert_eq!(extreme_seminorm(&spec, &comm(&[2.0, 2.0, 2.0]), &t).unwrap(), 0.0);
        assert!(extreme_seminorm(&spec, &comm(&[1.0, 0.0]), &t).is_err());
    }

    #[test]
    fn sampled_examples() {
        let spec = example71();
        let join = Observable::points(&[1.0, 1.0, 0.0]).unwrap();
        let v = sampled_recovered_seminorm(&spec, &join, 300, 0).unwrap();
        assert!(v > 2.0 && v <= 5f64.sqrt() + 1e-9, "{v}");
        let c = Observable::points(&[3.0, 3.0, 3.0]).unwrap();
        assert_eq!(sampled_recovered_seminorm(&spec, &c, 50, 0).unwrap(), 0.0);
        let edge = SeminormSpec::GraphLip(CostGraph::new(FiniteSpace::numbered(2).unwrap(), [(0, 1, 2.0)]).unwrap());
        let f = Observable::points(&[1.0, 0.0]).unwrap();
        assert!((sampled_recovered_seminorm(&edge, &f, 20, 0).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn monotone_in_samples() {
        let spec = example71();
        let f = Observable::points(&[0.3, 1.0, -0.4]).unwrap();
        let mut last = 0.0;
        for samples in [0, 1, 5, 20, 60] {
            let v = sampled_recovered_seminorm(&spec, &f, samples, 3).unwrap();
            assert!(v >= last, "{samples}: {v} < {last}");
            last = v;
        }
    }

    #[test]
    fn matrix_flavor_sampling() {
        let spec = SeminormSpec::Quotient(Shape::Matrix(2));
        let a = Observable::matrix(crate::linalg::HermMatrix::diag(&[1.0, -1.0]).unwrap());
        let v = sampled_recovered_seminorm(&spec, &a, 100, 0).unwrap();
        assert!(v > 0.5 && v <= 1.0 + 1e-9);
    }

    #[test]
    fn compare_examples() {
        let spec = example71();
        let suite = [comm(&[1.0, 0.0, 0.0]), comm(&[0.0, 1.0, 0.0]), comm(&[1.0, 1.0, 0.0])];
        let report = compare(&spec, &suite, 2000, 0, 0.05).unwrap();
        assert_eq!(report.records.len(), 3);
        assert!(!report.records[0].extreme_insufficient);
        assert!(!report.records[1].extreme_insufficient);
        assert!(report.records[2].extreme_insufficient);
        assert!(report.records.iter().all(|r| r.recovery_witnessed));
        for r in &report.records {
            assert!(r.extreme <= r.sampled + 1e-9 && r.sampled <= r.seminorm + 1e-9);
        }
        assert!(compare(&spec, &[], 10, 0, 0.05).unwrap().records.is_empty());
    }

    #[test]
    fn quotient_sandwich() {
        let spec = SeminormSpec::Quotient(Shape::Points(3));
        let suite = [comm(&[1.0, 0.0, 0.0]), comm(&[0.2, -1.0, 0.7]), comm(&[5.0, 5.0, 5.0])];
        let report = compare(&spec, &suite, 200, 1, 0.05).unwrap();
        for r in &report.records {
            assert!(r.extreme <= r.seminorm + 1e-9);
            assert!(r.recovery_witnessed);
        }
    }
}
