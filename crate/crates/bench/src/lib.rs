//! Seeded inputs shared by the benchmarks.

use rand::Rng;
use statemetric::linalg::LinearProgram;
use statemetric::sampling::{random_anti_hermitian, random_state, rng_for};
use statemetric::{ConductanceGraph, DiracOperator, FiniteSpace, Representation, SeminormSpec, Shape, State, SymMatrix};

/// A dense symmetric matrix with entries in `[-1, 1)`.
pub fn symmetric(n: usize, seed: u64) -> SymMatrix {
    let mut rng = rng_for(seed, n as u64);
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let x: f64 = rng.random_range(-1.0..1.0);
            a[i * n + j] = x;
            a[j * n + i] = x;
        }
    }
    SymMatrix::from_row_major(n, &a).expect("finite entries")
}

/// A bounded LP: `max c·x` over a box intersected with random halfspaces.
pub fn random_lp(vars: usize, rows: usize, seed: u64) -> LinearProgram {
    let mut rng = rng_for(seed, (vars * 1000 + rows) as u64);
    let objective: Vec<f64> = (0..vars).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut constraints = Vec::with_capacity(rows + 2 * vars);
    for i in 0..vars {
        for s in [1.0, -1.0] {
            let mut r = vec![0.0; vars];
            r[i] = s;
            constraints.push((r, 10.0));
        }
    }
    for _ in 0..rows {
        let r: Vec<f64> = (0..vars).map(|_| rng.random_range(-1.0..1.0)).collect();
        constraints.push((r, rng.random_range(0.5..2.0)));
    }
    LinearProgram::with_constraints(objective, constraints).expect("consistent shapes")
}

/// A Dirac seminorm on `n` points from a random real skew-symmetric `D`.
pub fn dirac_on_points(n: usize, seed: u64) -> SeminormSpec {
    let (re, _) = random_anti_hermitian(&mut rng_for(seed, n as u64), n, false);
    SeminormSpec::Dirac(DiracOperator::on_points(&re).expect("skew-symmetric"))
}

/// A Dirac seminorm on `n × n` matrices acting on `ℂⁿ ⊗ ℂ²`.
pub fn dirac_on_matrices(n: usize, seed: u64) -> SeminormSpec {
    let (re, im) = random_anti_hermitian(&mut rng_for(seed, n as u64), 2 * n, true);
    SeminormSpec::Dirac(DiracOperator::new(&re, &im, Representation::Amplified { n }).expect("skew-adjoint"))
}

/// A random connected resistor network: a path plus chords.
pub fn network(n: usize, seed: u64) -> ConductanceGraph {
    let mut rng = rng_for(seed, n as u64);
    let mut edges: Vec<(usize, usize, f64)> = (1..n).map(|b| (b - 1, b, rng.random_range(0.5..2.0))).collect();
    for a in 0..n {
        for b in (a + 2)..n {
            if rng.random_bool(0.3) {
                edges.push((a, b, rng.random_range(0.5..2.0)));
            }
        }
    }
    ConductanceGraph::new(FiniteSpace::numbered(n).expect("n ≥ 2"), edges).expect("connected")
}

/// Two seeded random states.
pub fn state_pair(shape: Shape, seed: u64) -> (State, State) {
    let mut rng = rng_for(seed, 0);
    (random_state(&mut rng, shape), random_state(&mut rng, shape))
}

#[cfg(test)]
mod tests {
    use super::*;
    use statemetric::linalg::{solve_lp, LpOutcome};
    use statemetric::{state_metric, DEFAULT_TOL};

    #[test]
    fn inputs_are_usable() {
        assert_eq!(symmetric(5, 0).n(), 5);
        assert!(matches!(solve_lp(&random_lp(6, 10, 0)).unwrap(), LpOutcome::Optimal { .. }));
        for spec in [dirac_on_points(4, 0), dirac_on_matrices(2, 0)] {
            let (mu, nu) = state_pair(spec.shape(), 1);
            let v = state_metric(&spec, &mu, &nu, DEFAULT_TOL).unwrap();
            assert!(v.gap() <= DEFAULT_TOL);
        }
        assert_eq!(network(6, 0).n(), 6);
    }
}
