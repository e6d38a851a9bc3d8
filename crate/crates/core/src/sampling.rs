//! Seeded random states and observables.
//!
//! Every sampler is driven by a [`ChaCha8Rng`]; [`rng_for`] derives an
//! independent stream per `(seed, index)` so that trial `i` of a batch is the
//! same no matter how many trials run or in which order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::linalg::HermMatrix;
use crate::spaces::{DensityState, Observable, ProbState, Shape, State};

pub fn rng_for(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Dirichlet(1, …, 1) via normalized exponentials.
pub fn random_prob_state<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ProbState {
    let w: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = w.iter().sum();
    ProbState::new(w.iter().map(|x| x / s).collect()).expect("normalized exponentials form a state")
}

/// `A A* / trace(A A*)` for a complex Gaussian `A`.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DensityState {
    let mut g = || -> f64 { StandardNormal.sample(rng) };
    let ar: Vec<f64> = (0..n * n).map(|_| g()).collect();
    let ai: Vec<f64> = (0..n * n).map(|_| g()).collect();
    let mut re = vec![0.0; n * n];
    let mut im = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let (mut r, mut c) = (0.0, 0.0);
            for k in 0..n {
                // A_ik conj(A_jk)
                let (xr, xi) = (ar[i * n + k], ai[i * n + k]);
                let (yr, yi) = (ar[j * n + k], ai[j * n + k]);
                r += xr * yr + xi * yi;
                c += xi * yr - xr * yi;
            }
            re[i * n + j] = r;
            im[i * n + j] = c;
        }
    }
    let h = HermMatrix::from_row_major(n, &re, &im).expect("finite Gaussian product");
    let tr = h.trace();
    DensityState::new(h.scale(1.0 / tr)).expect("Gram matrices are positive")
}

/// A pure state from a normalized complex Gaussian vector.
pub fn random_pure_state<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DensityState {
    let v: Vec<f64> = (0..2 * n).map(|_| StandardNormal.sample(rng)).collect();
    DensityState::pure(&v).expect("Gaussian vector is nonzero almost surely")
}

pub fn random_state<R: Rng + ?Sized>(rng: &mut R, shape: Shape) -> State {
    match shape {
        Shape::Points(n) => State::Prob(random_prob_state(rng, n)),
        Shape::Matrix(n) => State::Density(random_density(rng, n)),
    }
}

/// An extreme point of the state space: a point mass or a pure state.
pub fn random_extreme_state<R: Rng + ?Sized>(rng: &mut R, shape: Shape) -> State {
    match shape {
        Shape::Points(n) => {
            let i = rng.random_range(0..n);
            State::Prob(crate::spaces::point_state(n, i).expect("index in range"))
        }
        Shape::Matrix(n) => State::Density(random_pure_state(rng, n)),
    }
}

/// Observable with coordinates uniform in `[-scale, scale]`.
pub fn random_observable<R: Rng + ?Sized>(rng: &mut R, shape: Shape, scale: f64) -> Observable {
    let coords: Vec<f64> = (0..shape.coord_len())
        .map(|_| rng.random_range(-scale..=scale))
        .collect();
    Observable::from_coords(shape, &coords).expect("finite coordinates")
}

/// Rows `(re, im)` of an anti-Hermitian `m × m` matrix with Gaussian
/// entries; `im` is zero unless `complex`.
pub fn random_anti_hermitian<R: Rng + ?Sized>(rng: &mut R, m: usize, complex: bool) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let mut re = vec![vec![0.0; m]; m];
    let mut im = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in i..m {
            if j > i {
                let x: f64 = StandardNormal.sample(rng);
                re[i][j] = x;
                re[j][i] = -x;
            }
            if complex {
                let y: f64 = StandardNormal.sample(rng);
                im[i][j] = y;
                im[j][i] = y;
            }
        }
    }
    (re, im)
}
