//! Resistor networks: Laplacian, gradient and divergence, effective
//! resistance, and the metric on probability measures dual to the
//! resistance seminorm `L(f) = ½‖Δf‖₁`.

use rand::Rng;

use crate::linalg::{laplacian_solve, SymMatrix};
use crate::sampling::rng_for;
use crate::seminorms::{eval, ConductanceGraph, Edge, SeminormError, SeminormSpec};
use crate::spaces::{FiniteSpace, Observable, ProbState, SpaceError};

/// Enumeration guards for [`spanning_tree_resistance`].
pub const MAX_TREE_POINTS: usize = 8;
pub const MAX_TREE_EDGES: usize = 28;

/// An antisymmetric function on directed edges, stored as `ω(a, b)` for each
/// graph edge `(a, b)` with `a < b`.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeFlow {
    values: Vec<f64>,
}

impl EdgeFlow {
    /// One value per edge of `g`, in edge order, oriented from the smaller
    /// endpoint.
    pub fn new(g: &ConductanceGraph, values: Vec<f64>) -> Result<Self, SeminormError> {
        if values.len() != g.edges().len() {
            return Err(SpaceError::Shape(format!(
                "flow has {} values, graph has {} edges",
                values.len(),
                g.edges().len()
            ))
            .into());
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SpaceError::NonFinite.into());
        }
        Ok(Self { values })
    }

    /// From a full `n × n` table, which must be antisymmetric and vanish off
    /// the edges.
    pub fn from_table(g: &ConductanceGraph, table: &[Vec<f64>]) -> Result<Self, SeminormError> {
        let n = g.n();
        if table.len() != n || table.iter().any(|r| r.len() != n) {
            return Err(SpaceError::Shape(format!("flow table must be {n}x{n}")).into());
        }
        for x in 0..n {
            for y in 0..n {
                if table[x][y] != -table[y][x] {
                    return Err(SeminormError::InvalidGraph(format!(
                        "flow is not antisymmetric at ({x}, {y})"
                    )));
                }
                if table[x][y] != 0.0 && g.conductance(x, y) == 0.0 {
                    return Err(SeminormError::InvalidGraph(format!(
                        "flow is nonzero on the non-edge ({x}, {y})"
                    )));
                }
            }
        }
        Self::new(g, g.edges().iter().map(|e| table[e.a][e.b]).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `ω(x, y)`; zero off the edges.
    pub fn get(&self, g: &ConductanceGraph, x: usize, y: usize) -> f64 {
        g.edges()
            .iter()
            .zip(&self.values)
            .find_map(|(e, v)| match (e.a == x && e.b == y, e.a == y && e.b == x) {
                (true, _) => Some(*v),
                (_, true) => Some(-*v),
                _ => None,
            })
            .unwrap_or(0.0)
    }

    /// `(df)(x, y) = f(x) − f(y)`.
    pub fn differential(g: &ConductanceGraph, f: &[f64]) -> Self {
        Self {
            values: g.edges().iter().map(|e| f[e.a] - f[e.b]).collect(),
        }
    }
}

pub fn laplacian(g: &ConductanceGraph) -> SymMatrix {
    g.laplacian()
}

/// `(∇f)(x, y) = (f(x) − f(y)) c_xy`.
pub fn gradient(g: &ConductanceGraph, f: &[f64]) -> Result<EdgeFlow, SeminormError> {
    check_len(g, f)?;
    EdgeFlow::new(
        g,
        g.edges().iter().map(|e| (f[e.a] - f[e.b]) / e.weight).collect(),
    )
}

/// `div(ω)(x) = Σ_y ω(x, y)`.
pub fn divergence(g: &ConductanceGraph, w: &EdgeFlow) -> Vec<f64> {
    let mut out = vec![0.0; g.n()];
    for (e, v) in g.edges().iter().zip(w.values()) {
        out[e.a] += v;
        out[e.b] -= v;
    }
    out
}

/// `N(ω) = ½ Σ_x |Σ_y ω(x, y) c_xy|`.
pub fn flow_seminorm(g: &ConductanceGraph, w: &EdgeFlow) -> f64 {
    let mut out = vec![0.0; g.n()];
    for (e, v) in g.edges().iter().zip(w.values()) {
        let c = v / e.weight;
        out[e.a] += c;
        out[e.b] -= c;
    }
    0.5 * out.iter().map(|x| x.abs()).sum::<f64>()
}

fn check_len(g: &ConductanceGraph, f: &[f64]) -> Result<(), SeminormError> {
    if f.len() != g.n() {
        return Err(SpaceError::Shape(format!("{} values on a graph with {} points", f.len(), g.n())).into());
    }
    Ok(())
}

fn check_pair(g: &ConductanceGraph, x: usize, y: usize) -> Result<(), SeminormError> {
    let n = g.n();
    for i in [x, y] {
        if i >= n {
            return Err(SpaceError::IndexOutOfRange { index: i, n }.into());
        }
    }
    if x == y {
        return Err(SeminormError::InvalidGraph("resistance needs two distinct points".into()));
    }
    Ok(())
}

/// `f(x) − f(y)` for the potential `f` with `Δf = δx − δy`.
pub fn effective_resistance(g: &ConductanceGraph, x: usize, y: usize) -> Result<f64, SeminormError> {
    check_pair(g, x, y)?;
    let mut rhs = vec![0.0; g.n()];
    rhs[x] = 1.0;
    rhs[y] = -1.0;
    let f = laplacian_solve(&g.laplacian(), &rhs)?;
    Ok(f[x] - f[y])
}

/// All-pairs effective resistances.
pub fn resistance_table(g: &ConductanceGraph) -> Result<Vec<Vec<f64>>, SeminormError> {
    let n = g.n();
    let mut t = vec![vec![0.0; n]; n];
    for x in 0..n {
        for y in (x + 1)..n {
            let r = effective_resistance(g, x, y)?;
            t[x][y] = r;
            t[y][x] = r;
        }
    }
    Ok(t)
}

/// `2‖Δ⁻¹(μ − ν)‖∼∞ = max f − min f` where `Δf = μ − ν`.
pub fn resistance_metric(g: &ConductanceGraph, mu: &ProbState, nu: &ProbState) -> Result<f64, SeminormError> {
    if mu.len() != g.n() || nu.len() != g.n() {
        return Err(SpaceError::Shape(format!(
            "states on {} and {} points, graph has {}",
            mu.len(),
            nu.len(),
            g.n()
        ))
        .into());
    }
    let rhs: Vec<f64> = mu.weights().iter().zip(nu.weights()).map(|(a, b)| a - b).collect();
    let f = laplacian_solve(&g.laplacian(), &rhs)?;
    let max = f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = f.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(max - min)
}

/// Effective resistance by the matrix-tree identity, enumerating edge
/// subsets: the weight of spanning 2-forests separating `x` from `y` over
/// the weight of spanning trees, each weighted by the product of
/// conductances.
pub fn spanning_tree_resistance(g: &ConductanceGraph, x: usize, y: usize) -> Result<f64, SeminormError> {
    check_pair(g, x, y)?;
    Ok(spanning_tree_table(g)?[x][y])
}

/// [`spanning_tree_resistance`] for all pairs from one enumeration.
pub fn spanning_tree_table(g: &ConductanceGraph) -> Result<Vec<Vec<f64>>, SeminormError> {
    let n = g.n();
    let edges = g.edges();
    if n > MAX_TREE_POINTS || edges.len() > MAX_TREE_EDGES {
        return Err(SeminormError::TooLarge { n, max: MAX_TREE_POINTS });
    }
    if n < 2 {
        return Err(SpaceError::TooFewPoints(n).into());
    }
    let mut trees = 0.0;
    let mut forests = vec![vec![0.0; n]; n];
    for k in [n - 1, n - 2] {
        for mask in subsets(edges.len(), k) {
            let chosen: Vec<&Edge> = edges
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, e)| e)
                .collect();
            let Some(root) = acyclic_components(n, &chosen) else { continue };
            let weight: f64 = chosen.iter().map(|e| 1.0 / e.weight).product();
            if k + 1 == n {
                trees += weight;
                continue;
            }
            for a in 0..n {
                for b in 0..n {
                    if root[a] != root[b] {
                        forests[a][b] += weight;
                    }
                }
            }
        }
    }
    Ok(forests.into_iter().map(|row| row.into_iter().map(|f| f / trees).collect()).collect())
}

/// Bit masks over `m` items with exactly `k` bits set, in increasing order.
fn subsets(m: usize, k: usize) -> impl Iterator<Item = u64> {
    let end = 1u64 << m;
    let first = if k == 0 { 0 } else { (1u64 << k) - 1 };
    let mut next = Some(first).filter(|&v| v < end || (k == 0 && m == 0));
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 {
            None
        } else {
            // Gosper's hack.
            let c = cur & cur.wrapping_neg();
            let r = cur + c;
            Some((((r ^ cur) >> 2) / c) | r).filter(|&v| v < end)
        };
        Some(cur)
    })
}

/// Component representative of each point, or `None` if the edges contain
/// a cycle.
fn acyclic_components(n: usize, edges: &[&Edge]) -> Option<Vec<usize>> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &[usize], mut x: usize) -> usize {
        while p[x] != x {
            x = p[x];
        }
        x
    }
    for e in edges {
        let (ra, rb) = (find(&parent, e.a), find(&parent, e.b));
        if ra == rb {
            return None;
        }
        parent[ra] = rb;
    }
    Some((0..n).map(|x| find(&parent, x)).collect())
}

/// A network and two observables violating the Leibniz inequality
/// `L(fg) ≤ L(f)‖g‖∞ + ‖f‖∞L(g)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LeibnizWitness {
    pub graph: ConductanceGraph,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
}

impl LeibnizWitness {
    /// `L(fg) − L(f)‖g‖∞ − ‖f‖∞L(g)`.
    pub fn margin(&self) -> Result<f64, SeminormError> {
        leibniz_margin(&self.graph, &self.f, &self.g)
    }
}

fn leibniz_margin(graph: &ConductanceGraph, f: &[f64], g: &[f64]) -> Result<f64, SeminormError> {
    let spec = SeminormSpec::Resistance(graph.clone());
    let l = |v: &[f64]| -> Result<f64, SeminormError> { eval(&spec, &Observable::points(v)?) };
    let sup = |v: &[f64]| v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let fg: Vec<f64> = f.iter().zip(g).map(|(a, b)| a * b).collect();
    Ok(l(&fg)? - l(f)? * sup(g) - sup(f) * l(g)?)
}

/// Path 1–2–3–4 with resistances 1, 2, 1 and `f = g = (−2, −1, 1, 2)`:
/// `L(f²) = 6` while `L(f) = 1` and `‖f‖∞ = 2`.
pub fn leibniz_witness() -> LeibnizWitness {
    let graph = ConductanceGraph::new(
        FiniteSpace::numbered(4).expect("four labels"),
        [(0, 1, 1.0), (1, 2, 2.0), (2, 3, 1.0)],
    )
    .expect("a path is connected");
    let f = vec![-2.0, -1.0, 1.0, 2.0];
    LeibnizWitness {
        graph,
        g: f.clone(),
        f,
    }
}

/// Seeded scan over random connected networks on 3 to 6 points with
/// resistances in `{0.5, 1, 2}`. `f` is the potential of a unit current
/// between two random points and `g` is `f` or a random function; returns
/// the first pair whose Leibniz margin exceeds `1e-9`.
pub fn search_leibniz_failure(seed: u64, trials: usize) -> Option<LeibnizWitness> {
    for t in 0..trials {
        let mut rng = rng_for(seed, t as u64);
        let n = rng.random_range(3..=6);
        let resist = |rng: &mut rand_chacha::ChaCha8Rng| [0.5, 1.0, 2.0][rng.random_range(0..3)];
        let mut edges: Vec<(usize, usize, f64)> = (0..n - 1).map(|i| (i, i + 1, resist(&mut rng))).collect();
        for a in 0..n {
            for b in (a + 2)..n {
                if rng.random_bool(0.3) {
                    edges.push((a, b, resist(&mut rng)));
                }
            }
        }
        let graph = ConductanceGraph::new(FiniteSpace::numbered(n).ok()?, edges).ok()?;
        // Potentials of unit currents have L = 1 but large squares.
        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        if a == b {
            continue;
        }
        let mut rhs = vec![0.0; n];
        rhs[a] = 1.0;
        rhs[b] = -1.0;
        let f = laplacian_solve(&graph.laplacian(), &rhs).ok()?;
        let g = if rng.random_bool(0.5) {
            f.clone()
        } else {
            (0..n).map(|_| rng.random_range(-2.0..=2.0)).collect()
        };
        if leibniz_margin(&graph, &f, &g).ok()? > 1e-9 {
            return Some(LeibnizWitness { graph, f, g });
        }
    }
    None
}
