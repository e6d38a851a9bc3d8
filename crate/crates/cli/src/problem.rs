//! Problem files: a space, a seminorm, named states and observables, and a
//! list of tasks.

use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{Map, Value};

use statemetric::{
    ConductanceGraph, CostGraph, DensityState, DiracOperator, FiniteSpace, HermMatrix, MetricTable, Observable,
    ProbState, Representation, SeminormSpec, Shape, State,
};

use crate::CliError;

pub const SCHEMA: &str = "statemetric/1";

const PREDICATES: [&str; 8] = [
    "lattice",
    "weak-lattice",
    "leibniz",
    "metric-axioms",
    "convex",
    "midpoint-balanced",
    "midpoint-concave",
    "linear",
];

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    schema: String,
    space: Value,
    seminorm: Value,
    #[serde(default)]
    states: Map<String, Value>,
    #[serde(default)]
    observables: Map<String, Value>,
    #[serde(default)]
    tasks: Vec<Value>,
}

#[derive(Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum RawSpace {
    Points { labels: Vec<String> },
    Matrix { n: usize },
}

#[derive(Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum RawSeminorm {
    Dirac {
        re: Vec<Vec<f64>>,
        im: Option<Vec<Vec<f64>>>,
        rep: Option<RawRep>,
        points: Option<Vec<String>>,
    },
    GraphLip {
        edges: Vec<CostEdge>,
    },
    Resistance {
        edges: Vec<ResistorEdge>,
    },
    Quotient {},
    MetricLip {
        labels: Option<Vec<String>>,
        rows: Vec<Vec<f64>>,
    },
}

#[derive(Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
enum RawRep {
    Diagonal,
    Identity,
    Amplified,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CostEdge {
    from: String,
    to: String,
    cost: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ResistorEdge {
    from: String,
    to: String,
    resistance: f64,
}

#[derive(Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum RawState {
    Point(String),
    Weights(Vec<f64>),
    Density(RawMatrix),
    Pure(RawVector),
}

#[derive(Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum RawObservable {
    Values(Vec<f64>),
    Matrix(RawMatrix),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMatrix {
    re: Vec<Vec<f64>>,
    im: Option<Vec<Vec<f64>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVector {
    re: Vec<f64>,
    im: Option<Vec<f64>>,
}

/// One requested computation. Name lists left empty mean "everything
/// declared".
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Task {
    Eval {
        #[serde(default)]
        observables: Vec<String>,
    },
    Metric {
        #[serde(default)]
        pairs: Vec<(String, String)>,
    },
    Table {},
    Mk {
        #[serde(default)]
        pairs: Vec<(String, String)>,
    },
    Recover {
        #[serde(default)]
        observables: Vec<String>,
        #[serde(default = "default_report_tol")]
        tol_report: f64,
    },
    Resist {
        #[serde(default)]
        pairs: Vec<(String, String)>,
    },
    Check {
        predicate: String,
        #[serde(default)]
        observables: Vec<String>,
        #[serde(default)]
        pairs: Vec<(String, String)>,
    },
}

fn default_report_tol() -> f64 {
    1e-3
}

impl Task {
    pub fn op(&self) -> &'static str {
        match self {
            Task::Eval { .. } => "eval",
            Task::Metric { .. } => "metric",
            Task::Table {} => "table",
            Task::Mk { .. } => "mk",
            Task::Recover { .. } => "recover",
            Task::Resist { .. } => "resist",
            Task::Check { .. } => "check",
        }
    }
}

/// A validated problem file.
#[derive(Clone, Debug)]
pub struct Problem {
    pub labels: Vec<String>,
    pub spec: SeminormSpec,
    pub states: Vec<(String, State)>,
    pub observables: Vec<(String, Observable)>,
    pub tasks: Vec<Task>,
}

impl Problem {
    pub fn shape(&self) -> Shape {
        self.spec.shape()
    }

    pub fn state(&self, name: &str) -> &State {
        &self.states.iter().find(|(n, _)| n == name).expect("validated reference").1
    }

    pub fn observable(&self, name: &str) -> &Observable {
        &self.observables.iter().find(|(n, _)| n == name).expect("validated reference").1
    }
}

fn malformed(field: impl Into<String>, message: impl std::fmt::Display) -> CliError {
    CliError::Malformed {
        field: field.into(),
        message: message.to_string(),
    }
}

fn typed<T: DeserializeOwned>(field: &str, value: Value) -> Result<T, CliError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let inner = e.path().to_string();
        let path = if inner == "." || inner.is_empty() {
            field.to_string()
        } else if field.is_empty() {
            inner
        } else {
            format!("{field}.{inner}")
        };
        malformed(path, e.inner())
    })
}

/// Deserializes an object whose variant is named by its `tag` field.
fn tagged<T: DeserializeOwned>(field: &str, value: Value, tag: &str) -> Result<T, CliError> {
    let Value::Object(mut body) = value else {
        return Err(malformed(field, "expected an object"));
    };
    let kind = match body.remove(tag) {
        Some(Value::String(k)) => k,
        Some(_) => return Err(malformed(format!("{field}.{tag}"), "expected a string")),
        None => return Err(malformed(field, format!("missing field `{tag}`"))),
    };
    let mut wrapped = Map::new();
    wrapped.insert(kind, Value::Object(body));
    serde_path_to_error::deserialize(Value::Object(wrapped)).map_err(|e| {
        let segments: Vec<String> = e.path().iter().skip(1).map(|s| s.to_string()).collect();
        let mut path = field.to_string();
        for s in segments {
            if !s.starts_with('[') {
                path.push('.');
            }
            path.push_str(&s);
        }
        malformed(path, e.inner())
    })
}

/// Parses and validates a problem document.
pub fn parse(text: &str) -> Result<Problem, CliError> {
    let value: Value = serde_json::from_str(text).map_err(|e| malformed("<document>", e))?;
    let Value::Object(top) = value else {
        return Err(malformed("<document>", "expected a JSON object"));
    };
    for field in ["schema", "space", "seminorm"] {
        if !top.contains_key(field) {
            return Err(malformed(field, "required field is missing"));
        }
    }
    let raw: RawFile = typed("", Value::Object(top))?;
    if raw.schema != SCHEMA {
        return Err(malformed("schema", format!("expected {SCHEMA:?}, got {:?}", raw.schema)));
    }
    let (labels, shape) = match tagged::<RawSpace>("space", raw.space, "kind")? {
        RawSpace::Points { labels } => {
            FiniteSpace::new(labels.clone()).map_err(|e| malformed("space.labels", e))?;
            let n = labels.len();
            (labels, Shape::Points(n))
        }
        RawSpace::Matrix { n } => {
            if n < 2 {
                return Err(malformed("space.n", format!("matrix size must be at least 2, got {n}")));
            }
            (Vec::new(), Shape::Matrix(n))
        }
    };
    let spec = build_spec(tagged("seminorm", raw.seminorm, "kind")?, &labels, shape)?;

    let mut states = Vec::with_capacity(raw.states.len());
    for (name, v) in raw.states {
        let field = format!("states.{name}");
        let s = build_state(&field, typed(&field, v)?, &labels, shape)?;
        states.push((name, s));
    }
    let mut observables = Vec::with_capacity(raw.observables.len());
    for (name, v) in raw.observables {
        let field = format!("observables.{name}");
        let o = build_observable(&field, typed(&field, v)?, shape)?;
        observables.push((name, o));
    }
    let mut tasks = Vec::with_capacity(raw.tasks.len());
    for (i, v) in raw.tasks.into_iter().enumerate() {
        let field = format!("tasks[{i}]");
        let t: Task = tagged(&field, v, "op")?;
        check_task(&field, &t, &states, &observables)?;
        tasks.push(t);
    }
    Ok(Problem {
        labels,
        spec,
        states,
        observables,
        tasks,
    })
}

fn point_index(field: &str, labels: &[String], label: &str) -> Result<usize, CliError> {
    labels
        .iter()
        .position(|l| l == label)
        .ok_or_else(|| malformed(field, format!("unknown point {label:?}")))
}

fn require_points(field: &str, shape: Shape) -> Result<usize, CliError> {
    match shape {
        Shape::Points(n) => Ok(n),
        Shape::Matrix(_) => Err(malformed(field, "this seminorm needs a space of points")),
    }
}

fn build_spec(raw: RawSeminorm, labels: &[String], shape: Shape) -> Result<SeminormSpec, CliError> {
    let space = || FiniteSpace::new(labels.to_vec()).expect("validated labels");
    match raw {
        RawSeminorm::Dirac { re, im, rep, points } => {
            let m = re.len();
            let im = im.unwrap_or_else(|| vec![vec![0.0; m]; m]);
            let rep = match (shape, rep.unwrap_or(match shape {
                Shape::Points(_) => RawRep::Diagonal,
                Shape::Matrix(_) => RawRep::Amplified,
            })) {
                (Shape::Points(n), RawRep::Diagonal) => {
                    let points = match &points {
                        Some(p) => p
                            .iter()
                            .enumerate()
                            .map(|(k, l)| point_index(&format!("seminorm.points[{k}]"), labels, l))
                            .collect::<Result<Vec<_>, _>>()?,
                        None => (0..m).collect(),
                    };
                    Representation::Diagonal { points, n_points: n }
                }
                (Shape::Matrix(_), RawRep::Identity) => Representation::Identity,
                (Shape::Matrix(n), RawRep::Amplified) => Representation::Amplified { n },
                (Shape::Points(_), _) => {
                    return Err(malformed("seminorm.rep", "functions on points act diagonally"))
                }
                (Shape::Matrix(_), RawRep::Diagonal) => {
                    return Err(malformed("seminorm.rep", "matrices act by identity or amplified"))
                }
            };
            if points.is_some() && !matches!(rep, Representation::Diagonal { .. }) {
                return Err(malformed("seminorm.points", "only the diagonal representation takes points"));
            }
            let d = DiracOperator::new(&re, &im, rep).map_err(|e| malformed("seminorm", e))?;
            Ok(SeminormSpec::Dirac(d))
        }
        RawSeminorm::GraphLip { edges } => {
            require_points("seminorm", shape)?;
            let mut list = Vec::with_capacity(edges.len());
            for (k, e) in edges.iter().enumerate() {
                let field = format!("seminorm.edges[{k}]");
                list.push((
                    point_index(&field, labels, &e.from)?,
                    point_index(&field, labels, &e.to)?,
                    e.cost,
                ));
            }
            let g = CostGraph::new(space(), list).map_err(|e| malformed("seminorm.edges", e))?;
            Ok(SeminormSpec::GraphLip(g))
        }
        RawSeminorm::Resistance { edges } => {
            require_points("seminorm", shape)?;
            let mut list = Vec::with_capacity(edges.len());
            for (k, e) in edges.iter().enumerate() {
                let field = format!("seminorm.edges[{k}]");
                list.push((
                    point_index(&field, labels, &e.from)?,
                    point_index(&field, labels, &e.to)?,
                    e.resistance,
                ));
            }
            let g = ConductanceGraph::new(space(), list).map_err(|e| malformed("seminorm.edges", e))?;
            Ok(SeminormSpec::Resistance(g))
        }
        RawSeminorm::Quotient {} => Ok(SeminormSpec::Quotient(shape)),
        RawSeminorm::MetricLip { labels: given, rows } => {
            require_points("seminorm", shape)?;
            if let Some(given) = given {
                if given != labels {
                    return Err(malformed("seminorm.labels", "must match space.labels"));
                }
            }
            let t = MetricTable::new(labels.to_vec(), rows).map_err(|e| malformed("seminorm.rows", e))?;
            Ok(SeminormSpec::MetricLip(t))
        }
    }
}

fn square(field: &str, re: &[Vec<f64>], im: Option<Vec<Vec<f64>>>, n: usize) -> Result<HermMatrix, CliError> {
    let im = im.unwrap_or_else(|| vec![vec![0.0; n]; n]);
    if re.len() != n || re.iter().chain(&im).any(|r| r.len() != n) || im.len() != n {
        return Err(malformed(field, format!("expected {n}x{n} matrices")));
    }
    HermMatrix::from_parts(re, &im).map_err(|e| malformed(field, e))
}

fn build_state(field: &str, raw: RawState, labels: &[String], shape: Shape) -> Result<State, CliError> {
    match (raw, shape) {
        (RawState::Point(label), Shape::Points(n)) => {
            let i = point_index(&format!("{field}.point"), labels, &label)?;
            let mut w = vec![0.0; n];
            w[i] = 1.0;
            Ok(State::Prob(ProbState::new(w).expect("point mass")))
        }
        (RawState::Weights(w), Shape::Points(n)) => {
            if w.len() != n {
                return Err(malformed(format!("{field}.weights"), format!("expected {n} weights, got {}", w.len())));
            }
            ProbState::new(w)
                .map(State::Prob)
                .map_err(|e| malformed(format!("{field}.weights"), e))
        }
        (RawState::Density(m), Shape::Matrix(n)) => {
            let field = format!("{field}.density");
            let h = square(&field, &m.re, m.im, n)?;
            DensityState::new(h).map(State::Density).map_err(|e| malformed(field, e))
        }
        (RawState::Pure(v), Shape::Matrix(n)) => {
            let field = format!("{field}.pure");
            let im = v.im.unwrap_or_else(|| vec![0.0; n]);
            if v.re.len() != n || im.len() != n {
                return Err(malformed(field, format!("expected vectors of length {n}")));
            }
            let stacked: Vec<f64> = v.re.iter().chain(&im).copied().collect();
            DensityState::pure(&stacked).map(State::Density).map_err(|e| malformed(field, e))
        }
        (_, Shape::Points(_)) => Err(malformed(field, "states on points are given by point or weights")),
        (_, Shape::Matrix(_)) => Err(malformed(field, "states on matrices are given by density or pure")),
    }
}

fn build_observable(field: &str, raw: RawObservable, shape: Shape) -> Result<Observable, CliError> {
    match (raw, shape) {
        (RawObservable::Values(v), Shape::Points(n)) => {
            if v.len() != n {
                return Err(malformed(format!("{field}.values"), format!("expected {n} values, got {}", v.len())));
            }
            Observable::points(&v).map_err(|e| malformed(format!("{field}.values"), e))
        }
        (RawObservable::Matrix(m), Shape::Matrix(n)) => {
            Ok(Observable::matrix(square(&format!("{field}.matrix"), &m.re, m.im, n)?))
        }
        (_, Shape::Points(_)) => Err(malformed(field, "observables on points are given by values")),
        (_, Shape::Matrix(_)) => Err(malformed(field, "observables on matrices are given by matrix")),
    }
}

fn check_task(
    field: &str,
    task: &Task,
    states: &[(String, State)],
    observables: &[(String, Observable)],
) -> Result<(), CliError> {
    let has_state = |n: &str| states.iter().any(|(s, _)| s == n);
    let has_obs = |n: &str| observables.iter().any(|(s, _)| s == n);
    let state_pairs = |pairs: &[(String, String)]| {
        for (k, (a, b)) in pairs.iter().enumerate() {
            for name in [a, b] {
                if !has_state(name) {
                    return Err(malformed(format!("{field}.pairs[{k}]"), format!("unknown state {name:?}")));
                }
            }
        }
        Ok(())
    };
    let obs_list = |list: &[String]| {
        for (k, name) in list.iter().enumerate() {
            if !has_obs(name) {
                return Err(malformed(format!("{field}.observables[{k}]"), format!("unknown observable {name:?}")));
            }
        }
        Ok(())
    };
    match task {
        Task::Eval { observables } | Task::Recover { observables, .. } => obs_list(observables),
        Task::Metric { pairs } | Task::Mk { pairs } | Task::Resist { pairs } => state_pairs(pairs),
        Task::Table {} => Ok(()),
        Task::Check {
            predicate,
            observables,
            pairs,
        } => {
            if !PREDICATES.contains(&predicate.as_str()) {
                return Err(malformed(format!("{field}.predicate"), format!("unknown predicate {predicate:?}")));
            }
            obs_list(observables)?;
            for (k, (a, b)) in pairs.iter().enumerate() {
                for name in [a, b] {
                    if !has_obs(name) {
                        return Err(malformed(format!("{field}.pairs[{k}]"), format!("unknown observable {name:?}")));
                    }
                }
            }
            Ok(())
        }
    }
}

pub fn is_predicate(name: &str) -> bool {
    PREDICATES.contains(&name)
}

pub fn predicates() -> &'static [&'static str] {
    &PREDICATES
}
