//! One function per subcommand. Each turns the matching tasks of a problem
//! into result documents.

use serde_json::{json, Value};

use statemetric::properties::{
    check_convex, check_lattice_with, check_leibniz_with, check_metric_axioms, check_midpoint_balanced,
    check_midpoint_concave, check_linear, check_weak_lattice_with, CheckReport, Sampling, SpecMetric, Witness,
};
use statemetric::recovery::{compare, sampled_recovered_seminorm};
use statemetric::resistance::{resistance_metric, resistance_table};
use statemetric::{
    eval, metric_table, monge_kantorovich, state_metric, CommObservable, MetricTable, Observable, SeminormSpec,
    Shape, State, Transport,
};

use crate::output::{number, Cell, Document};
use crate::problem::{Problem, Task};
use crate::CliError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Command {
    Eval,
    Metric,
    Table,
    Mk,
    Recover,
    Resist,
    Check(String),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Eval => "eval",
            Command::Metric => "metric",
            Command::Table => "table",
            Command::Mk => "mk",
            Command::Recover => "recover",
            Command::Resist => "resist",
            Command::Check(_) => "check",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Options {
    pub tol: f64,
    pub seed: u64,
    pub samples: usize,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            seed: 0,
            samples: 2000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub documents: Vec<Document>,
    /// Total violations across check reports.
    pub violations: usize,
}

/// Tasks for `command`, or the default task over everything declared.
fn selected(problem: &Problem, command: &Command) -> Vec<Task> {
    let picked: Vec<Task> = problem
        .tasks
        .iter()
        .filter(|t| match (t, command) {
            (Task::Check { predicate, .. }, Command::Check(p)) => predicate == p,
            _ => t.op() == command.name(),
        })
        .cloned()
        .collect();
    if !picked.is_empty() {
        return picked;
    }
    vec![match command {
        Command::Eval => Task::Eval { observables: vec![] },
        Command::Metric => Task::Metric { pairs: vec![] },
        Command::Table => Task::Table {},
        Command::Mk => Task::Mk { pairs: vec![] },
        Command::Recover => Task::Recover {
            observables: vec![],
            tol_report: 1e-3,
        },
        Command::Resist => Task::Resist { pairs: vec![] },
        Command::Check(p) => Task::Check {
            predicate: p.clone(),
            observables: vec![],
            pairs: vec![],
        },
    }]
}

fn state_pairs(problem: &Problem, pairs: &[(String, String)]) -> Vec<(String, String)> {
    if !pairs.is_empty() {
        return pairs.to_vec();
    }
    let names: Vec<&String> = problem.states.iter().map(|(n, _)| n).collect();
    let mut out = Vec::new();
    for i in 0..names.len() {
        for j in (i + 1)..names.len() {
            out.push((names[i].clone(), names[j].clone()));
        }
    }
    out
}

fn observable_names(problem: &Problem, names: &[String]) -> Vec<String> {
    if names.is_empty() {
        problem.observables.iter().map(|(n, _)| n.clone()).collect()
    } else {
        names.to_vec()
    }
}

pub fn run(command: &Command, problem: &Problem, opts: &Options) -> Result<Outcome, CliError> {
    if !(opts.tol.is_finite() && opts.tol > 0.0) {
        return Err(CliError::Unsupported(format!("--tol must be positive, got {}", opts.tol)));
    }
    let mut documents = Vec::new();
    let mut violations = 0;
    for task in selected(problem, command) {
        match task {
            Task::Eval { observables } => documents.push(eval_doc(problem, &observables)?),
            Task::Metric { pairs } => documents.push(metric_doc(problem, &pairs, opts)?),
            Task::Table {} => documents.push(table_doc(
                "metric table",
                &metric_table(&problem.spec, opts.tol)?,
            )),
            Task::Mk { pairs } => documents.push(mk_doc(problem, &pairs, opts)?),
            Task::Recover {
                observables,
                tol_report,
            } => documents.push(recover_doc(problem, &observables, tol_report, opts)?),
            Task::Resist { pairs } => documents.extend(resist_docs(problem, &pairs)?),
            Task::Check {
                predicate,
                observables,
                pairs,
            } => {
                let report = check(problem, &predicate, &observables, &pairs, opts)?;
                violations += report.violations.len();
                documents.extend(check_docs(&report));
            }
        }
    }
    Ok(Outcome { documents, violations })
}

fn eval_doc(problem: &Problem, names: &[String]) -> Result<Document, CliError> {
    let mut doc = Document::new("seminorm values", &["observable", "L"]);
    for name in observable_names(problem, names) {
        let l = eval(&problem.spec, problem.observable(&name))?;
        doc.push(vec![name.into(), l.into()]);
    }
    Ok(doc)
}

fn metric_doc(problem: &Problem, pairs: &[(String, String)], opts: &Options) -> Result<Document, CliError> {
    let mut doc = Document::new(
        "state distances",
        &["mu", "nu", "distance", "lower", "upper", "gap", "iterations"],
    );
    for (a, b) in state_pairs(problem, pairs) {
        let v = state_metric(&problem.spec, problem.state(&a), problem.state(&b), opts.tol)?;
        doc.push(vec![
            a.into(),
            b.into(),
            v.value.into(),
            v.lower.into(),
            v.upper.into(),
            v.gap().into(),
            v.iterations.into(),
        ]);
    }
    Ok(doc)
}

fn table_doc(title: &str, t: &MetricTable) -> Document {
    let mut columns = vec!["point"];
    columns.extend(t.labels().iter().map(String::as_str));
    let mut doc = Document::new(title, &columns);
    for (label, row) in t.labels().iter().zip(t.rows()) {
        let mut cells: Vec<Cell> = vec![label.as_str().into()];
        cells.extend(row.into_iter().map(Cell::from));
        doc.push(cells);
    }
    doc.extra.insert(
        "table".into(),
        json!({ "kind": "metric_lip", "labels": t.labels(), "rows": t.rows() }),
    );
    doc
}

fn prob(state: &State, name: &str) -> Result<statemetric::ProbState, CliError> {
    match state {
        State::Prob(p) => Ok(p.clone()),
        State::Density(_) => Err(CliError::Unsupported(format!("state {name:?} is not a measure on points"))),
    }
}

fn mk_doc(problem: &Problem, pairs: &[(String, String)], opts: &Options) -> Result<Document, CliError> {
    let transport = match &problem.spec {
        SeminormSpec::GraphLip(g) => Transport::Graph(g.clone()),
        SeminormSpec::MetricLip(t) => Transport::Table(t.clone()),
        spec => Transport::Table(metric_table(spec, opts.tol)?),
    };
    let mut doc = Document::new("transport distances", &["mu", "nu", "distance"]);
    for (a, b) in state_pairs(problem, pairs) {
        let d = monge_kantorovich(&transport, &prob(problem.state(&a), &a)?, &prob(problem.state(&b), &b)?)?;
        doc.push(vec![a.into(), b.into(), d.into()]);
    }
    Ok(doc)
}

fn recover_doc(problem: &Problem, names: &[String], tol_report: f64, opts: &Options) -> Result<Document, CliError> {
    let names = observable_names(problem, names);
    let mut doc = Document::new(
        format!("recovered seminorms ({} samples, seed {})", opts.samples, opts.seed),
        &["observable", "L", "extreme", "sampled", "extreme_insufficient", "recovery_witnessed"],
    );
    if let Shape::Points(_) = problem.shape() {
        let comms: Vec<CommObservable> = names
            .iter()
            .map(|n| problem.observable(n).as_comm().cloned().expect("points-shaped observable"))
            .collect();
        let report = compare(&problem.spec, &comms, opts.samples, opts.seed, tol_report)?;
        for (name, r) in names.into_iter().zip(report.records) {
            doc.push(vec![
                name.into(),
                r.seminorm.into(),
                r.extreme.into(),
                r.sampled.into(),
                r.extreme_insufficient.into(),
                r.recovery_witnessed.into(),
            ]);
        }
    } else {
        for name in names {
            let a = problem.observable(&name);
            let l = eval(&problem.spec, a)?;
            let sampled = sampled_recovered_seminorm(&problem.spec, a, opts.samples, opts.seed)?;
            doc.push(vec![
                name.into(),
                l.into(),
                Cell::Empty,
                sampled.into(),
                Cell::Empty,
                (sampled >= l - tol_report).into(),
            ]);
        }
    }
    Ok(doc)
}

fn resist_docs(problem: &Problem, pairs: &[(String, String)]) -> Result<Vec<Document>, CliError> {
    let SeminormSpec::Resistance(g) = &problem.spec else {
        return Err(CliError::Unsupported(format!(
            "resist needs a resistance seminorm, the file declares {}",
            problem.spec.kind()
        )));
    };
    let t = MetricTable::new(problem.labels.clone(), resistance_table(g)?)?;
    let mut out = vec![table_doc("effective resistance", &t)];
    let pairs = state_pairs(problem, pairs);
    if !pairs.is_empty() {
        let mut doc = Document::new("resistance distances", &["mu", "nu", "distance"]);
        for (a, b) in pairs {
            let d = resistance_metric(g, &prob(problem.state(&a), &a)?, &prob(problem.state(&b), &b)?)?;
            doc.push(vec![a.into(), b.into(), d.into()]);
        }
        out.push(doc);
    }
    Ok(out)
}

fn comm_list(problem: &Problem, names: &[String], predicate: &str) -> Result<Vec<CommObservable>, CliError> {
    names
        .iter()
        .map(|n| {
            problem
                .observable(n)
                .as_comm()
                .cloned()
                .ok_or_else(|| CliError::Unsupported(format!("{predicate} needs functions on points")))
        })
        .collect()
}

fn check(
    problem: &Problem,
    predicate: &str,
    names: &[String],
    pairs: &[(String, String)],
    opts: &Options,
) -> Result<CheckReport, CliError> {
    let spec = &problem.spec;
    let names = observable_names(problem, names);
    let obs_pairs = || -> Vec<(String, String)> {
        if !pairs.is_empty() {
            return pairs.to_vec();
        }
        let mut out = Vec::new();
        for i in 0..names.len() {
            for j in i..names.len() {
                out.push((names[i].clone(), names[j].clone()));
            }
        }
        out
    };
    let metric = || SpecMetric {
        spec: spec.clone(),
        tol: opts.tol,
    };
    let sampling = Sampling::new(opts.samples, opts.seed);
    let report = match predicate {
        "lattice" => {
            let extra = obs_pairs()
                .into_iter()
                .filter(|(a, b)| a != b)
                .map(|(a, b)| {
                    let v = comm_list(problem, &[a, b], predicate)?;
                    Ok((v[0].clone(), v[1].clone()))
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            check_lattice_with(spec, opts.samples, opts.seed, &extra)?
        }
        "weak-lattice" => {
            check_weak_lattice_with(spec, opts.samples, opts.seed, &comm_list(problem, &names, predicate)?)?
        }
        "leibniz" => {
            let extra: Vec<(Observable, Observable)> = obs_pairs()
                .into_iter()
                .map(|(a, b)| (problem.observable(&a).clone(), problem.observable(&b).clone()))
                .collect();
            check_leibniz_with(spec, opts.samples, opts.seed, &extra)?
        }
        "metric-axioms" => check_metric_axioms(&metric(), sampling)?,
        "convex" => check_convex(&metric(), sampling)?,
        "midpoint-balanced" => check_midpoint_balanced(&metric(), sampling)?,
        "midpoint-concave" => check_midpoint_concave(&metric(), sampling)?,
        "linear" => check_linear(&metric(), sampling)?,
        other => return Err(CliError::Unsupported(format!("unknown predicate {other:?}"))),
    };
    Ok(report)
}

fn tuple(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|x| compact(*x)).collect();
    format!("({})", parts.join(", "))
}

fn compact(x: f64) -> String {
    let s = number(x, false);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

fn observable_text(o: &Observable) -> String {
    match o {
        Observable::Comm(f) => tuple(f.values()),
        Observable::Mat(a) => matrix_text(&a.matrix().re_rows(), &a.matrix().im_rows()),
    }
}

fn matrix_text(re: &[Vec<f64>], im: &[Vec<f64>]) -> String {
    let rows = |m: &[Vec<f64>]| m.iter().map(|r| tuple(r)).collect::<Vec<_>>().join(" ");
    if im.iter().flatten().all(|x| *x == 0.0) {
        format!("[{}]", rows(re))
    } else {
        format!("[{}] + i[{}]", rows(re), rows(im))
    }
}

fn state_text(s: &State) -> String {
    match s {
        State::Prob(p) => tuple(p.weights()),
        State::Density(d) => matrix_text(&d.matrix().re_rows(), &d.matrix().im_rows()),
    }
}

fn witness_text(w: &Witness) -> String {
    match w {
        Witness::Observables(obs) => obs.iter().map(observable_text).collect::<Vec<_>>().join("; "),
        Witness::States { states, t } => {
            let mut s = states.iter().map(state_text).collect::<Vec<_>>().join("; ");
            if let Some(t) = t {
                s.push_str(&format!("; t={}", compact(*t)));
            }
            s
        }
    }
}

fn check_docs(r: &CheckReport) -> Vec<Document> {
    let mut summary = Document::new(
        format!("check {}", r.predicate),
        &["predicate", "trials", "attempts", "slack", "violations", "max_margin", "pass"],
    );
    summary.push(vec![
        r.predicate.as_str().into(),
        r.trials.into(),
        r.attempts.into(),
        r.slack.into(),
        r.violations.len().into(),
        r.max_margin().into(),
        r.pass().into(),
    ]);
    if let Some(note) = &r.note {
        summary.extra.insert("note".into(), Value::String(note.clone()));
    }
    let mut rows = Document::new(
        format!("{} violations", r.predicate),
        &["axiom", "witness", "lhs", "rhs", "margin"],
    );
    for v in &r.violations {
        rows.push(vec![
            v.axiom.into(),
            witness_text(&v.witness).into(),
            v.lhs.into(),
            v.rhs.into(),
            v.margin.into(),
        ]);
    }
    vec![summary, rows]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compact_numbers() {
        assert_eq!(tuple(&[4.0, 2.0, 0.0, -1.0]), "(4, 2, 0, -1)");
        assert_eq!(compact(0.25), "0.25");
        assert_eq!(compact(-1e-12), "0");
        assert_eq!(compact(1.0 / 3.0), "0.3333333");
    }
}
