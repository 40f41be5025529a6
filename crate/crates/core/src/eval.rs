//! Batch evaluation of predicted logical forms against an annotated corpus.
//!
//! Per problem the predicted forms are converted to a graph and solved.
//! The answer is correct only on exact rational equality with the gold answer,
//! and the model is complete when the solver returns a value. Weak and strong
//! smatch are taken against the gold graph. Missing or unparseable predictions
//! count as incomplete and incorrect.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_traits::Zero;
use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use crate::convert::lfs_to_graph;
use crate::corpus::AnnotatedMsp;
use crate::lf::LogicalForm;
use crate::metrics::{smatch_with, Mode, SmatchConfig};
use crate::model::WorldModel;
use crate::number::{format_rational, to_f64, Rational};
use crate::reason::solve_reference;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalConfig {
    pub smatch: SmatchConfig,
    /// Worker threads; 0 uses rayon's default.
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("prediction for unknown problem id {0:?}")]
    UnknownPrediction(String),
    #[error("could not start worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MspResult {
    pub id: String,
    pub dataset: String,
    pub predicted: bool,
    pub complete: bool,
    pub correct: bool,
    pub answer: Option<Rational>,
    pub gold_answer: Rational,
    pub weak_smatch: Rational,
    pub strong_smatch: Rational,
    /// Conversion diagnostics for the predicted forms.
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Aggregate {
    pub count: usize,
    pub answer_accuracy: Rational,
    pub complete_wm_rate: Rational,
    pub avg_weak_smatch: Rational,
    pub avg_strong_smatch: Rational,
}

impl Aggregate {
    fn of<'a>(rows: impl Iterator<Item = &'a MspResult>) -> Aggregate {
        let mut count = 0usize;
        let mut correct = 0usize;
        let mut complete = 0usize;
        let mut weak = Rational::zero();
        let mut strong = Rational::zero();
        for r in rows {
            count += 1;
            correct += r.correct as usize;
            complete += r.complete as usize;
            weak += &r.weak_smatch;
            strong += &r.strong_smatch;
        }
        let frac = |n: Rational| {
            if count == 0 {
                Rational::zero()
            } else {
                n / Rational::from_integer(count.into())
            }
        };
        Aggregate {
            count,
            answer_accuracy: frac(Rational::from_integer(correct.into())),
            complete_wm_rate: frac(Rational::from_integer(complete.into())),
            avg_weak_smatch: frac(weak),
            avg_strong_smatch: frac(strong),
        }
    }

    fn metrics(&self) -> [(&'static str, &Rational); 4] {
        [
            ("answer_accuracy", &self.answer_accuracy),
            ("complete_wm_rate", &self.complete_wm_rate),
            ("avg_weak_smatch", &self.avg_weak_smatch),
            ("avg_strong_smatch", &self.avg_strong_smatch),
        ]
    }

    fn to_json(&self) -> Value {
        let mut map = serde_json::Map::new();
        map.insert("count".into(), json!(self.count));
        for (name, value) in self.metrics() {
            map.insert(name.into(), exact(value));
        }
        Value::Object(map)
    }
}

fn exact(value: &Rational) -> Value {
    json!({ "exact": format_rational(value), "value": to_f64(value) })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalReport {
    pub overall: Aggregate,
    pub per_dataset: BTreeMap<String, Aggregate>,
    pub rows: Vec<MspResult>,
    /// Gold ids without a prediction.
    pub missing: Vec<String>,
}

impl EvalReport {
    /// Whether every aggregate metric is exactly one.
    pub fn all_ones(&self) -> bool {
        let one = Rational::from_integer(1.into());
        self.overall.count > 0 && self.overall.metrics().iter().all(|(_, v)| **v == one)
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                json!({
                    "id": r.id,
                    "dataset": r.dataset,
                    "predicted": r.predicted,
                    "complete": r.complete,
                    "correct": r.correct,
                    "answer": r.answer.as_ref().map(format_rational),
                    "gold_answer": format_rational(&r.gold_answer),
                    "weak_smatch": exact(&r.weak_smatch),
                    "strong_smatch": exact(&r.strong_smatch),
                    "diagnostics": r.diagnostics,
                })
            })
            .collect();
        json!({
            "overall": self.overall.to_json(),
            "per_dataset": self.per_dataset.iter().map(|(k, v)| (k.clone(), v.to_json())).collect::<serde_json::Map<_, _>>(),
            "rows": rows,
            "missing": self.missing,
        })
    }

    /// Pretty JSON with sorted keys.
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("report serializes") + "\n"
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<16} {:>6} {:>10} {:>10} {:>10} {:>10}",
            "dataset", "count", "answer", "complete", "weak", "strong"
        );
        let mut line = |name: &str, a: &Aggregate| {
            let pct = |v: &Rational| format!("{:.1}", to_f64(v) * 100.0);
            let _ = writeln!(
                out,
                "{:<16} {:>6} {:>10} {:>10} {:>10} {:>10}",
                name,
                a.count,
                pct(&a.answer_accuracy),
                pct(&a.complete_wm_rate),
                pct(&a.avg_weak_smatch),
                pct(&a.avg_strong_smatch)
            );
        };
        for (name, a) in &self.per_dataset {
            line(name, a);
        }
        line("overall", &self.overall);
        if !self.missing.is_empty() {
            let _ = writeln!(out, "missing predictions: {}", self.missing.join(", "));
        }
        out
    }
}

/// Scores one problem given its predicted forms, or `None` when missing.
pub fn evaluate_one(gold: &AnnotatedMsp, forms: Option<&[LogicalForm]>, smatch: &SmatchConfig) -> MspResult {
    let (model, diagnostics) = match forms {
        Some(forms) => {
            let conversion = lfs_to_graph(forms);
            let diagnostics = conversion.diagnostics.iter().map(ToString::to_string).collect();
            (conversion.model, diagnostics)
        }
        None => (WorldModel::new(), Vec::new()),
    };
    let answer = forms.and_then(|_| solve_reference(&model).ok());
    let f1 = |mode| smatch_with(&model, &gold.graph, mode, smatch).f1;
    let (weak_smatch, strong_smatch) = if forms.is_some() {
        (f1(Mode::Weak), f1(Mode::Strong))
    } else {
        (Rational::zero(), Rational::zero())
    };
    MspResult {
        id: gold.id.clone(),
        dataset: gold.source_dataset.clone(),
        predicted: forms.is_some(),
        complete: answer.is_some(),
        correct: answer.as_ref() == Some(&gold.answer),
        answer,
        gold_answer: gold.answer.clone(),
        weak_smatch,
        strong_smatch,
        diagnostics,
    }
}

pub fn evaluate(
    gold: &[AnnotatedMsp],
    predictions: &BTreeMap<String, Vec<LogicalForm>>,
    config: &EvalConfig,
) -> Result<EvalReport, EvalError> {
    if let Some(id) = predictions.keys().find(|id| !gold.iter().any(|g| &g.id == *id)) {
        return Err(EvalError::UnknownPrediction(id.clone()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| EvalError::Pool(e.to_string()))?;
    let rows: Vec<MspResult> = pool.install(|| {
        gold.par_iter()
            .map(|g| evaluate_one(g, predictions.get(&g.id).map(Vec::as_slice), &config.smatch))
            .collect()
    });
    let mut datasets: BTreeMap<String, Vec<&MspResult>> = BTreeMap::new();
    for r in &rows {
        datasets.entry(r.dataset.clone()).or_default().push(r);
    }
    let per_dataset = datasets
        .into_iter()
        .map(|(name, rs)| (name, Aggregate::of(rs.into_iter())))
        .collect();
    let missing = rows.iter().filter(|r| !r.predicted).map(|r| r.id.clone()).collect();
    Ok(EvalReport {
        overall: Aggregate::of(rows.iter()),
        per_dataset,
        rows,
        missing,
    })
}
