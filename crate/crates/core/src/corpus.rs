//! File formats: JSON graphs, JSONL annotated corpora and predicted
//! logical-form files.
//!
//! Graph documents serialize with sorted keys and quantities as decimal
//! strings, so saving a loaded file reproduces it byte for byte.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::convert::{validate_states, ConvertError, SentenceState};
use crate::lf::{parse_logical_form, parse_recover, serialize_logical_form, LfError, LogicalForm, ParseMode};
use crate::model::{
    CompareOp, Container, ContainerStructure, ModelError, NodeId, Quantity, Relation, RelationKind, VarId, WorldModel,
};
use crate::number::{format_rational, parse_rational, Rational};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{}: {path}: {message}", location(.record))]
    Schema {
        record: Option<String>,
        path: String,
        message: String,
    },
    #[error("{}: invalid world model: {source}", location(.record))]
    Model {
        record: Option<String>,
        #[source]
        source: ModelError,
    },
    #[error("{}: invalid sentence states: {source}", location(.record))]
    States {
        record: Option<String>,
        #[source]
        source: ConvertError,
    },
    #[error("{}: sentence {sentence}: {source}", location(.record))]
    LogicalForm {
        record: Option<String>,
        sentence: usize,
        #[source]
        source: LfError,
    },
    #[error("duplicate id {0:?}")]
    DuplicateId(String),
    #[error("record {id:?}: {sentences} sentences but {forms} logical forms")]
    Alignment { id: String, sentences: usize, forms: usize },
    #[error("record {id:?}: {sentences} sentences but {states} sentence states")]
    StateAlignment {
        id: String,
        sentences: usize,
        states: usize,
    },
    #[error("predictions line {line}: {message}")]
    Predictions { line: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn location(record: &Option<String>) -> String {
    match record {
        Some(r) => format!("record {r}"),
        None => "graph".to_string(),
    }
}

impl CorpusError {
    fn in_record(self, id: &str) -> Self {
        let set = |record: Option<String>| record.or_else(|| Some(id.to_string()));
        match self {
            CorpusError::Schema { record, path, message } => CorpusError::Schema {
                record: set(record),
                path,
                message,
            },
            CorpusError::Model { record, source } => CorpusError::Model {
                record: set(record),
                source,
            },
            CorpusError::States { record, source } => CorpusError::States {
                record: set(record),
                source,
            },
            other => other,
        }
    }
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> CorpusError {
    CorpusError::Schema {
        record: None,
        path: path.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphDoc {
    format_version: u32,
    nodes: Vec<NodeDoc>,
    edges: Vec<EdgeDoc>,
    #[serde(default)]
    metadata: GraphMeta,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeDoc {
    id: NodeId,
    metadata: NodeMeta,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeMeta {
    label: String,
    entity: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    attribute: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    unit: Option<String>,
    quantity: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeDoc {
    id: NodeId,
    source: NodeId,
    target: NodeId,
    metadata: EdgeMeta,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeMeta {
    #[serde(rename = "type")]
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    quantity: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    recipient: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sender: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    op: Option<String>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ref_var: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sentence_states: Option<Vec<StateDoc>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateDoc {
    containers: Vec<NodeId>,
    relations: Vec<NodeId>,
    #[serde(default)]
    unbound: Vec<NodeId>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RecordDoc {
    format_version: u32,
    id: String,
    source_dataset: String,
    sentences: Vec<String>,
    logical_forms: Vec<String>,
    graph: GraphDoc,
    answer: String,
}

/// A world model with its per-sentence states (empty when not recorded).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphFile {
    pub model: WorldModel,
    pub states: Vec<SentenceState>,
}

/// One annotated problem: sentences aligned with logical forms, the gold
/// graph and the gold answer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedMsp {
    pub id: String,
    pub source_dataset: String,
    pub sentences: Vec<String>,
    pub logical_forms: Vec<LogicalForm>,
    pub graph: WorldModel,
    pub states: Vec<SentenceState>,
    pub answer: Rational,
}

impl AnnotatedMsp {
    /// Sentence body without the final question sentence.
    pub fn body(&self) -> &[String] {
        &self.sentences[..self.sentences.len().saturating_sub(1)]
    }

    pub fn question(&self) -> Option<&str> {
        self.sentences.last().map(String::as_str)
    }
}

fn graph_doc(g: &WorldModel, states: &[SentenceState]) -> GraphDoc {
    let nodes = g
        .containers()
        .map(|c| NodeDoc {
            id: c.id,
            metadata: NodeMeta {
                label: c.structure.label.clone(),
                entity: c.structure.entity.clone(),
                attribute: c.structure.attribute.clone(),
                unit: c.structure.unit.clone(),
                quantity: c.quantity.to_string(),
            },
        })
        .collect();
    let edges = g
        .relations()
        .map(|r| {
            let (kind, recipient, sender, op) = match &r.kind {
                RelationKind::Transfer { recipient, sender } => ("transfer", recipient.clone(), sender.clone(), None),
                RelationKind::Rate => ("rate", None, None, None),
                RelationKind::Comparison { op } => ("comparison", None, None, Some(op.as_str().to_string())),
                RelationKind::PartWhole => ("part-whole", None, None, None),
            };
            EdgeDoc {
                id: r.id,
                source: r.source,
                target: r.target,
                metadata: EdgeMeta {
                    kind: kind.to_string(),
                    quantity: r.quantity.as_ref().map(Quantity::to_string),
                    recipient,
                    sender,
                    op,
                },
            }
        })
        .collect();
    let sentence_states = (!states.is_empty()).then(|| {
        states
            .iter()
            .map(|s| StateDoc {
                containers: s.containers.iter().copied().collect(),
                relations: s.relations.iter().copied().collect(),
                unbound: s.unbound.iter().copied().collect(),
            })
            .collect()
    });
    GraphDoc {
        format_version: FORMAT_VERSION,
        nodes,
        edges,
        metadata: GraphMeta {
            ref_var: g.ref_var().map(|v| v.to_string()),
            sentence_states,
        },
    }
}

fn quantity(path: &str, text: &str) -> Result<Quantity, CorpusError> {
    text.parse().map_err(|e| schema(path, format!("{e}")))
}

fn check_version(path: &str, version: u32) -> Result<(), CorpusError> {
    if version != FORMAT_VERSION {
        return Err(schema(path, format!("unsupported format_version {version}")));
    }
    Ok(())
}

fn model_from_doc(doc: &GraphDoc, prefix: &str) -> Result<GraphFile, CorpusError> {
    check_version(&format!("{prefix}format_version"), doc.format_version)?;
    let model_err = |source| CorpusError::Model { record: None, source };
    let mut g = WorldModel::new();
    for (i, n) in doc.nodes.iter().enumerate() {
        let path = format!("{prefix}nodes[{i}].metadata");
        let m = &n.metadata;
        let structure = ContainerStructure {
            label: m.label.clone(),
            entity: m.entity.clone(),
            attribute: m.attribute.clone(),
            unit: m.unit.clone(),
        };
        let q = quantity(&format!("{path}.quantity"), &m.quantity)?;
        g.insert_container(Container {
            id: n.id,
            structure,
            quantity: q,
        })
        .map_err(model_err)?;
    }
    for (i, e) in doc.edges.iter().enumerate() {
        let path = format!("{prefix}edges[{i}].metadata");
        let m = &e.metadata;
        let kind = match m.kind.as_str() {
            "transfer" => RelationKind::Transfer {
                recipient: m.recipient.clone(),
                sender: m.sender.clone(),
            },
            "rate" => RelationKind::Rate,
            "comparison" => {
                let op =
                    m.op.as_deref()
                        .ok_or_else(|| schema(format!("{path}.op"), "missing comparison op"))?;
                let op = match op {
                    "times" => CompareOp::Mul,
                    other => CompareOp::parse(other)
                        .ok_or_else(|| schema(format!("{path}.op"), format!("unknown op {other:?}")))?,
                };
                RelationKind::Comparison { op }
            }
            "part-whole" => RelationKind::PartWhole,
            other => {
                return Err(schema(
                    format!("{path}.type"),
                    format!("unknown relation type {other:?}"),
                ))
            }
        };
        if !matches!(kind, RelationKind::Transfer { .. }) && (m.recipient.is_some() || m.sender.is_some()) {
            return Err(schema(path, "sender/recipient only apply to transfers"));
        }
        if !matches!(kind, RelationKind::Comparison { .. }) && m.op.is_some() {
            return Err(schema(format!("{path}.op"), "op only applies to comparisons"));
        }
        let q = m
            .quantity
            .as_deref()
            .map(|q| quantity(&format!("{path}.quantity"), q))
            .transpose()?;
        g.insert_relation(Relation {
            id: e.id,
            kind,
            quantity: q,
            source: e.source,
            target: e.target,
        })
        .map_err(model_err)?;
    }
    if let Some(r) = &doc.metadata.ref_var {
        let v: VarId = r
            .parse()
            .map_err(|e| schema(format!("{prefix}metadata.ref_var"), format!("{e}")))?;
        g.set_ref_var(Some(v)).map_err(model_err)?;
    }
    g.validate().map_err(model_err)?;
    let states: Vec<SentenceState> = doc
        .metadata
        .sentence_states
        .iter()
        .flatten()
        .map(|s| SentenceState {
            containers: s.containers.iter().copied().collect::<BTreeSet<_>>(),
            relations: s.relations.iter().copied().collect(),
            unbound: s.unbound.iter().copied().collect(),
        })
        .collect();
    if !states.is_empty() {
        validate_states(&g, &states).map_err(|source| CorpusError::States { record: None, source })?;
    }
    Ok(GraphFile { model: g, states })
}

fn from_json<'de, T: Deserialize<'de>>(text: &'de str) -> Result<T, CorpusError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        schema(path, e.into_inner().to_string())
    })?;
    de.end().map_err(|e| schema(".", e.to_string()))?;
    Ok(value)
}

fn to_sorted_json<T: Serialize>(value: &T, pretty: bool) -> String {
    // serde_json's default map keeps keys sorted.
    let v = serde_json::to_value(value).expect("document types serialize");
    if pretty {
        serde_json::to_string_pretty(&v).expect("value serializes")
    } else {
        serde_json::to_string(&v).expect("value serializes")
    }
}

/// Parses a graph document. `states` is empty when none are recorded.
pub fn parse_graph(text: &str) -> Result<GraphFile, CorpusError> {
    let doc: GraphDoc = from_json(text)?;
    model_from_doc(&doc, "")
}

/// Pretty JSON with sorted keys and a trailing newline.
pub fn graph_to_string(g: &WorldModel, states: &[SentenceState]) -> String {
    let mut s = to_sorted_json(&graph_doc(g, states), true);
    s.push('\n');
    s
}

fn read(path: &Path) -> Result<String, CorpusError> {
    fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), CorpusError> {
    fs::write(path, text).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<GraphFile, CorpusError> {
    parse_graph(&read(path.as_ref())?)
}

pub fn save_graph(path: impl AsRef<Path>, g: &WorldModel, states: &[SentenceState]) -> Result<(), CorpusError> {
    write(path.as_ref(), &graph_to_string(g, states))
}

fn record_from_doc(doc: RecordDoc) -> Result<AnnotatedMsp, CorpusError> {
    check_version("format_version", doc.format_version).map_err(|e| e.in_record(&doc.id))?;
    if doc.sentences.len() != doc.logical_forms.len() {
        return Err(CorpusError::Alignment {
            id: doc.id,
            sentences: doc.sentences.len(),
            forms: doc.logical_forms.len(),
        });
    }
    let graph = model_from_doc(&doc.graph, "graph.").map_err(|e| e.in_record(&doc.id))?;
    if !graph.states.is_empty() && graph.states.len() != doc.sentences.len() {
        return Err(CorpusError::StateAlignment {
            id: doc.id,
            sentences: doc.sentences.len(),
            states: graph.states.len(),
        });
    }
    let mut forms = Vec::with_capacity(doc.logical_forms.len());
    for (i, text) in doc.logical_forms.iter().enumerate() {
        let lf = parse_logical_form(text, ParseMode::Strict).map_err(|source| CorpusError::LogicalForm {
            record: Some(doc.id.clone()),
            sentence: i + 1,
            source,
        })?;
        forms.push(lf);
    }
    let answer = parse_rational(&doc.answer).map_err(|e| schema("answer", e.to_string()).in_record(&doc.id))?;
    Ok(AnnotatedMsp {
        id: doc.id,
        source_dataset: doc.source_dataset,
        sentences: doc.sentences,
        logical_forms: forms,
        graph: graph.model,
        states: graph.states,
        answer,
    })
}

/// Parses a JSONL corpus; blank lines are skipped.
pub fn parse_corpus(text: &str) -> Result<Vec<AnnotatedMsp>, CorpusError> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let doc: RecordDoc = from_json(line).map_err(|e| match e {
            CorpusError::Schema { path, message, .. } => CorpusError::Schema {
                record: Some(format!("on line {}", i + 1)),
                path,
                message,
            },
            other => other,
        })?;
        if !seen.insert(doc.id.clone()) {
            return Err(CorpusError::DuplicateId(doc.id));
        }
        out.push(record_from_doc(doc)?);
    }
    Ok(out)
}

pub fn record_to_string(msp: &AnnotatedMsp) -> String {
    let doc = RecordDoc {
        format_version: FORMAT_VERSION,
        id: msp.id.clone(),
        source_dataset: msp.source_dataset.clone(),
        sentences: msp.sentences.clone(),
        logical_forms: msp.logical_forms.iter().map(serialize_logical_form).collect(),
        graph: graph_doc(&msp.graph, &msp.states),
        answer: format_rational(&msp.answer),
    };
    to_sorted_json(&doc, false)
}

/// One compact JSON object per line.
pub fn corpus_to_string(records: &[AnnotatedMsp]) -> String {
    records.iter().map(|r| record_to_string(r) + "\n").collect()
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<AnnotatedMsp>, CorpusError> {
    parse_corpus(&read(path.as_ref())?)
}

pub fn save_corpus(path: impl AsRef<Path>, records: &[AnnotatedMsp]) -> Result<(), CorpusError> {
    write(path.as_ref(), &corpus_to_string(records))
}

/// A predicate dropped while reading predictions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictionWarning {
    pub id: String,
    /// Zero-based sentence index.
    pub sentence: usize,
    pub error: LfError,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Predictions {
    pub forms: BTreeMap<String, Vec<LogicalForm>>,
    pub warnings: Vec<PredictionWarning>,
}

pub const ID_HEADER: &str = "# id:";
pub const SENTENCE_SEPARATOR: &str = "---";

/// Parses a predictions file: each problem starts with `# id: <id>`, its
/// sentences' logical forms are separated by `---` lines. Malformed
/// predicates are dropped with a warning.
pub fn parse_predictions(text: &str) -> Result<Predictions, CorpusError> {
    let mut out = Predictions::default();
    let mut current: Option<(String, Vec<String>)> = None;
    let finish = |entry: Option<(String, Vec<String>)>, out: &mut Predictions| {
        if let Some((id, blocks)) = entry {
            let mut forms = Vec::with_capacity(blocks.len());
            for (s, block) in blocks.iter().enumerate() {
                let (lf, errors) = parse_recover(block);
                for error in errors {
                    log::warn!(
                        "prediction {id}, sentence {}: dropped malformed predicate: {error}",
                        s + 1
                    );
                    out.warnings.push(PredictionWarning {
                        id: id.clone(),
                        sentence: s,
                        error,
                    });
                }
                forms.push(lf);
            }
            out.forms.insert(id, forms);
        }
    };
    for (i, line) in text.lines().enumerate() {
        if let Some(id) = line.strip_prefix(ID_HEADER) {
            let id = id.trim().to_string();
            if id.is_empty() {
                return Err(CorpusError::Predictions {
                    line: i + 1,
                    message: "empty id".into(),
                });
            }
            if out.forms.contains_key(&id) || current.as_ref().is_some_and(|(c, _)| *c == id) {
                return Err(CorpusError::DuplicateId(id));
            }
            finish(current.take(), &mut out);
            current = Some((id, vec![String::new()]));
        } else if let Some((_, blocks)) = current.as_mut() {
            if line.trim() == SENTENCE_SEPARATOR {
                blocks.push(String::new());
            } else {
                let block = blocks.last_mut().expect("at least one block");
                block.push_str(line);
                block.push('\n');
            }
        } else if !line.trim().is_empty() {
            return Err(CorpusError::Predictions {
                line: i + 1,
                message: format!("content before the first {ID_HEADER:?} header"),
            });
        }
    }
    finish(current.take(), &mut out);
    Ok(out)
}

/// Writes predictions in the format read by [`parse_predictions`].
pub fn predictions_to_string(forms: &BTreeMap<String, Vec<LogicalForm>>) -> String {
    let mut out = String::new();
    for (id, lfs) in forms {
        out.push_str(ID_HEADER);
        out.push(' ');
        out.push_str(id);
        out.push('\n');
        for (i, lf) in lfs.iter().enumerate() {
            if i > 0 {
                out.push_str(SENTENCE_SEPARATOR);
                out.push('\n');
            }
            let text = serialize_logical_form(lf);
            if !text.is_empty() {
                out.push_str(&text);
                out.push('\n');
            }
        }
    }
    out
}

pub fn load_predictions(path: impl AsRef<Path>) -> Result<Predictions, CorpusError> {
    parse_predictions(&read(path.as_ref())?)
}

/// Parsed forms plus predicates dropped in recover mode, keyed by sentence index.
pub type SentenceForms = (Vec<LogicalForm>, Vec<(usize, LfError)>);

/// Parses one problem's logical forms, sentences separated by `---` lines.
/// Strict mode fails on the first malformed predicate; recover mode drops
/// malformed runs and returns them with their sentence index.
pub fn parse_sentence_forms(text: &str, mode: ParseMode) -> Result<SentenceForms, CorpusError> {
    let mut blocks = vec![String::new()];
    for line in text.lines() {
        if line.trim() == SENTENCE_SEPARATOR {
            blocks.push(String::new());
        } else {
            let block = blocks.last_mut().expect("at least one block");
            block.push_str(line);
            block.push('\n');
        }
    }
    let mut forms = Vec::with_capacity(blocks.len());
    let mut dropped = Vec::new();
    for (sentence, block) in blocks.iter().enumerate() {
        match mode {
            ParseMode::Strict => {
                forms.push(
                    parse_logical_form(block, mode).map_err(|source| CorpusError::LogicalForm {
                        record: None,
                        sentence: sentence + 1,
                        source,
                    })?,
                )
            }
            ParseMode::Recover => {
                let (lf, errors) = parse_recover(block);
                dropped.extend(errors.into_iter().map(|e| (sentence, e)));
                forms.push(lf);
            }
        }
    }
    Ok((forms, dropped))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number::int;

    fn cafeteria() -> (WorldModel, Vec<SentenceState>) {
        let mut g = WorldModel::new();
        let a = g.add_container(ContainerStructure::new("cafeteria", "apple"), Quantity::Known(int(14)));
        let x1 = g.fresh_var();
        let b = g.add_container(ContainerStructure::new("cafeteria", "apple"), Quantity::Var(x1));
        let sender = RelationKind::Transfer {
            recipient: None,
            sender: Some("cafeteria".into()),
        };
        g.add_relation(sender, Some(Quantity::Known(int(13))), a, b).unwrap();
        let x2 = g.fresh_var();
        let c = g.add_container(ContainerStructure::new("cafeteria", "apple"), Quantity::Var(x2));
        let recipient = RelationKind::Transfer {
            recipient: Some("cafeteria".into()),
            sender: None,
        };
        g.add_relation(recipient, Some(Quantity::Known(int(49))), b, c).unwrap();
        g.set_ref_var(Some(x2)).unwrap();
        let states = vec![
            SentenceState {
                containers: [a].into(),
                relations: BTreeSet::new(),
                unbound: BTreeSet::new(),
            },
            SentenceState {
                containers: [a, b].into(),
                relations: [b + 1].into(),
                unbound: [b].into(),
            },
            SentenceState {
                containers: [a, b, c].into(),
                relations: [b + 1, c + 1].into(),
                unbound: [b, c].into(),
            },
        ];
        (g, states)
    }

    #[test]
    fn graph_round_trip_is_byte_stable() {
        let (g, states) = cafeteria();
        let text = graph_to_string(&g, &states);
        let loaded = parse_graph(&text).unwrap();
        assert_eq!(loaded.model, g);
        assert_eq!(loaded.states, states);
        assert_eq!(graph_to_string(&loaded.model, &loaded.states), text);
        assert_eq!(g.container_count(), 3);
    }

    #[test]
    fn dangling_edge_is_rejected() {
        let text = r#"{"format_version": 1, "nodes": [{"id": 1, "metadata": {"label": "a", "entity": "b", "quantity": "3"}}],
            "edges": [{"id": 2, "source": 1, "target": 9, "metadata": {"type": "rate", "quantity": "2"}}]}"#;
        let err = parse_graph(text).unwrap_err();
        assert!(matches!(err, CorpusError::Model { .. }), "{err}");
    }

    #[test]
    fn schema_errors_name_the_field() {
        let text = r#"{"format_version": 1, "nodes": [{"id": 1, "metadata": {"label": "a", "entity": "b", "quantity": 3}}], "edges": []}"#;
        let err = parse_graph(text).unwrap_err().to_string();
        assert!(err.contains("nodes[0].metadata.quantity"), "{err}");
        let text = r#"{"format_version": 1, "nodes": [{"id": 1, "metadata": {"label": "a", "entity": "b", "quantity": "three"}}], "edges": []}"#;
        let err = parse_graph(text).unwrap_err().to_string();
        assert!(err.contains("nodes[0].metadata.quantity"), "{err}");
    }

    #[test]
    fn times_alias() {
        let text = r#"{"format_version": 1,
            "nodes": [{"id": 1, "metadata": {"label": "a", "entity": "b", "quantity": "3"}},
                      {"id": 2, "metadata": {"label": "c", "entity": "b", "quantity": "6"}}],
            "edges": [{"id": 3, "source": 1, "target": 2, "metadata": {"type": "comparison", "op": "times", "quantity": "2"}}]}"#;
        let g = parse_graph(text).unwrap().model;
        assert_eq!(
            g.relation(3).unwrap().kind,
            RelationKind::Comparison { op: CompareOp::Mul }
        );
    }

    #[test]
    fn empty_inputs() {
        assert!(parse_corpus("").unwrap().is_empty());
        assert!(parse_predictions("").unwrap().forms.is_empty());
    }

    #[test]
    fn predictions_recover_and_round_trip() {
        let text = "# id: p1\ncontainer(cafeteria, 14, apple, none, none)\n---\ntransfer(none, cafeteria, 13, apple, none, none\n---\n\n# id: p2\n";
        let p = parse_predictions(text).unwrap();
        assert_eq!(p.forms["p1"].len(), 3);
        assert_eq!(p.forms["p1"][0].len(), 1);
        assert!(p.forms["p1"][1].is_empty());
        assert_eq!(p.warnings.len(), 1);
        assert_eq!(p.warnings[0].sentence, 1);
        assert_eq!(p.forms["p2"].len(), 1);
        let again = parse_predictions(&predictions_to_string(&p.forms)).unwrap();
        assert_eq!(again.forms, p.forms);
        assert!(matches!(
            parse_predictions("# id: a\n# id: a\n"),
            Err(CorpusError::DuplicateId(_))
        ));
    }
}
