//! Templated question-answer pairs over world models and the three prompt
//! layouts built from them.

use std::collections::BTreeSet;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::convert::SentenceState;
use crate::corpus::AnnotatedMsp;
use crate::model::{CompareOp, Container, NodeId, Quantity, RelationKind, WorldModel};
use crate::normalize::pluralize;
use crate::number::{format_rational, Rational};
use crate::reason::{induce_equations, recursive_solve};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum QaTemplate {
    ContainerHave,
    ContainerAmount,
    Transfer,
    ComparisonAdd,
    ComparisonMul,
    Rate,
    PartWhole,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticQa {
    pub question: String,
    pub answer: Rational,
    /// First sentence whose state contains the queried element.
    pub anchor: Option<usize>,
    /// Queried container or relation.
    pub element: NodeId,
    pub template: QaTemplate,
}

impl fmt::Display for SyntheticQa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q: {} A: {}", self.question, format_rational(&self.answer))
    }
}

/// An element skipped because its quantity could not be determined.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QaDiagnostic {
    pub element: NodeId,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QaSet {
    pub qas: Vec<SyntheticQa>,
    pub skipped: Vec<QaDiagnostic>,
}

/// `"{attr} {ent}s"`, or `"{ent}s"` without an attribute.
fn described_plural(c: &Container) -> String {
    let ent = pluralize(&c.structure.entity);
    match &c.structure.attribute {
        Some(a) => format!("{a} {ent}"),
        None => ent,
    }
}

fn anchor_of(states: &[SentenceState], id: NodeId, is_container: bool) -> Option<usize> {
    states.iter().position(|s| {
        if is_container {
            s.containers.contains(&id)
        } else {
            s.relations.contains(&id)
        }
    })
}

/// One QA per template instance, in element order: both container templates
/// for each container, then one per relation. `states` supplies anchors and
/// may be empty. Variable quantities are answered through the reasoner when
/// `solve_unknowns` is set and skipped otherwise.
pub fn generate_qas(g: &WorldModel, states: &[SentenceState], solve_unknowns: bool) -> QaSet {
    let equations = induce_equations(g);
    let resolve = |q: &Quantity| -> Result<Rational, String> {
        match q {
            Quantity::Known(v) => Ok(v.clone()),
            Quantity::Var(v) if solve_unknowns => {
                recursive_solve(*v, &equations, &BTreeSet::new()).map_err(|e| format!("{v}: {e}"))
            }
            Quantity::Var(v) => Err(format!("{v} is unknown and solving is disabled")),
        }
    };
    let mut out = QaSet::default();
    for c in g.containers() {
        let answer = match resolve(&c.quantity) {
            Ok(a) => a,
            Err(message) => {
                out.skipped.push(QaDiagnostic { element: c.id, message });
                continue;
            }
        };
        let what = described_plural(c);
        let label = &c.structure.label;
        let anchor = anchor_of(states, c.id, true);
        for (template, question) in [
            (QaTemplate::ContainerHave, format!("How many {what} does {label} have?")),
            (
                QaTemplate::ContainerAmount,
                format!("What is the amount of {what} associated with {label}?"),
            ),
        ] {
            out.qas.push(SyntheticQa {
                question,
                answer: answer.clone(),
                anchor,
                element: c.id,
                template,
            });
        }
    }
    let mut seen_transfers = BTreeSet::new();
    for r in g.relations() {
        let source = g.container(r.source).expect("validated endpoint");
        let target = g.container(r.target).expect("validated endpoint");
        let (template, question) = match &r.kind {
            RelationKind::Transfer { recipient, sender } => {
                let key = (
                    sender.clone(),
                    recipient.clone(),
                    r.quantity.as_ref().map(Quantity::to_string),
                    source.structure.entity.clone(),
                );
                if !seen_transfers.insert(key) {
                    continue;
                }
                let mut q = format!("How many {} are transferred", described_plural(source));
                if let Some(s) = sender {
                    q.push_str(&format!(" from {s}"));
                }
                if let Some(rc) = recipient {
                    q.push_str(&format!(" to {rc}"));
                }
                q.push('?');
                (QaTemplate::Transfer, q)
            }
            RelationKind::Comparison { op: CompareOp::Add } => (
                QaTemplate::ComparisonAdd,
                format!(
                    "How many more {} does {} have than {}?",
                    described_plural(source),
                    target.structure.label,
                    source.structure.label
                ),
            ),
            RelationKind::Comparison { op: CompareOp::Mul } => (
                QaTemplate::ComparisonMul,
                format!(
                    "How much more {} does {} have than {}?",
                    source.structure.entity, source.structure.label, target.structure.label
                ),
            ),
            RelationKind::Rate => (
                QaTemplate::Rate,
                format!(
                    "How many {} does {} have per {}?",
                    described_plural(source),
                    source.structure.label,
                    target.structure.entity
                ),
            ),
            RelationKind::PartWhole => (
                QaTemplate::PartWhole,
                format!(
                    "How many {} are part of {}?",
                    described_plural(source),
                    described_plural(target)
                ),
            ),
        };
        let quantity = match &r.kind {
            RelationKind::PartWhole => &source.quantity,
            _ => r.quantity.as_ref().expect("validated relation quantity"),
        };
        match resolve(quantity) {
            Ok(answer) => out.qas.push(SyntheticQa {
                question,
                answer,
                anchor: anchor_of(states, r.id, false),
                element: r.id,
                template,
            }),
            Err(message) => out.skipped.push(QaDiagnostic { element: r.id, message }),
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PromptStyle {
    /// Body text, then the sampled QAs, then the question.
    AllAtOnce,
    /// Each sampled QA after the growing prefix ending at its anchor sentence.
    SentenceBySentence,
    /// Body text and the question only.
    Original,
}

impl PromptStyle {
    pub const ALL: [PromptStyle; 3] = [
        PromptStyle::AllAtOnce,
        PromptStyle::SentenceBySentence,
        PromptStyle::Original,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PromptStyle::AllAtOnce => "all-at-once",
            PromptStyle::SentenceBySentence => "sentence-by-sentence",
            PromptStyle::Original => "original",
        }
    }

    pub fn parse(s: &str) -> Option<PromptStyle> {
        PromptStyle::ALL.into_iter().find(|p| p.name() == s)
    }
}

/// QAs usable in a prompt: anchored to a body sentence and not about the
/// element holding the reference variable, so no QA gives the answer away.
pub fn prompt_qas(msp: &AnnotatedMsp) -> Vec<SyntheticQa> {
    let question_index = msp.sentences.len().saturating_sub(1);
    let holder = msp.graph.ref_var().and_then(|v| msp.graph.holder_of(v));
    generate_qas(&msp.graph, &msp.states, true)
        .qas
        .into_iter()
        .filter(|qa| qa.anchor.is_some_and(|a| a < question_index) && Some(qa.element) != holder)
        .collect()
}

/// Up to `k` QAs sampled without replacement, kept in (anchor, element order).
pub fn sample_qas(qas: &[SyntheticQa], k: usize, rng: &mut ChaCha8Rng) -> Vec<SyntheticQa> {
    let mut picked: Vec<usize> = rand::seq::index::sample(rng, qas.len(), k.min(qas.len())).into_vec();
    picked.sort_by_key(|&i| (qas[i].anchor, i));
    picked.into_iter().map(|i| qas[i].clone()).collect()
}

fn push_qa(out: &mut Vec<String>, question: &str, answer: Option<&Rational>) {
    out.push(format!("Q: {question}"));
    out.push(match answer {
        Some(a) => format!("A: {}", format_rational(a)),
        None => "A:".to_string(),
    });
}

fn block(msp: &AnnotatedMsp, style: PromptStyle, qas: &[SyntheticQa], answered: bool) -> String {
    let mut lines = Vec::new();
    let body = msp.body().join(" ");
    match style {
        PromptStyle::Original => {}
        PromptStyle::AllAtOnce => {
            if !body.is_empty() {
                lines.push(body.clone());
            }
            for qa in qas {
                push_qa(&mut lines, &qa.question, Some(&qa.answer));
            }
        }
        PromptStyle::SentenceBySentence => {
            let mut i = 0;
            while i < qas.len() {
                let anchor = qas[i].anchor.expect("prompt QAs are anchored");
                lines.push(msp.sentences[..=anchor].join(" "));
                while i < qas.len() && qas[i].anchor == Some(anchor) {
                    push_qa(&mut lines, &qas[i].question, Some(&qas[i].answer));
                    i += 1;
                }
            }
        }
    }
    if style != PromptStyle::AllAtOnce && !body.is_empty() {
        lines.push(body);
    }
    push_qa(
        &mut lines,
        msp.question().unwrap_or(""),
        answered.then_some(&msp.answer),
    );
    lines.join("\n")
}

/// A prompt and the QAs placed in its final (unanswered) block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prompt {
    pub text: String,
    pub qas: Vec<SyntheticQa>,
}

/// Builds a prompt for `msp` preceded by `shots` in the same style, blocks
/// separated by blank lines. One seeded generator draws the shots' QAs in
/// order, then the target's.
pub fn build_prompt(msp: &AnnotatedMsp, style: PromptStyle, k: usize, seed: u64, shots: &[AnnotatedMsp]) -> Prompt {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |m: &AnnotatedMsp| match style {
        PromptStyle::Original => Vec::new(),
        _ => sample_qas(&prompt_qas(m), k, &mut rng),
    };
    let mut blocks = Vec::with_capacity(shots.len() + 1);
    for shot in shots {
        let qas = draw(shot);
        blocks.push(block(shot, style, &qas, true));
    }
    let qas = draw(msp);
    blocks.push(block(msp, style, &qas, false));
    Prompt {
        text: blocks.join("\n\n") + "\n",
        qas,
    }
}

#[derive(Debug, Clone, Serialize)]
struct SidecarQa<'a> {
    question: &'a str,
    answer: String,
    anchor: Option<usize>,
    template: QaTemplate,
}

#[derive(Debug, Clone, Serialize)]
struct SidecarLine<'a> {
    id: &'a str,
    style: PromptStyle,
    k: usize,
    seed: u64,
    shots: Vec<&'a str>,
    qas: Vec<SidecarQa<'a>>,
    answer: String,
}

/// One JSONL line describing a built prompt for downstream scoring.
pub fn sidecar_line(
    msp: &AnnotatedMsp,
    style: PromptStyle,
    k: usize,
    seed: u64,
    shots: &[AnnotatedMsp],
    prompt: &Prompt,
) -> String {
    let line = SidecarLine {
        id: &msp.id,
        style,
        k,
        seed,
        shots: shots.iter().map(|s| s.id.as_str()).collect(),
        qas: prompt
            .qas
            .iter()
            .map(|qa| SidecarQa {
                question: &qa.question,
                answer: format_rational(&qa.answer),
                anchor: qa.anchor,
                template: qa.template,
            })
            .collect(),
        answer: format_rational(&msp.answer),
    };
    let value = serde_json::to_value(&line).expect("sidecar serializes");
    serde_json::to_string(&value).expect("value serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lf::LogicalForm;
    use crate::model::ContainerStructure;
    use crate::number::int;

    fn bobby() -> AnnotatedMsp {
        let mut g = WorldModel::new();
        let a = g.add_container(ContainerStructure::new("bobby", "candy"), Quantity::Known(int(19)));
        let x = g.fresh_var();
        let b = g.add_container(ContainerStructure::new("bobby", "candy"), Quantity::Var(x));
        let t = g
            .add_relation(
                RelationKind::Transfer {
                    recipient: None,
                    sender: Some("bobby".into()),
                },
                Some(Quantity::Known(int(2))),
                a,
                b,
            )
            .unwrap();
        g.set_ref_var(Some(x)).unwrap();
        let states = vec![
            SentenceState {
                containers: [a].into(),
                ..Default::default()
            },
            SentenceState {
                containers: [a, b].into(),
                relations: [t].into(),
                unbound: [b].into(),
            },
            SentenceState {
                containers: [a, b].into(),
                relations: [t].into(),
                unbound: [b].into(),
            },
        ];
        AnnotatedMsp {
            id: "bobby".into(),
            source_dataset: "test".into(),
            sentences: vec![
                "Bobby had 19 pieces of candy.".into(),
                "He ate 2 pieces of candy.".into(),
                "How many pieces of candy does he still have left?".into(),
            ],
            logical_forms: vec![LogicalForm::default(); 3],
            graph: g,
            states,
            answer: int(17),
        }
    }

    #[test]
    fn container_and_transfer_templates() {
        let msp = bobby();
        let set = generate_qas(&msp.graph, &msp.states, true);
        let lines: Vec<String> = set.qas.iter().map(|q| q.to_string()).collect();
        assert!(lines.contains(&"Q: How many candies does bobby have? A: 19".to_string()));
        assert!(lines.contains(&"Q: What is the amount of candies associated with bobby? A: 19".to_string()));
        assert!(lines.contains(&"Q: How many candies are transferred from bobby? A: 2".to_string()));
        assert!(lines.contains(&"Q: How many candies does bobby have? A: 17".to_string()));
        let unsolved = generate_qas(&msp.graph, &msp.states, false);
        assert_eq!(unsolved.qas.len(), 3);
        assert_eq!(unsolved.skipped.len(), 1);
        assert!(generate_qas(&WorldModel::new(), &[], true).qas.is_empty());
    }

    #[test]
    fn sentence_by_sentence_layout() {
        let msp = bobby();
        let prompt = build_prompt(&msp, PromptStyle::SentenceBySentence, 5, 0, &[]);
        let expected_prefix = "Bobby had 19 pieces of candy.\nQ: How many candies does bobby have?\nA: 19\n";
        assert!(prompt.text.starts_with(expected_prefix), "{}", prompt.text);
        assert!(prompt.text.contains(
            "Bobby had 19 pieces of candy. He ate 2 pieces of candy.\nQ: How many candies are transferred from bobby?\nA: 2\n"
        ));
        assert!(prompt.text.ends_with(
            "Bobby had 19 pieces of candy. He ate 2 pieces of candy.\nQ: How many pieces of candy does he still have left?\nA:\n"
        ));
        assert!(!prompt.text.contains("A: 17"));
    }

    #[test]
    fn original_layout_and_determinism() {
        let msp = bobby();
        let original = build_prompt(&msp, PromptStyle::Original, 2, 0, &[]);
        assert_eq!(
            original.text,
            "Bobby had 19 pieces of candy. He ate 2 pieces of candy.\nQ: How many pieces of candy does he still have left?\nA:\n"
        );
        let shot = bobby();
        let a = build_prompt(&msp, PromptStyle::AllAtOnce, 2, 7, std::slice::from_ref(&shot));
        let b = build_prompt(&msp, PromptStyle::AllAtOnce, 2, 7, std::slice::from_ref(&shot));
        assert_eq!(a, b);
        assert_eq!(a.qas.len(), 2);
        assert!(a.text.contains("A: 17\n\nBobby had"));
    }
}
