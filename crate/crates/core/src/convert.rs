//! Conversion between sentence-aligned logical forms and world models.
//!
//! [`Converter`] applies one logical form per sentence to a growing model,
//! matching predicate container specs against existing containers before
//! creating new ones. [`graph_to_lfs`] goes the other way, using the recorded
//! per-sentence states of an annotated model.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::lf::{EntitySpec, LogicalForm, Predicate};
use crate::model::{
    Container, ContainerStructure, ModelError, NodeId, Quantity, Relation, RelationKind, TransferSide, VarId,
    WorldModel,
};
use crate::normalize::Normalizer;

/// Cumulative ids present after one sentence, plus the containers whose
/// quantity is still a variable at that point.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SentenceState {
    pub containers: BTreeSet<NodeId>,
    pub relations: BTreeSet<NodeId>,
    pub unbound: BTreeSet<NodeId>,
}

impl SentenceState {
    pub fn of(model: &WorldModel) -> Self {
        SentenceState {
            containers: model.containers().map(|c| c.id).collect(),
            relations: model.relations().map(|r| r.id).collect(),
            unbound: model
                .containers()
                .filter(|c| c.quantity.var().is_some())
                .map(|c| c.id)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    /// Sentence index.
    pub form: usize,
    /// Predicate index within the sentence, when the problem is local to one.
    pub predicate: Option<usize>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.predicate {
            Some(p) => write!(f, "sentence {}, predicate {}: {}", self.form + 1, p + 1, self.message),
            None => write!(f, "sentence {}: {}", self.form + 1, self.message),
        }
    }
}

/// One container lookup made while converting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchEvent {
    pub form: usize,
    pub predicate: usize,
    pub spec: ContainerStructure,
    /// Structurally equal containers at lookup time, ascending.
    pub candidates: Vec<NodeId>,
    pub chosen: NodeId,
    pub created: bool,
}

/// Result of [`lfs_to_graph`].
#[derive(Debug, Clone)]
pub struct Conversion {
    pub model: WorldModel,
    pub states: Vec<SentenceState>,
    /// Full model after each sentence, before the reference variable is set.
    pub snapshots: Vec<WorldModel>,
    pub diagnostics: Vec<Diagnostic>,
    pub trace: Vec<MatchEvent>,
}

/// Returns the highest-id container structurally equal to `spec`.
///
/// With a variable `quantity_hint`, containers that still hold a variable are
/// preferred over more recent ones with known quantities.
pub fn match_container(
    state: &WorldModel,
    spec: &ContainerStructure,
    quantity_hint: Option<&Quantity>,
) -> Option<NodeId> {
    let n = state.normalizer();
    let candidates = state
        .containers()
        .rev()
        .filter(|c| n.structurally_equal(&c.structure, spec));
    if let Some(Quantity::Var(_)) = quantity_hint {
        let all: Vec<&Container> = candidates.collect();
        all.iter()
            .find(|c| c.quantity.var().is_some())
            .or(all.first())
            .map(|c| c.id)
    } else {
        candidates.map(|c| c.id).next()
    }
}

#[derive(Debug, Default)]
struct FormRecord {
    /// Elements whose predicate quantity was a variable token.
    var_elements: Vec<NodeId>,
    /// Endpoint containers of relation predicates with a variable token.
    endpoints: Vec<NodeId>,
}

/// Incremental builder: one [`Converter::apply`] per sentence.
#[derive(Debug, Clone)]
pub struct Converter {
    model: WorldModel,
    states: Vec<SentenceState>,
    snapshots: Vec<WorldModel>,
    diagnostics: Vec<Diagnostic>,
    trace: Vec<MatchEvent>,
    last_var_elements: Vec<NodeId>,
    last_endpoints: Vec<NodeId>,
}

impl Default for Converter {
    fn default() -> Self {
        Self::new()
    }
}

impl Converter {
    pub fn new() -> Self {
        Self::with_normalizer(Normalizer::default())
    }

    pub fn with_normalizer(normalizer: Normalizer) -> Self {
        Converter {
            model: WorldModel::with_normalizer(normalizer),
            states: Vec::new(),
            snapshots: Vec::new(),
            diagnostics: Vec::new(),
            trace: Vec::new(),
            last_var_elements: Vec::new(),
            last_endpoints: Vec::new(),
        }
    }

    pub fn state(&self) -> &WorldModel {
        &self.model
    }

    pub fn sentence_count(&self) -> usize {
        self.states.len()
    }

    pub fn diagnostics(&self) -> &[Diagnostic] {
        &self.diagnostics
    }

    /// Applies the next sentence's logical form.
    pub fn apply(&mut self, lf: &LogicalForm) {
        let form = self.states.len();
        let mut pass = FormPass {
            model: &mut self.model,
            form,
            created: BTreeSet::new(),
            record: FormRecord::default(),
            diagnostics: &mut self.diagnostics,
            trace: &mut self.trace,
        };
        for (i, p) in lf.predicates().iter().enumerate() {
            pass.apply(i, p);
        }
        let record = pass.record;
        self.last_var_elements = record.var_elements;
        self.last_endpoints = record.endpoints;
        self.states.push(SentenceState::of(&self.model));
        self.snapshots.push(self.model.clone());
    }

    /// Variable selected by the most recent form: the highest-id element whose
    /// predicate quantity was a variable token, else the highest-id endpoint of
    /// such a relation predicate that holds a variable.
    pub fn question_variable(&self) -> Option<VarId> {
        let quantity_var = |id: NodeId| {
            self.model
                .container(id)
                .map(|c| c.quantity.clone())
                .or_else(|| self.model.relation(id).and_then(|r| r.quantity.clone()))
                .and_then(|q| q.var())
        };
        let pick = |ids: &[NodeId]| {
            let mut sorted = ids.to_vec();
            sorted.sort_unstable();
            sorted.into_iter().rev().find_map(quantity_var)
        };
        pick(&self.last_var_elements).or_else(|| pick(&self.last_endpoints))
    }

    /// Sets the reference variable from the last form and returns the result.
    pub fn finish(mut self) -> Conversion {
        let var = self.question_variable();
        if var.is_none() && !self.states.is_empty() {
            self.diagnostics.push(Diagnostic {
                form: self.states.len() - 1,
                predicate: None,
                message: "question form matches no variable; reference variable is absent".into(),
            });
        }
        self.model
            .set_ref_var(var)
            .expect("selected variable occurs in the model");
        Conversion {
            model: self.model,
            states: self.states,
            snapshots: self.snapshots,
            diagnostics: self.diagnostics,
            trace: self.trace,
        }
    }
}

/// Builds a world model from sentence-aligned logical forms; the last form is the question.
pub fn lfs_to_graph(forms: &[LogicalForm]) -> Conversion {
    lfs_to_graph_with(forms, Normalizer::default())
}

pub fn lfs_to_graph_with(forms: &[LogicalForm], normalizer: Normalizer) -> Conversion {
    let mut converter = Converter::with_normalizer(normalizer);
    for lf in forms {
        converter.apply(lf);
    }
    converter.finish()
}

struct FormPass<'a> {
    model: &'a mut WorldModel,
    form: usize,
    created: BTreeSet<NodeId>,
    record: FormRecord,
    diagnostics: &'a mut Vec<Diagnostic>,
    trace: &'a mut Vec<MatchEvent>,
}

impl FormPass<'_> {
    fn diagnose(&mut self, predicate: usize, message: impl Into<String>) {
        let d = Diagnostic {
            form: self.form,
            predicate: Some(predicate),
            message: message.into(),
        };
        log::debug!("{d}");
        self.diagnostics.push(d);
    }

    fn candidates(&self, spec: &ContainerStructure) -> Vec<NodeId> {
        let n = self.model.normalizer();
        self.model
            .containers()
            .filter(|c| n.structurally_equal(&c.structure, spec))
            .map(|c| c.id)
            .collect()
    }

    fn create(
        &mut self,
        predicate: usize,
        spec: &ContainerStructure,
        quantity: Quantity,
        candidates: Vec<NodeId>,
    ) -> NodeId {
        let id = self.model.add_container(spec.clone(), quantity);
        self.created.insert(id);
        self.trace.push(MatchEvent {
            form: self.form,
            predicate,
            spec: spec.clone(),
            candidates,
            chosen: id,
            created: true,
        });
        id
    }

    fn chose(
        &mut self,
        predicate: usize,
        spec: &ContainerStructure,
        candidates: Vec<NodeId>,
        chosen: NodeId,
    ) -> NodeId {
        self.trace.push(MatchEvent {
            form: self.form,
            predicate,
            spec: spec.clone(),
            candidates,
            chosen,
            created: false,
        });
        chosen
    }

    fn fresh(&mut self) -> Quantity {
        Quantity::Var(self.model.fresh_var())
    }

    /// Most recent match not in `exclude`, or a new variable container.
    fn endpoint(&mut self, predicate: usize, spec: &ContainerStructure, exclude: &[NodeId]) -> NodeId {
        let candidates: Vec<NodeId> = self
            .candidates(spec)
            .into_iter()
            .filter(|id| !exclude.contains(id))
            .collect();
        match candidates.last().copied() {
            Some(id) => self.chose(predicate, spec, candidates, id),
            None => {
                let q = self.fresh();
                self.create(predicate, spec, q, candidates)
            }
        }
    }

    fn add_relation(
        &mut self,
        predicate: usize,
        kind: RelationKind,
        quantity: Option<Quantity>,
        source: NodeId,
        target: NodeId,
    ) -> Option<NodeId> {
        match self.model.add_relation(kind, quantity, source, target) {
            Ok(id) => Some(id),
            Err(e) => {
                self.diagnose(predicate, format!("relation dropped: {e}"));
                None
            }
        }
    }

    fn has_transfer_edge(&self, id: NodeId) -> bool {
        self.model
            .relations()
            .any(|r| matches!(r.kind, RelationKind::Transfer { .. }) && (r.source == id || r.target == id))
    }

    fn relation_matches(&self, r: &Relation, source: &ContainerStructure, target: Option<&ContainerStructure>) -> bool {
        let n = self.model.normalizer();
        let s = self.model.container(r.source).expect("validated endpoint");
        let t = self.model.container(r.target).expect("validated endpoint");
        n.structurally_equal(&s.structure, source) && target.is_none_or(|spec| n.structurally_equal(&t.structure, spec))
    }

    /// Highest-id relation of `kind` holding a variable whose endpoints match.
    fn reusable(
        &self,
        kind: &RelationKind,
        source: &ContainerStructure,
        target: Option<&ContainerStructure>,
    ) -> Option<NodeId> {
        let n = self.model.normalizer();
        let same_kind = |a: &RelationKind| match (a, kind) {
            (
                RelationKind::Transfer {
                    recipient: r1,
                    sender: s1,
                },
                RelationKind::Transfer {
                    recipient: r2,
                    sender: s2,
                },
            ) => {
                let eq = |x: &Option<String>, y: &Option<String>| match (x, y) {
                    (None, None) => true,
                    (Some(x), Some(y)) => n.label(x) == n.label(y),
                    _ => false,
                };
                eq(r1, r2) && eq(s1, s2)
            }
            (a, b) => a == b,
        };
        self.model
            .relations()
            .rev()
            .filter(|r| same_kind(&r.kind) && r.quantity.as_ref().and_then(Quantity::var).is_some())
            .find(|r| self.relation_matches(r, source, target))
            .map(|r| r.id)
    }

    fn note_relation(&mut self, was_var: bool, relation: Option<NodeId>, endpoints: &[NodeId]) {
        if !was_var {
            return;
        }
        if let Some(id) = relation {
            self.record.var_elements.push(id);
        }
        self.record.endpoints.extend_from_slice(endpoints);
    }

    fn apply(&mut self, i: usize, predicate: &Predicate) {
        match predicate {
            Predicate::Container { structure, quantity } => self.container(i, structure, quantity),
            Predicate::Transfer {
                recipient,
                sender,
                quantity,
                entity,
            } => self.transfer(i, recipient, sender, quantity, entity),
            Predicate::Rate {
                label,
                quantity,
                source,
                target,
            } => {
                let src = source.with_label(label);
                let tgt = target.with_label(label);
                self.binary(i, RelationKind::Rate, quantity, &src, &tgt);
            }
            Predicate::Comparison {
                op,
                target_label,
                source_label,
                quantity,
                target,
                source,
            } => {
                let src = source.with_label(source_label);
                let tgt = target.with_label(target_label);
                self.binary(i, RelationKind::Comparison { op: *op }, quantity, &src, &tgt);
            }
            Predicate::Part { whole, parts } => self.part(i, whole, parts),
        }
    }

    fn container(&mut self, i: usize, spec: &ContainerStructure, quantity: &Quantity) {
        let candidates = self.candidates(spec);
        match quantity {
            Quantity::Known(_) => {
                let unbound = candidates
                    .iter()
                    .rev()
                    .copied()
                    .find(|id| self.model.container(*id).is_some_and(|c| c.quantity.var().is_some()));
                match unbound {
                    Some(id) => {
                        self.chose(i, spec, candidates, id);
                        self.model.set_container_quantity(id, quantity.clone());
                    }
                    None => {
                        self.create(i, spec, quantity.clone(), candidates);
                    }
                }
            }
            Quantity::Var(_) => {
                let id = match match_container(self.model, spec, Some(quantity)) {
                    Some(id) => self.chose(i, spec, candidates, id),
                    None => {
                        let q = self.fresh();
                        self.create(i, spec, q, candidates)
                    }
                };
                self.record.var_elements.push(id);
            }
        }
    }

    fn transfer(
        &mut self,
        i: usize,
        recipient: &Option<String>,
        sender: &Option<String>,
        quantity: &Quantity,
        entity: &EntitySpec,
    ) {
        if recipient.is_none() && sender.is_none() {
            self.diagnose(i, "transfer without recipient or sender dropped");
            return;
        }
        let n = *self.model.normalizer();
        if let (Some(r), Some(s)) = (recipient, sender) {
            if n.label(r) == n.label(s) {
                self.diagnose(i, "transfer with identical recipient and sender dropped");
                return;
            }
        }
        let kind = RelationKind::Transfer {
            recipient: recipient.clone(),
            sender: sender.clone(),
        };
        let sides: Vec<&String> = [sender, recipient].into_iter().flatten().collect();
        let is_var = matches!(quantity, Quantity::Var(_));
        if is_var {
            let reused: Vec<NodeId> = sides
                .iter()
                .filter_map(|label| self.reusable(&kind, &entity.with_label(label), None))
                .collect();
            if let Some(&id) = reused.iter().max() {
                let r = self.model.relation(id).expect("reused relation exists");
                let endpoints = [r.source, r.target];
                self.note_relation(true, Some(id), &endpoints);
                return;
            }
        }
        let q = if is_var { self.fresh() } else { quantity.clone() };
        for label in sides {
            let spec = entity.with_label(label);
            let candidates = self.candidates(&spec);
            let (source, target) = match candidates.last().copied() {
                None => {
                    let q = self.fresh();
                    (self.create(i, &spec, q, candidates), None)
                }
                Some(recent) => {
                    let same_form_target =
                        self.created.contains(&recent) && !self.has_transfer_edge(recent) && candidates.len() >= 2;
                    if same_form_target {
                        let older = candidates[candidates.len() - 2];
                        (self.chose(i, &spec, candidates, older), Some(recent))
                    } else {
                        (self.chose(i, &spec, candidates, recent), None)
                    }
                }
            };
            let target = match target {
                Some(t) => t,
                None => {
                    let q = self.fresh();
                    self.create(i, &spec, q, Vec::new())
                }
            };
            let id = self.add_relation(i, kind.clone(), Some(q.clone()), source, target);
            self.note_relation(is_var, id, &[source, target]);
        }
    }

    fn binary(
        &mut self,
        i: usize,
        kind: RelationKind,
        quantity: &Quantity,
        src: &ContainerStructure,
        tgt: &ContainerStructure,
    ) {
        let is_var = matches!(quantity, Quantity::Var(_));
        if is_var {
            if let Some(id) = self.reusable(&kind, src, Some(tgt)) {
                let r = self.model.relation(id).expect("reused relation exists");
                let endpoints = [r.source, r.target];
                self.note_relation(true, Some(id), &endpoints);
                return;
            }
        }
        let source = self.endpoint(i, src, &[]);
        let target = self.endpoint(i, tgt, &[source]);
        let q = if is_var { self.fresh() } else { quantity.clone() };
        let id = self.add_relation(i, kind, Some(q), source, target);
        self.note_relation(is_var, id, &[source, target]);
    }

    fn part(&mut self, i: usize, whole: &ContainerStructure, parts: &[ContainerStructure]) {
        let whole_id = self.endpoint(i, whole, &[]);
        let mut used = vec![whole_id];
        for spec in parts {
            let part_id = self.endpoint(i, spec, &used);
            used.push(part_id);
            let exists = self
                .model
                .relations()
                .any(|r| r.kind == RelationKind::PartWhole && r.source == part_id && r.target == whole_id);
            if !exists {
                self.add_relation(i, RelationKind::PartWhole, None, part_id, whole_id);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConvertError {
    #[error("no sentence states recorded")]
    MissingStates,
    #[error("sentence {sentence}: id {id} from the previous state was removed")]
    NodeRemoved { sentence: usize, id: NodeId },
    #[error("sentence {sentence}: id {id} is not in the graph")]
    UnknownId { sentence: usize, id: NodeId },
    #[error("sentence {sentence}: relation {id} appears before its endpoints")]
    DanglingRelation { sentence: usize, id: NodeId },
    #[error("sentence {sentence}: container {id} is marked unbound but holds a known quantity")]
    InconsistentBinding { sentence: usize, id: NodeId },
    #[error("sentence {sentence}: container {id} becomes unbound again")]
    Unbinding { sentence: usize, id: NodeId },
    #[error("final state does not cover id {0}")]
    Uncovered(NodeId),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Checks that states are monotone, reference existing ids and cover the graph.
pub fn validate_states(model: &WorldModel, states: &[SentenceState]) -> Result<(), ConvertError> {
    if states.is_empty() {
        return Err(ConvertError::MissingStates);
    }
    let mut prev = SentenceState::default();
    for (s, state) in states.iter().enumerate() {
        let sentence = s + 1;
        if let Some(&id) = prev.containers.difference(&state.containers).next() {
            return Err(ConvertError::NodeRemoved { sentence, id });
        }
        if let Some(&id) = prev.relations.difference(&state.relations).next() {
            return Err(ConvertError::NodeRemoved { sentence, id });
        }
        for &id in &state.containers {
            if model.container(id).is_none() {
                return Err(ConvertError::UnknownId { sentence, id });
            }
        }
        for &id in &state.relations {
            let r = model.relation(id).ok_or(ConvertError::UnknownId { sentence, id })?;
            if !state.containers.contains(&r.source) || !state.containers.contains(&r.target) {
                return Err(ConvertError::DanglingRelation { sentence, id });
            }
        }
        for &id in &state.unbound {
            if !state.containers.contains(&id) {
                return Err(ConvertError::UnknownId { sentence, id });
            }
        }
        for &id in &state.containers {
            let var_now = model.container(id).is_some_and(|c| c.quantity.var().is_some());
            if var_now && !state.unbound.contains(&id) {
                return Err(ConvertError::InconsistentBinding { sentence, id });
            }
            if prev.containers.contains(&id) && !prev.unbound.contains(&id) && state.unbound.contains(&id) {
                return Err(ConvertError::Unbinding { sentence, id });
            }
        }
        prev = state.clone();
    }
    for c in model.containers() {
        if !prev.containers.contains(&c.id) {
            return Err(ConvertError::Uncovered(c.id));
        }
    }
    for r in model.relations() {
        if !prev.relations.contains(&r.id) {
            return Err(ConvertError::Uncovered(r.id));
        }
    }
    Ok(())
}

/// Linearizes an annotated model into one logical form per sentence; the last
/// sentence is the question.
pub fn graph_to_lfs(model: &WorldModel, states: &[SentenceState]) -> Result<Vec<LogicalForm>, ConvertError> {
    validate_states(model, states)?;
    let last = states.len() - 1;
    let mut prev = SentenceState::default();
    let mut out = Vec::with_capacity(states.len());
    for (s, state) in states.iter().enumerate() {
        let question = s == last;
        let mut w = Linearizer {
            model,
            state,
            emitted: BTreeSet::new(),
            predicates: Vec::new(),
        };
        let new_containers: BTreeSet<NodeId> = state.containers.difference(&prev.containers).copied().collect();
        let newly_bound: BTreeSet<NodeId> = prev
            .unbound
            .iter()
            .filter(|id| !state.unbound.contains(id))
            .copied()
            .collect();
        let new_relations: BTreeSet<NodeId> = state.relations.difference(&prev.relations).copied().collect();
        let created_by_relation: BTreeSet<NodeId> = new_relations
            .iter()
            .filter_map(|id| model.relation(*id))
            .flat_map(|r| [r.source, r.target])
            .filter(|id| new_containers.contains(id))
            .collect();
        let pending: BTreeSet<NodeId> = new_containers
            .iter()
            .chain(&newly_bound)
            .copied()
            .filter(|id| {
                let bound = !state.unbound.contains(id);
                bound || (question && !created_by_relation.contains(id))
            })
            .collect();
        let mut order: Vec<NodeId> = pending.iter().chain(&new_relations).copied().collect();
        order.sort_unstable();
        let mut skip_pairs = BTreeSet::new();
        let mut wholes_done = BTreeSet::new();
        for id in order {
            if pending.contains(&id) {
                w.container(id);
                continue;
            }
            let r = model.relation(id).expect("validated relation");
            for end in [r.source, r.target] {
                if pending.contains(&end) {
                    w.container(end);
                }
            }
            match &r.kind {
                RelationKind::PartWhole => {
                    if wholes_done.insert(r.target) {
                        w.part(r.target);
                    }
                }
                RelationKind::Transfer { .. } => {
                    if skip_pairs.remove(&id) {
                        continue;
                    }
                    if let Some(partner) = transfer_partner(model, r) {
                        skip_pairs.insert(partner);
                    }
                    w.relation(r);
                }
                _ => w.relation(r),
            }
        }
        if question {
            if let Some(holder) = model.ref_var().and_then(|v| model.holder_of(v)) {
                if model.container(holder).is_some() {
                    w.container(holder);
                } else if let Some(r) = model.relation(holder) {
                    if !w.emitted.contains(&holder)
                        && !transfer_partner(model, r).is_some_and(|p| w.emitted.contains(&p))
                    {
                        w.relation(r);
                    }
                }
            }
        }
        out.push(LogicalForm(w.predicates));
        prev = state.clone();
    }
    Ok(out)
}

/// The other edge of a two-owner transfer: same properties, opposite side.
fn transfer_partner(model: &WorldModel, r: &Relation) -> Option<NodeId> {
    let RelationKind::Transfer {
        recipient: Some(_),
        sender: Some(_),
    } = &r.kind
    else {
        return None;
    };
    let side = model.transfer_side(r)?;
    model
        .relations()
        .filter(|o| o.id != r.id && o.kind == r.kind && o.quantity == r.quantity)
        .filter(|o| model.transfer_side(o).is_some_and(|s| s != side))
        .min_by_key(|o| o.id.abs_diff(r.id))
        .map(|o| o.id)
}

struct Linearizer<'a> {
    model: &'a WorldModel,
    state: &'a SentenceState,
    emitted: BTreeSet<NodeId>,
    predicates: Vec<Predicate>,
}

impl Linearizer<'_> {
    fn structure(&self, id: NodeId) -> &ContainerStructure {
        &self.model.container(id).expect("validated endpoint").structure
    }

    fn container(&mut self, id: NodeId) {
        if !self.emitted.insert(id) {
            return;
        }
        let c = self.model.container(id).expect("validated container");
        self.predicates.push(Predicate::Container {
            structure: c.structure.clone(),
            quantity: c.quantity.clone(),
        });
    }

    fn relation(&mut self, r: &Relation) {
        self.emitted.insert(r.id);
        let quantity = r.quantity.clone().expect("validated relation quantity");
        let src = self.structure(r.source);
        let tgt = self.structure(r.target);
        let p = match &r.kind {
            RelationKind::Transfer { recipient, sender } => {
                let (recipient, sender) = match (recipient, sender) {
                    (Some(_), Some(_)) => (recipient.clone(), sender.clone()),
                    _ => match self.model.transfer_side(r) {
                        Some(TransferSide::Sender) => (None, Some(src.label.clone())),
                        _ => (Some(src.label.clone()), None),
                    },
                };
                Predicate::Transfer {
                    recipient,
                    sender,
                    quantity,
                    entity: EntitySpec::of(src),
                }
            }
            RelationKind::Rate => Predicate::Rate {
                label: src.label.clone(),
                quantity,
                source: EntitySpec::of(src),
                target: EntitySpec::of(tgt),
            },
            RelationKind::Comparison { op } => Predicate::Comparison {
                op: *op,
                target_label: tgt.label.clone(),
                source_label: src.label.clone(),
                quantity,
                target: EntitySpec::of(tgt),
                source: EntitySpec::of(src),
            },
            RelationKind::PartWhole => unreachable!("part-whole edges are grouped per whole"),
        };
        self.predicates.push(p);
    }

    /// One part predicate with every part present in the current state; fewer
    /// than two parts cannot be expressed and are dropped.
    fn part(&mut self, whole: NodeId) {
        let parts: Vec<NodeId> = self
            .model
            .relations()
            .filter(|r| r.kind == RelationKind::PartWhole && r.target == whole && self.state.relations.contains(&r.id))
            .map(|r| r.source)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        if parts.len() < 2 {
            log::debug!(
                "part-whole into {whole} has {} part(s) in this sentence; not expressible",
                parts.len()
            );
            return;
        }
        self.predicates.push(Predicate::Part {
            whole: self.structure(whole).clone(),
            parts: parts.iter().map(|p| self.structure(*p).clone()).collect(),
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lf::{parse_logical_form, ParseMode};
    use crate::model::CompareOp;
    use crate::number::int;

    fn forms(texts: &[&str]) -> Vec<LogicalForm> {
        texts
            .iter()
            .map(|t| parse_logical_form(t, ParseMode::Strict).unwrap())
            .collect()
    }

    #[test]
    fn cafeteria_chain() {
        let conv = lfs_to_graph(&forms(&[
            "container(school cafeteria, 14, apple, none, none)",
            "transfer(none, school cafeteria, 13, apple, none, none) transfer(school cafeteria, none, 49, apple, none, none)",
            "container(school cafeteria, x2, apple, none, none)",
        ]));
        let g = &conv.model;
        assert_eq!(g.container_count(), 3);
        assert_eq!(g.relation_count(), 2);
        assert_eq!(g.ref_var(), Some(VarId(2)));
        assert!(conv.diagnostics.is_empty(), "{:?}", conv.diagnostics);
    }

    #[test]
    fn balloons_relation_variable() {
        let conv = lfs_to_graph(&forms(&[
            "container(James, 232, balloon, none, none)",
            "container(Amy, 101, balloon, none, none)",
            "difference(James, Amy, x1, balloon, none, none, balloon, none, none)",
        ]));
        let g = &conv.model;
        assert_eq!(g.container_count(), 2);
        assert_eq!(g.relation_count(), 1);
        let r = g.relations().next().unwrap();
        assert_eq!(r.kind, RelationKind::Comparison { op: CompareOp::Add });
        assert_eq!(g.container(r.source).unwrap().structure.label, "Amy");
        assert_eq!(g.ref_var(), Some(VarId(1)));
        assert_eq!(g.holder_of(VarId(1)), Some(r.id));
    }

    #[test]
    fn single_declarative_has_no_reference() {
        let conv = lfs_to_graph(&forms(&["container(a, 5, apple, none, none)"]));
        assert_eq!(conv.model.container_count(), 1);
        assert_eq!(conv.model.ref_var(), None);
    }

    #[test]
    fn match_prefers_most_recent() {
        let mut g = WorldModel::new();
        let spec = ContainerStructure::new("Alice", "apple");
        let mut ids = Vec::new();
        for k in 1..=7 {
            let s = if k == 3 || k == 7 {
                spec.clone()
            } else {
                ContainerStructure::new("Bob", format!("e{k}"))
            };
            ids.push(g.add_container(s, Quantity::Known(int(k))));
        }
        assert_eq!(match_container(&g, &spec, None), Some(7));
        assert_eq!(
            match_container(&g, &ContainerStructure::new("Carol", "apple"), None),
            None
        );
        assert_eq!(
            match_container(&g, &ContainerStructure::new("Bob", "e1"), None),
            Some(1)
        );
    }

    #[test]
    fn known_container_binds_variable() {
        let conv = lfs_to_graph(&forms(&[
            "container(Alice, 5, apple, none, none)",
            "transfer(none, Alice, 2, apple, none, none)",
            "container(Alice, 3, apple, none, none)",
        ]));
        assert_eq!(conv.model.container_count(), 2);
        assert_eq!(conv.states[1].unbound.len(), 1);
        assert!(conv.states[2].unbound.is_empty());
    }

    #[test]
    fn ownerless_transfer_is_dropped() {
        let conv = lfs_to_graph(&forms(&[
            "container(Alice, 5, apple, none, none)",
            "transfer(none, none, 2, apple, none, none)",
        ]));
        assert_eq!(conv.model.relation_count(), 0);
        assert_eq!(conv.diagnostics.len(), 2);
    }

    #[test]
    fn two_owner_transfer_makes_two_edges() {
        let conv = lfs_to_graph(&forms(&[
            "container(Alice, 5, apple, none, none) container(Bob, 4, apple, none, none)",
            "transfer(Bob, Alice, 3, apple, none, none)",
            "container(Bob, x9, apple, none, none)",
        ]));
        let g = &conv.model;
        assert_eq!(g.container_count(), 4);
        assert_eq!(g.relation_count(), 2);
        let holder = g.holder_of(g.ref_var().unwrap()).unwrap();
        assert_eq!(g.container(holder).unwrap().structure.label, "Bob");
    }

    #[test]
    fn ate_two_linearizes_without_target() {
        let mut g = WorldModel::new();
        let a = g.add_container(ContainerStructure::new("Alice", "apple"), Quantity::Known(int(5)));
        let s1 = SentenceState::of(&g);
        let v = g.fresh_var();
        let b = g.add_container(ContainerStructure::new("Alice", "apple"), Quantity::Var(v));
        g.add_relation(
            RelationKind::Transfer {
                recipient: None,
                sender: Some("Alice".into()),
            },
            Some(Quantity::Known(int(2))),
            a,
            b,
        )
        .unwrap();
        let s2 = SentenceState::of(&g);
        let lfs = graph_to_lfs(&g, &[s1, s2]).unwrap();
        let text: Vec<String> = lfs.iter().map(|l| l.to_string()).collect();
        assert_eq!(
            text,
            vec![
                "container(Alice, 5, apple, none, none)",
                "transfer(none, Alice, 2, apple, none, none)"
            ]
        );
    }

    #[test]
    fn removal_is_rejected() {
        let mut g = WorldModel::new();
        g.add_container(ContainerStructure::new("Alice", "apple"), Quantity::Known(int(5)));
        let full = SentenceState::of(&g);
        let err = graph_to_lfs(&g, &[full.clone(), SentenceState::default(), full]).unwrap_err();
        assert!(matches!(err, ConvertError::NodeRemoved { sentence: 2, id: 1 }));
    }
}
