//! World-model graphs: containers, typed relations and variables.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_traits::Signed;
use thiserror::Error;

use crate::normalize::Normalizer;
use crate::number::{format_rational, parse_rational, Rational};

/// Unknown quantity `x{n}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub u32);

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

impl FromStr for VarId {
    type Err = QuantityError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let digits = s
            .strip_prefix('x')
            .filter(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
            .ok_or_else(|| QuantityError::Malformed(s.to_string()))?;
        digits
            .parse()
            .map(VarId)
            .map_err(|_| QuantityError::Malformed(s.to_string()))
    }
}

pub fn is_var_token(s: &str) -> bool {
    s.parse::<VarId>().is_ok()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuantityError {
    #[error("malformed quantity {0:?}")]
    Malformed(String),
    #[error("quantity {0} is not strictly positive")]
    NotPositive(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Quantity {
    Known(Rational),
    Var(VarId),
}

impl Quantity {
    /// Known quantity; rejects zero and negative values.
    pub fn known(value: Rational) -> Result<Self, QuantityError> {
        if value.is_positive() {
            Ok(Quantity::Known(value))
        } else {
            Err(QuantityError::NotPositive(format_rational(&value)))
        }
    }

    pub fn var(&self) -> Option<VarId> {
        match self {
            Quantity::Var(v) => Some(*v),
            Quantity::Known(_) => None,
        }
    }

    pub fn value(&self) -> Option<&Rational> {
        match self {
            Quantity::Known(v) => Some(v),
            Quantity::Var(_) => None,
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantity::Known(v) => f.write_str(&format_rational(v)),
            Quantity::Var(v) => v.fmt(f),
        }
    }
}

impl FromStr for Quantity {
    type Err = QuantityError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.starts_with('x') {
            return s.parse().map(Quantity::Var);
        }
        let value = parse_rational(s).map_err(|_| QuantityError::Malformed(s.to_string()))?;
        Quantity::known(value)
    }
}

/// Label, entity and optional attribute/unit of a container.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ContainerStructure {
    pub label: String,
    pub entity: String,
    pub attribute: Option<String>,
    pub unit: Option<String>,
}

impl ContainerStructure {
    pub fn new(label: impl Into<String>, entity: impl Into<String>) -> Self {
        ContainerStructure {
            label: label.into(),
            entity: entity.into(),
            attribute: None,
            unit: None,
        }
    }

    pub fn with_attribute(mut self, attribute: impl Into<String>) -> Self {
        self.attribute = Some(attribute.into());
        self
    }

    pub fn with_unit(mut self, unit: impl Into<String>) -> Self {
        self.unit = Some(unit.into());
        self
    }

    /// Container label used when no possessor is expressed.
    pub const WORLD: &'static str = "World";
}

impl fmt::Display for ContainerStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}/{}/{}/{}",
            self.label,
            self.entity,
            self.attribute.as_deref().unwrap_or("-"),
            self.unit.as_deref().unwrap_or("-")
        )
    }
}

impl Normalizer {
    pub fn structurally_equal(&self, a: &ContainerStructure, b: &ContainerStructure) -> bool {
        let opt = |x: &Option<String>, y: &Option<String>| match (x, y) {
            (None, None) => true,
            (Some(x), Some(y)) => self.term(x) == self.term(y),
            _ => false,
        };
        self.label(&a.label) == self.label(&b.label)
            && self.term(&a.entity) == self.term(&b.entity)
            && opt(&a.attribute, &b.attribute)
            && opt(&a.unit, &b.unit)
    }
}

/// Structural equality under the default normalizer.
pub fn structural_equal(a: &ContainerStructure, b: &ContainerStructure) -> bool {
    Normalizer::default().structurally_equal(a, b)
}

/// Node identifier; containers and relations share one creation-ordered space.
pub type NodeId = u32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Container {
    pub id: NodeId,
    pub structure: ContainerStructure,
    pub quantity: Quantity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CompareOp {
    Add,
    Mul,
}

impl CompareOp {
    pub fn as_str(self) -> &'static str {
        match self {
            CompareOp::Add => "add",
            CompareOp::Mul => "mul",
        }
    }

    /// Accepts `add`, `mul` and the `times` alias.
    pub fn parse(s: &str) -> Option<CompareOp> {
        match s.trim().to_ascii_lowercase().as_str() {
            "add" => Some(CompareOp::Add),
            "mul" | "times" => Some(CompareOp::Mul),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RelationKind {
    Transfer {
        recipient: Option<String>,
        sender: Option<String>,
    },
    Rate,
    Comparison {
        op: CompareOp,
    },
    PartWhole,
}

/// Relation type without properties, as used for isomorphism checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RelationType {
    Transfer,
    Rate,
    ComparisonAdd,
    ComparisonMul,
    PartWhole,
}

impl RelationType {
    pub fn name(self) -> &'static str {
        match self {
            RelationType::Transfer => "transfer",
            RelationType::Rate => "rate",
            RelationType::ComparisonAdd => "comparison-add",
            RelationType::ComparisonMul => "comparison-mul",
            RelationType::PartWhole => "part-whole",
        }
    }

    pub const ALL: [RelationType; 5] = [
        RelationType::Transfer,
        RelationType::Rate,
        RelationType::ComparisonAdd,
        RelationType::ComparisonMul,
        RelationType::PartWhole,
    ];
}

impl RelationKind {
    pub fn relation_type(&self) -> RelationType {
        match self {
            RelationKind::Transfer { .. } => RelationType::Transfer,
            RelationKind::Rate => RelationType::Rate,
            RelationKind::Comparison { op: CompareOp::Add } => RelationType::ComparisonAdd,
            RelationKind::Comparison { op: CompareOp::Mul } => RelationType::ComparisonMul,
            RelationKind::PartWhole => RelationType::PartWhole,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    pub id: NodeId,
    pub kind: RelationKind,
    pub quantity: Option<Quantity>,
    pub source: NodeId,
    pub target: NodeId,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RelationError {
    #[error("relation endpoint {0} does not exist")]
    UnknownEndpoint(NodeId),
    #[error("sender/recipient missing")]
    SenderRecipientMissing,
    #[error("transfer endpoints are not structurally equal")]
    StructureMismatch,
    #[error("transfer endpoint label matches neither sender nor recipient")]
    TransferSideUnknown,
    #[error("label mismatch")]
    LabelMismatch,
    #[error("quantity missing")]
    QuantityMissing,
    #[error("part-whole relations carry no quantity")]
    UnexpectedQuantity,
    #[error("relation is a self-loop")]
    SelfLoop,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("id {0} is already in use")]
    DuplicateId(NodeId),
    #[error("container {0} does not exist")]
    UnknownContainer(NodeId),
    #[error("relation {id}: {source}")]
    InvalidRelation {
        id: NodeId,
        #[source]
        source: RelationError,
    },
    #[error("variable {0} is already used by another quantity")]
    DuplicateVariable(VarId),
    #[error("reference variable {0} does not occur in the model")]
    UnknownReference(VarId),
    #[error("container {0} does not hold a variable quantity")]
    NotAVariable(NodeId),
}

/// Which side of a transfer a relation edge sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransferSide {
    Recipient,
    Sender,
}

/// A world model: containers, relations and the reference variable.
///
/// Equality ignores which variable names have been handed out.
#[derive(Debug, Clone, Default)]
pub struct WorldModel {
    containers: BTreeMap<NodeId, Container>,
    relations: BTreeMap<NodeId, Relation>,
    ref_var: Option<VarId>,
    allocated: BTreeSet<VarId>,
    normalizer: Normalizer,
}

impl PartialEq for WorldModel {
    fn eq(&self, other: &Self) -> bool {
        self.containers == other.containers
            && self.relations == other.relations
            && self.ref_var == other.ref_var
            && self.normalizer == other.normalizer
    }
}

impl Eq for WorldModel {}

impl WorldModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_normalizer(normalizer: Normalizer) -> Self {
        WorldModel {
            normalizer,
            ..Self::default()
        }
    }

    pub fn normalizer(&self) -> &Normalizer {
        &self.normalizer
    }

    pub fn containers(&self) -> impl DoubleEndedIterator<Item = &Container> + ExactSizeIterator + Clone {
        self.containers.values()
    }

    pub fn relations(&self) -> impl DoubleEndedIterator<Item = &Relation> + ExactSizeIterator + Clone {
        self.relations.values()
    }

    pub fn container(&self, id: NodeId) -> Option<&Container> {
        self.containers.get(&id)
    }

    pub fn relation(&self, id: NodeId) -> Option<&Relation> {
        self.relations.get(&id)
    }

    pub fn container_count(&self) -> usize {
        self.containers.len()
    }

    pub fn relation_count(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.containers.is_empty() && self.relations.is_empty()
    }

    pub fn ref_var(&self) -> Option<VarId> {
        self.ref_var
    }

    pub fn next_id(&self) -> NodeId {
        let c = self.containers.keys().next_back().copied().unwrap_or(0);
        let r = self.relations.keys().next_back().copied().unwrap_or(0);
        c.max(r) + 1
    }

    fn id_in_use(&self, id: NodeId) -> bool {
        self.containers.contains_key(&id) || self.relations.contains_key(&id)
    }

    /// Allocates `x{k}` with `k` one past the number of variables allocated so far,
    /// skipping names that are already taken.
    pub fn fresh_var(&mut self) -> VarId {
        let mut k = self.allocated.len() as u32 + 1;
        while self.allocated.contains(&VarId(k)) {
            k += 1;
        }
        let var = VarId(k);
        self.allocated.insert(var);
        var
    }

    /// Variables currently held by some container or relation, in name order.
    pub fn variables(&self) -> BTreeSet<VarId> {
        self.containers
            .values()
            .filter_map(|c| c.quantity.var())
            .chain(self.relations.values().filter_map(|r| r.quantity.as_ref()?.var()))
            .collect()
    }

    fn register_quantity(&mut self, q: &Quantity) {
        if let Quantity::Var(v) = q {
            self.allocated.insert(*v);
        }
    }

    pub fn add_container(&mut self, structure: ContainerStructure, quantity: Quantity) -> NodeId {
        let id = self.next_id();
        self.insert_container(Container {
            id,
            structure,
            quantity,
        })
        .expect("next_id is unused");
        id
    }

    /// Inserts a container with an explicit id. A container variable may not be
    /// shared with any other quantity.
    pub fn insert_container(&mut self, container: Container) -> Result<NodeId, ModelError> {
        if self.id_in_use(container.id) {
            return Err(ModelError::DuplicateId(container.id));
        }
        if let Quantity::Var(v) = container.quantity {
            if self.variables().contains(&v) {
                return Err(ModelError::DuplicateVariable(v));
            }
        }
        self.register_quantity(&container.quantity);
        let id = container.id;
        self.containers.insert(id, container);
        Ok(id)
    }

    pub fn add_relation(
        &mut self,
        kind: RelationKind,
        quantity: Option<Quantity>,
        source: NodeId,
        target: NodeId,
    ) -> Result<NodeId, ModelError> {
        let id = self.next_id();
        self.insert_relation(Relation {
            id,
            kind,
            quantity,
            source,
            target,
        })
    }

    /// Inserts a validated relation with an explicit id.
    pub fn insert_relation(&mut self, relation: Relation) -> Result<NodeId, ModelError> {
        if self.id_in_use(relation.id) {
            return Err(ModelError::DuplicateId(relation.id));
        }
        validate_relation(self, &relation).map_err(|source| ModelError::InvalidRelation {
            id: relation.id,
            source,
        })?;
        if let Some(Quantity::Var(v)) = relation.quantity {
            if self.containers.values().any(|c| c.quantity.var() == Some(v)) {
                return Err(ModelError::DuplicateVariable(v));
            }
        }
        if let Some(q) = &relation.quantity {
            self.register_quantity(q);
        }
        let id = relation.id;
        self.relations.insert(id, relation);
        Ok(id)
    }

    /// Replaces a container's variable quantity with a known value.
    pub fn bind_container(&mut self, id: NodeId, value: Rational) -> Result<VarId, ModelError> {
        let container = self.containers.get_mut(&id).ok_or(ModelError::UnknownContainer(id))?;
        let var = container.quantity.var().ok_or(ModelError::NotAVariable(id))?;
        container.quantity = Quantity::Known(value);
        if self.ref_var == Some(var) {
            self.ref_var = None;
        }
        Ok(var)
    }

    pub fn set_ref_var(&mut self, var: Option<VarId>) -> Result<(), ModelError> {
        if let Some(v) = var {
            if !self.variables().contains(&v) {
                return Err(ModelError::UnknownReference(v));
            }
        }
        self.ref_var = var;
        Ok(())
    }

    /// The container or relation whose quantity is `var`.
    pub fn holder_of(&self, var: VarId) -> Option<NodeId> {
        self.containers
            .values()
            .find(|c| c.quantity.var() == Some(var))
            .map(|c| c.id)
            .or_else(|| {
                self.relations
                    .values()
                    .find(|r| r.quantity.as_ref().and_then(Quantity::var) == Some(var))
                    .map(|r| r.id)
            })
    }

    /// Side of a transfer edge, from its endpoint label.
    pub fn transfer_side(&self, relation: &Relation) -> Option<TransferSide> {
        let RelationKind::Transfer { recipient, sender } = &relation.kind else {
            return None;
        };
        let label = &self.containers.get(&relation.source)?.structure.label;
        let n = &self.normalizer;
        let matches = |x: &Option<String>| x.as_deref().is_some_and(|x| n.label(x) == n.label(label));
        match (recipient, sender) {
            _ if matches(recipient) => Some(TransferSide::Recipient),
            _ if matches(sender) => Some(TransferSide::Sender),
            (Some(_), None) => Some(TransferSide::Recipient),
            (None, Some(_)) => Some(TransferSide::Sender),
            _ => None,
        }
    }

    /// Sub-model restricted to the given ids, keeping the reference variable if it survives.
    pub fn restrict(&self, containers: &BTreeSet<NodeId>, relations: &BTreeSet<NodeId>) -> WorldModel {
        let mut out = WorldModel::with_normalizer(self.normalizer);
        out.containers = self
            .containers
            .iter()
            .filter(|(id, _)| containers.contains(id))
            .map(|(id, c)| (*id, c.clone()))
            .collect();
        out.relations = self
            .relations
            .iter()
            .filter(|(id, r)| {
                relations.contains(id) && containers.contains(&r.source) && containers.contains(&r.target)
            })
            .map(|(id, r)| (*id, r.clone()))
            .collect();
        out.allocated = out.variables();
        out.ref_var = self.ref_var.filter(|v| out.allocated.contains(v));
        out
    }

    /// Replaces a container quantity without validation of the previous value.
    pub(crate) fn set_container_quantity(&mut self, id: NodeId, quantity: Quantity) {
        self.register_quantity(&quantity);
        if let Some(c) = self.containers.get_mut(&id) {
            c.quantity = quantity;
        }
    }

    /// Checks every relation and the reference variable.
    pub fn validate(&self) -> Result<(), ModelError> {
        for r in self.relations.values() {
            validate_relation(self, r).map_err(|source| ModelError::InvalidRelation { id: r.id, source })?;
        }
        if let Some(v) = self.ref_var {
            if !self.variables().contains(&v) {
                return Err(ModelError::UnknownReference(v));
            }
        }
        Ok(())
    }
}

/// Checks the kind-specific constraints of a relation against the model's containers.
pub fn validate_relation(model: &WorldModel, r: &Relation) -> Result<(), RelationError> {
    let source = model
        .container(r.source)
        .ok_or(RelationError::UnknownEndpoint(r.source))?;
    let target = model
        .container(r.target)
        .ok_or(RelationError::UnknownEndpoint(r.target))?;
    if r.source == r.target {
        return Err(RelationError::SelfLoop);
    }
    let n = model.normalizer();
    match &r.kind {
        RelationKind::Transfer { recipient, sender } => {
            if recipient.is_none() && sender.is_none() {
                return Err(RelationError::SenderRecipientMissing);
            }
            if !n.structurally_equal(&source.structure, &target.structure) {
                return Err(RelationError::StructureMismatch);
            }
            if r.quantity.is_none() {
                return Err(RelationError::QuantityMissing);
            }
            if recipient.is_some() && sender.is_some() && model.transfer_side(r).is_none() {
                return Err(RelationError::TransferSideUnknown);
            }
            Ok(())
        }
        RelationKind::Rate => {
            if n.label(&source.structure.label) != n.label(&target.structure.label) {
                return Err(RelationError::LabelMismatch);
            }
            if r.quantity.is_none() {
                return Err(RelationError::QuantityMissing);
            }
            Ok(())
        }
        RelationKind::Comparison { .. } => {
            if r.quantity.is_none() {
                return Err(RelationError::QuantityMissing);
            }
            Ok(())
        }
        RelationKind::PartWhole => {
            if r.quantity.is_some() {
                return Err(RelationError::UnexpectedQuantity);
            }
            Ok(())
        }
    }
}
