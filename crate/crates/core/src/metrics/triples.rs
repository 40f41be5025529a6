//! Triple encoding of world models for smatch.
//!
//! Every container and relation gets a variable (`c1`, `r3`, ...) with an
//! `instance` triple naming its type, and each relation gets `source` and
//! `destination` triples. Strong mode also gives each property value its own
//! variable `e{k}` with `instance(e{k}, value)` and a role triple from its owner:
//!
//! | owner      | ARG0      | ARG1     | ARG2     | ARG3      | ARG4 |
//! |------------|-----------|----------|----------|-----------|------|
//! | container  | entity    | quantity | label    | attribute | unit |
//! | transfer   | recipient | sender   | quantity |           |      |
//! | rate       |           | quantity |          |           |      |
//! | comparison |           |          | quantity |           |      |
//!
//! Variable quantities take the value `unknown`.

use std::fmt;

use crate::model::{Quantity, RelationKind, WorldModel};
use crate::number::format_rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    Weak,
    Strong,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKind {
    Container,
    Relation,
    Value,
}

pub const UNKNOWN_VALUE: &str = "unknown";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripleVar {
    pub name: String,
    pub kind: VarKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Triple {
    /// `instance(var, concept)`
    Instance { var: usize, concept: String },
    /// `role(source, target)`
    Role { role: String, source: usize, target: usize },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TripleSet {
    pub vars: Vec<TripleVar>,
    pub triples: Vec<Triple>,
}

impl TripleSet {
    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn add_var(&mut self, name: impl Into<String>, kind: VarKind) -> usize {
        self.vars.push(TripleVar {
            name: name.into(),
            kind,
        });
        self.vars.len() - 1
    }

    pub fn instance(&mut self, var: usize, concept: impl Into<String>) {
        self.triples.push(Triple::Instance {
            var,
            concept: concept.into(),
        });
    }

    pub fn role(&mut self, role: impl Into<String>, source: usize, target: usize) {
        self.triples.push(Triple::Role {
            role: role.into(),
            source,
            target,
        });
    }

    /// Removes one triple, keeping variables.
    pub fn without(&self, index: usize) -> TripleSet {
        let mut out = self.clone();
        out.triples.remove(index);
        out
    }

    pub fn render(&self, triple: &Triple) -> String {
        match triple {
            Triple::Instance { var, concept } => format!("instance({}, {concept})", self.vars[*var].name),
            Triple::Role { role, source, target } => {
                format!("{role}({}, {})", self.vars[*source].name, self.vars[*target].name)
            }
        }
    }
}

impl fmt::Display for TripleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.triples {
            writeln!(f, "{}", self.render(t))?;
        }
        Ok(())
    }
}

fn quantity_value(q: &Quantity) -> String {
    match q {
        Quantity::Known(v) => format_rational(v),
        Quantity::Var(_) => UNKNOWN_VALUE.to_string(),
    }
}

pub fn to_triples(g: &WorldModel, mode: Mode) -> TripleSet {
    let n = g.normalizer();
    let mut t = TripleSet::default();
    let mut values = 0usize;
    let mut value = |t: &mut TripleSet, owner: usize, role: &str, concept: String| {
        values += 1;
        let e = t.add_var(format!("e{values}"), VarKind::Value);
        t.instance(e, concept);
        t.role(role, owner, e);
    };
    let mut container_var = std::collections::BTreeMap::new();
    for c in g.containers() {
        let v = t.add_var(format!("c{}", c.id), VarKind::Container);
        container_var.insert(c.id, v);
        t.instance(v, "container");
        if mode == Mode::Strong {
            let s = &c.structure;
            value(&mut t, v, "ARG0", n.term(&s.entity));
            value(&mut t, v, "ARG1", quantity_value(&c.quantity));
            value(&mut t, v, "ARG2", n.label(&s.label));
            if let Some(a) = &s.attribute {
                value(&mut t, v, "ARG3", n.term(a));
            }
            if let Some(u) = &s.unit {
                value(&mut t, v, "ARG4", n.term(u));
            }
        }
    }
    for r in g.relations() {
        let v = t.add_var(format!("r{}", r.id), VarKind::Relation);
        t.instance(v, r.kind.relation_type().name());
        t.role("source", v, container_var[&r.source]);
        t.role("destination", v, container_var[&r.target]);
        if mode == Mode::Strong {
            let q = r.quantity.as_ref().map(quantity_value);
            match &r.kind {
                RelationKind::Transfer { recipient, sender } => {
                    if let Some(x) = recipient {
                        value(&mut t, v, "ARG0", n.label(x));
                    }
                    if let Some(x) = sender {
                        value(&mut t, v, "ARG1", n.label(x));
                    }
                    if let Some(q) = q {
                        value(&mut t, v, "ARG2", q);
                    }
                }
                RelationKind::Rate => {
                    if let Some(q) = q {
                        value(&mut t, v, "ARG1", q);
                    }
                }
                RelationKind::Comparison { .. } => {
                    if let Some(q) = q {
                        value(&mut t, v, "ARG2", q);
                    }
                }
                RelationKind::PartWhole => {}
            }
        }
    }
    t
}
