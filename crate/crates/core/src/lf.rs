//! Sentence-level logical forms: a small predicate language.
//!
//! ```text
//! container(label, quantity, entity, attribute, unit)
//! transfer(recipient, sender, quantity, entity, attribute, unit)
//! rate(label, quantity, src entity, src attribute, src unit, tgt entity, tgt attribute, tgt unit)
//! difference(tgt label, src label, quantity, tgt entity, tgt attribute, tgt unit, src entity, src attribute, src unit)
//! explicit(...same as difference...)
//! part(whole label, whole entity, whole attribute, whole unit, part1 label, ..., partN unit)
//! ```
//!
//! Arguments are separated by commas; commas and parentheses are the only
//! reserved characters, so multi-word tokens need no quoting. Missing optional
//! properties are written `none`.

use std::fmt;

use thiserror::Error;

use crate::model::{is_var_token, CompareOp, ContainerStructure, Quantity};
use crate::normalize::collapse_whitespace;

pub const NONE_TOKEN: &str = "none";

/// Entity, attribute and unit of one side of a relation predicate.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EntitySpec {
    pub entity: String,
    pub attribute: Option<String>,
    pub unit: Option<String>,
}

impl EntitySpec {
    pub fn new(entity: impl Into<String>) -> Self {
        EntitySpec {
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

    pub fn with_label(&self, label: &str) -> ContainerStructure {
        ContainerStructure {
            label: label.to_string(),
            entity: self.entity.clone(),
            attribute: self.attribute.clone(),
            unit: self.unit.clone(),
        }
    }

    pub fn of(structure: &ContainerStructure) -> Self {
        EntitySpec {
            entity: structure.entity.clone(),
            attribute: structure.attribute.clone(),
            unit: structure.unit.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Predicate {
    Container {
        structure: ContainerStructure,
        quantity: Quantity,
    },
    Transfer {
        recipient: Option<String>,
        sender: Option<String>,
        quantity: Quantity,
        entity: EntitySpec,
    },
    Rate {
        label: String,
        quantity: Quantity,
        source: EntitySpec,
        target: EntitySpec,
    },
    /// `difference` for [`CompareOp::Add`], `explicit` for [`CompareOp::Mul`].
    Comparison {
        op: CompareOp,
        target_label: String,
        source_label: String,
        quantity: Quantity,
        target: EntitySpec,
        source: EntitySpec,
    },
    Part {
        whole: ContainerStructure,
        parts: Vec<ContainerStructure>,
    },
}

impl Predicate {
    pub fn head(&self) -> &'static str {
        match self {
            Predicate::Container { .. } => "container",
            Predicate::Transfer { .. } => "transfer",
            Predicate::Rate { .. } => "rate",
            Predicate::Comparison { op: CompareOp::Add, .. } => "difference",
            Predicate::Comparison { op: CompareOp::Mul, .. } => "explicit",
            Predicate::Part { .. } => "part",
        }
    }

    pub fn quantity(&self) -> Option<&Quantity> {
        match self {
            Predicate::Container { quantity, .. }
            | Predicate::Transfer { quantity, .. }
            | Predicate::Rate { quantity, .. }
            | Predicate::Comparison { quantity, .. } => Some(quantity),
            Predicate::Part { .. } => None,
        }
    }

    fn args(&self) -> Vec<String> {
        fn opt(x: &Option<String>) -> String {
            x.clone().unwrap_or_else(|| NONE_TOKEN.to_string())
        }
        fn spec(out: &mut Vec<String>, s: &EntitySpec) {
            out.push(s.entity.clone());
            out.push(opt(&s.attribute));
            out.push(opt(&s.unit));
        }
        fn slot(out: &mut Vec<String>, s: &ContainerStructure) {
            out.push(s.label.clone());
            out.push(s.entity.clone());
            out.push(opt(&s.attribute));
            out.push(opt(&s.unit));
        }
        let mut out = Vec::new();
        match self {
            Predicate::Container { structure, quantity } => {
                out.push(structure.label.clone());
                out.push(quantity.to_string());
                out.push(structure.entity.clone());
                out.push(opt(&structure.attribute));
                out.push(opt(&structure.unit));
            }
            Predicate::Transfer {
                recipient,
                sender,
                quantity,
                entity,
            } => {
                out.push(opt(recipient));
                out.push(opt(sender));
                out.push(quantity.to_string());
                spec(&mut out, entity);
            }
            Predicate::Rate {
                label,
                quantity,
                source,
                target,
            } => {
                out.push(label.clone());
                out.push(quantity.to_string());
                spec(&mut out, source);
                spec(&mut out, target);
            }
            Predicate::Comparison {
                target_label,
                source_label,
                quantity,
                target,
                source,
                ..
            } => {
                out.push(target_label.clone());
                out.push(source_label.clone());
                out.push(quantity.to_string());
                spec(&mut out, target);
                spec(&mut out, source);
            }
            Predicate::Part { whole, parts } => {
                slot(&mut out, whole);
                for p in parts {
                    slot(&mut out, p);
                }
            }
        }
        out
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.head(), self.args().join(", "))
    }
}

/// Ordered predicates for one sentence; may be empty.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct LogicalForm(pub Vec<Predicate>);

impl LogicalForm {
    pub fn new(predicates: Vec<Predicate>) -> Self {
        LogicalForm(predicates)
    }

    pub fn predicates(&self) -> &[Predicate] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }
}

impl fmt::Display for LogicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            p.fmt(f)?;
        }
        Ok(())
    }
}

pub fn serialize_logical_form(lf: &LogicalForm) -> String {
    lf.to_string()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseMode {
    /// Any malformed predicate is an error.
    Strict,
    /// Malformed predicates are dropped; never fails.
    Recover,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct LfError {
    /// Byte offset into the input.
    pub offset: usize,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl LfError {
    fn at(text: &str, offset: usize, message: impl Into<String>) -> Self {
        let before = &text[..offset];
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        LfError {
            offset,
            line,
            column,
            message: message.into(),
        }
    }
}

pub fn parse_logical_form(text: &str, mode: ParseMode) -> Result<LogicalForm, LfError> {
    match mode {
        ParseMode::Strict => parse_strict(text),
        ParseMode::Recover => Ok(parse_recover(text).0),
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// `head ws* '(' args ')'` starting at `start`; returns (head, args, args offset, end).
fn scan_candidate(text: &str, start: usize) -> Result<(&str, &str, usize, usize), (usize, String)> {
    let rest = &text[start..];
    let head_len = rest
        .char_indices()
        .find(|&(_, c)| !is_ident_char(c))
        .map_or(rest.len(), |(i, _)| i);
    if head_len == 0 || !rest.starts_with(is_ident_start) {
        return Err((start, "expected a predicate name".into()));
    }
    let head = &rest[..head_len];
    let after_head = rest[head_len..].trim_start();
    let open = start + (rest.len() - after_head.len());
    if !after_head.starts_with('(') {
        return Err((open, format!("expected '(' after {head:?}")));
    }
    let body_start = open + 1;
    for (i, c) in text[body_start..].char_indices() {
        match c {
            ')' => return Ok((head, &text[body_start..body_start + i], body_start, body_start + i + 1)),
            '(' => return Err((body_start + i, "unexpected '(' inside argument list".into())),
            _ => {}
        }
    }
    Err((open, "unclosed '('".into()))
}

fn parse_strict(text: &str) -> Result<LogicalForm, LfError> {
    let mut out = Vec::new();
    let mut pos = 0;
    loop {
        let skipped = text[pos..].len() - text[pos..].trim_start().len();
        pos += skipped;
        if pos >= text.len() {
            break;
        }
        let (head, body, body_offset, end) =
            scan_candidate(text, pos).map_err(|(at, msg)| LfError::at(text, at, msg))?;
        let predicate = build_predicate(head, body).map_err(|msg| LfError::at(text, body_offset, msg))?;
        out.push(predicate);
        pos = end;
    }
    Ok(LogicalForm(out))
}

/// Keeps only the well-formed predicates, in order, and reports what was dropped.
pub fn parse_recover(text: &str) -> (LogicalForm, Vec<LfError>) {
    let mut out = Vec::new();
    let mut dropped = Vec::new();
    let mut pos = 0;
    let mut prev: Option<char> = None;
    let mut in_junk = false;
    while pos < text.len() {
        let c = text[pos..].chars().next().expect("pos is a char boundary");
        let at_boundary = is_ident_start(c) && !prev.is_some_and(is_ident_char);
        if at_boundary {
            if let Ok((head, body, body_offset, end)) = scan_candidate(text, pos) {
                match build_predicate(head, body) {
                    Ok(p) => out.push(p),
                    Err(msg) => dropped.push(LfError::at(text, body_offset, msg)),
                }
                in_junk = false;
                pos = end;
                prev = Some(')');
                continue;
            }
        }
        if !c.is_whitespace() && !in_junk {
            dropped.push(LfError::at(text, pos, "skipping malformed input"));
            in_junk = true;
        }
        prev = Some(c);
        pos += c.len_utf8();
    }
    (LogicalForm(out), dropped)
}

fn build_predicate(head: &str, body: &str) -> Result<Predicate, String> {
    let args: Vec<String> = body.split(',').map(collapse_whitespace).collect();
    let n = args.len();
    let expect = |k: usize| {
        if n == k {
            Ok(())
        } else {
            Err(format!("{head} takes {k} arguments, found {n}"))
        }
    };
    let a = |i: usize| args[i].as_str();
    match head {
        "container" => {
            expect(5)?;
            Ok(Predicate::Container {
                structure: ContainerStructure {
                    label: text_arg(a(0), "label")?,
                    entity: text_arg(a(2), "entity")?,
                    attribute: opt_arg(a(3), "attribute")?,
                    unit: opt_arg(a(4), "unit")?,
                },
                quantity: quantity_arg(a(1))?,
            })
        }
        "transfer" => {
            expect(6)?;
            Ok(Predicate::Transfer {
                recipient: opt_arg(a(0), "recipient")?,
                sender: opt_arg(a(1), "sender")?,
                quantity: quantity_arg(a(2))?,
                entity: spec_args(&args[3..6])?,
            })
        }
        "rate" => {
            expect(8)?;
            Ok(Predicate::Rate {
                label: text_arg(a(0), "label")?,
                quantity: quantity_arg(a(1))?,
                source: spec_args(&args[2..5])?,
                target: spec_args(&args[5..8])?,
            })
        }
        "difference" | "explicit" => {
            expect(9)?;
            Ok(Predicate::Comparison {
                op: if head == "difference" {
                    CompareOp::Add
                } else {
                    CompareOp::Mul
                },
                target_label: text_arg(a(0), "target label")?,
                source_label: text_arg(a(1), "source label")?,
                quantity: quantity_arg(a(2))?,
                target: spec_args(&args[3..6])?,
                source: spec_args(&args[6..9])?,
            })
        }
        "part" => {
            if n < 12 || !(n - 4).is_multiple_of(4) {
                return Err(format!("part takes 4 + 4n arguments with n >= 2, found {n}"));
            }
            let mut slots = args.chunks(4).map(slot_args);
            let whole = slots.next().expect("n >= 12")?;
            let parts = slots.collect::<Result<Vec<_>, _>>()?;
            Ok(Predicate::Part { whole, parts })
        }
        other => Err(format!("unknown predicate {other:?}")),
    }
}

fn text_arg(arg: &str, what: &str) -> Result<String, String> {
    if arg.is_empty() {
        Err(format!("empty {what}"))
    } else if arg == NONE_TOKEN {
        Err(format!("{what} is required"))
    } else if is_var_token(arg) {
        Err(format!("variable {arg} cannot be a {what}"))
    } else {
        Ok(arg.to_string())
    }
}

fn opt_arg(arg: &str, what: &str) -> Result<Option<String>, String> {
    if arg == NONE_TOKEN {
        Ok(None)
    } else {
        text_arg(arg, what).map(Some)
    }
}

fn quantity_arg(arg: &str) -> Result<Quantity, String> {
    arg.parse::<Quantity>().map_err(|e| e.to_string())
}

fn spec_args(args: &[String]) -> Result<EntitySpec, String> {
    Ok(EntitySpec {
        entity: text_arg(&args[0], "entity")?,
        attribute: opt_arg(&args[1], "attribute")?,
        unit: opt_arg(&args[2], "unit")?,
    })
}

fn slot_args(args: &[String]) -> Result<ContainerStructure, String> {
    Ok(ContainerStructure {
        label: text_arg(&args[0], "label")?,
        entity: text_arg(&args[1], "entity")?,
        attribute: opt_arg(&args[2], "attribute")?,
        unit: opt_arg(&args[3], "unit")?,
    })
}
