//! First-order logic export of world models, the axiom families, and a reader
//! for the concrete syntax.
//!
//! Concrete syntax:
//!
//! | notation            | written as                     |
//! |---------------------|--------------------------------|
//! | `φ ∧ ψ`, `φ ∨ ψ`    | `and(φ, ψ)`, `or(φ, ψ)`        |
//! | `φ → ψ`, `φ ↔ ψ`    | `implies(φ, ψ)`, `iff(φ, ψ)`   |
//! | `¬φ`                | `not(φ)`                       |
//! | `∃x ∃y φ`           | `exists x y . φ`               |
//! | `∀x∈v.φ`            | `forall x in v . φ`            |
//! | `a ∈ b`, `a ≠ b`    | `a in b`, `a != b`             |
//! | `x ∩ y`, `x ∪ y`    | `intersect(x, y)`, `union(x, y)` |
//! | `⋃_{z∈x} z`         | `Union(x)`                     |
//! | `∅`, `{0, 1, ...}`  | `Empty`, `Naturals`            |
//! | `v_i`, `e_i`, `u_j` | `v_i`, `e_i`, `u_j`            |
//! | `Gram`              | unit with its first letter capitalized |
//!
//! Names that are not identifiers are written as double-quoted strings.
//! Axiom schemas use the placeholder predicates `$E` and `$A` for an entity
//! and an attribute. The empty conjunction is `true`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::model::{CompareOp, Container, NodeId, Quantity, RelationKind, VarId, WorldModel};
use crate::number::{format_rational, parse_rational, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl ArithOp {
    fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Sym(String),
    Num(Rational),
    App(String, Vec<Term>),
    Set(Vec<Term>),
    Bin(Box<Term>, ArithOp, Box<Term>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    In,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Atom(String, Vec<Term>),
    Cmp(Term, CmpOp, Term),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Exists(Vec<String>, Option<Term>, Box<Formula>),
    Forall(Vec<String>, Option<Term>, Box<Formula>),
}

fn sym(s: impl Into<String>) -> Term {
    Term::Sym(s.into())
}

fn app(head: &str, args: Vec<Term>) -> Term {
    Term::App(head.to_string(), args)
}

fn atom(head: &str, args: Vec<Term>) -> Formula {
    Formula::Atom(head.to_string(), args)
}

fn bin(a: Term, op: ArithOp, b: Term) -> Term {
    Term::Bin(Box::new(a), op, Box::new(b))
}

fn eq(a: Term, b: Term) -> Formula {
    Formula::Cmp(a, CmpOp::Eq, b)
}

/// Conjunction that collapses to its only member or to `true`.
fn and(mut parts: Vec<Formula>) -> Formula {
    match parts.len() {
        0 => Formula::True,
        1 => parts.pop().expect("one part"),
        _ => Formula::And(parts),
    }
}

fn implies(a: Formula, b: Formula) -> Formula {
    Formula::Implies(Box::new(a), Box::new(b))
}

fn iff(a: Formula, b: Formula) -> Formula {
    Formula::Iff(Box::new(a), Box::new(b))
}

fn exists(vars: &[&str], body: Formula) -> Formula {
    Formula::Exists(vars.iter().map(|v| v.to_string()).collect(), None, Box::new(body))
}

fn forall(vars: &[&str], body: Formula) -> Formula {
    Formula::Forall(vars.iter().map(|v| v.to_string()).collect(), None, Box::new(body))
}

fn forall_in(var: &str, domain: Term, body: Formula) -> Formula {
    Formula::Forall(vec![var.to_string()], Some(domain), Box::new(body))
}

const KEYWORDS: [&str; 9] = ["and", "or", "not", "implies", "iff", "exists", "forall", "in", "true"];

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    let first_ok = chars
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_' || c == '$');
    first_ok
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
        && !KEYWORDS.contains(&s)
        && s != "false"
}

fn write_name(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    if is_identifier(s) {
        f.write_str(s)
    } else {
        f.write_str("\"")?;
        for c in s.chars() {
            if c == '"' || c == '\\' {
                f.write_str("\\")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str("\"")
    }
}

fn write_list<T: fmt::Display>(f: &mut fmt::Formatter<'_>, items: &[T]) -> fmt::Result {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{item}")?;
    }
    Ok(())
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Sym(s) => write_name(f, s),
            Term::Num(n) => f.write_str(&format_rational(n)),
            Term::App(head, args) => {
                write_name(f, head)?;
                f.write_str("(")?;
                write_list(f, args)?;
                f.write_str(")")
            }
            Term::Set(items) => {
                f.write_str("{")?;
                write_list(f, items)?;
                f.write_str("}")
            }
            Term::Bin(a, op, b) => {
                let side = |f: &mut fmt::Formatter<'_>, t: &Term| match t {
                    Term::Bin(..) => write!(f, "({t})"),
                    _ => write!(f, "{t}"),
                };
                side(f, a)?;
                write!(f, " {} ", op.symbol())?;
                side(f, b)
            }
        }
    }
}

fn write_quantifier(
    f: &mut fmt::Formatter<'_>,
    word: &str,
    vars: &[String],
    domain: &Option<Term>,
    body: &Formula,
) -> fmt::Result {
    f.write_str(word)?;
    for v in vars {
        f.write_str(" ")?;
        write_name(f, v)?;
    }
    if let Some(d) = domain {
        write!(f, " in {d}")?;
    }
    write!(f, " . {body}")
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Atom(head, args) => {
                write_name(f, head)?;
                f.write_str("(")?;
                write_list(f, args)?;
                f.write_str(")")
            }
            Formula::Cmp(a, op, b) => {
                let op = match op {
                    CmpOp::Eq => "=",
                    CmpOp::Ne => "!=",
                    CmpOp::In => "in",
                };
                write!(f, "{a} {op} {b}")
            }
            Formula::Not(a) => write!(f, "not({a})"),
            Formula::And(parts) => {
                f.write_str("and(")?;
                write_list(f, parts)?;
                f.write_str(")")
            }
            Formula::Or(parts) => {
                f.write_str("or(")?;
                write_list(f, parts)?;
                f.write_str(")")
            }
            Formula::Implies(a, b) => write!(f, "implies({a}, {b})"),
            Formula::Iff(a, b) => write!(f, "iff({a}, {b})"),
            Formula::Exists(vars, domain, body) => write_quantifier(f, "exists", vars, domain, body),
            Formula::Forall(vars, domain, body) => write_quantifier(f, "forall", vars, domain, body),
        }
    }
}

impl Formula {
    /// Multi-line rendering: a top-level conjunction under the outer
    /// existential block gets one conjunct per line.
    pub fn pretty(&self) -> String {
        match self {
            Formula::Exists(vars, None, body) => match body.as_ref() {
                Formula::And(parts) => {
                    let mut out = format!("{}", Formula::Exists(vars.clone(), None, Box::new(Formula::True)));
                    out.truncate(out.len() - "true".len());
                    out.push_str("and(\n");
                    for (i, p) in parts.iter().enumerate() {
                        out.push_str("  ");
                        out.push_str(&p.to_string());
                        out.push_str(if i + 1 < parts.len() { ",\n" } else { "\n" });
                    }
                    out.push(')');
                    out
                }
                _ => self.to_string(),
            },
            _ => self.to_string(),
        }
    }

    /// Symbols in term positions not bound by an enclosing quantifier.
    pub fn free_symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        collect_free(self, &mut Vec::new(), &mut out);
        out
    }
}

fn collect_term(t: &Term, bound: &[String], out: &mut BTreeSet<String>) {
    match t {
        Term::Sym(s) => {
            if !bound.contains(s) {
                out.insert(s.clone());
            }
        }
        Term::Num(_) => {}
        Term::App(_, args) | Term::Set(args) => args.iter().for_each(|a| collect_term(a, bound, out)),
        Term::Bin(a, _, b) => {
            collect_term(a, bound, out);
            collect_term(b, bound, out);
        }
    }
}

fn collect_free(f: &Formula, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    match f {
        Formula::True | Formula::False => {}
        Formula::Atom(_, args) => args.iter().for_each(|a| collect_term(a, bound, out)),
        Formula::Cmp(a, _, b) => {
            collect_term(a, bound, out);
            collect_term(b, bound, out);
        }
        Formula::Not(a) => collect_free(a, bound, out),
        Formula::And(parts) | Formula::Or(parts) => parts.iter().for_each(|p| collect_free(p, bound, out)),
        Formula::Implies(a, b) | Formula::Iff(a, b) => {
            collect_free(a, bound, out);
            collect_free(b, bound, out);
        }
        Formula::Exists(vars, domain, body) | Formula::Forall(vars, domain, body) => {
            if let Some(d) = domain {
                collect_term(d, bound, out);
            }
            let depth = bound.len();
            bound.extend(vars.iter().cloned());
            collect_free(body, bound, out);
            bound.truncate(depth);
        }
    }
}

fn unit_constant(unit: &str) -> String {
    let mut chars = unit.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Allocation of `v_i`, `e_i` and `u_j` names for one graph.
struct Names {
    containers: BTreeMap<NodeId, String>,
    relations: BTreeMap<NodeId, String>,
    unknowns: BTreeMap<VarId, String>,
}

impl Names {
    fn new(g: &WorldModel) -> Self {
        let containers = g
            .containers()
            .enumerate()
            .map(|(i, c)| (c.id, format!("v_{}", i + 1)))
            .collect();
        let relations = g
            .relations()
            .filter(|r| r.kind != RelationKind::PartWhole)
            .enumerate()
            .map(|(i, r)| (r.id, format!("e_{}", i + 1)))
            .collect();
        let unknowns = g
            .variables()
            .into_iter()
            .enumerate()
            .map(|(i, v)| (v, format!("u_{}", i + 1)))
            .collect();
        Names {
            containers,
            relations,
            unknowns,
        }
    }

    fn quantity(&self, q: &Quantity) -> Term {
        match q {
            Quantity::Known(v) => Term::Num(v.clone()),
            Quantity::Var(v) => sym(self.unknowns[v].clone()),
        }
    }
}

/// Entity and attribute conjuncts about `subject`, either for each member
/// (countable) or for the set itself (uncountable).
fn describe(entity: &str, attribute: Option<&str>, subject: &str, countable: bool) -> Formula {
    let member = if countable { "x" } else { subject };
    let mut parts = vec![atom(entity, vec![sym(member)])];
    if let Some(a) = attribute {
        parts.push(atom(a, vec![sym(member)]));
    }
    let body = and(parts);
    if countable {
        forall_in("x", sym(subject), body)
    } else {
        body
    }
}

fn measure(subject: Term, quantity: Term, unit: Option<&str>) -> Formula {
    let value = match unit {
        Some(u) => app("Quantity", vec![quantity, sym(unit_constant(u))]),
        None => quantity,
    };
    atom("Measure", vec![subject, value])
}

/// Converts `g` to a formula, treating containers with a unit as uncountable.
pub fn to_fol(g: &WorldModel) -> Formula {
    to_fol_with(g, |c| c.structure.unit.is_none())
}

/// Converts `g` to a formula with an explicit countability flag per container.
/// Relations take the flag and the entity description of their source.
pub fn to_fol_with(g: &WorldModel, countable: impl Fn(&Container) -> bool) -> Formula {
    let names = Names::new(g);
    let mut conjuncts = Vec::new();
    for c in g.containers() {
        let v = names.containers[&c.id].clone();
        let s = &c.structure;
        let is_countable = countable(c);
        conjuncts.push(atom("Owner", vec![sym(v.clone()), sym(s.label.clone())]));
        if is_countable {
            conjuncts.push(measure(sym(v.clone()), names.quantity(&c.quantity), None));
            conjuncts.push(describe(&s.entity, s.attribute.as_deref(), &v, true));
        } else {
            conjuncts.push(atom(&s.entity, vec![sym(v.clone())]));
            if let Some(a) = &s.attribute {
                conjuncts.push(atom(a, vec![sym(v.clone())]));
            }
            conjuncts.push(measure(sym(v.clone()), names.quantity(&c.quantity), s.unit.as_deref()));
        }
        let parts: Vec<Term> = g
            .relations()
            .filter(|r| r.kind == RelationKind::PartWhole && r.target == c.id)
            .map(|r| sym(names.containers[&r.source].clone()))
            .collect();
        if !parts.is_empty() {
            conjuncts.push(atom("PartWhole", vec![Term::Set(parts), sym(v.clone())]));
        }
    }
    for r in g.relations().filter(|r| r.kind != RelationKind::PartWhole) {
        let e = names.relations[&r.id].clone();
        let vs = sym(names.containers[&r.source].clone());
        let vt = sym(names.containers[&r.target].clone());
        let source = g.container(r.source).expect("validated endpoint");
        let is_countable = countable(source);
        let s = &source.structure;
        let head = match &r.kind {
            RelationKind::Transfer { .. } => "Transfer",
            RelationKind::Rate => "Rate",
            RelationKind::Comparison { op: CompareOp::Add } => "ComparisonAdd",
            RelationKind::Comparison { op: CompareOp::Mul } => "ComparisonMul",
            RelationKind::PartWhole => unreachable!("filtered"),
        };
        conjuncts.push(atom(head, vec![sym(e.clone())]));
        conjuncts.push(atom("Source", vec![sym(e.clone()), vs.clone()]));
        conjuncts.push(atom("Target", vec![sym(e.clone()), vt.clone()]));
        let time = |v: Term| app("Time", vec![v]);
        if let RelationKind::Transfer { recipient, sender } = &r.kind {
            conjuncts.push(eq(
                bin(time(vs), ArithOp::Add, Term::Num(Rational::from_integer(1.into()))),
                time(vt),
            ));
            if let Some(snd) = sender {
                conjuncts.push(atom("Sender", vec![sym(e.clone()), sym(snd.clone())]));
            }
            if let Some(rcp) = recipient {
                conjuncts.push(atom("Recipient", vec![sym(e.clone()), sym(rcp.clone())]));
            }
        } else {
            conjuncts.push(eq(time(vs), time(vt)));
        }
        let q = names.quantity(r.quantity.as_ref().expect("validated relation quantity"));
        let arg = atom("Arg", vec![sym(e.clone()), sym("r")]);
        let inner = if r.kind == RelationKind::Rate {
            let each = if is_countable {
                and(vec![
                    measure(sym("y"), q, None),
                    describe(&s.entity, s.attribute.as_deref(), "y", true),
                ])
            } else {
                and(vec![
                    describe(&s.entity, s.attribute.as_deref(), "y", false),
                    measure(sym("y"), q, s.unit.as_deref()),
                ])
            };
            vec![arg, forall_in("y", sym("r"), each)]
        } else if is_countable {
            vec![
                arg,
                measure(sym("r"), q, None),
                describe(&s.entity, s.attribute.as_deref(), "r", true),
            ]
        } else {
            vec![
                arg,
                describe(&s.entity, s.attribute.as_deref(), "r", false),
                measure(sym("r"), q, s.unit.as_deref()),
            ]
        };
        conjuncts.push(exists(&["r"], and(inner)));
    }
    let vars: Vec<String> = names
        .containers
        .values()
        .chain(names.relations.values())
        .chain(names.unknowns.values())
        .cloned()
        .collect();
    let body = and(conjuncts);
    if vars.is_empty() {
        body
    } else {
        let mut vars = vars;
        // Numeric order within each prefix.
        vars.sort_by_key(|v| {
            let (prefix, n) = v.split_once('_').expect("allocated name");
            let rank = match prefix {
                "v" => 0,
                "e" => 1,
                _ => 2,
            };
            (rank, n.parse::<usize>().unwrap_or(0))
        });
        Formula::Exists(vars, None, Box::new(body))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AxiomFamily {
    Measure,
    Relations,
    Reasoning,
}

impl AxiomFamily {
    pub const ALL: [AxiomFamily; 3] = [AxiomFamily::Measure, AxiomFamily::Relations, AxiomFamily::Reasoning];

    pub fn name(self) -> &'static str {
        match self {
            AxiomFamily::Measure => "measure",
            AxiomFamily::Relations => "relations",
            AxiomFamily::Reasoning => "reasoning",
        }
    }

    pub fn parse(s: &str) -> Option<AxiomFamily> {
        AxiomFamily::ALL.into_iter().find(|f| f.name() == s)
    }
}

fn entity_schema(subject: &str) -> Formula {
    and(vec![atom("$E", vec![sym(subject)]), atom("$A", vec![sym(subject)])])
}

fn inhabits(subject: &str, countable: bool) -> Formula {
    if countable {
        forall_in("x", sym(subject), entity_schema("x"))
    } else {
        entity_schema(subject)
    }
}

/// Reasoning schema: a relation whose argument has the placeholder entity
/// implies an endpoint container of that entity.
fn endpoint_schema(relation: &str, endpoint: &str, countable: bool) -> Formula {
    let premise = and(vec![
        atom(relation, vec![sym("e")]),
        atom("Arg", vec![sym("e"), sym("r")]),
        inhabits("r", countable),
    ]);
    let conclusion = exists(
        &["v", "o", "q"],
        and(vec![
            atom(endpoint, vec![sym("e"), sym("v")]),
            atom("Owner", vec![sym("v"), sym("o")]),
            atom("Measure", vec![sym("v"), sym("q")]),
            inhabits("v", countable),
        ]),
    );
    forall(&["e", "r"], implies(premise, conclusion))
}

/// The axioms of one family, in a fixed order.
pub fn axiom_formulas(family: AxiomFamily) -> Vec<Formula> {
    let s = |x: &str| sym(x);
    match family {
        AxiomFamily::Measure => vec![
            forall(
                &["x", "m"],
                iff(
                    and(vec![
                        atom("Measure", vec![s("x"), s("m")]),
                        Formula::Cmp(s("m"), CmpOp::In, s("Naturals")),
                    ]),
                    atom("Cardinality", vec![s("x"), s("m")]),
                ),
            ),
            forall(
                &["x", "y", "m_x", "m_y"],
                implies(
                    and(vec![
                        eq(app("intersect", vec![s("x"), s("y")]), s("Empty")),
                        atom("Measure", vec![s("x"), s("m_x")]),
                        atom("Measure", vec![s("y"), s("m_y")]),
                    ]),
                    atom(
                        "Measure",
                        vec![
                            app("union", vec![s("x"), s("y")]),
                            bin(s("m_x"), ArithOp::Add, s("m_y")),
                        ],
                    ),
                ),
            ),
            forall(
                &["x", "y", "u"],
                eq(
                    bin(
                        app("Quantity", vec![s("x"), s("u")]),
                        ArithOp::Add,
                        app("Quantity", vec![s("y"), s("u")]),
                    ),
                    app("Quantity", vec![bin(s("x"), ArithOp::Add, s("y")), s("u")]),
                ),
            ),
            forall(
                &["x", "y", "u"],
                eq(
                    bin(
                        app("Quantity", vec![s("x"), s("u")]),
                        ArithOp::Sub,
                        app("Quantity", vec![s("y"), s("u")]),
                    ),
                    app("Quantity", vec![bin(s("x"), ArithOp::Sub, s("y")), s("u")]),
                ),
            ),
            forall(
                &["x"],
                eq(
                    app("Quantity", vec![s("x"), s("Milliliter")]),
                    app(
                        "Quantity",
                        vec![
                            bin(s("x"), ArithOp::Div, Term::Num(Rational::from_integer(1000.into()))),
                            s("Liter"),
                        ],
                    ),
                ),
            ),
        ],
        AxiomFamily::Relations => {
            let premise = |head: &str, extra: Vec<Formula>| {
                let mut parts = vec![
                    atom(head, vec![s("e")]),
                    atom("Arg", vec![s("e"), s("r")]),
                    atom("Source", vec![s("e"), s("v_s")]),
                    atom("Target", vec![s("e"), s("v_t")]),
                ];
                parts.extend(extra);
                and(parts)
            };
            let owned_by_same = |role: &str, parts: Vec<Term>, whole: &str| {
                exists(
                    &["z"],
                    and(vec![
                        atom("Owner", vec![s("v_s"), s("z")]),
                        atom("Owner", vec![s("v_t"), s("z")]),
                        atom(role, vec![s("e"), s("z")]),
                        atom("Partition", vec![Term::Set(parts), s(whole)]),
                    ]),
                )
            };
            let comparison = |head: &str, op: ArithOp| {
                forall(
                    &["e", "v_s", "v_t", "m_s", "m_t", "r"],
                    implies(
                        premise(
                            head,
                            vec![
                                atom("Measure", vec![s("v_s"), s("m_s")]),
                                atom("Measure", vec![s("v_t"), s("m_t")]),
                            ],
                        ),
                        eq(bin(s("m_s"), op, s("r")), s("m_t")),
                    ),
                )
            };
            vec![
                forall(
                    &["e", "v_s", "v_t", "r"],
                    implies(
                        premise("Rate", vec![]),
                        and(vec![
                            atom("Partition", vec![s("r"), s("v_s")]),
                            exists(
                                &["m"],
                                and(vec![
                                    atom("Measure", vec![s("r"), s("m")]),
                                    atom("Measure", vec![s("v_t"), s("m")]),
                                ]),
                            ),
                        ]),
                    ),
                ),
                forall(
                    &["x", "y"],
                    iff(
                        atom("Partition", vec![s("x"), s("y")]),
                        and(vec![
                            Formula::Forall(
                                vec!["z".into(), "z'".into()],
                                Some(s("x")),
                                Box::new(implies(
                                    Formula::Cmp(s("z"), CmpOp::Ne, s("z'")),
                                    eq(app("intersect", vec![s("z"), s("z'")]), s("Empty")),
                                )),
                            ),
                            eq(s("y"), app("Union", vec![s("x")])),
                        ]),
                    ),
                ),
                forall(
                    &["e", "v_s", "v_t", "r"],
                    implies(
                        premise("Transfer", vec![]),
                        Formula::Or(vec![
                            owned_by_same("Recipient", vec![s("r"), s("v_s")], "v_t"),
                            owned_by_same("Sender", vec![s("r"), s("v_t")], "v_s"),
                        ]),
                    ),
                ),
                comparison("ComparisonAdd", ArithOp::Add),
                comparison("ComparisonMul", ArithOp::Mul),
                forall(
                    &["v_t", "X"],
                    iff(
                        atom("PartWhole", vec![s("X"), s("v_t")]),
                        atom("Partition", vec![s("X"), s("v_t")]),
                    ),
                ),
                forall(
                    &["v_t", "X"],
                    implies(
                        atom("PartWhole", vec![s("X"), s("v_t")]),
                        forall_in(
                            "v_s",
                            s("X"),
                            eq(app("Time", vec![s("v_s")]), app("Time", vec![s("v_t")])),
                        ),
                    ),
                ),
            ]
        }
        AxiomFamily::Reasoning => {
            let mut out = Vec::new();
            for relation in ["Transfer", "ComparisonAdd", "ComparisonMul"] {
                for endpoint in ["Source", "Target"] {
                    for countable in [true, false] {
                        out.push(endpoint_schema(relation, endpoint, countable));
                    }
                }
            }
            let rate_premise = and(vec![
                atom("Rate", vec![s("e")]),
                atom("Arg", vec![s("e"), s("r")]),
                forall_in("x", s("r"), forall_in("y", s("x"), entity_schema("y"))),
            ]);
            let rate_conclusion = exists(
                &["v", "o", "q"],
                and(vec![
                    atom("Source", vec![s("e"), s("v")]),
                    atom("Owner", vec![s("v"), s("o")]),
                    atom("Measure", vec![s("v"), s("q")]),
                    inhabits("v", true),
                ]),
            );
            out.push(forall(&["e", "r"], implies(rate_premise, rate_conclusion)));
            out
        }
    }
}

/// Which axiom families to emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxiomSelection {
    All,
    Only(AxiomFamily),
}

impl AxiomSelection {
    pub fn families(self) -> Vec<AxiomFamily> {
        match self {
            AxiomSelection::All => AxiomFamily::ALL.to_vec(),
            AxiomSelection::Only(f) => vec![f],
        }
    }

    pub fn parse(s: &str) -> Option<AxiomSelection> {
        if s == "all" {
            Some(AxiomSelection::All)
        } else {
            AxiomFamily::parse(s).map(AxiomSelection::Only)
        }
    }
}

/// Axiom sections for `which`, each under a `# AXIOMS:<family>` header with
/// one axiom per line.
pub fn fol_axioms(which: AxiomSelection) -> String {
    let mut out = String::new();
    for family in which.families() {
        out.push_str("# AXIOMS:");
        out.push_str(family.name());
        out.push('\n');
        for axiom in axiom_formulas(family) {
            out.push_str(&axiom.to_string());
            out.push('\n');
        }
    }
    out
}

/// A converted formula plus optional axiom sections.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FolDocument {
    pub formula: Formula,
    pub axioms: Vec<(AxiomFamily, Vec<Formula>)>,
}

impl FolDocument {
    pub fn new(g: &WorldModel, axioms: Option<AxiomSelection>) -> Self {
        FolDocument {
            formula: to_fol(g),
            axioms: axioms
                .map(|sel| sel.families().into_iter().map(|f| (f, axiom_formulas(f))).collect())
                .unwrap_or_default(),
        }
    }

    pub fn render(&self) -> String {
        let mut out = self.formula.pretty();
        out.push('\n');
        for (family, formulas) in &self.axioms {
            out.push_str("# AXIOMS:");
            out.push_str(family.name());
            out.push('\n');
            for f in formulas {
                out.push_str(&f.to_string());
                out.push('\n');
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("FOL syntax error at byte {offset}: {message}")]
pub struct FolError {
    pub offset: usize,
    pub message: String,
}

/// Reads a document written by [`FolDocument::render`]: one formula, then
/// optional `# AXIOMS:<family>` sections of formulas.
pub fn parse_fol_document(text: &str) -> Result<FolDocument, FolError> {
    let mut sections: Vec<(Option<AxiomFamily>, usize, usize)> = vec![(None, 0, text.len())];
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        if let Some(name) = line.trim_end().strip_prefix("# AXIOMS:") {
            let family = AxiomFamily::parse(name.trim()).ok_or_else(|| FolError {
                offset,
                message: format!("unknown axiom family {name:?}"),
            })?;
            sections.last_mut().expect("nonempty").2 = offset;
            sections.push((Some(family), offset + line.len(), text.len()));
        }
        offset += line.len();
    }
    let mut formula = None;
    let mut axioms = Vec::new();
    for (family, start, end) in sections {
        let mut parser = Parser::new(&text[..end], start)?;
        let mut formulas = Vec::new();
        while !parser.at_end() {
            formulas.push(parser.formula()?);
        }
        match family {
            None => {
                if formulas.len() != 1 {
                    return Err(FolError {
                        offset: start,
                        message: format!("expected one formula, found {}", formulas.len()),
                    });
                }
                formula = formulas.pop();
            }
            Some(f) => axioms.push((f, formulas)),
        }
    }
    Ok(FolDocument {
        formula: formula.expect("first section parsed"),
        axioms,
    })
}

/// Parses exactly one formula.
pub fn parse_formula(text: &str) -> Result<Formula, FolError> {
    let mut parser = Parser::new(text, 0)?;
    let f = parser.formula()?;
    if !parser.at_end() {
        return Err(parser.error("trailing input"));
    }
    Ok(f)
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Name(String),
    Quoted(String),
    Num(Rational),
    Punct(&'static str),
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
}

fn lex(text: &str, start: usize) -> Result<Vec<(usize, Token)>, FolError> {
    let bytes = text.as_bytes();
    let mut i = start;
    let mut out = Vec::new();
    let err = |offset: usize, message: &str| FolError {
        offset,
        message: message.to_string(),
    };
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let begin = i;
        if c.is_ascii_alphabetic() || c == b'_' || c == b'$' {
            i += 1;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'\'') {
                i += 1;
            }
            out.push((begin, Token::Name(text[begin..i].to_string())));
        } else if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i + 1 < bytes.len() && matches!(bytes[i], b'.' | b'/') && bytes[i + 1].is_ascii_digit() {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let value = parse_rational(&text[begin..i]).map_err(|e| err(begin, &e.to_string()))?;
            out.push((begin, Token::Num(value)));
        } else if c == b'"' {
            i += 1;
            let mut s = String::new();
            loop {
                let Some(ch) = text[i..].chars().next() else {
                    return Err(err(begin, "unterminated string"));
                };
                i += ch.len_utf8();
                match ch {
                    '"' => break,
                    '\\' => {
                        let Some(next) = text[i..].chars().next() else {
                            return Err(err(begin, "unterminated string"));
                        };
                        i += next.len_utf8();
                        s.push(next);
                    }
                    _ => s.push(ch),
                }
            }
            out.push((begin, Token::Quoted(s)));
        } else {
            let punct = if text[i..].starts_with("!=") {
                "!="
            } else {
                match c {
                    b'(' => "(",
                    b')' => ")",
                    b'{' => "{",
                    b'}' => "}",
                    b',' => ",",
                    b'.' => ".",
                    b'=' => "=",
                    b'+' => "+",
                    b'-' => "-",
                    b'*' => "*",
                    b'/' => "/",
                    _ => {
                        let ch = text[i..].chars().next().expect("in bounds");
                        return Err(err(i, &format!("unexpected character {ch:?}")));
                    }
                }
            };
            i += punct.len();
            out.push((begin, Token::Punct(punct)));
        }
    }
    Ok(out)
}

impl Parser {
    fn new(text: &str, start: usize) -> Result<Self, FolError> {
        Ok(Parser {
            tokens: lex(text, start)?,
            pos: 0,
            end: text.len(),
        })
    }

    fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn error(&self, message: &str) -> FolError {
        FolError {
            offset: self.offset(),
            message: message.to_string(),
        }
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Some(Token::Punct(q)) if *q == p)
    }

    fn is_keyword(&self, k: &str) -> bool {
        matches!(self.peek(), Some(Token::Name(n)) if n == k)
    }

    fn expect(&mut self, p: &str) -> Result<(), FolError> {
        if self.is_punct(p) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected {p:?}")))
        }
    }

    fn formula(&mut self) -> Result<Formula, FolError> {
        if let Some(Token::Name(name)) = self.peek() {
            let name = name.clone();
            let followed_by_paren = matches!(self.tokens.get(self.pos + 1), Some((_, Token::Punct("("))));
            match name.as_str() {
                "true" => {
                    self.pos += 1;
                    return Ok(Formula::True);
                }
                "false" => {
                    self.pos += 1;
                    return Ok(Formula::False);
                }
                "and" | "or" | "not" | "implies" | "iff" if followed_by_paren => {
                    self.pos += 2;
                    let mut parts = Vec::new();
                    if !self.is_punct(")") {
                        loop {
                            parts.push(self.formula()?);
                            if self.is_punct(",") {
                                self.pos += 1;
                            } else {
                                break;
                            }
                        }
                    }
                    self.expect(")")?;
                    return match (name.as_str(), parts.len()) {
                        ("and", _) => Ok(Formula::And(parts)),
                        ("or", _) => Ok(Formula::Or(parts)),
                        ("not", 1) => Ok(Formula::Not(Box::new(parts.pop().expect("one")))),
                        ("implies", 2) | ("iff", 2) => {
                            let b = Box::new(parts.pop().expect("two"));
                            let a = Box::new(parts.pop().expect("two"));
                            Ok(if name == "implies" {
                                Formula::Implies(a, b)
                            } else {
                                Formula::Iff(a, b)
                            })
                        }
                        _ => Err(self.error(&format!("wrong number of operands for {name}"))),
                    };
                }
                "exists" | "forall" => {
                    self.pos += 1;
                    let mut vars = Vec::new();
                    loop {
                        match self.peek() {
                            Some(Token::Name(n)) if n != "in" => {
                                vars.push(n.clone());
                                self.pos += 1;
                            }
                            Some(Token::Quoted(n)) => {
                                vars.push(n.clone());
                                self.pos += 1;
                            }
                            _ => break,
                        }
                    }
                    if vars.is_empty() {
                        return Err(self.error("quantifier binds no variables"));
                    }
                    let domain = if self.is_keyword("in") {
                        self.pos += 1;
                        Some(self.term()?)
                    } else {
                        None
                    };
                    self.expect(".")?;
                    let body = Box::new(self.formula()?);
                    return Ok(if name == "exists" {
                        Formula::Exists(vars, domain, body)
                    } else {
                        Formula::Forall(vars, domain, body)
                    });
                }
                _ => {}
            }
        }
        let left = self.term()?;
        let op = if self.is_punct("=") {
            Some(CmpOp::Eq)
        } else if self.is_punct("!=") {
            Some(CmpOp::Ne)
        } else if self.is_keyword("in") {
            Some(CmpOp::In)
        } else {
            None
        };
        match (op, left) {
            (Some(op), left) => {
                self.pos += 1;
                let right = self.term()?;
                Ok(Formula::Cmp(left, op, right))
            }
            (None, Term::App(head, args)) => Ok(Formula::Atom(head, args)),
            (None, _) => Err(self.error("expected a predicate or comparison")),
        }
    }

    fn term(&mut self) -> Result<Term, FolError> {
        let mut left = self.product()?;
        loop {
            let op = if self.is_punct("+") {
                ArithOp::Add
            } else if self.is_punct("-") {
                ArithOp::Sub
            } else {
                return Ok(left);
            };
            self.pos += 1;
            let right = self.product()?;
            left = bin(left, op, right);
        }
    }

    fn product(&mut self) -> Result<Term, FolError> {
        let mut left = self.primary()?;
        loop {
            let op = if self.is_punct("*") {
                ArithOp::Mul
            } else if self.is_punct("/") {
                ArithOp::Div
            } else {
                return Ok(left);
            };
            self.pos += 1;
            let right = self.primary()?;
            left = bin(left, op, right);
        }
    }

    fn arguments(&mut self, close: &str) -> Result<Vec<Term>, FolError> {
        let mut args = Vec::new();
        if !self.is_punct(close) {
            loop {
                args.push(self.term()?);
                if self.is_punct(",") {
                    self.pos += 1;
                } else {
                    break;
                }
            }
        }
        self.expect(close)?;
        Ok(args)
    }

    fn primary(&mut self) -> Result<Term, FolError> {
        let offset = self.offset();
        match self.next() {
            Some(Token::Num(n)) => Ok(Term::Num(n)),
            Some(Token::Punct("-")) => match self.next() {
                Some(Token::Num(n)) => Ok(Term::Num(-n)),
                _ => Err(FolError {
                    offset,
                    message: "expected a number after '-'".into(),
                }),
            },
            Some(Token::Punct("(")) => {
                let t = self.term()?;
                self.expect(")")?;
                Ok(t)
            }
            Some(Token::Punct("{")) => Ok(Term::Set(self.arguments("}")?)),
            Some(Token::Name(n)) if KEYWORDS.contains(&n.as_str()) || n == "false" => {
                self.pos -= 1;
                Err(self.error(&format!("unexpected keyword {n:?}")))
            }
            Some(Token::Name(n)) | Some(Token::Quoted(n)) => {
                if self.is_punct("(") {
                    self.pos += 1;
                    Ok(Term::App(n, self.arguments(")")?))
                } else {
                    Ok(Term::Sym(n))
                }
            }
            _ => Err(FolError {
                offset,
                message: "expected a term".into(),
            }),
        }
    }
}
