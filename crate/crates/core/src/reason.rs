//! Equation induction and the deterministic recursive solver.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::model::{CompareOp, NodeId, Quantity, RelationKind, TransferSide, VarId, WorldModel};
use crate::number::{format_rational, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn apply(self, value: Rational) -> Rational {
        match self {
            Sign::Plus => value,
            Sign::Minus => -value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Equation {
    /// `±t1 ± t2 ... = rhs`
    Additive {
        terms: Vec<(Sign, Quantity)>,
        rhs: Quantity,
    },
    /// `numerator / ratio = denominator`
    Product {
        numerator: Quantity,
        ratio: Quantity,
        denominator: Quantity,
    },
    /// `factor_a * factor_b = product`
    Multiplicative {
        factor_a: Quantity,
        factor_b: Quantity,
        product: Quantity,
    },
}

impl Equation {
    fn quantities(&self) -> Vec<&Quantity> {
        match self {
            Equation::Additive { terms, rhs } => terms.iter().map(|(_, q)| q).chain([rhs]).collect(),
            Equation::Product {
                numerator,
                ratio,
                denominator,
            } => vec![numerator, ratio, denominator],
            Equation::Multiplicative {
                factor_a,
                factor_b,
                product,
            } => vec![factor_a, factor_b, product],
        }
    }

    /// Distinct variables, in order of first occurrence.
    pub fn unknowns(&self) -> Vec<VarId> {
        let mut out = Vec::new();
        for v in self.quantities().into_iter().filter_map(Quantity::var) {
            if !out.contains(&v) {
                out.push(v);
            }
        }
        out
    }

    pub fn contains(&self, var: VarId) -> bool {
        self.quantities().iter().any(|q| q.var() == Some(var))
    }

    /// Whether `var` is the only unknown once `env` is substituted.
    pub fn solvable_for(&self, var: VarId, env: &BTreeMap<VarId, Rational>) -> bool {
        let free: Vec<VarId> = self.unknowns().into_iter().filter(|v| !env.contains_key(v)).collect();
        free == [var]
    }

    /// Solves for `var` with `env` substituted. `Ok(None)` when `var` is not
    /// the only unknown or the equation does not determine it.
    pub fn solve_for(&self, var: VarId, env: &BTreeMap<VarId, Rational>) -> Result<Option<Rational>, SolveError> {
        if !self.solvable_for(var, env) {
            return Ok(None);
        }
        let value = |q: &Quantity| match q {
            Quantity::Known(v) => Some(v.clone()),
            Quantity::Var(v) => env.get(v).cloned(),
        };
        let is_target = |q: &Quantity| q.var() == Some(var);
        match self {
            Equation::Additive { terms, rhs } => {
                let mut coefficient = Rational::zero();
                let mut constant = Rational::zero();
                for (sign, q) in terms {
                    match value(q) {
                        Some(v) => constant += sign.apply(v),
                        None => coefficient += sign.apply(Rational::one()),
                    }
                }
                match value(rhs) {
                    Some(v) => constant -= v,
                    None => coefficient -= Rational::one(),
                }
                if coefficient.is_zero() {
                    return Ok(None);
                }
                Ok(Some(-constant / coefficient))
            }
            Equation::Product {
                numerator,
                ratio,
                denominator,
            } => {
                let hits = [numerator, ratio, denominator].iter().filter(|q| is_target(q)).count();
                if hits != 1 {
                    return Ok(None);
                }
                if is_target(numerator) {
                    Ok(Some(value(ratio).expect("known") * value(denominator).expect("known")))
                } else if is_target(ratio) {
                    let d = value(denominator).expect("known");
                    nonzero(&d)?;
                    Ok(Some(value(numerator).expect("known") / d))
                } else {
                    let r = value(ratio).expect("known");
                    nonzero(&r)?;
                    Ok(Some(value(numerator).expect("known") / r))
                }
            }
            Equation::Multiplicative {
                factor_a,
                factor_b,
                product,
            } => {
                let hits = [factor_a, factor_b, product].iter().filter(|q| is_target(q)).count();
                if hits != 1 {
                    return Ok(None);
                }
                if is_target(product) {
                    Ok(Some(value(factor_a).expect("known") * value(factor_b).expect("known")))
                } else {
                    let other = if is_target(factor_a) { factor_b } else { factor_a };
                    let o = value(other).expect("known");
                    nonzero(&o)?;
                    Ok(Some(value(product).expect("known") / o))
                }
            }
        }
    }

    /// Whether the equation holds under a full assignment.
    pub fn holds(&self, env: &BTreeMap<VarId, Rational>) -> Option<bool> {
        let value = |q: &Quantity| match q {
            Quantity::Known(v) => Some(v.clone()),
            Quantity::Var(v) => env.get(v).cloned(),
        };
        Some(match self {
            Equation::Additive { terms, rhs } => {
                let mut sum = Rational::zero();
                for (sign, q) in terms {
                    sum += sign.apply(value(q)?);
                }
                sum == value(rhs)?
            }
            Equation::Product {
                numerator,
                ratio,
                denominator,
            } => {
                let r = value(ratio)?;
                !r.is_zero() && value(numerator)? / r == value(denominator)?
            }
            Equation::Multiplicative {
                factor_a,
                factor_b,
                product,
            } => value(factor_a)? * value(factor_b)? == value(product)?,
        })
    }
}

fn nonzero(v: &Rational) -> Result<(), SolveError> {
    if v.is_zero() {
        Err(SolveError::DivisionByZero)
    } else {
        Ok(())
    }
}

fn fmt_quantity(q: &Quantity) -> String {
    match q {
        Quantity::Known(v) => format_rational(v),
        Quantity::Var(v) => v.to_string(),
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Equation::Additive { terms, rhs } => {
                for (i, (sign, q)) in terms.iter().enumerate() {
                    match (i, sign) {
                        (0, Sign::Plus) => {}
                        (0, Sign::Minus) => f.write_str("-")?,
                        (_, Sign::Plus) => f.write_str(" + ")?,
                        (_, Sign::Minus) => f.write_str(" - ")?,
                    }
                    f.write_str(&fmt_quantity(q))?;
                }
                write!(f, " = {}", fmt_quantity(rhs))
            }
            Equation::Product {
                numerator,
                ratio,
                denominator,
            } => write!(
                f,
                "{} / {} = {}",
                fmt_quantity(numerator),
                fmt_quantity(ratio),
                fmt_quantity(denominator)
            ),
            Equation::Multiplicative {
                factor_a,
                factor_b,
                product,
            } => write!(
                f,
                "{} * {} = {}",
                fmt_quantity(factor_a),
                fmt_quantity(factor_b),
                fmt_quantity(product)
            ),
        }
    }
}

/// Equations induced by every relation, in creation order. Each whole with
/// incoming part-whole edges yields one sum, placed at its first edge.
pub fn induce_equations(g: &WorldModel) -> Vec<Equation> {
    let q = |id: NodeId| g.container(id).expect("validated endpoint").quantity.clone();
    let mut wholes_done: BTreeSet<NodeId> = BTreeSet::new();
    let mut out = Vec::new();
    for r in g.relations() {
        let rq = || r.quantity.clone().expect("validated relation quantity");
        match &r.kind {
            RelationKind::Transfer { .. } => {
                let sign = match g.transfer_side(r) {
                    Some(TransferSide::Sender) => Sign::Minus,
                    _ => Sign::Plus,
                };
                out.push(Equation::Additive {
                    terms: vec![(Sign::Plus, q(r.source)), (sign, rq())],
                    rhs: q(r.target),
                });
            }
            RelationKind::Rate => out.push(Equation::Product {
                numerator: q(r.source),
                ratio: rq(),
                denominator: q(r.target),
            }),
            RelationKind::Comparison { op: CompareOp::Add } => out.push(Equation::Additive {
                terms: vec![(Sign::Plus, q(r.source)), (Sign::Plus, rq())],
                rhs: q(r.target),
            }),
            RelationKind::Comparison { op: CompareOp::Mul } => out.push(Equation::Multiplicative {
                factor_a: q(r.source),
                factor_b: rq(),
                product: q(r.target),
            }),
            RelationKind::PartWhole => {
                if wholes_done.insert(r.target) {
                    let parts: Vec<(Sign, Quantity)> = g
                        .relations()
                        .filter(|p| p.kind == RelationKind::PartWhole && p.target == r.target)
                        .map(|p| (Sign::Plus, q(p.source)))
                        .collect();
                    out.push(Equation::Additive {
                        terms: parts,
                        rhs: q(r.target),
                    });
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("world model lacks a reference variable")]
    MissingReference,
    #[error("{0} cannot be solved from the induced equations")]
    Unsolvable(VarId),
    #[error("division by zero while solving")]
    DivisionByZero,
    #[error("step budget of {0} recursive calls exhausted")]
    StepBudgetExceeded(usize),
}

/// Default bound on recursive calls per solve.
pub const DEFAULT_STEP_BUDGET: usize = 100_000;

/// Recursive solver state: the equation list and a call counter.
#[derive(Debug)]
pub struct Solver<'a> {
    equations: &'a [Equation],
    budget: usize,
    steps: usize,
}

impl<'a> Solver<'a> {
    pub fn new(equations: &'a [Equation]) -> Self {
        Self::with_budget(equations, DEFAULT_STEP_BUDGET)
    }

    pub fn with_budget(equations: &'a [Equation], budget: usize) -> Self {
        Solver {
            equations,
            budget,
            steps: 0,
        }
    }

    /// Recursive calls made so far.
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Unvisited equations containing `target`, by unknown count then creation
    /// order; solves directly when possible, otherwise solves the other
    /// unknowns recursively with the equation marked visited.
    pub fn solve(&mut self, target: VarId, visited: &BTreeSet<usize>) -> Result<Rational, SolveError> {
        self.steps += 1;
        if self.steps > self.budget {
            return Err(SolveError::StepBudgetExceeded(self.budget));
        }
        let mut order: Vec<usize> = (0..self.equations.len())
            .filter(|i| !visited.contains(i) && self.equations[*i].contains(target))
            .collect();
        order.sort_by_key(|i| (self.equations[*i].unknowns().len(), *i));
        let mut arithmetic = None;
        for i in order {
            let eq = &self.equations[i];
            let mut env = BTreeMap::new();
            match eq.solve_for(target, &env) {
                Ok(Some(v)) => return Ok(v),
                Ok(None) => {}
                Err(e) => {
                    arithmetic = Some(e);
                    continue;
                }
            }
            let mut inner = visited.clone();
            inner.insert(i);
            for other in eq.unknowns().into_iter().filter(|v| *v != target) {
                match self.solve(other, &inner) {
                    Ok(v) => {
                        env.insert(other, v);
                    }
                    Err(SolveError::StepBudgetExceeded(b)) => return Err(SolveError::StepBudgetExceeded(b)),
                    Err(_) => continue,
                }
                match eq.solve_for(target, &env) {
                    Ok(Some(v)) => return Ok(v),
                    Ok(None) => {}
                    Err(e) => arithmetic = Some(e),
                }
            }
        }
        Err(arithmetic.unwrap_or(SolveError::Unsolvable(target)))
    }
}

pub fn recursive_solve(
    target: VarId,
    equations: &[Equation],
    visited: &BTreeSet<usize>,
) -> Result<Rational, SolveError> {
    Solver::new(equations).solve(target, visited)
}

pub fn solve_reference(g: &WorldModel) -> Result<Rational, SolveError> {
    let target = g.ref_var().ok_or(SolveError::MissingReference)?;
    recursive_solve(target, &induce_equations(g), &BTreeSet::new())
}

/// Every variable of `g` that the solver can determine.
pub fn solve_all(g: &WorldModel) -> BTreeMap<VarId, Rational> {
    let equations = induce_equations(g);
    g.variables()
        .into_iter()
        .filter_map(|v| recursive_solve(v, &equations, &BTreeSet::new()).ok().map(|x| (v, x)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number::int;

    fn k(n: i64) -> Quantity {
        Quantity::Known(int(n))
    }

    fn x(n: u32) -> Quantity {
        Quantity::Var(VarId(n))
    }

    fn add(terms: &[(Sign, Quantity)], rhs: Quantity) -> Equation {
        Equation::Additive {
            terms: terms.to_vec(),
            rhs,
        }
    }

    #[test]
    fn cafeteria_chain() {
        let eqs = vec![
            add(&[(Sign::Plus, k(14)), (Sign::Minus, k(13))], x(1)),
            add(&[(Sign::Plus, x(1)), (Sign::Plus, k(49))], x(2)),
        ];
        assert_eq!(eqs[0].to_string(), "14 - 13 = x1");
        assert_eq!(eqs[1].to_string(), "x1 + 49 = x2");
        assert_eq!(recursive_solve(VarId(2), &eqs, &BTreeSet::new()), Ok(int(50)));
    }

    #[test]
    fn single_step() {
        let eqs = vec![add(&[(Sign::Plus, k(101)), (Sign::Plus, x(1))], k(232))];
        assert_eq!(recursive_solve(VarId(1), &eqs, &BTreeSet::new()), Ok(int(131)));
    }

    #[test]
    fn underdetermined() {
        let eqs = vec![add(&[(Sign::Plus, x(1)), (Sign::Plus, x(2))], k(5))];
        assert_eq!(
            recursive_solve(VarId(1), &eqs, &BTreeSet::new()),
            Err(SolveError::Unsolvable(VarId(1)))
        );
    }

    #[test]
    fn exact_fraction() {
        let eqs = vec![
            Equation::Product {
                numerator: x(1),
                ratio: k(3),
                denominator: k(1),
            },
            add(&[(Sign::Plus, x(1)), (Sign::Plus, x(2))], k(4)),
        ];
        assert_eq!(recursive_solve(VarId(2), &eqs, &BTreeSet::new()), Ok(int(1)));
        let thirds = vec![Equation::Product {
            numerator: k(1),
            ratio: k(3),
            denominator: x(1),
        }];
        assert_eq!(
            recursive_solve(VarId(1), &thirds, &BTreeSet::new()),
            Ok(Rational::new(1.into(), 3.into()))
        );
    }

    #[test]
    fn division_by_zero() {
        let eqs = vec![
            add(&[(Sign::Plus, k(3)), (Sign::Minus, k(3))], x(1)),
            Equation::Multiplicative {
                factor_a: x(1),
                factor_b: x(2),
                product: k(4),
            },
        ];
        assert_eq!(
            recursive_solve(VarId(2), &eqs, &BTreeSet::new()),
            Err(SolveError::DivisionByZero)
        );
    }

    #[test]
    fn cycle_terminates() {
        let eqs = vec![
            add(&[(Sign::Plus, x(1)), (Sign::Plus, x(2))], x(3)),
            add(&[(Sign::Plus, x(2)), (Sign::Plus, x(3))], x(1)),
            add(&[(Sign::Plus, x(3)), (Sign::Plus, x(1))], x(2)),
        ];
        let mut s = Solver::new(&eqs);
        assert_eq!(
            s.solve(VarId(1), &BTreeSet::new()),
            Err(SolveError::Unsolvable(VarId(1)))
        );
        assert!(s.steps() < 100);
    }

    #[test]
    fn budget_stops_blowup() {
        let n = 9;
        let mut eqs = Vec::new();
        for a in 1..=n {
            for b in (a + 1)..=n {
                eqs.push(add(&[(Sign::Plus, x(a)), (Sign::Plus, x(b))], x(n + 1)));
            }
        }
        let mut s = Solver::with_budget(&eqs, 5_000);
        assert_eq!(
            s.solve(VarId(1), &BTreeSet::new()),
            Err(SolveError::StepBudgetExceeded(5_000))
        );
        assert_eq!(s.steps(), 5_001);
    }

    #[test]
    fn missing_reference() {
        assert_eq!(solve_reference(&WorldModel::new()), Err(SolveError::MissingReference));
    }
}
