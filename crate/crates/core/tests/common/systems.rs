//! Random and adversarial equation systems for solver checks.

use std::collections::BTreeMap;

use mathworld::model::{Quantity, VarId};
use mathworld::number::Rational;
use mathworld::reason::{Equation, Sign};
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Solves by repeated propagation: any equation with a single unknown fixes it.
pub fn propagate(equations: &[Equation]) -> BTreeMap<VarId, Rational> {
    let mut env = BTreeMap::new();
    loop {
        let mut progress = false;
        for eq in equations {
            let free: Vec<VarId> = eq.unknowns().into_iter().filter(|v| !env.contains_key(v)).collect();
            if let [v] = free[..] {
                if let Ok(Some(x)) = eq.solve_for(v, &env) {
                    env.insert(v, x);
                    progress = true;
                }
            }
        }
        if !progress {
            return env;
        }
    }
}

pub struct System {
    pub equations: Vec<Equation>,
    pub truth: BTreeMap<VarId, Rational>,
}

fn nonzero(rng: &mut ChaCha8Rng) -> Rational {
    let n: i64 = rng.random_range(1..=20);
    let d: i64 = if rng.random_bool(0.2) {
        rng.random_range(2..=4)
    } else {
        1
    };
    Rational::new(n.into(), d.into())
}

/// A random system over the four relation shapes. Each equation links one new
/// variable to already-determined quantities, then the equations are shuffled.
pub fn random_system(rng: &mut ChaCha8Rng) -> System {
    let unknowns = rng.random_range(1..=6u32);
    let mut truth: BTreeMap<VarId, Rational> = BTreeMap::new();
    let mut known_pool: Vec<Quantity> = vec![Quantity::Known(nonzero(rng))];
    let mut equations = Vec::new();
    let pick = |rng: &mut ChaCha8Rng, pool: &[Quantity]| pool[rng.random_range(0..pool.len())].clone();
    let val = |q: &Quantity, truth: &BTreeMap<VarId, Rational>| match q {
        Quantity::Known(v) => v.clone(),
        Quantity::Var(v) => truth[v].clone(),
    };
    for k in 1..=unknowns {
        let var = VarId(k);
        let a = pick(rng, &known_pool);
        let av = val(&a, &truth);
        let c = nonzero(rng);
        let new = Quantity::Var(var);
        let cq = Quantity::Known(c.clone());
        let slot = rng.random_range(0..3);
        let (eq, value) = match rng.random_range(0..5) {
            // transfer: a ± c = x
            0 => {
                let sign = if rng.random_bool(0.5) { Sign::Plus } else { Sign::Minus };
                let v = if sign == Sign::Plus { &av + &c } else { &av - &c };
                (
                    Equation::Additive {
                        terms: vec![(Sign::Plus, a), (sign, cq)],
                        rhs: new,
                    },
                    v,
                )
            }
            // comparison add, unknown in any slot
            1 => match slot {
                0 => (
                    Equation::Additive {
                        terms: vec![(Sign::Plus, new), (Sign::Plus, cq)],
                        rhs: a,
                    },
                    &av - &c,
                ),
                1 => (
                    Equation::Additive {
                        terms: vec![(Sign::Plus, cq), (Sign::Plus, new)],
                        rhs: a,
                    },
                    &av - &c,
                ),
                _ => (
                    Equation::Additive {
                        terms: vec![(Sign::Plus, a), (Sign::Plus, cq)],
                        rhs: new,
                    },
                    &av + &c,
                ),
            },
            // rate: numerator / ratio = denominator
            2 => match slot {
                0 => (
                    Equation::Product {
                        numerator: new,
                        ratio: cq,
                        denominator: a,
                    },
                    &av * &c,
                ),
                1 => (
                    Equation::Product {
                        numerator: a,
                        ratio: new,
                        denominator: cq,
                    },
                    &av / &c,
                ),
                _ => (
                    Equation::Product {
                        numerator: a,
                        ratio: cq,
                        denominator: new,
                    },
                    &av / &c,
                ),
            },
            // comparison mul
            3 => match slot {
                0 => (
                    Equation::Multiplicative {
                        factor_a: new,
                        factor_b: cq,
                        product: a,
                    },
                    &av / &c,
                ),
                1 => (
                    Equation::Multiplicative {
                        factor_a: cq,
                        factor_b: new,
                        product: a,
                    },
                    &av / &c,
                ),
                _ => (
                    Equation::Multiplicative {
                        factor_a: a,
                        factor_b: cq,
                        product: new,
                    },
                    &av * &c,
                ),
            },
            // part-whole: parts sum to the whole
            _ => {
                let b = pick(rng, &known_pool);
                let bv = val(&b, &truth);
                if slot == 0 {
                    (
                        Equation::Additive {
                            terms: vec![(Sign::Plus, a), (Sign::Plus, b)],
                            rhs: new,
                        },
                        &av + &bv,
                    )
                } else {
                    let whole = Quantity::Known(&av + &bv + &c);
                    let terms = vec![(Sign::Plus, a), (Sign::Plus, new), (Sign::Plus, b)];
                    (Equation::Additive { terms, rhs: whole }, c.clone())
                }
            }
        };
        let divisor_safe = !value.is_zero();
        truth.insert(var, value);
        equations.push(eq);
        if divisor_safe {
            known_pool.push(Quantity::Var(var));
        }
    }
    equations.shuffle(rng);
    System { equations, truth }
}

pub fn var(k: u32) -> Quantity {
    Quantity::Var(VarId(k))
}

pub fn sum(a: Quantity, b: Quantity, c: Quantity) -> Equation {
    Equation::Additive {
        terms: vec![(Sign::Plus, a), (Sign::Plus, b)],
        rhs: c,
    }
}

pub fn dense(n: u32) -> Vec<Equation> {
    let mut equations = Vec::new();
    for a in 1..=n {
        for b in (a + 1)..=n {
            for c in (b + 1)..=n {
                equations.push(sum(var(a), var(b), var(c)));
            }
        }
    }
    equations
}

/// Upper bound on calls when every chain visits each equation at most once and
/// each equation has `width` unknowns.
pub fn chain_bound(equations: usize, width: usize) -> usize {
    let mut total = 1;
    let mut level = 1;
    for d in 0..equations {
        level *= (equations - d) * (width - 1);
        total += level;
    }
    total
}
