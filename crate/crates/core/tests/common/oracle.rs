//! Brute-force smatch: every partial injective mapping of structural
//! variables, with value variables placed by exhaustive search.

use std::collections::HashSet;

use mathworld::metrics::{Triple, TripleSet, VarKind};
use mathworld::number::Rational;

fn image(triple: &Triple, m: &[Option<usize>]) -> Option<Triple> {
    Some(match triple {
        Triple::Instance { var, concept } => Triple::Instance {
            var: m[*var]?,
            concept: concept.clone(),
        },
        Triple::Role { role, source, target } => Triple::Role {
            role: role.clone(),
            source: m[*source]?,
            target: m[*target]?,
        },
    })
}

fn vars_of(triple: &Triple) -> Vec<usize> {
    match triple {
        Triple::Instance { var, .. } => vec![*var],
        Triple::Role { source, target, .. } => vec![*source, *target],
    }
}

struct Search<'a> {
    t1: &'a TripleSet,
    gold: HashSet<Triple>,
    structural1: Vec<usize>,
    structural2: Vec<usize>,
    values1: Vec<usize>,
    values2: Vec<usize>,
    best: usize,
}

impl Search<'_> {
    fn matched(&self, triples: &[&Triple], m: &[Option<usize>]) -> usize {
        triples
            .iter()
            .filter(|t| image(t, m).is_some_and(|i| self.gold.contains(&i)))
            .count()
    }

    fn structural(&mut self, k: usize, m: &mut Vec<Option<usize>>, used: &mut Vec<bool>) {
        if k == self.structural1.len() {
            let score = self.values(m);
            self.best = self.best.max(score);
            return;
        }
        let v = self.structural1[k];
        self.structural(k + 1, m, used);
        for j in self.structural2.clone() {
            if !used[j] {
                used[j] = true;
                m[v] = Some(j);
                self.structural(k + 1, m, used);
                m[v] = None;
                used[j] = false;
            }
        }
    }

    /// Best total once structural variables are fixed.
    fn values(&self, m: &[Option<usize>]) -> usize {
        let value_set: HashSet<usize> = self.values1.iter().copied().collect();
        let fixed: Vec<&Triple> = self
            .t1
            .triples
            .iter()
            .filter(|t| vars_of(t).iter().all(|v| !value_set.contains(v)))
            .collect();
        let base = self.matched(&fixed, m);
        let mut weights = Vec::new();
        for &v in &self.values1 {
            let touching: Vec<&Triple> = self.t1.triples.iter().filter(|t| vars_of(t).contains(&v)).collect();
            assert!(touching
                .iter()
                .all(|t| vars_of(t).iter().all(|u| *u == v || !value_set.contains(u))));
            let row: Vec<usize> = self
                .values2
                .iter()
                .map(|&w| {
                    let mut m2 = m.to_vec();
                    m2[v] = Some(w);
                    self.matched(&touching, &m2)
                })
                .collect();
            weights.push(row);
        }
        let mut suffix = vec![0; weights.len() + 1];
        for i in (0..weights.len()).rev() {
            suffix[i] = suffix[i + 1] + weights[i].iter().copied().max().unwrap_or(0);
        }
        let mut best = 0;
        let mut used = vec![false; self.values2.len()];
        place(&weights, &suffix, 0, 0, &mut used, &mut best);
        base + best
    }
}

fn place(w: &[Vec<usize>], suffix: &[usize], i: usize, acc: usize, used: &mut [bool], best: &mut usize) {
    if acc + suffix[i] <= *best {
        return;
    }
    if i == w.len() {
        *best = acc;
        return;
    }
    for j in 0..used.len() {
        if !used[j] && w[i][j] > 0 {
            used[j] = true;
            place(w, suffix, i + 1, acc + w[i][j], used, best);
            used[j] = false;
        }
    }
    place(w, suffix, i + 1, acc, used, best);
}

/// Maximum number of matched triples over all mappings.
pub fn best_match(t1: &TripleSet, t2: &TripleSet) -> usize {
    let pick = |t: &TripleSet, value: bool| -> Vec<usize> {
        (0..t.vars.len())
            .filter(|&i| (t.vars[i].kind == VarKind::Value) == value)
            .collect()
    };
    let mut s = Search {
        t1,
        gold: t2.triples.iter().cloned().collect(),
        structural1: pick(t1, false),
        structural2: pick(t2, false),
        values1: pick(t1, true),
        values2: pick(t2, true),
        best: 0,
    };
    let mut m = vec![None; t1.vars.len()];
    let mut used = vec![false; t2.vars.len()];
    s.structural(0, &mut m, &mut used);
    s.best
}

pub fn f1(t1: &TripleSet, t2: &TripleSet) -> Rational {
    let total = t1.len() + t2.len();
    if total == 0 {
        return Rational::from_integer(1.into());
    }
    Rational::new((2 * best_match(t1, t2)).into(), total.into())
}
