//! Maximum triple-overlap f-score over one-to-one variable mappings.
//!
//! Container and relation variables may map to either kind; value variables map
//! only to value variables. The search runs over container and relation
//! variables; for each such mapping the best value-variable assignment is an
//! optimal assignment problem, solved exactly with the Hungarian method.

use std::collections::{HashMap, HashSet};

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::triples::{to_triples, Mode, Triple, TripleSet, VarKind};
use crate::model::WorldModel;
use crate::number::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SmatchConfig {
    /// Exhaustive search when the smaller side has at most this many
    /// container and relation variables; hill-climbing otherwise.
    pub exhaustive_limit: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SmatchConfig {
    fn default() -> Self {
        SmatchConfig {
            exhaustive_limit: 8,
            restarts: 4,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmatchScore {
    pub matched: usize,
    /// Triples on the first (test) side.
    pub test_total: usize,
    /// Triples on the second (gold) side.
    pub gold_total: usize,
    pub precision: Rational,
    pub recall: Rational,
    pub f1: Rational,
    /// Variable correspondences of the best mapping found, by name.
    pub mapping: Vec<(String, String)>,
    pub exhaustive: bool,
}

impl SmatchScore {
    fn new(
        matched: usize,
        test_total: usize,
        gold_total: usize,
        mapping: Vec<(String, String)>,
        exhaustive: bool,
    ) -> Self {
        let ratio = |m: usize, d: usize, empty: bool| {
            if d == 0 {
                Rational::from_integer(if empty { 1 } else { 0 }.into())
            } else {
                Rational::new(m.into(), d.into())
            }
        };
        let both_empty = test_total == 0 && gold_total == 0;
        SmatchScore {
            matched,
            test_total,
            gold_total,
            precision: ratio(matched, test_total, both_empty),
            recall: ratio(matched, gold_total, both_empty),
            f1: ratio(2 * matched, test_total + gold_total, both_empty),
            mapping,
            exhaustive,
        }
    }
}

pub fn smatch(g1: &WorldModel, g2: &WorldModel, mode: Mode) -> SmatchScore {
    smatch_with(g1, g2, mode, &SmatchConfig::default())
}

pub fn smatch_with(g1: &WorldModel, g2: &WorldModel, mode: Mode, config: &SmatchConfig) -> SmatchScore {
    smatch_triples(&to_triples(g1, mode), &to_triples(g2, mode), config)
}

pub fn smatch_triples(t1: &TripleSet, t2: &TripleSet, config: &SmatchConfig) -> SmatchScore {
    let structural = |t: &TripleSet| t.vars.iter().filter(|v| v.kind != VarKind::Value).count();
    if structural(t1) > structural(t2) {
        let flipped = smatch_triples(t2, t1, config);
        return SmatchScore::new(
            flipped.matched,
            t1.len(),
            t2.len(),
            flipped.mapping.into_iter().map(|(a, b)| (b, a)).collect(),
            flipped.exhaustive,
        );
    }
    let problem = Problem::new(t1, t2);
    let exhaustive = problem.order.len() <= config.exhaustive_limit;
    let (matched, assignment) = if exhaustive {
        problem.exhaustive()
    } else {
        problem.hill_climb(config)
    };
    let mapping = problem.named_mapping(&assignment);
    SmatchScore::new(matched, t1.len(), t2.len(), mapping, exhaustive)
}

type Assignment = Vec<Option<usize>>;

struct Interner<'a>(HashMap<&'a str, u32>);

impl<'a> Interner<'a> {
    fn id(&mut self, s: &'a str) -> u32 {
        let next = self.0.len() as u32;
        *self.0.entry(s).or_insert(next)
    }
}

/// Facts about one value variable: its concept and the role linking it to its owner.
#[derive(Debug, Clone, Default)]
struct ValueInfo {
    concepts: Vec<u32>,
    parents: Vec<(u32, usize)>,
}

struct Problem<'a> {
    t1: &'a TripleSet,
    t2: &'a TripleSet,
    /// First-side structural variables in search order.
    order: Vec<usize>,
    /// Second-side structural variables. The first side has no more of them,
    /// so every first-side structural variable is mapped.
    candidates: Vec<usize>,
    /// Structural triples of the first side, grouped by the position at which
    /// all their variables are assigned.
    decided_at: Vec<Vec<StructTriple>>,
    instances2: HashSet<(usize, u32)>,
    roles2: HashSet<(u32, usize, usize)>,
    values1: Vec<(usize, ValueInfo)>,
    values2: Vec<(usize, ValueInfo)>,
    value_bound: usize,
}

#[derive(Debug, Clone, Copy)]
enum StructTriple {
    Instance(usize, u32),
    Role(u32, usize, usize),
}

impl<'a> Problem<'a> {
    fn new(t1: &'a TripleSet, t2: &'a TripleSet) -> Self {
        let mut interner = Interner(HashMap::new());
        let kind_order = |k: VarKind| match k {
            VarKind::Container => 0,
            VarKind::Relation => 1,
            VarKind::Value => 2,
        };
        let mut order: Vec<usize> = (0..t1.vars.len())
            .filter(|&i| t1.vars[i].kind != VarKind::Value)
            .collect();
        order.sort_by_key(|&i| (kind_order(t1.vars[i].kind), i));
        let position: HashMap<usize, usize> = order.iter().enumerate().map(|(p, &v)| (v, p)).collect();
        let candidates: Vec<usize> = (0..t2.vars.len())
            .filter(|&j| t2.vars[j].kind != VarKind::Value)
            .collect();

        let is_value = |t: &TripleSet, v: usize| t.vars[v].kind == VarKind::Value;
        let mut decided_at = vec![Vec::new(); order.len()];
        let mut values1: HashMap<usize, ValueInfo> = HashMap::new();
        let mut value_triples1 = 0;
        for t in &t1.triples {
            match t {
                Triple::Instance { var, concept } => {
                    let c = interner.id(concept);
                    if is_value(t1, *var) {
                        values1.entry(*var).or_default().concepts.push(c);
                        value_triples1 += 1;
                    } else {
                        decided_at[position[var]].push(StructTriple::Instance(*var, c));
                    }
                }
                Triple::Role { role, source, target } => {
                    let r = interner.id(role);
                    if is_value(t1, *target) && !is_value(t1, *source) {
                        values1.entry(*target).or_default().parents.push((r, *source));
                        value_triples1 += 1;
                    } else if !is_value(t1, *source) && !is_value(t1, *target) {
                        let at = position[source].max(position[target]);
                        decided_at[at].push(StructTriple::Role(r, *source, *target));
                    }
                }
            }
        }
        let mut instances2 = HashSet::new();
        let mut roles2 = HashSet::new();
        let mut values2: HashMap<usize, ValueInfo> = HashMap::new();
        let mut value_triples2 = 0;
        for t in &t2.triples {
            match t {
                Triple::Instance { var, concept } => {
                    let c = interner.id(concept);
                    if is_value(t2, *var) {
                        values2.entry(*var).or_default().concepts.push(c);
                        value_triples2 += 1;
                    } else {
                        instances2.insert((*var, c));
                    }
                }
                Triple::Role { role, source, target } => {
                    let r = interner.id(role);
                    if is_value(t2, *target) && !is_value(t2, *source) {
                        values2.entry(*target).or_default().parents.push((r, *source));
                        value_triples2 += 1;
                    } else {
                        roles2.insert((r, *source, *target));
                    }
                }
            }
        }
        let mut values1: Vec<(usize, ValueInfo)> = values1.into_iter().collect();
        values1.sort_by_key(|(v, _)| *v);
        let mut values2: Vec<(usize, ValueInfo)> = values2.into_iter().collect();
        values2.sort_by_key(|(v, _)| *v);
        Problem {
            t1,
            t2,
            order,
            candidates,
            decided_at,
            instances2,
            roles2,
            values1,
            values2,
            value_bound: value_triples1.min(value_triples2),
        }
    }

    fn struct_matched(&self, t: StructTriple, map: &[Option<usize>]) -> bool {
        match t {
            StructTriple::Instance(v, c) => map[v].is_some_and(|m| self.instances2.contains(&(m, c))),
            StructTriple::Role(r, a, b) => match (map[a], map[b]) {
                (Some(x), Some(y)) => self.roles2.contains(&(r, x, y)),
                _ => false,
            },
        }
    }

    fn var_map(&self, assignment: &Assignment) -> Vec<Option<usize>> {
        let mut map = vec![None; self.t1.vars.len()];
        for (p, &v) in self.order.iter().enumerate() {
            map[v] = assignment[p];
        }
        map
    }

    fn value_weight(&self, a: &ValueInfo, b: &ValueInfo, map: &[Option<usize>]) -> i64 {
        let concepts = a.concepts.iter().filter(|c| b.concepts.contains(c)).count();
        let roles = a
            .parents
            .iter()
            .filter(|(r, p)| map[*p].is_some_and(|m| b.parents.contains(&(*r, m))))
            .count();
        (concepts + roles) as i64
    }

    /// Best value assignment for a full structural mapping.
    fn values(&self, map: &[Option<usize>]) -> (usize, Vec<(usize, usize)>) {
        if self.values1.is_empty() || self.values2.is_empty() {
            return (0, Vec::new());
        }
        let weights: Vec<Vec<i64>> = self
            .values1
            .iter()
            .map(|(_, a)| self.values2.iter().map(|(_, b)| self.value_weight(a, b, map)).collect())
            .collect();
        let (total, pairs) = max_weight_assignment(&weights);
        let pairs = pairs
            .into_iter()
            .filter(|&(i, j)| weights[i][j] > 0)
            .map(|(i, j)| (self.values1[i].0, self.values2[j].0))
            .collect();
        (total as usize, pairs)
    }

    fn score(&self, assignment: &Assignment) -> usize {
        let map = self.var_map(assignment);
        let structural: usize = self
            .decided_at
            .iter()
            .flatten()
            .filter(|t| self.struct_matched(**t, &map))
            .count();
        structural + self.values(&map).0
    }

    fn exhaustive(&self) -> (usize, Assignment) {
        let mut best = (0, Vec::new());
        let mut first = true;
        let mut current = Vec::with_capacity(self.order.len());
        let mut used = vec![false; self.t2.vars.len()];
        let mut map = vec![None; self.t1.vars.len()];
        let remaining: Vec<usize> = {
            let mut r = vec![0; self.order.len() + 1];
            for p in (0..self.order.len()).rev() {
                r[p] = r[p + 1] + self.decided_at[p].len();
            }
            r
        };
        self.branch(
            0,
            0,
            &remaining,
            &mut current,
            &mut used,
            &mut map,
            &mut best,
            &mut first,
        );
        best
    }

    #[allow(clippy::too_many_arguments)]
    fn branch(
        &self,
        p: usize,
        so_far: usize,
        remaining: &[usize],
        current: &mut Assignment,
        used: &mut [bool],
        map: &mut Vec<Option<usize>>,
        best: &mut (usize, Assignment),
        first: &mut bool,
    ) {
        if !*first && so_far + remaining[p] + self.value_bound <= best.0 {
            return;
        }
        if p == self.order.len() {
            let total = so_far + self.values(map).0;
            if *first || total > best.0 {
                *best = (total, current.clone());
                *first = false;
            }
            return;
        }
        let v = self.order[p];
        for &j in &self.candidates {
            if used[j] {
                continue;
            }
            map[v] = Some(j);
            current.push(Some(j));
            used[j] = true;
            let gained = self.decided_at[p]
                .iter()
                .filter(|t| self.struct_matched(**t, map))
                .count();
            self.branch(p + 1, so_far + gained, remaining, current, used, map, best, first);
            used[j] = false;
            current.pop();
            map[v] = None;
        }
    }

    /// Assigns first-side variables in order to the front of a shuffled target list.
    fn seeded(&self, preference: &[usize]) -> Assignment {
        preference.iter().take(self.order.len()).map(|&j| Some(j)).collect()
    }

    /// Greedy start: each variable takes the free candidate that matches the
    /// most of its own triples in isolation.
    fn greedy(&self) -> Assignment {
        let mut used = vec![false; self.t2.vars.len()];
        let mut out = vec![None; self.order.len()];
        let mut map = vec![None; self.t1.vars.len()];
        for (p, &v) in self.order.iter().enumerate() {
            let mut best: Option<(i64, usize)> = None;
            for &j in &self.candidates {
                if used[j] {
                    continue;
                }
                map[v] = Some(j);
                let local = self.decided_at[p]
                    .iter()
                    .filter(|t| self.struct_matched(**t, &map))
                    .count() as i64;
                let values = self.local_value_overlap(v, j);
                let s = local * 4 + values;
                if best.is_none_or(|(b, _)| s > b) {
                    best = Some((s, j));
                }
            }
            map[v] = best.map(|(_, j)| j);
            if let Some((_, j)) = best {
                used[j] = true;
                out[p] = Some(j);
            }
        }
        out
    }

    fn local_value_overlap(&self, v1: usize, v2: usize) -> i64 {
        let children = |values: &[(usize, ValueInfo)], owner: usize| -> Vec<(u32, Vec<u32>)> {
            values
                .iter()
                .flat_map(|(_, info)| {
                    info.parents
                        .iter()
                        .filter(move |(_, p)| *p == owner)
                        .map(move |(r, _)| (*r, info.concepts.clone()))
                })
                .collect()
        };
        let a = children(&self.values1, v1);
        let b = children(&self.values2, v2);
        a.iter()
            .filter(|(r, c)| b.iter().any(|(r2, c2)| r == r2 && c.iter().any(|x| c2.contains(x))))
            .count() as i64
    }

    fn hill_climb(&self, config: &SmatchConfig) -> (usize, Assignment) {
        let mut best: Option<(usize, Assignment)> = None;
        for restart in 0..config.restarts.max(1) {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(restart as u64));
            let start = if restart == 0 {
                self.greedy()
            } else {
                let mut preference = self.candidates.clone();
                preference.shuffle(&mut rng);
                self.seeded(&preference)
            };
            let result = self.climb(start, &mut rng);
            if best.as_ref().is_none_or(|(b, _)| result.0 > *b) {
                best = Some(result);
            }
        }
        best.expect("at least one restart")
    }

    /// Steepest ascent over reassignments to a free candidate and swaps. When
    /// no move improves, up to `plateau` sideways moves to unvisited equal-score
    /// neighbours are taken, chosen at random.
    fn climb(&self, start: Assignment, rng: &mut ChaCha8Rng) -> (usize, Assignment) {
        let plateau = 2 * self.order.len();
        let mut score = self.score(&start);
        let mut current = start;
        let mut best = (score, current.clone());
        let mut visited: HashSet<Assignment> = HashSet::from([current.clone()]);
        let mut sideways = 0;
        loop {
            let mut improved: Option<(usize, Assignment)> = None;
            let mut level = Vec::new();
            for next in self.neighbours(&current) {
                let s = self.score(&next);
                if s > improved.as_ref().map_or(score, |(b, _)| *b) {
                    improved = Some((s, next));
                } else if s == score && !visited.contains(&next) {
                    level.push(next);
                }
            }
            match improved {
                Some((s, next)) => {
                    score = s;
                    current = next;
                    sideways = 0;
                }
                None if sideways < plateau && !level.is_empty() => {
                    let k = rng.random_range(0..level.len());
                    current = level.swap_remove(k);
                    sideways += 1;
                }
                None => return best,
            }
            visited.insert(current.clone());
            if score > best.0 {
                best = (score, current.clone());
            }
        }
    }

    fn neighbours<'s>(&'s self, current: &'s Assignment) -> impl Iterator<Item = Assignment> + 's {
        let used: HashSet<usize> = current.iter().flatten().copied().collect();
        let n = current.len();
        let moves = (0..n).flat_map(move |p| {
            let used = used.clone();
            self.candidates
                .iter()
                .filter(move |j| !used.contains(j))
                .map(move |&j| {
                    let mut next = current.clone();
                    next[p] = Some(j);
                    next
                })
        });
        let swaps = (0..n)
            .flat_map(move |p| ((p + 1)..n).map(move |q| (p, q)))
            .filter(move |&(p, q)| current[p] != current[q])
            .map(move |(p, q)| {
                let mut next = current.clone();
                next.swap(p, q);
                next
            });
        moves.chain(swaps)
    }

    fn named_mapping(&self, assignment: &Assignment) -> Vec<(String, String)> {
        if assignment.len() != self.order.len() {
            return Vec::new();
        }
        let map = self.var_map(assignment);
        let mut out: Vec<(String, String)> = self
            .order
            .iter()
            .filter_map(|&v| map[v].map(|m| (self.t1.vars[v].name.clone(), self.t2.vars[m].name.clone())))
            .collect();
        out.extend(
            self.values(&map)
                .1
                .into_iter()
                .map(|(a, b)| (self.t1.vars[a].name.clone(), self.t2.vars[b].name.clone())),
        );
        out
    }
}

/// Maximum-weight assignment on a rectangular non-negative weight matrix
/// (Hungarian method on the padded square cost matrix). Returns the total and
/// the chosen (row, column) pairs.
pub fn max_weight_assignment(weights: &[Vec<i64>]) -> (i64, Vec<(usize, usize)>) {
    let rows = weights.len();
    let cols = weights.first().map_or(0, Vec::len);
    let n = rows.max(cols);
    if n == 0 {
        return (0, Vec::new());
    }
    let max_w = weights.iter().flatten().copied().max().unwrap_or(0);
    let cost = |i: usize, j: usize| -> i64 {
        let w = if i < rows && j < cols { weights[i][j] } else { 0 };
        max_w - w
    };
    // 1-indexed potentials formulation.
    let inf = i64::MAX / 4;
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut pairs = Vec::new();
    let mut total = 0;
    for j in 1..=n {
        let i = p[j];
        if i >= 1 && i - 1 < rows && j - 1 < cols {
            total += weights[i - 1][j - 1];
            pairs.push((i - 1, j - 1));
        }
    }
    pairs.sort_unstable();
    (total, pairs)
}

/// Whether `f1` is exactly one.
pub fn is_perfect(score: &SmatchScore) -> bool {
    !score.f1.is_zero() && score.f1 == Rational::from_integer(1.into())
}
