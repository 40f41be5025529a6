//! Weak and strong equivalence by backtracking isomorphism search.

use std::collections::BTreeMap;

use crate::model::{Container, NodeId, Quantity, Relation, RelationKind, RelationType, VarId, WorldModel};
use crate::normalize::Normalizer;

/// A found isomorphism: container and relation id correspondences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Isomorphism {
    pub containers: BTreeMap<NodeId, NodeId>,
    pub relations: BTreeMap<NodeId, NodeId>,
    /// Variable correspondence; only populated in strong mode.
    pub variables: BTreeMap<VarId, VarId>,
}

/// Isomorphic graphs, relation types preserved.
pub fn weak_equivalent(g1: &WorldModel, g2: &WorldModel) -> bool {
    find_isomorphism(g1, g2, false).is_some()
}

/// Isomorphic with all properties equal after normalization; variables
/// correspond one-to-one and the reference variables correspond.
pub fn strong_equivalent(g1: &WorldModel, g2: &WorldModel) -> bool {
    find_isomorphism(g1, g2, true).is_some()
}

#[derive(Debug, Clone, Default)]
struct VarBijection {
    forward: BTreeMap<VarId, VarId>,
    backward: BTreeMap<VarId, VarId>,
}

impl VarBijection {
    fn bind(&mut self, a: VarId, b: VarId) -> bool {
        match (self.forward.get(&a), self.backward.get(&b)) {
            (Some(x), Some(y)) => *x == b && *y == a,
            (None, None) => {
                self.forward.insert(a, b);
                self.backward.insert(b, a);
                true
            }
            _ => false,
        }
    }

    /// Quantities agree: equal known values, or variables that correspond.
    fn unify(&mut self, a: Option<&Quantity>, b: Option<&Quantity>) -> bool {
        match (a, b) {
            (None, None) => true,
            (Some(Quantity::Known(x)), Some(Quantity::Known(y))) => x == y,
            (Some(Quantity::Var(x)), Some(Quantity::Var(y))) => self.bind(*x, *y),
            _ => false,
        }
    }
}

type Signature = Vec<(RelationType, bool, usize)>;

fn signature(g: &WorldModel, id: NodeId) -> Signature {
    let mut counts: BTreeMap<(RelationType, bool), usize> = BTreeMap::new();
    for r in g.relations() {
        if r.source == id {
            *counts.entry((r.kind.relation_type(), true)).or_default() += 1;
        }
        if r.target == id {
            *counts.entry((r.kind.relation_type(), false)).or_default() += 1;
        }
    }
    counts.into_iter().map(|((t, out), n)| (t, out, n)).collect()
}

fn edge_counts(g: &WorldModel) -> BTreeMap<(NodeId, NodeId, RelationType), usize> {
    let mut out = BTreeMap::new();
    for r in g.relations() {
        *out.entry((r.source, r.target, r.kind.relation_type())).or_default() += 1;
    }
    out
}

fn same_container(n: &Normalizer, a: &Container, b: &Container) -> bool {
    let quantities = match (&a.quantity, &b.quantity) {
        (Quantity::Known(x), Quantity::Known(y)) => x == y,
        (Quantity::Var(_), Quantity::Var(_)) => true,
        _ => false,
    };
    quantities && n.structurally_equal(&a.structure, &b.structure)
}

fn same_kind(n: &Normalizer, a: &RelationKind, b: &RelationKind) -> bool {
    match (a, b) {
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
        _ => a == b,
    }
}

struct Search<'a> {
    g1: &'a WorldModel,
    g2: &'a WorldModel,
    strong: bool,
    normalizer: Normalizer,
    c1: Vec<&'a Container>,
    c2: Vec<&'a Container>,
    candidates: Vec<Vec<usize>>,
    edges1: BTreeMap<(NodeId, NodeId, RelationType), usize>,
    edges2: BTreeMap<(NodeId, NodeId, RelationType), usize>,
    r1: Vec<&'a Relation>,
    r2: Vec<&'a Relation>,
}

impl Search<'_> {
    fn loops_agree(&self, a: NodeId, b: NodeId) -> bool {
        RelationType::ALL
            .iter()
            .all(|t| self.edges1.get(&(a, a, *t)) == self.edges2.get(&(b, b, *t)))
    }

    fn containers(
        &self,
        i: usize,
        map: &mut Vec<usize>,
        used: &mut [bool],
        vars: &VarBijection,
    ) -> Option<Isomorphism> {
        if i == self.c1.len() {
            let cmap: BTreeMap<NodeId, NodeId> = map
                .iter()
                .enumerate()
                .map(|(a, &b)| (self.c1[a].id, self.c2[b].id))
                .collect();
            let mut rused = vec![false; self.r2.len()];
            let mut rmap = Vec::new();
            return self.relations(0, &cmap, &mut rmap, &mut rused, vars.clone());
        }
        for &j in &self.candidates[i] {
            if used[j] {
                continue;
            }
            let mut vars = vars.clone();
            if self.strong && !vars.unify(Some(&self.c1[i].quantity), Some(&self.c2[j].quantity)) {
                continue;
            }
            let (a, b) = (self.c1[i].id, self.c2[j].id);
            let consistent = map.iter().enumerate().all(|(k, &m)| {
                let (pa, pb) = (self.c1[k].id, self.c2[m].id);
                RelationType::ALL.iter().all(|t| {
                    self.edges1.get(&(a, pa, *t)) == self.edges2.get(&(b, pb, *t))
                        && self.edges1.get(&(pa, a, *t)) == self.edges2.get(&(pb, b, *t))
                })
            }) && self.loops_agree(a, b);
            if !consistent {
                continue;
            }
            used[j] = true;
            map.push(j);
            if let Some(found) = self.containers(i + 1, map, used, &vars) {
                return Some(found);
            }
            map.pop();
            used[j] = false;
        }
        None
    }

    fn relations(
        &self,
        i: usize,
        cmap: &BTreeMap<NodeId, NodeId>,
        rmap: &mut Vec<usize>,
        used: &mut [bool],
        vars: VarBijection,
    ) -> Option<Isomorphism> {
        if i == self.r1.len() {
            let mut vars = vars;
            if self.strong {
                let ok = match (self.g1.ref_var(), self.g2.ref_var()) {
                    (None, None) => true,
                    (Some(a), Some(b)) => vars.bind(a, b),
                    _ => false,
                };
                if !ok {
                    return None;
                }
            }
            return Some(Isomorphism {
                containers: cmap.clone(),
                relations: rmap
                    .iter()
                    .enumerate()
                    .map(|(a, &b)| (self.r1[a].id, self.r2[b].id))
                    .collect(),
                variables: if self.strong { vars.forward } else { BTreeMap::new() },
            });
        }
        let r = self.r1[i];
        for (j, s) in self.r2.iter().enumerate() {
            if used[j]
                || s.kind.relation_type() != r.kind.relation_type()
                || cmap[&r.source] != s.source
                || cmap[&r.target] != s.target
            {
                continue;
            }
            let mut vars = vars.clone();
            if self.strong
                && !(same_kind(&self.normalizer, &r.kind, &s.kind)
                    && vars.unify(r.quantity.as_ref(), s.quantity.as_ref()))
            {
                continue;
            }
            used[j] = true;
            rmap.push(j);
            if let Some(found) = self.relations(i + 1, cmap, rmap, used, vars) {
                return Some(found);
            }
            rmap.pop();
            used[j] = false;
        }
        None
    }
}

/// Searches for an isomorphism; `strong` additionally requires equal properties.
pub fn find_isomorphism(g1: &WorldModel, g2: &WorldModel, strong: bool) -> Option<Isomorphism> {
    if g1.container_count() != g2.container_count() || g1.relation_count() != g2.relation_count() {
        return None;
    }
    let normalizer = *g1.normalizer();
    let c1: Vec<&Container> = g1.containers().collect();
    let c2: Vec<&Container> = g2.containers().collect();
    let sig2: Vec<Signature> = c2.iter().map(|c| signature(g2, c.id)).collect();
    let candidates: Vec<Vec<usize>> = c1
        .iter()
        .map(|a| {
            let sig = signature(g1, a.id);
            (0..c2.len())
                .filter(|&j| sig2[j] == sig && (!strong || same_container(&normalizer, a, c2[j])))
                .collect()
        })
        .collect();
    if candidates.iter().any(Vec::is_empty) {
        return None;
    }
    let search = Search {
        g1,
        g2,
        strong,
        normalizer,
        c1,
        c2,
        candidates,
        edges1: edge_counts(g1),
        edges2: edge_counts(g2),
        r1: g1.relations().collect(),
        r2: g2.relations().collect(),
    };
    let mut used = vec![false; search.c2.len()];
    search.containers(0, &mut Vec::new(), &mut used, &VarBijection::default())
}
