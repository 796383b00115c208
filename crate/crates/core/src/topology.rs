//! The target skip ring SR(n) and the legitimacy oracle.
//!
//! Nodes are addressed by index `x`, carrying label `l(x)`. Every node
//! holds one predecessor and one successor reference on the full ring and
//! on each level ring `K_i` it belongs to, so edge sets are multisets of
//! directed pairs.

use std::collections::{BTreeMap, BTreeSet};

use crate::labels::{index_of, label_of, shortcut_labels, Label};
use crate::message::{NodeId, TopicId};
use crate::simnet::World;

/// `ceil(log2 n)`, with 0 for n <= 1.
pub fn ceil_log2(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetTopology {
    pub n: usize,
    /// Directed ring edges: each node to its predecessor and successor.
    pub ring_edges: Vec<(usize, usize)>,
    /// Directed shortcut edges `(from, to, level)`.
    pub shortcut_edges: Vec<(usize, usize, u8)>,
}

impl TargetTopology {
    pub fn edge_count(&self) -> usize {
        self.ring_edges.len() + self.shortcut_edges.len()
    }

    pub fn out_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(u, _) in &self.ring_edges {
            deg[u] += 1;
        }
        for &(u, _, _) in &self.shortcut_edges {
            deg[u] += 1;
        }
        deg
    }

    /// Distinct directed pairs, ignoring multiplicity and level.
    pub fn pair_set(&self) -> BTreeSet<(usize, usize)> {
        self.ring_edges
            .iter()
            .copied()
            .chain(self.shortcut_edges.iter().map(|&(u, v, _)| (u, v)))
            .collect()
    }
}

/// Indices `0..n` sorted by rank of their labels.
fn sorted_by_rank(members: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut v: Vec<usize> = members.collect();
    v.sort_by_key(|&x| label_of(x as u64));
    v
}

fn ring_over(sorted: &[usize]) -> Vec<(usize, usize)> {
    let k = sorted.len();
    if k < 2 {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(2 * k);
    for i in 0..k {
        out.push((sorted[i], sorted[(i + k - 1) % k]));
        out.push((sorted[i], sorted[(i + 1) % k]));
    }
    out
}

pub fn target_skip_ring(n: usize) -> TargetTopology {
    let ring_edges = ring_over(&sorted_by_rank(0..n));
    let mut shortcut_edges = Vec::new();
    let top = ceil_log2(n);
    for i in 1..top {
        let members = sorted_by_rank((0..n).filter(|&x| label_of(x as u64).len() as u32 <= i));
        for (u, v) in ring_over(&members) {
            let level = label_of(u as u64).len().max(label_of(v as u64).len());
            shortcut_edges.push((u, v, level));
        }
    }
    TargetTopology {
        n,
        ring_edges,
        shortcut_edges,
    }
}

/// Which stored neighbor acts as the left and right side for shortcut
/// derivation: the wrap edge `ring` fills whichever of left/right is empty.
pub fn ring_sides<T: Copy>(left: Option<T>, right: Option<T>, ring: Option<T>) -> (Option<T>, Option<T>) {
    match (left, right) {
        (None, Some(r)) => (ring, Some(r)),
        (Some(l), None) => (Some(l), ring),
        other => other,
    }
}

/// Expected variables of the node with index `x` in a legitimate SR(n).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalSlots {
    pub label: Label,
    pub left: Option<usize>,
    pub right: Option<usize>,
    pub ring: Option<usize>,
    /// Shortcut entries derived from the left side, then the right side.
    pub shortcuts: Vec<(Label, usize)>,
}

/// Expected variables of every node of SR(n), indexed by `x`.
pub fn canonical_slots(n: usize) -> Vec<CanonicalSlots> {
    let sorted = sorted_by_rank(0..n);
    let mut out: Vec<Option<CanonicalSlots>> = vec![None; n];
    for (pos, &x) in sorted.iter().enumerate() {
        let label = label_of(x as u64);
        let (mut left, mut right, mut ring) = (None, None, None);
        if n >= 2 {
            let pred = sorted[(pos + n - 1) % n];
            let succ = sorted[(pos + 1) % n];
            if pos == 0 {
                ring = Some(pred);
                right = Some(succ);
            } else if pos == n - 1 {
                left = Some(pred);
                ring = Some(succ);
            } else {
                left = Some(pred);
                right = Some(succ);
            }
        }
        let (ls, rs) = ring_sides(left, right, ring);
        let mut shortcuts = Vec::new();
        for w in [ls, rs].into_iter().flatten() {
            let chain = shortcut_labels(label, label_of(w as u64))
                .expect("legitimate neighbors never yield out-of-range shortcuts");
            for s in chain {
                let idx = index_of(s).expect("derived shortcut labels are in the image of l") as usize;
                shortcuts.push((s, idx));
            }
        }
        out[x] = Some(CanonicalSlots {
            label,
            left,
            right,
            ring,
            shortcuts,
        });
    }
    out.into_iter().map(|c| c.unwrap()).collect()
}

/// Directed stored references of the canonical state, as `(from, to)`.
pub fn canonical_edges(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (x, c) in canonical_slots(n).iter().enumerate() {
        for t in [c.left, c.right, c.ring].into_iter().flatten() {
            out.push((x, t));
        }
        for &(_, t) in &c.shortcuts {
            out.push((x, t));
        }
    }
    out
}

/// Outgoing explicit references per live, labeled subscriber of `topic`.
pub fn degree_stats(world: &World, topic: TopicId) -> (usize, f64) {
    let Some(t) = world.topics.get(&topic) else {
        return (0, 0.0);
    };
    let degrees: Vec<usize> = t
        .nodes
        .iter()
        .filter(|(id, s)| !world.crashed.contains(id) && s.label.is_some())
        .map(|(_, s)| s.degree())
        .collect();
    if degrees.is_empty() {
        return (0, 0.0);
    }
    let max = *degrees.iter().max().unwrap();
    (max, degrees.iter().sum::<usize>() as f64 / degrees.len() as f64)
}

/// Legitimacy of one topic: a clean database, correct labels, explicit
/// edges equal to SR(n), equal publication stores, and no in-flight
/// message able to change state.
pub fn is_legitimate(world: &World, topic: TopicId) -> bool {
    static_legitimate(world, topic) && world.quiescent_after_delivery(topic)
}

/// Conditions that can be read off the current variables alone.
pub fn static_legitimate(world: &World, topic: TopicId) -> bool {
    let Some(t) = world.topics.get(&topic) else {
        return true;
    };
    let Some(ids) = world.supervisor.db(topic).clean_members() else {
        return false;
    };
    let n = ids.len();
    let recorded: BTreeMap<NodeId, usize> = ids.iter().enumerate().map(|(x, &id)| (id, x)).collect();

    // every live subscriber is recorded, and departed ones hold no state
    for (id, s) in &t.nodes {
        if world.crashed.contains(id) {
            continue;
        }
        if recorded.contains_key(id) {
            if s.leaving {
                return false;
            }
        } else if !s.leaving || s.is_engaged() {
            // a subscriber that has not asked to leave must be recorded
            return false;
        }
    }
    for id in &ids {
        if world.crashed.contains(id) || !t.nodes.contains_key(id) {
            return false;
        }
    }

    let canon = canonical_slots(n);
    let to_ref = |x: Option<usize>| x.map(|x| (label_of(x as u64), ids[x]));
    for (x, c) in canon.iter().enumerate() {
        let s = &t.nodes[&ids[x]];
        if s.label != Some(c.label) {
            return false;
        }
        let slot = |r: Option<crate::message::LabeledRef>| r.map(|r| (r.label, r.id));
        if slot(s.left) != to_ref(c.left) || slot(s.right) != to_ref(c.right) || slot(s.ring) != to_ref(c.ring) {
            return false;
        }
        let mut have: Vec<(Label, Option<NodeId>)> = s.shortcuts.iter().map(|e| (e.label, e.id)).collect();
        let mut want: Vec<(Label, Option<NodeId>)> = c.shortcuts.iter().map(|&(l, i)| (l, Some(ids[i]))).collect();
        have.sort();
        want.sort();
        if have != want {
            return false;
        }
    }

    // all publication stores agree
    let mut hashes = ids.iter().map(|id| t.nodes[id].trie.root_hash());
    if let Some(first) = hashes.next() {
        if hashes.any(|h| h != first) {
            return false;
        }
    }

    // cross-check against the definition's edge set
    let target: BTreeSet<(NodeId, NodeId)> = target_skip_ring(n)
        .pair_set()
        .into_iter()
        .map(|(u, v)| (ids[u], ids[v]))
        .collect();
    let mut explicit = BTreeSet::new();
    for (id, s) in &t.nodes {
        if world.crashed.contains(id) {
            continue;
        }
        for r in s.references() {
            explicit.insert((*id, r));
        }
    }
    explicit == target
}
