//! The subscriber state machine: ring maintenance with label repair,
//! label acquisition from the supervisor, shortcut maintenance, and the
//! per-subscriber publication store.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::labels::{compare_by_rank, rank_distance, shortcut_labels, Label};
use crate::message::{Addr, Flag, LabeledRef, Message, NodeId, Outbox, TopicId};
use crate::pubsub::{self, trie::PatriciaTrie, trie::Publication};
use crate::topology::ring_sides;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ShortcutEntry {
    pub label: Label,
    pub id: Option<NodeId>,
}

/// Seed for the protocol PRNG of one subscriber in one topic.
pub fn node_seed(seed: u64, id: NodeId, topic: TopicId) -> [u8; 32] {
    let mut s = [0u8; 32];
    s[..8].copy_from_slice(&seed.to_le_bytes());
    s[8..12].copy_from_slice(&id.to_le_bytes());
    s[12..16].copy_from_slice(&topic.to_le_bytes());
    s
}

#[derive(Debug, Clone)]
pub struct Subscriber {
    pub id: NodeId,
    pub label: Option<Label>,
    pub left: Option<LabeledRef>,
    pub right: Option<LabeledRef>,
    pub ring: Option<LabeledRef>,
    pub shortcuts: Vec<ShortcutEntry>,
    pub trie: PatriciaTrie,
    /// Set once the node has asked to unsubscribe.
    pub leaving: bool,
    /// Publication key collisions seen so far.
    pub collisions: u64,
    pub rng: ChaCha8Rng,
}

/// Protocol variables only (no PRNG), for state comparisons.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateView {
    pub label: Option<Label>,
    pub left: Option<LabeledRef>,
    pub right: Option<LabeledRef>,
    pub ring: Option<LabeledRef>,
    pub shortcuts: Vec<ShortcutEntry>,
    pub root_hash: Option<u64>,
    pub leaving: bool,
}

/// Ring order of references: by rank, then label length, then id, so
/// that nodes holding equal labels still form a strict order.
fn key_cmp(a: LabeledRef, b: LabeledRef) -> Ordering {
    compare_by_rank(a.label, b.label)
        .then(a.label.len().cmp(&b.label.len()))
        .then(a.id.cmp(&b.id))
}

fn lt(a: LabeledRef, b: LabeledRef) -> bool {
    key_cmp(a, b) == Ordering::Less
}

fn gt(a: LabeledRef, b: LabeledRef) -> bool {
    key_cmp(a, b) == Ordering::Greater
}

fn le(a: LabeledRef, b: LabeledRef) -> bool {
    key_cmp(a, b) != Ordering::Greater
}

impl Subscriber {
    pub fn new(id: NodeId, topic: TopicId, seed: u64) -> Subscriber {
        Subscriber {
            id,
            label: None,
            left: None,
            right: None,
            ring: None,
            shortcuts: Vec::new(),
            trie: PatriciaTrie::new(),
            leaving: false,
            collisions: 0,
            rng: ChaCha8Rng::from_seed(node_seed(seed, id, topic)),
        }
    }

    pub fn view(&self) -> StateView {
        let mut shortcuts = self.shortcuts.clone();
        shortcuts.sort();
        StateView {
            label: self.label,
            left: self.left,
            right: self.right,
            ring: self.ring,
            shortcuts,
            root_hash: self.trie.root_hash(),
            leaving: self.leaving,
        }
    }

    fn me(&self) -> Option<LabeledRef> {
        self.label.map(|l| LabeledRef::new(l, self.id))
    }

    /// Every populated reference: left, right, ring, then shortcut ids.
    pub fn references(&self) -> Vec<NodeId> {
        [self.left, self.right, self.ring]
            .into_iter()
            .flatten()
            .map(|r| r.id)
            .chain(self.shortcuts.iter().filter_map(|e| e.id))
            .collect()
    }

    pub fn degree(&self) -> usize {
        self.references().len()
    }

    pub fn references_node(&self, v: NodeId) -> bool {
        self.references().contains(&v)
    }

    /// Holds a label or any reference.
    pub fn is_engaged(&self) -> bool {
        self.label.is_some() || !self.references().is_empty()
    }

    /// Unsubscribed and released by the supervisor.
    pub fn is_departed(&self) -> bool {
        self.leaving && self.label.is_none()
    }

    fn send(out: &mut Outbox, to: NodeId, msg: Message) {
        out.push((Addr::Node(to), msg));
    }

    fn to_self(&self, out: &mut Outbox, msg: Message) {
        out.push((Addr::Node(self.id), msg));
    }

    // ---- periodic actions ------------------------------------------------

    pub fn timeout(&mut self) -> Outbox {
        let mut out = Vec::new();
        self.drop_self_references();
        self.build_ring_timeout(&mut out);
        self.reconcile_shortcuts(&mut out);
        self.contact_supervisor(&mut out);
        self.introduce_shortcut_partners(&mut out);
        out
    }

    fn drop_self_references(&mut self) {
        let me = self.id;
        for slot in [&mut self.left, &mut self.right, &mut self.ring] {
            if slot.is_some_and(|r| r.id == me) {
                *slot = None;
            }
        }
        for e in &mut self.shortcuts {
            if e.id == Some(me) {
                e.id = None;
            }
        }
    }

    pub fn build_ring_timeout(&mut self, out: &mut Outbox) {
        match (self.ring, self.label) {
            (None, label) => {
                if let Some(me) = label.map(|l| LabeledRef::new(l, self.id)) {
                    match (self.left, self.right) {
                        (None, Some(r)) => Self::send(out, r.id, Message::Introduce { c: me, flag: Flag::Cyc }),
                        (Some(l), None) => Self::send(out, l.id, Message::Introduce { c: me, flag: Flag::Cyc }),
                        _ => {}
                    }
                }
            }
            (Some(ring), None) => {
                Self::send(out, ring.id, Message::RemoveConnections { u: self.id });
                self.ring = None;
            }
            (Some(ring), Some(label)) => {
                let me = LabeledRef::new(label, self.id);
                if let Some(l) = self.left {
                    if gt(ring, me) {
                        Self::send(out, l.id, Message::Introduce { c: ring, flag: Flag::Cyc });
                        self.ring = None;
                    }
                }
                if let (Some(r), Some(ring)) = (self.right, self.ring) {
                    if lt(ring, me) {
                        Self::send(out, r.id, Message::Introduce { c: ring, flag: Flag::Cyc });
                        self.ring = None;
                    }
                }
                if let Some(ring) = self.ring {
                    if (self.left.is_none() && gt(ring, me)) || (self.right.is_none() && lt(ring, me)) {
                        Self::send(
                            out,
                            ring.id,
                            Message::Check {
                                sender: LabeledRef::new(label, self.id),
                                claimed: ring.label,
                                flag: Flag::Cyc,
                            },
                        );
                    }
                }
            }
        }
        self.build_list_timeout(out);
    }

    pub fn build_list_timeout(&mut self, out: &mut Outbox) {
        let Some(label) = self.label else {
            for r in [self.left.take(), self.right.take()].into_iter().flatten() {
                Self::send(out, r.id, Message::RemoveConnections { u: self.id });
            }
            return;
        };
        let me = LabeledRef::new(label, self.id);
        if let Some(l) = self.left {
            if le(l, me) {
                Self::send(out, l.id, Message::Check { sender: me, claimed: l.label, flag: Flag::Lin });
            } else {
                self.to_self(out, Message::Linearize { v: l });
                self.left = None;
            }
        }
        if let Some(r) = self.right {
            if le(me, r) {
                Self::send(out, r.id, Message::Check { sender: me, claimed: r.label, flag: Flag::Lin });
            } else {
                self.to_self(out, Message::Linearize { v: r });
                self.right = None;
            }
        }
    }

    /// Shortcut labels this node should hold given its current ring sides.
    pub fn expected_shortcut_labels(&self) -> Vec<Label> {
        let Some(label) = self.label else {
            return Vec::new();
        };
        let (ls, rs) = ring_sides(self.left, self.right, self.ring);
        [ls, rs]
            .into_iter()
            .flatten()
            .flat_map(|w| shortcut_labels(label, w.label).unwrap_or_default())
            .collect()
    }

    fn reconcile_shortcuts(&mut self, out: &mut Outbox) {
        let expected = self.expected_shortcut_labels();
        let mut old = std::mem::take(&mut self.shortcuts);
        for l in expected {
            let entry = match old.iter().position(|e| e.label == l) {
                Some(i) => old.remove(i),
                None => ShortcutEntry { label: l, id: None },
            };
            self.shortcuts.push(entry);
        }
        let kept: BTreeSet<NodeId> = self.references().into_iter().collect();
        let mut dropped = BTreeSet::new();
        for e in old {
            if let Some(id) = e.id {
                if !kept.contains(&id) && dropped.insert(id) {
                    self.release(id, out);
                }
            }
        }
    }

    /// A node that sees no smaller rank among its direct ring neighbors.
    pub fn locally_minimal(&self) -> bool {
        let me = match self.me() {
            Some(me) => me,
            None => return false,
        };
        [self.left, self.right, self.ring]
            .into_iter()
            .flatten()
            .all(|r| !lt(r, me))
    }

    /// The view of a correctly placed minimum: label "0", no left, both a
    /// successor and a wrap edge, every shortcut populated.
    fn settled_minimum(&self) -> bool {
        self.label == Some(Label::ZERO)
            && self.left.is_none()
            && self.right.is_some()
            && self.ring.is_some()
            && self.shortcuts.iter().all(|e| e.id.is_some())
    }

    fn contact_supervisor(&mut self, out: &mut Outbox) {
        if self.leaving {
            return;
        }
        let Some(label) = self.label else {
            out.push((Addr::Supervisor, Message::Subscribe { v: self.id }));
            return;
        };
        let p = if self.locally_minimal() {
            if self.settled_minimum() {
                return;
            }
            0.5
        } else {
            let k = label.len() as i32;
            1.0 / (2f64.powi(k) * (k * k) as f64)
        };
        if self.rng.random::<f64>() < p {
            out.push((Addr::Supervisor, Message::GetConfiguration { v: self.id }));
        }
    }

    /// The level-|label| partner on one side: the last derived shortcut, or
    /// the ring neighbor itself when no shortcut derives from it.
    fn partner(&self, side: Option<LabeledRef>) -> Option<(Label, NodeId)> {
        let label = self.label?;
        let w = side?;
        let chain = shortcut_labels(label, w.label).ok()?;
        match chain.last() {
            None => Some((w.label, w.id)),
            Some(&last) => self
                .shortcuts
                .iter()
                .find(|e| e.label == last && e.id.is_some())
                .map(|e| (e.label, e.id.unwrap())),
        }
    }

    fn introduce_shortcut_partners(&mut self, out: &mut Outbox) {
        let (ls, rs) = ring_sides(self.left, self.right, self.ring);
        let (Some((lu, u)), Some((lw, w))) = (self.partner(ls), self.partner(rs)) else {
            return;
        };
        if u == w || u == self.id || w == self.id {
            return;
        }
        Self::send(out, u, Message::IntroduceShortcut { label: lw, v: w });
        Self::send(out, w, Message::IntroduceShortcut { label: lu, v: u });
    }

    /// Periodic trie check against one random direct ring neighbor.
    pub fn publish_timeout(&mut self) -> Outbox {
        if self.is_departed() {
            return Vec::new();
        }
        let targets: Vec<NodeId> = [self.left, self.right, self.ring].into_iter().flatten().map(|r| r.id).collect();
        if targets.is_empty() {
            return Vec::new();
        }
        let Some(msg) = pubsub::root_request(&self.trie, self.id) else {
            return Vec::new();
        };
        let to = targets[self.rng.random_range(0..targets.len())];
        vec![(Addr::Node(to), msg)]
    }

    /// Originate a publication: store it and flood it to all neighbors.
    pub fn publish(&mut self, p: Publication) -> Outbox {
        let refs = self.references();
        let (out, collided) = pubsub::handle_publish_new(&mut self.trie, &p, &refs);
        self.collisions += collided as u64;
        out
    }

    /// Ask the supervisor to leave this topic.
    pub fn unsubscribe(&mut self) -> Outbox {
        self.leaving = true;
        vec![(Addr::Supervisor, Message::Unsubscribe { v: self.id })]
    }

    // ---- message handlers ------------------------------------------------

    pub fn handle(&mut self, msg: &Message) -> Outbox {
        let mut out = Vec::new();
        match msg {
            Message::Check { sender, claimed, flag } => self.check(*sender, *claimed, *flag, &mut out),
            Message::Introduce { c, flag } => self.introduce(*c, *flag, &mut out),
            Message::Linearize { v } => self.linearize(*v, &mut out),
            Message::RemoveConnections { u } => self.remove_connections(*u),
            Message::SetData { pred, label, succ } => self.set_data(*pred, *label, *succ, &mut out),
            Message::IntroduceShortcut { label, v } => self.introduce_shortcut(*label, *v, &mut out),
            _ if self.is_departed() => {}
            Message::CheckTrie { sender, summaries } => {
                out = pubsub::handle_check_trie(&self.trie, self.id, *sender, summaries);
            }
            Message::CheckAndPublish { sender, summaries, prefix } => {
                out = pubsub::handle_check_and_publish(&self.trie, self.id, *sender, summaries, *prefix);
            }
            Message::Publish { pubs } => {
                self.collisions += pubsub::handle_publish(&mut self.trie, pubs) as u64;
            }
            Message::PublishNew { p } => {
                let refs = self.references();
                let (o, collided) = pubsub::handle_publish_new(&mut self.trie, p, &refs);
                self.collisions += collided as u64;
                out = o;
            }
            _ => {}
        }
        out
    }

    pub fn check(&mut self, sender: LabeledRef, claimed: Label, flag: Flag, out: &mut Outbox) {
        if sender.id == self.id {
            return;
        }
        match self.me() {
            None => Self::send(out, sender.id, Message::RemoveConnections { u: self.id }),
            Some(me) if me.label != claimed => Self::send(out, sender.id, Message::Introduce { c: me, flag }),
            Some(_) => self.introduce(sender, flag, out),
        }
    }

    pub fn introduce(&mut self, c: LabeledRef, flag: Flag, out: &mut Outbox) {
        if c.id == self.id {
            return;
        }
        let Some(label) = self.label else {
            Self::send(out, c.id, Message::RemoveConnections { u: self.id });
            return;
        };
        let me = LabeledRef::new(label, self.id);
        if let Some(r) = self.ring {
            if r.id == c.id && r.label != c.label {
                let same_side = (lt(c, me) && lt(r, me)) || (gt(c, me) && gt(r, me));
                if same_side {
                    self.ring = Some(c);
                } else {
                    self.to_self(out, Message::Introduce { c, flag });
                    self.ring = None;
                }
            }
        }
        match flag {
            Flag::Lin => self.linearize(c, out),
            Flag::Cyc => match self.ring {
                None => match key_cmp(c, me) {
                    Ordering::Less => match self.right {
                        None => self.ring = Some(c),
                        Some(r) => Self::send(out, r.id, Message::Introduce { c, flag: Flag::Cyc }),
                    },
                    Ordering::Greater => match self.left {
                        None => self.ring = Some(c),
                        Some(l) => Self::send(out, l.id, Message::Introduce { c, flag: Flag::Cyc }),
                    },
                    Ordering::Equal => self.linearize(c, out),
                },
                Some(r) if (lt(r, me) && lt(c, me)) || (gt(r, me) && gt(c, me)) => {
                    if r.id != c.id {
                        let (win, lose) = if rank_distance(c.label, label) > rank_distance(r.label, label) {
                            (c, r)
                        } else {
                            (r, c)
                        };
                        self.ring = Some(win);
                        self.to_self(out, Message::Introduce { c: lose, flag: Flag::Lin });
                        Self::send(
                            out,
                            win.id,
                            Message::Introduce {
                                c: LabeledRef::new(label, self.id),
                                flag: Flag::Cyc,
                            },
                        );
                    }
                }
                Some(r) => {
                    self.to_self(out, Message::Introduce { c, flag: Flag::Lin });
                    self.to_self(out, Message::Introduce { c: r, flag: Flag::Lin });
                    self.ring = None;
                }
            },
        }
    }

    pub fn linearize(&mut self, v: LabeledRef, out: &mut Outbox) {
        if v.id == self.id {
            return;
        }
        let Some(label) = self.label else {
            Self::send(out, v.id, Message::RemoveConnections { u: self.id });
            return;
        };
        let me = LabeledRef::new(label, self.id);
        let in_left = self.left.is_some_and(|l| l.id == v.id);
        let in_right = self.right.is_some_and(|r| r.id == v.id);
        if in_left || in_right {
            if in_left && self.left.unwrap().label != v.label {
                if le(v, me) {
                    self.left = Some(v);
                } else {
                    self.to_self(out, Message::Linearize { v });
                    self.left = None;
                }
            }
            if in_right && self.right.unwrap().label != v.label {
                if le(me, v) {
                    self.right = Some(v);
                } else {
                    self.to_self(out, Message::Linearize { v });
                    self.right = None;
                }
            }
            return;
        }
        if le(v, me) {
            match self.left {
                Some(l) if le(v, l) => Self::send(out, l.id, Message::Linearize { v }),
                old => {
                    if let Some(l) = old {
                        Self::send(out, v.id, Message::Linearize { v: l });
                    }
                    self.left = Some(v);
                }
            }
        } else {
            match self.right {
                Some(r) if le(r, v) => Self::send(out, r.id, Message::Linearize { v }),
                old => {
                    if let Some(r) = old {
                        Self::send(out, v.id, Message::Linearize { v: r });
                    }
                    self.right = Some(v);
                }
            }
        }
    }

    pub fn remove_connections(&mut self, u: NodeId) {
        for slot in [&mut self.left, &mut self.right, &mut self.ring] {
            if slot.is_some_and(|r| r.id == u) {
                *slot = None;
            }
        }
        for e in &mut self.shortcuts {
            if e.id == Some(u) {
                e.id = None;
            }
        }
    }

    pub fn set_data(&mut self, pred: Option<LabeledRef>, label: Option<Label>, succ: Option<LabeledRef>, out: &mut Outbox) {
        if self.leaving && label.is_some() {
            // re-integrated by someone else's request; ask again to leave
            out.push((Addr::Supervisor, Message::Unsubscribe { v: self.id }));
            return;
        }
        self.label = label;
        let Some(label) = label else {
            let held: BTreeSet<NodeId> = self.references().into_iter().collect();
            self.left = None;
            self.right = None;
            self.ring = None;
            self.shortcuts.clear();
            if self.leaving {
                self.trie.clear();
            }
            for id in held {
                Self::send(out, id, Message::RemoveConnections { u: self.id });
            }
            return;
        };
        let me = LabeledRef::new(label, self.id);
        let pred = pred.filter(|p| p.id != self.id);
        let succ = succ.filter(|s| s.id != self.id);
        let (mut new_left, mut new_right, mut new_ring) = (None, None, None);
        if let Some(p) = pred {
            if lt(p, me) {
                new_left = Some(p);
            } else {
                new_ring = Some(p);
            }
        }
        if let Some(s) = succ {
            if gt(s, me) {
                new_right = Some(s);
            } else {
                new_ring = Some(s);
            }
        }
        let old = [self.left, self.right, self.ring];
        for (cur, prop) in old.iter().zip([new_left, new_right, new_ring]) {
            let Some(cur) = cur else { continue };
            if prop.map(|p| p.id) == Some(cur.id) {
                continue;
            }
            let closer = match prop {
                None => true,
                Some(p) => rank_distance(cur.label, label) <= rank_distance(p.label, label),
            };
            if closer {
                out.push((Addr::Supervisor, Message::GetConfiguration { v: cur.id }));
            }
        }
        self.left = new_left;
        self.right = new_right;
        self.ring = new_ring;
        let now: BTreeSet<NodeId> = [new_left, new_right, new_ring].into_iter().flatten().map(|r| r.id).collect();
        let mut handed = BTreeSet::new();
        for d in old.into_iter().flatten() {
            if !now.contains(&d.id) && handed.insert(d.id) {
                self.release(d.id, out);
            }
        }
    }

    /// Let go of a reference without losing the connection: `id` learns
    /// our own label and linearizes us. A shortcut entry label says where
    /// a node should be, not where it is, so it is never passed on.
    fn release(&self, id: NodeId, out: &mut Outbox) {
        if id == self.id {
            return;
        }
        let msg = match self.me() {
            Some(me) => Message::Introduce { c: me, flag: Flag::Lin },
            None => Message::RemoveConnections { u: self.id },
        };
        Self::send(out, id, msg);
    }

    pub fn introduce_shortcut(&mut self, l: Label, v: NodeId, out: &mut Outbox) {
        if v == self.id {
            return;
        }
        let mut found = false;
        let mut displaced = BTreeSet::new();
        for e in self.shortcuts.iter_mut().filter(|e| e.label == l) {
            found = true;
            if e.id != Some(v) {
                if let Some(old) = e.id {
                    displaced.insert(old);
                }
                e.id = Some(v);
            }
        }
        if !found {
            self.release(v, out);
            return;
        }
        for old in displaced {
            self.release(old, out);
        }
    }
}
