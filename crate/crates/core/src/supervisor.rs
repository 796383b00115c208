//! The supervisor: label database per topic, repair of corrupted
//! databases, round-robin configuration dissemination and the
//! subscribe / unsubscribe / configuration / crash handlers.

use std::collections::{BTreeMap, BTreeSet};

use crate::labels::{index_of, label_of, Label};
use crate::message::{Addr, LabeledRef, Message, NodeId, Outbox, TopicId};

/// Ordered `label -> node` table plus the round-robin cursor.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SupervisorDb {
    pub entries: BTreeMap<Label, Option<NodeId>>,
    pub next: u64,
}

/// Sort key for "lowest label": the `l^-1` index, with labels outside the
/// image of `l` after every valid one.
fn label_key(label: Label) -> (u64, Label) {
    (index_of(label).unwrap_or(u64::MAX), label)
}

/// The configuration `(pred, label, succ)` sent in `SetData`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Configuration {
    pub pred: Option<LabeledRef>,
    pub label: Option<Label>,
    pub succ: Option<LabeledRef>,
}

impl Configuration {
    pub const NONE: Configuration = Configuration {
        pred: None,
        label: None,
        succ: None,
    };

    pub fn into_message(self) -> Message {
        Message::SetData {
            pred: self.pred,
            label: self.label,
            succ: self.succ,
        }
    }
}

impl SupervisorDb {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Label, Option<NodeId>)>) -> SupervisorDb {
        SupervisorDb {
            entries: pairs.into_iter().collect(),
            next: 0,
        }
    }

    /// A clean database holding `ids[x]` under `l(x)`.
    pub fn legitimate(ids: &[NodeId]) -> SupervisorDb {
        SupervisorDb::from_pairs(
            ids.iter()
                .enumerate()
                .map(|(x, &id)| (label_of(x as u64), Some(id))),
        )
    }

    pub fn n(&self) -> usize {
        self.entries.len()
    }

    pub fn label_of_node(&self, v: NodeId) -> Option<Label> {
        self.entries
            .iter()
            .find(|(_, &id)| id == Some(v))
            .map(|(l, _)| *l)
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.label_of_node(v).is_some()
    }

    /// True if any of the four corruption conditions holds.
    pub fn is_corrupted(&self) -> bool {
        self.clean_members().is_none()
    }

    /// For a non-corrupted database, the node holding `l(x)` at position `x`.
    pub fn clean_members(&self) -> Option<Vec<NodeId>> {
        let n = self.n();
        let mut ids: Vec<Option<NodeId>> = vec![None; n];
        let mut seen = BTreeSet::new();
        for (&label, &id) in &self.entries {
            let id = id?;
            if !seen.insert(id) {
                return None;
            }
            let x = index_of(label).ok()? as usize;
            if x >= n {
                return None;
            }
            ids[x] = Some(id);
        }
        ids.into_iter().collect()
    }

    /// Cyclic rank neighbors of `label`, excluding itself.
    pub fn pred_succ(&self, label: Label) -> (Option<LabeledRef>, Option<LabeledRef>) {
        if self.n() < 2 {
            return (None, None);
        }
        let as_ref = |(l, id): (&Label, &Option<NodeId>)| id.map(|id| LabeledRef::new(*l, id));
        let pred = self
            .entries
            .range(..label)
            .next_back()
            .or_else(|| self.entries.iter().next_back())
            .and_then(as_ref);
        let succ = self
            .entries
            .range(label..)
            .nth(1)
            .or_else(|| self.entries.range(..label).next())
            .and_then(as_ref);
        (pred, succ)
    }

    pub fn configuration(&self, v: NodeId) -> Configuration {
        match self.label_of_node(v) {
            Some(label) => {
                let (pred, succ) = self.pred_succ(label);
                Configuration {
                    pred,
                    label: Some(label),
                    succ,
                }
            }
            None => Configuration::NONE,
        }
    }

    /// Keep only the lowest-label entry of `v`. Local, no messages.
    pub fn check_multiple_copies(&mut self, v: NodeId) {
        let mut mine: Vec<Label> = self
            .entries
            .iter()
            .filter(|(_, &id)| id == Some(v))
            .map(|(l, _)| *l)
            .collect();
        mine.sort_by_key(|&l| label_key(l));
        for l in mine.into_iter().skip(1) {
            self.entries.remove(&l);
        }
    }

    /// Drop entries without a node, then fill every missing `l(i)`, `i < n`,
    /// from the entry with the largest index. Local, no messages.
    pub fn check_labels(&mut self) {
        self.entries.retain(|_, id| id.is_some());
        let n = self.n() as u64;
        for i in 0..n {
            let li = label_of(i);
            if self.entries.contains_key(&li) {
                continue;
            }
            let top = self
                .entries
                .keys()
                .copied()
                .max_by_key(|&l| label_key(l))
                .expect("a missing label implies a higher one");
            debug_assert!(label_key(top).0 > i);
            let id = self.entries.remove(&top).unwrap();
            self.entries.insert(li, id);
        }
    }

    /// Insert `v` as `l(n)` and return its configuration.
    fn insert_new(&mut self, v: NodeId) -> Configuration {
        let label = label_of(self.n() as u64);
        self.entries.insert(label, Some(v));
        self.configuration(v)
    }

    pub fn holder(&self, label: Label) -> Option<NodeId> {
        self.entries.get(&label).copied().flatten()
    }
}

/// The supervisor: one database per topic and the failure detector's
/// verdicts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Supervisor {
    pub dbs: BTreeMap<TopicId, SupervisorDb>,
    /// Nodes reported crashed; requests concerning them are ignored.
    pub suspected: BTreeSet<NodeId>,
}

fn send(out: &mut Outbox, to: NodeId, cfg: Configuration) {
    out.push((Addr::Node(to), cfg.into_message()));
}

impl Supervisor {
    pub fn new() -> Supervisor {
        Supervisor::default()
    }

    pub fn db(&self, topic: TopicId) -> &SupervisorDb {
        static EMPTY: SupervisorDb = SupervisorDb {
            entries: BTreeMap::new(),
            next: 0,
        };
        self.dbs.get(&topic).unwrap_or(&EMPTY)
    }

    pub fn db_mut(&mut self, topic: TopicId) -> &mut SupervisorDb {
        self.dbs.entry(topic).or_default()
    }

    pub fn timeout(&mut self, topic: TopicId) -> Outbox {
        let db = self.db_mut(topic);
        db.check_labels();
        let n = db.n() as u64;
        if n == 0 {
            return Vec::new();
        }
        db.next = (db.next + 1) % n;
        let v = db
            .holder(label_of(db.next))
            .expect("check_labels leaves every l(i), i < n, populated");
        self.handle_get_configuration(topic, v)
    }

    pub fn handle(&mut self, topic: TopicId, msg: &Message) -> Outbox {
        match *msg {
            Message::Subscribe { v } => self.handle_subscribe(topic, v),
            Message::Unsubscribe { v } => self.handle_unsubscribe(topic, v),
            Message::GetConfiguration { v } => self.handle_get_configuration(topic, v),
            Message::CrashReport { v } => {
                self.handle_crash(v);
                Vec::new()
            }
            _ => Vec::new(),
        }
    }

    pub fn handle_subscribe(&mut self, topic: TopicId, v: NodeId) -> Outbox {
        if self.suspected.contains(&v) {
            return Vec::new();
        }
        let db = self.db_mut(topic);
        if db.contains(v) {
            return self.handle_get_configuration(topic, v);
        }
        let mut out = Vec::new();
        let cfg = db.insert_new(v);
        send(&mut out, v, cfg);
        out
    }

    pub fn handle_unsubscribe(&mut self, topic: TopicId, v: NodeId) -> Outbox {
        let mut out = Vec::new();
        let db = self.db_mut(topic);
        db.check_multiple_copies(v);
        if let Some(label_u) = db.label_of_node(v) {
            let n = db.n() as u64;
            let last = label_of(n.saturating_sub(1));
            let w = db.holder(last);
            match w {
                Some(w) if n > 1 && index_of(label_u) != Ok(n - 1) => {
                    db.entries.remove(&label_u);
                    db.entries.remove(&last);
                    db.entries.insert(label_u, Some(w));
                    let cfg = db.configuration(w);
                    send(&mut out, w, cfg);
                }
                _ => {
                    db.entries.remove(&label_u);
                }
            }
        }
        send(&mut out, v, Configuration::NONE);
        out
    }

    /// Sends `u` its configuration. Unknown nodes are integrated first, as
    /// on subscribe.
    pub fn handle_get_configuration(&mut self, topic: TopicId, u: NodeId) -> Outbox {
        if self.suspected.contains(&u) {
            return Vec::new();
        }
        let db = self.db_mut(topic);
        db.check_multiple_copies(u);
        let cfg = if db.contains(u) {
            db.configuration(u)
        } else {
            db.insert_new(u)
        };
        let mut out = Vec::new();
        send(&mut out, u, cfg);
        out
    }

    /// Failure detector verdict: drop `v` everywhere; gaps are closed by
    /// the next `check_labels`.
    pub fn handle_crash(&mut self, v: NodeId) {
        self.suspected.insert(v);
        for db in self.dbs.values_mut() {
            db.entries.retain(|_, id| *id != Some(v));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l(s: &str) -> Label {
        s.parse().unwrap()
    }

    fn db(pairs: &[(&str, Option<NodeId>)]) -> SupervisorDb {
        SupervisorDb::from_pairs(pairs.iter().map(|&(s, id)| (l(s), id)))
    }

    fn sup(d: SupervisorDb) -> Supervisor {
        let mut s = Supervisor::new();
        s.dbs.insert(0, d);
        s
    }

    const A: NodeId = 1;
    const B: NodeId = 2;
    const C: NodeId = 3;
    const D: NodeId = 4;
    const E: NodeId = 5;

    fn set_data(to: NodeId, pred: Option<(&str, NodeId)>, label: Option<&str>, succ: Option<(&str, NodeId)>) -> (Addr, Message) {
        let r = |p: Option<(&str, NodeId)>| p.map(|(s, id)| LabeledRef::new(l(s), id));
        (
            Addr::Node(to),
            Message::SetData {
                pred: r(pred),
                label: label.map(l),
                succ: r(succ),
            },
        )
    }

    #[test]
    fn timeout_round_robin() {
        let mut s = sup(db(&[("0", Some(A)), ("1", Some(B))]));
        let out = s.timeout(0);
        assert_eq!(s.db(0).next, 1);
        assert_eq!(out, vec![set_data(B, Some(("0", A)), Some("1"), Some(("0", A)))]);
        assert!(sup(SupervisorDb::default()).timeout(0).is_empty());
    }

    #[test]
    fn timeout_fills_gap_first() {
        let mut s = sup(db(&[("0", Some(A)), ("01", Some(C))]));
        let out = s.timeout(0);
        assert_eq!(s.db(0).label_of_node(C), Some(l("1")));
        assert_eq!(out, vec![set_data(C, Some(("0", A)), Some("1"), Some(("0", A)))]);
    }

    #[test]
    fn subscribe() {
        let mut s = sup(db(&[("0", Some(A))]));
        let out = s.handle_subscribe(0, B);
        assert_eq!(out, vec![set_data(B, Some(("0", A)), Some("1"), Some(("0", A)))]);

        let mut s = sup(db(&[("0", Some(A)), ("1", Some(B)), ("01", Some(C)), ("11", Some(D))]));
        let out = s.handle_subscribe(0, E);
        assert_eq!(out, vec![set_data(E, Some(("0", A)), Some("001"), Some(("01", C)))]);

        let mut s = sup(db(&[("0", Some(A))]));
        let before = s.clone();
        let out = s.handle_subscribe(0, A);
        assert_eq!(out, vec![set_data(A, None, Some("0"), None)]);
        assert_eq!(s, before);
    }

    #[test]
    fn unsubscribe() {
        let mut s = sup(db(&[("0", Some(A)), ("1", Some(B)), ("01", Some(C))]));
        let out = s.handle_unsubscribe(0, A);
        assert_eq!(
            out,
            vec![
                set_data(C, Some(("1", B)), Some("0"), Some(("1", B))),
                set_data(A, None, None, None)
            ]
        );
        assert_eq!(s.db(0), &db(&[("0", Some(C)), ("1", Some(B))]));

        let mut s = sup(db(&[("0", Some(A))]));
        assert_eq!(s.handle_unsubscribe(0, A), vec![set_data(A, None, None, None)]);
        assert_eq!(s.db(0).n(), 0);

        let mut s = sup(db(&[("0", Some(A))]));
        assert_eq!(s.handle_unsubscribe(0, B), vec![set_data(B, None, None, None)]);
        assert_eq!(s.db(0).n(), 1);
    }

    #[test]
    fn get_configuration() {
        let mut s = sup(db(&[("0", Some(A)), ("1", Some(B))]));
        assert_eq!(
            s.handle_get_configuration(0, A),
            vec![set_data(A, Some(("1", B)), Some("0"), Some(("1", B)))]
        );

        let mut s = sup(db(&[("0", Some(A))]));
        let out = s.handle_get_configuration(0, B);
        assert_eq!(s.db(0).label_of_node(B), Some(l("1")));
        assert_eq!(out, vec![set_data(B, Some(("0", A)), Some("1"), Some(("0", A)))]);

        let mut s = sup(db(&[("0", Some(A)), ("1", Some(B)), ("01", Some(C)), ("11", Some(C))]));
        let out = s.handle_get_configuration(0, C);
        assert_eq!(s.db(0).label_of_node(C), Some(l("01")));
        assert_eq!(s.db(0).n(), 3);
        assert_eq!(out, vec![set_data(C, Some(("0", A)), Some("01"), Some(("1", B)))]);
    }

    #[test]
    fn multiple_copies() {
        let mut d = db(&[("0", Some(A)), ("11", Some(A))]);
        d.check_multiple_copies(A);
        assert_eq!(d, db(&[("0", Some(A))]));

        let mut d = db(&[("01", Some(A)), ("001", Some(A)), ("0", Some(B))]);
        d.check_multiple_copies(A);
        assert_eq!(d, db(&[("01", Some(A)), ("0", Some(B))]));
    }

    #[test]
    fn check_labels_cases() {
        let mut d = db(&[("0", Some(A)), ("001", Some(B))]);
        d.check_labels();
        assert_eq!(d, db(&[("0", Some(A)), ("1", Some(B))]));

        let mut d = db(&[("0", Some(A)), ("1", None)]);
        d.check_labels();
        assert_eq!(d, db(&[("0", Some(A))]));

        let clean = db(&[("0", Some(A)), ("1", Some(B)), ("01", Some(C))]);
        let mut d = clean.clone();
        d.check_labels();
        assert_eq!(d, clean);

        // a label outside the image of l is moved first
        let mut d = db(&[("0", Some(A)), ("00", Some(B)), ("11", Some(C))]);
        d.check_labels();
        assert!(!d.is_corrupted());
    }

    #[test]
    fn crash() {
        let mut s = sup(db(&[("0", Some(A)), ("1", Some(B))]));
        s.handle_crash(B);
        assert_eq!(s.db(0), &db(&[("0", Some(A))]));

        let mut s = sup(db(&[("0", Some(A)), ("1", Some(B)), ("01", Some(C))]));
        s.handle_crash(A);
        s.db_mut(0).check_labels();
        assert_eq!(s.db(0).label_of_node(C), Some(l("0")));

        let mut s = sup(db(&[("0", Some(A))]));
        s.handle_crash(E);
        assert_eq!(s.db(0).n(), 1);
        assert!(s.handle_get_configuration(0, E).is_empty());
    }
}
