//! Deterministic discrete-event harness.
//!
//! Channels are unordered and lossless. Each scheduler step either
//! delivers one pending message or fires one timeout from the current
//! round's permutation of live actors (every live node plus the
//! supervisor). A message whose age reaches `AGE_CAP` is delivered before
//! anything else, and a round ends when its permutation is exhausted, so
//! every live node fires exactly once per round.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::labels::{label_of, Label};
use crate::message::{Addr, Envelope, Flag, LabeledRef, Message, NodeId, Outbox, TopicId};
use crate::pubsub::potential_phi;
use crate::pubsub::trie::Publication;
use crate::subscriber::{ShortcutEntry, StateView, Subscriber};
use crate::supervisor::{Supervisor, SupervisorDb};
use crate::topology::{canonical_slots, degree_stats, is_legitimate};

/// Rounds within which the failure detector reports a crash.
pub const DETECT_DELAY: u64 = 2;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SimError {
    #[error("the supervisor cannot crash")]
    SupervisorCrash,
    #[error("node {0} is not part of topic {1}")]
    UnknownNode(NodeId, TopicId),
}

#[derive(Debug, Clone, Default)]
pub struct TopicState {
    pub nodes: BTreeMap<NodeId, Subscriber>,
}

/// Simulator-only lineage data; handlers never see it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MsgMeta {
    pub id: u64,
    pub parent: Option<u64>,
    /// Id of the corrupted initial message this one descends from.
    pub corrupt_root: Option<u64>,
    pub depth: u32,
}

#[derive(Debug, Clone)]
pub struct InFlight {
    pub env: Envelope,
    pub meta: MsgMeta,
    pub born: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Actor {
    Supervisor,
    Node(NodeId),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RoundMetrics {
    pub round: u64,
    pub msgs_total: u64,
    pub msgs_to_supervisor: u64,
    pub get_configuration: u64,
    pub phi: u64,
    pub max_degree: usize,
    pub avg_degree: f64,
    pub legitimate: bool,
}

#[derive(Debug, Clone, Default)]
struct Counters {
    total: u64,
    to_supervisor: u64,
    by_kind: BTreeMap<&'static str, u64>,
}

#[derive(Debug, Clone)]
pub struct World {
    pub seed: u64,
    pub step: u64,
    pub round: u64,
    pub topics: BTreeMap<TopicId, TopicState>,
    pub supervisor: Supervisor,
    pub crashed: BTreeSet<NodeId>,
    pub pending: Vec<InFlight>,
    /// Overrides `4 * live nodes`.
    pub age_cap: Option<u64>,
    /// Evaluate the legitimacy predicate at every round end.
    pub track_legitimacy: bool,
    pub history: Vec<RoundMetrics>,
    /// Messages ever enqueued per kind.
    pub sent_by_kind: BTreeMap<&'static str, u64>,
    /// Descendant count per corrupted initial message.
    pub corrupt_lineage: BTreeMap<u64, u64>,
    sched_rng: ChaCha8Rng,
    perm: Vec<Actor>,
    perm_pos: usize,
    /// Step at which the next timeout in `perm` became due.
    timeout_since: u64,
    next_msg_id: u64,
    reports: Vec<(u64, NodeId)>,
    cur: Counters,
}

pub struct RunResult {
    pub steps: u64,
    pub satisfied: bool,
}

fn sched_seed(seed: u64) -> [u8; 32] {
    let mut s = [0u8; 32];
    s[..8].copy_from_slice(&seed.to_le_bytes());
    s[16] = 1;
    s
}

/// Hand one envelope to its recipient.
fn dispatch(
    topics: &mut BTreeMap<TopicId, TopicState>,
    supervisor: &mut Supervisor,
    crashed: &BTreeSet<NodeId>,
    env: &Envelope,
) -> Outbox {
    match env.to {
        Addr::Supervisor => supervisor.handle(env.topic, &env.msg),
        Addr::Node(v) if crashed.contains(&v) => Vec::new(),
        Addr::Node(v) => match topics.get_mut(&env.topic).and_then(|t| t.nodes.get_mut(&v)) {
            Some(s) => s.handle(&env.msg),
            None => Vec::new(),
        },
    }
}

impl World {
    pub fn new(seed: u64) -> World {
        World {
            seed,
            step: 0,
            round: 0,
            topics: BTreeMap::new(),
            supervisor: Supervisor::new(),
            crashed: BTreeSet::new(),
            pending: Vec::new(),
            age_cap: None,
            track_legitimacy: true,
            history: Vec::new(),
            sent_by_kind: BTreeMap::new(),
            corrupt_lineage: BTreeMap::new(),
            sched_rng: ChaCha8Rng::from_seed(sched_seed(seed)),
            perm: Vec::new(),
            perm_pos: 0,
            timeout_since: 0,
            next_msg_id: 0,
            reports: Vec::new(),
            cur: Counters::default(),
        }
    }

    /// A legitimate SR(n) on topic 0 over node ids `1..=n`.
    pub fn legitimate(n: usize, seed: u64) -> World {
        let mut w = World::new(seed);
        let ids: Vec<NodeId> = (1..=n as NodeId).collect();
        w.install_legitimate(0, &ids);
        w
    }

    /// Overwrite `topic` with the legitimate skip ring over `ids`, where
    /// `ids[x]` holds label `l(x)`.
    pub fn install_legitimate(&mut self, topic: TopicId, ids: &[NodeId]) {
        let canon = canonical_slots(ids.len());
        let to_ref = |x: usize| LabeledRef::new(label_of(x as u64), ids[x]);
        for (x, c) in canon.iter().enumerate() {
            let s = self.node_entry(topic, ids[x]);
            s.label = Some(c.label);
            s.left = c.left.map(to_ref);
            s.right = c.right.map(to_ref);
            s.ring = c.ring.map(to_ref);
            s.shortcuts = c
                .shortcuts
                .iter()
                .map(|&(label, i)| ShortcutEntry { label, id: Some(ids[i]) })
                .collect();
            s.leaving = false;
        }
        *self.supervisor.db_mut(topic) = SupervisorDb::legitimate(ids);
    }

    /// The subscriber instance of `id` in `topic`, created on first use.
    pub fn node_entry(&mut self, topic: TopicId, id: NodeId) -> &mut Subscriber {
        let seed = self.seed;
        self.topics
            .entry(topic)
            .or_default()
            .nodes
            .entry(id)
            .or_insert_with(|| Subscriber::new(id, topic, seed))
    }

    pub fn node(&self, topic: TopicId, id: NodeId) -> Option<&Subscriber> {
        self.topics.get(&topic)?.nodes.get(&id)
    }

    /// Live node ids over all topics.
    pub fn live_nodes(&self) -> BTreeSet<NodeId> {
        self.topics
            .values()
            .flat_map(|t| t.nodes.keys().copied())
            .filter(|id| !self.crashed.contains(id))
            .collect()
    }

    pub fn effective_age_cap(&self) -> u64 {
        self.age_cap.unwrap_or(4 * self.live_nodes().len().max(1) as u64)
    }

    // ---- external events ----------------------------------------------------

    /// `id` joins `topic`: its Subscribe request is sent right away.
    pub fn subscribe(&mut self, topic: TopicId, id: NodeId) {
        let s = self.node_entry(topic, id);
        s.leaving = false;
        let out = vec![(Addr::Supervisor, Message::Subscribe { v: id })];
        self.enqueue(topic, out, None);
    }

    pub fn unsubscribe(&mut self, topic: TopicId, id: NodeId) -> Result<(), SimError> {
        let s = self
            .topics
            .get_mut(&topic)
            .and_then(|t| t.nodes.get_mut(&id))
            .ok_or(SimError::UnknownNode(id, topic))?;
        let out = s.unsubscribe();
        self.enqueue(topic, out, None);
        Ok(())
    }

    /// Crash `target`. The failure detector reports it to the supervisor
    /// within `DETECT_DELAY` rounds.
    pub fn inject_crash(&mut self, target: Addr) -> Result<(), SimError> {
        let Addr::Node(id) = target else {
            return Err(SimError::SupervisorCrash);
        };
        if self.crashed.insert(id) {
            let due = self.round + self.sched_rng.random_range(1..=DETECT_DELAY);
            self.reports.push((due, id));
        }
        Ok(())
    }

    /// `id` originates a publication in `topic`.
    pub fn publish(&mut self, topic: TopicId, id: NodeId, payload: impl Into<Vec<u8>>) -> Result<Publication, SimError> {
        let s = self
            .topics
            .get_mut(&topic)
            .and_then(|t| t.nodes.get_mut(&id))
            .ok_or(SimError::UnknownNode(id, topic))?;
        let p = Publication::new(id, payload);
        let out = s.publish(p.clone());
        self.enqueue(topic, out, None);
        Ok(p)
    }

    /// Put a message in flight as part of the initial state; its lineage
    /// is tracked as corrupted.
    pub fn inject_corrupt(&mut self, env: Envelope) {
        let id = self.next_msg_id;
        self.next_msg_id += 1;
        self.corrupt_lineage.insert(id, 0);
        self.pending.push(InFlight {
            env,
            meta: MsgMeta {
                id,
                parent: None,
                corrupt_root: Some(id),
                depth: 0,
            },
            born: self.step,
        });
    }

    fn enqueue(&mut self, topic: TopicId, out: Outbox, parent: Option<MsgMeta>) {
        for (to, msg) in out {
            let kind = msg.kind();
            self.cur.total += 1;
            if to == Addr::Supervisor {
                self.cur.to_supervisor += 1;
            }
            *self.cur.by_kind.entry(kind).or_default() += 1;
            *self.sent_by_kind.entry(kind).or_default() += 1;
            let corrupt_root = parent.and_then(|p| p.corrupt_root);
            if let Some(root) = corrupt_root {
                *self.corrupt_lineage.entry(root).or_default() += 1;
            }
            let meta = MsgMeta {
                id: self.next_msg_id,
                parent: parent.map(|p| p.id),
                corrupt_root,
                depth: parent.map_or(0, |p| p.depth + 1),
            };
            self.next_msg_id += 1;
            self.pending.push(InFlight {
                env: Envelope { to, topic, msg },
                meta,
                born: self.step,
            });
        }
    }

    // ---- scheduling -----------------------------------------------------------

    fn start_round(&mut self) {
        let due: Vec<NodeId> = self
            .reports
            .iter()
            .filter(|(r, _)| *r <= self.round)
            .map(|&(_, v)| v)
            .collect();
        self.reports.retain(|(r, _)| *r > self.round);
        for v in due {
            // detector traffic, not protocol traffic: not counted
            let id = self.next_msg_id;
            self.next_msg_id += 1;
            self.pending.push(InFlight {
                env: Envelope {
                    to: Addr::Supervisor,
                    topic: 0,
                    msg: Message::CrashReport { v },
                },
                meta: MsgMeta {
                    id,
                    parent: None,
                    corrupt_root: None,
                    depth: 0,
                },
                born: self.step,
            });
        }
        self.perm = std::iter::once(Actor::Supervisor)
            .chain(self.live_nodes().into_iter().map(Actor::Node))
            .collect();
        self.perm.shuffle(&mut self.sched_rng);
        self.perm_pos = 0;
    }

    fn end_round(&mut self) {
        let c = std::mem::take(&mut self.cur);
        let topics: Vec<TopicId> = self.topics.keys().copied().collect();
        let mut max_degree = 0;
        let mut deg_sum = 0.0;
        for &t in &topics {
            let (mx, avg) = degree_stats(self, t);
            max_degree = max_degree.max(mx);
            deg_sum += avg;
        }
        let legitimate = self.track_legitimacy && topics.iter().all(|&t| is_legitimate(self, t));
        self.history.push(RoundMetrics {
            round: self.round,
            msgs_total: c.total,
            msgs_to_supervisor: c.to_supervisor,
            get_configuration: c.by_kind.get("GetConfiguration").copied().unwrap_or(0),
            phi: topics.iter().map(|&t| self.phi(t)).sum(),
            max_degree,
            avg_degree: if topics.is_empty() { 0.0 } else { deg_sum / topics.len() as f64 },
            legitimate,
        });
        self.round += 1;
    }

    /// Advance by one scheduler event.
    pub fn step(&mut self) {
        if self.perm_pos >= self.perm.len() {
            self.start_round();
        }
        self.step += 1;
        let cap = self.effective_age_cap();
        // The pending timeout ages like a message, so a backlog of overdue
        // messages cannot starve the round.
        let overdue = self
            .pending
            .iter()
            .enumerate()
            .filter(|(_, m)| self.step - m.born >= cap)
            .min_by_key(|(_, m)| (m.born, m.meta.id))
            .map(|(i, m)| (i, m.born));
        let timeout_overdue = self.step - self.timeout_since >= cap;
        match overdue {
            Some((i, born)) if !timeout_overdue || born <= self.timeout_since => {
                self.deliver(i);
                return;
            }
            _ if timeout_overdue => {
                self.fire_next();
                return;
            }
            _ => {}
        }
        let m = self.pending.len();
        if m > 0 && self.sched_rng.random_range(0..=m) < m {
            let i = self.sched_rng.random_range(0..m);
            self.deliver(i);
        } else {
            self.fire_next();
        }
    }

    fn fire_next(&mut self) {
        let actor = self.perm[self.perm_pos];
        self.perm_pos += 1;
        self.timeout_since = self.step;
        self.fire(actor);
        if self.perm_pos == self.perm.len() {
            self.end_round();
        }
    }

    fn deliver(&mut self, i: usize) {
        let f = self.pending.swap_remove(i);
        let out = dispatch(&mut self.topics, &mut self.supervisor, &self.crashed, &f.env);
        self.enqueue(f.env.topic, out, Some(f.meta));
    }

    fn fire(&mut self, actor: Actor) {
        let topics: Vec<TopicId> = self.topics.keys().copied().collect();
        match actor {
            Actor::Supervisor => {
                for t in topics {
                    let out = self.supervisor.timeout(t);
                    self.enqueue(t, out, None);
                }
            }
            Actor::Node(v) => {
                if self.crashed.contains(&v) {
                    return;
                }
                for t in topics {
                    let Some(s) = self.topics.get_mut(&t).and_then(|ts| ts.nodes.get_mut(&v)) else {
                        continue;
                    };
                    let mut out = s.timeout();
                    out.extend(s.publish_timeout());
                    self.enqueue(t, out, None);
                }
            }
        }
    }

    /// Step until the current round ends.
    pub fn finish_round(&mut self) {
        let r = self.round;
        while self.round == r {
            self.step();
        }
    }

    pub fn run_rounds(&mut self, k: u64) {
        for _ in 0..k {
            self.finish_round();
        }
    }

    /// Deliver pending messages oldest first, without firing any timeout,
    /// until none remain or `max` were delivered. Returns the deliveries.
    pub fn drain(&mut self, max: u64) -> u64 {
        let mut done = 0;
        while done < max {
            let Some(i) = (0..self.pending.len()).min_by_key(|&i| (self.pending[i].born, self.pending[i].meta.id)) else {
                break;
            };
            self.step += 1;
            self.deliver(i);
            done += 1;
        }
        done
    }

    /// Step until `pred` holds, checked before every step, or until
    /// `max_steps` steps were taken.
    pub fn run_until(&mut self, mut pred: impl FnMut(&World) -> bool, max_steps: u64) -> RunResult {
        let mut steps = 0;
        loop {
            if pred(self) {
                return RunResult { steps, satisfied: true };
            }
            if steps >= max_steps {
                return RunResult { steps, satisfied: false };
            }
            self.step();
            steps += 1;
        }
    }

    // ---- observation -----------------------------------------------------------

    /// Sum of `|P_u \ P_v|` over direct ring references `u -> v`.
    pub fn phi(&self, topic: TopicId) -> u64 {
        let Some(t) = self.topics.get(&topic) else {
            return 0;
        };
        let mut sum = 0;
        for (id, u) in &t.nodes {
            if self.crashed.contains(id) {
                continue;
            }
            for r in [u.left, u.right, u.ring].into_iter().flatten() {
                if let Some(v) = t.nodes.get(&r.id) {
                    if !self.crashed.contains(&r.id) {
                        sum += potential_phi(&u.trie, &v.trie) as u64;
                    }
                }
            }
        }
        sum
    }

    fn views(topics: &BTreeMap<TopicId, TopicState>, topic: TopicId) -> BTreeMap<NodeId, StateView> {
        topics
            .get(&topic)
            .map(|t| t.nodes.iter().map(|(&id, s)| (id, s.view())).collect())
            .unwrap_or_default()
    }

    /// Deliver every pending message, and everything they trigger, on a
    /// copy of the state; true iff no variable of `topic` or its database
    /// changes.
    pub fn quiescent_after_delivery(&self, topic: TopicId) -> bool {
        if self.pending.is_empty() {
            return true;
        }
        let mut topics = self.topics.clone();
        let mut sup = self.supervisor.clone();
        let before = Self::views(&topics, topic);
        let db_before = sup.db(topic).entries.clone();
        let mut queue: VecDeque<Envelope> = self.pending.iter().map(|f| f.env.clone()).collect();
        let mut budget = 10_000 + 100 * queue.len();
        while let Some(env) = queue.pop_front() {
            if budget == 0 {
                return false;
            }
            budget -= 1;
            let out = dispatch(&mut topics, &mut sup, &self.crashed, &env);
            queue.extend(out.into_iter().map(|(to, msg)| Envelope { to, topic: env.topic, msg }));
        }
        Self::views(&topics, topic) == before && sup.db(topic).entries == db_before
    }

    /// Subscriber-subgraph connectivity over explicit references and
    /// references carried by pending messages, ignoring direction.
    pub fn weakly_connected(&self, topic: TopicId) -> bool {
        let Some(t) = self.topics.get(&topic) else {
            return true;
        };
        let ids: Vec<NodeId> = t.nodes.keys().copied().filter(|v| !self.crashed.contains(v)).collect();
        let Some(&start) = ids.first() else {
            return true;
        };
        let mut adj: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
        let mut link = |a: NodeId, b: NodeId| {
            adj.entry(a).or_default().push(b);
            adj.entry(b).or_default().push(a);
        };
        for (&u, s) in &t.nodes {
            for v in s.references() {
                link(u, v);
            }
        }
        for f in self.pending.iter().filter(|f| f.env.topic == topic) {
            if let Addr::Node(to) = f.env.to {
                for v in carried_ids(&f.env.msg) {
                    link(to, v);
                }
            }
        }
        let mut seen = BTreeSet::from([start]);
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            for &v in adj.get(&u).into_iter().flatten() {
                if seen.insert(v) {
                    stack.push(v);
                }
            }
        }
        ids.iter().all(|v| seen.contains(v))
    }
}

/// Node ids referenced by a message payload.
pub fn carried_ids(msg: &Message) -> Vec<NodeId> {
    match msg {
        Message::Check { sender, .. } => vec![sender.id],
        Message::Introduce { c, .. } => vec![c.id],
        Message::Linearize { v } => vec![v.id],
        Message::RemoveConnections { u } => vec![*u],
        Message::SetData { pred, succ, .. } => [pred, succ].into_iter().flatten().map(|r| r.id).collect(),
        Message::IntroduceShortcut { v, .. } => vec![*v],
        Message::CheckTrie { sender, .. } | Message::CheckAndPublish { sender, .. } => vec![*sender],
        _ => Vec::new(),
    }
}

// ---- initial states ----------------------------------------------------------

/// Database corruptions; the numbering follows the four ways a database
/// can be corrupted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DbProfile {
    Empty,
    Correct,
    /// (i) an entry without subscriber
    Bottom,
    /// (ii) one subscriber under several labels
    Duplicate,
    /// (iii) a label `l(i)`, `i < n`, missing
    Missing,
    /// (iv) a label `l(i)`, `i >= n`, present
    Excess,
    /// all four at once
    AllCorrupt,
}

impl DbProfile {
    pub const ALL: [DbProfile; 7] = [
        DbProfile::Empty,
        DbProfile::Correct,
        DbProfile::Bottom,
        DbProfile::Duplicate,
        DbProfile::Missing,
        DbProfile::Excess,
        DbProfile::AllCorrupt,
    ];
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Profile {
    /// No edges, no labels, empty database.
    CleanEmpty,
    Legitimate,
    /// Random connected edges, labels absent / correct / random bit strings
    /// up to `max_label_len`, the given database, and up to
    /// `corrupt_msgs` arbitrary in-flight messages.
    Adversarial {
        db: DbProfile,
        max_label_len: u8,
        corrupt_msgs: usize,
    },
    /// Legitimate topology with `pubs` publications stored at random
    /// subsets of nodes.
    PartitionedTries { pubs: usize },
}

impl Profile {
    pub fn parse(name: &str, max_label_len: u8, corrupt_msgs: usize, pubs: usize) -> Option<Profile> {
        let db = |db| Profile::Adversarial {
            db,
            max_label_len,
            corrupt_msgs,
        };
        Some(match name {
            "clean-empty" => Profile::CleanEmpty,
            "legitimate" => Profile::Legitimate,
            "adversarial" | "random" => db(DbProfile::Empty),
            "correct-db" => db(DbProfile::Correct),
            "corrupt-db" => db(DbProfile::AllCorrupt),
            "partitioned-tries" => Profile::PartitionedTries { pubs },
            _ => return None,
        })
    }
}

fn random_label(rng: &mut ChaCha8Rng, max_len: u8) -> Label {
    let len = rng.random_range(1..=max_len.max(1));
    let value = rng.random_range(0..(1u64 << len));
    Label::new(len, value).expect("length and value are in range")
}

/// A random node state label: absent, some `l(x)` with `x < n`, or an
/// arbitrary bit string.
fn random_node_label(rng: &mut ChaCha8Rng, n: usize, max_len: u8) -> Option<Label> {
    match rng.random_range(0..3) {
        0 => None,
        1 => Some(label_of(rng.random_range(0..n as u64))),
        _ => Some(random_label(rng, max_len)),
    }
}

fn random_db(rng: &mut ChaCha8Rng, ids: &[NodeId], profile: DbProfile) -> SupervisorDb {
    let n = ids.len();
    if profile == DbProfile::Empty {
        return SupervisorDb::default();
    }
    let mut shuffled = ids.to_vec();
    shuffled.shuffle(rng);
    let k = rng.random_range(1..=n);
    let mut db = SupervisorDb::from_pairs(
        shuffled[..k]
            .iter()
            .enumerate()
            .map(|(x, &id)| (label_of(x as u64), Some(id))),
    );
    db.next = rng.random_range(0..n as u64 + 3);
    let all = profile == DbProfile::AllCorrupt;
    if all || profile == DbProfile::Duplicate {
        let id = *ids.choose(rng).unwrap();
        let a = label_of(rng.random_range(0..n as u64 + 2));
        let b = label_of(rng.random_range(n as u64 + 2..2 * n as u64 + 4));
        db.entries.insert(a, Some(id));
        db.entries.insert(b, Some(id));
    }
    if all || profile == DbProfile::Missing {
        let recorded = db.entries.len() as u64;
        if recorded > 1 {
            let gap = label_of(rng.random_range(0..recorded - 1));
            db.entries.remove(&gap);
        }
    }
    if all || profile == DbProfile::Excess {
        let id = *ids.choose(rng).unwrap();
        let far = label_of(rng.random_range(2 * n as u64..4 * n as u64 + 4));
        db.entries.insert(far, Some(id));
        // a garbage label outside the image of l
        if rng.random_bool(0.5) {
            let id = *ids.choose(rng).unwrap();
            db.entries.insert(Label::new(3, 2).unwrap(), Some(id));
        }
    }
    if all || profile == DbProfile::Bottom {
        let mut x = rng.random_range(0..n as u64 + 2);
        while db.entries.contains_key(&label_of(x)) {
            x += 1;
        }
        db.entries.insert(label_of(x), None);
    }
    db
}

fn random_ref(rng: &mut ChaCha8Rng, world: &World, topic: TopicId, v: NodeId, max_len: u8) -> LabeledRef {
    // mostly the target's own label, sometimes a stale one
    let own = world.node(topic, v).and_then(|s| s.label);
    let label = match own {
        Some(l) if rng.random_bool(0.7) => l,
        _ => random_label(rng, max_len),
    };
    LabeledRef::new(label, v)
}

fn random_message(rng: &mut ChaCha8Rng, world: &World, ids: &[NodeId], max_len: u8) -> Envelope {
    let pick = |rng: &mut ChaCha8Rng| *ids.choose(rng).unwrap();
    let flag = |rng: &mut ChaCha8Rng| if rng.random_bool(0.5) { Flag::Cyc } else { Flag::Lin };
    let to_node = Addr::Node(pick(rng));
    let (to, msg) = match rng.random_range(0..9) {
        0 => {
            let s = pick(rng);
            (
                to_node,
                Message::Check {
                    sender: random_ref(rng, world, 0, s, max_len),
                    claimed: random_label(rng, max_len),
                    flag: flag(rng),
                },
            )
        }
        1 => {
            let c = pick(rng);
            (
                to_node,
                Message::Introduce {
                    c: random_ref(rng, world, 0, c, max_len),
                    flag: flag(rng),
                },
            )
        }
        2 => {
            let v = pick(rng);
            (to_node, Message::Linearize { v: random_ref(rng, world, 0, v, max_len) })
        }
        3 => (to_node, Message::RemoveConnections { u: pick(rng) }),
        4 => {
            let (p, s) = (pick(rng), pick(rng));
            let pred = rng.random_bool(0.8).then(|| random_ref(rng, world, 0, p, max_len));
            let succ = rng.random_bool(0.8).then(|| random_ref(rng, world, 0, s, max_len));
            let label = rng.random_bool(0.8).then(|| random_label(rng, max_len));
            (to_node, Message::SetData { pred, label, succ })
        }
        5 => (
            to_node,
            Message::IntroduceShortcut {
                label: random_label(rng, max_len),
                v: pick(rng),
            },
        ),
        6 => (Addr::Supervisor, Message::GetConfiguration { v: pick(rng) }),
        7 => (Addr::Supervisor, Message::Subscribe { v: pick(rng) }),
        _ => (Addr::Supervisor, Message::Unsubscribe { v: pick(rng) }),
    };
    Envelope { to, topic: 0, msg }
}

/// An initial world on topic 0 with node ids `1..=n`.
pub fn gen_initial_state(seed: u64, n: usize, profile: &Profile) -> World {
    let mut w = World::new(seed);
    let ids: Vec<NodeId> = (1..=n as NodeId).collect();
    // generation draws from its own stream, separate from scheduling
    let mut s = sched_seed(seed);
    s[16] = 2;
    let mut rng = ChaCha8Rng::from_seed(s);
    match profile {
        Profile::CleanEmpty => {
            for &id in &ids {
                w.node_entry(0, id);
            }
        }
        Profile::Legitimate => w.install_legitimate(0, &ids),
        Profile::PartitionedTries { pubs } => {
            w.install_legitimate(0, &ids);
            for k in 0..*pubs {
                let origin = *ids.choose(&mut rng).unwrap();
                let p = Publication::new(origin, format!("pub-{k}").into_bytes());
                let holders = rng.random_range(1..=n.div_ceil(2));
                for &h in ids.choose_multiple(&mut rng, holders) {
                    let _ = w.node_entry(0, h).trie.insert(p.clone());
                }
            }
        }
        Profile::Adversarial {
            db,
            max_label_len,
            corrupt_msgs,
        } => {
            let max_len = (*max_label_len).max(1);
            for &id in &ids {
                let label = random_node_label(&mut rng, n, max_len);
                w.node_entry(0, id).label = label;
            }
            // random spanning tree plus a few extra edges
            let mut order = ids.clone();
            order.shuffle(&mut rng);
            let mut edges = Vec::new();
            for i in 1..order.len() {
                let j = rng.random_range(0..i);
                let (a, b) = (order[i], order[j]);
                edges.push(if rng.random_bool(0.5) { (a, b) } else { (b, a) });
            }
            for _ in 0..rng.random_range(0..=n) {
                let (a, b) = (*ids.choose(&mut rng).unwrap(), *ids.choose(&mut rng).unwrap());
                if a != b {
                    edges.push((a, b));
                }
            }
            for (a, b) in edges {
                let r = random_ref(&mut rng, &w, 0, b, max_len);
                let slot = rng.random_range(0..4);
                let s = w.node_entry(0, a);
                match slot {
                    0 if s.left.is_none() => s.left = Some(r),
                    1 if s.right.is_none() => s.right = Some(r),
                    2 if s.ring.is_none() => s.ring = Some(r),
                    _ => s.shortcuts.push(ShortcutEntry {
                        label: r.label,
                        id: Some(b),
                    }),
                }
            }
            *w.supervisor.db_mut(0) = random_db(&mut rng, &ids, *db);
            let c = rng.random_range(0..=*corrupt_msgs);
            for _ in 0..c {
                let env = random_message(&mut rng, &w, &ids, max_len);
                w.inject_corrupt(env);
            }
        }
    }
    w
}
