//! Scenario runner: parses a scenario file, drives the simulator and
//! writes `metrics.csv` plus `topo_<round>.dot` snapshots.
//!
//! Scenario format, one item per line, `#` starts a comment:
//!
//! ```text
//! seed = 7
//! n = 8
//! profile = corrupt-db      # clean-empty | legitimate | adversarial | correct-db | corrupt-db | partitioned-tries
//! max_label_len = 6
//! corrupt_msgs = 10
//! predicate = legitimate    # legitimate | phi-zero | none
//! @0 snapshot
//! @20 unsubscribe 3
//! @25 publish 2 hello
//! @40:1 subscribe 12        # round 40, topic 1
//! ```

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use rayon::prelude::*;

use crate::labels::index_of;
use crate::message::{Addr, NodeId, TopicId};
use crate::simnet::{gen_initial_state, Profile, World};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Predicate {
    Legitimate,
    PhiZero,
    None,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Action {
    Subscribe(NodeId),
    Unsubscribe(NodeId),
    Crash(NodeId),
    Publish(NodeId, String),
    Snapshot,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub round: u64,
    pub topic: TopicId,
    pub action: Action,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub seed: u64,
    /// True when the file gave no seed and 0 was assumed.
    pub seed_defaulted: bool,
    pub topics: u32,
    pub n: usize,
    pub profile: Profile,
    pub max_steps: u64,
    pub predicate: Predicate,
    /// Run at least this many rounds.
    pub rounds: u64,
    pub events: Vec<Event>,
}

fn perr(line: usize, msg: impl Into<String>) -> CliError {
    CliError::Parse { line, msg: msg.into() }
}

fn num<T: std::str::FromStr>(line: usize, what: &str, s: &str) -> Result<T, CliError> {
    s.trim().parse().map_err(|_| perr(line, format!("bad {what}: {s:?}")))
}

pub fn parse_scenario(text: &str) -> Result<Scenario, CliError> {
    let mut seed = None;
    let mut topics = 1;
    let mut n = 8;
    let mut profile_name = "clean-empty".to_string();
    let (mut max_label_len, mut corrupt_msgs, mut pubs) = (6u8, 10usize, 50usize);
    let mut max_steps = 200_000;
    let mut predicate = Predicate::Legitimate;
    let mut rounds = 0;
    let mut script: Vec<(usize, Event)> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap().trim();
        if body.is_empty() {
            continue;
        }
        if let Some(rest) = body.strip_prefix('@') {
            let (when, cmd) = rest.split_once(char::is_whitespace).ok_or_else(|| perr(line, "missing action"))?;
            let (round, topic) = match when.split_once(':') {
                Some((r, t)) => (num(line, "round", r)?, num(line, "topic", t)?),
                None => (num(line, "round", when)?, 0),
            };
            let mut words = cmd.split_whitespace();
            let verb = words.next().unwrap_or_default();
            let mut id = || -> Result<NodeId, CliError> {
                match words.next() {
                    Some("supervisor") => Err(perr(line, "the supervisor cannot be the target of this action")),
                    Some(w) => num(line, "node id", w),
                    None => Err(perr(line, "missing node id")),
                }
            };
            let action = match verb {
                "subscribe" => Action::Subscribe(id()?),
                "unsubscribe" => Action::Unsubscribe(id()?),
                "crash" => Action::Crash(id()?),
                "publish" => {
                    let v = id()?;
                    let payload: Vec<&str> = words.collect();
                    Action::Publish(v, payload.join(" "))
                }
                "snapshot" => Action::Snapshot,
                other => return Err(perr(line, format!("unknown action {other:?}"))),
            };
            if let Some((_, prev)) = script.last() {
                if round < prev.round {
                    return Err(perr(line, "rounds must be non-decreasing"));
                }
            }
            script.push((line, Event { round, topic, action }));
            continue;
        }
        let (key, value) = body.split_once('=').ok_or_else(|| perr(line, "expected `key = value`"))?;
        let value = value.trim();
        match key.trim() {
            "seed" => seed = Some(num(line, "seed", value)?),
            "topics" => topics = num(line, "topics", value)?,
            "n" => n = num(line, "n", value)?,
            "profile" => profile_name = value.to_string(),
            "max_label_len" => max_label_len = num(line, "max_label_len", value)?,
            "corrupt_msgs" => corrupt_msgs = num(line, "corrupt_msgs", value)?,
            "pubs" => pubs = num(line, "pubs", value)?,
            "max_steps" => max_steps = num(line, "max_steps", value)?,
            "rounds" => rounds = num(line, "rounds", value)?,
            "predicate" => {
                predicate = match value {
                    "legitimate" => Predicate::Legitimate,
                    "phi-zero" => Predicate::PhiZero,
                    "none" => Predicate::None,
                    _ => return Err(perr(line, format!("unknown predicate {value:?}"))),
                }
            }
            other => return Err(perr(line, format!("unknown key {other:?}"))),
        }
    }
    if topics == 0 {
        return Err(perr(0, "topics must be at least 1"));
    }
    if !(1..=63).contains(&max_label_len) {
        return Err(perr(0, "max_label_len must be in 1..=63"));
    }
    let profile = Profile::parse(&profile_name, max_label_len, corrupt_msgs, pubs)
        .ok_or_else(|| perr(0, format!("unknown profile {profile_name:?}")))?;

    // every referenced id must exist or have subscribed earlier
    let mut known: Vec<BTreeSet<NodeId>> = vec![(1..=n as NodeId).collect(); topics as usize];
    for (line, ev) in &script {
        let Some(k) = known.get_mut(ev.topic as usize) else {
            return Err(perr(*line, format!("no topic {}", ev.topic)));
        };
        match &ev.action {
            Action::Subscribe(v) => {
                k.insert(*v);
            }
            Action::Unsubscribe(v) | Action::Crash(v) | Action::Publish(v, _) => {
                if !k.contains(v) {
                    return Err(perr(*line, format!("unknown node {v}")));
                }
            }
            Action::Snapshot => {}
        }
    }

    Ok(Scenario {
        seed: seed.unwrap_or(0),
        seed_defaulted: seed.is_none(),
        topics,
        n,
        profile,
        max_steps,
        predicate,
        rounds,
        events: script.into_iter().map(|(_, e)| e).collect(),
    })
}

/// The initial world of a scenario: every topic is generated from the
/// profile on node ids `1..=n`.
pub fn build_world(sc: &Scenario) -> World {
    let mut w = gen_initial_state(sc.seed, sc.n, &sc.profile);
    for t in 1..sc.topics {
        let mut other = gen_initial_state(sc.seed.wrapping_add(t as u64), sc.n, &sc.profile);
        let mut state = other.topics.remove(&0).unwrap_or_default();
        for s in state.nodes.values_mut() {
            let fresh = crate::subscriber::Subscriber::new(s.id, t, sc.seed);
            s.rng = fresh.rng;
        }
        w.topics.insert(t, state);
        if let Some(db) = other.supervisor.dbs.remove(&0) {
            w.supervisor.dbs.insert(t, db);
        }
        for mut f in other.pending {
            f.env.topic = t;
            w.inject_corrupt(f.env);
        }
    }
    w
}

/// Topology snapshot of every topic in DOT. Ring edges are black, each
/// shortcut level gets its own color.
pub fn render_dot(world: &World) -> String {
    const COLORS: [&str; 8] = ["red", "blue", "darkgreen", "orange", "purple", "brown", "cyan4", "magenta"];
    let mut s = String::new();
    let _ = writeln!(s, "digraph skipring {{");
    let _ = writeln!(s, "  node [shape=circle];");
    for (topic, t) in &world.topics {
        let _ = writeln!(s, "  subgraph cluster_t{topic} {{");
        let _ = writeln!(s, "    label=\"topic {topic}\";");
        let live = |id: &NodeId| !world.crashed.contains(id);
        for (id, v) in t.nodes.iter().filter(|(id, v)| live(id) && v.is_engaged()) {
            let text = match v.label {
                Some(l) => {
                    let idx = index_of(l).map_or("?".to_string(), |x| x.to_string());
                    format!("{idx}:{l}:{}", l.rank())
                }
                None => "?:-:-".to_string(),
            };
            let _ = writeln!(s, "    t{topic}_{id} [label=\"{text}\"];");
        }
        for (id, v) in t.nodes.iter().filter(|(id, _)| live(id)) {
            for r in [v.left, v.right, v.ring].into_iter().flatten() {
                let _ = writeln!(s, "    t{topic}_{id} -> t{topic}_{} [color=black];", r.id);
            }
            for e in &v.shortcuts {
                let Some(to) = e.id else { continue };
                let level = v.label.map_or(0, |l| l.len()).max(e.label.len());
                let color = COLORS[level as usize % COLORS.len()];
                let _ = writeln!(
                    s,
                    "    t{topic}_{id} -> t{topic}_{to} [color={color}, style=dashed, label=\"{level}\"];"
                );
            }
        }
        let _ = writeln!(s, "  }}");
    }
    let _ = writeln!(s, "}}");
    s
}

pub fn write_metrics(world: &World, path: &Path) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["round", "msgs_total", "msgs_to_supervisor", "phi", "max_degree", "avg_degree", "legitimate"])?;
    for m in &world.history {
        w.write_record([
            m.round.to_string(),
            m.msgs_total.to_string(),
            m.msgs_to_supervisor.to_string(),
            m.phi.to_string(),
            m.max_degree.to_string(),
            format!("{:.4}", m.avg_degree),
            (m.legitimate as u8).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub satisfied: bool,
    pub rounds: u64,
    pub steps: u64,
}

fn apply(world: &mut World, ev: &Event, out: &Path) -> Result<(), CliError> {
    match &ev.action {
        Action::Subscribe(v) => world.subscribe(ev.topic, *v),
        // the parser checked ids, but a node may have been dropped since
        Action::Unsubscribe(v) => {
            let _ = world.unsubscribe(ev.topic, *v);
        }
        Action::Crash(v) => {
            let _ = world.inject_crash(Addr::Node(*v));
        }
        Action::Publish(v, payload) => {
            let _ = world.publish(ev.topic, *v, payload.as_bytes().to_vec());
        }
        Action::Snapshot => fs::write(out.join(format!("topo_{}.dot", world.round)), render_dot(world))?,
    }
    Ok(())
}

/// Execute a scenario, writing artifacts into `out`. The predicate is
/// evaluated at round ends once every scripted event has fired.
pub fn run(sc: &Scenario, out: &Path) -> Result<Outcome, CliError> {
    fs::create_dir_all(out)?;
    let mut world = build_world(sc);
    let mut next = 0;
    let satisfied = loop {
        while next < sc.events.len() && sc.events[next].round <= world.round {
            apply(&mut world, &sc.events[next], out)?;
            next += 1;
        }
        let done = next == sc.events.len() && world.round >= sc.rounds;
        if done {
            let holds = match (sc.predicate, world.history.last()) {
                (Predicate::None, _) => true,
                (_, None) => false,
                (Predicate::Legitimate, Some(m)) => m.legitimate,
                (Predicate::PhiZero, Some(m)) => m.phi == 0,
            };
            if holds {
                break true;
            }
        }
        if world.step >= sc.max_steps {
            break false;
        }
        let r = world.round;
        while world.round == r && world.step < sc.max_steps {
            world.step();
        }
    };
    write_metrics(&world, &out.join("metrics.csv"))?;
    Ok(Outcome {
        satisfied,
        rounds: world.round,
        steps: world.step,
    })
}

#[derive(Debug, Parser)]
#[command(name = "skipring", about = "Run a publish-subscribe skip ring scenario")]
pub struct Args {
    /// Scenario file.
    #[arg(long)]
    pub scenario: PathBuf,
    /// Overrides the scenario's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub max_steps: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long)]
    pub quiet: bool,
    /// Run K consecutive seeds in parallel, each into `<out>/seed_<s>`.
    #[arg(long, value_name = "K")]
    pub sweep: Option<u64>,
}

pub fn main_with_args(args: Args) -> ExitCode {
    let text = match fs::read_to_string(&args.scenario) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}: {e}", args.scenario.display());
            return ExitCode::from(2);
        }
    };
    let mut sc = match parse_scenario(&text) {
        Ok(sc) => sc,
        Err(e) => {
            eprintln!("error: {}: {e}", args.scenario.display());
            return ExitCode::from(2);
        }
    };
    if let Some(seed) = args.seed {
        sc.seed = seed;
    } else if sc.seed_defaulted {
        eprintln!("warning: no seed given, using 0");
    }
    if let Some(m) = args.max_steps {
        sc.max_steps = m;
    }

    let runs: Vec<(u64, PathBuf)> = match args.sweep {
        None => vec![(sc.seed, args.out.clone())],
        Some(k) => (0..k)
            .map(|i| {
                let s = sc.seed.wrapping_add(i);
                (s, args.out.join(format!("seed_{s}")))
            })
            .collect(),
    };
    let results: Vec<(u64, Result<Outcome, CliError>)> = runs
        .par_iter()
        .map(|(seed, dir)| {
            let mut sc = sc.clone();
            sc.seed = *seed;
            (*seed, run(&sc, dir))
        })
        .collect();

    let mut all_ok = true;
    for (seed, r) in results {
        match r {
            Ok(o) => {
                all_ok &= o.satisfied;
                if !args.quiet {
                    let verdict = if o.satisfied { "satisfied" } else { "unmet" };
                    println!("seed {seed}: predicate {verdict} after {} rounds, {} steps", o.rounds, o.steps);
                }
            }
            Err(e) => {
                eprintln!("error: seed {seed}: {e}");
                return ExitCode::from(2);
            }
        }
    }
    if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
