//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so every line is printed; exits nonzero on any FAIL.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use rayon::prelude::*;

use skipring::cli::{parse_scenario, run};
use skipring::labels::{index_of, label_of, shortcut_labels, Label};
use skipring::message::{Addr, Message, NodeId};
use skipring::pubsub::trie::{digest, Bits, PatriciaTrie, Publication, TrieSummary};
use skipring::pubsub::{handle_check_and_publish, handle_check_trie, handle_publish, root_request};
use skipring::simnet::{gen_initial_state, DbProfile, Profile, World};
use skipring::topology::{is_legitimate, target_skip_ring};

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

// Pinned budgets and tolerances.
const CONVERGENCE_SEEDS: u64 = 200;
const CONVERGENCE_STEPS: u64 = 50_000;
const CLOSURE_ROUNDS: u64 = 1_000;
const RATE_ROUNDS: u64 = 100_000;
const RATE_CENTER: f64 = 0.71;
const RATE_TOL: f64 = 0.02;
const REPAIR_STEPS: u64 = 50_000;
const CRASH_SEEDS: u64 = 20;
const PUB_SEEDS: u64 = 20;
const PUB_COUNT: usize = 50;

fn check(ok: bool, what: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what.into())
    }
}

// ---- independent oracles ------------------------------------------------

/// The label as a bit string: the leading bit of `x` moved to the end.
fn oracle_label(x: u64) -> String {
    if x == 0 {
        return "0".into();
    }
    let b = format!("{x:b}");
    format!("{}{}", &b[1..], &b[..1])
}

/// Reduced fraction `num/den` of a bit string read as a binary fraction.
fn oracle_rank(bits: &str) -> (u64, u64) {
    let mut num = u64::from_str_radix(bits, 2).unwrap();
    let mut den = 1u64 << bits.len();
    while num.is_multiple_of(2) && den > 1 {
        num /= 2;
        den /= 2;
    }
    if num == 0 {
        (0, 1)
    } else {
        (num, den)
    }
}

fn rank_text(bits: &str) -> String {
    match oracle_rank(bits) {
        (0, _) => "0".into(),
        (a, b) => format!("{a}/{b}"),
    }
}

/// Brute-force shortcut edges of SR(n): on each level i below the top,
/// the nodes with label length at most i form a sorted cycle.
fn oracle_shortcut_edges(n: usize) -> Vec<(usize, usize)> {
    let top = if n <= 1 { 0 } else { (n as f64).log2().ceil() as usize };
    let mut out = Vec::new();
    for i in 1..top {
        let mut members: Vec<usize> = (0..n).filter(|&x| oracle_label(x as u64).len() <= i).collect();
        members.sort_by(|&a, &b| {
            let (pa, qa) = oracle_rank(&oracle_label(a as u64));
            let (pb, qb) = oracle_rank(&oracle_label(b as u64));
            (pa as u128 * qb as u128).cmp(&(pb as u128 * qa as u128))
        });
        let k = members.len();
        if k < 2 {
            continue;
        }
        for j in 0..k {
            out.push((members[j], members[(j + k - 1) % k]));
            out.push((members[j], members[(j + 1) % k]));
        }
    }
    out.sort();
    out
}

fn edge_multiset(w: &World) -> Vec<(NodeId, NodeId)> {
    let mut e: Vec<(NodeId, NodeId)> = w.topics[&0]
        .nodes
        .iter()
        .filter(|(id, _)| !w.crashed.contains(id))
        .flat_map(|(&u, s)| s.references().into_iter().map(move |v| (u, v)))
        .collect();
    e.sort();
    e
}

fn references_anyone(w: &World, v: NodeId) -> bool {
    w.topics[&0]
        .nodes
        .iter()
        .any(|(id, s)| *id != v && !w.crashed.contains(id) && s.references_node(v))
}

// ---- criteria ---------------------------------------------------------------

fn c1_labels() -> Verdict {
    for x in 0..(1u64 << 20) {
        let l = label_of(x);
        check(index_of(l) == Ok(x), format!("roundtrip fails at {x}"))?;
        if x < 4096 {
            check(l.to_string() == oracle_label(x), format!("l({x}) = {l}, expected {}", oracle_label(x)))?;
        }
    }
    let listed = ["0", "1", "01", "11", "001", "011", "101", "111", "0001"];
    for (x, s) in listed.iter().enumerate() {
        check(label_of(x as u64).to_string() == *s, format!("order list differs at {x}"))?;
    }
    for x in 0..16u64 {
        let l = label_of(x);
        let want = (x, oracle_label(x), rank_text(&oracle_label(x)));
        let got = (x, l.to_string(), l.rank().to_string());
        check(got == want, format!("triple {got:?} != {want:?}"))?;
    }
    let ten = label_of(10);
    check(ten.to_string() == "0101" && ten.rank().to_string() == "5/16", "x=10 is not (0101, 5/16)")?;
    Ok("2^20 roundtrips, 16 triples match".into())
}

fn c2_edge_count() -> Verdict {
    for d in 1..=10u32 {
        let n = 1usize << d;
        let t = target_skip_ring(n);
        check(t.edge_count() == 4 * n - 4, format!("d={d}: {} edges", t.edge_count()))?;
        let deg = t.out_degrees();
        for k in 1..=d as u8 {
            let max = (0..n).filter(|&x| label_of(x as u64).len() == k).map(|x| deg[x]).max().unwrap();
            let want = 2 * (d as usize - k as usize + 1);
            check(max == want, format!("d={d} k={k}: max degree {max}, expected {want}"))?;
        }
        let avg = deg.iter().sum::<usize>() as f64 / n as f64;
        check(avg <= 4.0, format!("d={d}: average degree {avg}"))?;
    }
    Ok("4n-4 edges, per-length max degree 2(d-k+1), avg <= 4 for d=1..10".into())
}

fn c3_shortcuts() -> Verdict {
    let q = |s: &str| s.parse::<Label>().unwrap();
    let ranks = |v: Vec<Label>| v.into_iter().map(|l| l.rank().to_string()).collect::<Vec<_>>();
    let left = ranks(shortcut_labels(q("01"), q("0011")).map_err(|e| e.to_string())?);
    let right = ranks(shortcut_labels(q("01"), q("0101")).map_err(|e| e.to_string())?);
    check(left == ["1/8", "0"], format!("left chain {left:?}"))?;
    check(right == ["3/8", "1/2"], format!("right chain {right:?}"))?;

    for d in 1..=6u32 {
        let n = 1usize << d;
        let mut sorted: Vec<usize> = (0..n).collect();
        sorted.sort_by_key(|&x| label_of(x as u64));
        let mut derived = Vec::new();
        for (pos, &x) in sorted.iter().enumerate() {
            let pred = sorted[(pos + n - 1) % n];
            let succ = sorted[(pos + 1) % n];
            for w in [pred, succ] {
                let chain = shortcut_labels(label_of(x as u64), label_of(w as u64)).map_err(|e| e.to_string())?;
                for s in chain {
                    let y = index_of(s).map_err(|e| e.to_string())? as usize;
                    derived.push((x, y));
                }
            }
        }
        derived.sort();
        let oracle = oracle_shortcut_edges(n);
        check(derived == oracle, format!("n={n}: derived shortcuts differ from brute force"))?;
        let mut lib: Vec<(usize, usize)> = target_skip_ring(n).shortcut_edges.iter().map(|&(u, v, _)| (u, v)).collect();
        lib.sort();
        check(lib == oracle, format!("n={n}: target shortcut edges differ from brute force"))?;
    }
    Ok("1/4 -> {1/8, 0} and {3/8, 1/2}; every shortcut edge for n=2..64".into())
}

fn c4_convergence() -> Verdict {
    let cases: Vec<(usize, u64)> = (2..=16).flat_map(|n| (0..CONVERGENCE_SEEDS).map(move |s| (n, s))).collect();
    let results: Vec<(usize, u64, DbProfile, bool, u64)> = cases
        .par_iter()
        .map(|&(n, s)| {
            let db = DbProfile::ALL[(s % DbProfile::ALL.len() as u64) as usize];
            let profile = Profile::Adversarial {
                db,
                max_label_len: 6,
                corrupt_msgs: 10,
            };
            let mut w = gen_initial_state(s * 1_000 + n as u64, n, &profile);
            w.track_legitimacy = false;
            let r = w.run_until(|w| is_legitimate(w, 0), CONVERGENCE_STEPS);
            (n, s, db, r.satisfied, r.steps)
        })
        .collect();
    let failed: Vec<_> = results.iter().filter(|r| !r.3).collect();
    let worst = results.iter().map(|r| r.4).max().unwrap_or(0);
    let mean = results.iter().map(|r| r.4).sum::<u64>() as f64 / results.len() as f64;
    let covered: BTreeSet<String> = results.iter().map(|r| format!("{:?}", r.2)).collect();
    check(covered.len() == DbProfile::ALL.len(), "not every database profile was exercised")?;
    check(
        failed.is_empty(),
        format!(
            "{} of {} runs unconverged, first: n={} seed={}",
            failed.len(),
            results.len(),
            failed.first().map_or(0, |f| f.0),
            failed.first().map_or(0, |f| f.1)
        ),
    )?;
    Ok(format!(
        "{} runs (n=2..16 x {CONVERGENCE_SEEDS} seeds), worst {worst} steps, mean {mean:.0}, budget {CONVERGENCE_STEPS}",
        results.len()
    ))
}

fn c5_closure() -> Verdict {
    (2..=16usize).into_par_iter().try_for_each(|n| {
        let mut w = World::legitimate(n, n as u64);
        w.track_legitimacy = false;
        let edges = edge_multiset(&w);
        let db = w.supervisor.db(0).entries.clone();
        for r in 0..CLOSURE_ROUNDS {
            w.finish_round();
            check(edge_multiset(&w) == edges, format!("n={n}: edges changed in round {r}"))?;
            check(w.supervisor.db(0).entries == db, format!("n={n}: database changed in round {r}"))?;
        }
        check(is_legitimate(&w, 0), format!("n={n}: not legitimate at the end"))
    })?;
    Ok(format!("n=2..16, {CLOSURE_ROUNDS} rounds, edges and database unchanged"))
}

fn c6_request_rate() -> Verdict {
    let oracle: f64 = (1..=4).map(|k| 1.0 / (2.0 * (k * k) as f64)).sum();
    let mut w = World::legitimate(16, 6);
    w.track_legitimacy = false;
    w.run_rounds(RATE_ROUNDS);
    let total: u64 = w.history.iter().map(|m| m.get_configuration).sum();
    let mean = total as f64 / RATE_ROUNDS as f64;
    let detail = format!("mean {mean:.4} per round over {RATE_ROUNDS} rounds, closed form {oracle:.4}");
    check((mean - RATE_CENTER).abs() <= RATE_TOL, format!("{detail}: outside {RATE_CENTER} +- {RATE_TOL}"))?;
    check((mean - oracle).abs() <= RATE_TOL, format!("{detail}: far from closed form"))?;
    check(mean < 1.0, format!("{detail}: not below 1"))?;
    check(is_legitimate(&w, 0), "left the legitimate state")?;
    Ok(detail)
}

fn c7_overhead() -> Verdict {
    let sizes = [1usize, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 32, 33, 63, 64, 100, 127, 128, 129, 200, 255, 256];
    let mut worst_unsub = 0;
    for &n in &sizes {
        let mut w = World::legitimate(n, 1);
        w.subscribe(0, n as NodeId + 1);
        check(w.pending.len() == 1, format!("n={n}: subscribe sent {} messages", w.pending.len()))?;
        w.drain(1);
        check(
            w.pending.len() == 1 && w.pending.iter().all(|f| f.env.to == Addr::Node(n as NodeId + 1)),
            format!("n={n}: supervisor answered a subscribe with {} messages", w.pending.len()),
        )?;
        let victims: Vec<NodeId> = if n <= 64 {
            (1..=n as NodeId).collect()
        } else {
            (1..=n as NodeId).step_by(n / 16).collect()
        };
        for v in victims {
            let mut w = World::legitimate(n, 1);
            w.unsubscribe(0, v).map_err(|e| e.to_string())?;
            check(w.pending.len() == 1, format!("n={n}: unsubscribe sent {} messages", w.pending.len()))?;
            w.drain(1);
            worst_unsub = worst_unsub.max(w.pending.len());
            check(w.pending.len() <= 2, format!("n={n} v={v}: supervisor sent {} messages", w.pending.len()))?;
        }
    }
    Ok(format!("n up to 256: subscribe 1+1 messages, unsubscribe 1+{worst_unsub} at most"))
}

fn c8_unsubscribe() -> Verdict {
    let cases: Vec<(usize, NodeId, u64)> = (2..=16usize)
        .flat_map(|n| (1..=n as NodeId).flat_map(move |v| (0..3u64).map(move |s| (n, v, s))))
        .collect();
    let worst = cases
        .par_iter()
        .map(|&(n, v, s)| {
            let mut w = World::legitimate(n, s * 97 + v as u64);
            w.track_legitimacy = false;
            w.unsubscribe(0, v).map_err(|e| e.to_string())?;
            let r = w.run_until(|w| !references_anyone(w, v) && is_legitimate(w, 0), REPAIR_STEPS);
            check(r.satisfied, format!("n={n} v={v} seed={s}: no fixpoint within {REPAIR_STEPS} steps"))?;
            check(w.supervisor.db(0).n() == n - 1, format!("n={n} v={v}: database size {}", w.supervisor.db(0).n()))?;
            let gone = w.node(0, v).unwrap();
            check(!gone.is_engaged(), format!("n={n} v={v}: departed node still holds state"))?;
            Ok(r.steps)
        })
        .collect::<Result<Vec<u64>, String>>()?
        .into_iter()
        .max()
        .unwrap_or(0);
    Ok(format!("{} runs, all reach SR(n-1) with v detached; worst {worst} steps", cases.len()))
}

fn c9_crash() -> Verdict {
    let cases: Vec<(NodeId, u64)> = (1..=8).flat_map(|v| (0..CRASH_SEEDS).map(move |s| (v, s))).collect();
    let worst = cases
        .par_iter()
        .map(|&(v, s)| {
            let mut w = World::legitimate(8, 1_000 + s);
            w.track_legitimacy = false;
            w.inject_crash(Addr::Node(v)).map_err(|e| e.to_string())?;
            let r = w.run_until(|w| w.supervisor.db(0).n() == 7 && !references_anyone(w, v) && is_legitimate(w, 0), REPAIR_STEPS);
            check(r.satisfied, format!("victim {v} seed {s}: not SR(7) within {REPAIR_STEPS} steps"))?;
            Ok(r.steps)
        })
        .collect::<Result<Vec<u64>, String>>()?
        .into_iter()
        .max()
        .unwrap_or(0);
    Ok(format!("8 victims x {CRASH_SEEDS} seeds reach SR(7); worst {worst} steps"))
}

fn c10_pub_convergence() -> Verdict {
    let worst = (0..PUB_SEEDS)
        .into_par_iter()
        .map(|s| {
            let mut w = gen_initial_state(s, 16, &Profile::PartitionedTries { pubs: PUB_COUNT });
            w.track_legitimacy = false;
            let mut phi = w.phi(0);
            check(phi > 0, format!("seed {s}: nothing to reconcile"))?;
            let mut steps = 0;
            while phi > 0 {
                check(steps < REPAIR_STEPS, format!("seed {s}: phi still {phi} after {REPAIR_STEPS} steps"))?;
                w.step();
                steps += 1;
                let next = w.phi(0);
                check(next <= phi, format!("seed {s}: phi rose from {phi} to {next} at step {steps}"))?;
                phi = next;
            }
            let tries: Vec<&PatriciaTrie> = w.topics[&0].nodes.values().map(|s| &s.trie).collect();
            let h = tries[0].root_hash();
            check(tries.iter().all(|t| t.root_hash() == h), format!("seed {s}: root hashes differ"))?;
            check(tries.iter().all(|t| t.len() == PUB_COUNT), format!("seed {s}: not every publication everywhere"))?;
            Ok(steps)
        })
        .collect::<Result<Vec<u64>, String>>()?
        .into_iter()
        .max()
        .unwrap_or(0);
    Ok(format!("{PUB_SEEDS} seeds, SR(16), {PUB_COUNT} publications: phi monotone to 0, worst {worst} steps"))
}

fn c11_pub_closure() -> Verdict {
    for n in [2usize, 3, 5, 8, 16] {
        let mut w = World::legitimate(n, 11);
        for k in 0..20 {
            let p = Publication::new(1 + k % n as NodeId, format!("p{k}").into_bytes());
            for id in 1..=n as NodeId {
                w.node_entry(0, id).trie.insert(p.clone()).map_err(|e| e.to_string())?;
            }
        }
        w.finish_round();
        w.drain(1_000_000);
        check(w.pending.is_empty(), format!("n={n}: messages keep flowing"))?;
        let count = |k: &str| w.sent_by_kind.get(k).copied().unwrap_or(0);
        check(count("CheckTrie") == n as u64, format!("n={n}: {} CheckTrie", count("CheckTrie")))?;
        check(count("CheckAndPublish") == 0, format!("n={n}: CheckAndPublish sent"))?;
        check(count("Publish") == 0, format!("n={n}: Publish sent"))?;
    }
    Ok("one round: n CheckTrie, no replies, no CheckAndPublish, no Publish".into())
}

fn c12_worked_trie() -> Verdict {
    let key = |s: &str| Bits::parse(s).unwrap();
    let p: Vec<Publication> = ["001", "010", "100", "101"]
        .iter()
        .enumerate()
        .map(|(i, k)| Publication::with_key(9, format!("P{}", i + 1).into_bytes(), key(k)))
        .collect();
    let mut ut = PatriciaTrie::with_width(3);
    let mut vt = PatriciaTrie::with_width(3);
    for q in &p {
        ut.insert(q.clone()).unwrap();
    }
    for q in &p[..3] {
        vt.insert(q.clone()).unwrap();
    }
    let (u, v): (NodeId, NodeId) = (1, 2);
    // leaf hash: digest of length byte and left-aligned key bits
    let h = |k: &str| {
        let mut bytes = vec![k.len() as u8];
        bytes.extend_from_slice(&(u64::from_str_radix(k, 2).unwrap() << (64 - k.len())).to_be_bytes());
        digest(&bytes)
    };
    let hh = |a: u64, b: u64| {
        let mut bytes = a.to_be_bytes().to_vec();
        bytes.extend_from_slice(&b.to_be_bytes());
        digest(&bytes)
    };
    let s0 = TrieSummary { label: key("0"), hash: hh(h("001"), h("010")) };
    let s100 = TrieSummary { label: key("100"), hash: h("100") };
    let s10 = TrieSummary { label: key("10"), hash: hh(h("100"), h("101")) };
    check(vt.search_node(key("10")).is_none(), "v.T has a node 10")?;
    check(ut.search_node(key("100")).map(|n| n.hash()) == Some(h("100")), "u.T node 100 hash")?;

    // u -> v
    let Some(Message::CheckTrie { summaries, .. }) = root_request(&ut, u) else {
        return Err("u has no root request".into());
    };
    let reply = handle_check_trie(&vt, v, u, &summaries);
    let want = vec![(Addr::Node(u), Message::CheckTrie { sender: v, summaries: vec![s0, s100] })];
    check(reply == want, format!("v's reply {reply:?}"))?;
    let Message::CheckTrie { summaries, .. } = &reply[0].1 else { unreachable!() };
    let end = handle_check_trie(&ut, u, v, summaries);
    check(end.is_empty(), format!("u continued with {end:?}"))?;

    // v -> u
    let Some(Message::CheckTrie { summaries, .. }) = root_request(&vt, v) else {
        return Err("v has no root request".into());
    };
    let reply = handle_check_trie(&ut, u, v, &summaries);
    let want = vec![(Addr::Node(v), Message::CheckTrie { sender: u, summaries: vec![s0, s10] })];
    check(reply == want, format!("u's reply {reply:?}"))?;
    let Message::CheckTrie { summaries, .. } = &reply[0].1 else { unreachable!() };
    let ask = handle_check_trie(&vt, v, u, summaries);
    let want = vec![(
        Addr::Node(u),
        Message::CheckAndPublish { sender: v, summaries: vec![s100], prefix: key("101") },
    )];
    check(ask == want, format!("v's request {ask:?}"))?;
    let Message::CheckAndPublish { summaries, prefix, .. } = &ask[0].1 else { unreachable!() };
    let send = handle_check_and_publish(&ut, u, v, summaries, *prefix);
    let want = vec![(Addr::Node(v), Message::Publish { pubs: vec![p[3].clone()] })];
    check(send == want, format!("u's delivery {send:?}"))?;
    let Message::Publish { pubs } = &send[0].1 else { unreachable!() };
    handle_publish(&mut vt, pubs);
    check(vt.root_hash() == ut.root_hash(), "root hashes differ after delivery")?;
    Ok("u->v ends without transfer; v->u yields CheckAndPublish(101) and exactly {P4}".into())
}

fn c13_flooding() -> Verdict {
    for d in 1..=6u32 {
        let n = 1usize << d;
        for origin in 1..=n as NodeId {
            let w = World::legitimate(n, 0);
            let mut nodes = w.topics[&0].nodes.clone();
            let p = Publication::new(origin, b"flood".to_vec());
            let mut hops: BTreeMap<NodeId, u32> = BTreeMap::from([(origin, 0)]);
            let mut forwards: BTreeMap<NodeId, u32> = BTreeMap::from([(origin, 1)]);
            let mut queue: VecDeque<(u32, NodeId, Message)> = VecDeque::new();
            for (to, m) in nodes.get_mut(&origin).unwrap().publish(p.clone()) {
                let Addr::Node(to) = to else { return Err("flood reached the supervisor".into()) };
                queue.push_back((1, to, m));
            }
            while let Some((hop, to, m)) = queue.pop_front() {
                hops.entry(to).or_insert(hop);
                let out = nodes.get_mut(&to).unwrap().handle(&m);
                if !out.is_empty() {
                    *forwards.entry(to).or_default() += 1;
                }
                for (next, m) in out {
                    let Addr::Node(next) = next else { return Err("flood reached the supervisor".into()) };
                    queue.push_back((hop + 1, next, m));
                }
            }
            check(hops.len() == n, format!("n={n} origin={origin}: reached {}", hops.len()))?;
            let radius = *hops.values().max().unwrap();
            check(radius <= d, format!("n={n} origin={origin}: radius {radius} > {d}"))?;
            check(forwards.values().all(|&f| f <= 1), format!("n={n} origin={origin}: a node forwarded twice"))?;
        }
    }
    Ok("n=2..64, every origin: all reached within d hops, one forward per node".into())
}

fn c14_determinism() -> Verdict {
    let text = "seed = 42\nn = 10\nprofile = corrupt-db\nmax_label_len = 6\ncorrupt_msgs = 10\n\
                @0 snapshot\n@3 publish 3 hello\n@6 unsubscribe 4\n@8 crash 7\n@10 subscribe 11\n@12 publish 5 world\n@40 snapshot\n";
    let sc = parse_scenario(text).map_err(|e| e.to_string())?;
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    let ra = run(&sc, a.path()).map_err(|e| e.to_string())?;
    let rb = run(&sc, b.path()).map_err(|e| e.to_string())?;
    check(ra == rb, "outcomes differ")?;
    let listing = |p: &Path| -> Result<BTreeMap<String, Vec<u8>>, String> {
        let mut m = BTreeMap::new();
        for e in fs::read_dir(p).map_err(|e| e.to_string())? {
            let e = e.map_err(|e| e.to_string())?;
            m.insert(e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).map_err(|e| e.to_string())?);
        }
        Ok(m)
    };
    let (fa, fb) = (listing(a.path())?, listing(b.path())?);
    check(fa.contains_key("metrics.csv"), "no metrics.csv")?;
    check(fa.keys().filter(|k| k.ends_with(".dot")).count() == 2, "expected two snapshots")?;
    check(fa == fb, "artifacts differ between runs")?;
    Ok(format!("{} artifacts byte-identical across two runs ({} rounds)", fa.len(), ra.rounds))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 14] = [
        ("label algebra", c1_labels),
        ("edge count", c2_edge_count),
        ("shortcut derivation", c3_shortcuts),
        ("network convergence", c4_convergence),
        ("network closure", c5_closure),
        ("supervisor request rate", c6_request_rate),
        ("constant operation overhead", c7_overhead),
        ("unsubscribe disconnection", c8_unsubscribe),
        ("crash handling", c9_crash),
        ("publication convergence", c10_pub_convergence),
        ("publication closure", c11_pub_closure),
        ("worked trie example", c12_worked_trie),
        ("flooding", c13_flooding),
        ("determinism", c14_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let verdict = f();
        let secs = t.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("[PASS] {:>2} {name}: {detail} ({secs:.1}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {:>2} {name}: {why} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
