//! Two subscribers, one missing a single publication, compare their
//! Patricia tries in both directions. Keys are three bits wide.

use skipring::message::{Message, NodeId};
use skipring::pubsub::trie::{Bits, PatriciaTrie, Publication};
use skipring::pubsub::{handle_check_and_publish, handle_check_trie, handle_publish, root_request};

fn show(m: &Message) -> String {
    match m {
        Message::CheckTrie { sender, summaries } => {
            let s: Vec<String> = summaries.iter().map(|s| s.label.to_string()).collect();
            format!("CheckTrie from {sender} [{}]", s.join(", "))
        }
        Message::CheckAndPublish { sender, summaries, prefix } => {
            let s: Vec<String> = summaries.iter().map(|s| s.label.to_string()).collect();
            format!("CheckAndPublish from {sender} [{}] prefix {prefix}", s.join(", "))
        }
        Message::Publish { pubs } => format!("Publish {} publication(s)", pubs.len()),
        other => format!("{other:?}"),
    }
}

fn main() {
    let pubs: Vec<Publication> = ["001", "010", "100", "101"]
        .iter()
        .enumerate()
        .map(|(i, k)| Publication::with_key(9, format!("P{}", i + 1), Bits::parse(k).unwrap()))
        .collect();
    let (u, v): (NodeId, NodeId) = (1, 2);
    let mut ut = PatriciaTrie::with_width(3);
    let mut vt = PatriciaTrie::with_width(3);
    for p in &pubs {
        ut.insert(p.clone()).unwrap();
    }
    for p in &pubs[..3] {
        vt.insert(p.clone()).unwrap();
    }

    for (name, from, to) in [("u starts", u, v), ("v starts", v, u)] {
        println!("{name}:");
        let trie = |id: NodeId, ut: &PatriciaTrie, vt: &PatriciaTrie| if id == u { ut.clone() } else { vt.clone() };
        let mut inbox = vec![(to, root_request(&trie(from, &ut, &vt), from).unwrap())];
        while let Some((at, msg)) = inbox.pop() {
            println!("  -> {at}: {}", show(&msg));
            let mine = if at == u { &mut ut } else { &mut vt };
            let out = match &msg {
                Message::CheckTrie { sender, summaries } => handle_check_trie(mine, at, *sender, summaries),
                Message::CheckAndPublish { sender, summaries, prefix } => {
                    handle_check_and_publish(mine, at, *sender, summaries, *prefix)
                }
                Message::Publish { pubs } => {
                    handle_publish(mine, pubs);
                    Vec::new()
                }
                _ => Vec::new(),
            };
            for (addr, m) in out {
                if let skipring::message::Addr::Node(next) = addr {
                    inbox.push((next, m));
                }
            }
        }
    }
    println!("equal root hashes: {}", ut.root_hash() == vt.root_hash());
}
