//! Publication store and the trie reconciliation protocol
//! (`CheckTrie` / `CheckAndPublish` / `Publish`) plus flooding.

pub mod trie;

use std::collections::BTreeSet;

use crate::message::{Addr, Message, NodeId, Outbox};
use trie::{Bits, PatriciaTrie, Publication, TrieSummary};

/// The periodic request: our root summary, or nothing for an empty trie.
pub fn root_request(trie: &PatriciaTrie, me: NodeId) -> Option<Message> {
    trie.root().map(|r| Message::CheckTrie {
        sender: me,
        summaries: vec![r.summary()],
    })
}

/// Compare each received summary against the local trie.
pub fn handle_check_trie(trie: &PatriciaTrie, me: NodeId, sender: NodeId, summaries: &[TrieSummary]) -> Outbox {
    let mut out = Vec::new();
    let to = Addr::Node(sender);
    for s in summaries {
        match trie.search_node(s.label) {
            Some(node) if node.hash() == s.hash => {}
            Some(node) => match node.children() {
                Some([c0, c1]) => out.push((
                    to,
                    Message::CheckTrie {
                        sender: me,
                        summaries: vec![c0.summary(), c1.summary()],
                    },
                )),
                // only reachable through a corrupted summary
                None => out.push((
                    to,
                    Message::CheckAndPublish {
                        sender: me,
                        summaries: vec![node.summary()],
                        prefix: node.label(),
                    },
                )),
            },
            None => {
                let msg = match trie.min_extension(s.label) {
                    Some(c) => {
                        let b1 = c.label().bit(s.label.len());
                        Message::CheckAndPublish {
                            sender: me,
                            summaries: vec![c.summary()],
                            prefix: s.label.push(!b1),
                        }
                    }
                    None => Message::CheckAndPublish {
                        sender: me,
                        summaries: Vec::new(),
                        prefix: s.label,
                    },
                };
                out.push((to, msg));
            }
        }
    }
    out
}

pub fn handle_check_and_publish(
    trie: &PatriciaTrie,
    me: NodeId,
    sender: NodeId,
    summaries: &[TrieSummary],
    prefix: Bits,
) -> Outbox {
    let mut out = handle_check_trie(trie, me, sender, summaries);
    out.push((
        Addr::Node(sender),
        Message::Publish {
            pubs: trie.with_prefix(prefix),
        },
    ));
    out
}

/// Insert every unseen publication. Returns the number of key collisions.
pub fn handle_publish(trie: &mut PatriciaTrie, pubs: &[Publication]) -> usize {
    pubs.iter()
        .filter(|p| trie.insert((*p).clone()).is_err())
        .count()
}

/// Store a new publication and forward it to every neighbor reference;
/// duplicates are dropped. Returns the forwards and whether a collision
/// occurred.
pub fn handle_publish_new(trie: &mut PatriciaTrie, p: &Publication, neighbors: &[NodeId]) -> (Outbox, bool) {
    match trie.insert(p.clone()) {
        Ok(true) => (
            neighbors
                .iter()
                .map(|&v| (Addr::Node(v), Message::PublishNew { p: p.clone() }))
                .collect(),
            false,
        ),
        Ok(false) => (Vec::new(), false),
        Err(_) => (Vec::new(), true),
    }
}

/// `phi(u, v)`: publications of `u` missing at `v`.
pub fn potential_phi(pu: &PatriciaTrie, pv: &PatriciaTrie) -> usize {
    let have: BTreeSet<Bits> = pv.keys().into_iter().collect();
    pu.keys().iter().filter(|k| !have.contains(k)).count()
}
