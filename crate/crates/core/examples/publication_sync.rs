//! Subscribers start with disjoint slices of the publications; the trie
//! comparison protocol spreads them until every store is equal.

use skipring::simnet::{gen_initial_state, Profile};

fn main() {
    let mut w = gen_initial_state(3, 16, &Profile::PartitionedTries { pubs: 64 });
    w.track_legitimacy = false;
    let start = w.phi(0);
    println!("phi at start: {start}");
    while w.phi(0) > 0 && w.round < 1_000 {
        w.run_rounds(1);
        let m = w.history.last().unwrap();
        println!("round {:>3}: phi {:>4}, {:>4} messages", m.round, w.phi(0), m.msgs_total);
    }
    let sizes: Vec<usize> = w.topics[&0].nodes.values().map(|s| s.trie.len()).collect();
    println!("store sizes: {sizes:?}");
}
