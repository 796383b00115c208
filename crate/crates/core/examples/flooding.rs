//! Hop counts of a flooded publication in SR(2^d), traced message by
//! message outside the scheduler.

use std::collections::{BTreeMap, VecDeque};

use skipring::message::{Addr, NodeId};
use skipring::pubsub::trie::Publication;
use skipring::simnet::World;

fn main() {
    for d in 1..=8u32 {
        let n = 1usize << d;
        let w = World::legitimate(n, 0);
        let mut nodes = w.topics[&0].nodes.clone();
        let mut hops = BTreeMap::from([(1 as NodeId, 0u32)]);
        let mut sent = 0;
        let mut queue = VecDeque::new();
        for (to, m) in nodes.get_mut(&1).unwrap().publish(Publication::new(1, b"news".to_vec())) {
            queue.push_back((1, to, m));
        }
        while let Some((hop, Addr::Node(to), m)) = queue.pop_front() {
            sent += 1;
            hops.entry(to).or_insert(hop);
            for (next, m) in nodes.get_mut(&to).unwrap().handle(&m) {
                queue.push_back((hop + 1, next, m));
            }
        }
        let radius = hops.values().max().unwrap();
        println!("n={n:>4}: reached {:>4}, radius {radius} (d={d}), {sent} messages", hops.len());
    }
}
