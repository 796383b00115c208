//! Edge counts and degrees of SR(n) for a range of sizes, plus the DOT
//! rendering of a small legitimate world.
//!
//! `cargo run --example target_topology -- 8 > sr8.dot` writes the graph.

use std::env;

use skipring::cli::render_dot;
use skipring::simnet::World;
use skipring::topology::target_skip_ring;

fn main() {
    if let Some(n) = env::args().nth(1).and_then(|s| s.parse::<usize>().ok()) {
        print!("{}", render_dot(&World::legitimate(n, 0)));
        return;
    }
    println!("{:>5} {:>7} {:>7} {:>8} {:>8}", "n", "ring", "short", "maxdeg", "avgdeg");
    for n in [2usize, 4, 8, 16, 32, 64, 100, 128, 256, 1000, 1024] {
        let t = target_skip_ring(n);
        let deg = t.out_degrees();
        let max = deg.iter().max().unwrap();
        let avg = deg.iter().sum::<usize>() as f64 / n as f64;
        println!("{n:>5} {:>7} {:>7} {max:>8} {avg:>8.2}", t.ring_edges.len(), t.shortcut_edges.len());
    }
}
