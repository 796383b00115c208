//! Prints the first labels, their ranks, and the shortcut chains between
//! ring neighbors of a 16-node skip ring.

use skipring::labels::{index_of, label_of, shortcut_labels};
use skipring::topology::canonical_slots;

fn main() {
    println!("{:>3}  {:<6} {:>6}", "x", "label", "rank");
    for x in 0..16u64 {
        let l = label_of(x);
        assert_eq!(index_of(l), Ok(x));
        println!("{x:>3}  {:<6} {:>6}", l.to_string(), l.rank().to_string());
    }

    println!("\nshortcut chains in SR(16), sorted by rank:");
    let slots = canonical_slots(16);
    let mut order: Vec<usize> = (0..16).collect();
    order.sort_by_key(|&x| slots[x].label);
    for x in order {
        let c = &slots[x];
        let Some(r) = c.right.or(c.ring) else { continue };
        let chain = shortcut_labels(c.label, label_of(r as u64)).unwrap();
        let chain: Vec<String> = chain.iter().map(|l| l.to_string()).collect();
        println!("  {:<5} -> {:<5}  [{}]", c.label.to_string(), label_of(r as u64).to_string(), chain.join(", "));
    }
}
