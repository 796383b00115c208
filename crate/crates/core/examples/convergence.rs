//! Self-stabilization from arbitrary states: runs each initial-state
//! profile over a batch of seeds and reports steps to legitimacy.

use rayon::prelude::*;

use skipring::simnet::{gen_initial_state, DbProfile, Profile};
use skipring::topology::is_legitimate;

const SEEDS: u64 = 50;
const N: usize = 16;
const BUDGET: u64 = 100_000;

fn main() {
    for db in DbProfile::ALL {
        let profile = Profile::Adversarial { db, max_label_len: 6, corrupt_msgs: 20 };
        let steps: Vec<Option<u64>> = (0..SEEDS)
            .into_par_iter()
            .map(|seed| {
                let mut w = gen_initial_state(seed, N, &profile);
                w.track_legitimacy = false;
                let r = w.run_until(|w| is_legitimate(w, 0), BUDGET);
                r.satisfied.then_some(r.steps)
            })
            .collect();
        let done: Vec<u64> = steps.iter().flatten().copied().collect();
        let mean = done.iter().sum::<u64>() as f64 / done.len().max(1) as f64;
        println!(
            "{:<12} converged {:>3}/{SEEDS}  mean {mean:>7.1}  worst {:>6}",
            format!("{db:?}"),
            done.len(),
            done.iter().max().unwrap_or(&0)
        );
    }
}
