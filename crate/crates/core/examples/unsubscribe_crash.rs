//! A legitimate SR(12) loses one subscriber by unsubscribing and another
//! by crashing; prints the per-round metrics until it is legitimate again.

use skipring::message::Addr;
use skipring::simnet::World;
use skipring::topology::is_legitimate;

fn main() {
    let mut w = World::legitimate(12, 7);
    w.unsubscribe(0, 5).unwrap();
    w.inject_crash(Addr::Node(9)).unwrap();

    println!("{:>5} {:>6} {:>5} {:>6} {:>5}", "round", "msgs", "sup", "maxdeg", "legit");
    while w.round < 500 {
        w.run_rounds(1);
        let m = w.history.last().unwrap();
        println!(
            "{:>5} {:>6} {:>5} {:>6} {:>5}",
            m.round, m.msgs_total, m.msgs_to_supervisor, m.max_degree, m.legitimate
        );
        if is_legitimate(&w, 0) {
            break;
        }
    }
    let db = w.supervisor.db(0);
    println!("database holds {} subscribers; 5 departed: {}", db.n(), !db.contains(5));
    println!("node 5 detached: {}", !w.node(0, 5).unwrap().is_engaged());
}
