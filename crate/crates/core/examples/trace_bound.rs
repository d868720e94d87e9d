//! General attacks (isometry plus measurements) evaluated exactly and compared with p_n.

use scot::adversary::XiStrategy;
use scot::bounds::{exact_pn_via_trace, security_bound, OperatorStrategy};
use scot::seed::SeedTree;
use std::sync::Arc;

fn main() {
    let xi = OperatorStrategy::from_pair_strategy(Arc::new(XiStrategy::default()), 1).expect("xi");
    println!("xi via trace, n = 1: {:.12}", exact_pn_via_trace(&xi, 1).expect("trace"));
    let seeds = SeedTree::new(2);
    for n in 1..=2 {
        let mut worst: f64 = 0.0;
        for i in 0..20 {
            let s = OperatorStrategy::random(n, &mut seeds.stream("random", (n * 100 + i) as u64)).expect("random");
            worst = worst.max(exact_pn_via_trace(&s, n).expect("trace"));
        }
        println!("n = {n}: best of 20 random attacks {worst:.5} <= bound {:.5}", security_bound(n));
    }
}
