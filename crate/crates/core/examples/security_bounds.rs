//! Closed-form bound against the binomial sum and the ξ attack.

use scot::bounds::{binomial_sum_bound, bound_report};

fn main() {
    println!("{:>3} {:>12} {:>12} {:>12}", "n", "bound", "binomial", "(3/4)^n");
    for n in 1..=20 {
        let r = bound_report(n, None).expect("n >= 1");
        println!("{n:>3} {:>12.8} {:>12.8} {:>12.8}", r.bound, binomial_sum_bound(n), r.cheat_lower);
    }
}
