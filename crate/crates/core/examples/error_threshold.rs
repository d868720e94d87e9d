//! Error tolerance: the bound 2^{2nh(γ)} p_n decays only below γ* ≈ 0.0153.

use scot::bounds::{counting_check, error_bound, gamma_threshold};

fn main() {
    let g = gamma_threshold();
    println!("gamma* = {g:.6}");
    for gamma in [0.005, 0.01, 0.015, 0.02, 0.05] {
        let row: Vec<String> = [10, 100, 1000]
            .iter()
            .map(|&n| format!("{:.3e}", error_bound(n, gamma).expect("gamma in range")))
            .collect();
        println!("gamma = {gamma:<6} n = 10, 100, 1000: {}", row.join("  "));
    }
    for n in [4, 10] {
        let c = counting_check(n, 0.25).expect("small n");
        println!("n = {n}, gamma = 0.25: {} patterns <= {:.1}", c.count, c.bound);
    }
}
