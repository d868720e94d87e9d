//! ||F G F|| = 2^{-w(k)} on random measurement families, plus the norm lemmas.

use scot::bounds::{lemma_checks, norm_identity_check};
use scot::seed::SeedTree;

fn main() {
    let seeds = SeedTree::new(5);
    for n in 1..=2 {
        let r = norm_identity_check(n, 20, &mut seeds.stream("norm", n as u64)).expect("n <= 2");
        println!(
            "n = {n}: {} cases, max |norm - 2^-w(k)| = {:.2e}, max idempotence error = {:.2e}, pass = {}",
            r.cases.len(),
            r.max_norm_error,
            r.max_idempotence_error,
            r.pass
        );
    }
    let l = lemma_checks(200, 6, &mut seeds.stream("lemmas", 0)).expect("dim in range");
    println!(
        "lemma 1 min slack {:.3e}, lemma 2 min slack {:.3e}, pass = {}",
        l.lemma1_min_slack,
        l.lemma2_min_slack,
        l.pass()
    );
}
