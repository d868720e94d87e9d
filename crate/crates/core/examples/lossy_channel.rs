//! Losses: only doubly detected pairs count, and Bob checks that detection
//! does not depend on his basis.

use scot::bits::BitString;
use scot::protocol::{detection_independence_test, detection_tallies, run_honest, ProtocolParams};
use scot::spacetime::standard_geometry;

fn main() {
    let geometry = standard_geometry(1.0, 0.1).expect("valid geometry");
    let n = 32;
    let x0 = BitString::zeros(n);
    let x1 = BitString::from_iter((0..n).map(|i| i % 3 == 0));
    let runs: Vec<_> = (0..2000)
        .filter_map(|seed| {
            let p = ProtocolParams::new(n, geometry.clone(), seed)
                .and_then(|p| p.with_loss_prob(0.3))
                .expect("valid params");
            run_honest(&p, seed % 2 == 0, &x0, &x1).ok()
        })
        .collect();
    let mean = runs.iter().map(|t| t.surviving.len()).sum::<usize>() as f64 / runs.len() as f64;
    let correct = runs.iter().filter(|t| t.output_correct(0.0)).count();
    println!("{} runs, mean |S| = {mean:.2} (expected {:.2}), correct = {correct}", runs.len(), n as f64 * 0.49);
    let test = detection_independence_test(&detection_tallies(&runs)).expect("enough runs");
    println!("independence: z = {:.3}, p = {:.3}, pass = {}", test.z, test.p_value, test.pass);
}
