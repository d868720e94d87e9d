//! The ξ-basis attack: both outposts recover their strings with probability (3/4)^n.

use scot::adversary::{exact_cheat_probability, run_cheat, xi_strategy};
use scot::bounds::security_bound;
use scot::protocol::ProtocolParams;
use scot::spacetime::standard_geometry;

fn main() {
    let geometry = standard_geometry(1.0, 0.1).expect("valid geometry");
    let strategy = xi_strategy();
    println!("{:>3} {:>10} {:>10} {:>10} {:>10}", "n", "estimate", "stderr", "exact", "bound");
    for n in [1, 2, 4, 8] {
        let params = ProtocolParams::new(n, geometry.clone(), 11).expect("valid params");
        let report = run_cheat(&strategy, &params, 100_000).expect("cheat run");
        let exact = exact_cheat_probability(&strategy, n).expect("product strategy");
        println!(
            "{n:>3} {:>10.5} {:>10.5} {exact:>10.5} {:>10.5}",
            report.estimate(),
            report.standard_error(),
            security_bound(n)
        );
    }
}
