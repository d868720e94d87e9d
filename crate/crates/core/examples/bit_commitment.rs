//! Commitment by transfer: prompt unveils succeed, late ones fail, and a
//! committer cannot unveil both bits much better than 1 + p_n.

use scot::adversary::xi_strategy;
use scot::bitcommit::{binding_experiment, commit_and_unveil, honest_committer};
use scot::protocol::ProtocolParams;
use scot::spacetime::standard_geometry;

fn main() {
    let geometry = standard_geometry(1.0, 0.1).expect("valid geometry");
    let params = ProtocolParams::new(4, geometry, 3).expect("valid params");
    for delay in [0.0, 0.05, 0.2] {
        let o = commit_and_unveil(&params, true, delay).expect("commit");
        println!("unveil at t = {:.2}: accepted = {}", o.unveil.received.t, o.accepted);
    }
    for (label, s) in [("honest", honest_committer(false)), ("xi", xi_strategy())] {
        let r = binding_experiment(&s, &params, 100_000).expect("binding");
        println!(
            "{label}: p0 = {:.4}, p1 = {:.4}, sum = {:.4} (bound {:.4})",
            r.p0, r.p1, r.sum, r.bound
        );
    }
}
