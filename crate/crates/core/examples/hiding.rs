//! Alice's view is independent of b: exactly for small n, statistically for n = 64.

use scot::bits::BitString;
use scot::protocol::{exact_hiding_distance, hiding_chi_square, AliceSecrets, ProtocolParams};
use scot::spacetime::standard_geometry;

fn main() {
    let geometry = standard_geometry(1.0, 0.1).expect("valid geometry");
    for n in 1..=3 {
        let params = ProtocolParams::new(n, geometry.clone(), 0).expect("valid params");
        let secrets = AliceSecrets::all(n).next().expect("n >= 1");
        let x0 = BitString::zeros(n);
        let x1 = BitString::from_iter((0..n).map(|_| true));
        let tv = exact_hiding_distance(&params, &x0, &x1, std::slice::from_ref(&secrets)).expect("enumeration");
        println!("n = {n}: TV(view | b = 0, view | b = 1) = {tv:.3e}");
    }
    let params = ProtocolParams::new(64, geometry, 9).expect("valid params");
    let chi = hiding_chi_square(&params, 10_000, 0.01).expect("chi-square");
    println!(
        "n = 64: chi2 = {:.3}, df = {}, p = {:.3}, pass = {}",
        chi.statistic, chi.degrees_of_freedom, chi.p_value, chi.pass
    );
}
