//! One honest run: Bob learns x_b at Q_b and nothing else.

use scot::bits::BitString;
use scot::protocol::{run_honest, ProtocolParams};
use scot::spacetime::standard_geometry;

fn main() {
    let geometry = standard_geometry(1.0, 0.1).expect("valid geometry");
    let params = ProtocolParams::new(16, geometry, 7).expect("valid params");
    let mut rng = params.seeds().stream("example", 0);
    let x0 = BitString::random(16, &mut rng);
    let x1 = BitString::random(16, &mut rng);

    let t = run_honest(&params, true, &x0, &x1).expect("honest run");
    println!("x0 = {x0}\nx1 = {x1}");
    println!("c = {}, b = {}, b' = {:?}", t.c as u8, t.b as u8, t.b_prime.map(u8::from));
    let out = t.output.as_ref().expect("output");
    println!("{} outputs {} at t = {}", out.agent, out.bits, out.at.t);
    println!("correct = {}", t.output_correct(0.0));
    for m in &t.messages {
        println!("  [{}] {} -> {} {} ({} -> {})", m.step, m.sender, m.receiver, m.payload, m.emitted.t, m.received.t);
    }
}
