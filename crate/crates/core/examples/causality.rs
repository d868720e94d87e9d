//! Every message respects light cones; a superluminal one is rejected.

use scot::bits::BitString;
use scot::protocol::{run_honest, ProtocolParams};
use scot::spacetime::{causal_relation, standard_geometry, validate_message, Agent, Message, Payload, Site};

fn main() {
    let geometry = standard_geometry(1.0, 0.1).expect("valid geometry");
    let params = ProtocolParams::new(8, geometry.clone(), 1).expect("valid params");
    let x = BitString::zeros(8);
    let t = run_honest(&params, false, &x, &x).expect("honest run");
    println!("{} messages, causality ok = {}", t.messages.len(), t.validate_causality().is_ok());

    let q0 = geometry.event_at(Site::L0, 1.0);
    let q1 = geometry.event_at(Site::L1, 1.0);
    println!("Q0 vs Q1: {:?}", causal_relation(&q0, &q1));
    let ftl = Message {
        step: "forged".into(),
        sender: Agent::Bob0,
        receiver: Agent::Bob1,
        payload: Payload::bit("b", true),
        emitted: q0,
        received: geometry.event_at(Site::L1, 1.5),
    };
    match validate_message(&ftl) {
        Ok(()) => println!("unexpectedly accepted"),
        Err(e) => println!("rejected: {e}"),
    }
}
