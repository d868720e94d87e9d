use proptest::prelude::*;

use scot::spacetime::{
    causal_relation, in_region, standard_geometry, validate_message, Agent, CausalRelation, GeometryError, Message,
    Payload, Site, SpacetimeEvent,
};

fn ev(t: f64, x: f64) -> SpacetimeEvent {
    SpacetimeEvent::new(t, x, 0.0, 0.0)
}

#[test]
fn classification_examples() {
    let o = ev(0.0, 0.0);
    assert_eq!(causal_relation(&o, &ev(1.0, 1.0)), CausalRelation::LightlikePast);
    assert_eq!(causal_relation(&o, &ev(1.0, 0.0)), CausalRelation::TimelikePast);
    assert_eq!(causal_relation(&ev(0.0, -1.0), &ev(0.0, 1.0)), CausalRelation::Spacelike);
}

#[test]
fn layout() {
    let g = standard_geometry(1.0, 0.1).unwrap();
    assert_eq!(g.q[0], ev(1.0, -1.0));
    assert_eq!(g.q[1], ev(1.0, 1.0));
    assert!(matches!(standard_geometry(1.0, 2.5), Err(GeometryError::NotSpacelike { .. })));
    assert!(standard_geometry(0.0, 0.1).is_err());
    assert!(in_region(&ev(1.05, -1.0), g.region(0)));
    assert!(!in_region(&ev(1.2, -1.0), g.region(0)));
    assert!(!in_region(&ev(1.05, 1.0), g.region(0)));
}

fn message(emitted: SpacetimeEvent, received: SpacetimeEvent) -> Message {
    Message {
        step: "test".into(),
        sender: Agent::Alice,
        receiver: Agent::Alice0,
        payload: Payload::bit("x", true),
        emitted,
        received,
    }
}

#[test]
fn validator_examples() {
    let o = ev(0.0, 0.0);
    assert!(validate_message(&message(o, ev(1.0, -1.0))).is_ok());
    assert!(validate_message(&message(o, ev(0.5, -1.0))).is_err());
    assert!(validate_message(&message(o, ev(1.2, -1.0))).is_ok());
}

/// Latest time of an event that can signal some point of both regions,
/// found by brute force over the segment and the slab times.
fn p_prime_oracle(h: f64, dh: f64) -> (f64, f64) {
    let mut best = (f64::NEG_INFINITY, 0.0);
    let steps = 400;
    for i in 0..=steps {
        let x = -h + 2.0 * h * i as f64 / steps as f64;
        for a in 0..=10 {
            for b in 0..=10 {
                let (ta, tb) = (h + dh * a as f64 / 10.0, h + dh * b as f64 / 10.0);
                let t = (ta - (x + h).abs()).min(tb - (x - h).abs());
                if t > best.0 {
                    best = (t, x);
                }
            }
        }
    }
    best
}

#[test]
fn p_prime_matches_grid_search() {
    for (h, dh) in [(1.0, 0.1), (2.0, 0.5), (1.0, 1.9)] {
        let g = standard_geometry(h, dh).unwrap();
        let (t, x) = p_prime_oracle(h, dh);
        assert!((g.p_prime.t - t).abs() < 1e-6, "h = {h}, dh = {dh}: {} vs {t}", g.p_prime.t);
        assert!((g.p_prime.x - x).abs() < 1e-6);
        for r in &g.regions {
            let top = SpacetimeEvent::new(r.t_max, r.position[0], r.position[1], r.position[2]);
            assert!(causal_relation(&g.p_prime, &top).is_causal_past());
        }
    }
}

fn arb_event() -> impl Strategy<Value = SpacetimeEvent> {
    (-5.0f64..5.0, -5.0f64..5.0, -5.0f64..5.0, -5.0f64..5.0).prop_map(|(t, x, y, z)| SpacetimeEvent::new(t, x, y, z))
}

/// A displacement inside the future light cone.
fn arb_future_step() -> impl Strategy<Value = [f64; 4]> {
    (0.0f64..3.0, 0.0f64..=1.0, 0.0f64..std::f64::consts::TAU, -1.0f64..=1.0).prop_map(|(dt, frac, phi, cos)| {
        let r = dt * frac;
        let sin = (1.0 - cos * cos).sqrt();
        [dt, r * sin * phi.cos(), r * sin * phi.sin(), r * cos]
    })
}

fn shift(e: &SpacetimeEvent, d: [f64; 4]) -> SpacetimeEvent {
    SpacetimeEvent::new(e.t + d[0], e.x + d[1], e.y + d[2], e.z + d[3])
}

proptest! {
    #[test]
    fn relation_is_antisymmetric(a in arb_event(), b in arb_event()) {
        prop_assert_eq!(causal_relation(&a, &b), causal_relation(&b, &a).reversed());
    }

    #[test]
    fn causal_past_is_transitive(a in arb_event(), d1 in arb_future_step(), d2 in arb_future_step()) {
        let b = shift(&a, d1);
        let c = shift(&b, d2);
        prop_assert!(causal_relation(&a, &b).is_causal_past());
        prop_assert!(causal_relation(&b, &c).is_causal_past());
        prop_assert!(causal_relation(&a, &c).is_causal_past());
    }

    #[test]
    fn output_regions_are_spacelike(h in 0.1f64..10.0, frac in 0.01f64..0.99, s0 in 0.0f64..=1.0, s1 in 0.0f64..=1.0) {
        let g = standard_geometry(h, 2.0 * h * frac).unwrap();
        let e0 = g.event_at(Site::L0, h + s0 * g.delta_h);
        let e1 = g.event_at(Site::L1, h + s1 * g.delta_h);
        prop_assert_eq!(causal_relation(&e0, &e1), CausalRelation::Spacelike);
    }

    #[test]
    fn p_prime_precedes_both_regions(h in 0.1f64..10.0, frac in 0.01f64..0.99) {
        let g = standard_geometry(h, 2.0 * h * frac).unwrap();
        prop_assert!((g.p_prime.t - g.delta_h).abs() < 1e-9);
        for i in 0..2 {
            let top = g.event_at(Site::output(i), h + g.delta_h);
            prop_assert!(causal_relation(&g.p_prime, &top).is_causal_past());
            prop_assert!(causal_relation(&g.p, &g.q[i]).is_causal_past());
        }
    }
}
