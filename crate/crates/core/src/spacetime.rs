//! Minkowski geometry in a fixed inertial frame with `c = 1`.
//!
//! Laboratories sit at three points on the x axis: `L` at the origin and
//! `L0`, `L1` at `x = -h` and `x = +h`. Output regions are time slabs
//! `[h, h + dh]` at `L0` and `L1`. Every message carries an emission and a
//! reception event and is accepted only if the reception lies in the closed
//! future light cone of the emission.

use std::fmt;

use thiserror::Error;

use crate::bits::BitString;

/// Tolerance on interval signs and coordinate comparisons.
pub const CAUSAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpacetimeEvent {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl SpacetimeEvent {
    pub const fn new(t: f64, x: f64, y: f64, z: f64) -> Self {
        SpacetimeEvent { t, x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        [self.t, self.x, self.y, self.z].iter().all(|v| v.is_finite())
    }

    pub fn position(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    fn spatial_distance(&self, other: &SpacetimeEvent) -> f64 {
        let dx = other.x - self.x;
        let dy = other.y - self.y;
        let dz = other.z - self.z;
        (dx * dx + dy * dy + dz * dz).sqrt()
    }
}

impl fmt::Display for SpacetimeEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.t, self.x, self.y, self.z)
    }
}

/// Position of the first event relative to the second.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CausalRelation {
    TimelikePast,
    LightlikePast,
    Spacelike,
    LightlikeFuture,
    TimelikeFuture,
    Coincident,
}

impl CausalRelation {
    /// Closed causal past, coincidence included.
    pub fn is_causal_past(self) -> bool {
        matches!(
            self,
            CausalRelation::TimelikePast | CausalRelation::LightlikePast | CausalRelation::Coincident
        )
    }

    pub fn is_causal_future(self) -> bool {
        matches!(
            self,
            CausalRelation::TimelikeFuture
                | CausalRelation::LightlikeFuture
                | CausalRelation::Coincident
        )
    }

    pub fn reversed(self) -> CausalRelation {
        match self {
            CausalRelation::TimelikePast => CausalRelation::TimelikeFuture,
            CausalRelation::LightlikePast => CausalRelation::LightlikeFuture,
            CausalRelation::LightlikeFuture => CausalRelation::LightlikePast,
            CausalRelation::TimelikeFuture => CausalRelation::TimelikePast,
            other => other,
        }
    }
}

/// Classifies `a` relative to `b` by the sign of `dt^2 - |dx|^2` and of
/// `dt = b.t - a.t`. The light cone itself counts as causal.
pub fn causal_relation(a: &SpacetimeEvent, b: &SpacetimeEvent) -> CausalRelation {
    let dt = b.t - a.t;
    let dr = a.spatial_distance(b);
    if dt.abs() <= CAUSAL_TOL && dr <= CAUSAL_TOL {
        return CausalRelation::Coincident;
    }
    let interval = dt * dt - dr * dr;
    if interval.abs() <= CAUSAL_TOL {
        if dt > 0.0 {
            CausalRelation::LightlikePast
        } else {
            CausalRelation::LightlikeFuture
        }
    } else if interval > 0.0 {
        if dt > 0.0 {
            CausalRelation::TimelikePast
        } else {
            CausalRelation::TimelikeFuture
        }
    } else {
        CausalRelation::Spacelike
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Site {
    L,
    L0,
    L1,
}

impl Site {
    /// Output site `L_i`.
    pub fn output(i: usize) -> Site {
        if i == 0 {
            Site::L0
        } else {
            Site::L1
        }
    }

    pub fn position(self, h: f64) -> [f64; 3] {
        match self {
            Site::L => [0.0, 0.0, 0.0],
            Site::L0 => [-h, 0.0, 0.0],
            Site::L1 => [h, 0.0, 0.0],
        }
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Site::L => "L",
            Site::L0 => "L0",
            Site::L1 => "L1",
        })
    }
}

/// Time slab `[t_min, t_max]` at a laboratory site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub site: Site,
    pub position: [f64; 3],
    pub t_min: f64,
    pub t_max: f64,
}

impl Region {
    pub fn corners(&self) -> [SpacetimeEvent; 2] {
        let [x, y, z] = self.position;
        [
            SpacetimeEvent::new(self.t_min, x, y, z),
            SpacetimeEvent::new(self.t_max, x, y, z),
        ]
    }
}

pub fn in_region(e: &SpacetimeEvent, r: &Region) -> bool {
    let at_site = e
        .position()
        .iter()
        .zip(&r.position)
        .all(|(a, b)| (a - b).abs() <= CAUSAL_TOL);
    at_site && e.t >= r.t_min - CAUSAL_TOL && e.t <= r.t_max + CAUSAL_TOL
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("h must be positive and finite, got {0}")]
    InvalidH(f64),
    #[error("delta_h must be positive and finite, got {0}")]
    InvalidDeltaH(f64),
    #[error("output regions are not spacelike separated: delta_h = {delta_h} >= 2h = {}", 2.0 * .h)]
    NotSpacelike { h: f64, delta_h: f64 },
}

/// The symmetric layout: `P` at the origin, `Q_i = (h, -(-1)^i h, 0, 0)`,
/// regions `R_i = [h, h + delta_h]` at `L_i`, and `P'`, the latest event in
/// the causal past of a point of `R_0` and a point of `R_1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    pub h: f64,
    pub delta_h: f64,
    pub p: SpacetimeEvent,
    pub q: [SpacetimeEvent; 2],
    pub p_prime: SpacetimeEvent,
    pub regions: [Region; 2],
}

impl Geometry {
    pub fn event_at(&self, site: Site, t: f64) -> SpacetimeEvent {
        let [x, y, z] = site.position(self.h);
        SpacetimeEvent::new(t, x, y, z)
    }

    pub fn region(&self, i: usize) -> &Region {
        &self.regions[i]
    }
}

pub fn standard_geometry(h: f64, delta_h: f64) -> Result<Geometry, GeometryError> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(GeometryError::InvalidH(h));
    }
    if !(delta_h > 0.0) || !delta_h.is_finite() {
        return Err(GeometryError::InvalidDeltaH(delta_h));
    }
    if delta_h >= 2.0 * h {
        return Err(GeometryError::NotSpacelike { h, delta_h });
    }
    let region = |site: Site| Region {
        site,
        position: site.position(h),
        t_min: h,
        t_max: h + delta_h,
    };
    let regions = [region(Site::L0), region(Site::L1)];
    let q = [
        SpacetimeEvent::new(h, -h, 0.0, 0.0),
        SpacetimeEvent::new(h, h, 0.0, 0.0),
    ];
    Ok(Geometry {
        h,
        delta_h,
        p: SpacetimeEvent::new(0.0, 0.0, 0.0, 0.0),
        q,
        p_prime: latest_common_past(&regions[0], &regions[1]),
        regions,
    })
}

/// Event of greatest time coordinate lying in the past light cones of some
/// point of `a` and some point of `b`.
///
/// The past cone of a slab point grows with its time, so only the top
/// corners matter. The objective `min(T_a - |x - p_a|, T_b - |x - p_b|)` is
/// concave and maximized on the segment between the two sites, where it is
/// found by ternary search.
pub fn latest_common_past(a: &Region, b: &Region) -> SpacetimeEvent {
    let (pa, pb) = (a.position, b.position);
    let point = |u: f64| -> [f64; 3] { [0, 1, 2].map(|k| pa[k] + u * (pb[k] - pa[k])) };
    let dist = |p: [f64; 3], q: [f64; 3]| -> f64 {
        p.iter().zip(&q).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
    };
    let objective = |u: f64| {
        let x = point(u);
        (a.t_max - dist(x, pa)).min(b.t_max - dist(x, pb))
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if objective(m1) < objective(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    let u = 0.5 * (lo + hi);
    let [x, y, z] = point(u);
    SpacetimeEvent::new(objective(u), x, y, z)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Agent {
    Alice,
    Alice0,
    Alice1,
    Bob,
    Bob0,
    Bob1,
}

impl Agent {
    pub fn alice_outpost(i: usize) -> Agent {
        if i == 0 {
            Agent::Alice0
        } else {
            Agent::Alice1
        }
    }

    pub fn bob_outpost(i: usize) -> Agent {
        if i == 0 {
            Agent::Bob0
        } else {
            Agent::Bob1
        }
    }

    pub fn site(self) -> Site {
        match self {
            Agent::Alice | Agent::Bob => Site::L,
            Agent::Alice0 | Agent::Bob0 => Site::L0,
            Agent::Alice1 | Agent::Bob1 => Site::L1,
        }
    }

    pub fn is_alice(self) -> bool {
        matches!(self, Agent::Alice | Agent::Alice0 | Agent::Alice1)
    }
}

impl fmt::Display for Agent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Agent::Alice => "A",
            Agent::Alice0 => "A0",
            Agent::Alice1 => "A1",
            Agent::Bob => "B",
            Agent::Bob0 => "B0",
            Agent::Bob1 => "B1",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Payload {
    /// Named classical record.
    Classical { name: String, bits: BitString },
    /// Hand-over of quantum registers.
    Quantum { registers: Vec<String> },
}

impl Payload {
    pub fn classical(name: &str, bits: BitString) -> Self {
        Payload::Classical {
            name: name.to_string(),
            bits,
        }
    }

    pub fn bit(name: &str, bit: bool) -> Self {
        Payload::classical(name, BitString::from_bits(vec![bit]))
    }

    pub fn is_quantum(&self) -> bool {
        matches!(self, Payload::Quantum { .. })
    }
}

impl fmt::Display for Payload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Payload::Classical { name, bits } => write!(f, "{name}:{bits}"),
            Payload::Quantum { registers } => write!(f, "quantum:{}", registers.join("+")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub step: String,
    pub sender: Agent,
    pub receiver: Agent,
    pub payload: Payload,
    pub emitted: SpacetimeEvent,
    pub received: SpacetimeEvent,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("causality violation in {step} ({sender} -> {receiver}): emitted {emitted}, received {received}, relation {relation:?}")]
pub struct CausalityViolation {
    pub step: String,
    pub sender: Agent,
    pub receiver: Agent,
    pub emitted: SpacetimeEvent,
    pub received: SpacetimeEvent,
    pub relation: Option<CausalRelation>,
}

/// Accepts `msg` iff its reception is in the closed causal future of its
/// emission.
pub fn validate_message(msg: &Message) -> Result<(), CausalityViolation> {
    let violation = |relation| CausalityViolation {
        step: msg.step.clone(),
        sender: msg.sender,
        receiver: msg.receiver,
        emitted: msg.emitted,
        received: msg.received,
        relation,
    };
    if !msg.emitted.is_finite() || !msg.received.is_finite() {
        return Err(violation(None));
    }
    let relation = causal_relation(&msg.emitted, &msg.received);
    if relation.is_causal_past() {
        Ok(())
    } else {
        Err(violation(Some(relation)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(t: f64, x: f64) -> SpacetimeEvent {
        SpacetimeEvent::new(t, x, 0.0, 0.0)
    }

    fn msg(emitted: SpacetimeEvent, received: SpacetimeEvent) -> Message {
        Message {
            step: "test".into(),
            sender: Agent::Alice,
            receiver: Agent::Alice0,
            payload: Payload::bit("b", true),
            emitted,
            received,
        }
    }

    #[test]
    fn relation_examples() {
        assert_eq!(
            causal_relation(&ev(0.0, 0.0), &ev(1.0, 1.0)),
            CausalRelation::LightlikePast
        );
        assert_eq!(
            causal_relation(&ev(0.0, 0.0), &ev(1.0, 0.0)),
            CausalRelation::TimelikePast
        );
        assert_eq!(
            causal_relation(&ev(0.0, -1.0), &ev(0.0, 1.0)),
            CausalRelation::Spacelike
        );
        assert_eq!(
            causal_relation(&ev(0.3, 0.2), &ev(0.3, 0.2)),
            CausalRelation::Coincident
        );
    }

    #[test]
    fn geometry_examples() {
        let g = standard_geometry(1.0, 0.1).unwrap();
        assert_eq!(g.q[0], ev(1.0, -1.0));
        assert_eq!(g.q[1], ev(1.0, 1.0));
        assert!(matches!(
            standard_geometry(1.0, 2.5),
            Err(GeometryError::NotSpacelike { .. })
        ));
        assert!(standard_geometry(1.0, 2.0).is_err());
        assert!(standard_geometry(0.0, 0.1).is_err());
        assert!(standard_geometry(1.0, 0.0).is_err());
    }

    #[test]
    fn message_examples() {
        assert!(validate_message(&msg(ev(0.0, 0.0), ev(1.0, -1.0))).is_ok());
        let err = validate_message(&msg(ev(0.0, 0.0), ev(0.5, -1.0))).unwrap_err();
        assert_eq!(err.emitted, ev(0.0, 0.0));
        assert_eq!(err.received, ev(0.5, -1.0));
        assert!(validate_message(&msg(ev(0.0, 0.0), ev(1.2, -1.0))).is_ok());
        assert!(validate_message(&msg(ev(1.0, 0.0), ev(0.0, 0.0))).is_err());
        assert!(validate_message(&msg(ev(f64::NAN, 0.0), ev(0.0, 0.0))).is_err());
    }

    #[test]
    fn region_examples() {
        let g = standard_geometry(1.0, 0.1).unwrap();
        assert!(in_region(&ev(1.05, -1.0), g.region(0)));
        assert!(!in_region(&ev(1.2, -1.0), g.region(0)));
        assert!(!in_region(&ev(1.05, 1.0), g.region(0)));
        assert!(in_region(&ev(1.05, 1.0), g.region(1)));
    }

    #[test]
    fn p_prime_matches_closed_form() {
        for (h, dh) in [(1.0, 0.1), (2.0, 0.5), (1.0, 1.9), (0.3, 0.01)] {
            let g = standard_geometry(h, dh).unwrap();
            // apex of the two past cones of the top corners (h + dh, -h), (h + dh, h)
            assert!((g.p_prime.t - dh).abs() < 1e-9, "{h} {dh}: {}", g.p_prime);
            assert!(g.p_prime.x.abs() < 1e-6);
        }
    }
}
