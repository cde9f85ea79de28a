//! Small reference systems.

use super::{Bus, Generator, Line, Load, MarketSystem, Segment};

fn seg(price: f64, min: f64, max: f64) -> Segment {
    Segment { price, min, max }
}

/// Three buses in a triangle, two generating companies at buses 1 and 2 and
/// one load-serving entity at bus 3. The 1–2 line is the binding one.
pub fn three_bus() -> MarketSystem {
    MarketSystem {
        name: "threebus".into(),
        horizon: 1,
        reference_bus: 1,
        buses: (1..=3).map(|id| Bus { id }).collect(),
        lines: vec![
            Line {
                from: 1,
                to: 2,
                reactance: 0.1,
                capacity: 30.0,
            },
            Line {
                from: 2,
                to: 3,
                reactance: 0.1,
                capacity: 150.0,
            },
            Line {
                from: 1,
                to: 3,
                reactance: 0.1,
                capacity: 100.0,
            },
        ],
        generators: vec![
            Generator {
                id: "U1".into(),
                owner: "GENCO1".into(),
                bus: 1,
                segments: vec![seg(10.0, 10.0, 90.0), seg(15.0, 0.0, 90.0), seg(18.0, 0.0, 90.0)],
                ramp_up: None,
                ramp_down: None,
            },
            Generator {
                id: "U2".into(),
                owner: "GENCO2".into(),
                bus: 2,
                segments: vec![seg(12.0, 10.0, 80.0), seg(18.0, 0.0, 80.0), seg(20.0, 0.0, 80.0)],
                ramp_up: None,
                ramp_down: None,
            },
        ],
        loads: vec![Load {
            id: "L1".into(),
            owner: "LSE1".into(),
            bus: 3,
            segments: vec![seg(19.0, 100.0, 150.0), seg(16.0, 0.0, 50.0), seg(14.0, 0.0, 50.0)],
        }],
    }
}

/// One bus, a 100 MW generator offering at 10 and a fixed 50 MW load bidding 20.
pub fn single_bus() -> MarketSystem {
    MarketSystem {
        name: "singlebus".into(),
        horizon: 1,
        reference_bus: 1,
        buses: vec![Bus { id: 1 }],
        lines: Vec::new(),
        generators: vec![Generator {
            id: "G".into(),
            owner: "GENCO".into(),
            bus: 1,
            segments: vec![seg(10.0, 0.0, 100.0)],
            ramp_up: None,
            ramp_down: None,
        }],
        loads: vec![Load {
            id: "D".into(),
            owner: "LSE".into(),
            bus: 1,
            segments: vec![seg(20.0, 50.0, 50.0)],
        }],
    }
}
