mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;

use otn_design::design::Design;
use otn_design::evaluate::{failure_drill, reuse_factor, verify_design, wavelength_usage};
use otn_design::generate::{generate_instance, GeneratorSpec};
use otn_design::instance::{instance_to_string, parse_instance};
use otn_design::{Approach, Error, Hop, Lightpath, LightpathKey, NodeId, Role, Survivability};

fn ring_route(n: u32, from: u32, len: u32, clockwise: bool) -> Vec<Hop> {
    let step = |x: u32| if clockwise { x % n + 1 } else { (x + n - 2) % n + 1 };
    let mut at = from;
    (0..len)
        .map(|_| {
            let next = step(at);
            let h = Hop::new(NodeId(at), NodeId(next));
            at = next;
            h
        })
        .collect()
}

fn arb_lightpath(n: u32) -> impl Strategy<Value = (u32, u32, bool, u8)> {
    (1..=n, 1..n, any::<bool>(), 0u8..3)
}

/// Lightpaths routed around a ring with random roles.
fn arb_ring_design() -> impl Strategy<Value = Design> {
    (4u32..8).prop_flat_map(|n| {
        prop::collection::vec(arb_lightpath(n), 0..24).prop_map(move |lps| {
            let mut d = Design::empty(Survivability::MultiInterlayerBrs, Approach::Sequential, 0);
            for (q, (from, len, cw, role)) in lps.into_iter().enumerate() {
                let route = ring_route(n, from, len, cw);
                let to = route.last().unwrap().to;
                let role = [Role::WorkCarrier, Role::SpareCarrier, Role::OpticalProtection][role as usize];
                d.logical.lightpaths.push(Lightpath {
                    key: LightpathKey { from: NodeId(from), to, q: q as u8 + 1 },
                    role,
                    route,
                });
            }
            d
        })
    })
}

proptest! {
    #[test]
    fn reuse_factor_is_a_fraction(extra in 0u32..200, spare in 0u32..200) {
        let r = reuse_factor(extra, spare);
        prop_assert!((0.0..=1.0).contains(&r));
        if extra == 0 {
            prop_assert_eq!(r, 1.0);
        }
    }

    #[test]
    fn shared_pool_never_costs_more(d in arb_ring_design()) {
        let shared = wavelength_usage(&d, Survivability::MultiInterlayerBrs);
        let dedicated = wavelength_usage(&d, Survivability::MultiSpareUnprotected);
        prop_assert!(shared.total <= dedicated.total);
        let (mut w1, mut w2, mut s) = (0, 0, 0);
        for u in &shared.links {
            prop_assert_eq!(u.x, u.s.saturating_sub(u.w2));
            w1 += u.w1;
            w2 += u.w2;
            s += u.s;
        }
        prop_assert!(shared.total >= w1 + w2);
        prop_assert!(shared.extra <= s);
        prop_assert_eq!(dedicated.total, w1 + w2 + s);
        let r = shared.reuse_factor.unwrap();
        prop_assert!((0.0..=1.0).contains(&r));
    }

    #[test]
    fn generator_is_deterministic(
        kind in prop::sample::select(vec!["ring", "ring_plus_chords", "mesh"]),
        n in 4u32..12,
        seed in any::<u64>(),
        k in 1usize..8,
    ) {
        let k = k.min((n * (n - 1) / 2) as usize);
        let spec: GeneratorSpec = format!("{kind}:{n}:2,4,6:{seed}:{k}").parse().unwrap();
        let a = generate_instance(&spec).unwrap();
        let b = generate_instance(&spec).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.topology.is_biconnected());
        prop_assert_eq!(a.traffic.len(), k);
        prop_assert_eq!(spec.to_string().parse::<GeneratorSpec>().unwrap(), spec);
        prop_assert_eq!(parse_instance(&instance_to_string(&a)).unwrap(), a);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, ..ProptestConfig::default() })]

    /// Every design the pipeline returns passes the verifier, the drill
    /// partitions each failure's affected LSPs, and runs are repeatable.
    #[test]
    fn pipeline_outputs_verify(
        kind in prop::sample::select(vec!["ring", "ring_plus_chords", "mesh"]),
        n in 4u32..6,
        seed in 0u64..1000,
        k in 1usize..4,
        option in prop::sample::select([&[Survivability::None][..], &Survivability::PROTECTED].concat()),
        approach in prop::sample::select(vec![Approach::Sequential, Approach::Integrated]),
    ) {
        let inst = common::instance(&format!("{kind}:{n}:2,4,6:{seed}:{k}"));
        let cfg = common::config(&inst, option, approach, 0.0);
        let first = common::solve(&inst, &cfg);
        match &first {
            Ok(r) => {
                let v = verify_design(&r.design, &inst, &r.config);
                prop_assert!(v.is_empty(), "{:?}", v);
                for rep in failure_drill(&r.design, &inst) {
                    let affected: BTreeSet<_> = rep.affected.iter().collect();
                    let outcome: BTreeSet<_> = rep.restored.iter().chain(&rep.unrestored).collect();
                    prop_assert_eq!(rep.restored.len() + rep.unrestored.len(), rep.affected.len());
                    prop_assert_eq!(affected, outcome);
                    prop_assert!(rep.lost.iter().all(|l| !rep.affected.contains(l)));
                    prop_assert_eq!(rep.restorable, rep.unrestored.is_empty() && rep.contention.is_empty());
                }
                let again = common::solve(&inst, &cfg).unwrap();
                prop_assert_eq!(&again.design.logical, &r.design.logical);
                prop_assert_eq!(&again.design.lsps, &r.design.lsps);
            }
            Err(Error::StageFailed { .. }) => {
                let again = matches!(common::solve(&inst, &cfg), Err(Error::StageFailed { .. }));
                prop_assert!(again);
            }
            Err(e) => prop_assert!(false, "{}", e),
        }
    }
}
