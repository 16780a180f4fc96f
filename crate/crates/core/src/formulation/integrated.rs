use std::collections::{BTreeMap, BTreeSet};

use super::mpls::{add_spare_mpls, add_working_mpls};
use super::optical::{carrier_load, route, RouteVars};
use super::{tags, ProtectionPlan, StageKind, StageModel, VarKey};
use crate::design::Design;
use crate::milp::{Cmp, VarId};
use crate::model::{DerivedCosts, DesignConfig, Instance, LightpathKey, Link, LspId, NodeId, Survivability};

/// Working LSPs, logical topology and carrier routes in one model.
pub fn build_integrated_working(inst: &Instance, cfg: &DesignConfig, costs: &DerivedCosts) -> StageModel {
    let mut sm = StageModel::new(StageKind::IntegratedWorking);
    let beta = add_working_mpls(&mut sm, inst, cfg, costs);
    let none = BTreeSet::new();
    let mut routes = Vec::with_capacity(beta.len());
    for (k, &b) in &beta {
        let rv = route(&mut sm, inst, *k, false, &none, Some(b));
        for &v in rv.arcs.values() {
            sm.objective(v, costs.wavelength);
        }
        routes.push(rv);
    }
    for &l in &inst.topology.links {
        let terms: Vec<_> = routes.iter().flat_map(|rv| rv.link_terms(l)).collect();
        sm.row(tags::WAVELENGTH_CAPACITY, terms, Cmp::Le, inst.topology.wavelengths as f64);
    }
    sm
}

/// Protection LSPs, spare carriers with their routes, and protection
/// lightpaths in one model, on top of a fixed working design.
pub fn build_integrated_protection(
    inst: &Instance,
    plan: &ProtectionPlan,
    working: &Design,
    cfg: &DesignConfig,
    costs: &DerivedCosts,
) -> StageModel {
    let mut sm = StageModel::new(StageKind::IntegratedProtection);
    let option = cfg.survivability;
    let (pair_links, pair_nodes) = match option {
        Survivability::SingleLayer => (true, true),
        Survivability::MultiSpareUnprotected | Survivability::MultiInterlayerBrs => (false, true),
        _ => (false, false),
    };

    // Physical footprint of each protected LSP's working carriers.
    let mut footprint: BTreeMap<LspId, (BTreeSet<Link>, BTreeSet<NodeId>)> = BTreeMap::new();
    let mut extra_excl: BTreeMap<LspId, BTreeSet<NodeId>> = BTreeMap::new();
    for r in &working.lsps {
        if !plan.p_lsp.contains(&r.lsp) {
            continue;
        }
        let mut links = BTreeSet::new();
        let mut nodes = BTreeSet::new();
        for k in &r.working {
            if let Some(lp) = working.carrier(k) {
                links.extend(lp.route_links());
                nodes.extend(lp.route_nodes());
            }
        }
        if let (Some(a), Some(b)) = (r.working.first(), r.working.last()) {
            nodes.remove(&a.from);
            nodes.remove(&b.to);
        }
        if pair_nodes {
            extra_excl.insert(r.lsp, nodes.clone());
        }
        footprint.insert(r.lsp, (links, nodes));
    }

    let spare = add_spare_mpls(&mut sm, inst, plan, working, cfg, costs, &extra_excl);
    let none = BTreeSet::new();
    let mut spare_routes: BTreeMap<LightpathKey, RouteVars> = BTreeMap::new();
    for (k, &b) in &spare.beta {
        let rv = route(&mut sm, inst, *k, false, &none, Some(b));
        for &v in rv.arcs.values() {
            sm.objective(v, costs.wavelength);
        }
        spare_routes.insert(*k, rv);
    }

    // Spare carriers chosen for an LSP's protection path keep clear of the
    // working carriers' links and nodes.
    for (d, arcs) in &spare.delta {
        let Some((links, nodes)) = footprint.get(&d.id) else { continue };
        for (k, pd) in arcs {
            let rv = &spare_routes[k];
            if pair_links {
                for &l in links {
                    let mut t = rv.link_terms(l);
                    if !t.is_empty() {
                        t.push((*pd, 1.0));
                        sm.row(tags::PAIR_LINK, t, Cmp::Le, 1.0);
                    }
                }
            }
            if pair_nodes {
                for &n in nodes {
                    let mut t = rv.in_terms(n);
                    if !t.is_empty() {
                        t.push((*pd, 1.0));
                        sm.row(tags::PAIR_NODE, t, Cmp::Le, 1.0);
                    }
                }
            }
        }
    }

    let brs = option == Survivability::MultiInterlayerBrs;
    let mut prot_routes: BTreeMap<LightpathKey, RouteVars> = BTreeMap::new();
    for key in &plan.p_lp {
        let Some(carrier) = working.carrier(key) else { continue };
        let excluded: BTreeSet<NodeId> = carrier.transit_nodes().into_iter().collect();
        let rv = route(&mut sm, inst, *key, true, &excluded, None);
        for l in carrier.route_links() {
            let t = rv.link_terms(l);
            sm.row(tags::OPTICAL_DISJOINT, t, Cmp::Le, 0.0);
        }
        prot_routes.insert(*key, rv);
    }
    if option == Survivability::MultiDouble {
        for (k, &b) in &spare.beta {
            let rv = route(&mut sm, inst, *k, true, &none, Some(b));
            let carrier = &spare_routes[k];
            for &l in &inst.topology.links {
                let mut t = carrier.link_terms(l);
                t.extend(rv.link_terms(l));
                if t.len() > 1 {
                    sm.row(tags::OPTICAL_DISJOINT, t, Cmp::Le, 1.0);
                }
            }
            for &n in &inst.topology.nodes {
                if n == k.from || n == k.to {
                    continue;
                }
                let mut t = carrier.in_terms(n);
                t.extend(rv.in_terms(n));
                if t.len() > 1 {
                    sm.row(tags::OPTICAL_DISJOINT, t, Cmp::Le, 1.0);
                }
            }
            prot_routes.insert(*k, rv);
        }
    }
    if !brs {
        for rv in prot_routes.values() {
            for &v in rv.arcs.values() {
                sm.objective(v, costs.wavelength);
            }
        }
    } else {
        pool_separation(&mut sm, inst, working, &spare.delta, &spare_routes, &prot_routes);
    }

    let load = carrier_load(working);
    let w = inst.topology.wavelengths as f64;
    for &l in &inst.topology.links {
        let (w1, w2) = load.get(&l).copied().unwrap_or_default();
        let fixed = (w1 + w2) as f64;
        let spare_terms: Vec<_> = spare_routes.values().flat_map(|rv| rv.link_terms(l)).collect();
        let prot_terms: Vec<_> = prot_routes.values().flat_map(|rv| rv.link_terms(l)).collect();
        if brs && !prot_terms.is_empty() {
            let x = sm.integer(VarKey::Extra(l), w);
            sm.objective(x, costs.wavelength);
            let mut t = prot_terms;
            t.extend(spare_terms.iter().map(|&(v, _)| (v, -1.0)));
            t.push((x, -1.0));
            sm.row(tags::EXTRA_WAVELENGTHS, t, Cmp::Le, w2 as f64);
            let mut cap = spare_terms;
            cap.push((x, 1.0));
            sm.row(tags::WAVELENGTH_CAPACITY, cap, Cmp::Le, w - fixed);
        } else {
            let mut t = spare_terms;
            if !brs {
                t.extend(prot_terms);
            }
            sm.row(tags::WAVELENGTH_CAPACITY, t, Cmp::Le, w - fixed);
        }
    }
    sm
}

/// Keeps protection lightpaths of carriers through OXC n off every link
/// used by a spare carrier that carries protection for an LSP transiting
/// router n. `ya` marks such links per node.
fn pool_separation(
    sm: &mut StageModel,
    inst: &Instance,
    working: &Design,
    delta: &[(crate::model::LspDemand, Vec<(LightpathKey, VarId)>)],
    spare_routes: &BTreeMap<LightpathKey, RouteVars>,
    prot_routes: &BTreeMap<LightpathKey, RouteVars>,
) {
    for &n in &inst.topology.nodes {
        let through_oxc: Vec<&RouteVars> = prot_routes
            .iter()
            .filter(|(k, _)| working.carrier(k).is_some_and(|lp| lp.transit_nodes().contains(&n)))
            .map(|(_, rv)| rv)
            .collect();
        if through_oxc.is_empty() {
            continue;
        }
        let riders: Vec<&Vec<(LightpathKey, VarId)>> = delta
            .iter()
            .filter(|(d, _)| working.routing(d.id).is_some_and(|r| r.working_transit().contains(&n)))
            .map(|(_, arcs)| arcs)
            .collect();
        if riders.is_empty() {
            continue;
        }
        for &l in &inst.topology.links {
            let prot: Vec<Vec<(VarId, f64)>> =
                through_oxc.iter().map(|rv| rv.link_terms(l)).filter(|t| !t.is_empty()).collect();
            if prot.is_empty() {
                continue;
            }
            let y = sm.binary(VarKey::PoolUse(n, l));
            for arcs in &riders {
                for (k, pd) in arcs.iter() {
                    let mut t = spare_routes[k].link_terms(l);
                    if t.is_empty() {
                        continue;
                    }
                    t.push((*pd, 1.0));
                    t.push((y, -1.0));
                    sm.row(tags::POOL_USE, t, Cmp::Le, 1.0);
                }
            }
            for mut t in prot {
                t.push((y, 1.0));
                sm.row(tags::SPARE_POOL_SEPARATION, t, Cmp::Le, 1.0);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::{solve, HighsBackend, SolveLimits, SolveStatus};
    use crate::model::{Approach, CostModel, PhysicalTopology, TrafficMatrix};

    #[test]
    fn d1_integrated_working_costs_23() {
        let inst = Instance::new(PhysicalTopology::ring(4, 32), TrafficMatrix::from_triples([(1, 3, 10.0)]));
        let cfg = DesignConfig::new(&inst, Survivability::None, Approach::Integrated);
        let sm = build_integrated_working(&inst, &cfg, &CostModel::default().derive());
        super::super::lint(&sm).unwrap();
        let s = solve(&HighsBackend::default(), &sm.model, &SolveLimits::default());
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!((s.objective - 23.0).abs() < 1e-9);
        let counts = sm.family_counts();
        assert_eq!(counts["wl"], 24 * 8);
    }

    #[test]
    fn empty_plan_gives_empty_objective() {
        let inst = Instance::new(PhysicalTopology::ring(4, 32), TrafficMatrix::from_triples([]));
        let cfg = DesignConfig::new(&inst, Survivability::MultiDouble, Approach::Integrated);
        let design = Design::empty(cfg.survivability, cfg.approach, cfg.interfaces);
        let sm = build_integrated_protection(&inst, &ProtectionPlan::default(), &design, &cfg, &CostModel::default().derive());
        let s = solve(&HighsBackend::default(), &sm.model, &SolveLimits::default());
        assert_eq!((s.status, s.objective), (SolveStatus::Optimal, 0.0));
    }
}
