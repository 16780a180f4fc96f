use std::collections::{BTreeMap, BTreeSet};

use super::compute_metrics;
use crate::design::Design;
use crate::model::{
    route_nodes, Bandwidth, CostModel, DesignConfig, Instance, Lightpath, LightpathKey, Link, LspId, NodeId,
    Role, Survivability, Violation,
};

/// Checks a design against the instance and the survivability rules of
/// its option. An empty list means the design is valid.
pub fn verify_design(design: &Design, inst: &Instance, cfg: &DesignConfig) -> Vec<Violation> {
    let mut v = Vec::new();
    let option = design.survivability;
    if option != cfg.survivability {
        v.push(Violation::new(
            "configuration",
            format!("design built for {option}, checked as {}", cfg.survivability),
        ));
    }

    // Lightpaths: distinct slots, valid endpoints, simple routes.
    let mut carriers: BTreeMap<LightpathKey, &Lightpath> = BTreeMap::new();
    let mut prot: BTreeMap<LightpathKey, &Lightpath> = BTreeMap::new();
    for lp in &design.logical.lightpaths {
        let k = lp.key;
        let bad_end = |n: NodeId| !inst.topology.nodes.contains(&n);
        if k.from == k.to || bad_end(k.from) || bad_end(k.to) || k.q == 0 || k.q > cfg.q_max {
            v.push(Violation::new("lightpath slot", format!("{k} is not a valid slot")));
        }
        let dup = if lp.role == Role::OpticalProtection {
            prot.insert(k, lp).is_some()
        } else {
            carriers.insert(k, lp).is_some()
        };
        if dup {
            v.push(Violation::new("lightpath slot", format!("{k} appears twice")));
        }
        check_route(&mut v, inst, lp);
    }

    // Interface limits.
    for (n, (out, inn)) in design.logical.interface_counts() {
        if out > cfg.interfaces {
            v.push(Violation::new("interface limit", format!("{out} lightpaths leave {n}, limit {}", cfg.interfaces)));
        }
        if inn > cfg.interfaces {
            v.push(Violation::new("interface limit", format!("{inn} lightpaths enter {n}, limit {}", cfg.interfaces)));
        }
    }

    // LSP paths and lightpath loads.
    let mut load: BTreeMap<LightpathKey, Bandwidth> = BTreeMap::new();
    let mut seen = BTreeSet::new();
    for r in &design.lsps {
        if !seen.insert(r.lsp) {
            v.push(Violation::new("lsp coverage", format!("LSP {} routed twice", r.lsp)));
        }
        let Some(d) = inst.traffic.get(r.lsp) else {
            v.push(Violation::new("lsp coverage", format!("LSP {} is not in the traffic matrix", r.lsp)));
            continue;
        };
        check_lsp_path(&mut v, &carriers, r.lsp, &r.working, d.src, d.dst, Role::WorkCarrier, "working");
        for k in &r.working {
            *load.entry(*k).or_default() += d.bandwidth;
        }
        if let Some(p) = &r.protection {
            check_lsp_path(&mut v, &carriers, r.lsp, p, d.src, d.dst, Role::SpareCarrier, "protection");
            for k in p {
                *load.entry(*k).or_default() += d.bandwidth;
            }
            let transit: BTreeSet<NodeId> = r.working_transit().into_iter().collect();
            let shared: Vec<NodeId> = p.iter().skip(1).map(|k| k.from).filter(|n| transit.contains(n)).collect();
            if !shared.is_empty() {
                v.push(Violation::new(
                    "logical node disjointness",
                    format!("LSP {} protection path passes working transit router(s) {shared:?}", r.lsp),
                ));
            }
            if p.iter().any(|k| r.working.contains(k)) {
                v.push(Violation::new("logical link disjointness", format!("LSP {} paths share a lightpath", r.lsp)));
            }
        }
        let wants = match option {
            Survivability::None => false,
            Survivability::SingleLayer => true,
            _ => r.working.len() > 1,
        };
        match (wants, r.protection.is_some()) {
            (true, false) => v.push(Violation::new("protection coverage", format!("LSP {} has no protection path", r.lsp))),
            (false, true) => v.push(Violation::new("protection coverage", format!("LSP {} has an unneeded protection path", r.lsp))),
            _ => {}
        }
    }
    for d in &inst.traffic.demands {
        if !seen.contains(&d.id) {
            v.push(Violation::new("lsp coverage", format!("LSP {} has no working path", d.id)));
        }
    }
    for (k, b) in &load {
        if *b > inst.capacity {
            let rule = match carriers.get(k).map(|lp| lp.role) {
                Some(Role::SpareCarrier) => "spare capacity",
                _ => "working capacity",
            };
            v.push(Violation::new(rule, format!("{k} carries {b} Gbps, capacity {}", inst.capacity)));
        }
    }

    // Optical protection membership and disjointness from the carrier.
    for (k, lp) in &carriers {
        let needs = match option {
            Survivability::MultiDouble => true,
            Survivability::MultiSpareUnprotected | Survivability::MultiInterlayerBrs => lp.role == Role::WorkCarrier,
            _ => false,
        };
        match (needs, prot.get(k)) {
            (true, None) => v.push(Violation::new("optical protection coverage", format!("{k} has no protection lightpath"))),
            (false, Some(_)) => v.push(Violation::new("optical protection coverage", format!("{k} must not have a protection lightpath"))),
            (true, Some(p)) => {
                let common: Vec<Link> = lp.route_links().intersection(&p.route_links()).copied().collect();
                if !common.is_empty() {
                    v.push(Violation::new("optical link disjointness", format!("{k} and its protection share {}", join(&common))));
                }
                let transit: BTreeSet<NodeId> = lp.transit_nodes().into_iter().collect();
                let hit: Vec<NodeId> = p.route_nodes().into_iter().filter(|n| transit.contains(n)).collect();
                if !hit.is_empty() {
                    v.push(Violation::new("optical node disjointness", format!("{k} protection passes its carrier's OXC(s) {hit:?}")));
                }
            }
            (false, None) => {}
        }
    }
    for k in prot.keys() {
        if !carriers.contains_key(k) {
            v.push(Violation::new("optical protection coverage", format!("protection lightpath {k} has no carrier")));
        }
    }

    physical_disjointness(&mut v, design, &carriers);
    wavelength_capacity(&mut v, design, inst);
    if option == Survivability::MultiInterlayerBrs {
        pool_separation(&mut v, design, &carriers, &prot);
    }

    if let Some(stored) = &design.metrics {
        let fresh = compute_metrics(design, inst, cfg.transit_double_count_correction);
        if *stored != fresh {
            v.push(Violation::new("metrics", "stored metrics differ from recomputed metrics"));
        }
        if let Some(cost) = &design.cost {
            let costs = design.prices.unwrap_or_else(|| CostModel { rate: inst.capacity, ..Default::default() }.derive());
            let c = super::cost_breakdown(fresh.transit_total, fresh.lightpaths(), fresh.wavelengths, &costs);
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-6 * b.abs().max(1.0);
            if !close(cost.total, c.total) || !close(cost.transit + cost.mpls_layer + cost.optical_layer, cost.total) {
                v.push(Violation::new("cost", format!("stored cost {} differs from recomputed {}", cost.total, c.total)));
            }
        }
    }
    v
}

fn join(links: &[Link]) -> String {
    links.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(", ")
}

fn check_route(v: &mut Vec<Violation>, inst: &Instance, lp: &Lightpath) {
    let k = lp.key;
    if lp.route.is_empty() {
        v.push(Violation::new("lightpath route", format!("{k} is not routed")));
        return;
    }
    let nodes = route_nodes(&lp.route);
    if nodes.first() != Some(&k.from) || nodes.last() != Some(&k.to) {
        v.push(Violation::new("lightpath route", format!("{k} route does not run from {} to {}", k.from, k.to)));
    }
    for w in lp.route.windows(2) {
        if w[0].to != w[1].from {
            v.push(Violation::new("lightpath route", format!("{k} route is not contiguous at {}", w[0].to)));
        }
    }
    for h in &lp.route {
        if !inst.topology.has_link(h.from, h.to) {
            v.push(Violation::new("lightpath route", format!("{k} uses missing link {h}")));
        }
    }
    let distinct: BTreeSet<NodeId> = nodes.iter().copied().collect();
    if distinct.len() != nodes.len() {
        v.push(Violation::new("lightpath route", format!("{k} route revisits a node")));
    }
}

#[allow(clippy::too_many_arguments)]
fn check_lsp_path(
    v: &mut Vec<Violation>,
    carriers: &BTreeMap<LightpathKey, &Lightpath>,
    lsp: LspId,
    path: &[LightpathKey],
    src: NodeId,
    dst: NodeId,
    role: Role,
    which: &str,
) {
    let rule = format!("{which} lsp path");
    if path.is_empty() {
        v.push(Violation::new(rule, format!("LSP {lsp} {which} path is empty")));
        return;
    }
    if path[0].from != src || path[path.len() - 1].to != dst {
        v.push(Violation::new(rule.clone(), format!("LSP {lsp} {which} path does not run from {src} to {dst}")));
    }
    let mut routers = vec![path[0].from];
    for w in path.windows(2) {
        if w[0].to != w[1].from {
            v.push(Violation::new(rule.clone(), format!("LSP {lsp} {which} path breaks between {} and {}", w[0], w[1])));
        }
    }
    routers.extend(path.iter().map(|k| k.to));
    if routers.iter().collect::<BTreeSet<_>>().len() != routers.len() {
        v.push(Violation::new(rule.clone(), format!("LSP {lsp} {which} path revisits a router")));
    }
    for k in path {
        match carriers.get(k) {
            None => v.push(Violation::new(rule.clone(), format!("LSP {lsp} uses missing lightpath {k}"))),
            Some(lp) if lp.role != role => v.push(Violation::new(
                "carrier role",
                format!("LSP {lsp} {which} path rides {k}, a {:?}", lp.role),
            )),
            _ => {}
        }
    }
}

/// Working and protection carriers of each protected LSP: link and node
/// disjoint under single-layer survivability, node disjoint under the
/// spare-unprotected and BRS options.
fn physical_disjointness(v: &mut Vec<Violation>, design: &Design, carriers: &BTreeMap<LightpathKey, &Lightpath>) {
    let (links, nodes) = match design.survivability {
        Survivability::SingleLayer => (true, true),
        Survivability::MultiSpareUnprotected | Survivability::MultiInterlayerBrs => (false, true),
        _ => return,
    };
    for r in &design.lsps {
        let Some(p) = &r.protection else { continue };
        // An empty working path is reported by the path check.
        let (Some(first), Some(last)) = (r.working.first(), r.working.last()) else { continue };
        let ends: BTreeSet<NodeId> = [first.from, last.to].into();
        let foot = |keys: &[LightpathKey]| {
            let mut l = BTreeSet::new();
            let mut n = BTreeSet::new();
            for k in keys {
                if let Some(lp) = carriers.get(k) {
                    l.extend(lp.route_links());
                    n.extend(lp.route_nodes());
                }
            }
            (l, n)
        };
        let (wl, wn) = foot(&r.working);
        let (pl, pn) = foot(p);
        if links {
            let common: Vec<Link> = wl.intersection(&pl).copied().collect();
            if !common.is_empty() {
                v.push(Violation::new(
                    "physical link disjointness",
                    format!("LSP {} working and protection carriers share {}", r.lsp, join(&common)),
                ));
            }
        }
        if nodes {
            let common: Vec<NodeId> = wn.intersection(&pn).filter(|n| !ends.contains(n)).copied().collect();
            if !common.is_empty() {
                v.push(Violation::new(
                    "physical node disjointness",
                    format!("LSP {} working and protection carriers share node(s) {common:?}", r.lsp),
                ));
            }
        }
    }
}

fn wavelength_capacity(v: &mut Vec<Violation>, design: &Design, inst: &Instance) {
    let usage = super::wavelength_usage(design, design.survivability);
    let w = inst.topology.wavelengths;
    for u in usage.links {
        let need = if design.survivability == Survivability::MultiInterlayerBrs {
            u.w1 + u.w2.max(u.s)
        } else {
            u.w1 + u.w2 + u.s
        };
        if need > w {
            v.push(Violation::new("wavelength capacity", format!("link {} needs {need} wavelengths, W = {w}", u.link)));
        }
    }
}

fn pool_separation(
    v: &mut Vec<Violation>,
    design: &Design,
    carriers: &BTreeMap<LightpathKey, &Lightpath>,
    prot: &BTreeMap<LightpathKey, &Lightpath>,
) {
    let mut pool: BTreeMap<NodeId, BTreeSet<Link>> = BTreeMap::new();
    for r in &design.lsps {
        let Some(p) = &r.protection else { continue };
        let links: BTreeSet<Link> = p.iter().filter_map(|k| carriers.get(k)).flat_map(|lp| lp.route_links()).collect();
        for w in r.working.iter().skip(1) {
            pool.entry(w.from).or_default().extend(links.iter().copied());
        }
    }
    for (k, p) in prot {
        let Some(c) = carriers.get(k) else { continue };
        for n in c.transit_nodes() {
            let Some(links) = pool.get(&n) else { continue };
            let hit: Vec<Link> = p.route_links().intersection(links).copied().collect();
            if !hit.is_empty() {
                v.push(Violation::new(
                    "spare pool separation",
                    format!("protection of {k} (through OXC {n}) uses {} needed by protection LSPs of router {n}", join(&hit)),
                ));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::HighsBackend;
    use crate::model::{Approach, CostModel, PhysicalTopology, TrafficMatrix};
    use crate::pipeline::run;

    #[test]
    fn empty_working_path_is_flagged() {
        let inst = Instance::new(PhysicalTopology::ring(4, 8), TrafficMatrix::from_triples([(1, 3, 10.0)]));
        let cfg = DesignConfig::new(&inst, Survivability::SingleLayer, Approach::Sequential).with_gap(0.0);
        let mut d = run(&inst, &cfg, &CostModel::default().derive(), &HighsBackend::default()).unwrap().design;
        assert!(verify_design(&d, &inst, &cfg).is_empty());
        d.lsps[0].working.clear();
        let v = verify_design(&d, &inst, &cfg);
        assert!(v.iter().any(|x| x.rule == "working lsp path"), "{v:?}");
    }
}
