use std::collections::{BTreeMap, BTreeSet};

use super::{tags, DisjointPair, ProtectionPlan, StageKind, StageModel, VarKey};
use crate::design::Design;
use crate::milp::{Cmp, VarId};
use crate::model::{
    DerivedCosts, DesignConfig, Hop, Instance, Lightpath, LightpathKey, Link, NodeId, Role,
    Survivability,
};

/// Arc variables of one lightpath route.
#[derive(Debug, Clone, Default)]
pub(super) struct RouteVars {
    pub arcs: BTreeMap<Hop, VarId>,
}

impl RouteVars {
    pub fn link_terms(&self, link: Link) -> Vec<(VarId, f64)> {
        [Hop::new(link.a, link.b), Hop::new(link.b, link.a)]
            .iter()
            .filter_map(|h| self.arcs.get(h).map(|&v| (v, 1.0)))
            .collect()
    }

    pub fn in_terms(&self, n: NodeId) -> Vec<(VarId, f64)> {
        self.arcs.iter().filter(|(h, _)| h.to == n).map(|(_, &v)| (v, 1.0)).collect()
    }

    pub fn links(&self) -> BTreeSet<Link> {
        self.arcs.keys().map(Hop::link).collect()
    }
}

/// Declares arc variables for `key` avoiding `excluded` nodes and adds flow
/// conservation plus simple-route rows. With `rhs` set, the route exists
/// only when that variable is one.
pub(super) fn route(
    sm: &mut StageModel,
    inst: &Instance,
    key: LightpathKey,
    protection: bool,
    excluded: &BTreeSet<NodeId>,
    rhs: Option<VarId>,
) -> RouteVars {
    let mut rv = RouteVars::default();
    for h in inst.topology.hops() {
        if excluded.contains(&h.from) || excluded.contains(&h.to) {
            continue;
        }
        let k = if protection { VarKey::ProtLambda(key, h) } else { VarKey::WorkLambda(key, h) };
        rv.arcs.insert(h, sm.binary(k));
    }
    let tag = if protection { tags::PROTECTION_FLOW } else { tags::LIGHTPATH_FLOW };
    for &n in &inst.topology.nodes {
        if excluded.contains(&n) {
            continue;
        }
        let mut terms: Vec<(VarId, f64)> = rv
            .arcs
            .iter()
            .filter_map(|(h, &v)| {
                if h.from == n {
                    Some((v, 1.0))
                } else if h.to == n {
                    Some((v, -1.0))
                } else {
                    None
                }
            })
            .collect();
        let unit = if n == key.from {
            1.0
        } else if n == key.to {
            -1.0
        } else {
            0.0
        };
        match rhs {
            Some(b) if unit != 0.0 => {
                terms.push((b, -unit));
                sm.row(tag, terms, Cmp::Eq, 0.0);
            }
            _ => sm.row(tag, terms, Cmp::Eq, unit),
        }
        let cap = rhs.map(|b| vec![(b, -1.0)]).unwrap_or_default();
        let mut indeg = rv.in_terms(n);
        if indeg.len() > 1 {
            indeg.extend(cap.iter().copied());
            sm.row(tags::SIMPLE_ROUTE, indeg, Cmp::Le, if rhs.is_some() { 0.0 } else { 1.0 });
        }
    }
    for l in rv.links() {
        let t = rv.link_terms(l);
        if t.len() > 1 {
            sm.row(tags::SIMPLE_ROUTE, t, Cmp::Le, 1.0);
        }
    }
    rv
}

/// Node usage of a route: 1 for its own endpoints, otherwise the number of
/// arcs entering the node.
pub(super) fn node_usage(key: &LightpathKey, rv: &RouteVars, n: NodeId) -> (Vec<(VarId, f64)>, f64) {
    if key.from == n || key.to == n {
        (Vec::new(), 1.0)
    } else {
        (rv.in_terms(n), 0.0)
    }
}

pub(super) fn pair_rows(
    sm: &mut StageModel,
    inst: &Instance,
    pair: &DisjointPair,
    a: &RouteVars,
    b: &RouteVars,
) {
    if pair.links {
        for &l in &inst.topology.links {
            let mut t = a.link_terms(l);
            t.extend(b.link_terms(l));
            if t.len() > 1 {
                sm.row(tags::PAIR_LINK, t, Cmp::Le, 1.0);
            }
        }
    }
    if pair.nodes {
        for &n in &inst.topology.nodes {
            if pair.shared.contains(&n) {
                continue;
            }
            let (mut t, ca) = node_usage(&pair.working, a, n);
            let (tb, cb) = node_usage(&pair.spare, b, n);
            t.extend(tb);
            let rhs = 1.0 - ca - cb;
            if rhs < 1.0 || t.len() > 1 {
                sm.row(tags::PAIR_NODE, t, Cmp::Le, rhs);
            }
        }
    }
}

/// Routes every carrier lightpath over the physical topology. Pairs from
/// the plan are kept link and/or node disjoint.
pub fn build_lightpath_routing_seq(
    inst: &Instance,
    carriers: &[Lightpath],
    plan: &ProtectionPlan,
    _cfg: &DesignConfig,
    costs: &DerivedCosts,
) -> StageModel {
    let mut sm = StageModel::new(StageKind::WorkingLightpath);
    let none = BTreeSet::new();
    let mut routes = BTreeMap::new();
    for lp in carriers {
        let rv = route(&mut sm, inst, lp.key, false, &none, None);
        for &v in rv.arcs.values() {
            sm.objective(v, costs.wavelength);
        }
        routes.insert(lp.key, rv);
    }
    for &l in &inst.topology.links {
        let terms: Vec<_> = routes.values().flat_map(|rv| rv.link_terms(l)).collect();
        sm.row(tags::WAVELENGTH_CAPACITY, terms, Cmp::Le, inst.topology.wavelengths as f64);
    }
    for pair in &plan.pairs {
        if let (Some(a), Some(b)) = (routes.get(&pair.working), routes.get(&pair.spare)) {
            pair_rows(&mut sm, inst, pair, a, b);
        }
    }
    sm
}

/// Fixed wavelength use per link: (working carriers, spare carriers).
pub(super) fn carrier_load(design: &Design) -> BTreeMap<Link, (u32, u32)> {
    let mut out: BTreeMap<Link, (u32, u32)> = BTreeMap::new();
    for lp in design.logical.carriers() {
        for l in lp.route_links() {
            let e = out.entry(l).or_default();
            match lp.role {
                Role::WorkCarrier => e.0 += 1,
                _ => e.1 += 1,
            }
        }
    }
    out
}

/// Protection lightpaths for the carriers in `p_lp`, disjoint from their
/// carrier's route. Under interlayer BRS they reuse spare-carrier
/// wavelengths and only the shortfall is paid for.
pub fn build_lightpath_protection(
    inst: &Instance,
    routed: &Design,
    plan: &ProtectionPlan,
    cfg: &DesignConfig,
    costs: &DerivedCosts,
) -> StageModel {
    let mut sm = StageModel::new(StageKind::ProtectionLightpath);
    let brs = cfg.survivability == Survivability::MultiInterlayerBrs;
    let mut per_link: BTreeMap<Link, Vec<(VarId, f64)>> = BTreeMap::new();
    for key in &plan.p_lp {
        let Some(carrier) = routed.carrier(key) else { continue };
        let excluded: BTreeSet<NodeId> = carrier.transit_nodes().into_iter().collect();
        let rv = route(&mut sm, inst, *key, true, &excluded, None);
        if !brs {
            for &v in rv.arcs.values() {
                sm.objective(v, costs.wavelength);
            }
        }
        for l in carrier.route_links() {
            let t = rv.link_terms(l);
            sm.row(tags::OPTICAL_DISJOINT, t, Cmp::Le, 0.0);
        }
        if let Some(links) = plan.pool_exclusions.get(key) {
            for &l in links {
                let t = rv.link_terms(l);
                sm.row(tags::SPARE_POOL_SEPARATION, t, Cmp::Le, 0.0);
            }
        }
        for l in rv.links() {
            per_link.entry(l).or_default().extend(rv.link_terms(l));
        }
    }
    let load = carrier_load(routed);
    let w = inst.topology.wavelengths as f64;
    for (l, terms) in per_link {
        let (w1, w2) = load.get(&l).copied().unwrap_or_default();
        let free = w - w1 as f64 - w2 as f64;
        if brs {
            let x = sm.integer(VarKey::Extra(l), w);
            sm.objective(x, costs.wavelength);
            let mut t = terms;
            t.push((x, -1.0));
            sm.row(tags::EXTRA_WAVELENGTHS, t, Cmp::Le, w2 as f64);
            sm.row(tags::WAVELENGTH_CAPACITY, vec![(x, 1.0)], Cmp::Le, free);
        } else {
            sm.row(tags::WAVELENGTH_CAPACITY, terms, Cmp::Le, free);
        }
    }
    sm
}
