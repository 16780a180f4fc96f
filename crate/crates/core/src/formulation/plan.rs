use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::design::Design;
use crate::model::{LightpathKey, Link, LspId, NodeId, Role, Survivability};

/// Physical disjointness required between a working carrier and a spare
/// carrier serving the same protected LSP.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisjointPair {
    pub working: LightpathKey,
    pub spare: LightpathKey,
    /// No common physical link.
    pub links: bool,
    /// No common node outside `shared`.
    pub nodes: bool,
    /// Nodes both routes may touch: the end routers of the LSPs involved.
    pub shared: BTreeSet<NodeId>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtectionPlan {
    pub p_lsp: BTreeSet<LspId>,
    pub p_lp: BTreeSet<LightpathKey>,
    /// Routers a protection LSP must avoid.
    pub node_exclusions: BTreeMap<LspId, BTreeSet<NodeId>>,
    pub pairs: Vec<DisjointPair>,
    /// Links a protection lightpath must avoid so that it never competes
    /// with spare carriers needed in the same node failure.
    pub pool_exclusions: BTreeMap<LightpathKey, BTreeSet<Link>>,
}

/// Builds the plan from whatever the design already holds.
///
/// After the working MPLS stage this yields `p_lsp` and the node
/// exclusions; once protection LSPs exist the carrier pairs and `p_lp`
/// follow; once carriers are routed the interlayer BRS pool exclusions
/// are added.
pub fn compute_protection_plan(design: &Design, option: Survivability) -> ProtectionPlan {
    let mut plan = ProtectionPlan::default();
    if option == Survivability::None {
        return plan;
    }
    for r in &design.lsps {
        let protect = match option {
            Survivability::SingleLayer => true,
            _ => r.working.len() > 1,
        };
        if protect {
            plan.p_lsp.insert(r.lsp);
            plan.node_exclusions.insert(r.lsp, r.working_transit().into_iter().collect());
        }
    }

    plan.p_lp = match option {
        Survivability::MultiDouble => design.carrier_keys(),
        Survivability::MultiSpareUnprotected | Survivability::MultiInterlayerBrs => {
            design.lightpaths_with(Role::WorkCarrier).map(|lp| lp.key).collect()
        }
        _ => BTreeSet::new(),
    };

    let (links, nodes) = match option {
        Survivability::SingleLayer => (true, true),
        Survivability::MultiSpareUnprotected | Survivability::MultiInterlayerBrs => (false, true),
        _ => (false, false),
    };
    if links || nodes {
        let mut merged: BTreeMap<(LightpathKey, LightpathKey), BTreeSet<NodeId>> = BTreeMap::new();
        for r in &design.lsps {
            let (Some(prot), true) = (&r.protection, plan.p_lsp.contains(&r.lsp)) else { continue };
            let ends = endpoints(&r.working);
            for w in &r.working {
                for s in prot {
                    merged
                        .entry((*w, *s))
                        .and_modify(|shared| shared.retain(|n| ends.contains(n)))
                        .or_insert_with(|| ends.clone());
                }
            }
        }
        plan.pairs = merged
            .into_iter()
            .map(|((working, spare), shared)| DisjointPair { working, spare, links, nodes, shared })
            .collect();
    }

    if option == Survivability::MultiInterlayerBrs {
        plan.pool_exclusions = pool_exclusions(design, &plan);
    }
    plan
}

fn endpoints(path: &[LightpathKey]) -> BTreeSet<NodeId> {
    match (path.first(), path.last()) {
        (Some(a), Some(b)) => BTreeSet::from([a.from, b.to]),
        _ => BTreeSet::new(),
    }
}

/// For each OXC n: links of spare carriers whose protection LSPs cover
/// LSPs transiting router n. Every protection lightpath of a carrier that
/// passes through OXC n must stay off those links.
fn pool_exclusions(design: &Design, plan: &ProtectionPlan) -> BTreeMap<LightpathKey, BTreeSet<Link>> {
    let mut pool: BTreeMap<NodeId, BTreeSet<Link>> = BTreeMap::new();
    for r in &design.lsps {
        let Some(prot) = &r.protection else { continue };
        let links: BTreeSet<Link> = prot
            .iter()
            .filter_map(|k| design.carrier(k))
            .flat_map(|lp| lp.route_links())
            .collect();
        for n in r.working_transit() {
            pool.entry(n).or_default().extend(links.iter().copied());
        }
    }
    let mut out = BTreeMap::new();
    for key in &plan.p_lp {
        let Some(lp) = design.carrier(key) else { continue };
        let mut excl = BTreeSet::new();
        for n in lp.transit_nodes() {
            if let Some(links) = pool.get(&n) {
                excl.extend(links.iter().copied());
            }
        }
        if !excl.is_empty() {
            out.insert(*key, excl);
        }
    }
    out
}
