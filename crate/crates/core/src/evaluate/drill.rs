use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::design::Design;
use crate::model::{FailureEvent, Instance, Lightpath, LightpathKey, Link, LspId, Role, Survivability};

/// Outcome of one single failure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrillReport {
    pub failure: FailureEvent,
    /// LSPs whose working path was hit.
    pub affected: Vec<LspId>,
    /// Affected LSPs carried on after recovery, optical or MPLS.
    pub restored: Vec<LspId>,
    /// LSPs whose source or destination router failed.
    pub lost: Vec<LspId>,
    pub unrestored: Vec<LspId>,
    /// Links where the shared BRS pool is oversubscribed.
    pub contention: Vec<Link>,
    pub restorable: bool,
}

/// Every physical link, every node, and both interfaces of every carrier.
pub fn enumerate_failures(design: &Design, inst: &Instance) -> Vec<FailureEvent> {
    let mut out: Vec<FailureEvent> =
        inst.topology.links.iter().map(|&link| FailureEvent::PhysicalLink { link }).collect();
    out.extend(inst.topology.nodes.iter().map(|&node| FailureEvent::TransitNode { node }));
    for lp in design.logical.carriers() {
        for node in [lp.key.from, lp.key.to] {
            out.push(FailureEvent::Interface { lightpath: lp.key, node });
        }
    }
    out
}

/// Runs every single failure from [`enumerate_failures`].
pub fn failure_drill(design: &Design, inst: &Instance) -> Vec<DrillReport> {
    enumerate_failures(design, inst).into_iter().map(|f| drill_one(design, inst, f)).collect()
}

fn hit(lp: &Lightpath, f: &FailureEvent) -> bool {
    match f {
        FailureEvent::PhysicalLink { link } => lp.route_links().contains(link),
        FailureEvent::TransitNode { node } => lp.route_nodes().contains(node),
        // The interface is the carrier's own port pair; a protection
        // lightpath lands on separate ports and survives it.
        FailureEvent::Interface { lightpath, node } => {
            lp.role.is_carrier() && lp.key == *lightpath && (lp.key.from == *node || lp.key.to == *node)
        }
    }
}

/// Simulates one failure: optical recovery first, then MPLS recovery onto
/// protection LSPs.
pub fn drill_one(design: &Design, inst: &Instance, failure: FailureEvent) -> DrillReport {
    let option = design.survivability;
    let prot: BTreeMap<LightpathKey, &Lightpath> =
        design.lightpaths_with(Role::OpticalProtection).map(|lp| (lp.key, lp)).collect();
    let failed_node = match failure {
        FailureEvent::TransitNode { node } => Some(node),
        _ => None,
    };

    // Carriers that are down after optical recovery, and the protection
    // lightpaths that were switched in.
    let mut down = BTreeSet::new();
    let mut switched: Vec<&Lightpath> = Vec::new();
    for lp in design.logical.carriers() {
        if !hit(lp, &failure) {
            continue;
        }
        let ends_alive = failed_node.is_none_or(|n| n != lp.key.from && n != lp.key.to);
        match prot.get(&lp.key) {
            Some(p) if option.is_multilayer() && ends_alive && !hit(p, &failure) => switched.push(p),
            _ => {
                down.insert(lp.key);
            }
        }
    }

    let mut report = DrillReport {
        failure,
        affected: Vec::new(),
        restored: Vec::new(),
        lost: Vec::new(),
        unrestored: Vec::new(),
        contention: Vec::new(),
        restorable: true,
    };
    let mut spare_in_use = BTreeSet::new();
    for r in &design.lsps {
        let Some(d) = inst.traffic.get(r.lsp) else { continue };
        if failed_node.is_some_and(|n| n == d.src || n == d.dst) {
            report.lost.push(r.lsp);
            continue;
        }
        let optical = r.working.iter().any(|k| design.carrier(k).is_some_and(|lp| hit(lp, &failure)));
        let working_down = r.working.iter().any(|k| down.contains(k))
            || failed_node.is_some_and(|n| r.working_transit().contains(&n));
        if !optical && !working_down {
            continue;
        }
        report.affected.push(r.lsp);
        if !working_down {
            report.restored.push(r.lsp);
            continue;
        }
        match &r.protection {
            Some(p) if p.iter().all(|k| !down.contains(k)) && failed_node.is_none_or(|n| !p.iter().any(|k| k.to == n)) => {
                spare_in_use.extend(p.iter().copied());
                report.restored.push(r.lsp);
            }
            _ => report.unrestored.push(r.lsp),
        }
    }

    if option == Survivability::MultiInterlayerBrs {
        let usage = super::wavelength_usage(design, option);
        let mut demand: BTreeMap<Link, u32> = BTreeMap::new();
        for p in &switched {
            for l in p.route_links() {
                *demand.entry(l).or_default() += 1;
            }
        }
        for k in &spare_in_use {
            if let Some(lp) = design.carrier(k) {
                for l in lp.route_links() {
                    *demand.entry(l).or_default() += 1;
                }
            }
        }
        for u in &usage.links {
            if demand.get(&u.link).copied().unwrap_or(0) > u.w2 + u.x {
                report.contention.push(u.link);
            }
        }
    }
    report.restorable = report.unrestored.is_empty() && report.contention.is_empty();
    report
}
