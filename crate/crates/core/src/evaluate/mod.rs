//! Metrics, cost accounting, verification and failure drills.
//!
//! Everything here works from a [`Design`] and the instance alone, never
//! from solver artifacts.

mod drill;
mod verify;

use std::collections::BTreeMap;

use crate::design::{CostBreakdown, Design, LinkUsage, Metrics, PairCount};
use crate::model::{DerivedCosts, Instance, Link, NodeId, Role, Survivability};

pub use drill::{enumerate_failures, failure_drill, DrillReport};
pub use verify::verify_design;

/// Transit traffic per router in Mbps and the total.
///
/// Each router counts the bandwidth of every path arriving over a
/// lightpath, minus the bandwidth of paths terminating there. With
/// `correction` off only one path per LSP is subtracted at the
/// destination even when a protection path also ends there.
pub fn transit_traffic(design: &Design, inst: &Instance, correction: bool) -> (BTreeMap<NodeId, i64>, i64) {
    let mut delta: BTreeMap<NodeId, i64> = inst.topology.nodes.iter().map(|n| (*n, 0)).collect();
    for r in &design.lsps {
        let Some(d) = inst.traffic.get(r.lsp) else { continue };
        let b = d.bandwidth.mbps() as i64;
        for k in &r.working {
            *delta.entry(k.to).or_default() += b;
        }
        *delta.entry(d.dst).or_default() -= b;
        if let Some(p) = &r.protection {
            for k in p {
                *delta.entry(k.to).or_default() += b;
            }
            if correction {
                *delta.entry(d.dst).or_default() -= b;
            }
        }
    }
    let total = delta.values().sum();
    (delta, total)
}

pub struct WavelengthUsage {
    pub links: Vec<LinkUsage>,
    pub total: u32,
    pub extra: u32,
    pub reuse_factor: Option<f64>,
}

/// Wavelengths per link by lightpath class. Under interlayer BRS only the
/// part of s_e not covered by spare-carrier wavelengths is counted.
pub fn wavelength_usage(design: &Design, option: Survivability) -> WavelengthUsage {
    let mut per: BTreeMap<Link, LinkUsage> = BTreeMap::new();
    for lp in &design.logical.lightpaths {
        for l in lp.route_links() {
            let u = per.entry(l).or_insert(LinkUsage { link: l, w1: 0, w2: 0, s: 0, x: 0 });
            match lp.role {
                Role::WorkCarrier => u.w1 += 1,
                Role::SpareCarrier => u.w2 += 1,
                Role::OpticalProtection => u.s += 1,
            }
        }
    }
    let brs = option == Survivability::MultiInterlayerBrs;
    let (mut total, mut extra, mut w2) = (0, 0, 0);
    for u in per.values_mut() {
        if brs {
            u.x = u.s.saturating_sub(u.w2);
            total += u.w1 + u.w2 + u.x;
        } else {
            total += u.w1 + u.w2 + u.s;
        }
        extra += u.x;
        w2 += u.w2;
    }
    WavelengthUsage { links: per.into_values().collect(), total, extra, reuse_factor: brs.then(|| reuse_factor(extra, w2)) }
}

/// 1 − extra / Σ w_e2, clamped to [0, 1]; 1 when nothing is needed.
pub fn reuse_factor(extra: u32, spare_wavelengths: u32) -> f64 {
    if extra == 0 {
        return 1.0;
    }
    if spare_wavelengths == 0 {
        return 0.0;
    }
    (1.0 - extra as f64 / spare_wavelengths as f64).clamp(0.0, 1.0)
}

/// Transit cost + lightpath cost + wavelength cost.
pub fn cost_breakdown(transit_gbps: f64, lightpaths: u32, wavelengths: u32, costs: &DerivedCosts) -> CostBreakdown {
    let transit = costs.transit_per_gbps * transit_gbps;
    let mpls_layer = costs.lightpath * lightpaths as f64;
    let optical_layer = costs.wavelength * wavelengths as f64;
    CostBreakdown { transit, mpls_layer, optical_layer, total: transit + mpls_layer + optical_layer }
}

pub fn compute_metrics(design: &Design, inst: &Instance, correction: bool) -> Metrics {
    let (delta, total) = transit_traffic(design, inst, correction);
    let usage = wavelength_usage(design, design.survivability);
    let mut pairs: BTreeMap<(NodeId, NodeId), PairCount> = BTreeMap::new();
    let (mut work, mut spare, mut prot) = (0, 0, 0);
    for lp in &design.logical.lightpaths {
        let p = pairs.entry((lp.key.from, lp.key.to)).or_insert(PairCount {
            from: lp.key.from,
            to: lp.key.to,
            work: 0,
            spare: 0,
        });
        match lp.role {
            Role::WorkCarrier => {
                work += 1;
                p.work += 1;
            }
            Role::SpareCarrier => {
                spare += 1;
                p.spare += 1;
            }
            Role::OpticalProtection => prot += 1,
        }
    }
    pairs.retain(|_, p| p.work + p.spare > 0);
    Metrics {
        transit: delta.into_iter().map(|(n, v)| (n, v as f64 / 1000.0)).collect(),
        transit_total: total as f64 / 1000.0,
        work_lightpaths: work,
        spare_lightpaths: spare,
        protection_lightpaths: prot,
        pairs: pairs.into_values().collect(),
        links: usage.links,
        wavelengths: usage.total,
        extra_wavelengths: usage.extra,
        reuse_factor: usage.reuse_factor,
    }
}

/// Fills in metrics and the cost breakdown.
pub fn evaluate(design: &mut Design, inst: &Instance, correction: bool, costs: &DerivedCosts) {
    let m = compute_metrics(design, inst, correction);
    design.cost = Some(cost_breakdown(m.transit_total, m.lightpaths(), m.wavelengths, costs));
    design.metrics = Some(m);
    design.prices = Some(*costs);
}
