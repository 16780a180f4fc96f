use std::collections::{BTreeMap, BTreeSet};

use super::{tags, ProtectionPlan, StageKind, StageModel, VarKey};
use crate::design::Design;
use crate::milp::{Cmp, VarId};
use crate::model::{DerivedCosts, DesignConfig, Instance, LightpathKey, LspDemand, NodeId};

/// Working LSP routing and logical topology: interface limits, per-LSP
/// flow conservation, lightpath capacity. Minimizes transit traffic plus
/// lightpath cost.
pub fn build_working_mpls(inst: &Instance, cfg: &DesignConfig, costs: &DerivedCosts) -> StageModel {
    let mut sm = StageModel::new(StageKind::WorkingMpls);
    add_working_mpls(&mut sm, inst, cfg, costs);
    sm
}

pub(super) fn add_working_mpls(
    sm: &mut StageModel,
    inst: &Instance,
    cfg: &DesignConfig,
    costs: &DerivedCosts,
) -> BTreeMap<LightpathKey, VarId> {
    let slots = inst.slots(cfg.q_max);
    let beta: BTreeMap<LightpathKey, VarId> =
        slots.iter().map(|k| (*k, sm.binary(VarKey::WorkBeta(*k)))).collect();
    for &v in beta.values() {
        sm.objective(v, costs.lightpath);
    }
    interface_rows(sm, inst, &beta, &BTreeMap::new(), cfg.interfaces);

    let mut load: BTreeMap<LightpathKey, Vec<(VarId, f64)>> = BTreeMap::new();
    for d in &inst.traffic.demands {
        let mut arcs = Vec::with_capacity(slots.len());
        for k in &slots {
            let v = sm.binary(VarKey::WorkDelta(d.id, *k));
            sm.objective(v, costs.transit(d.bandwidth));
            load.entry(*k).or_default().push((v, d.bandwidth.gbps()));
            arcs.push((*k, v));
        }
        flow_rows(sm, tags::LSP_FLOW, inst, d, &arcs, &BTreeSet::new());
        sm.model.objective_offset -= costs.transit(d.bandwidth);
    }
    capacity_rows(sm, tags::WORK_CAPACITY, inst, &beta, load);
    beta
}

/// Protection LSP routing over new spare carriers in slots the working
/// stage left free. Protection LSPs avoid the routers in their exclusion
/// set, so no logical arc is ever shared with the working path.
pub fn build_protection_mpls(
    inst: &Instance,
    plan: &ProtectionPlan,
    working: &Design,
    cfg: &DesignConfig,
    costs: &DerivedCosts,
) -> StageModel {
    let mut sm = StageModel::new(StageKind::ProtectionMpls);
    add_spare_mpls(&mut sm, inst, plan, working, cfg, costs, &BTreeMap::new());
    sm
}

pub(super) struct SpareMpls {
    pub beta: BTreeMap<LightpathKey, VarId>,
    pub delta: Vec<(LspDemand, Vec<(LightpathKey, VarId)>)>,
}

pub(super) fn add_spare_mpls(
    sm: &mut StageModel,
    inst: &Instance,
    plan: &ProtectionPlan,
    working: &Design,
    cfg: &DesignConfig,
    costs: &DerivedCosts,
    extra_exclusions: &BTreeMap<crate::model::LspId, BTreeSet<NodeId>>,
) -> SpareMpls {
    let used = working.carrier_keys();
    let free: Vec<LightpathKey> = inst.slots(cfg.q_max).into_iter().filter(|k| !used.contains(k)).collect();
    let mut out = SpareMpls { beta: BTreeMap::new(), delta: Vec::new() };
    let protected: Vec<&LspDemand> =
        inst.traffic.demands.iter().filter(|d| plan.p_lsp.contains(&d.id)).collect();
    if protected.is_empty() {
        return out;
    }
    out.beta = free.iter().map(|k| (*k, sm.binary(VarKey::SpareBeta(*k)))).collect();
    for &v in out.beta.values() {
        sm.objective(v, costs.lightpath);
    }
    let mut fixed: BTreeMap<NodeId, (u32, u32)> = BTreeMap::new();
    for k in &used {
        fixed.entry(k.from).or_default().0 += 1;
        fixed.entry(k.to).or_default().1 += 1;
    }
    interface_rows(sm, inst, &out.beta, &fixed, cfg.interfaces);

    let mut load: BTreeMap<LightpathKey, Vec<(VarId, f64)>> = BTreeMap::new();
    for d in protected {
        let mut excl = plan.node_exclusions.get(&d.id).cloned().unwrap_or_default();
        if let Some(more) = extra_exclusions.get(&d.id) {
            excl.extend(more.iter().copied());
        }
        excl.remove(&d.src);
        excl.remove(&d.dst);
        let mut arcs = Vec::new();
        for k in &free {
            if excl.contains(&k.from) || excl.contains(&k.to) {
                continue;
            }
            let v = sm.binary(VarKey::SpareDelta(d.id, *k));
            sm.objective(v, costs.transit(d.bandwidth));
            load.entry(*k).or_default().push((v, d.bandwidth.gbps()));
            arcs.push((*k, v));
        }
        flow_rows(sm, tags::SPARE_LSP_FLOW, inst, d, &arcs, &excl);
        if cfg.transit_double_count_correction {
            sm.model.objective_offset -= costs.transit(d.bandwidth);
        }
        // Working and protection paths could only share a logical arc if a
        // protection LSP rode a working carrier; pδ exists only on free
        // slots, so the logical disjointness rows are empty by construction.
        out.delta.push((d.clone(), arcs));
    }
    capacity_rows(sm, tags::SPARE_CAPACITY, inst, &out.beta, load);
    out
}

fn interface_rows(
    sm: &mut StageModel,
    inst: &Instance,
    beta: &BTreeMap<LightpathKey, VarId>,
    fixed: &BTreeMap<NodeId, (u32, u32)>,
    limit: u32,
) {
    for &n in &inst.topology.nodes {
        let (fo, fi) = fixed.get(&n).copied().unwrap_or_default();
        let out: Vec<_> = beta.iter().filter(|(k, _)| k.from == n).map(|(_, &v)| (v, 1.0)).collect();
        let inn: Vec<_> = beta.iter().filter(|(k, _)| k.to == n).map(|(_, &v)| (v, 1.0)).collect();
        sm.row(tags::INTERFACE_OUT, out, Cmp::Le, limit as f64 - fo as f64);
        sm.row(tags::INTERFACE_IN, inn, Cmp::Le, limit as f64 - fi as f64);
    }
}

fn flow_rows(
    sm: &mut StageModel,
    tag: &str,
    inst: &Instance,
    d: &LspDemand,
    arcs: &[(LightpathKey, VarId)],
    excluded: &BTreeSet<NodeId>,
) {
    for &n in &inst.topology.nodes {
        if excluded.contains(&n) {
            continue;
        }
        let mut terms = Vec::new();
        for (k, v) in arcs {
            if k.from == n {
                terms.push((*v, 1.0));
            } else if k.to == n {
                terms.push((*v, -1.0));
            }
        }
        let rhs = if n == d.src {
            1.0
        } else if n == d.dst {
            -1.0
        } else {
            0.0
        };
        sm.row(tag, terms, Cmp::Eq, rhs);
    }
}

fn capacity_rows(
    sm: &mut StageModel,
    tag: &str,
    inst: &Instance,
    beta: &BTreeMap<LightpathKey, VarId>,
    mut load: BTreeMap<LightpathKey, Vec<(VarId, f64)>>,
) {
    let c = inst.capacity.gbps();
    for (k, &b) in beta {
        let mut terms = load.remove(k).unwrap_or_default();
        if terms.is_empty() {
            continue;
        }
        terms.push((b, -c));
        sm.row(tag, terms, Cmp::Le, 0.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::{solve, HighsBackend, SolveLimits, SolveStatus};
    use crate::model::{Approach, CostModel, PhysicalTopology, Survivability, TrafficMatrix};

    fn d1(triples: &[(u32, u32, f64)]) -> Instance {
        Instance::new(PhysicalTopology::ring(4, 32), TrafficMatrix::from_triples(triples.iter().copied()))
    }

    fn optimum(sm: &StageModel) -> f64 {
        let s = solve(&HighsBackend::default(), &sm.model, &SolveLimits::default());
        assert_eq!(s.status, SolveStatus::Optimal);
        s.objective
    }

    #[test]
    fn d1_working_stage_has_48_binaries_and_costs_17() {
        let inst = d1(&[(1, 3, 10.0)]);
        let cfg = DesignConfig::new(&inst, Survivability::None, Approach::Sequential);
        let sm = build_working_mpls(&inst, &cfg, &CostModel::default().derive());
        assert_eq!(sm.family_counts()["wb"], 24);
        assert_eq!(sm.family_counts()["wd"], 24);
        assert_eq!(sm.stats().binaries, 48);
        assert!((optimum(&sm) - 17.0).abs() < 1e-9);
    }

    #[test]
    fn grooming_beats_direct_lightpaths() {
        let inst = d1(&[(1, 2, 4.0), (2, 3, 4.0), (1, 3, 4.0)]);
        let cfg = DesignConfig::new(&inst, Survivability::None, Approach::Sequential);
        let sm = build_working_mpls(&inst, &cfg, &CostModel::default().derive());
        assert!((optimum(&sm) - 37.2).abs() < 1e-9);
    }

    #[test]
    fn empty_traffic_costs_nothing() {
        let inst = d1(&[]);
        let cfg = DesignConfig::new(&inst, Survivability::None, Approach::Sequential);
        let sm = build_working_mpls(&inst, &cfg, &CostModel::default().derive());
        assert_eq!(optimum(&sm), 0.0);
    }
}
