//! Stage orchestration: sequential (I → II → III → IV) and integrated
//! (I+III, then II+IV), decoding each stage into the growing [`Design`].

use std::collections::{BTreeMap, BTreeSet};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::design::{Design, LspRouting, StageTrace};
use crate::evaluate;
use crate::formulation::{
    build_integrated_protection, build_integrated_working, build_lightpath_protection, build_lightpath_routing_seq,
    build_protection_mpls, build_working_mpls, compute_protection_plan, follow_path, lint, StageKind, StageModel, VarKey,
};
use crate::milp::{solve, Backend, SolveLimits, SolveStatus, SolverFailure};
use crate::model::{
    Approach, DerivedCosts, DesignConfig, Hop, Instance, Lightpath, LightpathKey, LspId, NodeId, Role, Survivability,
};
use crate::Error;

/// Minimum share of the global time limit granted to every stage.
const MIN_STAGE_SHARE: f64 = 0.10;
/// Relative tolerance of the stage-objective / recomputed-cost identity.
const COST_TOLERANCE: f64 = 1e-6;

/// Stages executed for an option and approach, in order.
pub fn planned_stages(option: Survivability, approach: Approach) -> Vec<StageKind> {
    use StageKind::*;
    match (approach, option) {
        (Approach::Sequential, Survivability::None) => vec![WorkingMpls, WorkingLightpath],
        (Approach::Sequential, Survivability::SingleLayer) => vec![WorkingMpls, ProtectionMpls, WorkingLightpath],
        (Approach::Sequential, _) => vec![WorkingMpls, ProtectionMpls, WorkingLightpath, ProtectionLightpath],
        (Approach::Integrated, Survivability::None) => vec![IntegratedWorking],
        (Approach::Integrated, _) => vec![IntegratedWorking, IntegratedProtection],
    }
}

/// Rough variable count of a stage before it is built.
fn estimate_vars(stage: StageKind, inst: &Instance, cfg: &DesignConfig) -> f64 {
    let n = inst.topology.node_count() as f64;
    let slots = n * (n - 1.0) * cfg.q_max as f64;
    let arcs = 2.0 * inst.topology.links.len() as f64;
    let k = inst.traffic.len() as f64;
    let carriers = slots.min(2.0 * k.max(1.0));
    let double = if cfg.survivability == Survivability::MultiDouble { 2.0 } else { 1.0 };
    match stage {
        StageKind::WorkingMpls | StageKind::ProtectionMpls => slots * (1.0 + k),
        StageKind::WorkingLightpath | StageKind::ProtectionLightpath => carriers * arcs,
        StageKind::IntegratedWorking => slots * (1.0 + k + arcs),
        StageKind::IntegratedProtection => slots * (1.0 + k + double * arcs) + carriers * arcs,
    }
}

/// Per-stage wall-clock limits in seconds. Each stage gets 10 % of the
/// global limit; the remainder is split by estimated variable count.
pub fn stage_budgets(inst: &Instance, cfg: &DesignConfig) -> BTreeMap<StageKind, f64> {
    let stages = planned_stages(cfg.survivability, cfg.approach);
    let est: Vec<f64> = stages.iter().map(|s| estimate_vars(*s, inst, cfg).max(1.0)).collect();
    let sum: f64 = est.iter().sum();
    let floor = MIN_STAGE_SHARE * cfg.time_limit;
    let rest = (cfg.time_limit - floor * stages.len() as f64).max(0.0);
    stages.iter().zip(&est).map(|(s, e)| (*s, floor + rest * e / sum)).collect()
}

/// A finished run: the design, the configuration actually used, and the
/// solver identity.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub design: Design,
    pub config: DesignConfig,
    pub solver: String,
}

/// Reproducibility record of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub instance_hash: String,
    pub solver: String,
    pub config: DesignConfig,
    pub stages: Vec<StageTrace>,
    pub total_cost: Option<f64>,
}

impl RunManifest {
    pub fn new(inst: &Instance, run: &RunResult) -> RunManifest {
        RunManifest {
            tool: format!("otnplan {}", env!("CARGO_PKG_VERSION")),
            instance_hash: crate::instance::instance_hash(inst),
            solver: run.solver.clone(),
            config: run.config.clone(),
            stages: run.design.stages.clone(),
            total_cost: run.design.cost.map(|c| c.total),
        }
    }
}

/// Runs the configured approach. With `auto_grow_q`, an infeasible stage
/// triggers one retry with `q_max + 1`.
pub fn run(inst: &Instance, cfg: &DesignConfig, costs: &DerivedCosts, backend: &dyn Backend) -> Result<RunResult, Error> {
    let once = |cfg: &DesignConfig| match cfg.approach {
        Approach::Sequential => run_sequential(inst, cfg, costs, backend),
        Approach::Integrated => run_integrated(inst, cfg, costs, backend),
    };
    let out = once(cfg);
    let design = match out {
        Err(Error::StageFailed { status: SolveStatus::Infeasible, .. }) if cfg.auto_grow_q && cfg.q_max < u8::MAX => {
            let mut grown = cfg.clone();
            grown.q_max += 1;
            if inst.interfaces.is_none() {
                grown.interfaces = DesignConfig::default_interfaces(grown.q_max, inst.topology.node_count());
            }
            log::info!("retrying with q_max = {}", grown.q_max);
            let d = once(&grown)?;
            return Ok(RunResult { design: d, config: grown, solver: backend.name() });
        }
        other => other?,
    };
    Ok(RunResult { design, config: cfg.clone(), solver: backend.name() })
}

struct Runner<'a> {
    inst: &'a Instance,
    cfg: &'a DesignConfig,
    backend: &'a dyn Backend,
    budgets: BTreeMap<StageKind, f64>,
}

impl Runner<'_> {
    /// Solves one stage, records its trace, and decodes it into `design`.
    fn stage(&self, design: &mut Design, sm: &StageModel) -> Result<(), Error> {
        lint(sm).map_err(|e| Error::Formulation { stage: sm.stage, detail: e })?;
        let limit = self.budgets.get(&sm.stage).copied().unwrap_or(self.cfg.time_limit);
        let limits = SolveLimits {
            optimality_gap: self.cfg.optimality_gap,
            time_limit: Duration::from_secs_f64(limit.max(0.001)),
        };
        let stats = sm.stats();
        log::info!(
            "stage {}: {} variables ({} binary, {} integer), {} rows, limit {:.1}s",
            sm.stage, stats.variables, stats.binaries, stats.integers, stats.rows, limit
        );
        let sol = solve(self.backend, &sm.model, &limits);
        log::info!("stage {}: {:?} objective {} in {:.2}s", sm.stage, sol.status, sol.objective, sol.wall_time);
        design.stages.push(StageTrace {
            stage: sm.stage,
            variables: stats.variables,
            binaries: stats.binaries,
            integers: stats.integers,
            rows: stats.rows,
            status: sol.status,
            objective: sol.objective,
            achieved_gap: sol.achieved_gap,
            wall_time: sol.wall_time,
            time_limit: limit,
            failure: sol.failure.as_ref().map(|f| format!("{f:?}")),
        });
        if let Some(SolverFailure::Missing(cmd)) = &sol.failure {
            return Err(Error::SolverMissing(cmd.clone()));
        }
        if !sol.status.is_feasible() {
            return Err(Error::StageFailed {
                stage: sm.stage,
                status: sol.status,
                partial: Box::new(design.clone()),
            });
        }
        decode(design, self.inst, sm, &sol.values)
    }
}

fn finish(mut design: Design, inst: &Instance, cfg: &DesignConfig, costs: &DerivedCosts) -> Result<Design, Error> {
    evaluate::evaluate(&mut design, inst, cfg.transit_double_count_correction, costs);
    let total = design.cost.map(|c| c.total).unwrap_or(0.0);
    let stages = design.stage_objective_total();
    if (total - stages).abs() > COST_TOLERANCE * total.abs().max(1.0) {
        return Err(Error::Inconsistent(format!(
            "recomputed cost {total} differs from the sum of stage objectives {stages}"
        )));
    }
    Ok(design)
}

/// Stages I → II → III → IV. Each stage sees the earlier stages' output
/// as constants.
pub fn run_sequential(
    inst: &Instance,
    cfg: &DesignConfig,
    costs: &DerivedCosts,
    backend: &dyn Backend,
) -> Result<Design, Error> {
    let option = cfg.survivability;
    let runner = Runner { inst, cfg, backend, budgets: stage_budgets(inst, cfg) };
    let mut design = Design::empty(option, Approach::Sequential, cfg.interfaces);

    runner.stage(&mut design, &build_working_mpls(inst, cfg, costs))?;
    if option != Survivability::None {
        let plan = compute_protection_plan(&design, option);
        let sm = build_protection_mpls(inst, &plan, &design, cfg, costs);
        runner.stage(&mut design, &sm)?;
    }
    let plan = compute_protection_plan(&design, option);
    let carriers: Vec<Lightpath> = design.logical.carriers().cloned().collect();
    runner.stage(&mut design, &build_lightpath_routing_seq(inst, &carriers, &plan, cfg, costs))?;
    if option.is_multilayer() {
        let plan = compute_protection_plan(&design, option);
        let sm = build_lightpath_protection(inst, &design, &plan, cfg, costs);
        runner.stage(&mut design, &sm)?;
    }
    finish(design, inst, cfg, costs)
}

/// Working LSPs with their carriers in one model, then protection LSPs,
/// spare carriers and protection lightpaths in a second.
pub fn run_integrated(
    inst: &Instance,
    cfg: &DesignConfig,
    costs: &DerivedCosts,
    backend: &dyn Backend,
) -> Result<Design, Error> {
    let option = cfg.survivability;
    let runner = Runner { inst, cfg, backend, budgets: stage_budgets(inst, cfg) };
    let mut design = Design::empty(option, Approach::Integrated, cfg.interfaces);

    runner.stage(&mut design, &build_integrated_working(inst, cfg, costs))?;
    if option != Survivability::None {
        let plan = compute_protection_plan(&design, option);
        let sm = build_integrated_protection(inst, &plan, &design, cfg, costs);
        runner.stage(&mut design, &sm)?;
    }
    finish(design, inst, cfg, costs)
}

/// Decodes every variable family of a solved stage into `design`.
/// Flows must form simple paths; anything else is a formulation bug and is
/// reported, never repaired.
pub fn decode(design: &mut Design, inst: &Instance, sm: &StageModel, values: &[f64]) -> Result<(), Error> {
    let err = |family: &str, detail: String| Error::Decode { stage: sm.stage, family: family.to_string(), detail };
    let mut new_carriers = Vec::new();
    let mut lsp_arcs: BTreeMap<(bool, LspId), Vec<(NodeId, NodeId, LightpathKey)>> = BTreeMap::new();
    let mut routes: BTreeMap<(bool, LightpathKey), Vec<(NodeId, NodeId, Hop)>> = BTreeMap::new();
    for key in sm.active(values) {
        match key {
            VarKey::WorkBeta(k) => new_carriers.push(Lightpath::unrouted(k, Role::WorkCarrier)),
            VarKey::SpareBeta(k) => new_carriers.push(Lightpath::unrouted(k, Role::SpareCarrier)),
            VarKey::WorkDelta(l, k) => lsp_arcs.entry((false, l)).or_default().push((k.from, k.to, k)),
            VarKey::SpareDelta(l, k) => lsp_arcs.entry((true, l)).or_default().push((k.from, k.to, k)),
            VarKey::WorkLambda(k, h) => routes.entry((false, k)).or_default().push((h.from, h.to, h)),
            VarKey::ProtLambda(k, h) => routes.entry((true, k)).or_default().push((h.from, h.to, h)),
            VarKey::Extra(_) | VarKey::PoolUse(..) => {}
        }
    }

    let existing = design.carrier_keys();
    for lp in new_carriers {
        if existing.contains(&lp.key) {
            return Err(err(if lp.role == Role::WorkCarrier { "wb" } else { "pb" }, format!("slot {} reused", lp.key)));
        }
        design.logical.lightpaths.push(lp);
    }

    for ((spare, id), arcs) in lsp_arcs {
        let family = if spare { "pd" } else { "wd" };
        let d = inst.traffic.get(id).ok_or_else(|| err(family, format!("unknown LSP {id}")))?;
        let path = follow_path(&arcs, d.src, d.dst).map_err(|e| err(family, format!("LSP {id}: {e}")))?;
        if spare {
            let r = design
                .lsps
                .iter_mut()
                .find(|r| r.lsp == id)
                .ok_or_else(|| err(family, format!("LSP {id} has no working path")))?;
            r.protection = Some(path);
        } else {
            design.lsps.push(LspRouting { lsp: id, working: path, protection: None });
        }
    }
    design.lsps.sort_by_key(|r| r.lsp);

    let carriers: BTreeSet<LightpathKey> = design.carrier_keys();
    for ((prot, k), arcs) in routes {
        let family = if prot { "pl" } else { "wl" };
        let route = follow_path(&arcs, k.from, k.to).map_err(|e| err(family, format!("lightpath {k}: {e}")))?;
        if !carriers.contains(&k) {
            return Err(err(family, format!("route for {k}, which is not a carrier")));
        }
        if prot {
            design.logical.lightpaths.push(Lightpath { key: k, role: Role::OpticalProtection, route });
        } else {
            let lp = design.logical.lightpaths.iter_mut().find(|lp| lp.role.is_carrier() && lp.key == k);
            if let Some(lp) = lp {
                lp.route = route;
            }
        }
    }
    design.logical.lightpaths.sort_by_key(|lp| (lp.role == Role::OpticalProtection, lp.key));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::HighsBackend;
    use crate::model::{CostModel, PhysicalTopology, TrafficMatrix};

    fn d1() -> Instance {
        Instance::new(PhysicalTopology::ring(4, 32), TrafficMatrix::from_triples([(1, 3, 10.0)]))
    }

    fn total(option: Survivability, approach: Approach) -> Design {
        let inst = d1();
        let cfg = DesignConfig::new(&inst, option, approach).with_gap(0.0);
        let d = run(&inst, &cfg, &CostModel::default().derive(), &HighsBackend::default()).unwrap().design;
        assert!(evaluate::verify_design(&d, &inst, &cfg).is_empty(), "{:?}", evaluate::verify_design(&d, &inst, &cfg));
        d
    }

    #[test]
    fn d1_totals() {
        let none = total(Survivability::None, Approach::Sequential);
        assert_eq!(none.cost.unwrap().total, 23.0);
        let w = &none.lsps[0].working;
        assert_eq!((w.len(), w[0].from, w[0].to), (1, NodeId(1), NodeId(3)));

        let sl = total(Survivability::SingleLayer, Approach::Sequential);
        assert_eq!(sl.cost.unwrap().total, 46.0);
        assert_eq!(sl.metrics.as_ref().unwrap().wavelengths, 4);
        assert_eq!(sl.stages.len(), 3);

        let brs = total(Survivability::MultiInterlayerBrs, Approach::Sequential);
        assert_eq!(brs.cost.unwrap().total, 29.0);
        assert!(brs.lsps[0].protection.is_none());
        assert_eq!(brs.lightpaths_with(Role::OpticalProtection).count(), 1);

        assert_eq!(total(Survivability::None, Approach::Integrated).cost.unwrap().total, 23.0);
    }

    #[test]
    fn budgets_cover_the_limit() {
        let inst = d1();
        for option in [Survivability::None, Survivability::MultiDouble] {
            let cfg = DesignConfig::new(&inst, option, Approach::Sequential).with_time_limit(100.0);
            let b = stage_budgets(&inst, &cfg);
            assert!((b.values().sum::<f64>() - 100.0).abs() < 1e-9);
            assert!(b.values().all(|t| *t >= 10.0));
        }
    }

    #[test]
    fn cyclic_flow_is_rejected() {
        let inst = d1();
        let cfg = DesignConfig::new(&inst, Survivability::None, Approach::Sequential);
        let sm = build_working_mpls(&inst, &cfg, &CostModel::default().derive());
        let mut values = vec![0.0; sm.model.variables().len()];
        for k in [LightpathKey::new(1, 3, 1), LightpathKey::new(2, 4, 1), LightpathKey::new(4, 2, 1)] {
            values[sm.get(&VarKey::WorkBeta(k)).unwrap().0] = 1.0;
            values[sm.get(&VarKey::WorkDelta(LspId(1), k)).unwrap().0] = 1.0;
        }
        let mut d = Design::empty(Survivability::None, Approach::Sequential, 12);
        let e = decode(&mut d, &inst, &sm, &values).unwrap_err();
        assert!(e.to_string().contains("non-simple flow"), "{e}");
    }
}
