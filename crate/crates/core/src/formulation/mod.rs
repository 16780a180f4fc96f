//! ILP builders for every planning stage.
//!
//! Variable families and their names:
//!
//! | family | name                 | meaning                                        |
//! |--------|----------------------|------------------------------------------------|
//! | wβ     | `wb_i_j_q`           | working carrier lightpath in slot (i,j,q)      |
//! | pβ     | `pb_i_j_q`           | spare carrier lightpath in slot (i,j,q)        |
//! | wδ     | `wd_k_i_j_q`         | working LSP k rides slot (i,j,q)               |
//! | pδ     | `pd_k_i_j_q`         | protection LSP k rides slot (i,j,q)            |
//! | wλ     | `wl_i_j_q_m_n`       | carrier (i,j,q) uses physical arc m→n          |
//! | pλ     | `pl_i_j_q_m_n`       | protection lightpath of (i,j,q) uses arc m→n   |
//! | x      | `xe_a_b`             | extra wavelengths on link a-b (BRS)            |
//! | y      | `ya_n_a_b`           | link a-b carries spare traffic for router n    |
//!
//! Row tags name the constraint family (`lsp_flow`, `work_capacity`, ...).

mod integrated;
mod mpls;
mod optical;
mod plan;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::milp::{Cmp, MilpError, MilpModel, ModelStats, VarId};
use crate::model::{Hop, LightpathKey, Link, LspId, NodeId};

pub use integrated::{build_integrated_protection, build_integrated_working};
pub use mpls::{build_protection_mpls, build_working_mpls};
pub use optical::{build_lightpath_protection, build_lightpath_routing_seq};
pub use plan::{compute_protection_plan, DisjointPair, ProtectionPlan};

pub mod tags {
    pub const INTERFACE_OUT: &str = "interface_out";
    pub const INTERFACE_IN: &str = "interface_in";
    pub const LSP_FLOW: &str = "lsp_flow";
    pub const SPARE_LSP_FLOW: &str = "spare_lsp_flow";
    pub const LOGICAL_DISJOINT: &str = "logical_disjoint";
    pub const WORK_CAPACITY: &str = "work_capacity";
    pub const SPARE_CAPACITY: &str = "spare_capacity";
    pub const LIGHTPATH_FLOW: &str = "lightpath_flow";
    pub const PROTECTION_FLOW: &str = "protection_flow";
    pub const OPTICAL_DISJOINT: &str = "optical_disjoint";
    pub const WAVELENGTH_CAPACITY: &str = "wavelength_capacity";
    pub const SIMPLE_ROUTE: &str = "simple_route";
    pub const PAIR_LINK: &str = "pair_link";
    pub const PAIR_NODE: &str = "pair_node";
    pub const SPARE_POOL_SEPARATION: &str = "spare_pool_separation";
    pub const EXTRA_WAVELENGTHS: &str = "extra_wavelengths";
    pub const POOL_USE: &str = "pool_use";
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageKind {
    WorkingMpls,
    ProtectionMpls,
    WorkingLightpath,
    ProtectionLightpath,
    IntegratedWorking,
    IntegratedProtection,
}

impl StageKind {
    pub fn slug(self) -> &'static str {
        match self {
            StageKind::WorkingMpls => "working-mpls",
            StageKind::ProtectionMpls => "protection-mpls",
            StageKind::WorkingLightpath => "working-lightpath",
            StageKind::ProtectionLightpath => "protection-lightpath",
            StageKind::IntegratedWorking => "integrated-working",
            StageKind::IntegratedProtection => "integrated-protection",
        }
    }
}

impl fmt::Display for StageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKey {
    WorkBeta(LightpathKey),
    SpareBeta(LightpathKey),
    WorkDelta(LspId, LightpathKey),
    SpareDelta(LspId, LightpathKey),
    WorkLambda(LightpathKey, Hop),
    ProtLambda(LightpathKey, Hop),
    Extra(Link),
    PoolUse(NodeId, Link),
}

impl VarKey {
    pub fn name(&self) -> String {
        let lp = |k: &LightpathKey| format!("{}_{}_{}", k.from, k.to, k.q);
        match self {
            VarKey::WorkBeta(k) => format!("wb_{}", lp(k)),
            VarKey::SpareBeta(k) => format!("pb_{}", lp(k)),
            VarKey::WorkDelta(l, k) => format!("wd_{}_{}", l.0, lp(k)),
            VarKey::SpareDelta(l, k) => format!("pd_{}_{}", l.0, lp(k)),
            VarKey::WorkLambda(k, h) => format!("wl_{}_{}_{}", lp(k), h.from, h.to),
            VarKey::ProtLambda(k, h) => format!("pl_{}_{}_{}", lp(k), h.from, h.to),
            VarKey::Extra(e) => format!("xe_{}_{}", e.a, e.b),
            VarKey::PoolUse(n, e) => format!("ya_{}_{}_{}", n, e.a, e.b),
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            VarKey::WorkBeta(_) => "wb",
            VarKey::SpareBeta(_) => "pb",
            VarKey::WorkDelta(..) => "wd",
            VarKey::SpareDelta(..) => "pd",
            VarKey::WorkLambda(..) => "wl",
            VarKey::ProtLambda(..) => "pl",
            VarKey::Extra(_) => "xe",
            VarKey::PoolUse(..) => "ya",
        }
    }
}

/// One stage's model plus the map from variable family/indices to columns.
#[derive(Debug, Clone)]
pub struct StageModel {
    pub stage: StageKind,
    pub model: MilpModel,
    pub index: HashMap<VarKey, VarId>,
    keys: Vec<VarKey>,
}

impl StageModel {
    pub fn new(stage: StageKind) -> StageModel {
        StageModel { stage, model: MilpModel::new(stage.slug()), index: HashMap::new(), keys: Vec::new() }
    }

    pub fn binary(&mut self, key: VarKey) -> VarId {
        self.add(key, None)
    }

    pub fn integer(&mut self, key: VarKey, upper: f64) -> VarId {
        self.add(key, Some(upper))
    }

    fn add(&mut self, key: VarKey, upper: Option<f64>) -> VarId {
        if let Some(&v) = self.index.get(&key) {
            return v;
        }
        let name = key.name();
        let v = match upper {
            None => self.model.add_binary(name),
            Some(u) => self.model.add_integer(name, u),
        }
        .expect("generated names are unique and valid");
        self.index.insert(key, v);
        self.keys.push(key);
        v
    }

    pub fn get(&self, key: &VarKey) -> Option<VarId> {
        self.index.get(key).copied()
    }

    pub fn row(&mut self, tag: &str, terms: Vec<(VarId, f64)>, cmp: Cmp, rhs: f64) {
        self.model.add_row(tag, terms, cmp, rhs).expect("builder rows reference declared columns");
    }

    pub fn objective(&mut self, v: VarId, coef: f64) {
        self.model.add_objective(v, coef);
    }

    /// Keys in declaration order, i.e. indexed by `VarId`.
    pub fn keys(&self) -> &[VarKey] {
        &self.keys
    }

    pub fn family_counts(&self) -> BTreeMap<&'static str, usize> {
        let mut out = BTreeMap::new();
        for k in &self.keys {
            *out.entry(k.family()).or_insert(0) += 1;
        }
        out
    }

    pub fn stats(&self) -> ModelStats {
        self.model.stats()
    }

    /// Keys whose value in `values` is at least one half.
    pub fn active(&self, values: &[f64]) -> Vec<VarKey> {
        self.keys
            .iter()
            .zip(values)
            .filter(|(_, &x)| x > 0.5)
            .map(|(k, _)| *k)
            .collect()
    }

    pub fn value_of(&self, key: &VarKey, values: &[f64]) -> f64 {
        self.get(key).and_then(|v| values.get(v.0).copied()).unwrap_or(0.0)
    }
}

/// Structural checks on a built stage model.
pub fn lint(sm: &StageModel) -> Result<(), String> {
    sm.model.validate().map_err(|e: MilpError| e.to_string())?;
    let fams = sm.family_counts();
    let has = |f: &str| fams.get(f).copied().unwrap_or(0) > 0;
    let rows = |t: &str| sm.model.rows_tagged(t).count();
    let allowed: &[&str] = match sm.stage {
        StageKind::WorkingMpls => &["wb", "wd"],
        StageKind::ProtectionMpls => &["pb", "pd"],
        StageKind::WorkingLightpath => &["wl"],
        StageKind::ProtectionLightpath => &["pl", "xe"],
        StageKind::IntegratedWorking => &["wb", "wd", "wl"],
        StageKind::IntegratedProtection => &["pb", "pd", "wl", "pl", "xe", "ya"],
    };
    for f in fams.keys() {
        if !allowed.contains(f) {
            return Err(format!("family {f} not allowed in {}", sm.stage));
        }
    }
    if rows(tags::LOGICAL_DISJOINT) > 0
        && !matches!(sm.stage, StageKind::ProtectionMpls | StageKind::IntegratedProtection)
    {
        return Err("logical disjointness rows outside a protection stage".into());
    }
    if rows(tags::OPTICAL_DISJOINT) > 0 && !has("pl") {
        return Err("optical disjointness rows without protection lightpaths".into());
    }
    for row in sm.model.rows_tagged(tags::OPTICAL_DISJOINT) {
        // Each row ties one protection lightpath to its own carrier slot.
        let slots: BTreeSet<LightpathKey> = row
            .terms
            .iter()
            .map(|(v, _)| match sm.keys[v.0] {
                VarKey::WorkLambda(k, _) | VarKey::ProtLambda(k, _) => Ok(k),
                other => Err(format!("optical disjointness row {} uses {}", row.name, other.name())),
            })
            .collect::<Result<_, _>>()?;
        if slots.len() != 1 {
            return Err(format!("optical disjointness row {} spans several lightpaths", row.name));
        }
    }
    Ok(())
}

/// Follows a unit flow given as arcs from `src` to `dst`.
///
/// Every arc must be used exactly once by a single simple path; cycles
/// or branches are a decoding error.
pub(crate) fn follow_path<T: Copy>(
    arcs: &[(NodeId, NodeId, T)],
    src: NodeId,
    dst: NodeId,
) -> Result<Vec<T>, String> {
    let mut out_of: BTreeMap<NodeId, Vec<(NodeId, T)>> = BTreeMap::new();
    for &(a, b, t) in arcs {
        out_of.entry(a).or_default().push((b, t));
    }
    if out_of.values().any(|v| v.len() > 1) {
        return Err("non-simple flow: a node has two outgoing arcs".into());
    }
    let mut seen = BTreeSet::from([src]);
    let mut at = src;
    let mut path = Vec::new();
    while at != dst {
        let Some(&(next, t)) = out_of.get(&at).and_then(|v| v.first()) else {
            return Err(format!("non-simple flow: path stops at {at}"));
        };
        if !seen.insert(next) {
            return Err(format!("non-simple flow: revisits {next}"));
        }
        path.push(t);
        at = next;
    }
    if path.len() != arcs.len() {
        return Err("non-simple flow: cycle detached from the path".into());
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_follow_scheme() {
        let k = LightpathKey::new(1, 3, 2);
        assert_eq!(VarKey::WorkBeta(k).name(), "wb_1_3_2");
        assert_eq!(VarKey::SpareDelta(LspId(4), k).name(), "pd_4_1_3_2");
        assert_eq!(VarKey::WorkLambda(k, Hop::new(NodeId(1), NodeId(2))).name(), "wl_1_3_2_1_2");
        assert_eq!(VarKey::Extra(Link::new(NodeId(3), NodeId(2))).name(), "xe_2_3");
    }

    #[test]
    fn path_following() {
        let n = NodeId;
        let arcs = [(n(2), n(3), 'b'), (n(1), n(2), 'a')];
        assert_eq!(follow_path(&arcs, n(1), n(3)).unwrap(), vec!['a', 'b']);
        let with_cycle = [(n(1), n(3), 'a'), (n(2), n(4), 'c'), (n(4), n(2), 'd')];
        let err = follow_path(&with_cycle, n(1), n(3)).unwrap_err();
        assert!(err.contains("non-simple flow"));
        assert!(follow_path(&[(n(1), n(2), 'a')], n(1), n(3)).is_err());
        assert_eq!(follow_path::<char>(&[], n(1), n(1)).unwrap(), Vec::<char>::new());
    }
}
