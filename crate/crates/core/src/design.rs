//! The assembled result of a planning run.
//!
//! Only the modeled half of the traffic (LSPs with s < d) and the
//! lightpaths it selected are stored. Each stored lightpath stands for a
//! bidirectional pair; [`Design::mirrored`] materializes the other half.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::formulation::StageKind;
use crate::milp::SolveStatus;
use crate::model::{DerivedCosts, 
    complement_route, Approach, Lightpath, LightpathKey, Link, LogicalTopology, LspId, NodeId,
    Role, Survivability,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LspRouting {
    pub lsp: LspId,
    /// Carrier lightpaths from source to destination.
    pub working: Vec<LightpathKey>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub protection: Option<Vec<LightpathKey>>,
}

impl LspRouting {
    /// Routers the working path passes through without terminating.
    pub fn working_transit(&self) -> Vec<NodeId> {
        self.working.iter().skip(1).map(|k| k.from).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkUsage {
    pub link: Link,
    /// Wavelengths of working-carrier lightpaths.
    pub w1: u32,
    /// Wavelengths of spare-carrier lightpaths.
    pub w2: u32,
    /// Wavelengths of optical protection lightpaths.
    pub s: u32,
    /// Extra wavelengths beyond the shared pool (interlayer BRS only).
    pub x: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairCount {
    pub from: NodeId,
    pub to: NodeId,
    pub work: u32,
    pub spare: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// Transit traffic per router in Gbps.
    pub transit: Vec<(NodeId, f64)>,
    pub transit_total: f64,
    pub work_lightpaths: u32,
    pub spare_lightpaths: u32,
    pub protection_lightpaths: u32,
    pub pairs: Vec<PairCount>,
    pub links: Vec<LinkUsage>,
    /// Reported wavelength total (BRS counts only the extra part of s_e).
    pub wavelengths: u32,
    pub extra_wavelengths: u32,
    /// Only defined under interlayer BRS.
    pub reuse_factor: Option<f64>,
}

impl Metrics {
    pub fn lightpaths(&self) -> u32 {
        self.work_lightpaths + self.spare_lightpaths
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub transit: f64,
    pub mpls_layer: f64,
    pub optical_layer: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTrace {
    pub stage: StageKind,
    pub variables: usize,
    pub binaries: usize,
    pub integers: usize,
    pub rows: usize,
    pub status: SolveStatus,
    pub objective: f64,
    pub achieved_gap: Option<f64>,
    /// Seconds spent in the solver.
    pub wall_time: f64,
    /// Seconds granted to the solver.
    pub time_limit: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Design {
    pub survivability: Survivability,
    pub approach: Approach,
    pub logical: LogicalTopology,
    pub lsps: Vec<LspRouting>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<Metrics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<CostBreakdown>,
    /// Unit prices `cost` was computed with.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prices: Option<DerivedCosts>,
    #[serde(default)]
    pub stages: Vec<StageTrace>,
}

impl Design {
    pub fn empty(survivability: Survivability, approach: Approach, interfaces: u32) -> Design {
        Design {
            survivability,
            approach,
            logical: LogicalTopology { lightpaths: Vec::new(), interfaces },
            lsps: Vec::new(),
            metrics: None,
            cost: None,
            prices: None,
            stages: Vec::new(),
        }
    }

    pub fn routing(&self, lsp: LspId) -> Option<&LspRouting> {
        self.lsps.iter().find(|r| r.lsp == lsp)
    }

    pub fn carrier(&self, key: &LightpathKey) -> Option<&Lightpath> {
        self.logical.carrier(key)
    }

    pub fn lightpaths_with(&self, role: Role) -> impl Iterator<Item = &Lightpath> {
        self.logical.lightpaths.iter().filter(move |lp| lp.role == role)
    }

    pub fn carrier_keys(&self) -> BTreeSet<LightpathKey> {
        self.logical.carriers().map(|lp| lp.key).collect()
    }

    /// Sum of the solved stage objectives.
    pub fn stage_objective_total(&self) -> f64 {
        self.stages.iter().map(|s| s.objective).sum()
    }

    /// The reverse-direction half: complementary lightpaths and the
    /// mirrored LSP routings (d → s over complementary lightpaths).
    pub fn mirrored(&self) -> (Vec<Lightpath>, Vec<LspRouting>) {
        let lps = self
            .logical
            .lightpaths
            .iter()
            .map(|lp| {
                complement_route(lp).unwrap_or_else(|_| Lightpath::unrouted(lp.key.complement(), lp.role))
            })
            .collect();
        let rev = |keys: &[LightpathKey]| keys.iter().rev().map(LightpathKey::complement).collect();
        let lsps = self
            .lsps
            .iter()
            .map(|r| LspRouting {
                lsp: r.lsp,
                working: rev(&r.working),
                protection: r.protection.as_deref().map(rev),
            })
            .collect();
        (lps, lsps)
    }

    /// Routed lightpaths grouped by role, keyed by slot.
    pub fn routes_by_role(&self, role: Role) -> BTreeMap<LightpathKey, &Lightpath> {
        self.lightpaths_with(role).map(|lp| (lp.key, lp)).collect()
    }
}
