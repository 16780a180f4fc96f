//! Single-field corruptions of valid designs. Every kind here breaks a
//! rule the verifier checks, so each corrupted design must be flagged.

use rand::seq::SliceRandom;
use rand::Rng;

use otn_design::design::Design;
use otn_design::{DesignConfig, LightpathKey, NodeId, Role};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Corruption {
    /// Drop the last hop of a lightpath route.
    TruncateRoute,
    /// Redirect one hop of a lightpath route to another node.
    BendRoute,
    /// Move a lightpath to a slot index beyond q_max.
    SlotOutOfRange,
    /// Swap a used carrier between working and spare.
    FlipCarrierRole,
    /// Drop the first lightpath of an LSP's working path.
    CutWorkingPath,
    /// Point an LSP hop at a lightpath that does not exist.
    DanglingHop,
    /// Remove an LSP's protection path.
    DropProtection,
    /// Give an unprotected LSP its own working path as protection.
    AddProtection,
    /// Remove an LSP from the design.
    DropLsp,
    /// Route a protection lightpath exactly like its carrier.
    ShadowProtection,
    /// Remove a protection lightpath.
    DropProtectionLightpath,
    /// Change the stored wavelength count.
    Wavelengths,
    /// Change the stored transit total.
    Transit,
    /// Change the stored total cost.
    TotalCost,
}

impl Corruption {
    fn applies(self, d: &Design) -> bool {
        use Corruption::*;
        let has = |role: Role| d.logical.lightpaths.iter().any(|lp| lp.role == role);
        match self {
            TruncateRoute | BendRoute | SlotOutOfRange => !d.logical.lightpaths.is_empty(),
            FlipCarrierRole | CutWorkingPath | DanglingHop | DropLsp => !d.lsps.is_empty(),
            DropProtection => d.lsps.iter().any(|r| r.protection.is_some()),
            AddProtection => d.lsps.iter().any(|r| r.protection.is_none()),
            ShadowProtection | DropProtectionLightpath => has(Role::OpticalProtection),
            Wavelengths | Transit => d.metrics.is_some(),
            TotalCost => d.cost.is_some(),
        }
    }
}

pub const ALL: [Corruption; 14] = {
    use Corruption::*;
    [
        TruncateRoute,
        BendRoute,
        SlotOutOfRange,
        FlipCarrierRole,
        CutWorkingPath,
        DanglingHop,
        DropProtection,
        AddProtection,
        DropLsp,
        ShadowProtection,
        DropProtectionLightpath,
        Wavelengths,
        Transit,
        TotalCost,
    ]
};

/// Applies one randomly chosen corruption that fits `design`.
pub fn corrupt(design: &Design, cfg: &DesignConfig, nodes: &[NodeId], rng: &mut impl Rng) -> (Corruption, Design) {
    let kinds: Vec<Corruption> = ALL.iter().copied().filter(|k| k.applies(design)).collect();
    let kind = *kinds.choose(rng).expect("metrics corruptions always apply");
    let mut d = design.clone();
    let lps = d.logical.lightpaths.len();
    let lsps = d.lsps.len();
    use Corruption::*;
    match kind {
        TruncateRoute => {
            let i = rng.gen_range(0..lps);
            d.logical.lightpaths[i].route.pop();
        }
        BendRoute => {
            let lp = &mut d.logical.lightpaths[rng.gen_range(0..lps)];
            let h = rng.gen_range(0..lp.route.len());
            let was = lp.route[h].to;
            let others: Vec<NodeId> = nodes.iter().copied().filter(|&n| n != was).collect();
            lp.route[h].to = *others.choose(rng).unwrap();
        }
        SlotOutOfRange => {
            let i = rng.gen_range(0..lps);
            d.logical.lightpaths[i].key.q = cfg.q_max + 1;
        }
        FlipCarrierRole => {
            let r = &d.lsps[rng.gen_range(0..lsps)];
            let key = r.working[rng.gen_range(0..r.working.len())];
            let lp = d.logical.lightpaths.iter_mut().find(|lp| lp.key == key && lp.role.is_carrier()).unwrap();
            lp.role = if lp.role == Role::WorkCarrier { Role::SpareCarrier } else { Role::WorkCarrier };
        }
        CutWorkingPath => {
            let i = rng.gen_range(0..lsps);
            d.lsps[i].working.remove(0);
        }
        DanglingHop => {
            let r = &mut d.lsps[rng.gen_range(0..lsps)];
            let h = rng.gen_range(0..r.working.len());
            let k = r.working[h];
            r.working[h] = LightpathKey { q: u8::MAX, ..k };
        }
        DropProtection => {
            let mut idx: Vec<usize> = (0..lsps).filter(|&i| d.lsps[i].protection.is_some()).collect();
            idx.shuffle(rng);
            d.lsps[idx[0]].protection = None;
        }
        AddProtection => {
            let mut idx: Vec<usize> = (0..lsps).filter(|&i| d.lsps[i].protection.is_none()).collect();
            idx.shuffle(rng);
            let r = &mut d.lsps[idx[0]];
            r.protection = Some(r.working.clone());
        }
        DropLsp => {
            d.lsps.remove(rng.gen_range(0..lsps));
        }
        ShadowProtection => {
            let mut idx: Vec<usize> =
                (0..lps).filter(|&i| d.logical.lightpaths[i].role == Role::OpticalProtection).collect();
            idx.shuffle(rng);
            let key = d.logical.lightpaths[idx[0]].key;
            let route = d.logical.carrier(&key).expect("protection has a carrier").route.clone();
            d.logical.lightpaths[idx[0]].route = route;
        }
        DropProtectionLightpath => {
            let mut idx: Vec<usize> =
                (0..lps).filter(|&i| d.logical.lightpaths[i].role == Role::OpticalProtection).collect();
            idx.shuffle(rng);
            d.logical.lightpaths.remove(idx[0]);
        }
        Wavelengths => d.metrics.as_mut().unwrap().wavelengths += 1,
        Transit => d.metrics.as_mut().unwrap().transit_total += 1.0,
        TotalCost => d.cost.as_mut().unwrap().total += 1.0,
    }
    (kind, d)
}
