//! Domain types shared by every stage: physical topology, LSP demands,
//! lightpaths, cost model and run configuration.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Router + co-located OXC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Bandwidth in whole Mbps. Files carry decimal Gbps; capacity checks stay
/// exact because everything downstream works on the integer.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Bandwidth(pub u64);

impl Bandwidth {
    pub const ZERO: Bandwidth = Bandwidth(0);

    pub fn from_gbps(gbps: f64) -> Option<Bandwidth> {
        if !gbps.is_finite() || gbps < 0.0 {
            return None;
        }
        Some(Bandwidth((gbps * 1000.0).round() as u64))
    }

    pub fn mbps(self) -> u64 {
        self.0
    }

    pub fn gbps(self) -> f64 {
        self.0 as f64 / 1000.0
    }
}

impl std::ops::Add for Bandwidth {
    type Output = Bandwidth;
    fn add(self, rhs: Bandwidth) -> Bandwidth {
        Bandwidth(self.0 + rhs.0)
    }
}

impl std::ops::AddAssign for Bandwidth {
    fn add_assign(&mut self, rhs: Bandwidth) {
        self.0 += rhs.0;
    }
}

impl std::iter::Sum for Bandwidth {
    fn sum<I: Iterator<Item = Bandwidth>>(iter: I) -> Bandwidth {
        Bandwidth(iter.map(|b| b.0).sum())
    }
}

impl fmt::Display for Bandwidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.gbps())
    }
}

impl Serialize for Bandwidth {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.gbps())
    }
}

impl<'de> Deserialize<'de> for Bandwidth {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        Bandwidth::from_gbps(v)
            .ok_or_else(|| serde::de::Error::custom(format!("invalid bandwidth {v}")))
    }
}

/// Undirected physical link, stored with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Link {
    pub a: NodeId,
    pub b: NodeId,
}

impl Link {
    pub fn new(x: NodeId, y: NodeId) -> Link {
        if x <= y {
            Link { a: x, b: y }
        } else {
            Link { a: y, b: x }
        }
    }

    pub fn touches(&self, n: NodeId) -> bool {
        self.a == n || self.b == n
    }
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.a, self.b)
    }
}

/// One directed traversal of a physical link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Hop {
    pub from: NodeId,
    pub to: NodeId,
}

impl Hop {
    pub fn new(from: NodeId, to: NodeId) -> Hop {
        Hop { from, to }
    }

    pub fn link(&self) -> Link {
        Link::new(self.from, self.to)
    }

    pub fn reversed(&self) -> Hop {
        Hop { from: self.to, to: self.from }
    }
}

impl fmt::Display for Hop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.from, self.to)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhysicalTopology {
    pub nodes: BTreeSet<NodeId>,
    pub links: BTreeSet<Link>,
    /// Maximum wavelengths per link.
    pub wavelengths: u32,
}

impl PhysicalTopology {
    pub fn new(
        nodes: impl IntoIterator<Item = u32>,
        links: impl IntoIterator<Item = (u32, u32)>,
        wavelengths: u32,
    ) -> PhysicalTopology {
        PhysicalTopology {
            nodes: nodes.into_iter().map(NodeId).collect(),
            links: links
                .into_iter()
                .map(|(a, b)| Link::new(NodeId(a), NodeId(b)))
                .collect(),
            wavelengths,
        }
    }

    /// Ring 1..=n.
    pub fn ring(n: u32, wavelengths: u32) -> PhysicalTopology {
        PhysicalTopology::new(1..=n, (1..=n).map(|i| (i, i % n + 1)), wavelengths)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn has_link(&self, x: NodeId, y: NodeId) -> bool {
        self.links.contains(&Link::new(x, y))
    }

    /// Both directions of every link.
    pub fn hops(&self) -> Vec<Hop> {
        let mut hops: Vec<Hop> = self
            .links
            .iter()
            .flat_map(|l| [Hop::new(l.a, l.b), Hop::new(l.b, l.a)])
            .collect();
        hops.sort();
        hops
    }

    pub fn neighbors(&self, n: NodeId) -> Vec<NodeId> {
        self.links
            .iter()
            .filter_map(|l| {
                if l.a == n {
                    Some(l.b)
                } else if l.b == n {
                    Some(l.a)
                } else {
                    None
                }
            })
            .collect()
    }

    fn connected_without(&self, removed: Option<NodeId>) -> bool {
        let alive: Vec<NodeId> = self
            .nodes
            .iter()
            .copied()
            .filter(|n| Some(*n) != removed)
            .collect();
        let Some(&start) = alive.first() else {
            return true;
        };
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(n) = queue.pop_front() {
            for m in self.neighbors(n) {
                if Some(m) != removed && seen.insert(m) {
                    queue.push_back(m);
                }
            }
        }
        seen.len() == alive.len()
    }

    /// Connected with at least three nodes and no articulation point.
    pub fn is_biconnected(&self) -> bool {
        if self.nodes.len() < 3 || !self.connected_without(None) {
            return false;
        }
        self.nodes
            .iter()
            .all(|&n| self.connected_without(Some(n)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LspId(pub u32);

impl fmt::Display for LspId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An indivisible LSP flow.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LspDemand {
    pub id: LspId,
    pub src: NodeId,
    pub dst: NodeId,
    pub bandwidth: Bandwidth,
}

/// Only the `src < dst` half of a symmetric matrix is stored; the reverse
/// half rides the complementary lightpaths.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrafficMatrix {
    pub demands: Vec<LspDemand>,
}

impl TrafficMatrix {
    /// Builds a matrix from `(src, dst, gbps)` triples, numbering ids from 1.
    pub fn from_triples(triples: impl IntoIterator<Item = (u32, u32, f64)>) -> TrafficMatrix {
        TrafficMatrix {
            demands: triples
                .into_iter()
                .enumerate()
                .map(|(k, (s, d, b))| LspDemand {
                    id: LspId(k as u32 + 1),
                    src: NodeId(s),
                    dst: NodeId(d),
                    bandwidth: Bandwidth::from_gbps(b).expect("finite bandwidth"),
                })
                .collect(),
        }
    }

    pub fn get(&self, id: LspId) -> Option<&LspDemand> {
        self.demands.iter().find(|d| d.id == id)
    }

    pub fn len(&self) -> usize {
        self.demands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.demands.is_empty()
    }
}

/// Lightpath slot `(i, j, q)`: the q-th lightpath from router i to router j.
/// Working and spare carriers share the slot space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LightpathKey {
    pub from: NodeId,
    pub to: NodeId,
    pub q: u8,
}

impl LightpathKey {
    pub fn new(from: u32, to: u32, q: u8) -> LightpathKey {
        LightpathKey { from: NodeId(from), to: NodeId(to), q }
    }

    pub fn complement(&self) -> LightpathKey {
        LightpathKey { from: self.to, to: self.from, q: self.q }
    }

    pub fn endpoints(&self) -> [NodeId; 2] {
        [self.from, self.to]
    }
}

impl fmt::Display for LightpathKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})q{}", self.from, self.to, self.q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    WorkCarrier,
    SpareCarrier,
    /// Optical-layer protection of the carrier with the same key.
    OpticalProtection,
}

impl Role {
    pub fn is_carrier(self) -> bool {
        matches!(self, Role::WorkCarrier | Role::SpareCarrier)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lightpath {
    pub key: LightpathKey,
    pub role: Role,
    /// Directed physical hops from `key.from` to `key.to`; empty until routed.
    pub route: Vec<Hop>,
}

impl Lightpath {
    pub fn unrouted(key: LightpathKey, role: Role) -> Lightpath {
        Lightpath { key, role, route: Vec::new() }
    }

    pub fn is_routed(&self) -> bool {
        !self.route.is_empty()
    }

    /// Nodes visited by the route, endpoints included.
    pub fn route_nodes(&self) -> Vec<NodeId> {
        route_nodes(&self.route)
    }

    /// OXCs passed through without termination.
    pub fn transit_nodes(&self) -> Vec<NodeId> {
        let nodes = self.route_nodes();
        if nodes.len() <= 2 {
            return Vec::new();
        }
        nodes[1..nodes.len() - 1].to_vec()
    }

    pub fn route_links(&self) -> BTreeSet<Link> {
        self.route.iter().map(Hop::link).collect()
    }
}

pub fn route_nodes(route: &[Hop]) -> Vec<NodeId> {
    let mut nodes = Vec::with_capacity(route.len() + 1);
    if let Some(first) = route.first() {
        nodes.push(first.from);
    }
    nodes.extend(route.iter().map(|h| h.to));
    nodes
}

/// The reverse-direction partner of a routed lightpath: same slot index,
/// swapped endpoints, same physical links traversed backwards.
pub fn complement_route(lp: &Lightpath) -> Result<Lightpath, crate::Error> {
    if !lp.is_routed() {
        return Err(crate::Error::Unrouted(lp.key));
    }
    Ok(Lightpath {
        key: lp.key.complement(),
        role: lp.role,
        route: lp.route.iter().rev().map(Hop::reversed).collect(),
    })
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogicalTopology {
    pub lightpaths: Vec<Lightpath>,
    /// Interface limit per router.
    pub interfaces: u32,
}

impl LogicalTopology {
    pub fn carriers(&self) -> impl Iterator<Item = &Lightpath> {
        self.lightpaths.iter().filter(|lp| lp.role.is_carrier())
    }

    pub fn carrier(&self, key: &LightpathKey) -> Option<&Lightpath> {
        self.carriers().find(|lp| lp.key == *key)
    }

    pub fn protection_of(&self, key: &LightpathKey) -> Option<&Lightpath> {
        self.lightpaths
            .iter()
            .find(|lp| lp.role == Role::OpticalProtection && lp.key == *key)
    }

    /// Carriers originating / terminating per router.
    pub fn interface_counts(&self) -> BTreeMap<NodeId, (u32, u32)> {
        let mut counts: BTreeMap<NodeId, (u32, u32)> = BTreeMap::new();
        for lp in self.carriers() {
            counts.entry(lp.key.from).or_default().0 += 1;
            counts.entry(lp.key.to).or_default().1 += 1;
        }
        counts
    }
}

/// Component prices. Derived per-unit costs come from [`CostModel::derive`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub ip_interface: f64,
    pub oxc_port: f64,
    pub transponder: f64,
    /// Interface (lightpath) rate.
    pub rate: Bandwidth,
}

impl Default for CostModel {
    fn default() -> CostModel {
        CostModel {
            ip_interface: 8.0,
            oxc_port: 0.5,
            transponder: 1.0,
            rate: Bandwidth(10_000),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedCosts {
    /// Per lightpath: two IP interfaces and two OXC ports.
    pub lightpath: f64,
    /// Per wavelength link: two OXC ports and two transponders.
    pub wavelength: f64,
    /// Per Gbps of transit traffic.
    pub transit_per_gbps: f64,
}

impl DerivedCosts {
    /// Transit cost of `b`, computed on Mbps to keep the product exact
    /// whenever the inputs allow it.
    pub fn transit(&self, b: Bandwidth) -> f64 {
        self.transit_per_gbps * b.mbps() as f64 / 1000.0
    }
}

impl CostModel {
    pub fn derive(&self) -> DerivedCosts {
        DerivedCosts {
            lightpath: 2.0 * (self.ip_interface + self.oxc_port),
            wavelength: 2.0 * (self.oxc_port + self.transponder),
            transit_per_gbps: self.ip_interface / self.rate.gbps(),
        }
    }

    pub fn is_valid(&self) -> bool {
        [self.ip_interface, self.oxc_port, self.transponder]
            .iter()
            .all(|c| c.is_finite() && *c > 0.0)
            && self.rate.mbps() > 0
    }
}

/// Free-function form of [`CostModel::derive`]: `(c_LP, c_λ, c_TT per Gbps)`.
pub fn derive_costs(cm: &CostModel) -> (f64, f64, f64) {
    let d = cm.derive();
    (d.lightpath, d.wavelength, d.transit_per_gbps)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Survivability {
    None,
    SingleLayer,
    MultiDouble,
    MultiSpareUnprotected,
    MultiInterlayerBrs,
}

impl Survivability {
    pub const PROTECTED: [Survivability; 4] = [
        Survivability::SingleLayer,
        Survivability::MultiDouble,
        Survivability::MultiSpareUnprotected,
        Survivability::MultiInterlayerBrs,
    ];

    pub fn is_multilayer(self) -> bool {
        matches!(
            self,
            Survivability::MultiDouble
                | Survivability::MultiSpareUnprotected
                | Survivability::MultiInterlayerBrs
        )
    }

    /// Short name used in flags and file names.
    pub fn slug(self) -> &'static str {
        match self {
            Survivability::None => "none",
            Survivability::SingleLayer => "single",
            Survivability::MultiDouble => "double",
            Survivability::MultiSpareUnprotected => "spare-unprotected",
            Survivability::MultiInterlayerBrs => "brs",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Survivability::None => "No survivability",
            Survivability::SingleLayer => "Single layer",
            Survivability::MultiDouble => "Double protection",
            Survivability::MultiSpareUnprotected => "LSP spare unprotected",
            Survivability::MultiInterlayerBrs => "Interlayer BRS",
        }
    }

    pub fn from_slug(s: &str) -> Option<Survivability> {
        [Survivability::None]
            .into_iter()
            .chain(Survivability::PROTECTED)
            .find(|o| o.slug() == s)
    }
}

impl fmt::Display for Survivability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Approach {
    Sequential,
    Integrated,
}

impl Approach {
    pub fn slug(self) -> &'static str {
        match self {
            Approach::Sequential => "sequential",
            Approach::Integrated => "integrated",
        }
    }
}

impl fmt::Display for Approach {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignConfig {
    pub survivability: Survivability,
    pub approach: Approach,
    pub q_max: u8,
    /// Interface limit per router.
    pub interfaces: u32,
    /// Relative optimality gap, e.g. 0.03.
    pub optimality_gap: f64,
    /// Global wall-clock budget in seconds.
    pub time_limit: f64,
    /// Count protection traffic as transit only at intermediate routers.
    /// When false the transit term subtracts the LSP bandwidth once at the
    /// destination even though both working and protection paths end there.
    pub transit_double_count_correction: bool,
    /// Retry an infeasible stage once with `q_max + 1`.
    pub auto_grow_q: bool,
}

impl DesignConfig {
    pub const DEFAULT_Q_MAX: u8 = 2;
    pub const DEFAULT_GAP: f64 = 0.03;
    pub const DEFAULT_TIME_LIMIT: f64 = 5.0 * 3600.0;

    pub fn default_interfaces(q_max: u8, nodes: usize) -> u32 {
        2 * q_max as u32 * (nodes.saturating_sub(1) as u32)
    }

    pub fn new(instance: &Instance, survivability: Survivability, approach: Approach) -> DesignConfig {
        let q_max = instance.q_max.unwrap_or(Self::DEFAULT_Q_MAX);
        DesignConfig {
            survivability,
            approach,
            q_max,
            interfaces: instance
                .interfaces
                .unwrap_or_else(|| Self::default_interfaces(q_max, instance.topology.node_count())),
            optimality_gap: Self::DEFAULT_GAP,
            time_limit: Self::DEFAULT_TIME_LIMIT,
            transit_double_count_correction: true,
            auto_grow_q: false,
        }
    }

    pub fn with_gap(mut self, gap: f64) -> DesignConfig {
        self.optimality_gap = gap;
        self
    }

    pub fn with_q_max(mut self, q_max: u8, nodes: usize) -> DesignConfig {
        self.q_max = q_max;
        self.interfaces = Self::default_interfaces(q_max, nodes);
        self
    }

    pub fn with_time_limit(mut self, secs: f64) -> DesignConfig {
        self.time_limit = secs;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FailureEvent {
    PhysicalLink { link: Link },
    /// Router and co-located OXC fail together.
    TransitNode { node: NodeId },
    /// The interface terminating `lightpath` at `node`.
    Interface { lightpath: LightpathKey, node: NodeId },
}

impl fmt::Display for FailureEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FailureEvent::PhysicalLink { link } => write!(f, "link {link}"),
            FailureEvent::TransitNode { node } => write!(f, "node {node}"),
            FailureEvent::Interface { lightpath, node } => {
                write!(f, "interface {lightpath}@{node}")
            }
        }
    }
}

/// A design problem: physical network, traffic, and lightpath rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub topology: PhysicalTopology,
    pub traffic: TrafficMatrix,
    pub capacity: Bandwidth,
    pub q_max: Option<u8>,
    pub interfaces: Option<u32>,
}

impl Instance {
    pub fn new(topology: PhysicalTopology, traffic: TrafficMatrix) -> Instance {
        Instance {
            topology,
            traffic,
            capacity: Bandwidth(10_000),
            q_max: None,
            interfaces: None,
        }
    }

    /// Lightpath slots available under `q_max`: every ordered node pair.
    pub fn slots(&self, q_max: u8) -> Vec<LightpathKey> {
        let nodes: Vec<NodeId> = self.topology.nodes.iter().copied().collect();
        let mut out = Vec::new();
        for &i in &nodes {
            for &j in &nodes {
                if i == j {
                    continue;
                }
                for q in 1..=q_max {
                    out.push(LightpathKey { from: i, to: j, q });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: String,
    pub detail: String,
}

impl Violation {
    pub fn new(rule: impl Into<String>, detail: impl Into<String>) -> Violation {
        Violation { rule: rule.into(), detail: detail.into() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.rule, self.detail)
    }
}

/// Checks the instance and configuration. Violations are data; an empty
/// list means the pair is usable.
pub fn validate_instance(
    topo: &PhysicalTopology,
    traffic: &TrafficMatrix,
    capacity: Bandwidth,
    cfg: &DesignConfig,
) -> Vec<Violation> {
    let mut out = Vec::new();
    if topo.wavelengths < 1 {
        out.push(Violation::new("wavelengths", "W must be at least 1"));
    }
    for l in &topo.links {
        if l.a == l.b {
            out.push(Violation::new("self-loop", format!("link {l}")));
        }
        for n in [l.a, l.b] {
            if !topo.nodes.contains(&n) {
                out.push(Violation::new("unknown node", format!("link {l} references {n}")));
            }
        }
    }
    if capacity.mbps() == 0 {
        out.push(Violation::new("capacity", "C must be positive"));
    }
    let mut ids = BTreeSet::new();
    for d in &traffic.demands {
        if !ids.insert(d.id) {
            out.push(Violation::new("duplicate id", format!("LSP {}", d.id)));
        }
        if d.src == d.dst {
            out.push(Violation::new("s = d", format!("LSP {}", d.id)));
        } else if d.src > d.dst {
            out.push(Violation::new(
                "s > d",
                format!("LSP {} ({} -> {}); only the s < d half is stored", d.id, d.src, d.dst),
            ));
        }
        for n in [d.src, d.dst] {
            if !topo.nodes.contains(&n) {
                out.push(Violation::new("unknown node", format!("LSP {} references {n}", d.id)));
            }
        }
        if d.bandwidth.mbps() == 0 {
            out.push(Violation::new("b = 0", format!("LSP {}", d.id)));
        }
        if d.bandwidth > capacity {
            out.push(Violation::new(
                "b > C",
                format!("LSP {} needs {} Gbps, lightpath rate {} Gbps", d.id, d.bandwidth, capacity),
            ));
        }
    }
    if cfg.q_max < 1 {
        out.push(Violation::new("q_max", "q_max must be at least 1"));
    }
    if !(cfg.optimality_gap >= 0.0) {
        out.push(Violation::new("gap", "optimality gap must be >= 0"));
    }
    if !(cfg.time_limit > 0.0) {
        out.push(Violation::new("time limit", "time limit must be > 0"));
    }
    if cfg.survivability != Survivability::None && (topo.node_count() < 4 || !topo.is_biconnected()) {
        out.push(Violation::new(
            "not bi-connected",
            "protection routing needs a bi-connected topology of at least 4 nodes",
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d1() -> Instance {
        Instance::new(
            PhysicalTopology::ring(4, 32),
            TrafficMatrix::from_triples([(1, 3, 10.0)]),
        )
    }

    #[test]
    fn triangle_is_too_small_to_protect() {
        let inst = Instance::new(PhysicalTopology::ring(3, 8), TrafficMatrix::from_triples([(1, 2, 1.0)]));
        let cfg = DesignConfig::new(&inst, Survivability::SingleLayer, Approach::Sequential);
        let v = validate_instance(&inst.topology, &inst.traffic, inst.capacity, &cfg);
        assert_eq!(v[0].rule, "not bi-connected");
        let cfg = DesignConfig::new(&inst, Survivability::None, Approach::Sequential);
        assert!(validate_instance(&inst.topology, &inst.traffic, inst.capacity, &cfg).is_empty());
    }

    #[test]
    fn ring_is_valid() {
        let inst = d1();
        let cfg = DesignConfig::new(&inst, Survivability::SingleLayer, Approach::Sequential);
        assert!(validate_instance(&inst.topology, &inst.traffic, inst.capacity, &cfg).is_empty());
    }

    #[test]
    fn oversized_lsp_is_rejected() {
        let mut inst = d1();
        inst.traffic = TrafficMatrix::from_triples([(1, 3, 12.0)]);
        let cfg = DesignConfig::new(&inst, Survivability::None, Approach::Sequential);
        let v = validate_instance(&inst.topology, &inst.traffic, inst.capacity, &cfg);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].rule, "b > C");
    }

    #[test]
    fn path_graph_is_not_biconnected() {
        let topo = PhysicalTopology::new(1..=3, [(1, 2), (2, 3)], 32);
        let inst = Instance::new(topo, TrafficMatrix::from_triples([(1, 3, 1.0)]));
        let cfg = DesignConfig::new(&inst, Survivability::SingleLayer, Approach::Sequential);
        let v = validate_instance(&inst.topology, &inst.traffic, inst.capacity, &cfg);
        assert!(v.iter().any(|v| v.rule == "not bi-connected"));
        // Without survivability the same graph is fine.
        let cfg = DesignConfig::new(&inst, Survivability::None, Approach::Sequential);
        assert!(validate_instance(&inst.topology, &inst.traffic, inst.capacity, &cfg).is_empty());
    }

    #[test]
    fn validation_is_pure() {
        let mut inst = d1();
        inst.traffic = TrafficMatrix::from_triples([(3, 1, 12.0), (1, 1, 1.0)]);
        let cfg = DesignConfig::new(&inst, Survivability::SingleLayer, Approach::Sequential);
        let a = validate_instance(&inst.topology, &inst.traffic, inst.capacity, &cfg);
        let b = validate_instance(&inst.topology, &inst.traffic, inst.capacity, &cfg);
        assert_eq!(a, b);
        assert!(a.len() >= 3);
    }

    #[test]
    fn reference_cost_ratio() {
        let (lp, lambda, tt) = derive_costs(&CostModel::default());
        assert_eq!(lp, 17.0);
        assert_eq!(lambda, 3.0);
        assert!((tt - 0.8).abs() < 1e-12);
        let d = CostModel::default().derive();
        assert!((d.transit(Bandwidth::from_gbps(124.0).unwrap()) - 99.2).abs() < 1e-9);
    }

    #[test]
    fn unit_costs() {
        let cm = CostModel { ip_interface: 1.0, oxc_port: 1.0, transponder: 1.0, rate: Bandwidth(1000) };
        assert_eq!(derive_costs(&cm), (4.0, 4.0, 1.0));
    }

    #[test]
    fn complement_reverses_route() {
        let lp = Lightpath {
            key: LightpathKey::new(1, 3, 1),
            role: Role::WorkCarrier,
            route: vec![Hop::new(NodeId(1), NodeId(2)), Hop::new(NodeId(2), NodeId(3))],
        };
        let c = complement_route(&lp).unwrap();
        assert_eq!(c.key, LightpathKey::new(3, 1, 1));
        assert_eq!(c.route, vec![Hop::new(NodeId(3), NodeId(2)), Hop::new(NodeId(2), NodeId(1))]);
        assert_eq!(complement_route(&c).unwrap(), lp);

        let lp2 = Lightpath {
            key: LightpathKey::new(1, 3, 2),
            role: Role::SpareCarrier,
            route: vec![Hop::new(NodeId(1), NodeId(4)), Hop::new(NodeId(4), NodeId(3))],
        };
        let c2 = complement_route(&lp2).unwrap();
        assert_eq!(c2.route, vec![Hop::new(NodeId(3), NodeId(4)), Hop::new(NodeId(4), NodeId(1))]);
    }

    #[test]
    fn complement_of_unrouted_fails() {
        let lp = Lightpath::unrouted(LightpathKey::new(1, 2, 1), Role::WorkCarrier);
        assert!(complement_route(&lp).is_err());
    }

    #[test]
    fn default_interfaces_follow_q_and_n() {
        let inst = d1();
        let cfg = DesignConfig::new(&inst, Survivability::None, Approach::Sequential);
        assert_eq!(cfg.q_max, 2);
        assert_eq!(cfg.interfaces, 12);
        assert_eq!(cfg.optimality_gap, 0.03);
        assert_eq!(cfg.time_limit, 18000.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_route() -> impl Strategy<Value = Vec<Hop>> {
            proptest::collection::vec(1u32..20, 2..8).prop_map(|mut v| {
                v.dedup();
                if v.len() < 2 {
                    v.push(v[0] + 1);
                }
                v.windows(2).map(|w| Hop::new(NodeId(w[0]), NodeId(w[1]))).collect()
            })
        }

        proptest! {
            #[test]
            fn complement_is_involution(route in arb_route(), q in 1u8..4) {
                let from = route.first().unwrap().from;
                let to = route.last().unwrap().to;
                prop_assume!(from != to);
                let lp = Lightpath { key: LightpathKey { from, to, q }, role: Role::WorkCarrier, route };
                let c = complement_route(&lp).unwrap();
                prop_assert_eq!(c.route.len(), lp.route.len());
                prop_assert_eq!(c.route_links(), lp.route_links());
                prop_assert_eq!(complement_route(&c).unwrap(), lp);
            }
        }
    }
}
