//! Deterministic synthetic instances: rings, rings with chords, meshes.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::{Bandwidth, Instance, LspDemand, LspId, NodeId, PhysicalTopology, TrafficMatrix};

pub const DEFAULT_WAVELENGTHS: u32 = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TopologyKind {
    Ring,
    RingPlusChords,
    Mesh,
}

impl FromStr for TopologyKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ring" => Ok(TopologyKind::Ring),
            "ring_plus_chords" | "chords" => Ok(TopologyKind::RingPlusChords),
            "mesh" => Ok(TopologyKind::Mesh),
            _ => Err(format!("unknown topology kind {s:?} (ring, ring_plus_chords, mesh)")),
        }
    }
}

impl fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TopologyKind::Ring => "ring",
            TopologyKind::RingPlusChords => "ring_plus_chords",
            TopologyKind::Mesh => "mesh",
        })
    }
}

/// Demand bandwidths in Gbps: one value for every demand, or a list drawn
/// from uniformly at random.
#[derive(Debug, Clone, PartialEq)]
pub enum DemandProfile {
    Uniform(Bandwidth),
    Mixed(Vec<Bandwidth>),
}

impl FromStr for DemandProfile {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let values = s
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .ok()
                    .and_then(Bandwidth::from_gbps)
                    .filter(|b| b.mbps() > 0)
                    .ok_or_else(|| format!("invalid bandwidth {v:?} in profile {s:?}"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        match values.as_slice() {
            [b] => Ok(DemandProfile::Uniform(*b)),
            _ => Ok(DemandProfile::Mixed(values)),
        }
    }
}

impl fmt::Display for DemandProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DemandProfile::Uniform(b) => write!(f, "{b}"),
            DemandProfile::Mixed(v) => {
                let s: Vec<String> = v.iter().map(|b| b.to_string()).collect();
                f.write_str(&s.join(","))
            }
        }
    }
}

/// `kind:n:profile:seed[:demands]`, e.g. `mesh:7:2,4,6:3:8`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub kind: TopologyKind,
    pub nodes: u32,
    pub profile: DemandProfile,
    pub seed: u64,
    /// Number of demands; defaults to 1.
    pub demands: usize,
    pub wavelengths: u32,
}

impl FromStr for GeneratorSpec {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if !(4..=5).contains(&parts.len()) {
            return Err(format!("expected kind:n:profile:seed[:demands], got {s:?}"));
        }
        let num = |v: &str, what: &str| v.parse::<u64>().map_err(|_| format!("invalid {what} {v:?}"));
        Ok(GeneratorSpec {
            kind: parts[0].parse()?,
            nodes: num(parts[1], "node count")? as u32,
            profile: parts[2].parse()?,
            seed: num(parts[3], "seed")?,
            demands: parts.get(4).map(|v| num(v, "demand count")).transpose()?.unwrap_or(1) as usize,
            wavelengths: DEFAULT_WAVELENGTHS,
        })
    }
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}:{}:{}", self.kind, self.nodes, self.profile, self.seed, self.demands)
    }
}

fn hop_distances(topo: &PhysicalTopology, from: NodeId) -> Vec<(NodeId, usize)> {
    let mut dist = vec![(from, 0)];
    let mut seen = BTreeSet::from([from]);
    let mut queue = VecDeque::from([(from, 0)]);
    while let Some((n, d)) = queue.pop_front() {
        for m in topo.neighbors(n) {
            if seen.insert(m) {
                dist.push((m, d + 1));
                queue.push_back((m, d + 1));
            }
        }
    }
    dist
}

/// Builds an instance. The topology is a ring 1..n plus chords, so it is
/// bi-connected for n ≥ 3. Demands go between the node pairs farthest
/// apart in hops, ties broken by (s, d), oriented s < d.
pub fn generate_instance(spec: &GeneratorSpec) -> Result<Instance, String> {
    let n = spec.nodes;
    if n < 3 {
        return Err(format!("need at least 3 nodes, got {n}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut topo = PhysicalTopology::ring(n, spec.wavelengths);
    let target = match spec.kind {
        TopologyKind::Ring => 0,
        TopologyKind::RingPlusChords => (n as usize / 4).max(1),
        TopologyKind::Mesh => (3 * n as usize).div_ceil(2) - n as usize,
    };
    let mut candidates: Vec<(u32, u32)> = (1..=n)
        .flat_map(|a| (a + 1..=n).map(move |b| (a, b)))
        .filter(|&(a, b)| !topo.has_link(NodeId(a), NodeId(b)))
        .collect();
    candidates.shuffle(&mut rng);
    for (a, b) in candidates.into_iter().take(target) {
        topo.links.insert(crate::model::Link::new(NodeId(a), NodeId(b)));
    }

    let mut pairs: Vec<(usize, NodeId, NodeId)> = Vec::new();
    for &s in &topo.nodes {
        for (d, dist) in hop_distances(&topo, s) {
            if s < d {
                pairs.push((dist, s, d));
            }
        }
    }
    pairs.sort_by(|x, y| y.0.cmp(&x.0).then((x.1, x.2).cmp(&(y.1, y.2))));
    if spec.demands > pairs.len() {
        return Err(format!("{} demands requested, only {} node pairs", spec.demands, pairs.len()));
    }
    let demands = pairs
        .into_iter()
        .take(spec.demands)
        .enumerate()
        .map(|(i, (_, src, dst))| LspDemand {
            id: LspId(i as u32 + 1),
            src,
            dst,
            bandwidth: match &spec.profile {
                DemandProfile::Uniform(b) => *b,
                DemandProfile::Mixed(v) => *v.choose(&mut rng).expect("profile is non-empty"),
            },
        })
        .collect();
    Ok(Instance::new(topo, TrafficMatrix { demands }))
}
