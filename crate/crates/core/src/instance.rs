//! Instance file format.
//!
//! ```json
//! {
//!   "nodes": [1, 2, 3, 4],
//!   "links": [[1, 2], [2, 3], [3, 4], [4, 1]],
//!   "W": 32,
//!   "C": 10,
//!   "q_max": 2,
//!   "T": 12,
//!   "demands": [{ "id": 1, "s": 1, "d": 3, "b": 10 }]
//! }
//! ```
//!
//! Bandwidths are decimal Gbps. `q_max`, `T` and demand `id` are optional.
//! Unknown fields are rejected.

use serde::{Deserialize, Serialize};

use crate::model::{
    Bandwidth, Instance, Link, LspDemand, LspId, NodeId, PhysicalTopology, TrafficMatrix,
};
use crate::Error;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    nodes: Vec<u32>,
    links: Vec<(u32, u32)>,
    #[serde(rename = "W")]
    wavelengths: u32,
    #[serde(rename = "C")]
    capacity: Bandwidth,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q_max: Option<u8>,
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    interfaces: Option<u32>,
    demands: Vec<DemandEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DemandEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    id: Option<u32>,
    s: u32,
    d: u32,
    b: Bandwidth,
}

pub fn parse_instance(text: &str) -> Result<Instance, Error> {
    let file: InstanceFile =
        serde_json::from_str(text).map_err(|e| Error::InstanceFormat(e.to_string()))?;
    let mut links = std::collections::BTreeSet::new();
    for &(a, b) in &file.links {
        if a == b {
            return Err(Error::InstanceFormat(format!("self-loop on node {a}")));
        }
        if !links.insert(Link::new(NodeId(a), NodeId(b))) {
            return Err(Error::InstanceFormat(format!("parallel link {a}-{b}")));
        }
    }
    let topology = PhysicalTopology {
        nodes: file.nodes.iter().copied().map(NodeId).collect(),
        links,
        wavelengths: file.wavelengths,
    };
    let demands = file
        .demands
        .iter()
        .enumerate()
        .map(|(k, e)| LspDemand {
            id: LspId(e.id.unwrap_or(k as u32 + 1)),
            src: NodeId(e.s),
            dst: NodeId(e.d),
            bandwidth: e.b,
        })
        .collect();
    Ok(Instance {
        topology,
        traffic: TrafficMatrix { demands },
        capacity: file.capacity,
        q_max: file.q_max,
        interfaces: file.interfaces,
    })
}

pub fn instance_to_string(inst: &Instance) -> String {
    let file = InstanceFile {
        nodes: inst.topology.nodes.iter().map(|n| n.0).collect(),
        links: inst.topology.links.iter().map(|l| (l.a.0, l.b.0)).collect(),
        wavelengths: inst.topology.wavelengths,
        capacity: inst.capacity,
        q_max: inst.q_max,
        interfaces: inst.interfaces,
        demands: inst
            .traffic
            .demands
            .iter()
            .map(|d| DemandEntry { id: Some(d.id.0), s: d.src.0, d: d.dst.0, b: d.bandwidth })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("instance serializes");
    s.push('\n');
    s
}

/// SHA-256 of the canonical serialization, hex encoded.
pub fn instance_hash(inst: &Instance) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(instance_to_string(inst).as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const D1: &str = r#"{
        "nodes": [1, 2, 3, 4],
        "links": [[1, 2], [2, 3], [3, 4], [4, 1]],
        "W": 32, "C": 10,
        "demands": [{ "s": 1, "d": 3, "b": 10 }]
    }"#;

    #[test]
    fn parses_minimal_file() {
        let inst = parse_instance(D1).unwrap();
        assert_eq!(inst.topology.links.len(), 4);
        assert_eq!(inst.capacity, Bandwidth(10_000));
        assert_eq!(inst.traffic.demands[0].id, LspId(1));
        assert_eq!(inst.q_max, None);
    }

    #[test]
    fn rejects_unknown_fields() {
        let text = D1.replace("\"W\": 32", "\"W\": 32, \"fibres\": 3");
        assert!(matches!(parse_instance(&text), Err(Error::InstanceFormat(_))));
        let text = D1.replace("\"b\": 10", "\"b\": 10, \"prio\": 1");
        assert!(parse_instance(&text).is_err());
    }

    #[test]
    fn rejects_parallel_links() {
        let text = D1.replace("[4, 1]", "[4, 1], [1, 4]");
        assert!(parse_instance(&text).is_err());
    }

    #[test]
    fn round_trips() {
        let inst = parse_instance(D1).unwrap();
        let text = instance_to_string(&inst);
        assert_eq!(parse_instance(&text).unwrap(), inst);
        assert_eq!(instance_hash(&inst), instance_hash(&parse_instance(&text).unwrap()));
    }
}
