//! Graphviz export of the physical topology with an optional logical
//! overlay.

use std::fmt::Write as _;

use otn_design::design::Design;
use otn_design::{Instance, Role};

pub fn export_dot(inst: &Instance, design: Option<&Design>) -> String {
    let mut out = String::from("graph otn {\n  node [shape=circle];\n");
    for n in &inst.topology.nodes {
        let _ = writeln!(out, "  {n};");
    }
    for l in &inst.topology.links {
        let _ = writeln!(out, "  {} -- {} [color=gray, penwidth=2];", l.a, l.b);
    }
    if let Some(d) = design {
        for lp in &d.logical.lightpaths {
            let (style, color) = match lp.role {
                Role::WorkCarrier => ("solid", "blue"),
                Role::SpareCarrier => ("dashed", "darkgreen"),
                Role::OpticalProtection => ("dotted", "red"),
            };
            let route: Vec<String> = lp.route_nodes().iter().map(|n| n.to_string()).collect();
            let _ = writeln!(
                out,
                "  {} -- {} [dir=forward, style={style}, color={color}, label=\"{:?} q{} via {}\"];",
                lp.key.from,
                lp.key.to,
                lp.role,
                lp.key.q,
                route.join("-")
            );
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use otn_design::{Approach, PhysicalTopology, Survivability, TrafficMatrix};

    #[test]
    fn ring_exports_four_nodes_and_edges() {
        let inst = Instance::new(PhysicalTopology::ring(4, 8), TrafficMatrix::from_triples([]));
        let dot = export_dot(&inst, None);
        assert_eq!(dot.matches(" -- ").count(), 4);
        assert_eq!(dot.lines().filter(|l| l.trim().ends_with(';') && !l.contains("--") && !l.contains('[')).count(), 4);
        let empty = Design::empty(Survivability::None, Approach::Sequential, 0);
        assert_eq!(export_dot(&inst, Some(&empty)), dot);
    }
}
