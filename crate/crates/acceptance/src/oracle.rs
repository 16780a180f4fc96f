//! Brute-force enumerator for the working-MPLS stage and the single-layer
//! sequential design. Written against the instance alone: no builder, no
//! solver. Later stages are conditioned on the earlier stages' decisions
//! taken from a design, since ties upstream change what is optimal
//! downstream.

use std::collections::{BTreeMap, BTreeSet};

use otn_design::design::Design;
use otn_design::{Instance, Role};

/// Unit prices from first principles: IP interface 8, OXC port 0.5,
/// transponder 1, lightpath rate 10 Gbps.
pub const LIGHTPATH: f64 = 2.0 * (8.0 + 0.5);
pub const WAVELENGTH: f64 = 2.0 * (0.5 + 1.0);
pub const TRANSIT_PER_MBPS: f64 = 8.0 / 10.0 / 1000.0;

type Arc = (u32, u32);

#[derive(Clone, Copy)]
struct Demand {
    id: u32,
    s: u32,
    d: u32,
    mbps: u64,
}

fn demands(inst: &Instance) -> Vec<Demand> {
    inst.traffic
        .demands
        .iter()
        .map(|d| Demand { id: d.id.0, s: d.src.0, d: d.dst.0, mbps: d.bandwidth.mbps() })
        .collect()
}

/// Every simple node sequence s → d whose intermediate nodes pass `ok`
/// and whose consecutive pairs pass `arc_ok`.
fn simple_paths(nodes: &[u32], s: u32, d: u32, ok: &dyn Fn(u32) -> bool, arc_ok: &dyn Fn(u32, u32) -> bool) -> Vec<Vec<u32>> {
    fn go(
        nodes: &[u32],
        at: u32,
        d: u32,
        path: &mut Vec<u32>,
        ok: &dyn Fn(u32) -> bool,
        arc_ok: &dyn Fn(u32, u32) -> bool,
        out: &mut Vec<Vec<u32>>,
    ) {
        if at == d {
            out.push(path.clone());
            return;
        }
        for &n in nodes {
            if path.contains(&n) || !arc_ok(at, n) || (n != d && !ok(n)) {
                continue;
            }
            path.push(n);
            go(nodes, n, d, path, ok, arc_ok, out);
            path.pop();
        }
    }
    let mut out = Vec::new();
    go(nodes, s, d, &mut vec![s], ok, arc_ok, &mut out);
    out
}

fn arcs_of(path: &[u32]) -> Vec<Arc> {
    path.windows(2).map(|w| (w[0], w[1])).collect()
}

fn transit(d: &Demand, path: &[u32]) -> f64 {
    TRANSIT_PER_MBPS * d.mbps as f64 * (path.len() as f64 - 2.0)
}

/// Cheapest assignment of one logical path per demand, where `cost` prices
/// the union of arcs and `fits` checks loads and interface counts.
fn best_logical(
    options: &[Vec<Vec<u32>>],
    ds: &[Demand],
    fits: &dyn Fn(&BTreeMap<Arc, u64>) -> bool,
) -> Option<f64> {
    let mut best: Option<f64> = None;
    let mut idx = vec![0usize; options.len()];
    if options.iter().any(|o| o.is_empty()) {
        return None;
    }
    loop {
        let mut load: BTreeMap<Arc, u64> = BTreeMap::new();
        let mut cost = 0.0;
        for (k, &i) in idx.iter().enumerate() {
            let p = &options[k][i];
            for a in arcs_of(p) {
                *load.entry(a).or_default() += ds[k].mbps;
            }
            cost += transit(&ds[k], p);
        }
        cost += LIGHTPATH * load.len() as f64;
        if fits(&load) && best.is_none_or(|b| cost < b - 1e-9) {
            best = Some(cost);
        }
        // Next combination.
        let mut k = 0;
        loop {
            if k == idx.len() {
                return best;
            }
            idx[k] += 1;
            if idx[k] < options[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

fn degree_ok(arcs: impl Iterator<Item = Arc>, limit: u32) -> bool {
    let mut out: BTreeMap<u32, u32> = BTreeMap::new();
    let mut inn: BTreeMap<u32, u32> = BTreeMap::new();
    for (a, b) in arcs {
        *out.entry(a).or_default() += 1;
        *inn.entry(b).or_default() += 1;
    }
    out.values().chain(inn.values()).all(|&c| c <= limit)
}

/// Optimal working-stage objective with one lightpath per ordered node pair.
pub fn working_stage(inst: &Instance, interfaces: u32) -> Option<f64> {
    let nodes: Vec<u32> = inst.topology.nodes.iter().map(|n| n.0).collect();
    let ds = demands(inst);
    let c = inst.capacity.mbps();
    let options: Vec<Vec<Vec<u32>>> =
        ds.iter().map(|d| simple_paths(&nodes, d.s, d.d, &|_| true, &|_, _| true)).collect();
    best_logical(&options, &ds, &|load| load.values().all(|&l| l <= c) && degree_ok(load.keys().copied(), interfaces))
}

/// Optimal single-layer protection stage given the working design: each
/// demand gets a path over node pairs left free, avoiding its working
/// transit routers.
pub fn protection_stage(inst: &Instance, working: &Design, interfaces: u32) -> Option<f64> {
    let nodes: Vec<u32> = inst.topology.nodes.iter().map(|n| n.0).collect();
    let ds = demands(inst);
    let c = inst.capacity.mbps();
    let used: BTreeSet<Arc> = working
        .logical
        .lightpaths
        .iter()
        .filter(|lp| lp.role == Role::WorkCarrier)
        .map(|lp| (lp.key.from.0, lp.key.to.0)).collect();
    let options: Vec<Vec<Vec<u32>>> = ds
        .iter()
        .map(|d| {
            let r = working.lsps.iter().find(|r| r.lsp.0 == d.id).expect("every demand is routed");
            let transit: BTreeSet<u32> = r.working.iter().skip(1).map(|k| k.from.0).collect();
            simple_paths(&nodes, d.s, d.d, &|n| !transit.contains(&n), &|a, b| !used.contains(&(a, b)))
        })
        .collect();
    best_logical(&options, &ds, &|load| {
        load.values().all(|&l| l <= c) && degree_ok(load.keys().copied().chain(used.iter().copied()), interfaces)
    })
}

fn link(a: u32, b: u32) -> (u32, u32) {
    (a.min(b), a.max(b))
}

/// Optimal single-layer carrier routing given the logical design: every
/// carrier gets a physical path, links hold at most W wavelengths, and each
/// protected demand's working and protection carriers share no link and no
/// node other than the demand's end points.
pub fn routing_stage(inst: &Instance, logical: &Design) -> Option<f64> {
    let nodes: Vec<u32> = inst.topology.nodes.iter().map(|n| n.0).collect();
    let has = |a: u32, b: u32| inst.topology.links.iter().any(|l| (l.a.0, l.b.0) == link(a, b));
    let carriers: Vec<(u32, u32, u8)> = logical
        .logical
        .lightpaths
        .iter()
        .filter(|lp| lp.role != Role::OpticalProtection)
        .map(|lp| (lp.key.from.0, lp.key.to.0, lp.key.q))
        .collect();
    let mut paths: Vec<Vec<Vec<u32>>> =
        carriers.iter().map(|&(a, b, _)| simple_paths(&nodes, a, b, &|_| true, &has)).collect();
    for p in &mut paths {
        p.sort_by_key(|x| x.len());
    }
    // (working carrier index, spare carrier index, allowed shared nodes)
    let pos = |from: u32, to: u32, q: u8| carriers.iter().position(|&c| c == (from, to, q)).expect("carrier exists");
    let mut pairs: Vec<(usize, usize, BTreeSet<u32>)> = Vec::new();
    for r in &logical.lsps {
        let Some(p) = &r.protection else { continue };
        let ends: BTreeSet<u32> = [r.working[0].from.0, r.working[r.working.len() - 1].to.0].into();
        for w in &r.working {
            for s in p {
                pairs.push((pos(w.from.0, w.to.0, w.q), pos(s.from.0, s.to.0, s.q), ends.clone()));
            }
        }
    }
    let w = inst.topology.wavelengths;

    struct Search<'a> {
        paths: &'a [Vec<Vec<u32>>],
        pairs: &'a [(usize, usize, BTreeSet<u32>)],
        w: u32,
        choice: Vec<usize>,
        best: Option<f64>,
    }
    impl Search<'_> {
        fn ok(&self, upto: usize) -> bool {
            let mut load: BTreeMap<(u32, u32), u32> = BTreeMap::new();
            for k in 0..=upto {
                for h in self.paths[k][self.choice[k]].windows(2) {
                    *load.entry(link(h[0], h[1])).or_default() += 1;
                }
            }
            if load.values().any(|&l| l > self.w) {
                return false;
            }
            for (a, b, ends) in self.pairs {
                if *a > upto || *b > upto {
                    continue;
                }
                let pa = &self.paths[*a][self.choice[*a]];
                let pb = &self.paths[*b][self.choice[*b]];
                let la: BTreeSet<_> = pa.windows(2).map(|h| link(h[0], h[1])).collect();
                if pb.windows(2).any(|h| la.contains(&link(h[0], h[1]))) {
                    return false;
                }
                if pa.iter().any(|n| pb.contains(n) && !ends.contains(n)) {
                    return false;
                }
            }
            true
        }

        fn go(&mut self, k: usize, hops: usize) {
            if k == self.paths.len() {
                let cost = WAVELENGTH * hops as f64;
                if self.best.is_none_or(|b| cost < b) {
                    self.best = Some(cost);
                }
                return;
            }
            let rest: usize = self.paths[k..].iter().map(|p| p[0].len() - 1).sum();
            if self.best.is_some_and(|b| WAVELENGTH * (hops + rest) as f64 >= b) {
                return;
            }
            for i in 0..self.paths[k].len() {
                self.choice[k] = i;
                if self.ok(k) {
                    let h = self.paths[k][i].len() - 1;
                    self.go(k + 1, hops + h);
                }
            }
        }
    }
    if paths.iter().any(|p| p.is_empty()) {
        return None;
    }
    let mut s = Search { paths: &paths, pairs: &pairs, w, choice: vec![0; paths.len()], best: None };
    s.go(0, 0);
    s.best
}
