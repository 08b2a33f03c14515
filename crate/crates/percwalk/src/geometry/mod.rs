//! Cluster geometry: the unweighted chemical metric `d1`, the weighted
//! metric `d1bar` with edge weights `t(e) = C_A ∧ mu_e^{-1/2}`, the trace
//! metric `d_Z`, ball comparisons, good/very-good ball audits, and the
//! renormalization block events.

mod blocks;
mod goodball;

pub use blocks::{block_event, BlockEdgeClass, BlockEvent};
pub use goodball::{
    good_ball, poincare_constant_rank_one_oracle, poincare_optimal_constant, poincare_ratio_of,
    very_good_scan, GoodBallConstants, GoodBallReport, VeryGoodScan, POINCARE_DENSE_CAP,
};

use crate::environment::{ClusterIndex, Environment};
use crate::error::{Error, Result};
use crate::lattice::Vertex;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::io::Write;

/// Which graph metric to compute.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MetricKind {
    /// Unweighted shortest path on `(C1, O1)`.
    D1,
    /// Shortest path on `(C1, O1)` with edge weights `c_a ∧ mu_e^{-1/2}`.
    D1Bar { c_a: f64 },
    /// Unweighted shortest path on the trace graph `(C2, E_Z)`.
    Dz,
}

impl MetricKind {
    fn in_carrier(&self, index: &ClusterIndex, id: u32) -> bool {
        match self {
            MetricKind::D1 | MetricKind::D1Bar { .. } => index.in_c1(id),
            MetricKind::Dz => index.in_c2(id),
        }
    }
}

pub(crate) const UNREACHED: f64 = f64::INFINITY;

/// Edge weight for the weighted chemical metric.
#[inline]
pub fn metric_edge_weight(c_a: f64, mu: f64) -> f64 {
    debug_assert!(mu > 0.0);
    c_a.min(1.0 / mu.sqrt())
}

#[derive(Copy, Clone, PartialEq)]
struct HeapItem {
    dist: f64,
    id: u32,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on (dist, id) through BinaryHeap's max ordering
        other
            .dist
            .total_cmp(&self.dist)
            .then(other.id.cmp(&self.id))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source distances to every carrier vertex within `cutoff`;
/// `f64::INFINITY` elsewhere.
pub fn distance_map(
    kind: MetricKind,
    env: &Environment,
    index: &ClusterIndex,
    source: u32,
    cutoff: f64,
) -> Vec<f64> {
    let n = env.vertices().len();
    let mut dist = vec![UNREACHED; n];
    dist[source as usize] = 0.0;
    match kind {
        MetricKind::D1 | MetricKind::Dz => {
            let adj = match kind {
                MetricKind::D1 => &index.adj_o1,
                _ => &index.adj_z,
            };
            let mut frontier = vec![source];
            let mut level = 0.0;
            while !frontier.is_empty() && level < cutoff {
                level += 1.0;
                let mut next = Vec::new();
                for &v in &frontier {
                    for (u, _) in adj.neighbors(v) {
                        if dist[u as usize].is_infinite() && kind.in_carrier(index, u) {
                            dist[u as usize] = level;
                            next.push(u);
                        }
                    }
                }
                frontier = next;
            }
        }
        MetricKind::D1Bar { c_a } => {
            let mut heap = BinaryHeap::new();
            heap.push(HeapItem { dist: 0.0, id: source });
            while let Some(HeapItem { dist: d, id: v }) = heap.pop() {
                if d > dist[v as usize] {
                    continue;
                }
                for (u, mu) in index.adj_o1.neighbors(v) {
                    if !index.in_c1(u) {
                        continue;
                    }
                    let nd = d + metric_edge_weight(c_a, mu);
                    if nd < dist[u as usize] && nd <= cutoff {
                        dist[u as usize] = nd;
                        heap.push(HeapItem { dist: nd, id: u });
                    }
                }
            }
        }
    }
    dist
}

/// Distance between carrier vertices; `None` when `y` is unreachable from
/// `x` inside the materialized window.
pub fn distance(
    kind: MetricKind,
    env: &Environment,
    index: &ClusterIndex,
    x: &Vertex,
    y: &Vertex,
) -> Result<Option<f64>> {
    let ix = env
        .vertex_id(x)
        .filter(|&i| kind.in_carrier(index, i))
        .ok_or(Error::CarrierMembership(*x))?;
    let iy = env
        .vertex_id(y)
        .filter(|&i| kind.in_carrier(index, i))
        .ok_or(Error::CarrierMembership(*y))?;
    let map = distance_map(kind, env, index, ix, f64::INFINITY);
    let d = map[iy as usize];
    Ok(if d.is_finite() { Some(d) } else { None })
}

/// Closed metric ball: ids of carrier vertices within distance `r` of `x`,
/// ascending.
pub fn ball(
    kind: MetricKind,
    env: &Environment,
    index: &ClusterIndex,
    x: &Vertex,
    r: f64,
) -> Result<Vec<u32>> {
    let ix = env
        .vertex_id(x)
        .filter(|&i| kind.in_carrier(index, i))
        .ok_or(Error::CarrierMembership(*x))?;
    if r < 0.0 {
        return Err(Error::InvalidArgument("ball radius must be >= 0".into()));
    }
    let map = distance_map(kind, env, index, ix, r);
    Ok((0..map.len() as u32).filter(|&i| map[i as usize] <= r).collect())
}

/// CSV emitter: one `x,y,distance` row per pair ("unreachable" for pairs in
/// different components).
pub fn write_distance_table<W: Write>(
    kind: MetricKind,
    env: &Environment,
    index: &ClusterIndex,
    pairs: &[(Vertex, Vertex)],
    mut out: W,
) -> Result<()> {
    writeln!(out, "x,y,distance")?;
    for (x, y) in pairs {
        let d = distance(kind, env, index, x, y)?;
        let cell = match d {
            Some(v) => format!("{v}"),
            None => "unreachable".to_string(),
        };
        writeln!(out, "{},{},{}", coord_key(x), coord_key(y), cell)?;
    }
    Ok(())
}

/// CSV emitter for good-ball audits: `x,R,cond1..cond5,poincare_const`.
pub fn write_good_ball_audit<W: Write>(reports: &[GoodBallReport], mut out: W) -> Result<()> {
    writeln!(out, "x,R,cond1,cond2,cond3,cond4,cond5,poincare_const")?;
    for r in reports {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            coord_key(&r.center),
            r.radius,
            r.gp1,
            r.gp2,
            r.gp3,
            r.gp4,
            r.poincare,
            r.poincare_optimal
        )?;
    }
    Ok(())
}

fn coord_key(v: &Vertex) -> String {
    v.coords()
        .iter()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{build_cluster_index, sample_environment, ConductanceLaw};
    use crate::lattice::DomainSpec;

    fn world(law: ConductanceLaw, window: i32, seed: u64, k: f64) -> (Environment, ClusterIndex) {
        let env =
            sample_environment(DomainSpec::FullLattice { d: 2 }, window, law, seed, Some(k))
                .unwrap();
        let index = build_cluster_index(&env).unwrap();
        (env, index)
    }

    #[test]
    fn constant_metrics_equal_l1() {
        let (env, index) = world(ConductanceLaw::Constant { w: 1.0 }, 6, 1, 2.0);
        let x = Vertex::new(&[0, 0]);
        for y in [Vertex::new(&[3, 2]), Vertex::new(&[-4, 1]), Vertex::new(&[0, -5])] {
            let d1 = distance(MetricKind::D1, &env, &index, &x, &y).unwrap().unwrap();
            let db = distance(MetricKind::D1Bar { c_a: 1.0 }, &env, &index, &x, &y)
                .unwrap()
                .unwrap();
            assert_eq!(d1, x.l1_dist(&y) as f64);
            assert_eq!(db, d1);
        }
    }

    #[test]
    fn heavy_edge_contributes_half() {
        assert_eq!(metric_edge_weight(1.0, 4.0), 0.5);
        assert_eq!(metric_edge_weight(1.0, 1.0), 1.0);
        assert_eq!(metric_edge_weight(0.25, 1.0), 0.25);
    }

    #[test]
    fn weighted_distance_matches_dense_dijkstra_oracle() {
        let law = ConductanceLaw::UniformOnInterval { a: 0.5, b: 6.0, p1: 0.85 };
        let (env, index) = world(law, 8, 42, 8.0);
        let c_a = 1.0;
        // oracle: Bellman-Ford style relaxation over the materialized graph
        let n = env.vertices().len();
        let src = env.vertex_id(&Vertex::new(&[0, 0])).unwrap();
        if !index.in_c1(src) {
            return; // origin off-cluster for this seed; nothing to compare
        }
        let mut dist = vec![f64::INFINITY; n];
        dist[src as usize] = 0.0;
        loop {
            let mut changed = false;
            for rec in env.edges() {
                if rec.weight <= 0.0 || !index.in_c1(rec.a) || !index.in_c1(rec.b) {
                    continue;
                }
                let w = metric_edge_weight(c_a, rec.weight);
                if dist[rec.a as usize] + w < dist[rec.b as usize] {
                    dist[rec.b as usize] = dist[rec.a as usize] + w;
                    changed = true;
                }
                if dist[rec.b as usize] + w < dist[rec.a as usize] {
                    dist[rec.a as usize] = dist[rec.b as usize] + w;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let map = distance_map(MetricKind::D1Bar { c_a }, &env, &index, src, f64::INFINITY);
        for i in 0..n {
            if index.in_c1(i as u32) {
                let (a, b) = (map[i], dist[i]);
                assert!(
                    (a.is_infinite() && b.is_infinite()) || (a - b).abs() <= 1e-12,
                    "vertex {i}: dijkstra {a} oracle {b}"
                );
            }
        }
    }

    #[test]
    fn dbar_bounded_by_ca_d1() {
        let law = ConductanceLaw::ParetoLowerBounded { c: 1.0, exponent: 1.5, p1: 0.8 };
        let (env, index) = world(law, 8, 9, 8.0);
        let ids = index.c1_vertices_within(&env, 6);
        let src = ids[ids.len() / 2];
        let c_a = 0.7;
        let d1 = distance_map(MetricKind::D1, &env, &index, src, f64::INFINITY);
        let db = distance_map(MetricKind::D1Bar { c_a }, &env, &index, src, f64::INFINITY);
        for &i in &ids {
            if d1[i as usize].is_finite() {
                assert!(db[i as usize] <= c_a * d1[i as usize] + 1e-12);
            }
        }
    }

    #[test]
    fn dz_dominated_by_dbar_over_kappa() {
        // dbar >= (c_a ∧ K^{-1/2}) * d_Z on C2
        let law = ConductanceLaw::ParetoLowerBounded { c: 1.0, exponent: 1.5, p1: 0.8 };
        let (env, index) = world(law, 10, 23, 4.0);
        let c_a = 1.0f64;
        let kappa = c_a.min(1.0 / env.truncation().sqrt());
        let c2: Vec<u32> = (0..env.vertices().len() as u32)
            .filter(|&i| index.in_c2(i) && env.vertex(i).linf_norm() <= 6)
            .collect();
        if c2.is_empty() {
            return;
        }
        let src = c2[0];
        let dz = distance_map(MetricKind::Dz, &env, &index, src, f64::INFINITY);
        let db = distance_map(MetricKind::D1Bar { c_a }, &env, &index, src, f64::INFINITY);
        for &i in &c2 {
            if dz[i as usize].is_finite() {
                assert!(
                    db[i as usize] + 1e-12 >= kappa * dz[i as usize],
                    "vertex {i}: dbar {} dz {}",
                    db[i as usize],
                    dz[i as usize]
                );
            }
        }
    }

    #[test]
    fn metric_axioms_hold() {
        let law = ConductanceLaw::Bernoulli { p1: 0.7 };
        let (env, index) = world(law, 8, 5, 2.0);
        let ids = index.c1_vertices_within(&env, 4);
        let sample: Vec<u32> = ids.iter().copied().step_by(3).take(8).collect();
        for kind in [MetricKind::D1, MetricKind::D1Bar { c_a: 1.0 }] {
            let maps: Vec<Vec<f64>> = sample
                .iter()
                .map(|&s| distance_map(kind, &env, &index, s, f64::INFINITY))
                .collect();
            for (i, &a) in sample.iter().enumerate() {
                for (j, &b) in sample.iter().enumerate() {
                    let dab = maps[i][b as usize];
                    let dba = maps[j][a as usize];
                    assert!((dab - dba).abs() <= 1e-12, "symmetry");
                    for (k, _) in sample.iter().enumerate() {
                        let via = maps[i][sample[k] as usize] + maps[k][b as usize];
                        assert!(dab <= via + 1e-12, "triangle");
                    }
                }
            }
        }
    }

    #[test]
    fn ball_basics() {
        let (env, index) = world(ConductanceLaw::Constant { w: 1.0 }, 5, 1, 2.0);
        let x = Vertex::new(&[0, 0]);
        let b0 = ball(MetricKind::D1, &env, &index, &x, 0.0).unwrap();
        assert_eq!(b0, vec![env.vertex_id(&x).unwrap()]);
        let b2 = ball(MetricKind::D1, &env, &index, &x, 2.0).unwrap();
        // l1 ball of radius 2 in Z^2 has 13 points
        assert_eq!(b2.len(), 13);
        let b3 = ball(MetricKind::D1, &env, &index, &x, 3.0).unwrap();
        assert!(b3.len() > b2.len());
        assert!(b2.iter().all(|i| b3.contains(i)), "monotone in R");
    }

    #[test]
    fn carrier_membership_is_enforced() {
        let (env, index) = world(ConductanceLaw::Bernoulli { p1: 0.7 }, 6, 5, 2.0);
        // find a vertex off the cluster proxy
        let off = (0..env.vertices().len() as u32).find(|&i| !index.in_c1(i));
        if let Some(off) = off {
            let v = env.vertex(off);
            let x = env.vertex(index.c1_vertices_within(&env, 3)[0]);
            assert!(matches!(
                distance(MetricKind::D1, &env, &index, &x, &v),
                Err(Error::CarrierMembership(_))
            ));
        }
    }
}
