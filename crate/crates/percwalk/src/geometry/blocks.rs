//! Renormalization block events: crossing clusters for `Q_L(x)` inside
//! `Q~_{3L}(x)`, attachment of all long paths to the crossing cluster, and
//! the companion no-singular-edges event.

use crate::environment::{ClusterIndex, EdgeClass, Environment};
use crate::error::{Error, Result};
use crate::lattice::{DomainSpec, Vertex};

/// Which edge set the crossing analysis uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockEdgeClass {
    O1,
    O2,
}

#[derive(Clone, Copy, Debug)]
pub struct BlockEvent {
    /// A unique crossing cluster exists and every in-block path of diameter
    /// greater than `L` is attached to it.
    pub g: bool,
    /// No open edges outside the chosen class join two block vertices.
    pub g_prime: bool,
    pub crossing_clusters: usize,
}

/// Evaluate the block events at block coordinate `block` and scale `l`.
///
/// `Q_L(x) = L(x + e_1 + .. + e_{d1}) + [0,L]^d` and
/// `Q~_{3L}(x)` pads it by `L` on every side; the shift keeps the padded
/// block inside an orthant domain.
pub fn block_event(
    env: &Environment,
    index: &ClusterIndex,
    l: i32,
    block: &Vertex,
    class: BlockEdgeClass,
) -> Result<BlockEvent> {
    if l < 1 {
        return Err(Error::InvalidArgument("block scale must be >= 1".into()));
    }
    let d = env.domain().d();
    if block.dim() != d {
        return Err(Error::InvalidArgument("block coordinate dimension mismatch".into()));
    }
    let d1 = env.domain().constrained();
    for k in 0..d1 {
        if block.coord(k) < 0 {
            return Err(Error::InvalidArgument(
                "constrained block coordinates must be nonnegative".into(),
            ));
        }
    }
    // corner offset of Q_L
    let offset: Vec<i32> = (0..d)
        .map(|k| l * (block.coord(k) + if k < d1 { 1 } else { 0 }))
        .collect();
    let q_lo: Vec<i32> = offset.clone();
    let q_hi: Vec<i32> = offset.iter().map(|o| o + l).collect();
    let pad_lo: Vec<i32> = offset.iter().map(|o| o - l).collect();
    let pad_hi: Vec<i32> = offset.iter().map(|o| o + 2 * l).collect();

    let max_norm = pad_lo
        .iter()
        .chain(pad_hi.iter())
        .map(|c| c.abs())
        .max()
        .unwrap_or(0);
    let inside = match env.domain() {
        DomainSpec::Box { n, .. } => max_norm <= n,
        _ => max_norm < env.extended_window(),
    };
    if !inside {
        return Err(Error::InsufficientWindow(format!(
            "padded block of scale {l} at {block} exceeds the materialized window"
        )));
    }

    let in_padded = |v: &Vertex| (0..d).all(|k| v.coord(k) >= pad_lo[k] && v.coord(k) <= pad_hi[k]);
    let in_inner = |v: &Vertex| (0..d).all(|k| v.coord(k) >= q_lo[k] && v.coord(k) <= q_hi[k]);
    let admit = |c: EdgeClass| match class {
        BlockEdgeClass::O1 => c != EdgeClass::Closed,
        BlockEdgeClass::O2 => c == EdgeClass::O2,
    };

    // component labels over the padded block via BFS on admitted edges
    let nv = env.vertices().len();
    let mut adj: std::collections::HashMap<u32, Vec<u32>> = std::collections::HashMap::new();
    let mut g_prime = true;
    for (i, rec) in env.edges().iter().enumerate() {
        let (a, b) = env.edge_endpoints(rec);
        if !(in_padded(&a) && in_padded(&b)) {
            continue;
        }
        let c = index.classes.class[i];
        if c != EdgeClass::Closed && !admit(c) {
            g_prime = false;
        }
        if admit(c) {
            adj.entry(rec.a).or_default().push(rec.b);
            adj.entry(rec.b).or_default().push(rec.a);
        }
    }
    let mut comp: Vec<u32> = vec![u32::MAX; nv];
    let mut n_comp = 0u32;
    let mut members: Vec<Vec<u32>> = Vec::new();
    let mut order: Vec<u32> = adj.keys().copied().collect();
    order.sort_unstable();
    for &s in &order {
        if comp[s as usize] != u32::MAX {
            continue;
        }
        let mut queue = vec![s];
        comp[s as usize] = n_comp;
        let mut mem = Vec::new();
        while let Some(v) = queue.pop() {
            mem.push(v);
            if let Some(nbrs) = adj.get(&v) {
                for &u in nbrs {
                    if comp[u as usize] == u32::MAX {
                        comp[u as usize] = n_comp;
                        queue.push(u);
                    }
                }
            }
        }
        members.push(mem);
        n_comp += 1;
    }

    let mut crossing: Vec<bool> = Vec::with_capacity(members.len());
    let mut long: Vec<bool> = Vec::with_capacity(members.len());
    for mem in &members {
        let mut lo = vec![i32::MAX; d];
        let mut hi = vec![i32::MIN; d];
        let mut face_lo = vec![false; d];
        let mut face_hi = vec![false; d];
        for &id in mem {
            let v = env.vertex(id);
            for k in 0..d {
                lo[k] = lo[k].min(v.coord(k));
                hi[k] = hi[k].max(v.coord(k));
            }
            if in_inner(&v) {
                for k in 0..d {
                    if v.coord(k) == q_lo[k] {
                        face_lo[k] = true;
                    }
                    if v.coord(k) == q_hi[k] {
                        face_hi[k] = true;
                    }
                }
            }
        }
        crossing.push((0..d).all(|k| face_lo[k] && face_hi[k]));
        let diam = (0..d).map(|k| hi[k] - lo[k]).max().unwrap_or(0);
        long.push(diam > l);
    }
    let n_crossing = crossing.iter().filter(|c| **c).count();
    let attached = members
        .iter()
        .enumerate()
        .all(|(i, _)| !long[i] || crossing[i]);
    let g = n_crossing == 1 && attached;
    Ok(BlockEvent {
        g,
        g_prime,
        crossing_clusters: n_crossing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{build_cluster_index, sample_environment, ConductanceLaw};

    #[test]
    fn full_occupancy_crosses() {
        let env = sample_environment(
            DomainSpec::Orthant { d1: 2, d2: 0 },
            14,
            ConductanceLaw::Constant { w: 1.0 },
            1,
            Some(2.0),
        )
        .unwrap();
        let index = build_cluster_index(&env).unwrap();
        let ev = block_event(&env, &index, 4, &Vertex::new(&[0, 0]), BlockEdgeClass::O1).unwrap();
        assert!(ev.g);
        assert!(ev.g_prime);
        assert_eq!(ev.crossing_clusters, 1);
    }

    #[test]
    fn empty_environment_fails() {
        let env = sample_environment(
            DomainSpec::Orthant { d1: 2, d2: 0 },
            14,
            ConductanceLaw::Bernoulli { p1: 0.0 },
            1,
            Some(2.0),
        );
        // all weights zero: no cluster at all, the index cannot be built
        let env = env.unwrap();
        assert!(build_cluster_index(&env).is_err());
    }

    #[test]
    fn closed_block_fails_crossing() {
        // sparse environment: crossing at small p is overwhelmingly unlikely
        let env = sample_environment(
            DomainSpec::Orthant { d1: 2, d2: 0 },
            14,
            ConductanceLaw::Bernoulli { p1: 0.05 },
            3,
            Some(2.0),
        )
        .unwrap();
        // p = 0.05 still has some edges, so the index may exist; if not the
        // event is vacuously false
        if let Ok(index) = build_cluster_index(&env) {
            let ev =
                block_event(&env, &index, 4, &Vertex::new(&[0, 0]), BlockEdgeClass::O1).unwrap();
            assert!(!ev.g);
        }
    }

    #[test]
    fn window_guard() {
        let env = sample_environment(
            DomainSpec::Orthant { d1: 2, d2: 0 },
            6,
            ConductanceLaw::Constant { w: 1.0 },
            1,
            Some(2.0),
        )
        .unwrap();
        let index = build_cluster_index(&env).unwrap();
        assert!(matches!(
            block_event(&env, &index, 6, &Vertex::new(&[1, 0]), BlockEdgeClass::O1),
            Err(Error::InsufficientWindow(_))
        ));
    }
}
