//! Cluster extraction: largest-component proxies for the infinite clusters
//! of open and regular edges, hole components between them, and the
//! window-approximation audits that justify using proxies at all.

use super::{classify_edges, EdgeClass, EdgeClasses, Environment};
use crate::error::{Error, Result};
use crate::lattice::{DomainSpec, Vertex};
use std::collections::{HashMap, HashSet};

/// Union-find with path halving and union by size.
struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let gp = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = gp;
            x = gp;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let mut ra = self.find(a);
        let mut rb = self.find(b);
        if ra == rb {
            return;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
    }
}

/// Compressed adjacency over environment vertex ids.
#[derive(Clone, Debug)]
pub struct Csr {
    offsets: Vec<u32>,
    targets: Vec<u32>,
    weights: Vec<f64>,
}

impl Csr {
    fn build(n: usize, arcs: &mut Vec<(u32, u32, f64)>) -> Self {
        arcs.sort_unstable_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
        let mut offsets = vec![0u32; n + 1];
        for &(a, _, _) in arcs.iter() {
            offsets[a as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        Csr {
            offsets,
            targets: arcs.iter().map(|t| t.1).collect(),
            weights: arcs.iter().map(|t| t.2).collect(),
        }
    }

    pub fn neighbors(&self, v: u32) -> impl Iterator<Item = (u32, f64)> + '_ {
        let lo = self.offsets[v as usize] as usize;
        let hi = self.offsets[v as usize + 1] as usize;
        self.targets[lo..hi]
            .iter()
            .copied()
            .zip(self.weights[lo..hi].iter().copied())
    }

    pub fn degree(&self, v: u32) -> usize {
        (self.offsets[v as usize + 1] - self.offsets[v as usize]) as usize
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ComponentStats {
    pub size: u32,
    /// Sup-norm diameter of the component's bounding box.
    pub linf_diameter: i32,
}

/// One connected component of the holes `C1 \ C2`.
#[derive(Clone, Debug)]
pub struct Hole {
    pub vertices: Vec<u32>,
    pub size: usize,
    pub linf_diameter: i32,
    /// Touches the materialization boundary, so its true extent is unknown.
    pub censored: bool,
}

/// Partition data for one environment: proxies for the open cluster `C1`
/// and the regular cluster `C2`, hole components, and adjacency structures
/// shared by the geometry, walk, and spectral modules.
#[derive(Clone, Debug)]
pub struct ClusterIndex {
    pub classes: EdgeClasses,
    pub adj_o1: Csr,
    pub adj_o2: Csr,
    /// Graph over `C2` that also carries the through-hole jump pairs.
    pub adj_z: Csr,
    comp_o1: Vec<u32>,
    comp_o2: Vec<u32>,
    c1_root: u32,
    c2_root: Option<u32>,
    in_c1: Vec<bool>,
    in_c2: Vec<bool>,
    holes: Vec<Hole>,
    hole_of: Vec<u32>,
    stats_o1: HashMap<u32, ComponentStats>,
    stats_o2: HashMap<u32, ComponentStats>,
}

const NO_HOLE: u32 = u32::MAX;

fn component_stats(env: &Environment, comp: &[u32]) -> HashMap<u32, ComponentStats> {
    let d = env.domain().d();
    let mut boxes: HashMap<u32, (u32, Vec<i32>, Vec<i32>)> = HashMap::new();
    for (i, &root) in comp.iter().enumerate() {
        let v = env.vertex(i as u32);
        let entry = boxes
            .entry(root)
            .or_insert_with(|| (0, vec![i32::MAX; d], vec![i32::MIN; d]));
        entry.0 += 1;
        for k in 0..d {
            entry.1[k] = entry.1[k].min(v.coord(k));
            entry.2[k] = entry.2[k].max(v.coord(k));
        }
    }
    boxes
        .into_iter()
        .map(|(root, (size, lo, hi))| {
            let diam = (0..d).map(|k| hi[k] - lo[k]).max().unwrap_or(0);
            (root, ComponentStats { size, linf_diameter: diam })
        })
        .collect()
}

/// Largest component root: ties broken toward the smaller root id.
fn largest_root<'a>(
    stats: impl Iterator<Item = (&'a u32, &'a ComponentStats)>,
    admit: impl Fn(u32) -> bool,
) -> Option<u32> {
    let mut best: Option<(u32, u32)> = None; // (size, root)
    for (&root, s) in stats {
        if s.size < 2 || !admit(root) {
            continue;
        }
        best = match best {
            None => Some((s.size, root)),
            Some((bs, br)) => {
                if s.size > bs || (s.size == bs && root < br) {
                    Some((s.size, root))
                } else {
                    Some((bs, br))
                }
            }
        };
    }
    best.map(|(_, r)| r)
}

/// Build the cluster index: union-find over `O1` and `O2`, largest-component
/// proxies, and hole components of proxy-`C1` minus proxy-`C2`.
pub fn build_cluster_index(env: &Environment) -> Result<ClusterIndex> {
    if env.window() < 4 {
        return Err(Error::InvalidArgument(
            "cluster index needs a window of at least 4".into(),
        ));
    }
    let n = env.vertices().len();
    let classes = classify_edges(env);

    let mut arcs_o1: Vec<(u32, u32, f64)> = Vec::new();
    let mut arcs_o2: Vec<(u32, u32, f64)> = Vec::new();
    let mut uf1 = UnionFind::new(n);
    let mut uf2 = UnionFind::new(n);
    for (i, rec) in env.edges().iter().enumerate() {
        match classes.class[i] {
            EdgeClass::Closed => {}
            EdgeClass::Os => {
                arcs_o1.push((rec.a, rec.b, rec.weight));
                arcs_o1.push((rec.b, rec.a, rec.weight));
                uf1.union(rec.a, rec.b);
            }
            EdgeClass::O2 => {
                arcs_o1.push((rec.a, rec.b, rec.weight));
                arcs_o1.push((rec.b, rec.a, rec.weight));
                arcs_o2.push((rec.a, rec.b, rec.weight));
                arcs_o2.push((rec.b, rec.a, rec.weight));
                uf1.union(rec.a, rec.b);
                uf2.union(rec.a, rec.b);
            }
        }
    }
    let comp_o1: Vec<u32> = (0..n as u32).map(|i| uf1.find(i)).collect();
    let comp_o2: Vec<u32> = (0..n as u32).map(|i| uf2.find(i)).collect();
    let stats_o1 = component_stats(env, &comp_o1);
    let stats_o2 = component_stats(env, &comp_o2);

    let c1_root = largest_root(stats_o1.iter(), |_| true).ok_or(Error::EmptyCluster)?;
    let in_c1: Vec<bool> = comp_o1.iter().map(|&r| r == c1_root).collect();
    // a regular component sits inside one open component, so admit exactly
    // those whose vertices fall in the C1 proxy
    let c2_root = largest_root(stats_o2.iter(), |root| in_c1[root as usize]);
    let in_c2: Vec<bool> = match c2_root {
        Some(r2) => comp_o2.iter().map(|&r| r == r2).collect(),
        None => vec![false; n],
    };

    // hole components: O1-connected pieces of proxy-C1 minus proxy-C2
    let adj_o1 = Csr::build(n, &mut arcs_o1);
    let adj_o2 = Csr::build(n, &mut arcs_o2);
    let mut hole_of = vec![NO_HOLE; n];
    let mut holes: Vec<Hole> = Vec::new();
    let shell = env.extended_window();
    let bounded = matches!(env.domain(), DomainSpec::Box { .. });
    for start in 0..n as u32 {
        if !in_c1[start as usize] || in_c2[start as usize] || hole_of[start as usize] != NO_HOLE {
            continue;
        }
        let id = holes.len() as u32;
        let mut queue = vec![start];
        hole_of[start as usize] = id;
        let mut members = Vec::new();
        let mut censored = false;
        while let Some(v) = queue.pop() {
            members.push(v);
            if !bounded && env.vertex(v).linf_norm() >= shell {
                censored = true;
            }
            for (u, _) in adj_o1.neighbors(v) {
                if in_c1[u as usize]
                    && !in_c2[u as usize]
                    && hole_of[u as usize] == NO_HOLE
                {
                    hole_of[u as usize] = id;
                    queue.push(u);
                }
            }
        }
        members.sort_unstable();
        let d = env.domain().d();
        let mut lo = vec![i32::MAX; d];
        let mut hi = vec![i32::MIN; d];
        for &m in &members {
            let v = env.vertex(m);
            for k in 0..d {
                lo[k] = lo[k].min(v.coord(k));
                hi[k] = hi[k].max(v.coord(k));
            }
        }
        let diam = (0..d).map(|k| hi[k] - lo[k]).max().unwrap_or(0);
        holes.push(Hole {
            size: members.len(),
            vertices: members,
            linf_diameter: diam,
            censored,
        });
    }

    // trace graph: regular edges, open edges directly joining two C2
    // vertices, and pairs of C2 vertices attached to a common hole
    let mut z_pairs: HashSet<(u32, u32)> = HashSet::new();
    for (i, rec) in env.edges().iter().enumerate() {
        if !classes.is_open(i) {
            continue;
        }
        if in_c2[rec.a as usize] && in_c2[rec.b as usize] {
            z_pairs.insert((rec.a.min(rec.b), rec.a.max(rec.b)));
        }
    }
    for hole in &holes {
        let mut boundary: Vec<u32> = Vec::new();
        for &m in &hole.vertices {
            for (u, _) in adj_o1.neighbors(m) {
                if in_c2[u as usize] {
                    boundary.push(u);
                }
            }
        }
        boundary.sort_unstable();
        boundary.dedup();
        for i in 0..boundary.len() {
            for j in i + 1..boundary.len() {
                z_pairs.insert((boundary[i], boundary[j]));
            }
        }
    }
    let mut arcs_z: Vec<(u32, u32, f64)> = Vec::with_capacity(2 * z_pairs.len());
    for (a, b) in z_pairs {
        arcs_z.push((a, b, 1.0));
        arcs_z.push((b, a, 1.0));
    }
    let adj_z = Csr::build(n, &mut arcs_z);

    Ok(ClusterIndex {
        classes,
        adj_o1,
        adj_o2,
        adj_z,
        comp_o1,
        comp_o2,
        c1_root,
        c2_root,
        in_c1,
        in_c2,
        holes,
        hole_of,
        stats_o1,
        stats_o2,
    })
}

impl ClusterIndex {
    pub fn in_c1(&self, id: u32) -> bool {
        self.in_c1[id as usize]
    }

    pub fn in_c2(&self, id: u32) -> bool {
        self.in_c2[id as usize]
    }

    pub fn c1_size(&self) -> usize {
        self.stats_o1[&self.c1_root].size as usize
    }

    pub fn c2_size(&self) -> usize {
        self.c2_root
            .map(|r| self.stats_o2[&r].size as usize)
            .unwrap_or(0)
    }

    pub fn holes(&self) -> &[Hole] {
        &self.holes
    }

    /// Hole component containing `id`, if any.
    pub fn hole_of(&self, id: u32) -> Option<&Hole> {
        let h = self.hole_of[id as usize];
        if h == NO_HOLE {
            None
        } else {
            Some(&self.holes[h as usize])
        }
    }

    pub fn o1_component_root(&self, id: u32) -> u32 {
        self.comp_o1[id as usize]
    }

    pub fn o1_component_stats(&self, root: u32) -> Option<&ComponentStats> {
        self.stats_o1.get(&root)
    }

    pub fn o2_component_root(&self, id: u32) -> u32 {
        self.comp_o2[id as usize]
    }

    /// Total O1-weight at a vertex (the walk's jump rate).
    pub fn o1_rate(&self, id: u32) -> f64 {
        self.adj_o1.neighbors(id).map(|(_, w)| w).sum()
    }

    /// O1-degree of a vertex (the `mu^0` measure of a singleton).
    pub fn o1_degree(&self, id: u32) -> usize {
        self.adj_o1.degree(id)
    }

    /// Ids of C1-proxy vertices within the given sup-norm radius, ascending.
    pub fn c1_vertices_within(&self, env: &Environment, radius: i32) -> Vec<u32> {
        (0..env.vertices().len() as u32)
            .filter(|&i| self.in_c1[i as usize] && env.vertex(i).linf_norm() <= radius)
            .collect()
    }
}

/// Census of hole sizes and sup-norm diameters, plus the vertex-averaged
/// empirical tail of `diam H(x)` over window vertices of the C1 proxy.
/// Censored holes are excluded from the tail (their true diameter is
/// unknown) and reported as a fraction.
#[derive(Clone, Debug)]
pub struct HoleStats {
    pub holes: Vec<(usize, i32, bool)>,
    /// `(k, P(diam H(x) >= k))` for k >= 1, uncensored holes only.
    pub tail: Vec<(i32, f64)>,
    /// `(k, #vertices)` numerators behind `tail`.
    pub tail_counts: Vec<(i32, usize)>,
    /// Window C1 vertices lying in censored holes (excluded from the tail).
    pub censored_vertices: usize,
    pub censored_fraction: f64,
    pub c1_window_vertices: usize,
}

pub fn hole_statistics(env: &Environment, index: &ClusterIndex) -> HoleStats {
    let window = env.window();
    let mut c1_count = 0usize;
    let mut censored_vertices = 0usize;
    let mut diam_counts: HashMap<i32, usize> = HashMap::new();
    let mut seen_holes: HashSet<usize> = HashSet::new();
    let mut holes_out: Vec<(usize, i32, bool)> = Vec::new();
    for id in 0..env.vertices().len() as u32 {
        if !index.in_c1(id) || env.vertex(id).linf_norm() > window {
            continue;
        }
        c1_count += 1;
        let h = index.hole_of[id as usize];
        if h == NO_HOLE {
            continue;
        }
        let hole = &index.holes[h as usize];
        if seen_holes.insert(h as usize) {
            holes_out.push((hole.size, hole.linf_diameter, hole.censored));
        }
        if hole.censored {
            censored_vertices += 1;
        } else {
            *diam_counts.entry(hole.linf_diameter).or_insert(0) += 1;
        }
    }
    holes_out.sort_unstable();
    let mut tail = Vec::new();
    let mut tail_counts = Vec::new();
    if c1_count > 0 {
        let max_diam = diam_counts.keys().copied().max().unwrap_or(0);
        // P(diam >= k): holes of diameter 0 (single vertices) only hit k = 0
        for k in 1..=max_diam.max(0) {
            let count: usize = diam_counts
                .iter()
                .filter(|(d, _)| **d >= k)
                .map(|(_, c)| *c)
                .sum();
            tail.push((k, count as f64 / c1_count as f64));
            tail_counts.push((k, count));
        }
    }
    HoleStats {
        holes: holes_out,
        tail,
        tail_counts,
        censored_vertices,
        censored_fraction: if c1_count == 0 {
            0.0
        } else {
            censored_vertices as f64 / c1_count as f64
        },
        c1_window_vertices: c1_count,
    }
}

#[derive(Clone, Copy, Debug)]
pub struct WindowAgreement {
    pub agree: bool,
    pub mismatches: usize,
}

/// Compare the largest open cluster of the cube `Q2 = [0,2n]^d` with the
/// global-window proxy, both restricted to `Q1 = [0, floor(n(1+eps))]^d`.
pub fn window_agreement_check(
    env: &Environment,
    index: &ClusterIndex,
    n: i32,
    eps: f64,
) -> Result<WindowAgreement> {
    if matches!(env.domain(), DomainSpec::Box { .. }) {
        return Err(Error::Nesting(
            "window agreement is defined for unbounded domains".into(),
        ));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("eps must lie in (0,1), got {eps}")));
    }
    if n < 2 {
        return Err(Error::InvalidArgument("n must be >= 2".into()));
    }
    let s1 = ((n as f64) * (1.0 + eps)).floor() as i32;
    let s2 = 2 * n;
    if s2 > env.window() {
        return Err(Error::Nesting(format!(
            "outer cube side {s2} exceeds the trusted window {}",
            env.window()
        )));
    }
    let d = env.domain().d();
    let in_cube = |v: &Vertex, side: i32| (0..d).all(|k| v.coord(k) >= 0 && v.coord(k) <= side);

    // largest open component of the subgraph induced on Q2
    let nv = env.vertices().len();
    let mut uf = UnionFind::new(nv);
    for (i, rec) in env.edges().iter().enumerate() {
        if !index.classes.is_open(i) {
            continue;
        }
        let (a, b) = env.edge_endpoints(rec);
        if in_cube(&a, s2) && in_cube(&b, s2) {
            uf.union(rec.a, rec.b);
        }
    }
    let mut sizes: HashMap<u32, u32> = HashMap::new();
    for id in 0..nv as u32 {
        if in_cube(&env.vertex(id), s2) {
            *sizes.entry(uf.find(id)).or_insert(0) += 1;
        }
    }
    let best = sizes
        .iter()
        .filter(|(_, &s)| s >= 2)
        .max_by(|(r1, s1), (r2, s2)| (s1, std::cmp::Reverse(*r1)).cmp(&(s2, std::cmp::Reverse(*r2))))
        .map(|(&r, _)| r)
        .ok_or(Error::EmptyCluster)?;

    let mut mismatches = 0usize;
    for id in 0..nv as u32 {
        let v = env.vertex(id);
        if !in_cube(&v, s1) {
            continue;
        }
        let in_local = uf.find(id) == best;
        let in_global = index.in_c1(id);
        if in_local != in_global {
            mismatches += 1;
        }
    }
    Ok(WindowAgreement {
        agree: mismatches == 0,
        mismatches,
    })
}

/// Count the vertices of the cube `[0,n]^d` that the full-lattice cluster
/// proxy contains but the orthant proxy does not. The two environments must
/// be coupled by seed, law, and truncation, so the orthant weights are the
/// restriction of the full-lattice weights.
pub fn measure_comparison(
    env_orthant: &Environment,
    index_orthant: &ClusterIndex,
    env_full: &Environment,
    index_full: &ClusterIndex,
    n: i32,
) -> Result<usize> {
    let (d1, d2) = match env_orthant.domain() {
        DomainSpec::Orthant { d1, d2 } => (d1, d2),
        other => {
            return Err(Error::CouplingMismatch(format!(
                "first environment must be an orthant, got {other:?}"
            )))
        }
    };
    match env_full.domain() {
        DomainSpec::FullLattice { d } if d == d1 + d2 => {}
        other => {
            return Err(Error::CouplingMismatch(format!(
                "second environment must be the full lattice of dimension {}, got {other:?}",
                d1 + d2
            )))
        }
    }
    if env_orthant.seed() != env_full.seed() {
        return Err(Error::CouplingMismatch("seeds differ".into()));
    }
    if env_orthant.law() != env_full.law() || env_orthant.truncation() != env_full.truncation() {
        return Err(Error::CouplingMismatch("laws or truncations differ".into()));
    }
    if n > env_orthant.window() || n > env_full.window() {
        return Err(Error::InsufficientWindow(format!(
            "cube side {n} exceeds a trusted window"
        )));
    }
    let d = d1 + d2;
    let mut count = 0usize;
    for id in 0..env_full.vertices().len() as u32 {
        let v = env_full.vertex(id);
        if !(0..d).all(|k| v.coord(k) >= 0 && v.coord(k) <= n) {
            continue;
        }
        if !index_full.in_c1(id) {
            continue;
        }
        let oid = env_orthant
            .vertex_id(&v)
            .expect("cube vertex lies in the orthant window");
        if !index_orthant.in_c1(oid) {
            count += 1;
        }
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{sample_environment, ConductanceLaw, EdgeRecord};
    use crate::lattice::DomainSpec;

    fn env_const(window: i32) -> Environment {
        sample_environment(
            DomainSpec::FullLattice { d: 2 },
            window,
            ConductanceLaw::Constant { w: 1.0 },
            5,
            Some(2.0),
        )
        .unwrap()
    }

    #[test]
    fn constant_env_is_one_component_without_holes() {
        let env = env_const(5);
        let index = build_cluster_index(&env).unwrap();
        assert_eq!(index.c1_size(), env.vertices().len());
        assert_eq!(index.c2_size(), env.vertices().len());
        assert!(index.holes().is_empty());
        let stats = hole_statistics(&env, &index);
        assert!(stats.holes.is_empty());
        assert!(stats.tail.iter().all(|(_, p)| *p == 0.0));
    }

    #[test]
    fn uniformly_elliptic_law_has_no_holes() {
        let law = ConductanceLaw::UniformOnInterval { a: 1.0, b: 2.0, p1: 1.0 };
        let env =
            sample_environment(DomainSpec::FullLattice { d: 2 }, 8, law, 3, Some(4.0)).unwrap();
        let index = build_cluster_index(&env).unwrap();
        assert_eq!(index.classes.count_o2(), index.classes.count_o1());
        assert!(index.holes().is_empty());
        assert_eq!(index.c1_size(), index.c2_size());
    }

    #[test]
    fn component_census_matches_bfs_oracle() {
        let env = sample_environment(
            DomainSpec::FullLattice { d: 2 },
            16,
            ConductanceLaw::Bernoulli { p1: 0.7 },
            7,
            Some(2.0),
        )
        .unwrap();
        let index = build_cluster_index(&env).unwrap();
        // oracle: plain BFS over positive edges
        let n = env.vertices().len();
        let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
        for rec in env.edges() {
            if rec.weight > 0.0 {
                adj[rec.a as usize].push(rec.b);
                adj[rec.b as usize].push(rec.a);
            }
        }
        let mut comp = vec![u32::MAX; n];
        let mut next = 0u32;
        for s in 0..n {
            if comp[s] != u32::MAX {
                continue;
            }
            comp[s] = next;
            let mut q = vec![s as u32];
            while let Some(v) = q.pop() {
                for &u in &adj[v as usize] {
                    if comp[u as usize] == u32::MAX {
                        comp[u as usize] = next;
                        q.push(u);
                    }
                }
            }
            next += 1;
        }
        let mut sizes = vec![0u32; next as usize];
        for &c in &comp {
            sizes[c as usize] += 1;
        }
        let best = (0..next).max_by_key(|&c| sizes[c as usize]).unwrap();
        for i in 0..n as u32 {
            assert_eq!(index.in_c1(i), comp[i as usize] == best, "vertex {i}");
        }
    }

    #[test]
    fn c2_nested_in_c1_and_hole_boundaries_regular() {
        let law = ConductanceLaw::ParetoLowerBounded { c: 1.0, exponent: 1.5, p1: 0.75 };
        let env = sample_environment(DomainSpec::FullLattice { d: 2 }, 12, law, 19, Some(4.0)).unwrap();
        let index = build_cluster_index(&env).unwrap();
        for i in 0..env.vertices().len() as u32 {
            if index.in_c2(i) {
                assert!(index.in_c1(i));
            }
        }
        // every hole's outer O1-neighbors lie in proxy-C2
        for hole in index.holes() {
            let members: HashSet<u32> = hole.vertices.iter().copied().collect();
            for &m in &hole.vertices {
                for (u, _) in index.adj_o1.neighbors(m) {
                    if !members.contains(&u) {
                        assert!(index.in_c2(u), "hole neighbor {u} not in C2");
                    }
                }
            }
        }
    }

    #[test]
    fn two_vertex_hole_census() {
        // hand-built 1-d environment: C2 everywhere except a 2-vertex hole
        // weights: ... 1 1 9 1 9 1 1 ... with K=2: the two 9-edges are
        // irregular, the vertices between them fall out of C2
        let domain = DomainSpec::FullLattice { d: 1 };
        let vs: Vec<Vertex> = (-8..=8).map(|x| Vertex::new(&[x])).collect();
        let mut edges = Vec::new();
        for i in 0..16u32 {
            let x = i as i32 - 8;
            let w = if x == -1 || x == 1 { 9.0 } else { 1.0 };
            edges.push(EdgeRecord { a: i, b: i + 1, weight: w });
        }
        let env = Environment::from_parts(
            domain,
            4,
            8,
            ConductanceLaw::Constant { w: 1.0 },
            0,
            2.0,
            vs,
            edges,
        );
        let index = build_cluster_index(&env).unwrap();
        // hole = {0, 1} in ids = coordinates {-1, 0, 1}? the irregular edges
        // are {-1,0} and {1,2}; singular edges reach {-2..3}; C2 components
        // split; the largest lies on one side
        assert!(!index.holes().is_empty());
        let stats = hole_statistics(&env, &index);
        assert!(stats.c1_window_vertices > 0);
        for (size, diam, _) in &stats.holes {
            assert!(*size >= 1);
            assert!(*diam >= 0);
        }
    }

    #[test]
    fn window_agreement_constant_always_agrees() {
        let env = sample_environment(
            DomainSpec::Orthant { d1: 2, d2: 0 },
            12,
            ConductanceLaw::Constant { w: 1.0 },
            3,
            Some(2.0),
        )
        .unwrap();
        let index = build_cluster_index(&env).unwrap();
        let wa = window_agreement_check(&env, &index, 5, 0.5).unwrap();
        assert!(wa.agree);
        assert_eq!(wa.mismatches, 0);
    }

    #[test]
    fn window_agreement_rejects_bad_geometry() {
        let env = env_const(6);
        let index = build_cluster_index(&env).unwrap();
        assert!(window_agreement_check(&env, &index, 5, 0.5).is_err()); // 2n exceeds window
        assert!(window_agreement_check(&env, &index, 3, 1.2).is_err());
    }

    #[test]
    fn measure_comparison_zero_for_full_occupancy() {
        for law in [
            ConductanceLaw::Constant { w: 1.0 },
            ConductanceLaw::Bernoulli { p1: 1.0 },
        ] {
            let env_o = sample_environment(DomainSpec::Orthant { d1: 1, d2: 1 }, 8, law, 9, Some(2.0))
                .unwrap();
            let env_f =
                sample_environment(DomainSpec::FullLattice { d: 2 }, 8, law, 9, Some(2.0)).unwrap();
            let io = build_cluster_index(&env_o).unwrap();
            let iff = build_cluster_index(&env_f).unwrap();
            assert_eq!(measure_comparison(&env_o, &io, &env_f, &iff, 6).unwrap(), 0);
        }
    }

    #[test]
    fn measure_comparison_rejects_uncoupled() {
        let law = ConductanceLaw::Bernoulli { p1: 0.7 };
        let env_o =
            sample_environment(DomainSpec::Orthant { d1: 1, d2: 1 }, 8, law, 9, Some(2.0)).unwrap();
        let env_f =
            sample_environment(DomainSpec::FullLattice { d: 2 }, 8, law, 10, Some(2.0)).unwrap();
        let io = build_cluster_index(&env_o).unwrap();
        let iff = build_cluster_index(&env_f).unwrap();
        assert!(matches!(
            measure_comparison(&env_o, &io, &env_f, &iff, 6),
            Err(Error::CouplingMismatch(_))
        ));
    }

    #[test]
    fn determinism_across_rebuilds() {
        let law = ConductanceLaw::Bernoulli { p1: 0.7 };
        let a = sample_environment(DomainSpec::FullLattice { d: 2 }, 10, law, 42, Some(2.0)).unwrap();
        let b = sample_environment(DomainSpec::FullLattice { d: 2 }, 10, law, 42, Some(2.0)).unwrap();
        let ia = build_cluster_index(&a).unwrap();
        let ib = build_cluster_index(&b).unwrap();
        for i in 0..a.vertices().len() as u32 {
            assert_eq!(ia.in_c1(i), ib.in_c1(i));
            assert_eq!(ia.in_c2(i), ib.in_c2(i));
        }
        assert_eq!(
            a.edges().iter().map(|e| e.weight.to_bits()).collect::<Vec<_>>(),
            b.edges().iter().map(|e| e.weight.to_bits()).collect::<Vec<_>>()
        );
    }
}
