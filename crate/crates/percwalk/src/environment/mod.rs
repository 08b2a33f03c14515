//! Random conductance environments: i.i.d. edge weights over a windowed
//! domain, the regular/irregular edge classes induced by a truncation level
//! `K`, and the cluster index built from them.
//!
//! Weights are drawn by a counter-based generator keyed on
//! `(seed, canonical edge)`, so the same edge carries the same weight in
//! every window and in every domain sharing that edge. That coupling is what
//! makes the orthant-vs-full-lattice measure comparison exact.

mod cluster;
mod law;
mod snapshot;

pub use cluster::{
    build_cluster_index, hole_statistics, measure_comparison, window_agreement_check,
    ClusterIndex, ComponentStats, Hole, HoleStats, WindowAgreement,
};
pub use law::ConductanceLaw;
pub use snapshot::{export_snapshot, import_snapshot};

use crate::error::{Error, Result};
use crate::lattice::{
    enumerate_vertices_capped, window_vertex_count, DomainSpec, Edge, Vertex, DEFAULT_VERTEX_CAP,
};
use crate::rng::{mix, unit_draw};
use std::collections::HashMap;

/// One sampled edge: endpoint ids into the environment's vertex list.
#[derive(Clone, Copy, Debug)]
pub struct EdgeRecord {
    pub a: u32,
    pub b: u32,
    pub weight: f64,
}

/// Classification of a sampled edge relative to the truncation level.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeClass {
    /// Weight 0.
    Closed,
    /// Open and regular: in `O1`, not adjacent to any irregular edge.
    O2,
    /// Open but adjacent to (or itself) an irregular edge: in `O1 \ O2`.
    Os,
}

/// Per-edge classes `O1/O_R/O_S/O2`, parallel to [`Environment::edges`].
#[derive(Clone, Debug)]
pub struct EdgeClasses {
    pub class: Vec<EdgeClass>,
    /// Irregular edges: weight in `(0, 1/K) ∪ (K, ∞)`.
    pub in_or: Vec<bool>,
}

impl EdgeClasses {
    pub fn is_open(&self, i: usize) -> bool {
        self.class[i] != EdgeClass::Closed
    }

    pub fn count_o1(&self) -> usize {
        self.class.iter().filter(|c| **c != EdgeClass::Closed).count()
    }

    pub fn count_o2(&self) -> usize {
        self.class.iter().filter(|c| **c == EdgeClass::O2).count()
    }

    pub fn count_or(&self) -> usize {
        self.in_or.iter().filter(|b| **b).count()
    }
}

/// An immutable sampled environment over an extended window of the domain.
///
/// The target window of radius `window` is the trusted region; weights are
/// materialized out to `extended_window` (twice the target for unbounded
/// domains, the whole box for a box) so that the largest-cluster proxy is
/// insensitive to the window boundary.
#[derive(Clone, Debug)]
pub struct Environment {
    domain: DomainSpec,
    window: i32,
    extended: i32,
    law: ConductanceLaw,
    seed: u64,
    truncation: f64,
    vertices: Vec<Vertex>,
    ids: HashMap<Vertex, u32>,
    edges: Vec<EdgeRecord>,
}

/// Weight of `edge` under `(seed, law)`, independent of any window.
pub fn edge_weight(seed: u64, law: &ConductanceLaw, edge: &Edge) -> f64 {
    let key = mix(seed ^ edge.fingerprint());
    law.sample(unit_draw(key, 0), unit_draw(key, 1))
}

/// Sample an environment. `truncation = None` picks the default `K` for the
/// law (smallest power of two keeping the irregular mass under
/// `(p1 - 1/2)/2`).
pub fn sample_environment(
    domain: DomainSpec,
    window: i32,
    law: ConductanceLaw,
    seed: u64,
    truncation: Option<f64>,
) -> Result<Environment> {
    sample_environment_capped(domain, window, law, seed, truncation, DEFAULT_VERTEX_CAP)
}

pub fn sample_environment_capped(
    domain: DomainSpec,
    window: i32,
    law: ConductanceLaw,
    seed: u64,
    truncation: Option<f64>,
    cap: u64,
) -> Result<Environment> {
    domain.validate()?;
    law.validate()?;
    if window < 1 {
        return Err(Error::InvalidArgument("window must be >= 1".into()));
    }
    let truncation = match truncation {
        Some(k) => {
            if !(k > 0.0) {
                return Err(Error::InvalidArgument(format!("K must be > 0, got {k}")));
            }
            k
        }
        None => law.default_truncation()?,
    };
    let (window, extended) = match domain {
        DomainSpec::Box { n, .. } => (window.min(n), n),
        _ => (window, 2 * window),
    };
    if window_vertex_count(&domain, extended) > cap as u128 {
        return Err(Error::CapacityExceeded {
            needed: window_vertex_count(&domain, extended),
            cap,
        });
    }
    let vertices = enumerate_vertices_capped(&domain, extended, cap)?;
    let mut ids = HashMap::with_capacity(vertices.len());
    for (i, v) in vertices.iter().enumerate() {
        ids.insert(*v, i as u32);
    }
    let mut edges = Vec::with_capacity(vertices.len() * domain.d());
    for (i, v) in vertices.iter().enumerate() {
        for axis in 0..domain.d() {
            let u = v.step(axis, 1);
            if let Some(&j) = ids.get(&u) {
                let e = Edge::new(*v, u);
                edges.push(EdgeRecord {
                    a: i as u32,
                    b: j,
                    weight: edge_weight(seed, &law, &e),
                });
            }
        }
    }
    edges.sort_unstable_by(|x, y| (x.a, x.b).cmp(&(y.a, y.b)));
    Ok(Environment {
        domain,
        window,
        extended,
        law,
        seed,
        truncation,
        vertices,
        ids,
        edges,
    })
}

impl Environment {
    /// Rebuild an environment from explicit parts (snapshot import).
    pub(crate) fn from_parts(
        domain: DomainSpec,
        window: i32,
        extended: i32,
        law: ConductanceLaw,
        seed: u64,
        truncation: f64,
        vertices: Vec<Vertex>,
        edges: Vec<EdgeRecord>,
    ) -> Self {
        let mut ids = HashMap::with_capacity(vertices.len());
        for (i, v) in vertices.iter().enumerate() {
            ids.insert(*v, i as u32);
        }
        Environment {
            domain,
            window,
            extended,
            law,
            seed,
            truncation,
            vertices,
            ids,
            edges,
        }
    }

    pub fn domain(&self) -> DomainSpec {
        self.domain
    }

    /// Trusted window radius.
    pub fn window(&self) -> i32 {
        self.window
    }

    /// Radius out to which weights are materialized.
    pub fn extended_window(&self) -> i32 {
        self.extended
    }

    pub fn law(&self) -> ConductanceLaw {
        self.law
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn truncation(&self) -> f64 {
        self.truncation
    }

    /// Analytic irregular mass `q(K)` at the environment's truncation.
    pub fn q_of_truncation(&self) -> f64 {
        self.law.q_of_truncation(self.truncation)
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertex(&self, id: u32) -> Vertex {
        self.vertices[id as usize]
    }

    pub fn vertex_id(&self, v: &Vertex) -> Option<u32> {
        self.ids.get(v).copied()
    }

    pub fn edges(&self) -> &[EdgeRecord] {
        &self.edges
    }

    pub fn edge_endpoints(&self, rec: &EdgeRecord) -> (Vertex, Vertex) {
        (self.vertices[rec.a as usize], self.vertices[rec.b as usize])
    }

    /// Weight of the edge `{a,b}` if both endpoints are materialized.
    pub fn weight(&self, a: &Vertex, b: &Vertex) -> Option<f64> {
        let ia = self.vertex_id(a)?;
        let ib = self.vertex_id(b)?;
        let (lo, hi) = if a <= b { (ia, ib) } else { (ib, ia) };
        // edges are sorted by (a, b) because vertices are enumerated
        // lexicographically and only +1 steps are emitted
        let idx = self
            .edges
            .binary_search_by(|r| (r.a, r.b).cmp(&(lo, hi)))
            .ok()?;
        Some(self.edges[idx].weight)
    }
}

/// Classify every materialized edge into `O1/O_R/O_S/O2`.
///
/// `O_R` holds the irregular weights, `O_S` the open edges meeting an
/// irregular edge (including irregular open edges themselves), and
/// `O2 = O1 \ O_S`.
pub fn classify_edges(env: &Environment) -> EdgeClasses {
    let k = env.truncation;
    let inv = 1.0 / k;
    let n = env.edges.len();
    let mut in_or = vec![false; n];
    let mut touches = vec![false; env.vertices.len()];
    for (i, rec) in env.edges.iter().enumerate() {
        let w = rec.weight;
        if w > 0.0 && (w < inv || w > k) {
            in_or[i] = true;
            touches[rec.a as usize] = true;
            touches[rec.b as usize] = true;
        }
    }
    let mut class = Vec::with_capacity(n);
    for rec in &env.edges {
        if rec.weight <= 0.0 {
            class.push(EdgeClass::Closed);
        } else if touches[rec.a as usize] || touches[rec.b as usize] {
            class.push(EdgeClass::Os);
        } else {
            class.push(EdgeClass::O2);
        }
    }
    EdgeClasses { class, in_or }
}
