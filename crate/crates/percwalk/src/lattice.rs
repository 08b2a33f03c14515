//! Ambient lattices: `Z^d`, orthants `Z_+^{d1} x Z^{d2}`, and boxes
//! `[-n,n]^d`, together with vertex enumeration, incidence, and the
//! overlapping corner-cube decomposition of a box.

use crate::error::{Error, Result};
use crate::rng::mix;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Maximum supported ambient dimension.
pub const MAX_DIM: usize = 6;

/// Default cap on enumerated vertices; fail fast rather than thrash.
pub const DEFAULT_VERTEX_CAP: u64 = 100_000_000;

/// A lattice point. Coordinates beyond `dim` are zero so that derived
/// ordering, equality and hashing are lexicographic on the live prefix.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Vertex {
    dim: u8,
    coords: [i32; MAX_DIM],
}

impl Vertex {
    pub fn new(coords: &[i32]) -> Self {
        assert!(
            coords.len() >= 1 && coords.len() <= MAX_DIM,
            "dimension must be in 1..={MAX_DIM}"
        );
        let mut c = [0i32; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Vertex {
            dim: coords.len() as u8,
            coords: c,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn coords(&self) -> &[i32] {
        &self.coords[..self.dim as usize]
    }

    pub fn coord(&self, axis: usize) -> i32 {
        self.coords[axis]
    }

    /// Neighbor one step along `axis` in direction `step` (+1 or -1).
    pub fn step(&self, axis: usize, step: i32) -> Self {
        let mut v = *self;
        v.coords[axis] += step;
        v
    }

    pub fn linf_norm(&self) -> i32 {
        self.coords().iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    pub fn l1_dist(&self, other: &Vertex) -> i64 {
        self.coords()
            .iter()
            .zip(other.coords())
            .map(|(a, b)| (*a as i64 - *b as i64).abs())
            .sum()
    }

    pub fn linf_dist(&self, other: &Vertex) -> i32 {
        self.coords()
            .iter()
            .zip(other.coords())
            .map(|(a, b)| (a - b).abs())
            .max()
            .unwrap_or(0)
    }

    pub fn euclid_dist(&self, other: &Vertex) -> f64 {
        self.coords()
            .iter()
            .zip(other.coords())
            .map(|(a, b)| {
                let d = (*a - *b) as f64;
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.coords().iter().map(|&c| c as f64).collect()
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// An undirected unit edge with lexicographically ordered endpoints.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    lo: Vertex,
    hi: Vertex,
}

impl Edge {
    pub fn new(a: Vertex, b: Vertex) -> Self {
        debug_assert_eq!(a.dim(), b.dim());
        debug_assert_eq!(a.l1_dist(&b), 1, "edges must have unit length");
        if a <= b {
            Edge { lo: a, hi: b }
        } else {
            Edge { lo: b, hi: a }
        }
    }

    pub fn lo(&self) -> Vertex {
        self.lo
    }

    pub fn hi(&self) -> Vertex {
        self.hi
    }

    pub fn other(&self, v: Vertex) -> Vertex {
        if v == self.lo {
            self.hi
        } else {
            self.lo
        }
    }

    /// Stable 64-bit fingerprint of the canonical endpoint pair, identical
    /// across windows, domains, and platforms.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let fold = |h: &mut u64, x: u64| {
            *h ^= x;
            *h = h.wrapping_mul(0x0000_0100_0000_01b3);
        };
        fold(&mut h, self.lo.dim as u64);
        for c in self.lo.coords() {
            fold(&mut h, *c as u32 as u64);
        }
        for c in self.hi.coords() {
            fold(&mut h, *c as u32 as u64);
        }
        mix(h)
    }
}

impl fmt::Debug for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}--{}", self.lo, self.hi)
    }
}

/// The ambient graph: full lattice, orthant with `d1` nonnegative
/// coordinates, or a box of radius `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DomainSpec {
    FullLattice { d: usize },
    Orthant { d1: usize, d2: usize },
    Box { d: usize, n: i32 },
}

impl DomainSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DomainSpec::FullLattice { d } => {
                if d < 1 || d > MAX_DIM {
                    return Err(Error::InvalidDomain(format!(
                        "d must be in 1..={MAX_DIM}, got {d}"
                    )));
                }
            }
            DomainSpec::Orthant { d1, d2 } => {
                let d = d1 + d2;
                if d1 < 1 {
                    return Err(Error::InvalidDomain("orthant needs d1 >= 1".into()));
                }
                if d < 1 || d > MAX_DIM {
                    return Err(Error::InvalidDomain(format!(
                        "d1+d2 must be in 1..={MAX_DIM}, got {d}"
                    )));
                }
            }
            DomainSpec::Box { d, n } => {
                if d < 1 || d > MAX_DIM {
                    return Err(Error::InvalidDomain(format!(
                        "d must be in 1..={MAX_DIM}, got {d}"
                    )));
                }
                if n < 1 {
                    return Err(Error::InvalidDomain(format!("box radius must be >= 1, got {n}")));
                }
            }
        }
        Ok(())
    }

    /// Total dimension.
    pub fn d(&self) -> usize {
        match *self {
            DomainSpec::FullLattice { d } => d,
            DomainSpec::Orthant { d1, d2 } => d1 + d2,
            DomainSpec::Box { d, .. } => d,
        }
    }

    /// Number of leading coordinates constrained to be nonnegative.
    pub fn constrained(&self) -> usize {
        match *self {
            DomainSpec::Orthant { d1, .. } => d1,
            _ => 0,
        }
    }

    pub fn contains(&self, v: &Vertex) -> bool {
        if v.dim() != self.d() {
            return false;
        }
        match *self {
            DomainSpec::FullLattice { .. } => true,
            DomainSpec::Orthant { d1, .. } => v.coords()[..d1].iter().all(|&c| c >= 0),
            DomainSpec::Box { n, .. } => v.linf_norm() <= n,
        }
    }

    /// Per-axis coordinate range for the window of given radius.
    fn axis_range(&self, axis: usize, window_radius: i32) -> (i32, i32) {
        match *self {
            DomainSpec::FullLattice { .. } => (-window_radius, window_radius),
            DomainSpec::Orthant { d1, .. } => {
                if axis < d1 {
                    (0, window_radius)
                } else {
                    (-window_radius, window_radius)
                }
            }
            DomainSpec::Box { n, .. } => {
                let m = n.min(window_radius);
                (-m, m)
            }
        }
    }
}

/// Count of domain vertices with sup-norm at most `window_radius`.
pub fn window_vertex_count(spec: &DomainSpec, window_radius: i32) -> u128 {
    let d = spec.d();
    let mut count: u128 = 1;
    for axis in 0..d {
        let (lo, hi) = spec.axis_range(axis, window_radius);
        count *= (hi - lo + 1) as u128;
    }
    count
}

/// All domain vertices with sup-norm at most `window_radius`, in
/// lexicographic order (a box ignores any window larger than itself).
pub fn enumerate_vertices(spec: &DomainSpec, window_radius: i32) -> Result<Vec<Vertex>> {
    enumerate_vertices_capped(spec, window_radius, DEFAULT_VERTEX_CAP)
}

pub fn enumerate_vertices_capped(
    spec: &DomainSpec,
    window_radius: i32,
    cap: u64,
) -> Result<Vec<Vertex>> {
    spec.validate()?;
    if window_radius < 0 {
        return Err(Error::InvalidArgument("window_radius must be >= 0".into()));
    }
    let needed = window_vertex_count(spec, window_radius);
    if needed > cap as u128 {
        return Err(Error::CapacityExceeded { needed, cap });
    }
    let d = spec.d();
    let ranges: Vec<(i32, i32)> = (0..d).map(|a| spec.axis_range(a, window_radius)).collect();
    let mut out = Vec::with_capacity(needed as usize);
    let mut cur: Vec<i32> = ranges.iter().map(|r| r.0).collect();
    loop {
        out.push(Vertex::new(&cur));
        // odometer increment on the last axis keeps lexicographic order
        let mut axis = d;
        loop {
            if axis == 0 {
                return Ok(out);
            }
            axis -= 1;
            if cur[axis] < ranges[axis].1 {
                cur[axis] += 1;
                for r in axis + 1..d {
                    cur[r] = ranges[r].0;
                }
                break;
            }
        }
    }
}

/// All unit edges at `v` with both endpoints in the domain, in axis order
/// (minus direction first).
pub fn incident_edges(spec: &DomainSpec, v: &Vertex) -> Vec<Edge> {
    debug_assert!(spec.contains(v));
    let mut out = Vec::with_capacity(2 * spec.d());
    for axis in 0..spec.d() {
        for step in [-1i32, 1] {
            let u = v.step(axis, step);
            if spec.contains(&u) {
                out.push(Edge::new(*v, u));
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Norm {
    L2,
    Linf,
}

/// A ball in real coordinates, intersected with the domain implicitly by
/// whoever evaluates membership.
#[derive(Clone, Debug, PartialEq)]
pub struct Region {
    pub center: Vec<f64>,
    pub radius: f64,
    pub norm: Norm,
}

impl Region {
    pub fn euclid(center: Vec<f64>, radius: f64) -> Self {
        Region { center, radius, norm: Norm::L2 }
    }

    pub fn sup_norm(center: Vec<f64>, radius: f64) -> Self {
        Region { center, radius, norm: Norm::Linf }
    }

    pub fn contains_point(&self, x: &[f64]) -> bool {
        debug_assert_eq!(x.len(), self.center.len());
        match self.norm {
            Norm::L2 => {
                let s: f64 = x
                    .iter()
                    .zip(&self.center)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                s.sqrt() <= self.radius
            }
            Norm::Linf => x
                .iter()
                .zip(&self.center)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
                <= self.radius,
        }
    }

    pub fn contains_vertex(&self, v: &Vertex) -> bool {
        let x = v.as_f64();
        self.contains_point(&x)
    }
}

/// One of the `2^d` overlapping cubes of side `floor(n(1+eps))` with a corner
/// at `n*sign`, each containing the origin.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CornerCube {
    pub sign: Vec<i8>,
    pub side: i32,
    pub lo: Vec<i32>,
    pub hi: Vec<i32>,
}

impl CornerCube {
    pub fn contains(&self, v: &Vertex) -> bool {
        v.coords()
            .iter()
            .enumerate()
            .all(|(k, &c)| self.lo[k] <= c && c <= self.hi[k])
    }

    /// Sup-norm distance from `v` to the open interior of the cube
    /// (0 when `v` is interior).
    pub fn linf_dist_to_interior(&self, v: &Vertex) -> i32 {
        v.coords()
            .iter()
            .enumerate()
            .map(|(k, &c)| {
                let lo = self.lo[k] + 1;
                let hi = self.hi[k] - 1;
                if c < lo {
                    lo - c
                } else if c > hi {
                    c - hi
                } else {
                    0
                }
            })
            .max()
            .unwrap_or(0)
    }
}

/// Corner-cube decomposition of the box `[-n,n]^d`: `2^d` cubes of side
/// `floor(n(1+eps))`, cube `i` cornered at `n*i` and containing 0; their
/// union covers the box.
pub fn corner_decomposition(n: i32, eps: f64, d: usize) -> Result<Vec<CornerCube>> {
    if n < 1 {
        return Err(Error::InvalidArgument(format!("n must be >= 1, got {n}")));
    }
    if d < 1 || d > MAX_DIM {
        return Err(Error::InvalidArgument(format!("d must be in 1..={MAX_DIM}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "eps must lie in (0,1), got {eps}"
        )));
    }
    let side = (n as f64 * (1.0 + eps)).floor() as i32;
    if side > 2 * n {
        return Err(Error::InvalidArgument(format!(
            "cube side {side} exceeds box diameter {}",
            2 * n
        )));
    }
    let mut cubes = Vec::with_capacity(1 << d);
    for bits in 0..(1u32 << d) {
        let mut sign = vec![0i8; d];
        let mut lo = vec![0i32; d];
        let mut hi = vec![0i32; d];
        for k in 0..d {
            if bits >> k & 1 == 1 {
                sign[k] = 1;
                lo[k] = n - side;
                hi[k] = n;
            } else {
                sign[k] = -1;
                lo[k] = -n;
                hi[k] = -n + side;
            }
        }
        cubes.push(CornerCube { sign, side, lo, hi });
    }
    Ok(cubes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn orthant_radius_one_enumeration() {
        let spec = DomainSpec::Orthant { d1: 2, d2: 0 };
        let vs = enumerate_vertices(&spec, 1).unwrap();
        let expect: Vec<Vertex> = [[0, 0], [0, 1], [1, 0], [1, 1]]
            .iter()
            .map(|c| Vertex::new(c))
            .collect();
        assert_eq!(vs, expect);
    }

    #[test]
    fn line_enumeration() {
        let spec = DomainSpec::FullLattice { d: 1 };
        let vs = enumerate_vertices(&spec, 2).unwrap();
        let coords: Vec<i32> = vs.iter().map(|v| v.coord(0)).collect();
        assert_eq!(coords, vec![-2, -1, 0, 1, 2]);
    }

    #[test]
    fn box_ignores_larger_window() {
        let spec = DomainSpec::Box { d: 2, n: 1 };
        assert_eq!(enumerate_vertices(&spec, 1).unwrap().len(), 9);
        assert_eq!(enumerate_vertices(&spec, 7).unwrap().len(), 9);
    }

    #[test]
    fn capacity_is_enforced() {
        let spec = DomainSpec::FullLattice { d: 2 };
        let err = enumerate_vertices_capped(&spec, 10, 16).unwrap_err();
        assert!(matches!(err, Error::CapacityExceeded { .. }));
    }

    #[test]
    fn corner_degree_is_two() {
        let spec = DomainSpec::Orthant { d1: 2, d2: 0 };
        assert_eq!(incident_edges(&spec, &Vertex::new(&[0, 0])).len(), 2);
    }

    #[test]
    fn interior_degree_is_2d() {
        let spec = DomainSpec::FullLattice { d: 3 };
        assert_eq!(incident_edges(&spec, &Vertex::new(&[1, -4, 2])).len(), 6);
    }

    #[test]
    fn half_space_boundary_degree() {
        let spec = DomainSpec::Orthant { d1: 1, d2: 1 };
        assert_eq!(incident_edges(&spec, &Vertex::new(&[0, 5])).len(), 3);
    }

    #[test]
    fn corner_cubes_n10() {
        let cubes = corner_decomposition(10, 0.5, 2).unwrap();
        assert_eq!(cubes.len(), 4);
        let origin = Vertex::new(&[0, 0]);
        for c in &cubes {
            assert_eq!(c.side, 15);
            assert!(c.contains(&origin));
        }
        // pairwise overlapping
        for a in &cubes {
            for b in &cubes {
                let meets = (0..2).all(|k| a.lo[k].max(b.lo[k]) <= a.hi[k].min(b.hi[k]));
                assert!(meets, "{a:?} vs {b:?}");
            }
        }
    }

    #[test]
    fn corner_cubes_n1_d1() {
        let cubes = corner_decomposition(1, 0.1, 1).unwrap();
        assert_eq!(cubes.len(), 2);
        for c in &cubes {
            assert_eq!(c.side, 1);
            assert!(c.contains(&Vertex::new(&[0])));
        }
        assert_eq!((cubes[0].lo[0], cubes[0].hi[0]), (-1, 0));
        assert_eq!((cubes[1].lo[0], cubes[1].hi[0]), (0, 1));
    }

    #[test]
    fn corner_cubes_cover_box() {
        // exhaustive membership scan over B(8), d=2, eps=0.25
        let n = 8;
        let cubes = corner_decomposition(n, 0.25, 2).unwrap();
        let spec = DomainSpec::Box { d: 2, n };
        for v in enumerate_vertices(&spec, n).unwrap() {
            assert!(cubes.iter().any(|c| c.contains(&v)), "{v} uncovered");
        }
    }

    #[test]
    fn rejects_bad_eps() {
        assert!(corner_decomposition(10, 1.0, 2).is_err());
        assert!(corner_decomposition(10, -0.1, 2).is_err());
    }

    #[test]
    fn edge_canonicalization_and_fingerprint() {
        let a = Vertex::new(&[1, 2]);
        let b = Vertex::new(&[1, 3]);
        let e1 = Edge::new(a, b);
        let e2 = Edge::new(b, a);
        assert_eq!(e1, e2);
        assert_eq!(e1.fingerprint(), e2.fingerprint());
        let f = Edge::new(Vertex::new(&[2, 2]), Vertex::new(&[1, 2]));
        assert_ne!(e1.fingerprint(), f.fingerprint());
    }

    fn arb_domain() -> impl Strategy<Value = DomainSpec> {
        prop_oneof![
            (1usize..=3).prop_map(|d| DomainSpec::FullLattice { d }),
            (1usize..=2, 0usize..=2).prop_map(|(d1, d2)| DomainSpec::Orthant { d1, d2 }),
            (1usize..=3, 1i32..=6).prop_map(|(d, n)| DomainSpec::Box { d, n }),
        ]
    }

    proptest! {
        #[test]
        fn degree_bound(spec in arb_domain(), radius in 0i32..6) {
            let vs = enumerate_vertices(&spec, radius).unwrap();
            let d = spec.d();
            for v in vs {
                let deg = incident_edges(&spec, &v).len();
                prop_assert!(deg <= 2 * d);
                // full degree exactly when every constrained coordinate is >= 1
                // and, for a box, the vertex is interior
                let full = match spec {
                    DomainSpec::FullLattice { .. } => true,
                    DomainSpec::Orthant { d1, .. } =>
                        v.coords()[..d1].iter().all(|&c| c >= 1),
                    DomainSpec::Box { n, .. } => v.linf_norm() < n,
                };
                prop_assert_eq!(deg == 2 * d, full, "{} deg {}", v, deg);
            }
        }

        #[test]
        fn enumeration_is_sorted_and_stable(spec in arb_domain(), radius in 0i32..6) {
            let a = enumerate_vertices(&spec, radius).unwrap();
            let b = enumerate_vertices(&spec, radius).unwrap();
            prop_assert_eq!(&a, &b);
            let mut c = a.clone();
            c.sort();
            c.dedup();
            prop_assert_eq!(a, c);
        }

        #[test]
        fn corner_cube_overlap_margin(n in 2i32..12, eps in 0.05f64..0.95, d in 1usize..=2) {
            let cubes = corner_decomposition(n, eps, d).unwrap();
            let margin = ((n as f64) * eps / 2.0).floor() as i32;
            let spec = DomainSpec::Box { d, n };
            for v in enumerate_vertices(&spec, n).unwrap() {
                let best = cubes.iter().map(|c| c.linf_dist_to_interior(&v)).min().unwrap();
                prop_assert!(best <= margin.max(1), "{} best {} margin {}", v, best, margin);
            }
        }
    }
}
