//! Exact dense linear algebra on small cluster windows: walk generators and
//! their symmetrizing measures, resolvents, heat kernels via uniformization,
//! expected exit times, harmonic profiles, Dirichlet energies, and mixing
//! times.

mod harmonic;
mod heat;
mod mixing;

pub use harmonic::{harmonic_profile, HarmonicReport};
pub use mixing::MixingReport;

use crate::environment::{ClusterIndex, Environment};
use crate::error::{Error, Result};
use crate::lattice::{Region, Vertex};
use crate::walk::WalkKind;
use nalgebra::{DMatrix, DVector};
use std::collections::HashMap;
use std::io::Write;

/// Default cap on instance size; correctness over scale.
pub const DEFAULT_SPECTRAL_CAP: usize = 5000;

/// Heat-kernel truncation budget (uniformization tail).
pub const HEAT_BUDGET: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectralBoundary {
    /// Walk restricted to the induced subgraph; rows sum to zero.
    None,
    /// Killed on exit: diagonal carries the full jump rate, so rows sum to
    /// at most zero and mass leaks at the boundary.
    Killed,
}

/// Dense generator of the walk on a finite carrier, with its symmetrizing
/// measure (counting measure for the variable-speed walk, the vertex weights
/// for the constant-speed walk).
#[derive(Clone, Debug)]
pub struct SpectralInstance {
    pub kind: WalkKind,
    pub boundary: SpectralBoundary,
    vertices: Vec<Vertex>,
    lookup: HashMap<Vertex, usize>,
    generator: DMatrix<f64>,
    measure: DVector<f64>,
    connected: bool,
    max_abs_row_sum: f64,
}

/// Build the instance over the C1-proxy vertices inside `region`.
pub fn build_instance(
    env: &Environment,
    index: &ClusterIndex,
    region: &Region,
    kind: WalkKind,
    boundary: SpectralBoundary,
) -> Result<SpectralInstance> {
    build_instance_capped(env, index, region, kind, boundary, DEFAULT_SPECTRAL_CAP)
}

pub fn build_instance_capped(
    env: &Environment,
    index: &ClusterIndex,
    region: &Region,
    kind: WalkKind,
    boundary: SpectralBoundary,
    cap: usize,
) -> Result<SpectralInstance> {
    if kind == WalkKind::Discrete {
        return Err(Error::InvalidArgument(
            "spectral instances cover the continuous-time walks only".into(),
        ));
    }
    let mut ids: Vec<u32> = (0..env.vertices().len() as u32)
        .filter(|&i| index.in_c1(i) && region.contains_vertex(&env.vertex(i)))
        .collect();
    ids.sort_unstable();
    let n = ids.len();
    if n == 0 {
        return Err(Error::EmptyCluster);
    }
    if n > cap {
        return Err(Error::SpectralCapExceeded { have: n, cap });
    }
    let vertices: Vec<Vertex> = ids.iter().map(|&i| env.vertex(i)).collect();
    let mut lookup = HashMap::with_capacity(n);
    for (i, v) in vertices.iter().enumerate() {
        lookup.insert(*v, i);
    }
    let mut pos_of_id: HashMap<u32, usize> = HashMap::with_capacity(n);
    for (i, &id) in ids.iter().enumerate() {
        pos_of_id.insert(id, i);
    }

    // variable-speed generator rows; the diagonal is the negated sum of the
    // very same addends, so unkilled rows cancel exactly
    let mut gen = DMatrix::<f64>::zeros(n, n);
    let mut rates = DVector::<f64>::zeros(n);
    for (i, &id) in ids.iter().enumerate() {
        let mut row_total = 0.0;
        for (u, w) in index.adj_o1.neighbors(id) {
            match pos_of_id.get(&u) {
                Some(&j) => {
                    gen[(i, j)] = w;
                    row_total += w;
                }
                None => {
                    if boundary == SpectralBoundary::Killed {
                        row_total += w;
                    }
                }
            }
        }
        gen[(i, i)] = -row_total;
        rates[i] = row_total;
    }
    let measure = match kind {
        WalkKind::Vsrw => DVector::from_element(n, 1.0),
        WalkKind::Csrw => {
            for i in 0..n {
                let r = rates[i];
                if r > 0.0 {
                    for j in 0..n {
                        gen[(i, j)] /= r;
                    }
                }
            }
            rates.clone()
        }
        WalkKind::Discrete => unreachable!(),
    };

    // detailed-balance audit: nu_i L_ij == nu_j L_ji
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            let a = measure[i] * gen[(i, j)];
            let b = measure[j] * gen[(j, i)];
            worst = worst.max((a - b).abs() / a.abs().max(b.abs()).max(1.0));
        }
    }
    if worst > 1e-12 {
        return Err(Error::Singular(format!(
            "generator fails detailed balance by {worst:e}"
        )));
    }

    let max_abs_row_sum = (0..n)
        .map(|i| (0..n).map(|j| gen[(i, j)]).sum::<f64>().abs())
        .fold(0.0, f64::max);

    // connectivity of the carrier graph
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut reached = 1;
    while let Some(v) = stack.pop() {
        for j in 0..n {
            if j != v && gen[(v, j)] != 0.0 && !seen[j] {
                seen[j] = true;
                reached += 1;
                stack.push(j);
            }
        }
    }

    Ok(SpectralInstance {
        kind,
        boundary,
        vertices,
        lookup,
        generator: gen,
        measure,
        connected: reached == n,
        max_abs_row_sum,
    })
}

impl SpectralInstance {
    pub fn dim(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn index_of(&self, v: &Vertex) -> Option<usize> {
        self.lookup.get(v).copied()
    }

    pub fn generator(&self) -> &DMatrix<f64> {
        &self.generator
    }

    pub fn measure(&self) -> &DVector<f64> {
        &self.measure
    }

    pub fn is_connected(&self) -> bool {
        self.connected
    }

    /// Largest absolute row sum; exactly zero for unkilled integer-weight
    /// instances.
    pub fn max_abs_row_sum(&self) -> f64 {
        self.max_abs_row_sum
    }

    /// `e^{tL}` by uniformization (Poisson mixture of powers of the
    /// substochastic jump matrix) with truncation bound `HEAT_BUDGET`,
    /// dyadically squared when `lambda t` is large.
    pub fn heat_kernel(&self, t: f64) -> Result<DMatrix<f64>> {
        heat::uniformized_exponential(&self.generator, t, HEAT_BUDGET).map(|(q, _)| q)
    }

    /// Heat kernel plus its reported truncation bound.
    pub fn heat_kernel_with_bound(&self, t: f64) -> Result<(DMatrix<f64>, f64)> {
        heat::uniformized_exponential(&self.generator, t, HEAT_BUDGET)
    }

    /// Solve `(lambda - L) u = f` exactly (dense LU).
    pub fn resolvent_apply(&self, lambda: f64, f: &DVector<f64>) -> Result<DVector<f64>> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidArgument("resolvent needs lambda > 0".into()));
        }
        if f.len() != self.dim() {
            return Err(Error::InvalidArgument("resolvent input dimension mismatch".into()));
        }
        let mut a = -self.generator.clone();
        for i in 0..self.dim() {
            a[(i, i)] += lambda;
        }
        let lu = a.lu();
        lu.solve(f)
            .ok_or_else(|| Error::Singular("resolvent system is singular".into()))
    }

    /// Expected exit time from the killed carrier, started at `x`:
    /// the solution of `L u = -1` with zero exterior condition.
    pub fn expected_exit_time(&self, x: &Vertex) -> Result<f64> {
        if self.boundary != SpectralBoundary::Killed {
            return Err(Error::InvalidArgument(
                "expected exit times need a killed instance".into(),
            ));
        }
        let i = self
            .index_of(x)
            .ok_or(Error::CarrierMembership(*x))?;
        let rhs = DVector::from_element(self.dim(), 1.0);
        let lu = (-self.generator.clone()).lu();
        let u = lu
            .solve(&rhs)
            .ok_or_else(|| Error::Singular("exit-time system is singular".into()))?;
        Ok(u[i])
    }

    /// Smallest nonzero eigenvalue of `-L` in the measure-weighted inner
    /// product.
    pub fn spectral_gap(&self) -> f64 {
        let n = self.dim();
        if n <= 1 {
            return 0.0;
        }
        let mut s = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                s[(i, j)] = -(self.measure[i].sqrt() * self.generator[(i, j)]
                    / self.measure[j].sqrt());
            }
        }
        let s = (&s + s.transpose()) * 0.5;
        let mut eig: Vec<f64> = s.symmetric_eigenvalues().iter().copied().collect();
        eig.sort_by(f64::total_cmp);
        match self.boundary {
            SpectralBoundary::Killed => eig[0].max(0.0),
            SpectralBoundary::None => eig.get(1).copied().unwrap_or(0.0).max(0.0),
        }
    }

    /// `L^p` mixing time of the walk against its stationary law.
    pub fn mixing_time(&self, p: f64) -> Result<MixingReport> {
        mixing::mixing_time(self, p)
    }

    /// Sparse-triplet dump: `# percwalk-matrix v1`, a `# dim n` line,
    /// one `measure i value` line per vertex, then `i j value` rows for the
    /// nonzero generator entries in row-major order.
    pub fn write_triplets<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# percwalk-matrix v1")?;
        writeln!(out, "# dim {}", self.dim())?;
        for i in 0..self.dim() {
            writeln!(out, "measure {} {}", i, self.measure[i])?;
        }
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let v = self.generator[(i, j)];
                if v != 0.0 {
                    writeln!(out, "{i} {j} {v}")?;
                }
            }
        }
        Ok(())
    }
}

/// Rescaled Dirichlet energy of `f` over the open edges of the cluster
/// proxy: `n^{2-d} * sum_edges (f(x/n) - f(y/n))^2 mu_e`. Errors when the
/// support of `f` reaches the trusted window boundary.
pub fn dirichlet_energy(
    env: &Environment,
    index: &ClusterIndex,
    n: u32,
    f: &dyn Fn(&[f64]) -> f64,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("scale must be >= 1".into()));
    }
    let d = env.domain().d();
    let scale = n as f64;
    let window = env.window();
    let mut sum = 0.0;
    for rec in env.edges() {
        if rec.weight <= 0.0 || !index.in_c1(rec.a) || !index.in_c1(rec.b) {
            continue;
        }
        let (a, b) = env.edge_endpoints(rec);
        let fa = f(&a.coords().iter().map(|&c| c as f64 / scale).collect::<Vec<_>>());
        let fb = f(&b.coords().iter().map(|&c| c as f64 / scale).collect::<Vec<_>>());
        if fa == 0.0 && fb == 0.0 {
            continue;
        }
        if a.linf_norm() >= window || b.linf_norm() >= window {
            return Err(Error::SupportEscapesWindow);
        }
        let diff = fa - fb;
        sum += diff * diff * rec.weight;
    }
    Ok(scale.powi(2 - d as i32) * sum)
}
