//! Estimators tying the simulation to the continuum oracles: KS distances,
//! diffusion-constant fits with batch-means confidence intervals, log-tail
//! fits, the local-CLT sup gap, and the smooth bump used by the Dirichlet
//! energy checks.

use crate::continuum::RbmBoxKernel;
use crate::error::{Error, Result};
use crate::spectral::SpectralInstance;

/// A sorted sample of one-dimensional values.
#[derive(Clone, Debug)]
pub struct EmpiricalSample {
    values: Vec<f64>,
}

impl EmpiricalSample {
    pub fn from_values(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("empty sample".into()));
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::InvalidArgument("sample contains NaN".into()));
        }
        values.sort_by(f64::total_cmp);
        Ok(EmpiricalSample { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Kolmogorov–Smirnov statistic against a CDF oracle. The oracle's left
/// limits are probed one ulp below each sample point, so atomic oracles
/// (e.g. a sample compared against its own empirical law) are handled
/// exactly.
pub fn ks_distance(sample: &EmpiricalSample, cdf: &dyn Fn(f64) -> f64) -> f64 {
    let n = sample.len() as f64;
    let values = sample.values();
    let mut sup = 0.0f64;
    let mut i = 0usize;
    while i < values.len() {
        let x = values[i];
        let mut j = i;
        while j + 1 < values.len() && values[j + 1] == x {
            j += 1;
        }
        let below = i as f64 / n;
        let above = (j + 1) as f64 / n;
        sup = sup.max((cdf(x) - above).abs());
        sup = sup.max((cdf(x.next_down()) - below).abs());
        i = j + 1;
    }
    sup.min(1.0)
}

/// One-sided 1% KS acceptance bound for a sample of size `n`.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.63 / (n as f64).sqrt()
}

#[derive(Clone, Debug)]
pub struct DiffusionFit {
    pub c_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub batches: usize,
}

impl DiffusionFit {
    pub fn overlaps(&self, other: &DiffusionFit) -> bool {
        self.ci_low <= other.ci_high && other.ci_low <= self.ci_high
    }
}

/// Least squares of per-time displacement second moments against `c * t`,
/// with a batch-means confidence interval over paths. `data` holds, per grid
/// time, the per-path displacement values (same path order at every time).
pub fn diffusion_constant_fit(data: &[(f64, Vec<f64>)], batches: usize) -> Result<DiffusionFit> {
    if data.len() < 2 {
        return Err(Error::InvalidArgument("need at least 2 time points".into()));
    }
    let m = data[0].1.len();
    if m == 0 || data.iter().any(|(_, xs)| xs.len() != m) {
        return Err(Error::InvalidArgument(
            "every time slice needs the same positive path count".into(),
        ));
    }
    let first = data[0].1[0];
    if data.iter().all(|(_, xs)| xs.iter().all(|&x| x == first)) {
        return Err(Error::InvalidArgument("degenerate (all-equal) data".into()));
    }
    let batches = batches.max(2).min(m);
    let tt: f64 = data.iter().map(|(t, _)| t * t).sum();
    let fit_over = |range: std::ops::Range<usize>| -> f64 {
        let mut num = 0.0;
        for (t, xs) in data {
            let ms: f64 =
                xs[range.clone()].iter().map(|x| x * x).sum::<f64>() / range.len() as f64;
            num += t * ms;
        }
        num / tt
    };
    let c_hat = fit_over(0..m);
    let mut batch_fits = Vec::with_capacity(batches);
    for b in 0..batches {
        let lo = b * m / batches;
        let hi = ((b + 1) * m / batches).max(lo + 1);
        batch_fits.push(fit_over(lo..hi.min(m)));
    }
    let bn = batch_fits.len() as f64;
    let mean: f64 = batch_fits.iter().sum::<f64>() / bn;
    let var: f64 = batch_fits.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / (bn - 1.0);
    let se = (var / bn).sqrt();
    use statrs::distribution::{ContinuousCDF, StudentsT};
    let tq = StudentsT::new(0.0, 1.0, bn - 1.0)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?
        .inverse_cdf(0.975);
    Ok(DiffusionFit {
        c_hat,
        ci_low: c_hat - tq * se,
        ci_high: c_hat + tq * se,
        batches,
    })
}

#[derive(Clone, Debug)]
pub struct TailFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub censored_fraction: f64,
    pub support_points: usize,
}

/// Count-weighted linear regression of log-frequencies against `k`.
pub fn tail_fit(points: &[(f64, u64)], censored: u64) -> Result<TailFit> {
    let support: Vec<(f64, f64, f64)> = points
        .iter()
        .filter(|(_, c)| *c > 0)
        .map(|&(k, c)| (k, (c as f64).ln(), c as f64))
        .collect();
    if support.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "tail fit needs at least 3 positive support points, got {}",
            support.len()
        )));
    }
    let wsum: f64 = support.iter().map(|(_, _, w)| w).sum();
    let kbar: f64 = support.iter().map(|(k, _, w)| k * w).sum::<f64>() / wsum;
    let ybar: f64 = support.iter().map(|(_, y, w)| y * w).sum::<f64>() / wsum;
    let sxx: f64 = support.iter().map(|(k, _, w)| w * (k - kbar) * (k - kbar)).sum();
    let sxy: f64 = support.iter().map(|(k, y, w)| w * (k - kbar) * (y - ybar)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("tail support is a single abscissa".into()));
    }
    let slope = sxy / sxx;
    let intercept = ybar - slope * kbar;
    let ss_tot: f64 = support.iter().map(|(_, y, w)| w * (y - ybar) * (y - ybar)).sum();
    let ss_res: f64 = support
        .iter()
        .map(|(k, y, w)| {
            let e = y - (intercept + slope * k);
            w * e * e
        })
        .sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    let total: u64 = points.iter().map(|(_, c)| c).sum::<u64>() + censored;
    Ok(TailFit {
        slope,
        intercept,
        r_squared,
        censored_fraction: if total == 0 { 0.0 } else { censored as f64 / total as f64 },
        support_points: support.len(),
    })
}

#[derive(Clone, Debug)]
pub struct LocalCltEntry {
    pub t: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub discrete: f64,
    pub continuum: f64,
    pub gap: f64,
}

#[derive(Clone, Debug)]
pub struct LocalCltReport {
    pub sup_gap: f64,
    pub entries: Vec<LocalCltEntry>,
    pub skipped: usize,
}

/// Nearest carrier vertex to `n * x` in sup norm, ties broken toward the
/// lexicographically smallest vertex; `None` when nothing lies within
/// `(log n)^2`.
pub fn nearest_carrier_vertex(
    instance: &SpectralInstance,
    n: u32,
    x: &[f64],
) -> Option<usize> {
    let target: Vec<f64> = x.iter().map(|v| v * n as f64).collect();
    let limit = ((n as f64).ln().powi(2)).max(2.0);
    let mut best: Option<(f64, usize)> = None;
    for (i, v) in instance.vertices().iter().enumerate() {
        let dist = v
            .coords()
            .iter()
            .zip(&target)
            .map(|(&c, t)| (c as f64 - t).abs())
            .fold(0.0, f64::max);
        best = match best {
            None => Some((dist, i)),
            Some((bd, bi)) => {
                if dist < bd
                    || (dist == bd && instance.vertices()[i] < instance.vertices()[bi])
                {
                    Some((dist, i))
                } else {
                    Some((bd, bi))
                }
            }
        };
    }
    match best {
        Some((d, i)) if d <= limit => Some(i),
        _ => None,
    }
}

/// Sup gap between the volume-normalized discrete kernel at diffusive times
/// and the continuum box kernel over a deterministic `(x, y, t)` grid:
/// `| n^d q_{n^2 t}(g_n(x), g_n(y)) - q^{rbm}_t(x, y) |`.
pub fn local_clt_gap(
    instance: &SpectralInstance,
    n: u32,
    kernel: &RbmBoxKernel,
    t_grid: &[f64],
    space_grid: &[Vec<f64>],
) -> Result<LocalCltReport> {
    let d = kernel.dimension();
    let vol = (n as f64).powi(d as i32);
    let mut entries = Vec::new();
    let mut skipped = 0usize;
    let mut sup_gap = 0.0f64;
    // resolve grid points once
    let resolved: Vec<Option<usize>> = space_grid
        .iter()
        .map(|x| nearest_carrier_vertex(instance, n, x))
        .collect();
    for &t in t_grid {
        let q = instance.heat_kernel((n as f64) * (n as f64) * t)?;
        for (ai, x) in space_grid.iter().enumerate() {
            let Some(i) = resolved[ai] else {
                skipped += space_grid.len();
                continue;
            };
            for (bj, y) in space_grid.iter().enumerate() {
                let Some(j) = resolved[bj] else {
                    skipped += 1;
                    continue;
                };
                let discrete = vol * q[(i, j)];
                let continuum = kernel.density(t, x, y)?;
                let gap = (discrete - continuum).abs();
                sup_gap = sup_gap.max(gap);
                entries.push(LocalCltEntry {
                    t,
                    x: x.clone(),
                    y: y.clone(),
                    discrete,
                    continuum,
                    gap,
                });
            }
        }
    }
    Ok(LocalCltReport { sup_gap, entries, skipped })
}

/// Smooth compactly supported bump `exp(1 - 1/(1 - |x|^2/rho^2))` on the
/// ball of radius `rho`, zero outside.
#[derive(Clone, Copy, Debug)]
pub struct SmoothBump {
    pub rho: f64,
}

impl SmoothBump {
    pub fn new(rho: f64) -> Result<Self> {
        if !(rho > 0.0) {
            return Err(Error::InvalidArgument("bump radius must be positive".into()));
        }
        Ok(SmoothBump { rho })
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let s: f64 = x.iter().map(|v| v * v).sum::<f64>() / (self.rho * self.rho);
        if s >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - s)).exp()
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let rho2 = self.rho * self.rho;
        let s: f64 = x.iter().map(|v| v * v).sum::<f64>() / rho2;
        if s >= 1.0 {
            return vec![0.0; x.len()];
        }
        let f = (1.0 - 1.0 / (1.0 - s)).exp();
        let chain = -f / ((1.0 - s) * (1.0 - s));
        x.iter().map(|&v| chain * 2.0 * v / rho2).collect()
    }

    /// `∫ |∇f|^2 dx` over the support by tensor Simpson quadrature.
    pub fn grad_sq_integral(&self, d: usize, nodes_per_axis: usize) -> f64 {
        let n = if nodes_per_axis % 2 == 0 { nodes_per_axis } else { nodes_per_axis + 1 };
        let h = 2.0 * self.rho / n as f64;
        let weight = |i: usize| -> f64 {
            if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            }
        };
        match d {
            1 => {
                let mut acc = 0.0;
                for i in 0..=n {
                    let x = [-self.rho + i as f64 * h];
                    let g = self.gradient(&x);
                    acc += weight(i) * g[0] * g[0];
                }
                acc * h / 3.0
            }
            2 => {
                let mut acc = 0.0;
                for i in 0..=n {
                    let xi = -self.rho + i as f64 * h;
                    for j in 0..=n {
                        let xj = -self.rho + j as f64 * h;
                        let g = self.gradient(&[xi, xj]);
                        acc += weight(i) * weight(j) * (g[0] * g[0] + g[1] * g[1]);
                    }
                }
                acc * (h / 3.0) * (h / 3.0)
            }
            3 => {
                let mut acc = 0.0;
                for i in 0..=n {
                    let xi = -self.rho + i as f64 * h;
                    for j in 0..=n {
                        let xj = -self.rho + j as f64 * h;
                        for k in 0..=n {
                            let xk = -self.rho + k as f64 * h;
                            let g = self.gradient(&[xi, xj, xk]);
                            let g2: f64 = g.iter().map(|v| v * v).sum();
                            acc += weight(i) * weight(j) * weight(k) * g2;
                        }
                    }
                }
                acc * (h / 3.0).powi(3)
            }
            _ => panic!("bump quadrature supports d <= 3"),
        }
    }
}

/// Folded-normal CDF: law of `|x0 + N(0, sigma^2)|`.
pub fn folded_normal_cdf(x0: f64, sigma: f64, z: f64) -> f64 {
    use statrs::distribution::{ContinuousCDF, Normal};
    if z < 0.0 {
        return 0.0;
    }
    let n = Normal::new(0.0, 1.0).expect("unit normal");
    n.cdf((z - x0) / sigma) - n.cdf((-z - x0) / sigma)
}
