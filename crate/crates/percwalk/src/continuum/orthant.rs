//! Sampling reflecting Brownian motion on an orthant by coordinate folding:
//! each constrained coordinate is `|x_i + W_i|`, applied increment by
//! increment at the grid resolution. Folding at the grid points is exact in
//! law (the increment is symmetric), so there is no boundary discretization
//! error at the recorded times.

use crate::error::{Error, Result};
use crate::rng::{mix, CounterRng};

/// Sample one path of reflecting Brownian motion on `R_+^{d1} x R^{d2}` run
/// at time scale `c`, recorded at the given strictly increasing times.
/// Returns one coordinate vector per grid time.
pub fn rbm_orthant_sample(
    d1: usize,
    d2: usize,
    start: &[f64],
    times: &[f64],
    c: f64,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let d = d1 + d2;
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be >= 1".into()));
    }
    if start.len() != d {
        return Err(Error::InvalidArgument("start dimension mismatch".into()));
    }
    if !(c > 0.0) {
        return Err(Error::InvalidArgument("time scale must be positive".into()));
    }
    for (k, &s) in start.iter().enumerate().take(d1) {
        if s < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "constrained coordinate {k} starts at {s} < 0"
            )));
        }
    }
    let mut prev_t = 0.0f64;
    for &t in times {
        if !(t > prev_t) {
            return Err(Error::InvalidArgument(
                "times must be strictly increasing and positive".into(),
            ));
        }
        prev_t = t;
    }

    let mut rng = CounterRng::new(mix(seed));
    let mut pos: Vec<f64> = start.to_vec();
    let mut out = Vec::with_capacity(times.len());
    let mut last = 0.0f64;
    for &t in times {
        let dt = t - last;
        let sigma = (c * dt).sqrt();
        for (k, p) in pos.iter_mut().enumerate() {
            let step = sigma * rng.standard_normal();
            *p += step;
            if k < d1 {
                *p = p.abs();
            }
        }
        out.push(pos.clone());
        last = t;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_coordinates_have_brownian_variance() {
        // d1 = 0: plain Brownian marginals, variance c*t
        let t = 0.8;
        let c = 2.0;
        let n = 20_000;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for seed in 0..n {
            let path = rbm_orthant_sample(0, 1, &[0.0], &[t], c, seed).unwrap();
            let x = path[0][0];
            sum += x;
            sumsq += x * x;
        }
        let mean = sum / n as f64;
        let var = sumsq / n as f64 - mean * mean;
        assert!(mean.abs() < 0.03, "mean {mean}");
        assert!((var - c * t).abs() < 0.05, "var {var} expect {}", c * t);
    }

    #[test]
    fn folded_coordinate_is_half_normal() {
        // started at 0, |W_{ct}| has mean sqrt(2ct/pi)
        let t = 1.3;
        let c = 1.0;
        let n = 20_000;
        let mut sum = 0.0;
        for seed in 0..n {
            let path = rbm_orthant_sample(1, 0, &[0.0], &[0.4, t], c, seed).unwrap();
            sum += path[1][0];
            assert!(path[0][0] >= 0.0 && path[1][0] >= 0.0);
        }
        let mean = sum / n as f64;
        let expect = (2.0 * c * t / std::f64::consts::PI).sqrt();
        assert!((mean - expect).abs() < 0.02, "mean {mean} expect {expect}");
    }

    #[test]
    fn far_from_boundary_folding_is_invisible() {
        // starting far away at small times, folded and free paths coincide
        let start = 8.0;
        let times: Vec<f64> = (1..=16).map(|i| i as f64 * 0.01).collect();
        let mut agree = 0;
        let total = 2000;
        for seed in 0..total {
            let folded = rbm_orthant_sample(1, 0, &[start], &times, 1.0, seed).unwrap();
            let free = rbm_orthant_sample(0, 1, &[start], &times, 1.0, seed).unwrap();
            if folded
                .iter()
                .zip(&free)
                .all(|(a, b)| (a[0] - b[0]).abs() < 1e-12)
            {
                agree += 1;
            }
        }
        // crossing 8 standard deviations in 0.16 time units is essentially
        // impossible: every path must agree
        assert_eq!(agree, total);
    }

    #[test]
    fn input_validation() {
        assert!(rbm_orthant_sample(1, 0, &[-1.0], &[1.0], 1.0, 0).is_err());
        assert!(rbm_orthant_sample(1, 0, &[0.0], &[1.0, 0.5], 1.0, 0).is_err());
        assert!(rbm_orthant_sample(1, 0, &[0.0], &[1.0], 0.0, 0).is_err());
    }
}
