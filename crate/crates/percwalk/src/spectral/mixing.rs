//! `L^p` mixing times: first time the worst-case `L^p(pi)` deviation of the
//! stationary-normalized kernel from 1 drops below 1/4, located by bisection
//! on uniformization evaluations.

use super::SpectralInstance;
use crate::error::{Error, Result};
use serde::Serialize;

pub const MIXING_THRESHOLD: f64 = 0.25;

#[derive(Clone, Debug, Serialize)]
pub struct MixingReport {
    /// "1", "2", ..., or "inf".
    pub p: String,
    pub threshold: f64,
    pub t_mix: f64,
    /// Certified bracket: deviation at `bracket.0` is above the threshold
    /// (when positive), at `bracket.1` below.
    pub bracket: (f64, f64),
    pub deviation_below_threshold: f64,
    pub deviation_above_threshold: Option<f64>,
    pub spectral_gap: f64,
    pub stationary: Vec<f64>,
}

fn p_label(p: f64) -> String {
    if p.is_infinite() {
        "inf".to_string()
    } else if p.fract() == 0.0 {
        format!("{}", p as i64)
    } else {
        format!("{p}")
    }
}

/// Worst-case `L^p(pi)` deviation of the pi-normalized kernel from 1.
pub(crate) fn deviation(instance: &SpectralInstance, pi: &[f64], t: f64, p: f64) -> Result<f64> {
    let q = instance.heat_kernel(t)?;
    let n = instance.dim();
    let mut worst = 0.0f64;
    for x in 0..n {
        let v = if p.is_infinite() {
            let mut m = 0.0f64;
            for y in 0..n {
                m = m.max((q[(x, y)] / pi[y] - 1.0).abs());
            }
            m
        } else {
            let mut s = 0.0;
            for y in 0..n {
                s += (q[(x, y)] / pi[y] - 1.0).abs().powf(p) * pi[y];
            }
            s.powf(1.0 / p)
        };
        worst = worst.max(v);
    }
    Ok(worst)
}

pub(crate) fn mixing_time(instance: &SpectralInstance, p: f64) -> Result<MixingReport> {
    if !(p >= 1.0) {
        return Err(Error::InvalidArgument(format!("p must be in [1, inf], got {p}")));
    }
    if instance.boundary != super::SpectralBoundary::None {
        return Err(Error::InvalidArgument(
            "mixing time needs the unkilled walk".into(),
        ));
    }
    if !instance.is_connected() {
        return Err(Error::Disconnected);
    }
    let n = instance.dim();
    let total: f64 = instance.measure().iter().sum();
    let pi: Vec<f64> = instance.measure().iter().map(|m| m / total).collect();
    let gap = instance.spectral_gap();
    if n == 1 {
        return Ok(MixingReport {
            p: p_label(p),
            threshold: MIXING_THRESHOLD,
            t_mix: 0.0,
            bracket: (0.0, 0.0),
            deviation_below_threshold: 0.0,
            deviation_above_threshold: None,
            spectral_gap: gap,
            stationary: pi,
        });
    }

    // at t -> 0+ the deviation is at least 1/min(pi) - 1 >= 1 > 1/4
    let mut lo = 0.0f64;
    let mut dev_lo: Option<f64> = None;
    let mut hi = if gap > 0.0 { 1.0 / gap } else { 1.0 };
    let mut dev_hi = deviation(instance, &pi, hi, p)?;
    let mut guard = 0;
    while dev_hi >= MIXING_THRESHOLD {
        lo = hi;
        dev_lo = Some(dev_hi);
        hi *= 2.0;
        dev_hi = deviation(instance, &pi, hi, p)?;
        guard += 1;
        if guard > 200 {
            return Err(Error::Singular("mixing bisection failed to bracket".into()));
        }
    }
    while hi - lo > 1e-6 * hi {
        let mid = 0.5 * (lo + hi);
        let dev = deviation(instance, &pi, mid, p)?;
        if dev < MIXING_THRESHOLD {
            hi = mid;
            dev_hi = dev;
        } else {
            lo = mid;
            dev_lo = Some(dev);
        }
    }
    Ok(MixingReport {
        p: p_label(p),
        threshold: MIXING_THRESHOLD,
        t_mix: hi,
        bracket: (lo, hi),
        deviation_below_threshold: dev_hi,
        deviation_above_threshold: dev_lo,
        spectral_gap: gap,
        stationary: pi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{build_cluster_index, sample_environment, ConductanceLaw};
    use crate::lattice::{DomainSpec, Region};
    use crate::spectral::{build_instance, SpectralBoundary};
    use crate::walk::WalkKind;

    fn line_instance(radius: f64) -> SpectralInstance {
        let env = sample_environment(
            DomainSpec::FullLattice { d: 1 },
            6,
            ConductanceLaw::Constant { w: 1.0 },
            1,
            Some(2.0),
        )
        .unwrap();
        let index = build_cluster_index(&env).unwrap();
        build_instance(
            &env,
            &index,
            &Region::sup_norm(vec![0.0], radius),
            WalkKind::Vsrw,
            SpectralBoundary::None,
        )
        .unwrap()
    }

    #[test]
    fn single_vertex_mixes_instantly() {
        let inst = line_instance(0.0);
        let rep = inst.mixing_time(f64::INFINITY).unwrap();
        assert_eq!(rep.t_mix, 0.0);
    }

    fn pair_instance() -> SpectralInstance {
        let env = sample_environment(
            DomainSpec::Box { d: 1, n: 4 },
            4,
            ConductanceLaw::Constant { w: 1.0 },
            1,
            Some(2.0),
        )
        .unwrap();
        let index = build_cluster_index(&env).unwrap();
        build_instance(
            &env,
            &index,
            &Region::sup_norm(vec![0.5], 0.75),
            WalkKind::Vsrw,
            SpectralBoundary::None,
        )
        .unwrap()
    }

    #[test]
    fn two_state_matches_eigen_oracle() {
        // deviation e^{-2t} crosses 1/4 at t = ln(4)/2
        let inst = pair_instance();
        assert_eq!(inst.dim(), 2);
        let rep = inst.mixing_time(f64::INFINITY).unwrap();
        let expect = (4.0f64).ln() / 2.0;
        assert!(
            (rep.t_mix - expect).abs() < 1e-5,
            "t_mix {} expect {expect}",
            rep.t_mix
        );
        assert!((rep.spectral_gap - 2.0).abs() < 1e-10);
        // bisection certificate
        assert!(rep.deviation_below_threshold < MIXING_THRESHOLD);
        assert!(rep.deviation_above_threshold.unwrap() >= MIXING_THRESHOLD);
        assert!(rep.bracket.1 - rep.bracket.0 <= 1e-6 * rep.bracket.1 * 1.01);
    }

    #[test]
    fn lp_mixing_times_are_monotone_in_p() {
        let inst = line_instance(2.0);
        let t1 = inst.mixing_time(1.0).unwrap().t_mix;
        let t2 = inst.mixing_time(2.0).unwrap().t_mix;
        let ti = inst.mixing_time(f64::INFINITY).unwrap().t_mix;
        assert!(t1 <= t2 + 1e-9, "t1 {t1} t2 {t2}");
        assert!(t2 <= ti + 1e-9, "t2 {t2} tinf {ti}");
    }

    #[test]
    fn rejects_bad_inputs() {
        let inst = line_instance(1.0);
        assert!(inst.mixing_time(0.5).is_err());
    }
}
