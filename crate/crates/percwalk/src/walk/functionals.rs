//! Path functionals: diffusive rescaling, exit times from regions, and the
//! continuity modulus used in the tightness criterion.

use super::WalkPath;
use crate::error::{Error, Result};
use crate::lattice::Region;

/// Diffusively rescaled view: evaluation `t -> Y_{n^2 t} / n`, exact on the
/// stored events (no resampling).
#[derive(Clone, Debug)]
pub struct RescaledPath {
    pub scale: u32,
    pub eval_horizon: f64,
    path: WalkPath,
}

impl RescaledPath {
    pub fn path(&self) -> &WalkPath {
        &self.path
    }

    /// Rescaled position at time `t <= eval_horizon`.
    pub fn eval(&self, t: f64) -> Vec<f64> {
        debug_assert!(t >= 0.0 && t <= self.eval_horizon + 1e-12);
        let n = self.scale as f64;
        let raw = self.path.position_at((n * n * t).min(self.path.horizon));
        raw.coords().iter().map(|&c| c as f64 / n).collect()
    }

    /// Rescaled jump times, increasing, within the evaluation horizon.
    pub fn event_times(&self) -> impl Iterator<Item = f64> + '_ {
        let n2 = (self.scale as f64) * (self.scale as f64);
        self.path.events().iter().map(move |e| e.time / n2)
    }
}

/// Wrap a path for diffusive rescaling; the stored horizon must cover
/// `n^2 * eval_horizon`.
pub fn rescale(path: WalkPath, scale: u32, eval_horizon: f64) -> Result<RescaledPath> {
    if scale == 0 {
        return Err(Error::InvalidArgument("scale must be >= 1".into()));
    }
    let needed = (scale as f64) * (scale as f64) * eval_horizon;
    if path.horizon + 1e-9 < needed {
        return Err(Error::InsufficientHorizon { have: path.horizon, needed });
    }
    Ok(RescaledPath { scale, eval_horizon, path })
}

/// First exit time from a region, or censoring at the horizon.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExitOutcome {
    Exited(f64),
    /// Never left within the horizon; the value is the censoring time.
    Censored(f64),
}

impl ExitOutcome {
    pub fn time_or_censor(&self) -> f64 {
        match *self {
            ExitOutcome::Exited(t) | ExitOutcome::Censored(t) => t,
        }
    }

    pub fn exited_before(&self, t: f64) -> bool {
        matches!(self, ExitOutcome::Exited(s) if *s < t)
    }
}

/// First event time at which the walk sits outside the region.
pub fn exit_time(path: &WalkPath, region: &Region) -> Result<ExitOutcome> {
    let ev = path.events();
    if !region.contains_vertex(&ev[0].vertex) {
        return Err(Error::StartOutsideRegion);
    }
    for e in &ev[1..] {
        if !region.contains_vertex(&e.vertex) {
            return Ok(ExitOutcome::Exited(e.time));
        }
    }
    Ok(ExitOutcome::Censored(path.horizon))
}

/// Exit time in rescaled time and space.
pub fn exit_time_rescaled(rp: &RescaledPath, region: &Region) -> Result<ExitOutcome> {
    let n = rp.scale as f64;
    let n2 = n * n;
    let ev = rp.path().events();
    let scaled = |v: &crate::lattice::Vertex| -> Vec<f64> {
        v.coords().iter().map(|&c| c as f64 / n).collect()
    };
    if !region.contains_point(&scaled(&ev[0].vertex)) {
        return Err(Error::StartOutsideRegion);
    }
    for e in &ev[1..] {
        let t = e.time / n2;
        if t > rp.eval_horizon {
            break;
        }
        if !region.contains_point(&scaled(&e.vertex)) {
            return Ok(ExitOutcome::Exited(t));
        }
    }
    Ok(ExitOutcome::Censored(rp.eval_horizon))
}

/// Exact evaluation of the tightness modulus
/// `J(X,delta) = ∫_0^∞ e^{-u} (1 ∧ sup_{delta<=t<=u} |X_t - X_{t-delta}|) du`
/// on a piecewise-constant path, truncated at `u_max` with the dropped
/// tail bounded by `e^{-u_max}`.
#[derive(Clone, Copy, Debug)]
pub struct JModulus {
    pub value: f64,
    pub u_max: f64,
    pub tail_bound: f64,
}

pub fn path_modulus_j(rp: &RescaledPath, delta: f64) -> Result<JModulus> {
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument("delta must be positive".into()));
    }
    let u_max = rp.eval_horizon.min(30.0);
    let tail_bound = (-u_max).exp();
    if u_max <= delta {
        return Ok(JModulus { value: 0.0, u_max, tail_bound });
    }
    // breakpoints of t -> |X_t - X_{t-delta}|: jump times and their delta-shifts
    let mut brk: Vec<f64> = vec![delta, u_max];
    for t in rp.event_times() {
        if t > delta && t < u_max {
            brk.push(t);
        }
        let s = t + delta;
        if s > delta && s < u_max {
            brk.push(s);
        }
    }
    brk.sort_by(f64::total_cmp);
    brk.dedup_by(|a, b| (*a - *b).abs() < 1e-15);

    let dist = |t: f64| -> f64 {
        let a = rp.eval(t);
        let b = rp.eval(t - delta);
        a.iter()
            .zip(&b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    };
    let mut running_sup = 0.0f64;
    let mut value = 0.0f64;
    for w in brk.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mid = 0.5 * (a + b);
        running_sup = running_sup.max(dist(mid));
        value += running_sup.min(1.0) * ((-a).exp() - (-b).exp());
    }
    Ok(JModulus { value, u_max, tail_bound })
}
