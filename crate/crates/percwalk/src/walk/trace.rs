//! The trace process: the walk time-changed to skip the time it spends in
//! holes, so it only moves through the regular cluster, jumping over holes.

use super::{PathEvent, WalkPath};
use crate::environment::{ClusterIndex, Environment};
use crate::error::{Error, Result};
use crate::lattice::Vertex;

/// Trace of a walk on the regular cluster: `Z_t = Y_{a_t}` where `a` is the
/// right-continuous inverse of `A_t = ∫_0^t 1(Y_s ∈ C2) ds`.
#[derive(Clone, Debug)]
pub struct TracePath {
    /// The underlying walk.
    pub y: WalkPath,
    /// Per-event flag: was that visit inside the regular cluster proxy.
    pub mask: Vec<bool>,
    /// `(t, A_t)` at every event time plus the horizon; `A` is piecewise
    /// linear with slopes 0 or 1 between consecutive entries.
    pub a_breakpoints: Vec<(f64, f64)>,
    /// Trace trajectory in its own clock; first event at time 0.
    events: Vec<PathEvent>,
    /// Trace horizon `A_T`.
    pub horizon: f64,
}

impl TracePath {
    pub fn events(&self) -> &[PathEvent] {
        &self.events
    }

    /// `A_t` by linear interpolation of the breakpoints.
    pub fn a_at(&self, t: f64) -> f64 {
        debug_assert!(t >= 0.0 && t <= self.y.horizon + 1e-12);
        match self
            .a_breakpoints
            .binary_search_by(|(s, _)| s.total_cmp(&t))
        {
            Ok(i) => self.a_breakpoints[i].1,
            Err(0) => 0.0,
            Err(i) => {
                let (t0, a0) = self.a_breakpoints[i - 1];
                let (t1, a1) = self.a_breakpoints[i];
                let slope = if t1 > t0 { (a1 - a0) / (t1 - t0) } else { 0.0 };
                a0 + slope * (t - t0)
            }
        }
    }

    /// Trace position at trace-time `s`.
    pub fn position_at(&self, s: f64) -> Vertex {
        debug_assert!(s >= 0.0 && s <= self.horizon + 1e-12);
        let idx = match self.events.binary_search_by(|e| e.time.total_cmp(&s)) {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) => i - 1,
        };
        self.events[idx].vertex
    }
}

/// Compute the exact time change from the event list.
pub fn trace(path: &WalkPath, env: &Environment, index: &ClusterIndex) -> Result<TracePath> {
    let ev = path.events();
    let mut mask = Vec::with_capacity(ev.len());
    for e in ev {
        let id = env
            .vertex_id(&e.vertex)
            .ok_or(Error::CarrierMembership(e.vertex))?;
        mask.push(index.in_c2(id));
    }
    if !mask.iter().any(|&m| m) {
        return Err(Error::NeverEntersTraceCarrier);
    }
    let mut a = 0.0f64;
    let mut breakpoints = Vec::with_capacity(ev.len() + 1);
    let mut z_events: Vec<PathEvent> = Vec::new();
    for (i, e) in ev.iter().enumerate() {
        breakpoints.push((e.time, a));
        let stay_until = if i + 1 < ev.len() { ev[i + 1].time } else { path.horizon };
        if mask[i] {
            if z_events.last().map(|z| z.vertex) != Some(e.vertex) {
                z_events.push(PathEvent { time: a, vertex: e.vertex });
            }
            a += stay_until - e.time;
        }
    }
    breakpoints.push((path.horizon, a));
    Ok(TracePath {
        y: path.clone(),
        mask,
        a_breakpoints: breakpoints,
        events: z_events,
        horizon: a,
    })
}
