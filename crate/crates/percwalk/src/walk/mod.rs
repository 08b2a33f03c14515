//! Event-driven random walk simulation on the open cluster: variable-speed,
//! constant-speed, and discrete-time walks sharing one jump chain per seed.

mod functionals;
mod trace;

pub use functionals::{exit_time, exit_time_rescaled, path_modulus_j, rescale, ExitOutcome, JModulus, RescaledPath};
pub use trace::{trace, TracePath};

use crate::environment::{ClusterIndex, Environment};
use crate::error::{Error, Result};
use crate::lattice::{DomainSpec, Vertex};
use crate::rng::{mix, substream, CounterRng};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WalkKind {
    /// Holds at `x` for Exponential(rate mu_x), jumps with P(x,y) = mu_xy/mu_x.
    Vsrw,
    /// Same jump chain, unit-rate exponential holding times.
    Csrw,
    /// Same jump chain, deterministic unit time steps.
    Discrete,
}

/// One visit: the walk arrives at `vertex` at `time` and stays until the
/// next event (or the horizon).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathEvent {
    pub time: f64,
    pub vertex: Vertex,
}

/// A simulated trajectory; the first event is `(0, start)` and times are
/// strictly increasing.
#[derive(Clone, Debug)]
pub struct WalkPath {
    pub kind: WalkKind,
    pub seed: u64,
    pub horizon: f64,
    events: Vec<PathEvent>,
}

impl WalkPath {
    pub fn events(&self) -> &[PathEvent] {
        &self.events
    }

    pub fn start(&self) -> Vertex {
        self.events[0].vertex
    }

    pub fn jump_count(&self) -> usize {
        self.events.len() - 1
    }

    /// Position at time `t` (right-continuous piecewise-constant lookup).
    pub fn position_at(&self, t: f64) -> Vertex {
        debug_assert!(t >= 0.0 && t <= self.horizon + 1e-12);
        let idx = match self
            .events
            .binary_search_by(|e| e.time.total_cmp(&t))
        {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) => i - 1,
        };
        self.events[idx].vertex
    }

    /// Assemble a path from an explicit event list (first event at time 0,
    /// strictly increasing times).
    pub fn from_events(kind: WalkKind, seed: u64, horizon: f64, events: Vec<PathEvent>) -> Self {
        debug_assert!(!events.is_empty() && events[0].time == 0.0);
        debug_assert!(events.windows(2).all(|w| w[0].time < w[1].time));
        WalkPath { kind, seed, horizon, events }
    }
}

/// Simulate a walk of the given kind on the C1 proxy up to `horizon`.
///
/// The holding-time clock and the jump selector run on independent
/// counter-based streams derived from `seed`, so all three walk kinds share
/// the same jump chain for the same seed. Escaping the trusted window aborts
/// with [`Error::WindowExit`] rather than reflecting or wrapping.
pub fn simulate(
    kind: WalkKind,
    env: &Environment,
    index: &ClusterIndex,
    start: &Vertex,
    horizon: f64,
    seed: u64,
) -> Result<WalkPath> {
    if !(horizon > 0.0) {
        return Err(Error::InvalidArgument("horizon must be positive".into()));
    }
    let start_id = env
        .vertex_id(start)
        .filter(|&i| index.in_c1(i))
        .ok_or(Error::StartNotInCluster(*start))?;
    let bounded = matches!(env.domain(), DomainSpec::Box { .. });
    let window = env.window();

    let mut clock = CounterRng::new(substream(mix(seed), 0));
    let mut jumps = CounterRng::new(substream(mix(seed), 1));

    let mut events = Vec::with_capacity(16);
    events.push(PathEvent { time: 0.0, vertex: *start });
    let mut at = start_id;
    let mut t = 0.0f64;
    loop {
        let rate: f64 = index.adj_o1.neighbors(at).map(|(_, w)| w).sum();
        debug_assert!(rate > 0.0, "C1 vertices always carry an open edge");
        let dt = match kind {
            WalkKind::Vsrw => clock.exponential(rate),
            WalkKind::Csrw => clock.exponential(1.0),
            WalkKind::Discrete => 1.0,
        };
        t += dt;
        if t > horizon {
            break;
        }
        // jump selection shared by all kinds: cumulative scan in neighbor order
        let target = rate * jumps.uniform();
        let mut acc = 0.0;
        let mut next = at;
        for (u, w) in index.adj_o1.neighbors(at) {
            acc += w;
            if target < acc {
                next = u;
                break;
            }
        }
        if next == at {
            // numerically target == rate; take the last neighbor
            next = index.adj_o1.neighbors(at).last().map(|(u, _)| u).unwrap_or(at);
        }
        let v = env.vertex(next);
        if !bounded && v.linf_norm() > window {
            return Err(Error::WindowExit { time: t, vertex: v });
        }
        events.push(PathEvent { time: t, vertex: v });
        at = next;
    }
    Ok(WalkPath { kind, seed, horizon, events })
}
