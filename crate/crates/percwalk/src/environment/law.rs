//! Conductance distributions: i.i.d. nonnegative edge weights whose positive
//! part stays away from 0 (an atom at 0 is allowed) and has finite mean.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ConductanceLaw {
    /// Every edge carries weight `w`.
    Constant { w: f64 },
    /// Weight 1 with probability `p1`, else 0 (bond percolation).
    Bernoulli { p1: f64 },
    /// Uniform on `(a,b)` with probability `p1`, else 0; requires `a > 0`.
    UniformOnInterval { a: f64, b: f64, p1: f64 },
    /// Pareto with scale `c > 0` and tail exponent > 1 with probability
    /// `p1`, else 0. The positive part never falls below `c`.
    ParetoLowerBounded { c: f64, exponent: f64, p1: f64 },
}

impl ConductanceLaw {
    pub fn validate(&self) -> Result<()> {
        let prob = |p: f64, what: &str| -> Result<()> {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidLaw(format!("{what} must lie in [0,1], got {p}")));
            }
            Ok(())
        };
        match *self {
            ConductanceLaw::Constant { w } => {
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::InvalidLaw(format!("constant weight must be >= 0, got {w}")));
                }
            }
            ConductanceLaw::Bernoulli { p1 } => prob(p1, "p1")?,
            ConductanceLaw::UniformOnInterval { a, b, p1 } => {
                prob(p1, "p1")?;
                if !(a > 0.0) {
                    return Err(Error::InvalidLaw(format!("interval start must be > 0, got {a}")));
                }
                if !(b > a) {
                    return Err(Error::InvalidLaw(format!("need b > a, got ({a},{b})")));
                }
            }
            ConductanceLaw::ParetoLowerBounded { c, exponent, p1 } => {
                prob(p1, "p1")?;
                if !(c > 0.0) {
                    return Err(Error::InvalidLaw(format!("scale must be > 0, got {c}")));
                }
                if !(exponent > 1.0) {
                    return Err(Error::InvalidLaw(format!(
                        "tail exponent must exceed 1 for a finite mean, got {exponent}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Advisory checks the caller should surface but that do not block
    /// construction (supercriticality is asserted by the user).
    pub fn warnings(&self, d: usize) -> Vec<String> {
        let mut out = Vec::new();
        if d == 2 && self.p_open() <= 0.5 {
            out.push(format!(
                "p1 = {} is at or below the d=2 bond percolation threshold 0.5; \
                 no infinite-cluster proxy is expected",
                self.p_open()
            ));
        }
        out
    }

    /// P(weight > 0).
    pub fn p_open(&self) -> f64 {
        match *self {
            ConductanceLaw::Constant { w } => {
                if w > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            ConductanceLaw::Bernoulli { p1 }
            | ConductanceLaw::UniformOnInterval { p1, .. }
            | ConductanceLaw::ParetoLowerBounded { p1, .. } => p1,
        }
    }

    /// E(weight).
    pub fn mean(&self) -> f64 {
        match *self {
            ConductanceLaw::Constant { w } => w,
            ConductanceLaw::Bernoulli { p1 } => p1,
            ConductanceLaw::UniformOnInterval { a, b, p1 } => p1 * 0.5 * (a + b),
            ConductanceLaw::ParetoLowerBounded { c, exponent, p1 } => {
                p1 * c * exponent / (exponent - 1.0)
            }
        }
    }

    /// The gap constant: positive weights never fall inside `(0, gap)`.
    pub fn atom_gap(&self) -> f64 {
        match *self {
            ConductanceLaw::Constant { w } => w,
            ConductanceLaw::Bernoulli { .. } => 1.0,
            ConductanceLaw::UniformOnInterval { a, .. } => a,
            ConductanceLaw::ParetoLowerBounded { c, .. } => c,
        }
    }

    /// True when every weight is an exactly representable integer.
    pub fn integer_valued(&self) -> bool {
        match *self {
            ConductanceLaw::Constant { w } => w.fract() == 0.0,
            ConductanceLaw::Bernoulli { .. } => true,
            _ => false,
        }
    }

    /// `q(K)` = P(weight in (0, 1/K)) + P(weight > K), computed analytically.
    pub fn q_of_truncation(&self, k: f64) -> f64 {
        assert!(k > 0.0);
        let inv = 1.0 / k;
        match *self {
            ConductanceLaw::Constant { w } => {
                if (w > 0.0 && w < inv) || w > k {
                    1.0
                } else {
                    0.0
                }
            }
            ConductanceLaw::Bernoulli { p1 } => {
                if 1.0 < inv || 1.0 > k {
                    p1
                } else {
                    0.0
                }
            }
            ConductanceLaw::UniformOnInterval { a, b, p1 } => {
                let len = b - a;
                let below = (inv.min(b) - a).max(0.0) / len;
                let above = (b - k.max(a)).max(0.0) / len;
                p1 * (below + above)
            }
            ConductanceLaw::ParetoLowerBounded { c, exponent, p1 } => {
                let below = if inv > c { 1.0 - (c / inv).powf(exponent) } else { 0.0 };
                let above = if k >= c { (c / k).powf(exponent) } else { 1.0 };
                p1 * (below + above)
            }
        }
    }

    /// Smallest power of two `K` with `q(K) < (p1 - 1/2)/2`; errors when
    /// `p1 <= 1/2` (the caller must then pick `K` explicitly).
    pub fn default_truncation(&self) -> Result<f64> {
        let p1 = self.p_open();
        let target = (p1 - 0.5) / 2.0;
        if target <= 0.0 {
            return Err(Error::InvalidLaw(format!(
                "cannot auto-select truncation for p1 = {p1} <= 0.5; set K explicitly"
            )));
        }
        let mut k = 1.0f64;
        for _ in 0..64 {
            if self.q_of_truncation(k) < target {
                return Ok(k);
            }
            k *= 2.0;
        }
        Err(Error::InvalidLaw(
            "no truncation level up to 2^63 reaches the target irregular mass".into(),
        ))
    }

    /// Sample one weight from two uniform [0,1) slots (atom slot, value slot).
    pub fn sample(&self, u_atom: f64, u_value: f64) -> f64 {
        match *self {
            ConductanceLaw::Constant { w } => w,
            ConductanceLaw::Bernoulli { p1 } => {
                if u_atom < p1 {
                    1.0
                } else {
                    0.0
                }
            }
            ConductanceLaw::UniformOnInterval { a, b, p1 } => {
                if u_atom < p1 {
                    a + (b - a) * u_value
                } else {
                    0.0
                }
            }
            ConductanceLaw::ParetoLowerBounded { c, exponent, p1 } => {
                if u_atom < p1 {
                    c * (1.0 - u_value).powf(-1.0 / exponent)
                } else {
                    0.0
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_rejects_bad_parameters() {
        assert!(ConductanceLaw::UniformOnInterval { a: 0.0, b: 1.0, p1: 1.0 }
            .validate()
            .is_err());
        assert!(ConductanceLaw::UniformOnInterval { a: 2.0, b: 1.0, p1: 1.0 }
            .validate()
            .is_err());
        assert!(ConductanceLaw::ParetoLowerBounded { c: 1.0, exponent: 1.0, p1: 0.9 }
            .validate()
            .is_err());
        assert!(ConductanceLaw::Bernoulli { p1: 1.2 }.validate().is_err());
        assert!(ConductanceLaw::Constant { w: -1.0 }.validate().is_err());
    }

    #[test]
    fn q_vanishes_for_moderate_weights() {
        let law = ConductanceLaw::UniformOnInterval { a: 1.0, b: 2.0, p1: 0.8 };
        assert_eq!(law.q_of_truncation(2.0), 0.0);
        assert_eq!(law.q_of_truncation(1.0), 0.8 * 0.5 * 2.0); // (1,2) above K=1 is half... none below
    }

    #[test]
    fn q_uniform_split() {
        // q(K) for uniform(1,2) with p1=1: below 1/K impossible for K>=1,
        // above K covers (K,2)
        let law = ConductanceLaw::UniformOnInterval { a: 1.0, b: 2.0, p1: 1.0 };
        assert!((law.q_of_truncation(1.5) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn q_pareto_tail() {
        let law = ConductanceLaw::ParetoLowerBounded { c: 1.0, exponent: 1.5, p1: 0.75 };
        let q = law.q_of_truncation(4.0);
        assert!((q - 0.75 * 0.25f64.powf(1.5)).abs() < 1e-12);
    }

    #[test]
    fn default_truncation_matches_target() {
        let law = ConductanceLaw::ParetoLowerBounded { c: 1.0, exponent: 1.5, p1: 0.75 };
        let k = law.default_truncation().unwrap();
        assert!(law.q_of_truncation(k) < 0.125);
        assert!(law.q_of_truncation(k / 2.0) >= 0.125);
        assert!(ConductanceLaw::Bernoulli { p1: 0.4 }.default_truncation().is_err());
    }

    #[test]
    fn mean_values() {
        assert_eq!(ConductanceLaw::Bernoulli { p1: 0.7 }.mean(), 0.7);
        assert_eq!(
            ConductanceLaw::UniformOnInterval { a: 1.0, b: 3.0, p1: 1.0 }.mean(),
            2.0
        );
        let pareto = ConductanceLaw::ParetoLowerBounded { c: 1.0, exponent: 3.0, p1: 1.0 };
        assert!((pareto.mean() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn pareto_sample_respects_gap() {
        let law = ConductanceLaw::ParetoLowerBounded { c: 2.0, exponent: 2.0, p1: 0.6 };
        let mut rng = crate::rng::CounterRng::new(1);
        for _ in 0..10_000 {
            let w = law.sample(rng.uniform(), rng.uniform());
            assert!(w == 0.0 || w >= 2.0);
        }
    }
}
