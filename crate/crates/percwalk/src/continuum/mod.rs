//! Exact reference oracles for the scaling limits: the Neumann heat kernel
//! of reflecting Brownian motion on `[-1,1]^d` (cosine series with an
//! image-sum representation at short times), folded-path sampling of
//! reflecting Brownian motion on orthants, the continuum mixing time, and
//! the exit-time envelope.

mod mixing;
mod orthant;

pub use mixing::rbm_box_mixing_time;
pub use orthant::rbm_orthant_sample;

use crate::error::{Error, Result};

/// Representation switchover on the intrinsic time `c*t`: image sums below,
/// cosine series above. Both agree to 1e-8 at the seam.
pub const SERIES_IMAGE_SWITCH: f64 = 0.05;

/// Heat kernel of reflecting Brownian motion on `[-1,1]^d` run at time scale
/// `c` (the limit process is `X_{ct}`), as a density with respect to
/// Lebesgue measure. Product of per-coordinate Neumann kernels.
#[derive(Clone, Copy, Debug)]
pub struct RbmBoxKernel {
    d: usize,
    c: f64,
}

impl RbmBoxKernel {
    pub fn new(d: usize, c: f64) -> Result<Self> {
        if d < 1 {
            return Err(Error::InvalidArgument("dimension must be >= 1".into()));
        }
        if !(c > 0.0) {
            return Err(Error::InvalidArgument("time scale must be positive".into()));
        }
        Ok(RbmBoxKernel { d, c })
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn time_scale(&self) -> f64 {
        self.c
    }

    /// One-dimensional Neumann kernel on `[-1,1]` at intrinsic time `ct`.
    pub fn density_1d(ct: f64, x: f64, y: f64) -> f64 {
        debug_assert!(ct > 0.0);
        if ct < SERIES_IMAGE_SWITCH {
            // images of y under the reflection group of [-1,1]
            let sigma = ct.sqrt();
            let g = |z: f64| (-z * z / (2.0 * ct)).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt());
            let mut sum = 0.0;
            for m in -3i32..=3 {
                let shift = 4.0 * m as f64;
                sum += g(x - y + shift) + g(x + y + 2.0 + shift);
            }
            sum
        } else {
            let mut sum = 0.5;
            let mut k = 1;
            loop {
                let lambda = ct * (k as f64 * std::f64::consts::PI).powi(2) / 8.0;
                let damp = (-lambda).exp();
                if damp < 1e-15 {
                    break;
                }
                let phase_x = (k as f64 * std::f64::consts::PI * (x + 1.0) / 2.0).cos();
                let phase_y = (k as f64 * std::f64::consts::PI * (y + 1.0) / 2.0).cos();
                sum += damp * phase_x * phase_y;
                k += 1;
            }
            sum
        }
    }

    /// Transition density `q_t(x, y)` with respect to Lebesgue measure.
    pub fn density(&self, t: f64, x: &[f64], y: &[f64]) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::InvalidArgument("density needs t > 0".into()));
        }
        if x.len() != self.d || y.len() != self.d {
            return Err(Error::InvalidArgument("point dimension mismatch".into()));
        }
        for v in x.iter().chain(y) {
            if !(-1.0..=1.0).contains(v) {
                return Err(Error::InvalidArgument(format!(
                    "point coordinate {v} outside [-1,1]"
                )));
            }
        }
        let ct = self.c * t;
        Ok(x.iter()
            .zip(y)
            .map(|(&a, &b)| Self::density_1d(ct, a, b))
            .product())
    }

    /// Stationary density (uniform on the box).
    pub fn stationary_density(&self) -> f64 {
        0.5f64.powi(self.d as i32)
    }
}

/// Exit-time envelope: `e^{-R^2/t}` in the diffusive regime `t > R/e`,
/// `e^{-R log(R/t)}` in the ballistic regime `t < R/e`. The two branches do
/// not match at the seam; the envelope takes their maximum there.
pub fn psi_envelope(r: f64, t: f64) -> Result<f64> {
    let (diffusive, ballistic) = psi_branches(r, t)?;
    let seam = r / std::f64::consts::E;
    Ok(if t > seam {
        diffusive
    } else if t < seam {
        ballistic
    } else {
        diffusive.max(ballistic)
    })
}

/// Both branch values `(e^{-R^2/t}, e^{-R log(R/t)})`.
pub fn psi_branches(r: f64, t: f64) -> Result<(f64, f64)> {
    if !(r > 0.0 && t > 0.0) {
        return Err(Error::InvalidArgument("psi needs positive arguments".into()));
    }
    Ok(((-r * r / t).exp(), (-r * (r / t).ln()).exp()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psi_substitutions() {
        // t > R/e branch
        assert!((psi_envelope(1.0, 1.0).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        // t < R/e branch: e^{-10 ln 10}
        let v = psi_envelope(10.0, 1.0).unwrap();
        assert!((v - (-10.0 * 10.0f64.ln()).exp()).abs() < 1e-18);
        assert!(psi_envelope(0.0, 1.0).is_err());
    }

    #[test]
    fn psi_monotone_in_t_on_each_branch() {
        let r = 5.0;
        let seam = r / std::f64::consts::E;
        let mut prev = 0.0;
        // ballistic branch
        for i in 1..50 {
            let t = seam * i as f64 / 50.0;
            let v = psi_envelope(r, t).unwrap();
            assert!(v >= prev);
            prev = v;
        }
        // diffusive branch
        let mut prev = 0.0;
        for i in 1..50 {
            let t = seam + i as f64;
            let v = psi_envelope(r, t).unwrap();
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn kernel_symmetry_and_stationarity() {
        let k = RbmBoxKernel::new(2, 1.0).unwrap();
        let x = [0.3, -0.7];
        let y = [-0.2, 0.5];
        let a = k.density(0.4, &x, &y).unwrap();
        let b = k.density(0.4, &y, &x).unwrap();
        assert!((a - b).abs() < 1e-14, "symmetry");
        // long time: uniform density 2^{-d}
        let far = k.density(200.0, &x, &y).unwrap();
        assert!((far - 0.25).abs() < 1e-12, "stationary {far}");
    }

    #[test]
    fn kernel_mass_one_by_quadrature() {
        // composite Simpson in each coordinate at (d=2, t=0.3, x=(0.2,-0.7))
        let k = RbmBoxKernel::new(2, 1.0).unwrap();
        let x = [0.2, -0.7];
        let n = 400usize;
        let h = 2.0 / n as f64;
        let mut mass = 0.0;
        for i in 0..=n {
            let wi = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            for j in 0..=n {
                let wj = if j == 0 || j == n {
                    1.0
                } else if j % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                let y = [-1.0 + i as f64 * h, -1.0 + j as f64 * h];
                mass += wi * wj * k.density(0.3, &x, &y).unwrap();
            }
        }
        mass *= (h / 3.0) * (h / 3.0);
        assert!((mass - 1.0).abs() < 1e-8, "mass {mass}");
    }

    #[test]
    fn representations_agree_at_the_seam() {
        for &(x, y) in &[(0.0, 0.0), (0.9, -0.9), (1.0, 1.0), (0.3, 0.7)] {
            let ct = SERIES_IMAGE_SWITCH;
            let below = RbmBoxKernel::density_1d(ct * (1.0 - 1e-9), x, y);
            let above = RbmBoxKernel::density_1d(ct * (1.0 + 1e-9), x, y);
            assert!(
                (below - above).abs() < 1e-8,
                "seam mismatch at ({x},{y}): {below} vs {above}"
            );
        }
    }

    #[test]
    fn neumann_flux_vanishes_at_walls() {
        // numerical normal derivative at the endpoints
        let h = 1e-5;
        for t in [0.1, 0.5, 2.0] {
            for y in [-0.8, 0.0, 0.6] {
                let at_right =
                    (RbmBoxKernel::density_1d(t, 1.0, y) - RbmBoxKernel::density_1d(t, 1.0 - h, y)) / h;
                let at_left =
                    (RbmBoxKernel::density_1d(t, -1.0 + h, y) - RbmBoxKernel::density_1d(t, -1.0, y)) / h;
                assert!(at_right.abs() < 1e-4, "flux {at_right}");
                assert!(at_left.abs() < 1e-4, "flux {at_left}");
            }
        }
    }

    #[test]
    fn chapman_kolmogorov_by_quadrature() {
        let k = RbmBoxKernel::new(1, 1.0).unwrap();
        let (s, t) = (0.3, 0.5);
        let (x, y) = (0.25, -0.4);
        let n = 2000usize;
        let h = 2.0 / n as f64;
        let mut conv = 0.0;
        for i in 0..=n {
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let z = -1.0 + i as f64 * h;
            conv += w * k.density(s, &[x], &[z]).unwrap() * k.density(t, &[z], &[y]).unwrap();
        }
        conv *= h / 3.0;
        let direct = k.density(s + t, &[x], &[y]).unwrap();
        assert!((conv - direct).abs() < 1e-6, "CK {conv} vs {direct}");
    }

    #[test]
    fn time_scale_folds_into_intrinsic_time() {
        let k1 = RbmBoxKernel::new(1, 1.0).unwrap();
        let k3 = RbmBoxKernel::new(1, 3.0).unwrap();
        let a = k1.density(0.9, &[0.2], &[-0.1]).unwrap();
        let b = k3.density(0.3, &[0.2], &[-0.1]).unwrap();
        assert!((a - b).abs() < 1e-14);
    }
}
