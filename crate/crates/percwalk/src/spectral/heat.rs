//! Matrix exponential by uniformization: `e^{tL}` as a Poisson mixture of
//! powers of `P = I + L/lambda`, which keeps entries nonnegative, preserves
//! (sub)stochasticity, and carries a computable truncation bound. Large
//! `lambda t` is handled by exponentiating a dyadic fraction of `t` and
//! squaring, which preserves all three properties.

use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// Returns `(Q, bound)` with `|Q - e^{tL}|` entrywise at most `bound`
/// (truncation only; floating-point roundoff excluded).
pub fn uniformized_exponential(
    generator: &DMatrix<f64>,
    t: f64,
    budget: f64,
) -> Result<(DMatrix<f64>, f64)> {
    if t < 0.0 {
        return Err(Error::InvalidArgument("heat kernel needs t >= 0".into()));
    }
    let n = generator.nrows();
    let identity = DMatrix::<f64>::identity(n, n);
    if t == 0.0 || n == 0 {
        return Ok((identity, 0.0));
    }
    let lambda = (0..n)
        .map(|i| generator[(i, i)].abs())
        .fold(0.0f64, f64::max);
    if lambda == 0.0 {
        return Ok((identity, 0.0));
    }

    // dyadic splitting: e^{tL} = (e^{(t/2^s) L})^{2^s} with lambda*t/2^s <= 1
    let mut s = 0u32;
    let mut m = lambda * t;
    while m > 1.0 && s < 48 {
        m *= 0.5;
        s += 1;
    }
    // squaring doubles the error at each step; split the budget accordingly
    let base_tol = (budget * 0.5 / (1u64 << s) as f64).max(5e-17);
    let tau = t / (1u64 << s) as f64;
    let m = lambda * tau;

    let p = &identity + generator * (1.0 / lambda);
    let mut acc = identity.clone() * (-m).exp();
    let mut power = identity.clone();
    let mut weight = (-m).exp();
    let mut cum = weight;
    let mut k = 0u64;
    while 1.0 - cum > base_tol {
        k += 1;
        power = &power * &p;
        weight *= m / k as f64;
        acc += &power * weight;
        cum += weight;
        if k > 10_000 {
            return Err(Error::Singular(
                "uniformization series failed to converge".into(),
            ));
        }
    }
    let mut bound = 1.0 - cum;
    let mut q = acc;
    for _ in 0..s {
        q = &q * &q;
        bound *= 2.0;
    }
    Ok((q, bound))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state() -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 1.0, -1.0])
    }

    #[test]
    fn identity_at_time_zero() {
        let (q, b) = uniformized_exponential(&two_state(), 0.0, 1e-12).unwrap();
        assert_eq!(q, DMatrix::identity(2, 2));
        assert_eq!(b, 0.0);
    }

    #[test]
    fn two_state_closed_form() {
        // eigendecomposition oracle: q_t(0,0) = (1 + e^{-2t})/2
        for t in [0.1, 0.5, 1.0, 3.0, 10.0, 200.0] {
            let (q, bound) = uniformized_exponential(&two_state(), t, 1e-12).unwrap();
            let expect = 0.5 * (1.0 + (-2.0 * t).exp());
            assert!(
                (q[(0, 0)] - expect).abs() < 1e-10,
                "t={t}: {} vs {expect}",
                q[(0, 0)]
            );
            assert!((q[(0, 1)] - (1.0 - expect)).abs() < 1e-10);
            assert!(bound <= 1e-12 * 1.5, "bound {bound}");
        }
    }

    #[test]
    fn rows_stay_stochastic_and_nonnegative() {
        let gen = DMatrix::from_row_slice(
            3,
            3,
            &[-2.0, 1.5, 0.5, 1.5, -2.5, 1.0, 0.5, 1.0, -1.5],
        );
        for t in [0.3, 2.0, 37.0] {
            let (q, _) = uniformized_exponential(&gen, t, 1e-12).unwrap();
            for i in 0..3 {
                let mut row = 0.0;
                for j in 0..3 {
                    assert!(q[(i, j)] >= -1e-14, "nonnegative entries");
                    row += q[(i, j)];
                }
                assert!((row - 1.0).abs() < 1e-10, "row {i} sums to {row}");
            }
        }
    }

    #[test]
    fn semigroup_property() {
        let gen = DMatrix::from_row_slice(2, 2, &[-0.5, 0.5, 2.0, -2.0]);
        let (q1, _) = uniformized_exponential(&gen, 0.7, 1e-13).unwrap();
        let (q2, _) = uniformized_exponential(&gen, 1.9, 1e-13).unwrap();
        let (q3, _) = uniformized_exponential(&gen, 2.6, 1e-13).unwrap();
        let prod = &q1 * &q2;
        assert!((&prod - &q3).amax() < 1e-9);
    }
}
