//! Good and very-good ball audits: ball comparisons between the weighted and
//! unweighted chemical metrics, annulus separation, volume lower bounds, hole
//! diameters, and the weak Poincare inequality with its optimal constant.

use super::{distance_map, MetricKind};
use crate::environment::{ClusterIndex, Environment};
use crate::error::{Error, Result};
use crate::lattice::{DomainSpec, Vertex};
use nalgebra::DMatrix;
use std::collections::HashMap;

/// Dense-eigensolve policy: refuse Poincare checks on larger balls.
pub const POINCARE_DENSE_CAP: usize = 4000;

/// The free constants of the good-ball conditions. Defaults are frozen from
/// a calibration run on Constant(1) environments in d = 2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GoodBallConstants {
    pub c_v: f64,
    pub c_p: f64,
    pub c_w: f64,
    pub c_r: f64,
    pub c_d: f64,
    pub c_a: f64,
}

impl Default for GoodBallConstants {
    fn default() -> Self {
        GoodBallConstants {
            c_v: 0.5,
            c_p: 8.0,
            c_w: 2.0,
            c_r: 4.0,
            c_d: 2.0,
            c_a: 1.0,
        }
    }
}

/// Outcome of a good-ball audit at one `(x, R)`.
#[derive(Clone, Debug)]
pub struct GoodBallReport {
    pub center: Vertex,
    pub radius: f64,
    pub beta: f64,
    /// Ball comparison `B1(x, r/C_A) ⊆ Bbar1(x,r) ⊆ B1(x, C_D r)`, audited
    /// over integer radii in `[R, C_W R]` (the window-supported range of the
    /// paper's unbounded quantifier).
    pub gp1: bool,
    /// Euclidean separation of `Bbar1(x,R/2)` from the complement of
    /// `Bbar1(x,8R/9)`.
    pub gp2: bool,
    /// Volume lower bound `C_V R^d <= mu0(Bbar1(x,R))`.
    pub gp3: bool,
    /// Hole diameters at most `R^beta` throughout `B_E(x,R) ∩ C1`.
    pub gp4: bool,
    /// Weak Poincare inequality with constant `C_P R^2`.
    pub poincare: bool,
    /// Optimal constant: the extremal ratio of the two quadratic forms.
    pub poincare_optimal: f64,
    pub is_good: bool,
}

fn shell_guard(env: &Environment, members: &[u32], what: &str) -> Result<()> {
    if matches!(env.domain(), DomainSpec::Box { .. }) {
        return Ok(());
    }
    let shell = env.extended_window();
    for &id in members {
        if env.vertex(id).linf_norm() >= shell {
            return Err(Error::InsufficientWindow(format!(
                "{what} reaches the materialization boundary"
            )));
        }
    }
    Ok(())
}

fn members_within(map: &[f64], r: f64) -> Vec<u32> {
    (0..map.len() as u32)
        .filter(|&i| map[i as usize] <= r)
        .collect()
}

/// Audit the five good-ball conditions at `(x, R)`. Pure in
/// `(environment, index, x, R, constants)`; never silently truncates — if a
/// required ball reaches the materialization boundary it errors.
pub fn good_ball(
    env: &Environment,
    index: &ClusterIndex,
    x: &Vertex,
    radius: f64,
    constants: &GoodBallConstants,
) -> Result<GoodBallReport> {
    if radius < 1.0 {
        return Err(Error::InvalidArgument("good-ball radius must be >= 1".into()));
    }
    let ix = env
        .vertex_id(x)
        .filter(|&i| index.in_c1(i))
        .ok_or(Error::CarrierMembership(*x))?;
    let d = env.domain().d();
    let beta = 1.0 - 2.0 / (1.0 + d as f64);
    let c = constants;

    let r_hi = (c.c_w * radius).ceil().max(radius);
    let d1_cut = (c.c_d * r_hi).max(c.c_w * radius) + 1.0;
    let d1 = distance_map(MetricKind::D1, env, index, ix, d1_cut);
    let dbar = distance_map(MetricKind::D1Bar { c_a: c.c_a }, env, index, ix, r_hi + 1.0);

    shell_guard(env, &members_within(&d1, c.c_d * r_hi), "d1 ball")?;
    shell_guard(env, &members_within(&dbar, r_hi), "weighted ball")?;

    // (gp1) over integer radii r' in [R, C_W R], plus R itself
    let mut radii: Vec<f64> = vec![radius];
    let mut k = radius.ceil();
    while k <= r_hi {
        radii.push(k);
        k += 1.0;
    }
    let mut gp1 = true;
    'outer: for &rp in &radii {
        for i in 0..d1.len() {
            let (a, b) = (d1[i], dbar[i]);
            if a <= rp / c.c_a && !(b <= rp) {
                gp1 = false;
                break 'outer;
            }
            if b <= rp && !(a <= c.c_d * rp) {
                gp1 = false;
                break 'outer;
            }
        }
    }

    // (gp2): every y in Bbar(R/2) keeps Euclidean distance >= R/C_R from the
    // carrier complement of Bbar(8R/9)
    let sep = radius / c.c_r;
    let half = members_within(&dbar, radius / 2.0);
    let reach = sep.ceil() as i32;
    if !matches!(env.domain(), DomainSpec::Box { .. }) {
        for &y in &half {
            if env.vertex(y).linf_norm() + reach >= env.extended_window() {
                return Err(Error::InsufficientWindow(
                    "separation scan reaches the materialization boundary".into(),
                ));
            }
        }
    }
    let mut gp2 = true;
    'sep: for &yid in &half {
        let y = env.vertex(yid);
        let mut offset = vec![-reach; d];
        loop {
            let z = Vertex::new(
                &(0..d)
                    .map(|k| y.coord(k) + offset[k])
                    .collect::<Vec<_>>(),
            );
            if let Some(zid) = env.vertex_id(&z) {
                if index.in_c1(zid)
                    && dbar[zid as usize] > 8.0 * radius / 9.0
                    && y.euclid_dist(&z) < sep
                {
                    gp2 = false;
                    break 'sep;
                }
            }
            let mut axis = d;
            loop {
                if axis == 0 {
                    continue 'sep;
                }
                axis -= 1;
                if offset[axis] < reach {
                    offset[axis] += 1;
                    for a in axis + 1..d {
                        offset[a] = -reach;
                    }
                    break;
                }
            }
        }
    }

    // (gp3): degree measure of the weighted ball
    let mu0: f64 = members_within(&dbar, radius)
        .iter()
        .map(|&i| index.o1_degree(i) as f64)
        .sum();
    let gp3 = c.c_v * radius.powi(d as i32) <= mu0;

    // (gp4): hole diameters across the Euclidean ball
    let reach4 = radius.floor() as i32;
    if !matches!(env.domain(), DomainSpec::Box { .. })
        && x.linf_norm() + reach4 >= env.extended_window()
    {
        return Err(Error::InsufficientWindow(
            "hole scan reaches the materialization boundary".into(),
        ));
    }
    let mut gp4 = true;
    let cap = radius.powf(beta);
    let mut offset = vec![-reach4; d];
    'holes: loop {
        let z = Vertex::new(
            &(0..d)
                .map(|k| x.coord(k) + offset[k])
                .collect::<Vec<_>>(),
        );
        let r2: f64 = offset.iter().map(|&o| (o as f64) * (o as f64)).sum();
        if r2.sqrt() <= radius {
            if let Some(zid) = env.vertex_id(&z) {
                if index.in_c1(zid) {
                    if let Some(hole) = index.hole_of(zid) {
                        if hole.censored {
                            return Err(Error::InsufficientWindow(
                                "hole with unknown extent intersects the audit ball".into(),
                            ));
                        }
                        if (hole.linf_diameter as f64) > cap {
                            gp4 = false;
                            break 'holes;
                        }
                    }
                }
            }
        }
        let mut axis = d;
        loop {
            if axis == 0 {
                break 'holes;
            }
            axis -= 1;
            if offset[axis] < reach4 {
                offset[axis] += 1;
                for a in axis + 1..d {
                    offset[a] = -reach4;
                }
                break;
            }
        }
    }

    // (poincare): optimal constant over the d1 balls
    let small = members_within(&d1, radius);
    let big = members_within(&d1, c.c_w * radius);
    let poincare_optimal = poincare_optimal_constant(index, &small, &big)?;
    let poincare = poincare_optimal <= c.c_p * radius * radius;

    Ok(GoodBallReport {
        center: *x,
        radius,
        beta,
        gp1,
        gp2,
        gp3,
        gp4,
        poincare,
        poincare_optimal,
        is_good: gp1 && gp2 && gp3 && gp4 && poincare,
    })
}

fn poincare_forms(
    index: &ClusterIndex,
    small: &[u32],
    big: &[u32],
) -> (DMatrix<f64>, DMatrix<f64>, f64) {
    let n = big.len();
    let mut pos: HashMap<u32, usize> = HashMap::with_capacity(n);
    for (i, &id) in big.iter().enumerate() {
        pos.insert(id, i);
    }
    // A(f) = sum over the small ball of mu0_y (f_y - weighted mean)^2
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut m = vec![0.0f64; n];
    let mut total = 0.0;
    for &id in small {
        let i = *pos.get(&id).expect("small ball inside big ball");
        let w = index.o1_degree(id) as f64;
        a[(i, i)] += w;
        m[i] += w;
        total += w;
    }
    if total > 0.0 {
        for i in 0..n {
            if m[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                if m[j] != 0.0 {
                    a[(i, j)] -= m[i] * m[j] / total;
                }
            }
        }
    }
    // B(f) = sum over O1 edges inside the big ball of (f_y - f_z)^2
    let mut b = DMatrix::<f64>::zeros(n, n);
    for (i, &id) in big.iter().enumerate() {
        for (u, _) in index.adj_o1.neighbors(id) {
            if u <= id {
                continue; // each edge once
            }
            if let Some(&j) = pos.get(&u) {
                b[(i, i)] += 1.0;
                b[(j, j)] += 1.0;
                b[(i, j)] -= 1.0;
                b[(j, i)] -= 1.0;
            }
        }
    }
    (a, b, total)
}

fn helmert_basis(n: usize) -> DMatrix<f64> {
    let mut q = DMatrix::<f64>::zeros(n, n - 1);
    for k in 1..n {
        let scale = 1.0 / ((k * (k + 1)) as f64).sqrt();
        for i in 0..k {
            q[(i, k - 1)] = scale;
        }
        q[(k, k - 1)] = -(k as f64) * scale;
    }
    q
}

fn max_generalized_eig(a: &DMatrix<f64>, b_chol: &nalgebra::Cholesky<f64, nalgebra::Dyn>) -> f64 {
    // lambda_max of L^{-1} A L^{-T} for B = L L^T
    let l = b_chol.l();
    let y = l.solve_lower_triangular(a).expect("triangular solve");
    let m = l
        .solve_lower_triangular(&y.transpose())
        .expect("triangular solve")
        .transpose();
    let sym = (&m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigenvalues();
    eig.iter().fold(0.0f64, |acc, &v| acc.max(v))
}

/// Optimal weak-Poincare constant: the supremum over functions on the big
/// ball of (centered small-ball energy) / (big-ball Dirichlet sum), computed
/// as the largest generalized eigenvalue of the two quadratic forms on the
/// complement of the constants.
pub fn poincare_optimal_constant(
    index: &ClusterIndex,
    small: &[u32],
    big: &[u32],
) -> Result<f64> {
    let n = big.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty ball".into()));
    }
    if n > POINCARE_DENSE_CAP {
        return Err(Error::SpectralCapExceeded { have: n, cap: POINCARE_DENSE_CAP });
    }
    if n == 1 {
        return Ok(0.0);
    }
    let (a, b, total) = poincare_forms(index, small, big);
    if total == 0.0 {
        return Ok(0.0);
    }
    let q = helmert_basis(n);
    let a_red = q.transpose() * &a * &q;
    let b_red = q.transpose() * &b * &q;
    let chol = nalgebra::Cholesky::new(b_red)
        .ok_or_else(|| Error::Singular("Dirichlet form degenerate on the big ball".into()))?;
    Ok(max_generalized_eig(&a_red, &chol))
}

/// Independent route to the same constant: instead of reducing to the
/// complement of the constants, shift the Dirichlet form by the rank-one
/// term `(sum f)^2 / n`, which leaves the extremal ratio unchanged.
pub fn poincare_constant_rank_one_oracle(
    index: &ClusterIndex,
    small: &[u32],
    big: &[u32],
) -> Result<f64> {
    let n = big.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty ball".into()));
    }
    if n > POINCARE_DENSE_CAP {
        return Err(Error::SpectralCapExceeded { have: n, cap: POINCARE_DENSE_CAP });
    }
    if n == 1 {
        return Ok(0.0);
    }
    let (a, mut b, total) = poincare_forms(index, small, big);
    if total == 0.0 {
        return Ok(0.0);
    }
    let shift = 1.0 / n as f64;
    for i in 0..n {
        for j in 0..n {
            b[(i, j)] += shift;
        }
    }
    let chol = nalgebra::Cholesky::new(b)
        .ok_or_else(|| Error::Singular("shifted Dirichlet form not positive".into()))?;
    Ok(max_generalized_eig(&a, &chol))
}

/// Ratio achieved by one explicit test function; always at most the optimal
/// constant (certificate direction).
pub fn poincare_ratio_of(
    index: &ClusterIndex,
    small: &[u32],
    big: &[u32],
    f: &[f64],
) -> Option<f64> {
    assert_eq!(f.len(), big.len());
    let mut pos: HashMap<u32, usize> = HashMap::new();
    for (i, &id) in big.iter().enumerate() {
        pos.insert(id, i);
    }
    let mut total = 0.0;
    let mut mean = 0.0;
    for &id in small {
        let w = index.o1_degree(id) as f64;
        total += w;
        mean += w * f[pos[&id]];
    }
    if total == 0.0 {
        return None;
    }
    mean /= total;
    let mut lhs = 0.0;
    for &id in small {
        let w = index.o1_degree(id) as f64;
        let dv = f[pos[&id]] - mean;
        lhs += w * dv * dv;
    }
    let mut rhs = 0.0;
    for (i, &id) in big.iter().enumerate() {
        for (u, _) in index.adj_o1.neighbors(id) {
            if u <= id {
                continue;
            }
            if let Some(&j) = pos.get(&u) {
                let dv = f[i] - f[j];
                rhs += dv * dv;
            }
        }
    }
    if rhs <= 0.0 {
        None
    } else {
        Some(lhs / rhs)
    }
}

/// Result of the very-good scan at `(x, R)` with exponent `alpha`.
#[derive(Clone, Debug)]
pub struct VeryGoodScan {
    pub very_good: bool,
    /// First failing `(y, r)` in scan order, if any.
    pub witness: Option<(Vertex, i32)>,
    /// Largest observed scale that fails to be very good, plus one; 0 when
    /// no failure was seen up to `R`. A lower bound for the true threshold.
    pub r_lower_bound: i32,
}

/// Exhaustive scan of Definition-style very-goodness: every pair `(y, r)`
/// with `y` in the weighted ball of radius `R` and integer
/// `r in [max(2, ceil(R^alpha)), R]` must be good. Also scans all smaller
/// scales to report an empirical lower bound for the very-good threshold.
pub fn very_good_scan(
    env: &Environment,
    index: &ClusterIndex,
    x: &Vertex,
    radius: f64,
    alpha: f64,
    constants: &GoodBallConstants,
) -> Result<VeryGoodScan> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must lie in (0,1], got {alpha}")));
    }
    if radius < 2.0 {
        return Err(Error::InvalidArgument("scan radius must be >= 2".into()));
    }
    let ix = env
        .vertex_id(x)
        .filter(|&i| index.in_c1(i))
        .ok_or(Error::CarrierMembership(*x))?;

    let mut memo: HashMap<(u32, i32), bool> = HashMap::new();
    let check = |env: &Environment,
                     index: &ClusterIndex,
                     yid: u32,
                     r: i32,
                     memo: &mut HashMap<(u32, i32), bool>|
     -> Result<bool> {
        if let Some(&g) = memo.get(&(yid, r)) {
            return Ok(g);
        }
        let rep = good_ball(env, index, &env.vertex(yid), r as f64, constants)?;
        memo.insert((yid, r), rep.is_good);
        Ok(rep.is_good)
    };

    let scan_at = |scale: f64,
                       memo: &mut HashMap<(u32, i32), bool>|
     -> Result<Option<(Vertex, i32)>> {
        let dbar = distance_map(MetricKind::D1Bar { c_a: constants.c_a }, env, index, ix, scale);
        let members = members_within(&dbar, scale);
        let lo = (scale.powf(alpha).ceil() as i32).max(2);
        let hi = scale.floor() as i32;
        for &y in &members {
            for r in lo..=hi {
                if !check(env, index, y, r, memo)? {
                    return Ok(Some((env.vertex(y), r)));
                }
            }
        }
        Ok(None)
    };

    let witness = scan_at(radius, &mut memo)?;
    let mut worst_fail = 0i32;
    let top = radius.floor() as i32;
    for scale in 2..=top {
        if scan_at(scale as f64, &mut memo)?.is_some() {
            worst_fail = worst_fail.max(scale);
        }
    }
    Ok(VeryGoodScan {
        very_good: witness.is_none(),
        witness,
        r_lower_bound: if worst_fail == 0 { 0 } else { worst_fail + 1 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{build_cluster_index, sample_environment, ConductanceLaw};
    use crate::lattice::DomainSpec;
    use crate::rng::CounterRng;

    fn constant_world(window: i32) -> (Environment, ClusterIndex) {
        let env = sample_environment(
            DomainSpec::FullLattice { d: 2 },
            window,
            ConductanceLaw::Constant { w: 1.0 },
            1,
            Some(2.0),
        )
        .unwrap();
        let index = build_cluster_index(&env).unwrap();
        (env, index)
    }

    #[test]
    fn beta_in_two_dimensions_is_one_third() {
        let (env, index) = constant_world(24);
        let rep = good_ball(&env, &index, &Vertex::new(&[0, 0]), 4.0, &GoodBallConstants::default())
            .unwrap();
        assert!((rep.beta - 1.0 / 3.0).abs() < 1e-15);
        // no holes: gp4 vacuous
        assert!(rep.gp4);
    }

    #[test]
    fn constant_environment_ball_is_good() {
        let (env, index) = constant_world(30);
        let rep = good_ball(&env, &index, &Vertex::new(&[0, 0]), 6.0, &GoodBallConstants::default())
            .unwrap();
        assert!(rep.gp1, "gp1");
        assert!(rep.gp2, "gp2");
        assert!(rep.gp3, "gp3");
        assert!(rep.gp4, "gp4");
        assert!(rep.poincare, "poincare optimal {}", rep.poincare_optimal);
        assert!(rep.is_good);
    }

    #[test]
    fn insufficient_window_is_detected() {
        let (env, index) = constant_world(6);
        let err = good_ball(
            &env,
            &index,
            &Vertex::new(&[0, 0]),
            6.0,
            &GoodBallConstants::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InsufficientWindow(_)));
    }

    #[test]
    fn poincare_routes_agree_and_dominate_certificates() {
        let law = ConductanceLaw::Bernoulli { p1: 0.75 };
        let env =
            sample_environment(DomainSpec::FullLattice { d: 2 }, 16, law, 3, Some(2.0)).unwrap();
        let index = build_cluster_index(&env).unwrap();
        let origin = index.c1_vertices_within(&env, 2)[0];
        let d1 = distance_map(MetricKind::D1, &env, &index, origin, 12.0);
        let small = members_within(&d1, 4.0);
        let big = members_within(&d1, 8.0);
        let main = poincare_optimal_constant(&index, &small, &big).unwrap();
        let oracle = poincare_constant_rank_one_oracle(&index, &small, &big).unwrap();
        assert!(
            (main - oracle).abs() <= 1e-8 * main.max(1.0),
            "main {main} oracle {oracle}"
        );
        // certificate: random test functions never beat the optimum
        let mut rng = CounterRng::new(7);
        for _ in 0..25 {
            let f: Vec<f64> = (0..big.len()).map(|_| rng.uniform() - 0.5).collect();
            if let Some(ratio) = poincare_ratio_of(&index, &small, &big, &f) {
                assert!(ratio <= main * (1.0 + 1e-10), "ratio {ratio} main {main}");
            }
        }
    }

    #[test]
    fn poincare_matches_brute_force_on_tiny_ball() {
        // 5-vertex plus-shape: the optimum is computable by a fine rotation
        // scan over the 4-dimensional nonconstant subspace via many randoms
        let (env, index) = constant_world(8);
        let origin = env.vertex_id(&Vertex::new(&[0, 0])).unwrap();
        let d1 = distance_map(MetricKind::D1, &env, &index, origin, 2.0);
        let small = members_within(&d1, 1.0);
        let big = members_within(&d1, 1.0);
        let main = poincare_optimal_constant(&index, &small, &big).unwrap();
        let mut rng = CounterRng::new(99);
        let mut best = 0.0f64;
        for _ in 0..20000 {
            let f: Vec<f64> = (0..big.len()).map(|_| rng.uniform() - 0.5).collect();
            if let Some(r) = poincare_ratio_of(&index, &small, &big, &f) {
                best = best.max(r);
            }
        }
        assert!(best <= main * (1.0 + 1e-9));
        assert!(best >= 0.8 * main, "random search should approach {main}, got {best}");
    }

    #[test]
    fn monotone_in_constants() {
        let law = ConductanceLaw::Bernoulli { p1: 0.72 };
        let env =
            sample_environment(DomainSpec::FullLattice { d: 2 }, 26, law, 11, Some(2.0)).unwrap();
        let index = build_cluster_index(&env).unwrap();
        let x = env.vertex(index.c1_vertices_within(&env, 2)[0]);
        let base = GoodBallConstants::default();
        let rep = good_ball(&env, &index, &x, 5.0, &base).unwrap();
        let looser = GoodBallConstants {
            c_p: base.c_p * 2.0,
            c_r: base.c_r * 2.0,
            c_d: base.c_d * 2.0,
            c_v: base.c_v / 2.0,
            ..base
        };
        let rep2 = good_ball(&env, &index, &x, 5.0, &looser).unwrap();
        if rep.is_good {
            assert!(rep2.is_good, "loosening constants must not break goodness");
        }
    }

    #[test]
    fn very_good_scan_constant_environment() {
        let (env, index) = constant_world(26);
        let scan = very_good_scan(
            &env,
            &index,
            &Vertex::new(&[0, 0]),
            4.0,
            0.5,
            &GoodBallConstants::default(),
        )
        .unwrap();
        assert!(scan.very_good, "witness {:?}", scan.witness);
        assert_eq!(scan.r_lower_bound, 0);
    }

    #[test]
    fn alpha_one_reduces_to_top_radius_only() {
        let (env, index) = constant_world(26);
        let x = Vertex::new(&[0, 0]);
        let constants = GoodBallConstants::default();
        let scan = very_good_scan(&env, &index, &x, 4.0, 1.0, &constants).unwrap();
        // degenerate range [R, R]: equivalent to auditing every ball center
        // at the single radius R
        let ix = env.vertex_id(&x).unwrap();
        let dbar = distance_map(MetricKind::D1Bar { c_a: constants.c_a }, &env, &index, ix, 4.0);
        let all_good = members_within(&dbar, 4.0).iter().all(|&y| {
            good_ball(&env, &index, &env.vertex(y), 4.0, &constants)
                .map(|r| r.is_good)
                .unwrap_or(false)
        });
        assert_eq!(scan.very_good, all_good);
    }
}
