//! Discrete Dirichlet problems on graph balls inside an instance, with
//! Harnack and Hoelder oscillation metrics for the solved profile.

use super::{SpectralBoundary, SpectralInstance};
use crate::error::{Error, Result};
use crate::lattice::Vertex;
use nalgebra::{DMatrix, DVector};

#[derive(Clone, Debug)]
pub struct HarmonicReport {
    /// Solved values on the closed ball (region plus its outer boundary).
    pub values: Vec<(Vertex, f64)>,
    pub sup_half: f64,
    pub inf_half: f64,
    pub oscillation_half: f64,
    /// `sup/inf` over the half ball when the profile is nonnegative there
    /// and the infimum is positive.
    pub harnack_ratio: Option<f64>,
    /// max over half-ball pairs of `|h(x)-h(y)| / ((|x-y|/R)^gamma ||h||_inf)`.
    pub holder_ratio: f64,
    pub holder_gamma: f64,
}

/// Solve the Dirichlet problem on the graph ball `B(center, radius)` of the
/// instance carrier with the given boundary data, and report oscillation
/// metrics over the half ball.
pub fn harmonic_profile(
    instance: &SpectralInstance,
    center: &Vertex,
    radius: f64,
    boundary_data: &dyn Fn(&Vertex) -> f64,
    holder_gamma: f64,
) -> Result<HarmonicReport> {
    if instance.boundary != SpectralBoundary::None {
        return Err(Error::InvalidArgument(
            "harmonic profiles need an unkilled instance".into(),
        ));
    }
    if !(radius >= 1.0) {
        return Err(Error::InvalidArgument("radius must be >= 1".into()));
    }
    let n = instance.dim();
    let ci = instance
        .index_of(center)
        .ok_or(Error::CarrierMembership(*center))?;
    // graph distance within the instance
    let gen = instance.generator();
    let mut dist = vec![usize::MAX; n];
    dist[ci] = 0;
    let mut frontier = vec![ci];
    let mut level = 0usize;
    while !frontier.is_empty() {
        level += 1;
        let mut next = Vec::new();
        for &v in &frontier {
            for j in 0..n {
                if j != v && gen[(v, j)] > 0.0 && dist[j] == usize::MAX {
                    dist[j] = level;
                    next.push(j);
                }
            }
        }
        frontier = next;
    }
    let rad = radius.floor() as usize;
    let region: Vec<usize> = (0..n).filter(|&i| dist[i] <= rad).collect();
    let mut in_region = vec![false; n];
    for &i in &region {
        in_region[i] = true;
    }
    let mut boundary: Vec<usize> = Vec::new();
    for &i in &region {
        for j in 0..n {
            if j != i && gen[(i, j)] > 0.0 && !in_region[j] {
                boundary.push(j);
            }
        }
    }
    boundary.sort_unstable();
    boundary.dedup();
    if boundary.is_empty() {
        return Err(Error::Singular(
            "ball has no outer boundary inside the instance".into(),
        ));
    }

    let m = region.len();
    let mut pos = vec![usize::MAX; n];
    for (k, &i) in region.iter().enumerate() {
        pos[i] = k;
    }
    let mut a = DMatrix::<f64>::zeros(m, m);
    let mut rhs = DVector::<f64>::zeros(m);
    for (k, &i) in region.iter().enumerate() {
        a[(k, k)] = gen[(i, i)];
        for j in 0..n {
            if j == i || gen[(i, j)] == 0.0 {
                continue;
            }
            if in_region[j] {
                a[(k, pos[j])] = gen[(i, j)];
            } else {
                rhs[k] -= gen[(i, j)] * boundary_data(&instance.vertices()[j]);
            }
        }
    }
    let h_int = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Singular("Dirichlet system is singular".into()))?;

    let mut values: Vec<(Vertex, f64)> = Vec::with_capacity(m + boundary.len());
    for (k, &i) in region.iter().enumerate() {
        values.push((instance.vertices()[i], h_int[k]));
    }
    for &b in &boundary {
        values.push((instance.vertices()[b], boundary_data(&instance.vertices()[b])));
    }
    values.sort_by(|x, y| x.0.cmp(&y.0));

    let max_abs = values.iter().map(|(_, v)| v.abs()).fold(0.0, f64::max);
    let half = rad / 2;
    let half_ids: Vec<usize> = (0..n).filter(|&i| dist[i] <= half).collect();
    let mut sup = f64::NEG_INFINITY;
    let mut inf = f64::INFINITY;
    let value_at = |i: usize| -> f64 {
        if in_region[i] {
            h_int[pos[i]]
        } else {
            boundary_data(&instance.vertices()[i])
        }
    };
    for &i in &half_ids {
        let v = value_at(i);
        sup = sup.max(v);
        inf = inf.min(v);
    }
    let harnack = if inf > 0.0 {
        Some(sup / inf)
    } else if sup == 0.0 && inf == 0.0 {
        Some(1.0)
    } else {
        None
    };
    let mut holder: f64 = 0.0;
    if max_abs > 0.0 {
        for (ai, &i) in half_ids.iter().enumerate() {
            for &j in &half_ids[ai + 1..] {
                let vi = instance.vertices()[i];
                let vj = instance.vertices()[j];
                let dv = (value_at(i) - value_at(j)).abs();
                let dx = vi.euclid_dist(&vj) / radius;
                if dx > 0.0 {
                    holder = holder.max(dv / (dx.powf(holder_gamma) * max_abs));
                }
            }
        }
    }
    Ok(HarmonicReport {
        values,
        sup_half: sup,
        inf_half: inf,
        oscillation_half: sup - inf,
        harnack_ratio: harnack,
        holder_ratio: holder,
        holder_gamma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{build_cluster_index, sample_environment, ConductanceLaw};
    use crate::lattice::{DomainSpec, Region};
    use crate::spectral::build_instance;
    use crate::walk::WalkKind;

    fn full_instance(window: i32) -> SpectralInstance {
        let env = sample_environment(
            DomainSpec::FullLattice { d: 2 },
            window,
            ConductanceLaw::Constant { w: 1.0 },
            1,
            Some(2.0),
        )
        .unwrap();
        let index = build_cluster_index(&env).unwrap();
        build_instance(
            &env,
            &index,
            &Region::sup_norm(vec![0.0, 0.0], window as f64 * 2.0),
            WalkKind::Vsrw,
            SpectralBoundary::None,
        )
        .unwrap()
    }

    #[test]
    fn constant_data_gives_constant_profile() {
        let inst = full_instance(6);
        let rep = harmonic_profile(&inst, &Vertex::new(&[0, 0]), 4.0, &|_| 3.5, 0.5).unwrap();
        for (_, v) in &rep.values {
            assert!((v - 3.5).abs() < 1e-10);
        }
        assert!((rep.harnack_ratio.unwrap() - 1.0).abs() < 1e-12);
        assert!(rep.oscillation_half < 1e-10);
    }

    #[test]
    fn linear_data_stays_linear() {
        // coordinates are discretely harmonic for unit weights
        let inst = full_instance(8);
        let rep = harmonic_profile(
            &inst,
            &Vertex::new(&[0, 0]),
            5.0,
            &|v| v.coord(0) as f64 + 0.5 * v.coord(1) as f64,
            0.5,
        )
        .unwrap();
        for (v, h) in &rep.values {
            let expect = v.coord(0) as f64 + 0.5 * v.coord(1) as f64;
            assert!((h - expect).abs() < 1e-9, "{v}: {h} vs {expect}");
        }
    }

    #[test]
    fn maximum_principle_bounds_interior() {
        let law = ConductanceLaw::Bernoulli { p1: 0.8 };
        let env =
            sample_environment(DomainSpec::FullLattice { d: 2 }, 10, law, 7, Some(2.0)).unwrap();
        let index = build_cluster_index(&env).unwrap();
        let inst = build_instance(
            &env,
            &index,
            &Region::sup_norm(vec![0.0, 0.0], 9.0),
            WalkKind::Vsrw,
            SpectralBoundary::None,
        )
        .unwrap();
        let center = inst.vertices()[inst.dim() / 2];
        if let Ok(rep) = harmonic_profile(&inst, &center, 3.0, &|v| (v.coord(0) as f64).abs(), 0.5)
        {
            let bmax = rep
                .values
                .iter()
                .map(|(v, _)| (v.coord(0) as f64).abs())
                .fold(0.0, f64::max);
            for (_, h) in &rep.values {
                assert!(*h <= bmax + 1e-9);
                assert!(*h >= -1e-9);
            }
            if let Some(ratio) = rep.harnack_ratio {
                assert!(ratio >= 1.0 - 1e-12);
            }
        }
    }
}
