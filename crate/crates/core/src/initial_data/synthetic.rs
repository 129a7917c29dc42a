//! Hand-made data sets with known answers, used as test oracles and for
//! experimenting with the pipelines.

use super::{AsymptoticClass, Extrinsic, InitialDataSet, RadialProfile};
use crate::error::{Error, Result};
use crate::numerics::Jet;
use crate::orbit_geometry::OrbitKind;

/// Constant extrinsic curvature components in the Berger frame.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ConstantK {
    pub k_a: f64,
    pub k_b: f64,
    pub k_c: f64,
    pub k_s: f64,
}

impl ConstantK {
    pub fn isotropic(kappa: f64) -> Self {
        Self {
            k_a: kappa,
            k_b: kappa,
            k_c: kappa,
            k_s: 0.0,
        }
    }
}

fn uniform_grid(s_max: f64, nodes: usize) -> Result<Vec<f64>> {
    if !(s_max > 0.0) || nodes < 2 {
        return Err(Error::Domain("grid needs S_max > 0 and two nodes".into()));
    }
    Ok((0..nodes).map(|i| s_max * i as f64 / (nodes - 1) as f64).collect())
}

/// Flat space outside the ball of radius `r0`, `ρ = r0 + s`, `B = 0`, with
/// constant extrinsic curvature.
pub fn flat_annulus(n: usize, r0: f64, s_max: f64, nodes: usize, k: ConstantK) -> Result<InitialDataSet> {
    if !(r0 > 0.0) {
        return Err(Error::Domain("inner radius must be positive".into()));
    }
    let grid = uniform_grid(s_max, nodes)?;
    let mut ext = Extrinsic::zero(2);
    ext.k_a = RadialProfile::constant(k.k_a);
    ext.diag = vec![RadialProfile::constant(k.k_b), RadialProfile::constant(k.k_c)];
    ext.cross[0] = RadialProfile::constant(k.k_s);
    InitialDataSet::new(
        format!("flat-annulus(n={n}, r0={r0})"),
        OrbitKind::Berger { n },
        AsymptoticClass::Flat { tau: 2.0 * n as f64 },
        grid,
        RadialProfile::closed(move |s| Jet::new(r0 + s, 1.0, 0.0)),
        vec![RadialProfile::Zero],
        ext,
        Some(RadialProfile::Zero),
    )
}

/// `(1 + s²)^{−p/2}`, which behaves like `s^{−p}` in the tail.
pub fn planted_tail(p: f64) -> RadialProfile {
    RadialProfile::closed(move |s| (Jet::var(s) * Jet::var(s) + 1.0).powf(-0.5 * p))
}

/// Flat annulus whose only extrinsic components are planted power-law tails
/// `k_a ~ s^{−p_a}` and `k_s ~ s^{−p_s}`.
pub fn planted_momentum(n: usize, p_a: f64, p_s: f64, s_max: f64, nodes: usize) -> Result<InitialDataSet> {
    let mut data = flat_annulus(n, 1.0, s_max, nodes, ConstantK::default())?;
    data.label = format!("planted-momentum(p_a={p_a}, p_s={p_s})");
    data.extrinsic.k_a = planted_tail(p_a);
    data.extrinsic.cross[0] = planted_tail(p_s);
    Ok(data)
}

/// Flat annulus `ρ = r0 + s` whose inner boundary is a past (`sign = 1`) or
/// future (`sign = −1`) apparent horizon: `k_b = k_c = sign·(r0/ρ)^p/ρ`, so
/// that `Tr_Σ k = sign·H·(r0/ρ)^p` and `θ∓(0) = 0` while `H(0) ≠ 0`.
pub fn horizon_shell(n: usize, r0: f64, p: f64, s_max: f64, nodes: usize, sign: f64) -> Result<InitialDataSet> {
    if sign.abs() != 1.0 {
        return Err(Error::Domain("horizon sign must be ±1".into()));
    }
    let mut data = flat_annulus(n, r0, s_max, nodes, ConstantK::default())?;
    data.label = format!("horizon-shell(n={n}, r0={r0}, p={p}, sign={sign})");
    let k = RadialProfile::closed(move |s| {
        let rho = Jet::new(r0 + s, 1.0, 0.0);
        (rho * (1.0 / r0)).powf(-p) * rho.recip() * sign
    });
    data.extrinsic.diag = vec![k.clone(), k];
    Ok(data)
}

/// Replaces the radial component `k_a` of `data`, leaving everything else.
pub fn with_radial_k(data: &InitialDataSet, k_a: RadialProfile) -> InitialDataSet {
    let mut out = data.clone();
    out.label = format!("{} + k_a", data.label);
    out.extrinsic.k_a = k_a;
    out
}

/// Re-expresses `n = 1` Berger data in the left-invariant SU(2) frame with
/// `c1 = c2 = e^B`, `c3 = e^{−2B}`; the Hopf fibre becomes the third axis.
pub fn su2_view(data: &InitialDataSet) -> Result<InitialDataSet> {
    if data.orbit != (OrbitKind::Berger { n: 1 }) {
        return Err(Error::Domain("the SU(2) view needs n = 1 Berger data".into()));
    }
    let b = data.shape[0].clone();
    let b2 = b.clone();
    let base = RadialProfile::closed(move |s| b.eval(s).exp());
    let fibre = RadialProfile::closed(move |s| (b2.eval(s) * -2.0).exp());
    let e = &data.extrinsic;
    let ext = Extrinsic {
        k_a: e.k_a.clone(),
        diag: vec![e.diag[1].clone(), e.diag[1].clone(), e.diag[0].clone()],
        cross: vec![RadialProfile::Zero, RadialProfile::Zero, e.cross[0].clone()],
    };
    let mut out = InitialDataSet::new(
        format!("{} [su2]", data.label),
        OrbitKind::SU2,
        data.asymptotic,
        data.grid.clone(),
        data.radius.clone(),
        vec![base.clone(), base, fibre],
        ext,
        Some(data.mass_deficit.clone()),
    )?;
    out.family = data.family;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn flat_annulus_has_round_flat_geometry() {
        let d = flat_annulus(2, 1.0, 10.0, 300, ConstantK::default()).unwrap();
        let (tp, tm) = d.null_expansions(4.0).unwrap();
        assert!((tp - 1.0).abs() < 1e-15 && (tm - 1.0).abs() < 1e-15);
        assert!(d.scalar_curvature(3.3).unwrap().abs() < 1e-14);
    }

    #[test]
    fn constant_k_energy_density_is_algebraic() {
        let n = 1;
        let kappa = 0.3;
        let d = flat_annulus(n, 1.0, 10.0, 300, ConstantK::isotropic(kappa)).unwrap();
        let s = 2.0;
        let em = d.energy_momentum_density(s).unwrap();
        let dim = 2.0 * n as f64 + 2.0;
        let tr = dim * kappa;
        let norm2 = dim * kappa * kappa;
        assert!((em.mu - (tr * tr - norm2) / (16.0 * PI)).abs() < 1e-15);
        // div(k − Tr k g) for k = κ g on flat space vanishes.
        assert!(em.j_norm() < 1e-15);
    }

    #[test]
    fn planted_tails_have_the_planted_decay() {
        let d = planted_momentum(1, 7.0, 5.0, 1000.0, 400).unwrap();
        let p = d.momentum_decay_exponents();
        assert!((p.p_a + 7.0).abs() < 0.05, "{p:?}");
        assert!((p.p_s + 5.0).abs() < 0.05, "{p:?}");
    }
}
