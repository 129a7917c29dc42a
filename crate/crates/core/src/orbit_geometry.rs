//! Homogeneous metrics on the principal orbits.
//!
//! Every orbit class is described through a small set of shape parameters.
//! Apart from closed-form scalar curvatures, each class is decomposed into
//! groups of mutually orthogonal directions along which the metric is a
//! multiple of a fixed reference metric; a group with multiplicity `m` and
//! log-length `λ` contributes `m` directions of length `ρ·e^λ`. Volumes,
//! mean curvatures and second fundamental forms of the level sets in a
//! cohomogeneity-one manifold follow from this decomposition alone.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{unit_sphere_volume, Jet};

/// Symmetry type of the orbit, without parameter values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrbitKind {
    Round {
        dim: usize,
    },
    /// `U(n+1)`-invariant squashing of `S^{2n+1}` along the Hopf fibres.
    Berger {
        n: usize,
    },
    /// Left-invariant metrics on `S³ = SU(2)`.
    SU2,
    /// `Sp(n+1)`-invariant metrics on `S^{4n+3}`.
    Sp {
        n: usize,
    },
    /// `Spin(9)`-invariant metrics on `S^{15}`.
    Spin9,
}

/// Orbit metric at unit overall scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum OrbitClass {
    RoundSphere { dim: usize },
    Berger { n: usize, b: f64 },
    SU2 { c1: f64, c2: f64, c3: f64 },
    SpTriple { n: usize, c: [f64; 3] },
    Spin9 { c: f64 },
}

/// A block of `mult` orthogonal directions with common log-length.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DirectionGroup {
    pub mult: f64,
    pub log_len: Jet,
}

impl OrbitKind {
    pub fn dimension(self) -> usize {
        match self {
            OrbitKind::Round { dim } => dim,
            OrbitKind::Berger { n } => 2 * n + 1,
            OrbitKind::SU2 => 3,
            OrbitKind::Sp { n } => 4 * n + 3,
            OrbitKind::Spin9 => 15,
        }
    }

    /// Number of shape parameters.
    pub fn param_count(self) -> usize {
        match self {
            OrbitKind::Round { .. } => 0,
            OrbitKind::Berger { .. } | OrbitKind::Spin9 => 1,
            OrbitKind::SU2 | OrbitKind::Sp { .. } => 3,
        }
    }

    /// Parameters of the unit round sphere in this class.
    pub fn round_params(self) -> Vec<f64> {
        match self {
            OrbitKind::Round { .. } => vec![],
            OrbitKind::Berger { .. } => vec![0.0],
            OrbitKind::SU2 | OrbitKind::Sp { .. } => vec![1.0; 3],
            OrbitKind::Spin9 => vec![1.0],
        }
    }

    /// Short names of the shape parameters, for table headers.
    pub fn param_names(self) -> Vec<&'static str> {
        match self {
            OrbitKind::Round { .. } => vec![],
            OrbitKind::Berger { .. } => vec!["B"],
            OrbitKind::SU2 | OrbitKind::Sp { .. } => vec!["c1", "c2", "c3"],
            OrbitKind::Spin9 => vec!["c"],
        }
    }

    pub fn with_params(self, p: &[f64]) -> Result<OrbitClass> {
        if p.len() != self.param_count() {
            return Err(Error::Domain(format!(
                "{self:?} takes {} parameters, got {}",
                self.param_count(),
                p.len()
            )));
        }
        let o = match self {
            OrbitKind::Round { dim } => OrbitClass::RoundSphere { dim },
            OrbitKind::Berger { n } => OrbitClass::Berger { n, b: p[0] },
            OrbitKind::SU2 => OrbitClass::SU2 {
                c1: p[0],
                c2: p[1],
                c3: p[2],
            },
            OrbitKind::Sp { n } => OrbitClass::SpTriple {
                n,
                c: [p[0], p[1], p[2]],
            },
            OrbitKind::Spin9 => OrbitClass::Spin9 { c: p[0] },
        };
        o.validate()?;
        Ok(o)
    }

    /// Direction groups for shape parameters given as jets in some radial
    /// variable, so derivatives of the log-lengths come for free.
    pub fn direction_groups(self, p: &[Jet]) -> Vec<DirectionGroup> {
        let g = |mult: usize, log_len: Jet| DirectionGroup {
            mult: mult as f64,
            log_len,
        };
        match self {
            OrbitKind::Round { dim } => vec![g(dim, Jet::constant(0.0))],
            OrbitKind::Berger { n } => {
                vec![g(1, p[0] * (-2.0 * n as f64)), g(2 * n, p[0])]
            }
            OrbitKind::SU2 => p.iter().map(|c| g(1, c.ln())).collect(),
            OrbitKind::Sp { n } => {
                let mut v: Vec<DirectionGroup> = p.iter().map(|c| g(1, c.ln() * 0.5)).collect();
                if n > 0 {
                    v.push(g(4 * n, Jet::constant(0.0)));
                }
                v
            }
            OrbitKind::Spin9 => vec![g(7, p[0].ln() * 0.5), g(8, Jet::constant(0.0))],
        }
    }

    /// Ratio between the curvature deficit (see [`curvature_deficit`]) and
    /// the conventionally normalised defect returned by [`hawking_defect`].
    pub fn deficit_ratio(self) -> f64 {
        match self {
            OrbitKind::Berger { n } => 2.0 * n as f64,
            OrbitKind::SU2 => 2.0,
            _ => 1.0,
        }
    }
}

impl OrbitClass {
    pub fn kind(&self) -> OrbitKind {
        match *self {
            OrbitClass::RoundSphere { dim } => OrbitKind::Round { dim },
            OrbitClass::Berger { n, .. } => OrbitKind::Berger { n },
            OrbitClass::SU2 { .. } => OrbitKind::SU2,
            OrbitClass::SpTriple { n, .. } => OrbitKind::Sp { n },
            OrbitClass::Spin9 { .. } => OrbitKind::Spin9,
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            OrbitClass::RoundSphere { .. } => vec![],
            OrbitClass::Berger { b, .. } => vec![b],
            OrbitClass::SU2 { c1, c2, c3 } => vec![c1, c2, c3],
            OrbitClass::SpTriple { c, .. } => c.to_vec(),
            OrbitClass::Spin9 { c } => vec![c],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            OrbitClass::RoundSphere { dim } => dim >= 1,
            OrbitClass::Berger { n, b } => n >= 1 && b.is_finite(),
            OrbitClass::SU2 { c1, c2, c3 } => [c1, c2, c3].iter().all(|c| c.is_finite() && *c > 0.0),
            OrbitClass::SpTriple { c, .. } => c.iter().all(|c| c.is_finite() && *c > 0.0),
            OrbitClass::Spin9 { c } => c.is_finite() && c > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("invalid orbit parameters {self:?}")))
        }
    }

    /// Volume relative to the unit round sphere of the same dimension.
    pub fn volume_factor(&self) -> f64 {
        match *self {
            OrbitClass::RoundSphere { .. } | OrbitClass::Berger { .. } => 1.0,
            OrbitClass::SU2 { c1, c2, c3 } => c1 * c2 * c3,
            OrbitClass::SpTriple { c, .. } => (c[0] * c[1] * c[2]).sqrt(),
            OrbitClass::Spin9 { c } => c.powf(3.5),
        }
    }

    /// Scalar curvature at unit overall scale.
    pub fn unit_scalar_curvature(&self) -> f64 {
        match *self {
            OrbitClass::RoundSphere { dim } => (dim * (dim - 1)) as f64,
            OrbitClass::Berger { n, b } => {
                let nf = n as f64;
                -2.0 * nf * ((-4.0 * (nf + 1.0) * b).exp() - 2.0 * (nf + 1.0) * (-2.0 * b).exp())
            }
            OrbitClass::SU2 { c1, c2, c3 } => {
                let (a, b, c) = (c1 * c1, c2 * c2, c3 * c3);
                2.0 * (2.0 * a * (b + c) - a * a - (b - c).powi(2)) / (a * b * c)
            }
            OrbitClass::SpTriple { n, c } => {
                let nf = n as f64;
                let [c1, c2, c3] = c;
                2.0 / (c1 * c2 * c3)
                    * (c1 * c1 + c2 * c2 + c3 * c3 - (c2 - c3).powi(2) - (c3 - c1).powi(2) - (c1 - c2).powi(2))
                    - 4.0 * nf * (c1 + c2 + c3)
                    + 16.0 * nf * nf
                    + 32.0 * nf
            }
            OrbitClass::Spin9 { c } => 42.0 / c - 56.0 * c + 224.0,
        }
    }
}

pub fn orbit_dimension(orbit: &OrbitClass) -> usize {
    orbit.kind().dimension()
}

fn check_rho(rho: f64) -> Result<()> {
    if rho.is_finite() && rho > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("orbit radius must be positive, got {rho}")))
    }
}

/// Scalar curvature of `ρ² · g_orbit`.
pub fn orbit_scalar_curvature(orbit: &OrbitClass, rho: f64) -> Result<f64> {
    orbit.validate()?;
    check_rho(rho)?;
    Ok(orbit.unit_scalar_curvature() / (rho * rho))
}

/// Volume of `ρ² · g_orbit`.
pub fn orbit_volume(orbit: &OrbitClass, rho: f64) -> Result<f64> {
    orbit.validate()?;
    check_rho(rho)?;
    let k = orbit_dimension(orbit);
    Ok(rho.powi(k as i32) * orbit.volume_factor() * unit_sphere_volume(k))
}

/// `e^x − 1 − x` without cancellation for small `|x|`.
fn exp_m1_m1(x: f64) -> f64 {
    if x.abs() > 0.5 {
        return x.exp_m1() - x;
    }
    // Taylor series; 20 terms reach full precision for |x| ≤ 0.5.
    let mut term = 0.5 * x * x;
    let mut sum = term;
    for k in 3..24 {
        term *= x / k as f64;
        sum += term;
        if term.abs() <= f64::EPSILON * sum.abs() {
            break;
        }
    }
    sum
}

impl OrbitClass {
    /// Log-coordinates `t` of the shape (zero at the round point) and the
    /// expansion `(k)(k−1) − V^{2/k} R = Σ a_j exp(b_j · t)`.
    ///
    /// The coefficients satisfy `Σ a_j = 0` and `Σ a_j b_j = 0`, so the
    /// deficit equals `Σ a_j (e^{b_j·t} − 1 − b_j·t)`, which keeps full
    /// relative precision as the shape approaches the round point.
    fn deficit_monomials(&self) -> (Vec<f64>, Vec<(f64, Vec<f64>)>) {
        match *self {
            OrbitClass::RoundSphere { .. } => (vec![], vec![]),
            OrbitClass::Berger { n, b } => {
                let nf = n as f64;
                let terms = vec![
                    (2.0 * nf, vec![-4.0 * (nf + 1.0)]),
                    (-4.0 * nf * (nf + 1.0), vec![-2.0]),
                ];
                (vec![b], terms)
            }
            OrbitClass::SU2 { c1, c2, c3 } => {
                let t = vec![c1.ln(), c2.ln(), c3.ln()];
                let third = 2.0 / 3.0;
                let mut terms = Vec::new();
                for k in 0..3 {
                    let mut e = vec![third; 3];
                    e[k] -= 2.0;
                    terms.push((-4.0, e));
                    let mut e = vec![third - 2.0; 3];
                    e[k] = third + 2.0;
                    terms.push((2.0, e));
                }
                (t, terms)
            }
            OrbitClass::SpTriple { n, c } => {
                let nf = n as f64;
                let t: Vec<f64> = c.iter().map(|x| x.ln()).collect();
                let e = 1.0 / (4.0 * nf + 3.0);
                let mut terms = vec![(-(16.0 * nf * nf + 32.0 * nf), vec![e; 3])];
                for i in 0..3 {
                    let mut a = vec![e - 1.0; 3];
                    a[i] = e + 1.0;
                    terms.push((2.0, a));
                    let mut b = vec![e; 3];
                    b[i] -= 1.0;
                    terms.push((-4.0, b));
                    if n > 0 {
                        let mut c = vec![e; 3];
                        c[i] += 1.0;
                        terms.push((4.0 * nf, c));
                    }
                }
                (t, terms)
            }
            OrbitClass::Spin9 { c } => {
                let f = 1.0 / 15.0;
                let terms = vec![(-42.0, vec![-8.0 * f]), (56.0, vec![22.0 * f]), (-224.0, vec![7.0 * f])];
                (vec![c.ln()], terms)
            }
        }
    }
}

/// Scale-invariant curvature deficit `(k)(k−1) − V^{2/k} R` of a
/// `k`-dimensional orbit with volume factor `V` and unit-scale curvature `R`.
/// It vanishes on round spheres and is the quantity that controls the
/// monotonicity of the Hawking mass along radial flows.
pub fn curvature_deficit(orbit: &OrbitClass) -> Result<f64> {
    orbit.validate()?;
    let (t, terms) = orbit.deficit_monomials();
    Ok(terms
        .iter()
        .map(|(a, b)| a * exp_m1_m1(b.iter().zip(&t).map(|(bi, ti)| bi * ti).sum()))
        .sum())
}

/// The conventionally normalised defect polynomial of each class.
///
/// * Berger: `I_n(ϱ) = 2n+1 + ϱ^{2(n+1)} − 2(n+1)ϱ` with `ϱ = e^{−2B}`.
/// * SU(2): `I_1` after normalising `c3 = 1`.
/// * Sp and Spin(9): [`curvature_deficit`] itself.
pub fn hawking_defect(orbit: &OrbitClass) -> Result<f64> {
    orbit.validate()?;
    Ok(match *orbit {
        OrbitClass::RoundSphere { .. } => 0.0,
        OrbitClass::Berger { n, b } => berger_defect(n, (-2.0 * b).exp()),
        OrbitClass::SU2 { c1, c2, c3 } => su2_defect(c1 / c3, c2 / c3),
        OrbitClass::SpTriple { .. } | OrbitClass::Spin9 { .. } => curvature_deficit(orbit)?,
    })
}

/// `I_n(ϱ)` as a polynomial in the fibre ratio `ϱ ≥ 0`.
pub fn berger_defect(n: usize, varrho: f64) -> f64 {
    let nf = n as f64;
    2.0 * nf + 1.0 + varrho.powi(2 * (n as i32 + 1)) - 2.0 * (nf + 1.0) * varrho
}

/// `I_1(c1, c2)` with `c3 = 1`.
pub fn su2_defect(c1: f64, c2: f64) -> f64 {
    let p = c1 * c2;
    3.0 + (1.0 - c1 * c1 - c2 * c2).powi(2) / p.powf(4.0 / 3.0) - 4.0 * p.powf(2.0 / 3.0)
}

/// Finite-difference certificate that the round point is an isolated local
/// minimum of the defect.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalMinimumCertificate {
    pub gradient_norm: f64,
    /// Leading principal minors of the Hessian (all positive ⇔ positive definite).
    pub hessian_minors: Vec<f64>,
    pub hessian: Vec<Vec<f64>>,
    /// Smallest defect value over a punctured grid in the ball.
    pub min_on_punctured_ball: f64,
    pub ball_points: usize,
}

impl LocalMinimumCertificate {
    pub fn positive_definite(&self) -> bool {
        self.hessian_minors.iter().all(|m| *m > 0.0)
    }
}

fn determinant(m: &[Vec<f64>]) -> f64 {
    match m.len() {
        0 => 1.0,
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        3 => {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        }
        _ => unreachable!("orbit classes have at most three shape parameters"),
    }
}

/// Gradient, Hessian and punctured-ball minimum of [`curvature_deficit`]
/// around the round parameters of `kind`.
///
/// `step` is the central-difference step; the ball is sampled on a cubic
/// lattice of `per_axis` points per axis clipped to radius `radius`.
pub fn local_minimum_certificate(
    kind: OrbitKind,
    radius: f64,
    step: f64,
    per_axis: usize,
) -> Result<LocalMinimumCertificate> {
    let p0 = kind.round_params();
    let m = p0.len();
    let f = |p: &[f64]| -> Result<f64> { curvature_deficit(&kind.with_params(p)?) };
    let shifted = |d: &[(usize, f64)]| {
        let mut p = p0.clone();
        for (i, h) in d {
            p[*i] += h;
        }
        p
    };
    let f0 = f(&p0)?;
    let mut grad = vec![0.0; m];
    let mut hess = vec![vec![0.0; m]; m];
    for i in 0..m {
        let fp = f(&shifted(&[(i, step)]))?;
        let fm = f(&shifted(&[(i, -step)]))?;
        grad[i] = (fp - fm) / (2.0 * step);
        hess[i][i] = (fp - 2.0 * f0 + fm) / (step * step);
        for j in 0..i {
            let fpp = f(&shifted(&[(i, step), (j, step)]))?;
            let fpm = f(&shifted(&[(i, step), (j, -step)]))?;
            let fmp = f(&shifted(&[(i, -step), (j, step)]))?;
            let fmm = f(&shifted(&[(i, -step), (j, -step)]))?;
            let h = (fpp - fpm - fmp + fmm) / (4.0 * step * step);
            hess[i][j] = h;
            hess[j][i] = h;
        }
    }
    let minors = (1..=m)
        .map(|k| determinant(&hess[..k].iter().map(|r| r[..k].to_vec()).collect::<Vec<_>>()))
        .collect();

    let mut min_val = f64::INFINITY;
    let mut count = 0;
    let per_axis = per_axis.max(3);
    let lattice: Vec<f64> = (0..per_axis)
        .map(|i| -radius + 2.0 * radius * i as f64 / (per_axis - 1) as f64)
        .collect();
    let mut idx = vec![0usize; m];
    loop {
        let offs: Vec<f64> = idx.iter().map(|&i| lattice[i]).collect();
        let r2: f64 = offs.iter().map(|o| o * o).sum();
        if r2 > 0.0 && r2 <= radius * radius * (1.0 + 1e-12) {
            let p: Vec<f64> = p0.iter().zip(&offs).map(|(a, b)| a + b).collect();
            min_val = min_val.min(f(&p)?);
            count += 1;
        }
        // Odometer increment over the lattice.
        let mut k = 0;
        while k < m {
            idx[k] += 1;
            if idx[k] < per_axis {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == m {
            break;
        }
    }

    Ok(LocalMinimumCertificate {
        gradient_norm: grad.iter().map(|g| g * g).sum::<f64>().sqrt(),
        hessian_minors: minors,
        hessian: hess,
        min_on_punctured_ball: min_val,
        ball_points: count,
    })
}
