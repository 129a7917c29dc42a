//! Time-symmetric data with deformed orbits and nonnegative scalar curvature.
//!
//! The construction uses the volume radius `x = R` as coordinate and a mass
//! function `m(x)` with `R'² = V = 1 − 2m/x^{d−2}`. For a prescribed orbit
//! shape `c(x)` the scalar curvature of `ds² + g_s` is
//!
//! `R_g = 2(d−1) m_x / x^{d−1} − D/x² − V Λ`,
//!
//! where `D` is the curvature deficit of the shape and `Λ = Σ mult·λ̂_x²`
//! collects the shape gradients. Choosing
//! `m_x = x^{d−1}(D/x² + Λ)/(2(d−1))` leaves `R_g = 2mΛ/x^{d−2} ≥ 0`, so
//! any shape profile that keeps `V > 0` produces admissible data whose inner
//! boundary `x = x_h` is minimal.

use std::sync::Arc;

use super::chart::{Chart, Lapse};
use super::families::{graded_grid, FamilyOptions};
use super::{AsymptoticClass, Extrinsic, InitialDataSet, RadialProfile};
use crate::error::{Error, Result};
use crate::numerics::interp::locate;
use crate::numerics::{quad, Jet};
use crate::orbit_geometry::{curvature_deficit, OrbitKind};

/// Orbit shape parameters as jets in the areal coordinate.
pub type ShapeFn = Arc<dyn Fn(Jet) -> Vec<Jet> + Send + Sync>;

/// Areal-gauge description of a deformed black-hole slice.
#[derive(Clone)]
pub struct ArealSpec {
    pub label: String,
    pub orbit: OrbitKind,
    /// Horizon radius; `m(x_h) = x_h^{d−2}/2`.
    pub horizon: f64,
    pub shape: ShapeFn,
    /// Decay exponent recorded in the asymptotic class.
    pub tau: f64,
}

impl std::fmt::Debug for ArealSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ArealSpec")
            .field("label", &self.label)
            .field("orbit", &self.orbit)
            .field("horizon", &self.horizon)
            .field("tau", &self.tau)
            .finish()
    }
}

impl ArealSpec {
    /// `S^5` Berger squashing `B = 0.05 (1 + x − x_h)^{−3}` with `x_h = 1`.
    pub fn berger_example() -> Self {
        Self {
            label: "berger-perturbed(n=2)".into(),
            orbit: OrbitKind::Berger { n: 2 },
            horizon: 1.0,
            shape: Arc::new(|x: Jet| vec![x.powi(-3) * 0.05]),
            tau: 3.0,
        }
    }

    /// `S^7` with fibre parameters `c_i = 1 + 0.05 e^{−(x − x_h)}`.
    pub fn sp_example() -> Self {
        Self {
            label: "sp-perturbed(n=1)".into(),
            orbit: OrbitKind::Sp { n: 1 },
            horizon: 1.0,
            shape: Arc::new(|x: Jet| {
                let c = ((x - 1.0) * -1.0).exp() * 0.05 + 1.0;
                vec![c; 3]
            }),
            tau: 6.0,
        }
    }

    /// `S^15` with a strongly collapsed fibre at the horizon,
    /// `c = 1 − 0.9 e^{−(x − x_h)/5}`. The orbit defect is negative near the
    /// boundary, so radial IMCF alone is not monotone here.
    pub fn spin9_collapse() -> Self {
        Self {
            label: "spin9-collapse".into(),
            orbit: OrbitKind::Spin9,
            horizon: 1.0,
            shape: Arc::new(|x: Jet| vec![1.0 - ((x - 1.0) * -0.2).exp() * 0.9]),
            tau: 14.0,
        }
    }

    /// Berger squashing with a general amplitude and horizon radius,
    /// `B = amp (1 + (x − x_h)/x_h)^{−3}`.
    pub fn berger(n: usize, horizon: f64, amp: f64) -> Self {
        Self {
            label: format!("berger-perturbed(n={n}, amp={amp})"),
            orbit: OrbitKind::Berger { n },
            horizon,
            shape: Arc::new(move |x: Jet| vec![(x * (1.0 / horizon)).powi(-3) * amp]),
            tau: 3.0,
        }
    }

    fn dimension(&self) -> usize {
        self.orbit.dimension() + 1
    }

    /// `dm/dx` at areal radius `x`.
    pub fn mass_density(&self, x: f64) -> Result<f64> {
        let d = self.dimension();
        let k = (d - 1) as f64;
        let shape = (self.shape)(Jet::var(x));
        let groups = self.orbit.direction_groups(&shape);
        let mean = groups.iter().map(|g| g.mult * g.log_len.d1).sum::<f64>() / k;
        let lambda: f64 = groups.iter().map(|g| g.mult * (g.log_len.d1 - mean).powi(2)).sum();
        let p: Vec<f64> = shape.iter().map(|j| j.v).collect();
        let deficit = curvature_deficit(&self.orbit.with_params(&p)?)?;
        Ok(x.powi(d as i32 - 1) * (deficit / (x * x) + lambda) / (2.0 * k))
    }
}

/// Lapse of an [`ArealSpec`] with the mass integral tabulated on a graded
/// radial grid.
pub struct ArealLapse {
    spec: ArealSpec,
    x: Vec<f64>,
    dm: Vec<f64>,
    abs_tol: f64,
    rel_tol: f64,
}

impl ArealLapse {
    pub fn new(spec: ArealSpec, x_max: f64, nodes: usize, rel_tol: f64) -> Result<Self> {
        let xh = spec.horizon;
        if !(xh > 0.0 && x_max > xh) {
            return Err(Error::Domain("areal data need 0 < x_h < x_max".into()));
        }
        let ratio = x_max / xh;
        let x: Vec<f64> = (0..nodes)
            .map(|i| xh * ratio.powf(i as f64 / (nodes - 1) as f64))
            .collect();
        let d = spec.dimension() as i32;
        // Absolute accuracy relative to the horizon mass; the density may change
        // sign, so a purely relative criterion can stall on roundoff.
        let abs_tol = 1e-15 * xh.powi(d - 2);
        let mut fail = None;
        let dm = quad::cumulative(
            |t| match spec.mass_density(t) {
                Ok(v) => v,
                Err(e) => {
                    fail.get_or_insert(e);
                    f64::NAN
                }
            },
            &x,
            abs_tol,
            rel_tol,
        );
        if let Some(e) = fail {
            return Err(e);
        }
        let lapse = Self {
            spec,
            x,
            dm: dm?,
            abs_tol,
            rel_tol,
        };
        if !(lapse.v_x(0.0) > 0.0) {
            return Err(Error::Construction("areal data have a degenerate horizon".into()));
        }
        for (i, &xi) in lapse.x.iter().enumerate().skip(1) {
            let m = lapse.mass(xi);
            if !(2.0 * m < xi.powi(d - 2)) {
                return Err(Error::Construction(format!(
                    "mass function exceeds the trapping bound at x = {xi} (node {i})"
                )));
            }
        }
        Ok(lapse)
    }

    /// `m(x) − m(x_h)`.
    pub fn mass_increment(&self, x: f64) -> f64 {
        let i = locate(&self.x, x);
        let tail = quad::integrate(
            |t| self.spec.mass_density(t).unwrap_or(f64::NAN),
            self.x[i],
            x,
            self.abs_tol,
            self.rel_tol,
        )
        .map(|r| r.value)
        .unwrap_or(f64::NAN);
        self.dm[i] + tail
    }

    pub fn mass(&self, x: f64) -> f64 {
        0.5 * self.spec.horizon.powi(self.spec.dimension() as i32 - 2) + self.mass_increment(x)
    }
}

impl Lapse for ArealLapse {
    fn horizon(&self) -> f64 {
        self.spec.horizon
    }

    fn v(&self, delta: f64) -> f64 {
        let xh = self.spec.horizon;
        let p = self.spec.dimension() as i32 - 2;
        let x = xh + delta;
        let grown = xh.powi(p) * (f64::from(p) * (delta / xh).ln_1p()).exp_m1();
        (grown - 2.0 * self.mass_increment(x)) / x.powi(p)
    }

    fn v_x(&self, delta: f64) -> f64 {
        let x = self.spec.horizon + delta;
        let p = self.spec.dimension() as i32 - 2;
        let mx = self.spec.mass_density(x).unwrap_or(f64::NAN);
        -2.0 * mx / x.powi(p) + 2.0 * f64::from(p) * self.mass(x) / x.powi(p + 1)
    }
}

const TABLE_NODES: usize = 400;
const CHART_NODES: usize = 256;

/// Builds the data set on a graded arclength grid reaching the areal radius
/// `10³ x_h` (or the requested `S_max`).
pub fn build_areal(spec: ArealSpec, opts: &FamilyOptions) -> Result<InitialDataSet> {
    if opts.nodes < 256 {
        return Err(Error::Domain(format!(
            "sampled profiles need at least 256 nodes, got {}",
            opts.nodes
        )));
    }
    let xh = spec.horizon;
    let mut x_max = 1e3 * xh;
    let (lapse, chart, s_max) = loop {
        let lapse = ArealLapse::new(spec.clone(), x_max, TABLE_NODES, opts.quad_rel)?;
        let chart = Chart::build(&lapse, x_max - xh, CHART_NODES, opts.quad_rel)?;
        match opts.s_max {
            None => {
                let s = chart.s_max();
                break (lapse, chart, s);
            }
            Some(s) if s <= chart.s_max() => break (lapse, chart, s),
            Some(s) if x_max >= 1e9 * xh => {
                return Err(Error::Domain(format!("S_max = {s} is out of reach")));
            }
            Some(_) => x_max *= 4.0,
        }
    };
    let grid = graded_grid(s_max, xh, opts.nodes);
    let d = spec.dimension();
    let q = spec.orbit.param_count();
    let mut r = [Vec::new(), Vec::new(), Vec::new()];
    let mut shape = vec![[Vec::new(), Vec::new(), Vec::new()]; q];
    let mut md = (Vec::new(), Vec::new());
    for &s in &grid {
        let delta = chart.delta_of_s(&lapse, s)?;
        let x = xh + delta;
        let v = lapse.v(delta).max(0.0);
        let (xs, xss) = (v.sqrt(), 0.5 * lapse.v_x(delta));
        let rj = Jet::var(x).reparametrize(xs, xss);
        for (col, val) in r.iter_mut().zip([rj.v, rj.d1, rj.d2]) {
            col.push(val);
        }
        for (cols, j) in shape.iter_mut().zip((spec.shape)(Jet::var(x))) {
            let j = j.reparametrize(xs, xss);
            for (col, val) in cols.iter_mut().zip([j.v, j.d1, j.d2]) {
                col.push(val);
            }
        }
        md.0.push(2.0 * lapse.mass(x) / x.powi(d as i32 - 2));
        md.1.push(-2.0 * rj.d1 * rj.d2);
    }
    let [r0, r1, r2] = r;
    let radius = RadialProfile::sampled(&grid, r0, r1, r2)?;
    let shape = shape
        .into_iter()
        .map(|[a, b, c]| RadialProfile::sampled(&grid, a, b, c))
        .collect::<Result<Vec<_>>>()?;
    let groups = spec.orbit.direction_groups(&vec![Jet::constant(1.0); q]).len();
    InitialDataSet::new(
        spec.label.clone(),
        spec.orbit,
        AsymptoticClass::Flat { tau: spec.tau },
        grid.clone(),
        radius,
        shape,
        Extrinsic::zero(groups),
        Some(RadialProfile::sampled_first(&grid, md.0, md.1)?),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_shape_reproduces_schwarzschild_lapse() {
        let spec = ArealSpec {
            label: "round".into(),
            orbit: OrbitKind::Berger { n: 1 },
            horizon: 1.5,
            shape: Arc::new(|_| vec![Jet::constant(0.0)]),
            tau: 2.0,
        };
        let l = ArealLapse::new(spec, 100.0, 64, 1e-13).unwrap();
        for delta in [1e-9, 0.3, 20.0] {
            let x: f64 = 1.5 + delta;
            let exact = 1.0 - 2.25 / (x * x);
            assert!(
                (l.v(delta) - exact).abs() < 1e-14 * (1.0 + exact.abs()) + 1e-15,
                "δ={delta}"
            );
        }
        assert!((l.mass(50.0) - 1.125).abs() < 1e-15);
    }

    #[test]
    fn mass_density_of_constant_squashing_is_pure_deficit() {
        let b = 0.1;
        let spec = ArealSpec {
            label: "const".into(),
            orbit: OrbitKind::Berger { n: 2 },
            horizon: 1.0,
            shape: Arc::new(move |_| vec![Jet::constant(b)]),
            tau: 3.0,
        };
        let o = OrbitKind::Berger { n: 2 }.with_params(&[b]).unwrap();
        let dx = curvature_deficit(&o).unwrap();
        let x = 2.0f64;
        let expect = x.powi(5) * dx / (x * x) / 10.0;
        assert!((spec.mass_density(x).unwrap() - expect).abs() < 1e-13);
    }
}
