//! Central tolerance ladder.
//!
//! Every threshold used by the solvers and verifiers lives here. A profile
//! is chosen by name; the environment variable `PENROSE_TOL_PROFILE`
//! selects one of `default`, `strict` or `loose`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const PROFILE_ENV: &str = "PENROSE_TOL_PROFILE";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub profile: String,
    /// Relative agreement for closed-form cross-checks.
    pub closed_form: f64,
    /// Smallest acceptable `μ − |J|`.
    pub dec_floor: f64,
    /// Smallest acceptable scalar curvature for Riemannian input.
    pub scalar_curvature_floor: f64,
    /// Margin below which a verification counts as a violation.
    pub margin_floor: f64,
    /// Quantities with magnitude below this count as zero (e.g. `H(0)`).
    pub zero: f64,
    pub ode_rtol: f64,
    pub ode_atol: f64,
    /// Relative tolerance for arclength and mass quadratures.
    pub quad_rel: f64,
    /// End of the `w`-substituted start-up interval, as a fraction of the
    /// horizon radius.
    pub w_switch_fraction: f64,
    /// Agreement required between successive Richardson extrapolants of the
    /// ε-shifted Jang solutions.
    pub eps_richardson: f64,
    /// Allowed number of roundoff clamps of `|v|` below one.
    pub max_clamps: usize,
    /// Allowed relative spread between extrapolation orders.
    pub extrapolation_spread: f64,
    /// Full-versus-half step agreement for one conformal step.
    pub conformal_step: f64,
    /// Default number of grid nodes for built data sets.
    pub grid_nodes: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            profile: "default".into(),
            closed_form: 1e-6,
            dec_floor: -1e-7,
            scalar_curvature_floor: -1e-7,
            margin_floor: -1e-4,
            zero: 1e-9,
            ode_rtol: 1e-10,
            ode_atol: 1e-12,
            quad_rel: 1e-13,
            w_switch_fraction: 1e-2,
            eps_richardson: 1e-8,
            max_clamps: 10,
            extrapolation_spread: 1e-3,
            conformal_step: 1e-6,
            grid_nodes: 512,
        }
    }
}

impl Tolerances {
    pub fn strict() -> Self {
        Self {
            profile: "strict".into(),
            closed_form: 1e-8,
            margin_floor: -1e-6,
            ode_rtol: 1e-12,
            ode_atol: 1e-14,
            grid_nodes: 1024,
            ..Self::default()
        }
    }

    pub fn loose() -> Self {
        Self {
            profile: "loose".into(),
            closed_form: 1e-4,
            margin_floor: -1e-3,
            ode_rtol: 1e-8,
            ode_atol: 1e-10,
            quad_rel: 1e-11,
            eps_richardson: 1e-6,
            grid_nodes: 256,
            ..Self::default()
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "" | "default" => Ok(Self::default()),
            "strict" => Ok(Self::strict()),
            "loose" => Ok(Self::loose()),
            other => Err(Error::Domain(format!("unknown tolerance profile '{other}'"))),
        }
    }

    /// Profile named by `PENROSE_TOL_PROFILE`, or the default one.
    pub fn from_env() -> Result<Self> {
        match std::env::var(PROFILE_ENV) {
            Ok(v) => Self::by_name(&v),
            Err(_) => Ok(Self::default()),
        }
    }

    /// Checks that every tolerance has a sensible sign.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.closed_form,
            self.zero,
            self.ode_rtol,
            self.ode_atol,
            self.quad_rel,
            self.w_switch_fraction,
            self.eps_richardson,
            self.extrapolation_spread,
            self.conformal_step,
        ];
        if positive.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::Domain("tolerances must be positive and finite".into()));
        }
        if self.grid_nodes < 256 {
            return Err(Error::Domain("sampled grids need at least 256 nodes".into()));
        }
        Ok(())
    }
}
