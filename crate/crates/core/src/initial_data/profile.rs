//! Scalar radial profiles with two derivatives.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::interp::{strictly_increasing, CubicHermite, QuinticHermite};
use crate::numerics::Jet;

/// Closed-form profile: returns value and two derivatives at `s`.
pub type ProfileFn = Arc<dyn Fn(f64) -> Jet + Send + Sync>;

/// A scalar function of the radial arclength with two derivatives.
#[derive(Clone)]
pub enum RadialProfile {
    /// Identically zero; kept distinct so that "no extrinsic curvature" is
    /// exact rather than a tiny interpolated value.
    Zero,
    Closed(ProfileFn),
    /// Nodes carrying value, first and second derivative.
    Sampled(QuinticHermite),
    /// Nodes carrying values and first derivatives only.
    SampledFirst(CubicHermite),
}

impl fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RadialProfile::Zero => write!(f, "Zero"),
            RadialProfile::Closed(_) => write!(f, "Closed(..)"),
            RadialProfile::Sampled(q) => write!(f, "Sampled({} nodes)", q.nodes().len()),
            RadialProfile::SampledFirst(c) => write!(f, "SampledFirst({} nodes)", c.nodes().len()),
        }
    }
}

impl RadialProfile {
    pub fn closed(f: impl Fn(f64) -> Jet + Send + Sync + 'static) -> Self {
        RadialProfile::Closed(Arc::new(f))
    }

    pub fn constant(c: f64) -> Self {
        if c == 0.0 {
            RadialProfile::Zero
        } else {
            RadialProfile::closed(move |_| Jet::constant(c))
        }
    }

    /// Profile from node values and both derivatives, or [`RadialProfile::Zero`]
    /// when every entry vanishes.
    pub fn sampled(s: &[f64], v: Vec<f64>, d1: Vec<f64>, d2: Vec<f64>) -> Result<Self> {
        check_grid(s)?;
        if [&v, &d1, &d2].iter().any(|c| c.len() != s.len()) {
            return Err(Error::Domain("profile columns must match the grid length".into()));
        }
        if [&v, &d1, &d2].iter().any(|c| c.iter().any(|x| !x.is_finite())) {
            return Err(Error::Numeric("non-finite profile sample".into()));
        }
        if v.iter().chain(&d1).chain(&d2).all(|x| *x == 0.0) {
            return Ok(RadialProfile::Zero);
        }
        Ok(RadialProfile::Sampled(QuinticHermite::new(s.to_vec(), v, d1, d2)))
    }

    /// Profile from values and first derivatives.
    pub fn sampled_first(s: &[f64], v: Vec<f64>, d1: Vec<f64>) -> Result<Self> {
        check_grid(s)?;
        if v.len() != s.len() || d1.len() != s.len() {
            return Err(Error::Domain("profile columns must match the grid length".into()));
        }
        if v.iter().chain(&d1).any(|x| !x.is_finite()) {
            return Err(Error::Numeric("non-finite profile sample".into()));
        }
        Ok(RadialProfile::SampledFirst(CubicHermite::new(s.to_vec(), v, d1)))
    }

    /// Derivative-limited monotone interpolant of values alone.
    pub fn monotone(s: &[f64], v: Vec<f64>) -> Result<Self> {
        check_grid(s)?;
        if v.len() != s.len() || v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("profile values must be finite and match the grid".into()));
        }
        Ok(RadialProfile::SampledFirst(CubicHermite::monotone(s.to_vec(), v)))
    }

    /// Samples a closed-form function on `s` with all three columns.
    pub fn tabulate(s: &[f64], f: impl Fn(f64) -> Jet) -> Result<Self> {
        let j: Vec<Jet> = s.iter().map(|&x| f(x)).collect();
        Self::sampled(
            s,
            j.iter().map(|x| x.v).collect(),
            j.iter().map(|x| x.d1).collect(),
            j.iter().map(|x| x.d2).collect(),
        )
    }

    pub fn eval(&self, s: f64) -> Jet {
        match self {
            RadialProfile::Zero => Jet::constant(0.0),
            RadialProfile::Closed(f) => f(s),
            RadialProfile::Sampled(q) => q.eval(s),
            RadialProfile::SampledFirst(c) => c.eval(s),
        }
    }

    pub fn value(&self, s: f64) -> f64 {
        self.eval(s).v
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, RadialProfile::Zero)
    }

    /// Nodes of a sampled representation.
    pub fn nodes(&self) -> Option<&[f64]> {
        match self {
            RadialProfile::Sampled(q) => Some(q.nodes()),
            RadialProfile::SampledFirst(c) => Some(c.nodes()),
            _ => None,
        }
    }

    /// Largest relative mismatch, over interior nodes, between the stored
    /// first derivative and a centred difference of the interpolated values
    /// with a step of `1e-4` times the local spacing.
    pub fn derivative_consistency(&self) -> Option<f64> {
        let x = self.nodes()?;
        let d: Vec<f64> = x.iter().map(|&t| self.eval(t).d1).collect();
        let scale = d.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let mut worst = 0.0f64;
        for i in 1..x.len() - 1 {
            let h = 1e-4 * (x[i + 1] - x[i]).min(x[i] - x[i - 1]);
            let fd = (self.value(x[i] + h) - self.value(x[i] - h)) / (2.0 * h);
            worst = worst.max((fd - d[i]).abs() / d[i].abs().max(1e-6 * scale));
        }
        Some(worst)
    }
}

fn check_grid(s: &[f64]) -> Result<()> {
    if s.len() < 2 || !strictly_increasing(s) {
        return Err(Error::Domain("sampled profiles need a strictly increasing grid".into()));
    }
    Ok(())
}
