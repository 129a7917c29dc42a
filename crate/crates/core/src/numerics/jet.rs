//! Second-order forward-mode differentiation.
//!
//! A [`Jet`] carries a value together with its first and second derivative
//! with respect to one independent variable. Arithmetic propagates both
//! derivatives exactly, so closed-form profiles only have to be written once.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Value with first and second derivative.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Jet {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet {
    pub const fn new(v: f64, d1: f64, d2: f64) -> Self {
        Self { v, d1, d2 }
    }

    pub const fn constant(v: f64) -> Self {
        Self { v, d1: 0.0, d2: 0.0 }
    }

    /// The independent variable itself.
    pub const fn var(x: f64) -> Self {
        Self { v: x, d1: 1.0, d2: 0.0 }
    }

    /// Applies a scalar function given its value and first two derivatives at `self.v`.
    pub fn compose(self, f: f64, fp: f64, fpp: f64) -> Self {
        Self {
            v: f,
            d1: fp * self.d1,
            d2: fp * self.d2 + fpp * self.d1 * self.d1,
        }
    }

    pub fn ln(self) -> Self {
        let r = 1.0 / self.v;
        self.compose(self.v.ln(), r, -r * r)
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        self.compose(e, e, e)
    }

    /// `ln(1 + self)` evaluated without cancellation for small arguments.
    pub fn ln_1p(self) -> Self {
        let r = 1.0 / (1.0 + self.v);
        self.compose(self.v.ln_1p(), r, -r * r)
    }

    pub fn powf(self, p: f64) -> Self {
        let a = self.v.powf(p - 2.0);
        self.compose(a * self.v * self.v, p * a * self.v, p * (p - 1.0) * a)
    }

    pub fn powi(self, k: i32) -> Self {
        if k == 0 {
            return Self::constant(1.0);
        }
        let kf = f64::from(k);
        let a = if k >= 2 {
            self.v.powi(k - 2)
        } else {
            self.v.powf(kf - 2.0)
        };
        self.compose(a * self.v * self.v, kf * a * self.v, kf * (kf - 1.0) * a)
    }

    pub fn sqrt(self) -> Self {
        let r = self.v.sqrt();
        self.compose(r, 0.5 / r, -0.25 / (r * self.v))
    }

    pub fn recip(self) -> Self {
        let r = 1.0 / self.v;
        self.compose(r, -r * r, 2.0 * r * r * r)
    }

    pub fn cosh(self) -> Self {
        self.compose(self.v.cosh(), self.v.sinh(), self.v.cosh())
    }

    pub fn sinh(self) -> Self {
        self.compose(self.v.sinh(), self.v.cosh(), self.v.sinh())
    }

    pub fn tanh(self) -> Self {
        let t = self.v.tanh();
        let sech2 = 1.0 - t * t;
        self.compose(t, sech2, -2.0 * t * sech2)
    }

    pub fn scale(self, c: f64) -> Self {
        Self::new(c * self.v, c * self.d1, c * self.d2)
    }

    /// Re-expresses derivatives taken in `x` as derivatives in `s`, given
    /// `dx/ds` and `d²x/ds²`.
    pub fn reparametrize(self, xs: f64, xss: f64) -> Self {
        Self {
            v: self.v,
            d1: self.d1 * xs,
            d2: self.d2 * xs * xs + self.d1 * xss,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.v.is_finite() && self.d1.is_finite() && self.d2.is_finite()
    }
}

impl From<f64> for Jet {
    fn from(v: f64) -> Self {
        Jet::constant(v)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet::new(self.v + o.v, self.d1 + o.d1, self.d2 + o.d2)
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet::new(self.v - o.v, self.d1 - o.d1, self.d2 - o.d2)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet::new(-self.v, -self.d1, -self.d2)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet::new(
            self.v * o.v,
            self.d1 * o.v + self.v * o.d1,
            self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
        )
    }
}

impl Div for Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Jet) -> Jet {
        self * o.recip()
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, c: f64) -> Jet {
        Jet::new(self.v + c, self.d1, self.d2)
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(self, c: f64) -> Jet {
        Jet::new(self.v - c, self.d1, self.d2)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, c: f64) -> Jet {
        self.scale(c)
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, c: f64) -> Jet {
        self.scale(1.0 / c)
    }
}

impl Add<Jet> for f64 {
    type Output = Jet;
    fn add(self, j: Jet) -> Jet {
        j + self
    }
}

impl Sub<Jet> for f64 {
    type Output = Jet;
    fn sub(self, j: Jet) -> Jet {
        Jet::new(self - j.v, -j.d1, -j.d2)
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, j: Jet) -> Jet {
        j.scale(self)
    }
}

impl Div<Jet> for f64 {
    type Output = Jet;
    fn div(self, j: Jet) -> Jet {
        j.recip().scale(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd(f: impl Fn(f64) -> f64, x: f64) -> (f64, f64) {
        let h = 1e-4;
        let d1 = (f(x + h) - f(x - h)) / (2.0 * h);
        let d2 = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
        (d1, d2)
    }

    fn check(j: Jet, f: impl Fn(f64) -> f64, x: f64) {
        let (d1, d2) = fd(&f, x);
        assert!((j.v - f(x)).abs() < 1e-12 * (1.0 + f(x).abs()));
        assert!((j.d1 - d1).abs() < 1e-6 * (1.0 + d1.abs()), "{} vs {}", j.d1, d1);
        assert!((j.d2 - d2).abs() < 1e-4 * (1.0 + d2.abs()), "{} vs {}", j.d2, d2);
    }

    #[test]
    fn elementary_functions_match_finite_differences() {
        let x = 0.7;
        let t = Jet::var(x);
        check(t.ln(), |x| x.ln(), x);
        check(t.exp(), |x| x.exp(), x);
        check(t.powf(-2.5), |x| x.powf(-2.5), x);
        check(t.powi(5), |x| x.powi(5), x);
        check(t.powi(-3), |x| x.powi(-3), x);
        check(t.sqrt(), |x| x.sqrt(), x);
        check(t.ln_1p(), |x| x.ln_1p(), x);
        check(t.tanh(), |x| x.tanh(), x);
        check(t.cosh() * t.sinh(), |x| x.cosh() * x.sinh(), x);
        check((t * t + 1.0) / (t - 3.0), |x| (x * x + 1.0) / (x - 3.0), x);
        check(2.0 / t - t * 0.5, |x| 2.0 / x - 0.5 * x, x);
    }

    #[test]
    fn reparametrization_is_the_chain_rule() {
        // f(x) = x³ with x = s², evaluated at s = 1.3.
        let s = 1.3_f64;
        let x = s * s;
        let fx = Jet::new(x.powi(3), 3.0 * x * x, 6.0 * x);
        let fs = fx.reparametrize(2.0 * s, 2.0);
        check(fs, |s| s.powi(6), s);
    }
}
