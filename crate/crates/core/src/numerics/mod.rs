//! Numerical building blocks shared by the geometric solvers.

pub mod extrap;
pub mod fit;
pub mod interp;
pub mod jet;
pub mod ode;
pub mod quad;
pub mod root;

pub use jet::Jet;

/// Volume of the unit `k`-sphere, `2π^{(k+1)/2} / Γ((k+1)/2)`.
pub fn unit_sphere_volume(k: usize) -> f64 {
    // Recurrence ω_k = 2π/(k−1) · ω_{k−2} with ω_0 = 2, ω_1 = 2π.
    let mut even = 2.0;
    let mut odd = 2.0 * std::f64::consts::PI;
    if k == 0 {
        return even;
    }
    if k == 1 {
        return odd;
    }
    let mut j = 2;
    while j <= k {
        let next = 2.0 * std::f64::consts::PI / (j as f64 - 1.0);
        if j % 2 == 0 {
            even *= next;
        } else {
            odd *= next;
        }
        j += 1;
    }
    if k % 2 == 0 {
        even
    } else {
        odd
    }
}
