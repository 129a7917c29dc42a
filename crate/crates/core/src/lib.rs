//! Cohomogeneity-one initial data, the coupled Jang / inverse mean curvature
//! flow ODE, radial conformal flow, and end-to-end Penrose-inequality
//! verification.

pub mod conformal_flow;
pub mod error;
pub mod imcf_hawking;
pub mod initial_data;
pub mod jang_solver;
pub mod numerics;
pub mod orbit_geometry;
pub mod penrose_verifier;
pub mod tolerances;

pub use error::{Error, Result};
