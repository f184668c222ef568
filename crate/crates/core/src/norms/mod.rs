//! Integral quantities: the Laplace kernel `K`, the weighted space norms,
//! the half-plane integral, `K₀` and the exterior weights `p`, `p₀`.

mod exterior;
mod halfplane;
mod kernel;
mod radial;
mod weights;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use exterior::{
    galpha_norm, laurent_tail, localized_galpha, weighted_exterior_integral, ExteriorGrid, Region,
    Weight,
};
pub use halfplane::halfplane_integral;
pub use kernel::{
    boundary_kernel, kernel_moments, laplace_kernel, ln_boundary_kernel, ln_chord_transform,
    ln_laplace_kernel, KernelMoments,
};
pub use radial::{pbeta_norm, radial_integral, NormEngine};
pub use weights::{k0, p0_weight, p_weight};

/// Tolerances and meshes for every integral in this module.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Interval budget of each adaptive 1D integration.
    pub max_subdiv: usize,
    pub refine_factor: f64,
    /// Angular nodes of the outer integrals over directions.
    pub angular_nodes: usize,
    /// Near/far split of exterior integrals, in units of the circumradius.
    pub split_radius: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            max_subdiv: 2000,
            refine_factor: 2.0,
            angular_nodes: 32,
            split_radius: 4.0,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if !positive(self.rel_tol) || !positive(self.abs_tol) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if !(self.refine_factor > 1.0 && self.refine_factor.is_finite()) {
            return Err(Error::Config("refine_factor must exceed 1".into()));
        }
        if self.max_subdiv < 8 || self.angular_nodes < 4 {
            return Err(Error::Config("max_subdiv ≥ 8 and angular_nodes ≥ 4 are required".into()));
        }
        if !(self.split_radius > 2.0 && self.split_radius.is_finite()) {
            return Err(Error::Config("split_radius must exceed 2".into()));
        }
        Ok(())
    }

    /// One refinement step: tolerances divided and meshes multiplied by the factor.
    pub fn refined(&self) -> Self {
        let f = self.refine_factor;
        Self {
            rel_tol: self.rel_tol / f,
            abs_tol: self.abs_tol / f,
            max_subdiv: (self.max_subdiv as f64 * f).ceil() as usize,
            angular_nodes: (self.angular_nodes as f64 * f).round() as usize,
            ..*self
        }
    }
}

/// A computed integral together with its error estimate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormValue {
    pub value: f64,
    pub error_estimate: f64,
    /// Angular node counts of the fine and coarse evaluations (empty for 1D values).
    pub meshes: Vec<usize>,
}

impl NormValue {
    pub(crate) fn new(value: f64, error_estimate: f64, meshes: Vec<usize>) -> Self {
        Self { value, error_estimate: error_estimate.abs(), meshes }
    }

    pub fn relative_error(&self) -> f64 {
        if self.value == 0.0 {
            self.error_estimate
        } else {
            self.error_estimate / self.value.abs()
        }
    }
}
