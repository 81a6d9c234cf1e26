//! Bulk material, indenter and inclusion parameterizations together with the
//! closed-form contact constants shared by the forward and inverse models.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::special::gamma;

/// Largest shape exponent accepted by [`shape_constants`].
pub const MAX_SHAPE_EXPONENT: f64 = 50.0;

/// Inclusion size to depth ratio above which the small-inclusion model is
/// flagged as questionable.
pub const SMALLNESS_LIMIT: f64 = 0.3;

/// Isotropic elastic constants of the bulk material.
///
/// `nu = 0.5` is admitted; routines that need a finite Lamé λ reject it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    young: f64,
    poisson: f64,
}

impl MaterialParams {
    pub fn new(young: f64, poisson: f64) -> Result<Self> {
        if !(young.is_finite() && young > 0.0) {
            return Err(invalid("E", format!("Young modulus must be positive, got {young}")));
        }
        if !(poisson > -1.0 && poisson <= 0.5) {
            return Err(invalid("nu", format!("Poisson ratio must lie in (-1, 0.5], got {poisson}")));
        }
        Ok(Self { young, poisson })
    }

    pub fn young(&self) -> f64 {
        self.young
    }

    pub fn poisson(&self) -> f64 {
        self.poisson
    }

    pub fn is_incompressible(&self) -> bool {
        self.poisson == 0.5
    }

    /// Shear modulus μ = E / (2(1 + ν)); finite for every admissible ν.
    pub fn shear_modulus(&self) -> f64 {
        self.young / (2.0 * (1.0 + self.poisson))
    }
}

/// Axisymmetric power-law indenter Φ(ρ) = A ρ^λ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndenterShape {
    pub lambda_exp: f64,
    pub amplitude: f64,
}

impl IndenterShape {
    pub fn new(lambda_exp: f64, amplitude: f64) -> Result<Self> {
        if !(lambda_exp.is_finite() && lambda_exp > 0.0) {
            return Err(invalid("lambda_exp", format!("must be positive and finite, got {lambda_exp}")));
        }
        if !(amplitude.is_finite() && amplitude > 0.0) {
            return Err(invalid("A", format!("must be positive and finite, got {amplitude}")));
        }
        Ok(Self { lambda_exp, amplitude })
    }

    /// Paraboloid approximation of a sphere of radius `radius`: λ = 2, A = 1/(2R).
    pub fn spherical(radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(invalid("radius", format!("must be positive, got {radius}")));
        }
        Self::new(2.0, 0.5 / radius)
    }

    /// Cone with the given half-angle (radians): λ = 1, A = cot(half_angle).
    pub fn conical(half_angle: f64) -> Result<Self> {
        if !(half_angle > 0.0 && half_angle < 0.5 * PI) {
            return Err(invalid("half_angle", format!("must lie in (0, π/2), got {half_angle}")));
        }
        Self::new(1.0, 1.0 / half_angle.tan())
    }
}

/// Spherical inhomogeneity buried below the surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InclusionParams {
    /// Depth of the center below the surface [m].
    pub depth: f64,
    /// Epicenter (x₁⁰, x₂⁰) [m].
    pub epicenter: [f64; 2],
    pub radius: f64,
    /// Young modulus ratio E₀/E.
    pub alpha: f64,
    pub nu0: f64,
}

impl InclusionParams {
    pub fn new(depth: f64, epicenter: [f64; 2], radius: f64, alpha: f64, nu0: f64) -> Result<Self> {
        if !(depth.is_finite() && depth > 0.0) {
            return Err(invalid("d", format!("depth must be positive, got {depth}")));
        }
        if !epicenter.iter().all(|c| c.is_finite()) {
            return Err(invalid("x0", "epicenter must be finite"));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(invalid("r_eps", format!("radius must be positive, got {radius}")));
        }
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(invalid("alpha", format!("modulus ratio must be non-negative, got {alpha}")));
        }
        if !(nu0 > -1.0 && nu0 <= 0.5) {
            return Err(invalid("nu0", format!("must lie in (-1, 0.5], got {nu0}")));
        }
        Ok(Self { depth, epicenter, radius, alpha, nu0 })
    }

    pub fn volume(&self) -> f64 {
        4.0 * PI / 3.0 * self.radius.powi(3)
    }

    /// r_ε / d, the asymptotic smallness parameter.
    pub fn size_ratio(&self) -> f64 {
        self.radius / self.depth
    }

    pub fn is_small(&self) -> bool {
        self.size_ratio() <= SMALLNESS_LIMIT
    }
}

/// θ₁ = 2E / (1 − ν²).
pub fn contact_modulus(m: &MaterialParams) -> f64 {
    2.0 * m.young / (1.0 - m.poisson * m.poisson)
}

/// Lamé constants (λ, μ). Fails at ν = 0.5 where λ is unbounded.
pub fn lame_constants(m: &MaterialParams) -> Result<(f64, f64)> {
    if m.poisson >= 0.5 {
        return Err(Error::IncompressibleSingular);
    }
    let nu = m.poisson;
    let mu = m.young / (2.0 * (1.0 + nu));
    let lambda = m.young * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
    Ok((lambda, mu))
}

/// Shape constants (N₁(λ), N₂(λ)) of the power-law indenter.
///
/// Valid for 0 < λ ≤ [`MAX_SHAPE_EXPONENT`].
pub fn shape_constants(lambda_exp: f64) -> Result<(f64, f64)> {
    if !(lambda_exp > 0.0 && lambda_exp <= MAX_SHAPE_EXPONENT) {
        return Err(invalid(
            "lambda_exp",
            format!("shape exponent must lie in (0, {MAX_SHAPE_EXPONENT}], got {lambda_exp}"),
        ));
    }
    let l = lambda_exp;
    let g_half = gamma(0.5 * l);
    let ratio = g_half * g_half / gamma(l);
    let n1 = 2f64.powf(l - 2.0) * l * ratio;
    let n2 = 2f64.powf(l - 1.0) * l * l / (PI * (l + 1.0)) * ratio;
    Ok((n1, n2))
}
