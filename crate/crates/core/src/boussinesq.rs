//! Boussinesq point-load field of the elastic half-space `x3 > 0` and the
//! strain it induces at the inclusion site.
//!
//! Indentation point and inclusion are related through the dimensionless
//! lateral offset ξ = (x₁ − x₁⁰)/d, where x₁ is the indentation point and
//! x₁⁰ the epicenter. Seen from the load point, the inclusion center sits at
//! `(−ξd, 0, d)`; with this placement the closed-form strains below agree
//! with differentiation of the displacement field, including the sign of the
//! 1–3 shear.

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};

use crate::elastic::MaterialParams;
use crate::error::{invalid, Error, Result};

/// Strain 6-vector (ε₁₁, ε₂₂, ε₃₃, √2ε₁₂, √2ε₂₃, √2ε₁₃).
///
/// The √2 weights make the Euclidean inner product of two vectors equal the
/// double contraction of the underlying tensors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Strain6(pub [f64; 6]);

impl Strain6 {
    pub const ZERO: Strain6 = Strain6([0.0; 6]);

    /// Packs a symmetric strain tensor.
    pub fn from_tensor(e: &[[f64; 3]; 3]) -> Self {
        Strain6([
            e[0][0],
            e[1][1],
            e[2][2],
            SQRT_2 * e[0][1],
            SQRT_2 * e[1][2],
            SQRT_2 * e[0][2],
        ])
    }

    pub fn trace(&self) -> f64 {
        self.0[0] + self.0[1] + self.0[2]
    }

    pub fn scale(&self, factor: f64) -> Self {
        Strain6(self.0.map(|v| v * factor))
    }

    pub fn as_array(&self) -> &[f64; 6] {
        &self.0
    }
}

/// Inclusion site relative to the indentation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldPoint {
    pub xi: f64,
    pub depth: f64,
}

impl FieldPoint {
    pub fn new(xi: f64, depth: f64) -> Result<Self> {
        if !xi.is_finite() {
            return Err(invalid("xi", "must be finite"));
        }
        if !(depth.is_finite() && depth > 0.0) {
            return Err(invalid("d", format!("depth must be positive, got {depth}")));
        }
        Ok(Self { xi, depth })
    }

    /// Cartesian position of the inclusion center with the load at the origin.
    pub fn position(&self) -> [f64; 3] {
        [-self.xi * self.depth, 0.0, self.depth]
    }
}

/// Displacement T(x) [m/N] of the half-space under a unit normal surface
/// force at the origin.
///
/// The Lamé ratios are written through ν (μ/(λ+μ) = 1 − 2ν,
/// (λ+2μ)/(λ+μ) = 2(1 − ν)), so ν = 0.5 evaluates the incompressible limit.
pub fn boussinesq_displacement(x: [f64; 3], m: &MaterialParams) -> Result<[f64; 3]> {
    if x[2] < 0.0 {
        return Err(Error::OutsideHalfSpace { x3: x[2] });
    }
    let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    if r == 0.0 {
        return Err(Error::SingularPoint);
    }
    let nu = m.poisson();
    let pref = 1.0 / (4.0 * PI * m.shear_modulus());
    let r3 = r * r * r;
    let lateral = |xi: f64| pref * (xi * x[2] / r3 - (1.0 - 2.0 * nu) * xi / (r * (r + x[2])));
    Ok([
        lateral(x[0]),
        lateral(x[1]),
        pref * (x[2] * x[2] / r3 + 2.0 * (1.0 - nu) / r),
    ])
}

/// Dimensionless strain ε̄(ξ, ν) of the Boussinesq field at the inclusion site.
///
/// At ν = 0.5 the reduced incompressible forms are evaluated, including the
/// 2ν/r³ term of ε̄₃ taken at ν = 0.5.
pub fn scaled_strain_vector(xi: f64, nu: f64) -> Strain6 {
    let r2 = xi * xi + 1.0;
    let r = r2.sqrt();
    let r3 = r2 * r;
    let r5 = r3 * r2;
    let e6 = 3.0 * SQRT_2 * xi / r5;
    let e3 = 2.0 * nu / r3 - 3.0 / r5;
    if nu == 0.5 {
        return Strain6([1.0 / r3 - 3.0 * xi * xi / r5, 1.0 / r3, e3, 0.0, 0.0, e6]);
    }
    let c = 1.0 - 2.0 * nu;
    let rp = r + 1.0;
    let e1 = 1.0 / r3 - 3.0 * xi * xi / r5
        + c * (xi * xi / (r2 * rp * rp) - 1.0 / (r * rp) + xi * xi / (r3 * rp));
    let e2 = 1.0 / r3 - c / (r * rp);
    Strain6([e1, e2, e3, 0.0, 0.0, e6])
}

/// Strain per unit indentation force [1/N] at the inclusion site:
/// ε⁰ = ε̄(ξ, ν) / (4πμd²).
pub fn strain_at_inclusion(p: &FieldPoint, m: &MaterialParams) -> Strain6 {
    let mu = m.shear_modulus();
    scaled_strain_vector(p.xi, m.poisson()).scale(1.0 / (4.0 * PI * mu * p.depth * p.depth))
}

/// Displacement gradient ∂T_i/∂x_j by plain central differences with step `h`.
fn central_gradient(x: [f64; 3], m: &MaterialParams, h: f64) -> Result<[[f64; 3]; 3]> {
    let mut grad = [[0.0; 3]; 3];
    for j in 0..3 {
        let mut xp = x;
        let mut xm = x;
        xp[j] += h;
        xm[j] -= h;
        let up = boussinesq_displacement(xp, m)?;
        let um = boussinesq_displacement(xm, m)?;
        for i in 0..3 {
            grad[i][j] = (up[i] - um[i]) / (2.0 * h);
        }
    }
    Ok(grad)
}

fn strain_from_gradient(g: &[[f64; 3]; 3]) -> Strain6 {
    let mut e = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            e[i][j] = 0.5 * (g[i][j] + g[j][i]);
        }
    }
    Strain6::from_tensor(&e)
}

/// Second-order central-difference strain of the Boussinesq field.
pub fn central_difference_strain(x: [f64; 3], m: &MaterialParams, h: f64) -> Result<Strain6> {
    if !(h.is_finite() && h > 0.0) {
        return Err(invalid("h", format!("step must be positive, got {h}")));
    }
    if x[2] - h <= 0.0 {
        return Err(Error::OutsideHalfSpace { x3: x[2] - h });
    }
    Ok(strain_from_gradient(&central_gradient(x, m, h)?))
}

/// Default relative step of [`strain_fd_oracle`].
pub const FD_RELATIVE_STEP: f64 = 1e-6;

/// Finite-difference strain oracle: central differences at `h` and `h/2`
/// combined by one Richardson level. `h` defaults to `1e-6·|x|`.
///
/// Fails with [`Error::StepDegenerate`] when the two levels disagree by more
/// than 1e-4 relative to the largest component.
pub fn strain_fd_oracle(x: [f64; 3], m: &MaterialParams, h: Option<f64>) -> Result<Strain6> {
    let norm = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    if norm == 0.0 {
        return Err(Error::SingularPoint);
    }
    let h = h.unwrap_or(FD_RELATIVE_STEP * norm);
    let coarse = central_difference_strain(x, m, h)?;
    let fine = central_difference_strain(x, m, 0.5 * h)?;
    let scale = fine.0.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let gap = coarse
        .0
        .iter()
        .zip(fine.0.iter())
        .fold(0.0f64, |a, (c, f)| a.max((c - f).abs()));
    if scale > 0.0 && gap / scale > 1e-4 {
        return Err(Error::StepDegenerate { rel: gap / scale });
    }
    let mut out = [0.0; 6];
    for k in 0..6 {
        out[k] = (4.0 * fine.0[k] - coarse.0[k]) / 3.0;
    }
    Ok(Strain6(out))
}
