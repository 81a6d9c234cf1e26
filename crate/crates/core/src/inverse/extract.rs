use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::FitResult;
use crate::elastic::{contact_modulus, IndenterShape, MaterialParams};
use crate::error::{invalid, Error, Result};
use crate::forward::{bulk_stiffness, contrast_factor};

/// Modulus ratio above which the inversion is poorly conditioned.
pub const RIGID_REGIME_ALPHA: f64 = 100.0;

/// Relative mismatch between the fitted S₀ and the bulk prediction at the
/// recorded depth that triggers a warning.
const BULK_MISMATCH_WARN: f64 = 0.05;

/// The inclusion parameter supplied by the user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Known {
    /// Inclusion volume V_ε [m³].
    Volume(f64),
    /// Modulus ratio α = E₀/E.
    Alpha(f64),
}

/// How C₀ is converted back to inclusion parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    /// Compliance-consistent form matching the forward model:
    /// Q′V = (λ+1)/(λ+2) · 16π²μ² C₀ / (E S₀² d²).
    Repaired,
    /// Alternative form without the compliance factor:
    /// Q′V = (λ+1)/(λ+2) · C₀ / (E S₀² d⁴). Kept for side-by-side reporting.
    Paper,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extraction {
    pub alpha: f64,
    /// V_ε [m³].
    pub volume: f64,
    /// Radius of the sphere with volume V_ε [m].
    pub radius: f64,
    /// q = (15α − 10(1+ν₀))/(α + 1 + ν₀); feasible on (−10, 15).
    pub q: f64,
    pub nu0: f64,
    pub normalization: Normalization,
    /// Bulk stiffness predicted from E, ν, the indenter and the depth [N/m].
    pub s0_predicted: f64,
    pub warnings: Vec<String>,
}

/// α as a function of q; strictly increasing on (−10, 15).
pub(crate) fn alpha_from_q(q: f64, nu0: f64) -> Result<f64> {
    if !(q > -10.0 && q < 15.0) {
        return Err(Error::InfeasibleRatio { q });
    }
    Ok((1.0 + nu0) * (q + 10.0) / (15.0 - q))
}

/// Solves the fitted-anomaly relation for α given V_ε, or V_ε given α.
///
/// Requires a converged fit that carries the indentation depth of its map.
pub fn extract_inclusion(
    fit: &FitResult,
    m: &MaterialParams,
    ind: &IndenterShape,
    nu0: f64,
    known: Known,
    normalization: Normalization,
) -> Result<Extraction> {
    if !fit.converged {
        return Err(Error::NotConverged);
    }
    let w = fit.w.ok_or(Error::MissingDepth)?;
    fit.params.validate()?;
    if !(nu0 > -1.0 && nu0 <= 0.5) {
        return Err(invalid("nu0", format!("must lie in (-1, 0.5], got {nu0}")));
    }
    let p = &fit.params;
    let lam = ind.lambda_exp;
    let shape = (lam + 1.0) / (lam + 2.0);
    // Q′·V_ε with Q′ = q/3
    let q_volume = match normalization {
        Normalization::Repaired => {
            let mu = m.shear_modulus();
            shape * 16.0 * PI * PI * mu * mu * p.c0 / (m.young() * p.s0 * p.s0 * p.d * p.d)
        }
        Normalization::Paper => shape * p.c0 / (m.young() * p.s0 * p.s0 * p.d.powi(4)),
    };

    let mut warnings = vec!["inversion is defined for -10 < q < 15".to_string()];
    let (alpha, volume, q) = match known {
        Known::Volume(v) => {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid("volume", format!("must be positive, got {v}")));
            }
            let q = 3.0 * q_volume / v;
            (alpha_from_q(q, nu0)?, v, q)
        }
        Known::Alpha(a) => {
            if !(a.is_finite() && a >= 0.0) {
                return Err(invalid("alpha", format!("must be non-negative, got {a}")));
            }
            let q = 3.0 * contrast_factor(a, nu0);
            if q == 0.0 {
                return Err(invalid("alpha", "α = (2/3)(1 + ν₀) leaves the volume undetermined"));
            }
            let v = 3.0 * q_volume / q;
            if !(v > 0.0) {
                return Err(invalid(
                    "alpha",
                    "sign of the fitted anomaly contradicts the given modulus ratio",
                ));
            }
            (a, v, q)
        }
    };
    if alpha > RIGID_REGIME_ALPHA {
        warnings.push(format!(
            "rigid-limit regime (α = {alpha:.3e} > {RIGID_REGIME_ALPHA}): ratio is poorly determined, cross-check with the rigid-sphere model"
        ));
    }
    let s0_predicted = bulk_stiffness(w, ind, contact_modulus(m))?;
    let mismatch = (p.s0 - s0_predicted).abs() / s0_predicted;
    if mismatch > BULK_MISMATCH_WARN {
        warnings.push(format!(
            "fitted S0 differs from the bulk prediction at w = {w:.3e} m by {:.1}%",
            100.0 * mismatch
        ));
    }
    Ok(Extraction {
        alpha,
        volume,
        radius: (3.0 * volume / (4.0 * PI)).cbrt(),
        q,
        nu0,
        normalization,
        s0_predicted,
        warnings,
    })
}
