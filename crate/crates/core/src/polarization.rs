//! Elastic polarization matrix of a small spherical inhomogeneity.

use serde::{Deserialize, Serialize};

use crate::boussinesq::Strain6;
use crate::elastic::{InclusionParams, MaterialParams};
use crate::error::{invalid, Error, Result};

/// Relative size below which a rational denominator counts as a pole.
const POLE_TOLERANCE: f64 = 1e-12;

/// Dimensionless bulk-type and shear-type coefficients (k_s, g_s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsGs {
    pub k_s: f64,
    pub g_s: f64,
}

fn check_matrix_nu(nu: f64) -> Result<()> {
    if nu > -1.0 && nu < 0.5 {
        Ok(())
    } else {
        Err(invalid("nu", format!("must lie in (-1, 0.5), got {nu}")))
    }
}

/// k_s and g_s of a sphere with modulus ratio `alpha` = E₀/E and Poisson
/// ratio `nu0` embedded in a matrix with Poisson ratio `nu`.
pub fn spherical_ks_gs(alpha: f64, nu: f64, nu0: f64) -> Result<KsGs> {
    check_matrix_nu(nu)?;
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(invalid("alpha", format!("must be non-negative, got {alpha}")));
    }
    if !(nu0 > -1.0 && nu0 <= 0.5) {
        return Err(invalid("nu0", format!("must lie in (-1, 0.5], got {nu0}")));
    }
    let c = 1.0 - 2.0 * nu;

    let k_den = alpha * (1.0 + nu) + 2.0 * (1.0 - 2.0 * nu0);
    let k_scale = alpha * (1.0 + nu) + 2.0 * (1.0 - 2.0 * nu0).abs() + 1.0;
    if k_den.abs() < POLE_TOLERANCE * k_scale {
        return Err(Error::PoleProximity { which: "k_s", denominator: k_den });
    }
    let k_s = (1.0 - nu) * (alpha * c + 2.0 * nu0 - 1.0) / (c * c * k_den);

    let g_den = 2.0 * alpha * (1.0 + nu) * (5.0 * nu - 4.0) + (1.0 + nu0) * (5.0 * nu - 7.0);
    let g_scale = (2.0 * alpha * (1.0 + nu) * (5.0 * nu - 4.0)).abs()
        + ((1.0 + nu0) * (5.0 * nu - 7.0)).abs()
        + 1.0;
    if g_den.abs() < POLE_TOLERANCE * g_scale {
        return Err(Error::PoleProximity { which: "g_s", denominator: g_den });
    }
    let g_s = 15.0 * (1.0 - nu) * (1.0 + nu0 - alpha * (1.0 + nu)) / (2.0 * (1.0 + nu) * g_den);

    Ok(KsGs { k_s, g_s })
}

/// Spherical cavity (α = 0).
pub fn cavity_ks_gs(nu: f64) -> Result<KsGs> {
    check_matrix_nu(nu)?;
    let c = 1.0 - 2.0 * nu;
    Ok(KsGs {
        k_s: -(1.0 - nu) / (2.0 * c * c),
        g_s: -15.0 * (1.0 - nu) / (2.0 * (1.0 + nu) * (7.0 - 5.0 * nu)),
    })
}

/// Rigid sphere (α → ∞).
pub fn rigid_ks_gs(nu: f64) -> Result<KsGs> {
    check_matrix_nu(nu)?;
    Ok(KsGs {
        k_s: (1.0 - nu) / ((1.0 + nu) * (1.0 - 2.0 * nu)),
        g_s: 15.0 * (1.0 - nu) / (4.0 * (1.0 + nu) * (4.0 - 5.0 * nu)),
    })
}

/// Dimensionless 6×6 pattern p(k_s, g_s) of the spherical polarization matrix.
pub fn spherical_pattern(c: KsGs) -> [[f64; 6]; 6] {
    let diag = c.k_s + 2.0 / 3.0 * c.g_s;
    let off = c.k_s - c.g_s / 3.0;
    let mut p = [[0.0; 6]; 6];
    for i in 0..3 {
        for j in 0..3 {
            p[i][j] = if i == j { diag } else { off };
        }
        p[i + 3][i + 3] = c.g_s;
    }
    p
}

/// Symmetric 6×6 polarization matrix [N·m] acting on [`Strain6`] vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarizationMatrix {
    entries: [[f64; 6]; 6],
    /// Bulk Young modulus used as scale [Pa].
    young: f64,
    /// Inclusion volume used as scale [m³].
    volume: f64,
}

impl PolarizationMatrix {
    /// Wraps an arbitrary symmetric matrix. Symmetry is checked bit-exactly.
    pub fn from_entries(entries: [[f64; 6]; 6], young: f64, volume: f64) -> Result<Self> {
        for i in 0..6 {
            for j in 0..i {
                if entries[i][j].to_bits() != entries[j][i].to_bits() {
                    return Err(invalid("entries", format!("not symmetric at ({i}, {j})")));
                }
            }
        }
        if entries.iter().flatten().any(|v| !v.is_finite()) {
            return Err(invalid("entries", "non-finite entry"));
        }
        Ok(Self { entries, young, volume })
    }

    /// 𝒫 = E V_ε p(α, ν, ν₀) for a spherical inclusion.
    pub fn spherical(m: &MaterialParams, incl: &InclusionParams) -> Result<Self> {
        let c = spherical_ks_gs(incl.alpha, m.poisson(), incl.nu0)?;
        Ok(Self::from_coefficients(c, m.young(), incl.volume()))
    }

    /// Spherical pattern built from given coefficients, e.g. the cavity or
    /// rigid limits.
    pub fn from_coefficients(c: KsGs, young: f64, volume: f64) -> Self {
        let scale = young * volume;
        let entries = spherical_pattern(c).map(|row| row.map(|v| scale * v));
        Self { entries, young, volume }
    }

    pub fn entries(&self) -> &[[f64; 6]; 6] {
        &self.entries
    }

    pub fn young(&self) -> f64 {
        self.young
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    /// εᵀ𝒫ε.
    pub fn quadratic_form(&self, e: &Strain6) -> f64 {
        let mut acc = 0.0;
        for i in 0..6 {
            let row: f64 = (0..6).map(|j| self.entries[i][j] * e.0[j]).sum();
            acc += e.0[i] * row;
        }
        acc
    }
}
