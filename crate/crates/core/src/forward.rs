//! Compliance perturbation m₃⁰, force–indentation relations and synthetic
//! grid-indentation stiffness maps.
//!
//! m₃⁰ is a compliance [m/N]. The strain fed into the quadratic form carries
//! the Boussinesq prefactor 1/(4πμ), so the spherical closed forms below
//! scale as E V_ε / (16π² μ² d⁴).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::boussinesq::{strain_at_inclusion, FieldPoint, Strain6};
use crate::elastic::{contact_modulus, shape_constants, InclusionParams, IndenterShape, MaterialParams};
use crate::error::{invalid, Error, Result};
use crate::polarization::PolarizationMatrix;
use crate::roots::solve_bracketed;

/// Relative tolerance on the contact radius.
pub const CONTACT_RADIUS_TOL: f64 = 1e-12;

/// |m₃⁰|·S₀·(λ+2)/(λ+1) above which the first-order stiffness is flagged.
pub const FIRST_ORDER_LIMIT: f64 = 0.3;

/// Contact radius to inclusion depth ratio above which the half-space
/// approximation near the indenter is flagged.
pub const CONTACT_DEPTH_LIMIT: f64 = 0.5;

/// m₃⁰ = g₃ − εᵀ𝒫ε for a strain `eps0` per unit indentation force.
pub fn m3_quadratic_form(eps0: &Strain6, p: &PolarizationMatrix, g3: f64) -> f64 {
    g3 - p.quadratic_form(eps0)
}

fn require_incompressible(m: &MaterialParams) -> Result<()> {
    if m.is_incompressible() {
        Ok(())
    } else {
        Err(invalid("nu", format!("closed form needs ν = 0.5, got {}", m.poisson())))
    }
}

fn spherical_prefactor(m: &MaterialParams, incl: &InclusionParams) -> f64 {
    let mu = m.shear_modulus();
    let d2 = incl.depth * incl.depth;
    m.young() * incl.volume() / (16.0 * PI * PI * mu * mu * d2 * d2)
}

/// (15α − 10(1 + ν₀)) / (3(α + 1 + ν₀)): the stiffness-contrast factor of the
/// incompressible closed form. Positive for stiffening inclusions.
pub fn contrast_factor(alpha: f64, nu0: f64) -> f64 {
    (15.0 * alpha - 10.0 * (1.0 + nu0)) / (3.0 * (alpha + 1.0 + nu0))
}

/// Closed-form m₃⁰ for an incompressible half-space (ν = 0.5) obtained by
/// inserting the reduced strains, whose trace vanishes identically, before
/// the limit. This drops the bulk term, so it is the exact limit of
/// [`m3_spherical_general`] only for ν₀ = 0.5; see
/// [`m3_spherical_incompressible_limit`].
pub fn m3_spherical_incompressible(m: &MaterialParams, incl: &InclusionParams, xi: f64) -> Result<f64> {
    require_incompressible(m)?;
    let decay = (xi * xi + 1.0).powi(-3);
    Ok(-spherical_prefactor(m, incl) * contrast_factor(incl.alpha, incl.nu0) * decay)
}

/// Limit ν → 0.5 of [`m3_spherical_general`] for any ν₀.
///
/// k_s grows like (1 − 2ν)⁻² while the dilatation of the Boussinesq strain
/// shrinks like (1 − 2ν), leaving a finite bulk contribution
/// 4(2ν₀ − 1)/(3α + 4 − 8ν₀) on top of [`contrast_factor`].
pub fn m3_spherical_incompressible_limit(m: &MaterialParams, incl: &InclusionParams, xi: f64) -> Result<f64> {
    require_incompressible(m)?;
    let den = 3.0 * incl.alpha + 4.0 - 8.0 * incl.nu0;
    if den.abs() < 1e-12 {
        return Err(Error::PoleProximity { which: "bulk limit", denominator: den });
    }
    let bulk = 4.0 * (2.0 * incl.nu0 - 1.0) / den;
    let decay = (xi * xi + 1.0).powi(-3);
    Ok(-spherical_prefactor(m, incl) * (contrast_factor(incl.alpha, incl.nu0) + bulk) * decay)
}

/// m₃⁰ of a spherical inclusion in a compressible half-space (ν < 0.5),
/// assembled from the Boussinesq strain and the polarization matrix.
pub fn m3_spherical_general(m: &MaterialParams, incl: &InclusionParams, xi: f64) -> Result<f64> {
    if m.poisson() >= 0.5 {
        return Err(invalid("nu", "general path needs ν < 0.5"));
    }
    let eps = strain_at_inclusion(&FieldPoint::new(xi, incl.depth)?, m);
    let p = PolarizationMatrix::spherical(m, incl)?;
    Ok(m3_quadratic_form(&eps, &p, 0.0))
}

/// Inclusion part of m₃⁰ through the path appropriate for the material:
/// the incompressible closed form at ν = 0.5, the general one otherwise.
pub fn m3_spherical(m: &MaterialParams, incl: &InclusionParams, xi: f64) -> Result<f64> {
    if m.is_incompressible() {
        m3_spherical_incompressible(m, incl, xi)
    } else {
        m3_spherical_general(m, incl, xi)
    }
}

/// Point on a force–indentation curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactState {
    /// Indentation depth [m].
    pub w: f64,
    /// Contact radius [m].
    pub a: f64,
    /// Contact force [N].
    pub force: f64,
    /// Incremental stiffness dP/dw [N/m].
    pub stiffness: f64,
}

fn check_theta(theta1: f64) -> Result<()> {
    if theta1.is_finite() && theta1 > 0.0 {
        Ok(())
    } else {
        Err(invalid("theta1", format!("contact modulus must be positive, got {theta1}")))
    }
}

/// Exact solution of the contact relations
/// `w − m₃⁰ P(a) = A N₁ a^λ`, `P(a) = θ₁ A (π/2) N₂ a^{λ+1}` for the contact
/// radius, with stiffness `θ₁a / (1 + m₃⁰θ₁a)`.
///
/// The map a ↦ w is increasing exactly while 1 + m₃⁰θ₁a > 0, which bounds
/// the physical branch when m₃⁰ < 0.
pub fn indentation_curve_exact(w: f64, ind: &IndenterShape, theta1: f64, m3: f64) -> Result<ContactState> {
    if !(w.is_finite() && w >= 0.0) {
        return Err(invalid("w", format!("indentation depth must be non-negative, got {w}")));
    }
    check_theta(theta1)?;
    if !m3.is_finite() {
        return Err(invalid("m3", "must be finite"));
    }
    if w == 0.0 {
        return Ok(ContactState { w, a: 0.0, force: 0.0, stiffness: 0.0 });
    }
    let lam = ind.lambda_exp;
    let amp = ind.amplitude;
    let (n1, n2) = shape_constants(lam)?;
    let force = |a: f64| theta1 * amp * 0.5 * PI * n2 * a.powf(lam + 1.0);
    let residual = |a: f64| amp * n1 * a.powf(lam) + m3 * force(a) - w;

    let a0 = (w / (amp * n1)).powf(1.0 / lam);
    let mut hi = 10.0 * a0;
    if m3 < 0.0 {
        let a_crit = -1.0 / (m3 * theta1);
        if residual(hi) < 0.0 || hi >= a_crit {
            hi = a_crit * (1.0 - 1e-12);
            if residual(hi) < 0.0 {
                return Err(Error::NoContactRoot { w, w_max: w + residual(hi) });
            }
        }
    }
    let a = solve_bracketed(residual, 0.0, hi, CONTACT_RADIUS_TOL, 400)?;
    let den = 1.0 + m3 * theta1 * a;
    if den <= 0.0 {
        return Err(Error::NoContactRoot { w, w_max: f64::NAN });
    }
    Ok(ContactState { w, a, force: force(a), stiffness: theta1 * a / den })
}

/// First-order stiffness at fixed depth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticStiffness {
    /// Stiffness with the inclusion, S_ε [N/m].
    pub s_eps: f64,
    /// Bulk stiffness S₀ [N/m].
    pub s0: f64,
    /// m₃⁰ S₀ (λ+2)/(λ+1), the relative stiffness drop.
    pub perturbation: f64,
}

impl AsymptoticStiffness {
    pub fn is_first_order_valid(&self) -> bool {
        self.perturbation.abs() <= FIRST_ORDER_LIMIT
    }
}

/// Bulk indentation stiffness S₀ = θ₁ (w / (A N₁))^{1/λ}.
pub fn bulk_stiffness(w: f64, ind: &IndenterShape, theta1: f64) -> Result<f64> {
    if !(w.is_finite() && w > 0.0) {
        return Err(invalid("w", format!("indentation depth must be positive, got {w}")));
    }
    check_theta(theta1)?;
    let (n1, _) = shape_constants(ind.lambda_exp)?;
    Ok(theta1 * (w / (ind.amplitude * n1)).powf(1.0 / ind.lambda_exp))
}

/// S_ε = S₀ (1 − m₃⁰ S₀ (λ+2)/(λ+1)).
pub fn stiffness_asymptotic(w: f64, ind: &IndenterShape, theta1: f64, m3: f64) -> Result<AsymptoticStiffness> {
    let s0 = bulk_stiffness(w, ind, theta1)?;
    let lam = ind.lambda_exp;
    let perturbation = m3 * s0 * (lam + 2.0) / (lam + 1.0);
    Ok(AsymptoticStiffness { s_eps: s0 * (1.0 - perturbation), s0, perturbation })
}

/// Regular lateral grid of indentation points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Number of points along x₁ and x₂.
    pub counts: [usize; 2],
    /// Side lengths along x₁ and x₂ [m].
    pub extent: [f64; 2],
    pub center: [f64; 2],
}

impl GridSpec {
    /// 21×21 points over 6d×6d.
    pub fn default_for_depth(depth: f64, center: [f64; 2]) -> Self {
        Self { counts: [21, 21], extent: [6.0 * depth, 6.0 * depth], center }
    }

    pub fn validate(&self) -> Result<()> {
        for k in 0..2 {
            if self.counts[k] == 0 {
                return Err(invalid("counts", "grid needs at least one point per axis"));
            }
            if !(self.extent[k].is_finite() && self.extent[k] >= 0.0) {
                return Err(invalid("extent", "must be finite and non-negative"));
            }
            if self.counts[k] > 1 && self.extent[k] == 0.0 {
                return Err(invalid("extent", "zero extent with several points duplicates grid nodes"));
            }
            if !self.center[k].is_finite() {
                return Err(invalid("center", "must be finite"));
            }
        }
        Ok(())
    }

    fn axis(&self, k: usize) -> Vec<f64> {
        let n = self.counts[k];
        if n == 1 {
            return vec![self.center[k]];
        }
        let start = self.center[k] - 0.5 * self.extent[k];
        let step = self.extent[k] / (n - 1) as f64;
        (0..n).map(|i| start + step * i as f64).collect()
    }

    /// Grid nodes, x₁ varying fastest.
    pub fn points(&self) -> Vec<[f64; 2]> {
        let xs = self.axis(0);
        let ys = self.axis(1);
        ys.iter().flat_map(|&y| xs.iter().map(move |&x| [x, y])).collect()
    }
}

/// Multiplicative Gaussian noise S(1 + σζ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub sigma: f64,
    pub seed: u64,
}

impl NoiseSpec {
    /// Standard normal draw for point `index`. The stream is keyed by
    /// (seed, index), so the value does not depend on evaluation order.
    pub fn draw(&self, index: usize) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        StandardNormal.sample(&mut rng)
    }
}

/// One grid-indentation sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapPoint {
    pub x1: f64,
    pub x2: f64,
    /// Indentation stiffness [N/m].
    pub s: f64,
}

/// Provenance of a stiffness map. Every field is optional on load since
/// maps may come from instruments rather than this generator.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MapMetadata {
    /// Indentation depth shared by all points [m].
    pub w: Option<f64>,
    pub units: String,
    pub material: Option<MaterialParams>,
    pub indenter: Option<IndenterShape>,
    pub inclusion: Option<InclusionParams>,
    pub grid: Option<GridSpec>,
    pub g3: Option<f64>,
    pub noise: Option<NoiseSpec>,
    pub generator: Option<String>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

/// Indentation stiffness samples over the surface.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StiffnessMap {
    pub points: Vec<MapPoint>,
    /// `None` when the map was loaded without its metadata sidecar.
    pub meta: Option<MapMetadata>,
}

impl StiffnessMap {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn depth(&self) -> Option<f64> {
        self.meta.as_ref().and_then(|m| m.w)
    }
}

/// Everything that defines a synthetic map apart from the sampling points.
#[derive(Debug, Clone, Copy)]
pub struct ForwardSetup {
    pub material: MaterialParams,
    pub inclusion: InclusionParams,
    pub indenter: IndenterShape,
    /// Indentation depth [m].
    pub w: f64,
    /// Regular part of the body's Green function at the load point [m/N].
    pub g3: f64,
    pub noise: Option<NoiseSpec>,
}

fn setup_warnings(setup: &ForwardSetup, theta1: f64) -> Result<Vec<String>> {
    let mut warnings = Vec::new();
    let incl = &setup.inclusion;
    if !incl.is_small() {
        warnings.push(format!(
            "inclusion size ratio r/d = {:.3} exceeds {} (small-inclusion model)",
            incl.size_ratio(),
            crate::elastic::SMALLNESS_LIMIT
        ));
    }
    let a0 = bulk_stiffness(setup.w, &setup.indenter, theta1)? / theta1;
    if a0 > CONTACT_DEPTH_LIMIT * incl.depth {
        warnings.push(format!(
            "contact radius a = {:.3e} m is not small against depth d = {:.3e} m",
            a0, incl.depth
        ));
    }
    Ok(warnings)
}

/// Stiffness at arbitrary surface points. Returns the samples and any
/// validity warnings.
pub fn stiffness_at_points(points: &[[f64; 2]], setup: &ForwardSetup) -> Result<(Vec<MapPoint>, Vec<String>)> {
    if !(setup.g3.is_finite()) {
        return Err(invalid("g3", "must be finite"));
    }
    if let Some(n) = setup.noise {
        if !(n.sigma.is_finite() && n.sigma >= 0.0) {
            return Err(invalid("sigma", format!("noise level must be non-negative, got {}", n.sigma)));
        }
    }
    let theta1 = contact_modulus(&setup.material);
    let mut warnings = setup_warnings(setup, theta1)?;
    let incl = setup.inclusion;
    let samples: Vec<Result<(MapPoint, bool)>> = points
        .par_iter()
        .enumerate()
        .map(|(index, &[x1, x2])| {
            let rho = (x1 - incl.epicenter[0]).hypot(x2 - incl.epicenter[1]);
            let m3 = setup.g3 + m3_spherical(&setup.material, &incl, rho / incl.depth)?;
            let st = stiffness_asymptotic(setup.w, &setup.indenter, theta1, m3)?;
            let mut s = st.s_eps;
            if let Some(noise) = setup.noise {
                s *= 1.0 + noise.sigma * noise.draw(index);
            }
            if !(s > 0.0) {
                return Err(Error::NonPositiveStiffness { index, value: s });
            }
            Ok((MapPoint { x1, x2, s }, st.is_first_order_valid()))
        })
        .collect();
    let mut out = Vec::with_capacity(points.len());
    let mut invalid_first_order = 0usize;
    for r in samples {
        let (p, ok) = r?;
        if !ok {
            invalid_first_order += 1;
        }
        out.push(p);
    }
    if invalid_first_order > 0 {
        warnings.push(format!(
            "{invalid_first_order} point(s) exceed the first-order perturbation limit {FIRST_ORDER_LIMIT}"
        ));
    }
    Ok((out, warnings))
}

/// Synthetic grid-indentation map at fixed depth `setup.w`.
pub fn stiffness_map_forward(grid: &GridSpec, setup: &ForwardSetup) -> Result<StiffnessMap> {
    grid.validate()?;
    let (points, warnings) = stiffness_at_points(&grid.points(), setup)?;
    let meta = MapMetadata {
        w: Some(setup.w),
        units: "SI".into(),
        material: Some(setup.material),
        indenter: Some(setup.indenter),
        inclusion: Some(setup.inclusion),
        grid: Some(*grid),
        g3: Some(setup.g3),
        noise: setup.noise,
        generator: Some(concat!("indentomo ", env!("CARGO_PKG_VERSION")).into()),
        warnings,
    };
    Ok(StiffnessMap { points, meta: Some(meta) })
}
