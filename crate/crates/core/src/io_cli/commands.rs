//! Command bodies shared by the binary and the integration tests. Each
//! returns its artifact; the binary only handles files and exit codes.

use serde::Serialize;
use serde_json::json;

use super::config::RunConfig;
use super::mapfile::fmt_f64;
use super::units::{parse_tagged, Dimension};
use crate::boussinesq::scaled_strain_vector;
use crate::elastic::contact_modulus;
use crate::error::{invalid, Error, Result};
use crate::forward::{indentation_curve_exact, m3_spherical, stiffness_asymptotic, stiffness_map_forward, StiffnessMap};
use crate::inverse::{extract_inclusion, fit_map, Extraction, FitOptions, FitResult, Known, Normalization};
use crate::polarization::spherical_ks_gs;

/// Process exit status for a failed command.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NotConverged => 3,
        _ => 2,
    }
}

/// Reads a command-line quantity: a bare number is SI, otherwise a unit tag
/// of the given dimension is required.
pub fn parse_cli_quantity(text: &str, dim: Dimension) -> Result<f64> {
    match text.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(_) => Err(Error::Unit { text: text.into(), reason: "value is not finite".into() }),
        Err(_) => parse_tagged(text, dim),
    }
}

pub fn generate(cfg: &RunConfig) -> Result<StiffnessMap> {
    let (grid, setup) = cfg.forward_setup()?;
    stiffness_map_forward(&grid, &setup)
}

pub fn fit(map: &StiffnessMap, opts: &FitOptions) -> Result<FitResult> {
    fit_map(map, None, opts)
}

pub fn extract(fit: &FitResult, cfg: &RunConfig, known: Known, paper_normalization: bool) -> Result<Extraction> {
    let norm = if paper_normalization { Normalization::Paper } else { cfg.normalization() };
    let mut out = extract_inclusion(fit, &cfg.material()?, &cfg.indenter()?, cfg.nu0(), known, norm)?;
    if let (Some(wf), Some(wc)) = (fit.w, cfg.protocol_depth()?) {
        if (wf - wc).abs() > 1e-9 * wf.abs() {
            out.warnings.push(format!(
                "map depth w = {wf:.6e} m differs from the configured {wc:.6e} m; the map value is used"
            ));
        }
    }
    Ok(out)
}

/// Loading curve at one surface point as CSV with columns
/// `w,a,P,S_exact,S0,S_asym`; depths are w_max·k/steps, k = 1..=steps.
pub fn curve(cfg: &RunConfig, w_max: f64, steps: usize, at: Option<[f64; 2]>) -> Result<String> {
    if !(w_max.is_finite() && w_max > 0.0) {
        return Err(invalid("w_max", format!("must be positive, got {w_max}")));
    }
    if steps == 0 {
        return Err(invalid("steps", "must be at least 1"));
    }
    let m = cfg.material()?;
    let ind = cfg.indenter()?;
    let incl = cfg.inclusion()?;
    let [x1, x2] = at.unwrap_or(incl.epicenter);
    let xi = (x1 - incl.epicenter[0]).hypot(x2 - incl.epicenter[1]) / incl.depth;
    let m3 = cfg.g3()? + m3_spherical(&m, &incl, xi)?;
    let theta1 = contact_modulus(&m);
    let mut out = String::from("w,a,P,S_exact,S0,S_asym\n");
    for k in 1..=steps {
        let w = w_max * k as f64 / steps as f64;
        let exact = indentation_curve_exact(w, &ind, theta1, m3)?;
        let asym = stiffness_asymptotic(w, &ind, theta1, m3)?;
        let row = [w, exact.a, exact.force, exact.stiffness, asym.s0, asym.s_eps].map(fmt_f64);
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
struct StrainReport {
    xi: f64,
    nu: f64,
    /// ε̄ in Voigt-like order (11, 22, 33, 23, 13, 12·√2).
    strain: [f64; 6],
}

pub fn oracle_strain(xi: f64, nu: f64) -> Result<serde_json::Value> {
    if !xi.is_finite() {
        return Err(invalid("xi", "must be finite"));
    }
    if !(nu > -1.0 && nu <= 0.5) {
        return Err(invalid("nu", format!("Poisson ratio must lie in (-1, 0.5], got {nu}")));
    }
    let r = StrainReport { xi, nu, strain: *scaled_strain_vector(xi, nu).as_array() };
    Ok(serde_json::to_value(r).expect("plain numbers serialize"))
}

pub fn oracle_ksgs(alpha: f64, nu: f64, nu0: f64) -> Result<serde_json::Value> {
    let c = spherical_ks_gs(alpha, nu, nu0)?;
    Ok(json!({ "alpha": alpha, "nu": nu, "nu0": nu0, "k_s": c.k_s, "g_s": c.g_s }))
}
