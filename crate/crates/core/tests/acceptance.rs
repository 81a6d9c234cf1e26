//! Acceptance suite. Runs without the libtest harness so every criterion
//! prints its own PASS/FAIL line; exits non-zero if any criterion fails.
//!
//!     cargo test -p indentomo --test acceptance

use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use nalgebra::{SMatrix, SymmetricEigen};

use indentomo::boussinesq::{strain_at_inclusion, strain_fd_oracle, FieldPoint};
use indentomo::elastic::{contact_modulus, IndenterShape, InclusionParams, MaterialParams};
use indentomo::forward::{
    bulk_stiffness, indentation_curve_exact, m3_quadratic_form, m3_spherical, m3_spherical_general,
    m3_spherical_incompressible, stiffness_asymptotic, stiffness_map_forward, ForwardSetup, GridSpec, NoiseSpec,
};
use indentomo::inverse::{extract_inclusion, fit_map, FitOptions, Known, ModelParams5, Normalization};
use indentomo::polarization::{cavity_ks_gs, rigid_ks_gs, spherical_ks_gs, PolarizationMatrix};

type Outcome = Result<String, String>;

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn check(ok: bool, pass: String, fail: String) -> Outcome {
    if ok {
        Ok(pass)
    } else {
        Err(fail)
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Least-squares slope of log y against log x.
fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn strain_oracle_equivalence() -> Outcome {
    let d = 5e-6;
    let mut worst = 0.0f64;
    for nu in [0.0, 0.3, 0.49] {
        let m = MaterialParams::new(1e4, nu).unwrap();
        for xi in [0.0, 0.5, 1.0, 2.0] {
            let p = FieldPoint::new(xi, d).unwrap();
            let closed = strain_at_inclusion(&p, &m);
            let fd = strain_fd_oracle(p.position(), &m, None).map_err(|e| e.to_string())?;
            let scale = closed.0.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let gap = closed.0.iter().zip(fd.0.iter()).fold(0.0f64, |a, (c, f)| a.max((c - f).abs()));
            worst = worst.max(gap / scale);
        }
    }
    check(worst < 1e-6, format!("max relative error {worst:.2e} < 1e-6"), format!("max relative error {worst:.2e} ≥ 1e-6"))
}

fn hertz_sneddon_reduction() -> Outcome {
    let mut worst = 0.0f64;
    for nu in [0.0, 0.3, 0.5] {
        let m = MaterialParams::new(2.5e4, nu).unwrap();
        let theta1 = contact_modulus(&m);
        let radius = 7e-6;
        let sphere = IndenterShape::spherical(radius).unwrap();
        let cone = IndenterShape::conical(70f64.to_radians()).unwrap();
        for w in [1e-9, 3e-8, 2e-7, 1e-6] {
            let s = indentation_curve_exact(w, &sphere, theta1, 0.0).unwrap();
            let hertz = 4.0 / 3.0 * m.young() / (1.0 - nu * nu) * radius.sqrt() * w.powf(1.5);
            worst = worst.max(rel(s.force, hertz));
            let c = indentation_curve_exact(w, &cone, theta1, 0.0).unwrap();
            worst = worst.max(rel(0.5 * PI * cone.amplitude * c.a, w));
        }
    }
    check(worst < 1e-10, format!("max relative error {worst:.2e} < 1e-10"), format!("max relative error {worst:.2e} ≥ 1e-10"))
}

fn polarization_limits() -> Outcome {
    let mut worst = 0.0f64;
    for nu in [0.0, 0.3, 0.45] {
        let soft = spherical_ks_gs(1e-10, nu, nu).unwrap();
        let cavity = cavity_ks_gs(nu).unwrap();
        let hard = spherical_ks_gs(1e10, nu, nu).unwrap();
        let rigid = rigid_ks_gs(nu).unwrap();
        for (a, b) in [(soft.k_s, cavity.k_s), (soft.g_s, cavity.g_s), (hard.k_s, rigid.k_s), (hard.g_s, rigid.g_s)] {
            worst = worst.max(rel(a, b));
        }
    }
    check(worst < 1e-6, format!("max relative error {worst:.2e} < 1e-6"), format!("max relative error {worst:.2e} ≥ 1e-6"))
}

fn matched_inclusion_invisibility() -> Outcome {
    let g3 = 3.7e-4;
    let mut cases = 0;
    for nu in [0.0, 0.3, 0.45, 0.5] {
        let m = MaterialParams::new(1e4, nu).unwrap();
        let incl = InclusionParams::new(5e-6, [0.0, 0.0], 1e-6, 1.0, nu).unwrap();
        // the polarization matrix itself is unbounded at ν = 0.5; only the
        // reduced closed form exists there
        let pol = (nu < 0.5).then(|| PolarizationMatrix::spherical(&m, &incl).unwrap());
        for xi in [0.0, 0.5, 1.0, 2.0, 5.0] {
            let eps = strain_at_inclusion(&FieldPoint::new(xi, incl.depth).unwrap(), &m);
            let via_form = pol.as_ref().map_or(g3, |p| m3_quadratic_form(&eps, p, g3));
            let via_closed = g3 + m3_spherical(&m, &incl, xi).unwrap();
            if via_form != g3 || via_closed != g3 {
                return Err(format!("ν = {nu}, ξ = {xi}: m3 = {via_form:e} / {via_closed:e}, g3 = {g3:e}"));
            }
            cases += 1;
        }
    }
    Ok(format!("m3 == g3 bit-exactly in {cases} cases"))
}

fn incompressible_limit_consistency() -> Outcome {
    let mut report = Vec::new();
    for alpha in [0.2, 3.0, 40.0] {
        for xi in [0.0, 0.7, 2.0] {
            let incl = InclusionParams::new(5e-6, [0.0, 0.0], 1e-6, alpha, 0.5).unwrap();
            let reference = m3_spherical_incompressible(&MaterialParams::new(1e4, 0.5).unwrap(), &incl, xi).unwrap();
            let errs: Vec<f64> = (2..=4)
                .map(|k| {
                    let m = MaterialParams::new(1e4, 0.5 - 10f64.powi(-k)).unwrap();
                    rel(m3_spherical_general(&m, &incl, xi).unwrap(), reference)
                })
                .collect();
            let monotone = errs.windows(2).all(|w| w[1] < w[0]);
            if !monotone || errs[2] >= 1e-2 {
                return Err(format!("α = {alpha}, ξ = {xi}: errors {errs:?}"));
            }
            report.push(errs[2]);
        }
    }
    let worst = report.iter().fold(0.0f64, |a, &b| a.max(b));
    Ok(format!("monotone in k = 2..4; worst error at k = 4: {worst:.2e} < 1e-2"))
}

fn asymptotic_order() -> Outcome {
    let m = MaterialParams::new(1e4, 0.5).unwrap();
    let theta1 = contact_modulus(&m);
    let w = 3e-7;
    let mut slopes = Vec::new();
    for ind in [
        IndenterShape::conical(70f64.to_radians()).unwrap(),
        IndenterShape::spherical(5e-6).unwrap(),
        IndenterShape::new(3.0, 2e9).unwrap(),
    ] {
        let s0 = bulk_stiffness(w, &ind, theta1).unwrap();
        for sign in [1.0, -1.0] {
            let xs: Vec<f64> = (0..=12).map(|k| 1e-4 * 10f64.powf(k as f64 / 4.0)).collect();
            let ys: Vec<f64> = xs
                .iter()
                .map(|&x| {
                    let m3 = sign * x / s0;
                    let exact = indentation_curve_exact(w, &ind, theta1, m3).unwrap().stiffness;
                    let asym = stiffness_asymptotic(w, &ind, theta1, m3).unwrap().s_eps;
                    (exact - asym).abs() / s0
                })
                .collect();
            slopes.push(loglog_slope(&xs, &ys));
        }
    }
    let lo = slopes.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    check(
        lo >= 1.9,
        format!("smallest fitted slope {lo:.4} ≥ 1.9 over λ ∈ {{1, 2, 3}}, both signs"),
        format!("fitted slopes {slopes:.3?}; minimum {lo:.4} < 1.9"),
    )
}

fn definiteness() -> Outcome {
    for nu in [0.0, 0.3, 0.45] {
        let m = MaterialParams::new(1e4, nu).unwrap();
        for (alpha, positive) in [(2.0, true), (10.0, true), (0.1, false), (0.5, false)] {
            let incl = InclusionParams::new(5e-6, [0.0, 0.0], 1e-6, alpha, nu).unwrap();
            let e = PolarizationMatrix::spherical(&m, &incl).unwrap();
            let mat = SMatrix::<f64, 6, 6>::from_fn(|i, j| e.entries()[i][j]);
            let eig = SymmetricEigen::new(mat).eigenvalues;
            let ok = if positive { eig.iter().all(|&v| v > 0.0) } else { eig.iter().all(|&v| v < 0.0) };
            if !ok {
                return Err(format!("ν = ν₀ = {nu}, α = {alpha}: eigenvalues {:?}", eig.as_slice()));
            }
        }
    }
    Ok("sign-definite in all 12 cases".into())
}

/// Stiff inclusion under a spherical tip; ν = 0.5 so the map is exactly
/// the five-parameter model.
fn round_trip_setup(noise: Option<NoiseSpec>, alpha: f64, radius: f64) -> ForwardSetup {
    ForwardSetup {
        material: MaterialParams::new(1e4, 0.5).unwrap(),
        inclusion: InclusionParams::new(5e-6, [1.3e-6, -0.7e-6], radius, alpha, 0.5).unwrap(),
        indenter: IndenterShape::spherical(10e-6).unwrap(),
        w: 4e-7,
        g3: 0.0,
        noise,
    }
}

fn model_truth(s: &ForwardSetup) -> ModelParams5 {
    let theta1 = contact_modulus(&s.material);
    let s0 = bulk_stiffness(s.w, &s.indenter, theta1).unwrap();
    let lam = s.indenter.lambda_exp;
    let m3_peak = m3_spherical(&s.material, &s.inclusion, 0.0).unwrap();
    let d = s.inclusion.depth;
    ModelParams5 {
        s0,
        c0: -m3_peak * s0 * s0 * (lam + 2.0) / (lam + 1.0) * d.powi(6),
        d,
        x10: s.inclusion.epicenter[0],
        x20: s.inclusion.epicenter[1],
    }
}

fn noiseless_round_trip() -> Outcome {
    let setup = round_trip_setup(None, 8.0, 1.2e-6);
    let grid = GridSpec::default_for_depth(setup.inclusion.depth, [0.0, 0.0]);
    let map = stiffness_map_forward(&grid, &setup).map_err(|e| e.to_string())?;
    let fit = fit_map(&map, None, &FitOptions::default()).map_err(|e| e.to_string())?;
    if !fit.converged {
        return Err("fit did not converge".into());
    }
    let truth = model_truth(&setup);
    let names = ["s0", "c0", "d", "x10", "x20"];
    let got = fit.params.as_array();
    let want = truth.as_array();
    let errs: Vec<f64> = (0..5).map(|k| rel(got[k], want[k])).collect();
    let worst = errs.iter().fold(0.0f64, |a, &b| a.max(b));
    if worst >= 1e-6 {
        let k = errs.iter().position(|&e| e == worst).unwrap();
        return Err(format!("{} off by {worst:.2e} relative", names[k]));
    }
    let ex = extract_inclusion(
        &fit,
        &setup.material,
        &setup.indenter,
        setup.inclusion.nu0,
        Known::Volume(setup.inclusion.volume()),
        Normalization::Repaired,
    )
    .map_err(|e| e.to_string())?;
    let alpha_err = rel(ex.alpha, setup.inclusion.alpha);
    check(
        alpha_err < 1e-4,
        format!("parameters within {worst:.2e}, α within {alpha_err:.2e}"),
        format!("parameters within {worst:.2e}, but α off by {alpha_err:.2e}"),
    )
}

struct NoisyStudy {
    median_depth_err: f64,
    median_epicenter_err: f64,
    spacing: f64,
    failures: usize,
}

fn noisy_study(grid: &GridSpec, seeds: u64) -> NoisyStudy {
    let mut depth_errs = Vec::new();
    let mut epi_errs = Vec::new();
    let mut failures = 0;
    for seed in 0..seeds {
        let setup = round_trip_setup(Some(NoiseSpec { sigma: 0.01, seed }), 50.0, 1.45e-6);
        let map = stiffness_map_forward(grid, &setup).expect("valid setup");
        match fit_map(&map, None, &FitOptions::default()) {
            Ok(fit) if fit.converged => {
                let p = fit.params;
                depth_errs.push(rel(p.d, setup.inclusion.depth));
                epi_errs.push((p.x10 - setup.inclusion.epicenter[0]).hypot(p.x20 - setup.inclusion.epicenter[1]));
            }
            _ => {
                // a failed fit counts as an unbounded miss
                failures += 1;
                depth_errs.push(f64::INFINITY);
                epi_errs.push(f64::INFINITY);
            }
        }
    }
    NoisyStudy {
        median_depth_err: median(depth_errs),
        median_epicenter_err: median(epi_errs),
        spacing: grid.extent[0] / (grid.counts[0] - 1) as f64,
        failures,
    }
}

fn noisy_robustness() -> Outcome {
    let d = 5e-6;
    let grid = GridSpec { counts: [41, 41], extent: [4.0 * d, 4.0 * d], center: [0.0, 0.0] };
    let s = noisy_study(&grid, 50);
    let coarse = noisy_study(&GridSpec::default_for_depth(d, [0.0, 0.0]), 50);
    println!(
        "      info: default 21×21 / 6d grid, same inclusion: median depth error {:.2}%, median epicenter error {:.3} spacings",
        100.0 * coarse.median_depth_err,
        coarse.median_epicenter_err / coarse.spacing
    );
    let summary = format!(
        "41×41 / 4d grid, 50 seeds: median depth error {:.2}% (< 5%), median epicenter error {:.3} spacings (< 1), {} failed fits",
        100.0 * s.median_depth_err,
        s.median_epicenter_err / s.spacing,
        s.failures
    );
    check(s.median_depth_err < 0.05 && s.median_epicenter_err < s.spacing, summary.clone(), summary)
}

fn run_cli(args: &[&str], dir: &Path, threads: Option<&str>) -> Result<(), String> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_indentomo"));
    if let Some(n) = threads {
        cmd.env("RAYON_NUM_THREADS", n);
    }
    let out = cmd
        .args(args)
        .current_dir(dir)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("`{}` failed: {}", args.join(" "), String::from_utf8_lossy(&out.stderr)))
    }
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = r#"{
  "material": {"E": "10 kPa", "nu": 0.5},
  "inclusion": {"d": "5 um", "x0": ["1.3 um", "-0.7 um"], "r_eps": "1.45 um", "alpha": 50, "nu0": 0.5},
  "indenter": {"radius": "10 um"},
  "protocol": {"w": "400 nm", "noise_sigma": 0.01, "seed": 20240607}
}
"#;
    std::fs::write(dir.path().join("run.json"), config).map_err(|e| e.to_string())?;
    let mut artifacts = Vec::new();
    // the last run is pinned to one worker thread: scheduling must not leak
    for (run, threads) in [None, None, Some("1")].into_iter().enumerate() {
        let (csv, fit) = (format!("map{run}.csv"), format!("fit{run}.json"));
        run_cli(&["generate", "--config", "run.json", "--out", &csv], dir.path(), threads)?;
        run_cli(&["fit", "--in", &csv, "--multistart", "3", "--out", &fit], dir.path(), threads)?;
        let read = |name: String| std::fs::read(dir.path().join(name)).map_err(|e| e.to_string());
        artifacts.push((read(csv.clone())?, read(format!("{csv}.meta.json"))?, read(fit)?));
    }
    let same = artifacts.windows(2).all(|w| w[0] == w[1]);
    let bytes = artifacts[0].0.len() + artifacts[0].1.len() + artifacts[0].2.len();
    check(
        same,
        format!("3 generate/fit runs byte-identical, one single-threaded ({bytes} bytes per run)"),
        "outputs differ between runs".into(),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("strain oracle equivalence", strain_oracle_equivalence),
        ("Hertz/Sneddon reduction", hertz_sneddon_reduction),
        ("polarization limits", polarization_limits),
        ("matched-inclusion invisibility", matched_inclusion_invisibility),
        ("incompressible-limit consistency", incompressible_limit_consistency),
        ("asymptotic order", asymptotic_order),
        ("definiteness", definiteness),
        ("noiseless inversion round trip", noiseless_round_trip),
        ("noisy inversion robustness", noisy_robustness),
        ("determinism", determinism),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let ms = t.elapsed().as_millis();
        match outcome {
            Ok(msg) => println!("PASS  {:>2}. {name}: {msg} [{ms} ms]", k + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL  {:>2}. {name}: {msg} [{ms} ms]", k + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1} s",
        criteria.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
