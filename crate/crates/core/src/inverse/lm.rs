//! Levenberg–Marquardt for the five-parameter anomaly model.
//!
//! The iteration runs on nondimensional coordinates
//! θ = (S₀/S_ref, C₀/(S_ref L⁶), ln(d/L), x₁⁰/L, x₂⁰/L), with S_ref and L
//! taken from the starting point. The log keeps d positive; the scaling
//! makes an isotropic damping term meaningful across parameters whose SI
//! magnitudes differ by tens of orders.

use nalgebra::{Cholesky, SMatrix, SVector, SymmetricEigen};

use super::model::{model_eval, model_jacobian, ModelParams5};
use crate::forward::StiffnessMap;

type Mat5 = SMatrix<f64, 5, 5>;
type Vec5 = SVector<f64, 5>;

pub(crate) const STEP_TOL: f64 = 1e-10;
pub(crate) const GRAD_TOL: f64 = 1e-12;
const DAMPING_CEILING: f64 = 1e40;
/// Normal-matrix condition number past which the fit is reported degenerate.
const DEGENERATE_RCOND: f64 = 1e-14;

#[derive(Debug, Clone)]
pub(crate) struct LmOutcome {
    pub params: ModelParams5,
    pub rss: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Largest |cos| between the residual and a Jacobian column.
    pub gradient_norm: f64,
    pub degenerate: bool,
    /// 1.96 σ half-widths in SI units, when the normal matrix is regular.
    pub half_widths: Option<[f64; 5]>,
    /// RSS after each accepted step, starting with the initial point.
    pub rss_history: Vec<f64>,
}

struct Scaling {
    s_ref: f64,
    length: f64,
}

impl Scaling {
    fn to_theta(&self, p: &ModelParams5) -> Vec5 {
        Vec5::new(
            p.s0 / self.s_ref,
            p.c0 / (self.s_ref * self.length.powi(6)),
            (p.d / self.length).ln(),
            p.x10 / self.length,
            p.x20 / self.length,
        )
    }

    fn from_theta(&self, t: &Vec5) -> ModelParams5 {
        ModelParams5 {
            s0: self.s_ref * t[0],
            c0: self.s_ref * self.length.powi(6) * t[1],
            d: self.length * t[2].exp(),
            x10: self.length * t[3],
            x20: self.length * t[4],
        }
    }

    /// ∂p/∂θ, diagonal.
    fn chain(&self, p: &ModelParams5) -> [f64; 5] {
        [self.s_ref, self.s_ref * self.length.powi(6), p.d, self.length, self.length]
    }
}

/// Normalized residual vector, normal matrix JᵀJ and gradient Jᵀr.
fn linearize(map: &StiffnessMap, sc: &Scaling, p: &ModelParams5) -> (f64, Mat5, Vec5, [f64; 5]) {
    let chain = sc.chain(p);
    let mut rss = 0.0;
    let mut jtj = Mat5::zeros();
    let mut jtr = Vec5::zeros();
    let mut col_sq = [0.0; 5];
    for pt in &map.points {
        let r = (model_eval(p, pt.x1, pt.x2) - pt.s) / sc.s_ref;
        let raw = model_jacobian(p, pt.x1, pt.x2);
        let j = Vec5::from_fn(|k, _| raw[k] * chain[k] / sc.s_ref);
        rss += r * r;
        jtj += j * j.transpose();
        jtr += j * r;
        for k in 0..5 {
            col_sq[k] += j[k] * j[k];
        }
    }
    (rss, jtj, jtr, col_sq)
}

fn normalized_rss(map: &StiffnessMap, sc: &Scaling, p: &ModelParams5) -> f64 {
    map.points
        .iter()
        .map(|pt| {
            let r = (model_eval(p, pt.x1, pt.x2) - pt.s) / sc.s_ref;
            r * r
        })
        .sum()
}

fn orthogonality(rss: f64, jtr: &Vec5, col_sq: &[f64; 5]) -> f64 {
    let rn = rss.sqrt();
    (0..5)
        .map(|k| {
            let cn = col_sq[k].sqrt();
            if cn == 0.0 || rn == 0.0 {
                0.0
            } else {
                (jtr[k] / (cn * rn)).abs()
            }
        })
        .fold(0.0, f64::max)
}

pub(crate) fn levenberg_marquardt(map: &StiffnessMap, init: &ModelParams5, max_iter: usize) -> LmOutcome {
    let sc = Scaling { s_ref: init.s0.abs(), length: init.d };
    let mut theta = sc.to_theta(init);
    let mut params = *init;
    let (mut rss, mut jtj, mut jtr, mut col_sq) = linearize(map, &sc, &params);
    let mut damping = 1e-3 * (0..5).map(|k| jtj[(k, k)]).fold(0.0, f64::max);
    let mut history = vec![rss * sc.s_ref * sc.s_ref];
    let mut converged = false;
    let mut iterations = 0;
    // residuals at rounding level of the data
    let exact_floor = (map.len() as f64) * 1e-30;

    while iterations < max_iter {
        if rss <= exact_floor || orthogonality(rss, &jtr, &col_sq) < GRAD_TOL {
            converged = true;
            break;
        }
        iterations += 1;
        let mut accepted = false;
        while damping < DAMPING_CEILING {
            let lhs = jtj + Mat5::identity() * damping;
            let Some(chol) = Cholesky::new(lhs) else {
                damping *= 10.0;
                continue;
            };
            let step = chol.solve(&(-jtr));
            let trial_theta = theta + step;
            let trial = sc.from_theta(&trial_theta);
            let trial_rss = normalized_rss(map, &sc, &trial);
            let small_step = step.amax() <= STEP_TOL * (theta.amax() + STEP_TOL);
            if trial_rss.is_finite() && trial_rss < rss {
                theta = trial_theta;
                params = trial;
                (rss, jtj, jtr, col_sq) = linearize(map, &sc, &params);
                history.push(rss * sc.s_ref * sc.s_ref);
                damping /= 10.0;
                accepted = true;
                if small_step {
                    converged = true;
                }
                break;
            }
            if small_step {
                // no representable descent left around the current point
                converged = true;
                break;
            }
            damping *= 10.0;
        }
        if converged || !accepted {
            break;
        }
    }

    let gradient_norm = orthogonality(rss, &jtr, &col_sq);
    let eig = SymmetricEigen::new(jtj).eigenvalues;
    let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v.abs())));
    let degenerate = !(lo > DEGENERATE_RCOND * hi);
    let dof = map.len().saturating_sub(5);
    let half_widths = if degenerate || dof == 0 {
        None
    } else {
        jtj.try_inverse().map(|cov| {
            let s2 = rss / dof as f64;
            let chain = sc.chain(&params);
            let mut out = [0.0; 5];
            for k in 0..5 {
                out[k] = 1.96 * (s2 * cov[(k, k)]).max(0.0).sqrt() * chain[k];
            }
            out
        })
    };
    LmOutcome {
        params,
        rss: rss * sc.s_ref * sc.s_ref,
        iterations,
        converged,
        gradient_norm,
        degenerate,
        half_widths,
        rss_history: history,
    }
}
