//! Least-squares fit of the five-parameter anomaly model to a stiffness map
//! and extraction of the inclusion parameters from the fitted values.

mod extract;
mod guess;
mod lm;
mod model;

pub use extract::{extract_inclusion, Extraction, Known, Normalization};
pub use guess::{initial_guess, InitialGuess, MIN_GUESS_POINTS};
pub use model::{model_eval, model_jacobian, ModelParams5};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::forward::StiffnessMap;

/// Fewest samples that leave a residual degree of freedom.
pub const MIN_FIT_POINTS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_iter: usize,
    /// Extra starts seeded at the strongest local extrema of |S − median|.
    pub restarts: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { max_iter: 200, restarts: 0 }
    }
}

/// Linearized 95 % confidence half-widths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceIntervals {
    pub s0: f64,
    pub c0: f64,
    pub d: f64,
    pub x10: f64,
    pub x20: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    #[serde(flatten)]
    pub params: ModelParams5,
    /// Residual sum of squares [N²/m²].
    pub rss: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `None` when the normal equations are rank deficient.
    pub ci: Option<ConfidenceIntervals>,
    pub gradient_norm: f64,
    pub degenerate: bool,
    /// The starting heuristics saw no anomaly above the noise floor.
    pub no_anomaly: bool,
    pub n_points: usize,
    /// Indentation depth carried over from the map metadata [m].
    pub w: Option<f64>,
    /// Index of the winning start (0 is the primary guess).
    pub start: usize,
    #[serde(skip)]
    pub rss_history: Vec<f64>,
}

fn run_from(map: &StiffnessMap, init: &ModelParams5, opts: &FitOptions, no_anomaly: bool, start: usize) -> FitResult {
    let out = lm::levenberg_marquardt(map, init, opts.max_iter);
    FitResult {
        params: out.params,
        rss: out.rss,
        iterations: out.iterations,
        converged: out.converged,
        ci: out.half_widths.map(|h| ConfidenceIntervals { s0: h[0], c0: h[1], d: h[2], x10: h[3], x20: h[4] }),
        gradient_norm: out.gradient_norm,
        degenerate: out.degenerate,
        no_anomaly,
        n_points: map.len(),
        w: map.depth(),
        start,
        rss_history: out.rss_history,
    }
}

/// Least-squares estimate of (S₀, C₀, d, x₁⁰, x₂⁰).
///
/// Without `init` the start comes from [`initial_guess`]; with
/// `opts.restarts > 0` further starts are placed at the strongest local
/// extrema of the map. Starts run in parallel and the lowest RSS wins, ties
/// going to the shallower depth and then to the lower start index, so the
/// result does not depend on scheduling.
pub fn fit_map(map: &StiffnessMap, init: Option<ModelParams5>, opts: &FitOptions) -> Result<FitResult> {
    guess::check_samples(map, MIN_FIT_POINTS)?;
    let (primary, no_anomaly) = match init {
        Some(p) => {
            p.validate()?;
            (p, false)
        }
        None => {
            let g = initial_guess(map)?;
            (g.params, g.no_anomaly)
        }
    };
    let mut starts = vec![primary];
    if opts.restarts > 0 {
        let peaks = guess::local_extrema(map, primary.s0, opts.restarts + 1);
        for k in peaks {
            let g = guess::guess_around(map, primary.s0, k)?;
            if g.params.x10 == primary.x10 && g.params.x20 == primary.x20 {
                continue;
            }
            if starts.len() > opts.restarts {
                break;
            }
            starts.push(g.params);
        }
    }
    let results: Vec<FitResult> = starts
        .par_iter()
        .enumerate()
        .map(|(i, s)| run_from(map, s, opts, no_anomaly, i))
        .collect();
    let best = results
        .into_iter()
        .reduce(|best, cur| {
            let tie = (cur.rss - best.rss).abs() <= 1e-12 * best.rss.max(cur.rss);
            if (!tie && cur.rss < best.rss) || (tie && cur.params.d < best.params.d) {
                cur
            } else {
                best
            }
        })
        .expect("at least one start");
    Ok(best)
}
