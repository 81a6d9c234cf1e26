//! Starting point for the least-squares fit, read off the map directly.

use std::collections::HashMap;

use super::model::ModelParams5;
use crate::error::{Error, Result};
use crate::forward::StiffnessMap;

/// Minimum number of samples the heuristics need.
pub const MIN_GUESS_POINTS: usize = 10;

/// ρ_half / d for the model's (d² + ρ²)⁻³ profile.
pub(crate) fn half_width_ratio() -> f64 {
    (2f64.cbrt() - 1.0).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialGuess {
    pub params: ModelParams5,
    /// Peak deviation from the median is indistinguishable from noise.
    pub no_anomaly: bool,
}

pub(crate) fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Lattice view of a map whose points form a full rectangular grid.
pub(crate) struct Lattice {
    xs: Vec<f64>,
    ys: Vec<f64>,
    index: HashMap<(usize, usize), usize>,
}

fn unique_sorted(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

impl Lattice {
    pub(crate) fn detect(map: &StiffnessMap) -> Option<Self> {
        let xs = unique_sorted(map.points.iter().map(|p| p.x1));
        let ys = unique_sorted(map.points.iter().map(|p| p.x2));
        if xs.len() * ys.len() != map.len() {
            return None;
        }
        let mut index = HashMap::with_capacity(map.len());
        for (k, p) in map.points.iter().enumerate() {
            let i = xs.binary_search_by(|v| v.total_cmp(&p.x1)).ok()?;
            let j = ys.binary_search_by(|v| v.total_cmp(&p.x2)).ok()?;
            if index.insert((i, j), k).is_some() {
                return None;
            }
        }
        Some(Self { xs, ys, index })
    }

    pub(crate) fn position(&self, k: usize, map: &StiffnessMap) -> (usize, usize) {
        let p = map.points[k];
        let i = self.xs.binary_search_by(|v| v.total_cmp(&p.x1)).unwrap();
        let j = self.ys.binary_search_by(|v| v.total_cmp(&p.x2)).unwrap();
        (i, j)
    }

    pub(crate) fn at(&self, i: isize, j: isize) -> Option<usize> {
        if i < 0 || j < 0 {
            return None;
        }
        self.index.get(&(i as usize, j as usize)).copied()
    }
}

/// Smallest positive gap between distinct coordinates along either axis,
/// or the nearest-neighbour distance when the points are scattered.
pub(crate) fn sample_spacing(map: &StiffnessMap) -> f64 {
    let min_gap = |v: Vec<f64>| {
        v.windows(2).map(|w| w[1] - w[0]).filter(|g| *g > 0.0).fold(f64::INFINITY, f64::min)
    };
    if Lattice::detect(map).is_some() {
        let g = min_gap(unique_sorted(map.points.iter().map(|p| p.x1)))
            .min(min_gap(unique_sorted(map.points.iter().map(|p| p.x2))));
        if g.is_finite() {
            return g;
        }
    }
    let mut best = f64::INFINITY;
    for (i, a) in map.points.iter().enumerate() {
        for b in &map.points[i + 1..] {
            let r = (a.x1 - b.x1).hypot(a.x2 - b.x2);
            if r > 0.0 {
                best = best.min(r);
            }
        }
    }
    best
}

pub(crate) fn map_extent(map: &StiffnessMap) -> f64 {
    let (mut lo1, mut hi1, mut lo2, mut hi2) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in &map.points {
        lo1 = lo1.min(p.x1);
        hi1 = hi1.max(p.x1);
        lo2 = lo2.min(p.x2);
        hi2 = hi2.max(p.x2);
    }
    (hi1 - lo1).max(hi2 - lo2)
}

/// Vertex offset of the parabola through (−h, a), (0, b), (h, c), in units
/// of h and clamped to half a cell.
fn parabolic_offset(a: f64, b: f64, c: f64) -> f64 {
    let curv = a - 2.0 * b + c;
    if curv >= 0.0 {
        return 0.0;
    }
    (0.5 * (a - c) / curv).clamp(-0.5, 0.5)
}

/// Heuristic estimate of (S₀, C₀, d, x₁⁰, x₂⁰).
///
/// S₀ is the median stiffness; the epicenter is the extreme deviation from
/// it, refined by a parabola through the lattice neighbours; d follows from
/// the radius at which the radially binned anomaly drops to half its peak.
pub fn initial_guess(map: &StiffnessMap) -> Result<InitialGuess> {
    check_samples(map, MIN_GUESS_POINTS)?;
    let mut values: Vec<f64> = map.points.iter().map(|p| p.s).collect();
    let s0 = median(&mut values);
    let (peak_idx, _) = map
        .points
        .iter()
        .enumerate()
        .map(|(k, p)| (k, (p.s - s0).abs()))
        .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
    guess_around(map, s0, peak_idx)
}

pub(crate) fn check_samples(map: &StiffnessMap, needed: usize) -> Result<()> {
    if map.len() < needed {
        return Err(Error::TooFewPoints { needed, got: map.len() });
    }
    for (index, p) in map.points.iter().enumerate() {
        if !(p.s.is_finite() && p.x1.is_finite() && p.x2.is_finite()) {
            return Err(Error::NonFiniteSample { index });
        }
    }
    Ok(())
}

pub(crate) fn guess_around(map: &StiffnessMap, s0: f64, peak_idx: usize) -> Result<InitialGuess> {
    let spacing = sample_spacing(map);
    let extent = map_extent(map).max(spacing);
    let peak = map.points[peak_idx];
    let sign = if peak.s >= s0 { 1.0 } else { -1.0 };
    let dev = |k: usize| sign * (map.points[k].s - s0);

    // robust noise level from the median absolute deviation
    let mut abs_dev: Vec<f64> = map.points.iter().map(|p| (p.s - s0).abs()).collect();
    let sigma = 1.4826 * median(&mut abs_dev);
    let floor = (sigma * (2.0 * (map.len() as f64).ln()).sqrt()).max(1e-12 * s0.abs());

    let mut epicenter = [peak.x1, peak.x2];
    let mut peak_dev = dev(peak_idx);
    if let Some(lat) = Lattice::detect(map) {
        let (i, j) = lat.position(peak_idx, map);
        let (i, j) = (i as isize, j as isize);
        let mut refined = peak_dev;
        if let (Some(l), Some(r)) = (lat.at(i - 1, j), lat.at(i + 1, j)) {
            let h = map.points[r].x1 - peak.x1;
            let t = parabolic_offset(dev(l), peak_dev, dev(r));
            epicenter[0] += t * h;
            refined += 0.25 * (dev(r) - dev(l)) * t;
        }
        if let (Some(b), Some(u)) = (lat.at(i, j - 1), lat.at(i, j + 1)) {
            let h = map.points[u].x2 - peak.x2;
            let t = parabolic_offset(dev(b), peak_dev, dev(u));
            epicenter[1] += t * h;
            refined += 0.25 * (dev(u) - dev(b)) * t;
        }
        peak_dev = refined.max(peak_dev);
    }

    if peak_dev <= floor {
        let params = ModelParams5 { s0, c0: 0.0, d: (extent / 6.0).max(spacing), x10: epicenter[0], x20: epicenter[1] };
        return Ok(InitialGuess { params, no_anomaly: true });
    }

    let rho_half = half_max_radius(map, epicenter, spacing, dev, peak_dev);
    let d = (rho_half / half_width_ratio()).clamp(spacing, extent);
    let c0 = sign * peak_dev * d.powi(6);
    Ok(InitialGuess { params: ModelParams5 { s0, c0, d, x10: epicenter[0], x20: epicenter[1] }, no_anomaly: false })
}

/// Radius where the radially binned anomaly first falls below half of
/// `peak`, linearly interpolated between bin centroids.
fn half_max_radius(
    map: &StiffnessMap,
    center: [f64; 2],
    spacing: f64,
    dev: impl Fn(usize) -> f64,
    peak: f64,
) -> f64 {
    let mut bins: Vec<(f64, f64, usize)> = Vec::new();
    for k in 0..map.len() {
        let p = map.points[k];
        let rho = (p.x1 - center[0]).hypot(p.x2 - center[1]);
        let b = (rho / spacing) as usize;
        if bins.len() <= b {
            bins.resize(b + 1, (0.0, 0.0, 0));
        }
        bins[b].0 += rho;
        bins[b].1 += dev(k);
        bins[b].2 += 1;
    }
    let mut prev = (0.0, peak);
    for (rho_sum, dev_sum, count) in bins {
        if count == 0 {
            continue;
        }
        let rho = rho_sum / count as f64;
        let mean = dev_sum / count as f64;
        if mean < 0.5 * peak {
            let (r0, v0) = prev;
            if v0 <= mean {
                return rho;
            }
            return r0 + (v0 - 0.5 * peak) / (v0 - mean) * (rho - r0);
        }
        prev = (rho, mean);
    }
    prev.0.max(spacing)
}

/// Up to `count` lattice local maxima of |S − S₀|, strongest first.
pub(crate) fn local_extrema(map: &StiffnessMap, s0: f64, count: usize) -> Vec<usize> {
    let mag = |k: usize| (map.points[k].s - s0).abs();
    let mut found: Vec<usize> = match Lattice::detect(map) {
        Some(lat) => (0..map.len())
            .filter(|&k| {
                let (i, j) = lat.position(k, map);
                let (i, j) = (i as isize, j as isize);
                (-1..=1)
                    .flat_map(|di| (-1..=1).map(move |dj| (di, dj)))
                    .filter(|&(di, dj)| (di, dj) != (0, 0))
                    .filter_map(|(di, dj)| lat.at(i + di, j + dj))
                    .all(|n| mag(n) <= mag(k))
            })
            .collect(),
        None => {
            let spacing = sample_spacing(map);
            (0..map.len())
                .filter(|&k| {
                    let p = map.points[k];
                    map.points.iter().enumerate().all(|(n, q)| {
                        n == k || (p.x1 - q.x1).hypot(p.x2 - q.x2) > 1.5 * spacing || mag(n) <= mag(k)
                    })
                })
                .collect()
        }
    };
    found.sort_by(|&a, &b| mag(b).total_cmp(&mag(a)).then(a.cmp(&b)));
    found.truncate(count);
    found
}
