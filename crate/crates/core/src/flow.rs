//! Eigenvalue tracking along operator paths and non-self-adjoint spectral
//! flow across the imaginary axis.

use std::io::Write;

use num_complex::Complex64;
use pathfinding::kuhn_munkres::kuhn_munkres_min;
use pathfinding::matrix::Matrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::TrigPolyForm;
use crate::geometry::{Connection, GaugeMap};
use crate::spectral::{build_truncation, spectrum, OperatorTruncation};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackOptions {
    /// Number of initial grid intervals `m0`.
    pub initial_intervals: usize,
    /// Maximal bisection depth per initial interval.
    pub max_depth: usize,
    /// Extra bisections applied to intervals in which a track crosses the
    /// imaginary axis, to localize the crossing.
    pub crossing_depth: usize,
    /// Axis proximity threshold relative to the spectral scale.
    pub axis_delta: f64,
    /// Eigenvalues closer than this (relative) are treated as degenerate.
    pub degeneracy_tol: f64,
}

impl Default for TrackOptions {
    fn default() -> Self {
        Self {
            initial_intervals: 16,
            max_depth: 20,
            crossing_depth: 4,
            axis_delta: 1e-3,
            degeneracy_tol: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Refinement {
    pub t0: f64,
    pub t1: f64,
    pub depth: usize,
    pub reason: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub track: usize,
    /// Linear estimate of the crossing parameter.
    pub t: f64,
    /// `+1` for `Re < 0 → Re ≥ 0`, `−1` for the reverse.
    pub direction: i32,
}

/// Matched eigenvalues on a parameter grid: `values[i][k]` is track `k` at
/// `grid[i]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueTrack {
    pub grid: Vec<f64>,
    pub values: Vec<Vec<Complex64>>,
    pub crossings: Vec<Crossing>,
    pub refinements: Vec<Refinement>,
    /// Spectral scale `max(1, max |λ|)` at `t = 0`.
    pub scale: f64,
}

impl EigenvalueTrack {
    pub fn num_tracks(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn track(&self, k: usize) -> Vec<Complex64> {
        self.values.iter().map(|v| v[k]).collect()
    }
}

/// Tracks a path of spectra given by `spectrum_at(t)` for `t ∈ [0, 1]`.
///
/// Consecutive spectra are matched by minimal total distance. An interval is
/// bisected when a matched step exceeds half the local gap (a quarter when
/// the step crosses the imaginary axis); after `max_depth` bisections an
/// ambiguity that could change the crossing census is an error.
pub fn track_spectra<F>(mut spectrum_at: F, opts: &TrackOptions) -> Result<EigenvalueTrack>
where
    F: FnMut(f64) -> Result<Vec<Complex64>>,
{
    if opts.initial_intervals == 0 {
        return Err(Error::InvalidArgument(
            "initial grid needs at least one interval".into(),
        ));
    }
    let start = spectrum_at(0.0)?;
    let scale = start.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let mut tracker = Tracker {
        spectrum_at: &mut spectrum_at,
        opts,
        scale,
        grid: vec![0.0],
        values: vec![start.clone()],
        refinements: Vec::new(),
        crossings: Vec::new(),
    };
    let mut prev = start;
    for i in 0..opts.initial_intervals {
        let t0 = i as f64 / opts.initial_intervals as f64;
        let t1 = (i + 1) as f64 / opts.initial_intervals as f64;
        let next = (tracker.spectrum_at)(t1)?;
        if next.len() != prev.len() {
            return Err(Error::InvalidArgument(
                "spectrum size changes along the path".into(),
            ));
        }
        prev = tracker.refine(t0, &prev, t1, next, 0, 0)?;
    }
    let Tracker {
        grid,
        values,
        refinements,
        mut crossings,
        ..
    } = tracker;
    for (t, v) in [(0.0, &values[0]), (1.0, &values[values.len() - 1])] {
        if let Some(z) = v.iter().find(|z| z.re.abs() <= opts.degeneracy_tol * scale) {
            return Err(Error::EndpointOnAxis {
                t,
                re: z.re,
                im: z.im,
            });
        }
    }
    crossings.sort_by(|a, b| a.t.total_cmp(&b.t).then(a.track.cmp(&b.track)));
    Ok(EigenvalueTrack {
        grid,
        values,
        crossings,
        refinements,
        scale,
    })
}

struct Tracker<'a, F> {
    spectrum_at: &'a mut F,
    opts: &'a TrackOptions,
    scale: f64,
    grid: Vec<f64>,
    values: Vec<Vec<Complex64>>,
    refinements: Vec<Refinement>,
    crossings: Vec<Crossing>,
}

fn nonneg(z: Complex64) -> bool {
    z.re >= 0.0
}

impl<F: FnMut(f64) -> Result<Vec<Complex64>>> Tracker<'_, F> {
    /// Matches `next` to `prev` (already in track order), pushes the grid
    /// points of `(t0, t1]` and returns the reordered spectrum at `t1`.
    fn refine(
        &mut self,
        t0: f64,
        prev: &[Complex64],
        t1: f64,
        next: Vec<Complex64>,
        depth: usize,
        crossing_depth: usize,
    ) -> Result<Vec<Complex64>> {
        let matched = self.assign(prev, &next);
        let verdict = self.judge(prev, &matched);
        let crosses = prev
            .iter()
            .zip(&matched)
            .any(|(a, b)| nonneg(*a) != nonneg(*b));
        let near_axis = prev
            .iter()
            .chain(&matched)
            .any(|z| z.re.abs() < self.opts.axis_delta * self.scale);
        let want_split = match &verdict {
            Verdict::Ambiguous(_) => depth < self.opts.max_depth,
            Verdict::Clear => crosses && near_axis && crossing_depth < self.opts.crossing_depth,
        };
        if want_split {
            let reason = match &verdict {
                Verdict::Ambiguous(d) => d.clone(),
                Verdict::Clear => "localizing an axis crossing".into(),
            };
            self.refinements.push(Refinement {
                t0,
                t1,
                depth: depth + 1,
                reason,
            });
            let tm = 0.5 * (t0 + t1);
            let mid = (self.spectrum_at)(tm)?;
            let (d, cd) = match verdict {
                Verdict::Ambiguous(_) => (depth + 1, crossing_depth),
                Verdict::Clear => (depth, crossing_depth + 1),
            };
            let mid = self.refine(t0, prev, tm, mid, d, cd)?;
            return self.refine(tm, &mid, t1, next, d, cd);
        }
        if let Verdict::Ambiguous(detail) = verdict {
            if self.swap_changes_census(prev, &matched) {
                return Err(Error::AmbiguousMatching {
                    t0,
                    t1,
                    depth,
                    detail,
                });
            }
            self.refinements.push(Refinement {
                t0,
                t1,
                depth,
                reason: format!("accepted near-collision without axis ambiguity: {detail}"),
            });
        }
        for (k, (a, b)) in prev.iter().zip(&matched).enumerate() {
            if nonneg(*a) != nonneg(*b) {
                let s = if (b.re - a.re).abs() > 0.0 {
                    -a.re / (b.re - a.re)
                } else {
                    0.5
                };
                self.crossings.push(Crossing {
                    track: k,
                    t: t0 + s.clamp(0.0, 1.0) * (t1 - t0),
                    direction: if nonneg(*b) { 1 } else { -1 },
                });
            }
        }
        self.grid.push(t1);
        self.values.push(matched.clone());
        Ok(matched)
    }

    fn assign(&self, prev: &[Complex64], next: &[Complex64]) -> Vec<Complex64> {
        let n = prev.len();
        if n == 0 {
            return Vec::new();
        }
        let weights = Matrix::from_fn(n, n, |(i, j)| {
            ((prev[i] - next[j]).norm() / self.scale * 1e12).round() as i64
        });
        let (_, assignment) = kuhn_munkres_min(&weights);
        assignment.into_iter().map(|j| next[j]).collect()
    }

    fn judge(&self, prev: &[Complex64], matched: &[Complex64]) -> Verdict {
        let deg = self.opts.degeneracy_tol * self.scale;
        for i in 0..prev.len() {
            let step = (prev[i] - matched[i]).norm();
            if step <= deg {
                continue;
            }
            let gap = local_gap(prev, i, deg).min(local_gap(matched, i, deg));
            let crossing = nonneg(prev[i]) != nonneg(matched[i]);
            let bound = if crossing { 0.25 } else { 0.5 } * gap;
            if step > bound {
                return Verdict::Ambiguous(format!(
                    "track {i}: step {step:.3e} vs gap {gap:.3e} near {}",
                    prev[i]
                ));
            }
        }
        Verdict::Clear
    }

    /// Whether some ambiguous pair could be re-matched in a way that changes
    /// which half planes its endpoints lie in.
    fn swap_changes_census(&self, prev: &[Complex64], matched: &[Complex64]) -> bool {
        let deg = self.opts.degeneracy_tol * self.scale;
        for i in 0..prev.len() {
            let step = (prev[i] - matched[i]).norm();
            let gap = local_gap(prev, i, deg).min(local_gap(matched, i, deg));
            if step <= deg || step <= 0.5 * gap {
                continue;
            }
            let reach = 2.0 * step;
            for j in 0..prev.len() {
                if j != i && (prev[j] - prev[i]).norm() <= reach {
                    let same = nonneg(prev[i]) == nonneg(prev[j])
                        && nonneg(matched[i]) == nonneg(matched[j]);
                    if !same {
                        return true;
                    }
                }
            }
        }
        false
    }
}

enum Verdict {
    Clear,
    Ambiguous(String),
}

fn local_gap(values: &[Complex64], i: usize, deg: f64) -> f64 {
    values
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, z)| (z - values[i]).norm())
        .filter(|&d| d > deg)
        .fold(f64::INFINITY, f64::min)
}

/// Tracks the spectra of a path of truncated operators.
pub fn track_path<F>(path: F, m0: usize) -> Result<EigenvalueTrack>
where
    F: Fn(f64) -> Result<OperatorTruncation>,
{
    let opts = TrackOptions {
        initial_intervals: m0,
        ..TrackOptions::default()
    };
    track_spectra(|t| spectrum(&path(t)?), &opts)
}

/// Tracks the signature operators of a path of connections at cutoff `N`.
pub fn track_connection_path<F>(
    path: F,
    cutoff: usize,
    opts: &TrackOptions,
) -> Result<EigenvalueTrack>
where
    F: Fn(f64) -> Result<Connection>,
{
    track_spectra(|t| spectrum(&build_truncation(&path(t)?, cutoff)?), opts)
}

/// Crossing census of a tracked path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectralFlow {
    /// Tracks moving from `Re λ ≥ 0` to `Re λ < 0`.
    pub to_negative: usize,
    /// Tracks moving from `Re λ < 0` to `Re λ ≥ 0`.
    pub to_nonnegative: usize,
    /// `to_nonnegative − to_negative`.
    pub value: i64,
}

/// Net number of eigenvalues crossing the imaginary axis from left to right.
pub fn spectral_flow(tr: &EigenvalueTrack) -> Result<SpectralFlow> {
    let (first, last) = match (tr.values.first(), tr.values.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(Error::InvalidArgument("empty track".into())),
    };
    let tol = 1e-9 * tr.scale;
    for (t, v) in [(tr.grid[0], first), (tr.grid[tr.grid.len() - 1], last)] {
        if let Some(z) = v.iter().find(|z| z.re.abs() <= tol) {
            return Err(Error::EndpointOnAxis {
                t,
                re: z.re,
                im: z.im,
            });
        }
    }
    let mut to_negative = 0;
    let mut to_nonnegative = 0;
    for (a, b) in first.iter().zip(last) {
        match (nonneg(*a), nonneg(*b)) {
            (true, false) => to_negative += 1,
            (false, true) => to_nonnegative += 1,
            _ => {}
        }
    }
    Ok(SpectralFlow {
        to_negative,
        to_nonnegative,
        value: to_nonnegative as i64 - to_negative as i64,
    })
}

/// Point `t` on the linear path from `∇` to `g^{-1} ∇ g` with
/// `g = diag(e^{2πi w x}, 1, …, 1)` on the circle.
pub fn gauge_path(c: &Connection, w: i64, t: f64) -> Result<Connection> {
    if c.dim() != 1 {
        return Err(Error::InvalidArgument(
            "gauge path is defined on the circle".into(),
        ));
    }
    let g = GaugeMap::circle_winding(c.rank(), w)?;
    let end: TrigPolyForm = &g.g_inv().wedge(c.form())?.wedge(g.g())? + &g.maurer_cartan();
    let a = &c.form().scale_re(1.0 - t) + &end.scale_re(t);
    Connection::new(a, c.metric().clone())
}

/// CSV with columns `t,re,im,track`.
pub fn write_track_csv<W: Write>(mut out: W, tr: &EigenvalueTrack) -> std::io::Result<()> {
    writeln!(out, "t,re,im,track")?;
    for (t, vals) in tr.grid.iter().zip(&tr.values) {
        for (k, z) in vals.iter().enumerate() {
            writeln!(out, "{t:.12},{:.15e},{:.15e},{k}", z.re, z.im)?;
        }
    }
    Ok(())
}
