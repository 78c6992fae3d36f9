//! Browser bindings: circle spectra and reduced eta, eigenvalue tracks with
//! spectral flow, and the `η̄`/`η_BK` family along a segment of exponents.
//!
//! Every entry point returns a JSON string; the native `*_json` functions
//! are the same computations without the JS error wrapper.

use cseta::eta::{eta_bk, eta_s1_closed, m_minus, s1_mode_spectrum};
use cseta::flow::{spectral_flow, track_connection_path, TrackOptions};
use cseta::forms::SubTorus;
use cseta::geometry::{cs_form, Connection};
use cseta::spectral::{build_truncation, spectrum};
use cseta::{Error, Result};
use num_complex::Complex64;
use serde::Serialize;
use wasm_bindgen::prelude::*;

const MAX_CUTOFF: usize = 64;

fn exponents(re: &[f64], im: &[f64]) -> Result<Vec<Complex64>> {
    if re.is_empty() || re.len() != im.len() {
        return Err(Error::InvalidArgument(
            "need matching, nonempty exponent arrays".into(),
        ));
    }
    Ok(re
        .iter()
        .zip(im)
        .map(|(&a, &b)| Complex64::new(a, b))
        .collect())
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn check_cutoff(cutoff: usize) -> Result<()> {
    if cutoff == 0 || cutoff > MAX_CUTOFF {
        return Err(Error::InvalidArgument(format!(
            "cutoff must lie in 1..={MAX_CUTOFF}"
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct CircleView {
    spectrum: Vec<[f64; 2]>,
    eta: [f64; 2],
    reduced: [f64; 2],
    kernel_dim: usize,
    m_minus: usize,
    eta_bk: [f64; 2],
}

pub fn circle_view_json(mu_re: &[f64], mu_im: &[f64], cutoff: usize) -> Result<String> {
    check_cutoff(cutoff)?;
    let mus = exponents(mu_re, mu_im)?;
    let conn = Connection::circle_diagonal(&mus)?;
    let spec = spectrum(&build_truncation(&conn, cutoff)?)?;
    let e = eta_s1_closed(&mus)?;
    let m = m_minus(&s1_mode_spectrum(&mus, cutoff as i64), 1e-12);
    let view = CircleView {
        spectrum: spec.into_iter().map(pair).collect(),
        eta: pair(e.eta),
        reduced: pair(e.reduced),
        kernel_dim: e.kernel_dim,
        m_minus: m,
        eta_bk: pair(eta_bk(&e, m)),
    };
    Ok(serde_json::to_string(&view)?)
}

#[derive(Serialize)]
struct FlowView {
    grid: Vec<f64>,
    /// `tracks[k][i]` is track `k` at `grid[i]`.
    tracks: Vec<Vec<[f64; 2]>>,
    sf: i64,
    to_negative: usize,
    to_nonnegative: usize,
    eta0: [f64; 2],
    eta1: [f64; 2],
    cs: [f64; 2],
}

pub fn flow_view_json(
    mu0_re: &[f64],
    mu0_im: &[f64],
    mu1_re: &[f64],
    mu1_im: &[f64],
    cutoff: usize,
) -> Result<String> {
    check_cutoff(cutoff)?;
    let m0 = exponents(mu0_re, mu0_im)?;
    let m1 = exponents(mu1_re, mu1_im)?;
    if m0.len() != m1.len() {
        return Err(Error::InvalidArgument(
            "endpoints must have the same rank".into(),
        ));
    }
    let path = |t: f64| {
        let mus: Vec<Complex64> = m0.iter().zip(&m1).map(|(a, b)| a + (b - a) * t).collect();
        Connection::circle_diagonal(&mus)
    };
    let tr = track_connection_path(path, cutoff, &TrackOptions::default())?;
    let sf = spectral_flow(&tr)?;
    let cs = cs_form(&path(0.0)?, &path(1.0)?)?.pair(&SubTorus::full(1))?;
    let view = FlowView {
        tracks: (0..tr.num_tracks())
            .map(|k| tr.track(k).into_iter().map(pair).collect())
            .collect(),
        grid: tr.grid,
        sf: sf.value,
        to_negative: sf.to_negative,
        to_nonnegative: sf.to_nonnegative,
        eta0: pair(eta_s1_closed(&m0)?.reduced),
        eta1: pair(eta_s1_closed(&m1)?.reduced),
        cs: pair(cs),
    };
    Ok(serde_json::to_string(&view)?)
}

#[derive(Serialize)]
struct FamilyView {
    t: Vec<f64>,
    reduced: Vec<[f64; 2]>,
    eta_bk: Vec<[f64; 2]>,
    m_minus: Vec<usize>,
}

/// Rank-one family `μ(t) = (1 − t) μ0 + t μ1` on a grid of `steps + 1` points.
pub fn family_view_json(mu0: [f64; 2], mu1: [f64; 2], steps: usize) -> Result<String> {
    if steps == 0 || steps > 4096 {
        return Err(Error::InvalidArgument("steps must lie in 1..=4096".into()));
    }
    let (a, b) = (
        Complex64::new(mu0[0], mu0[1]),
        Complex64::new(mu1[0], mu1[1]),
    );
    let mut view = FamilyView {
        t: Vec::new(),
        reduced: Vec::new(),
        eta_bk: Vec::new(),
        m_minus: Vec::new(),
    };
    for k in 0..=steps {
        let t = k as f64 / steps as f64;
        let mu = a + (b - a) * t;
        let e = eta_s1_closed(&[mu])?;
        let m = m_minus(&s1_mode_spectrum(&[mu], 8), 1e-12);
        view.t.push(t);
        view.reduced.push(pair(e.reduced));
        view.eta_bk.push(pair(eta_bk(&e, m)));
        view.m_minus.push(m);
    }
    Ok(serde_json::to_string(&view)?)
}

fn js<T>(r: Result<T>) -> std::result::Result<T, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

/// Spectrum of the truncated circle operator with `η̄`, `m₋` and `η_BK`.
#[wasm_bindgen]
pub fn circle_view(
    mu_re: &[f64],
    mu_im: &[f64],
    cutoff: usize,
) -> std::result::Result<String, JsError> {
    js(circle_view_json(mu_re, mu_im, cutoff))
}

/// Eigenvalue tracks along the linear path between two exponent vectors.
#[wasm_bindgen]
pub fn flow_view(
    mu0_re: &[f64],
    mu0_im: &[f64],
    mu1_re: &[f64],
    mu1_im: &[f64],
    cutoff: usize,
) -> std::result::Result<String, JsError> {
    js(flow_view_json(mu0_re, mu0_im, mu1_re, mu1_im, cutoff))
}

/// `η̄` and `η_BK` along a rank-one family.
#[wasm_bindgen]
pub fn family_view(
    re0: f64,
    im0: f64,
    re1: f64,
    im1: f64,
    steps: usize,
) -> std::result::Result<String, JsError> {
    js(family_view_json([re0, im0], [re1, im1], steps))
}
