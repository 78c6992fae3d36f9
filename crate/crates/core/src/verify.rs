//! Identity checks producing report entries with both sides, residual and
//! tolerance.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eta::{bk_phase, eta_s1, EtaValue};
use crate::flow::{gauge_path, spectral_flow, track_connection_path, TrackOptions};
use crate::forms::{Branch, SubTorus, TrigPolyForm};
use crate::geometry::{
    a_coeff, chern_odd, cs_form, cs_r_poly, hermitian_part, imaginary_pairing_weight, l_form,
    odd_chern_char, r_deformation, Connection, GaugeMap, Metric,
};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckMode {
    /// `|lhs − rhs|`.
    Absolute,
    /// Circle distance of the real parts combined with the absolute
    /// difference of the imaginary parts.
    ModZ,
    /// `|lhs − rhs|` for integer-valued quantities.
    Integer,
}

/// Distance from `x` to the nearest integer.
pub fn circle_distance(x: f64) -> f64 {
    (x - x.round()).abs()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub id: String,
    pub identity: String,
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub residual: f64,
    pub mode: CheckMode,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub parts: BTreeMap<String, Complex64>,
}

impl CheckEntry {
    pub fn new(
        id: &str,
        identity: &str,
        lhs: Complex64,
        rhs: Complex64,
        mode: CheckMode,
        tolerance: f64,
    ) -> Self {
        let diff = lhs - rhs;
        let residual = match mode {
            CheckMode::Absolute | CheckMode::Integer => diff.norm(),
            CheckMode::ModZ => circle_distance(diff.re).hypot(diff.im),
        };
        let integral =
            mode != CheckMode::Integer || (circle_distance(lhs.re) < 1e-6 && lhs.im.abs() < 1e-6);
        Self {
            id: id.into(),
            identity: identity.into(),
            lhs,
            rhs,
            residual,
            mode,
            tolerance,
            pass: residual <= tolerance && residual.is_finite() && integral,
            parts: BTreeMap::new(),
        }
    }

    pub fn with_part(mut self, name: &str, value: Complex64) -> Self {
        self.parts.insert(name.into(), value);
        self
    }

    /// Re-evaluates `pass` for a new tolerance.
    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        let integral = self.mode != CheckMode::Integer
            || (circle_distance(self.lhs.re) < 1e-6 && self.lhs.im.abs() < 1e-6);
        self.tolerance = tolerance;
        self.pass = self.residual <= tolerance && self.residual.is_finite() && integral;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub entries: Vec<CheckEntry>,
}

impl Default for VerificationReport {
    fn default() -> Self {
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            entries: Vec::new(),
        }
    }
}

impl VerificationReport {
    pub fn push(&mut self, e: CheckEntry) {
        self.entries.push(e);
    }

    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckEntry> {
        self.entries.iter().filter(|e| !e.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// L-form of the flat torus, the constant 1.
pub fn torus_l_form(dim: usize) -> TrigPolyForm {
    l_form(&TrigPolyForm::zero(dim, dim), Branch::Principal).expect("zero curvature has degree 2")
}

/// `∫_cycle L ∧ form`.
pub fn l_pairing(form: &TrigPolyForm, cycle: &SubTorus) -> Result<Complex64> {
    torus_l_form(form.dim()).wedge(form)?.pair(cycle)
}

fn require_circle(c: &Connection, what: &str) -> Result<()> {
    if c.dim() != 1 {
        return Err(Error::InvalidArgument(format!(
            "{what} is evaluated on the circle, got dimension {}",
            c.dim()
        )));
    }
    Ok(())
}

fn require_flat(c: &Connection) -> Result<()> {
    if !c.is_flat(1e-10) {
        return Err(Error::InvalidConnection(
            "a flat connection is required".into(),
        ));
    }
    Ok(())
}

fn factorial(j: usize) -> f64 {
    (1..=j).map(|q| q as f64).product()
}

/// Pairings of `CS(∇^e, ∇^{e,(r)})` against `−(r/2π) Σ_j a_j(r)/j! c_{2j+1}` on
/// every odd coordinate subtorus.
pub fn check_r_deformation(c: &Connection, r: f64, tol: f64) -> Result<CheckEntry> {
    require_flat(c)?;
    let dim = c.dim();
    let cs = cs_form(&hermitian_part(c), &r_deformation(c, real(r)))?;
    let mut rhs_form = TrigPolyForm::zero(dim, 1);
    for j in 0..=(dim - 1) / 2 {
        let w = a_coeff(j, real(r)) / factorial(j) * (-r / (2.0 * PI));
        rhs_form += &chern_odd(c, j).scale(w);
    }
    let mut worst: Option<(f64, Complex64, Complex64)> = None;
    let mut parts = BTreeMap::new();
    for cycle in SubTorus::odd_coordinate_cycles(dim) {
        let l = l_pairing(&cs, &cycle)?;
        let rr = l_pairing(&rhs_form, &cycle)?;
        parts.insert(format!("lhs[{}]", cycle.label()), l);
        parts.insert(format!("rhs[{}]", cycle.label()), rr);
        let res = (l - rr).norm();
        if worst.is_none_or(|(w, _, _)| res > w) {
            worst = Some((res, l, rr));
        }
    }
    let (_, l, rr) = worst.expect("at least one odd cycle");
    let mut e = CheckEntry::new(
        "r_deformation",
        "transgression of the r-deformation against odd Chern forms",
        l,
        rr,
        CheckMode::Absolute,
        tol,
    );
    e.parts = parts;
    Ok(e.with_part("r", real(r)))
}

/// `η̄(D_1) − η̄(D_0) ≡ ∫ L CS(∇_0, ∇_1)` mod `Z` on the circle.
pub fn check_gilkey(c0: &Connection, c1: &Connection, tol: f64) -> Result<CheckEntry> {
    require_circle(c0, "the variation formula")?;
    require_circle(c1, "the variation formula")?;
    let e0 = eta_s1(c0)?;
    let e1 = eta_s1(c1)?;
    let cs = l_pairing(&cs_form(c0, c1)?, &SubTorus::full(1))?;
    Ok(CheckEntry::new(
        "gilkey",
        "variation of reduced eta by the Chern-Simons pairing",
        e1.reduced - e0.reduced,
        cs,
        CheckMode::ModZ,
        tol,
    )
    .with_part("eta0", e0.reduced)
    .with_part("eta1", e1.reduced))
}

/// Options for [`check_variation_c`].
#[derive(Clone, Copy, Debug)]
pub struct VariationOptions {
    pub cutoff: usize,
    pub track: TrackOptions,
}

impl Default for VariationOptions {
    fn default() -> Self {
        Self {
            cutoff: 10,
            track: TrackOptions::default(),
        }
    }
}

/// `η̄(D_1) − η̄(D_0) = sf + ∫ L CS(∇_0, ∇_1)` exactly in `C`, along a path of
/// circle connections.
pub fn check_variation_c<F>(path: F, opts: &VariationOptions, tol: f64) -> Result<CheckEntry>
where
    F: Fn(f64) -> Result<Connection>,
{
    let c0 = path(0.0)?;
    let c1 = path(1.0)?;
    require_circle(&c0, "the complex variation formula")?;
    let e0 = eta_s1(&c0)?;
    let e1 = eta_s1(&c1)?;
    let track = track_connection_path(&path, opts.cutoff, &opts.track)?;
    let sf = spectral_flow(&track)?;
    let cs = l_pairing(&cs_form(&c0, &c1)?, &SubTorus::full(1))?;
    Ok(CheckEntry::new(
        "variation_c",
        "complex variation formula with spectral flow",
        e1.reduced - e0.reduced,
        real(sf.value as f64) + cs,
        CheckMode::Absolute,
        tol,
    )
    .with_part("eta0", e0.reduced)
    .with_part("eta1", e1.reduced)
    .with_part("sf", real(sf.value as f64))
    .with_part("cs", cs))
}

/// Gauge spectral flow `sf(D, D^{g}) = ∫ L ch(g)` on the circle.
pub fn check_gauge_flow(c: &Connection, w: i64, opts: &VariationOptions) -> Result<CheckEntry> {
    require_circle(c, "the gauge spectral flow")?;
    let track = track_connection_path(|t| gauge_path(c, w, t), opts.cutoff, &opts.track)?;
    let sf = spectral_flow(&track)?;
    let g = GaugeMap::circle_winding(c.rank(), w)?;
    let ch = l_pairing(&odd_chern_char(&g, Branch::Principal), &SubTorus::full(1))?;
    Ok(CheckEntry::new(
        "gauge_flow",
        "spectral flow of a gauge path equals the odd Chern character",
        real(sf.value as f64),
        ch,
        CheckMode::Integer,
        1e-9,
    )
    .with_part("w", real(w as f64)))
}

/// `∫ L CS(∇^e, ∇) = Σ_i a_i i^i`, split into real and imaginary parts.
pub fn re_im_pairing(c: &Connection) -> Result<(f64, f64)> {
    let poly = cs_r_poly(c)?;
    let full = SubTorus::full(c.dim());
    let mut re = 0.0;
    let mut im = 0.0;
    for (i, a) in poly.coeffs().iter().enumerate() {
        if a.is_zero() || i > c.dim() {
            continue;
        }
        let p = l_pairing(&a.degree_part(c.dim()), &full)?;
        let sign = if (i / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if i % 2 == 0 {
            re += sign * p.re;
        } else {
            im += sign * p.re;
        }
    }
    Ok((re, im))
}

/// `Re η̄(D) ≡ η̄(D^e) + Σ_{i even} (−1)^{i/2} ∫ L a_i` mod `Z` and
/// `Im η̄(D) = Σ_{i odd} (−1)^{(i−1)/2} ∫ L a_i`.
pub fn check_re_im(c: &Connection, tol: f64) -> Result<CheckEntry> {
    require_circle(c, "the real/imaginary decomposition")?;
    let full = eta_s1(c)?;
    let herm = eta_s1(&hermitian_part(c))?;
    let (re, im) = re_im_pairing(c)?;
    Ok(CheckEntry::new(
        "re_im",
        "real and imaginary parts of reduced eta via the r-polynomial",
        full.reduced,
        Complex64::new(herm.reduced.re + re, im),
        CheckMode::ModZ,
        tol,
    )
    .with_part("eta_hermitian", herm.reduced))
}

/// `Ψ` computed locally and, on the circle, spectrally.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsiValue {
    pub local: f64,
    pub spectral: Option<f64>,
    /// `r(α) = exp(π Ψ)`.
    pub r_alpha: f64,
}

/// `Ψ = −(1/2π) ∫ L Σ_{j≥1} 2^{2j} j!/(2j+1)! c_{2j+1}`; on the circle also
/// `Im η̄ + (1/2π) ∫ L c_1`.
pub fn psi(c: &Connection) -> Result<PsiValue> {
    require_flat(c)?;
    let dim = c.dim();
    let full = SubTorus::full(dim);
    let mut local = 0.0;
    for j in 1..=(dim - 1) / 2 {
        if 2 * j + 1 == dim {
            let p = l_pairing(&chern_odd(c, j), &full)?;
            local -= imaginary_pairing_weight(j) * p.re / (2.0 * PI);
        }
    }
    let spectral = if dim == 1 {
        let eta = eta_s1(c)?;
        let c1 = l_pairing(&chern_odd(c, 0), &full)?;
        Some(eta.reduced.im + c1.re / (2.0 * PI))
    } else {
        None
    };
    Ok(PsiValue {
        local,
        spectral,
        r_alpha: (PI * local).exp(),
    })
}

/// Maximal variation of `Ψ` over samples of a path of flat connections.
pub fn check_psi_path<F>(path: F, samples: usize, tol: f64) -> Result<CheckEntry>
where
    F: Fn(f64) -> Result<Connection>,
{
    let samples = samples.max(2);
    let first = psi(&path(0.0)?)?;
    let mut worst = (0.0, first.local);
    let mut parts = BTreeMap::new();
    for k in 0..samples {
        let t = k as f64 / (samples - 1) as f64;
        let p = psi(&path(t)?)?;
        parts.insert(format!("psi[{t:.4}]"), real(p.local));
        if let Some(s) = p.spectral {
            parts.insert(format!("psi_spectral[{t:.4}]"), real(s));
            let d = (s - p.local).abs();
            if d > worst.0 {
                worst = (d, s);
            }
        }
        let d = (p.local - first.local).abs();
        if d > worst.0 {
            worst = (d, p.local);
        }
    }
    let mut e = CheckEntry::new(
        "psi",
        "local constancy of Psi along flat paths",
        real(worst.1),
        real(first.local),
        CheckMode::Absolute,
        tol,
    );
    e.parts = parts;
    Ok(e)
}

/// `η̃ = ∫ L CS(∇̃^e, ∇)` for a flat reference `∇̃`, with the metric of `c`.
pub fn eta_tilde(c: &Connection, reference: &Connection) -> Result<Complex64> {
    require_flat(reference)?;
    let reference = reference.with_metric(c.metric().clone())?;
    let cs = cs_form(&hermitian_part(&reference), c)?;
    l_pairing(&cs, &SubTorus::full(c.dim()))
}

/// `Im η̃ = Im η̄(D)` on the circle.
pub fn check_eta_tilde(c: &Connection, reference: &Connection, tol: f64) -> Result<CheckEntry> {
    require_circle(c, "eta tilde")?;
    let tilde = eta_tilde(c, reference)?;
    let eta = eta_s1(c)?;
    Ok(CheckEntry::new(
        "eta_tilde",
        "imaginary part of eta tilde equals that of reduced eta",
        Complex64::new(0.0, tilde.im),
        Complex64::new(0.0, eta.reduced.im),
        CheckMode::Absolute,
        tol,
    )
    .with_part("eta_tilde", tilde))
}

/// Phase factor `e^{iπ rk(F) η̄(D_sig)}`.
pub fn bk_phase_factor(rank: usize, eta_sig_trivial: &EtaValue) -> Complex64 {
    bk_phase(rank, eta_sig_trivial)
}

/// Phase factor on the circle, with `η̄` of the untwisted operator computed
/// from its mode census.
pub fn check_bk_phase(rank: usize, tol: f64) -> Result<CheckEntry> {
    let trivial = eta_s1(&Connection::circle_diagonal(&[Complex64::new(0.0, 0.0)])?)?;
    let factor = bk_phase_factor(rank, &trivial);
    Ok(CheckEntry::new(
        "bk_phase",
        "modulus of the eta phase factor",
        real(factor.norm()),
        real(1.0),
        CheckMode::Absolute,
        tol,
    )
    .with_part("factor", factor)
    .with_part("eta_sig", trivial.reduced))
}

/// Same connection with another constant metric, for metric-independence
/// checks.
pub fn with_constant_metric(c: &Connection, h: crate::forms::CMat) -> Result<Connection> {
    c.with_metric(Metric::constant(c.dim(), h)?)
}
