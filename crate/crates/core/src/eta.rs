//! Eta invariants: Hurwitz zeta, closed forms on the circle, heat-smoothed
//! estimates and the Braverman–Kappeler variant.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::{two_pi_i, I};
use crate::geometry::{holonomy, Connection};
use crate::spectral::{eigenvalues, spectrum, OperatorTruncation};

/// `B_{2k} / (2k)!` for `k = 1..=12`.
const BERNOULLI_OVER_FACT: [f64; 12] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 1307674368000.0,
    1.0 / 74724249600.0,
    -3617.0 / 10670622842880000.0,
    43867.0 / 5109094217170944000.0,
    -174611.0 / 802857662698291200000.0,
    77683.0 / 14101100039391805440000.0,
    -236364091.0 / 1693824136731743669452800000.0,
];

const EM_SHIFT: usize = 30;

/// Hurwitz zeta `ζ(s, a) = Σ_{n≥0} (n + a)^{-s}` continued to all `s ≠ 1` by
/// Euler–Maclaurin summation. Powers use the principal branch.
pub fn hurwitz_zeta(s: Complex64, a: Complex64) -> Result<Complex64> {
    if a.re <= 0.0 {
        return Err(Error::Domain(format!(
            "Hurwitz zeta needs Re a > 0, got a = {a}"
        )));
    }
    if (s - 1.0).norm() < 1e-14 {
        return Err(Error::Domain("Hurwitz zeta has a pole at s = 1".into()));
    }
    let pow = |x: Complex64, e: Complex64| (e * x.ln()).exp();
    let mut sum = Complex64::new(0.0, 0.0);
    for n in 0..EM_SHIFT {
        sum += pow(a + n as f64, -s);
    }
    let big = a + EM_SHIFT as f64;
    sum += pow(big, 1.0 - s) / (s - 1.0);
    sum += pow(big, -s) * 0.5;
    // rising factorial s (s+1) ⋯ (s+2k−2) times big^{−s−2k+1}
    let mut rising = s;
    let mut power = pow(big, -s - 1.0);
    let inv_sq = (big * big).inv();
    for (k, b) in BERNOULLI_OVER_FACT.iter().enumerate() {
        let term = rising * power * *b;
        sum += term;
        if term.norm() < 1e-18 * sum.norm().max(1e-300) {
            break;
        }
        let m = 2.0 * k as f64;
        rising *= (s + m + 1.0) * (s + m + 2.0);
        power *= inv_sq;
    }
    Ok(sum)
}

/// `η(0)` with its kernel dimension and reduced value `(η + h) / 2`.
///
/// Only the fractional part of `Re reduced` is invariant under deformation;
/// the imaginary part is exact.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EtaValue {
    pub eta: Complex64,
    pub kernel_dim: usize,
    pub reduced: Complex64,
    pub mod_z_note: bool,
}

impl EtaValue {
    pub fn new(eta: Complex64, kernel_dim: usize) -> Self {
        Self {
            eta,
            kernel_dim,
            reduced: (eta + kernel_dim as f64) * 0.5,
            mod_z_note: true,
        }
    }
}

/// Classification threshold for eigenvalues on the imaginary axis.
pub const AXIS_TOL: f64 = 1e-12;

/// `μ − ⌊Re μ⌋`, so that `0 ≤ Re` of the result `< 1`.
pub fn fractional_exponent(mu: Complex64) -> Complex64 {
    let mut f = mu - mu.re.floor();
    if f.re >= 1.0 - AXIS_TOL {
        f -= 1.0;
    }
    if f.re < AXIS_TOL {
        f.re = 0.0;
    }
    f
}

/// Closed-form η of the circle operator with spectrum `{2π(n + μ_k)}`.
///
/// Each exponent is reduced to `0 ≤ Re μ < 1`. A zero eigenvalue counts in
/// the kernel; a nonzero eigenvalue on the imaginary axis is counted with the
/// half plane `Re λ ≥ 0`.
pub fn eta_s1_closed(mus: &[Complex64]) -> Result<EtaValue> {
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let mut eta = zero;
    let mut kernel = 0;
    for &mu in mus {
        let f = fractional_exponent(mu);
        if f.re == 0.0 {
            if f.im.abs() <= AXIS_TOL {
                kernel += 1;
            } else {
                eta += one + hurwitz_zeta(zero, one + f)? - hurwitz_zeta(zero, one - f)?;
            }
        } else {
            eta += hurwitz_zeta(zero, f)? - hurwitz_zeta(zero, one - f)?;
        }
    }
    Ok(EtaValue::new(eta, kernel))
}

/// Exponents `μ` of a connection on the circle: the mode spectrum is
/// `{2π(n + μ)}`. Constant connections use the eigenvalues of `A / 2πi`;
/// otherwise `μ = −log(h) / 2πi` for the eigenvalues `h` of the holonomy.
pub fn s1_exponents(c: &Connection) -> Result<Vec<Complex64>> {
    if c.dim() != 1 {
        return Err(Error::InvalidArgument(format!(
            "circle exponents need dimension 1, got {}",
            c.dim()
        )));
    }
    if c.is_constant() {
        let a = c.constant_components()?.remove(0);
        return Ok(eigenvalues(&a)?
            .into_iter()
            .map(|z| z / two_pi_i())
            .collect());
    }
    let hol = holonomy(c, 0, &[0.0], HOLONOMY_STEPS)?;
    Ok(eigenvalues(&hol)?
        .into_iter()
        .map(|h| -h.ln() / two_pi_i())
        .collect())
}

/// RK4 steps used for the holonomy of non-constant circle connections.
pub const HOLONOMY_STEPS: usize = 8192;

/// `η̄` of the circle operator twisted by `c`.
pub fn eta_s1(c: &Connection) -> Result<EtaValue> {
    eta_s1_closed(&s1_exponents(c)?)
}

/// Default smoothing parameters for [`eta_heat_estimate`].
pub const DEFAULT_EPS_GRID: [f64; 3] = [4e-4, 2e-4, 1e-4];

/// `η_ε = Σ_λ sign(λ) erfc(√ε |λ|)` on the grid, extrapolated to `ε → 0` by
/// Neville interpolation in `√ε`. Reliable when the small-`ε` expansion has
/// no fractional powers beyond the fitted ones, as on the circle and on flat
/// tori with symmetric spectra.
pub fn eta_heat_estimate(t: &OperatorTruncation, eps_grid: &[f64]) -> Result<Complex64> {
    if !t.formally_self_adjoint {
        return Err(Error::NotSelfAdjoint);
    }
    if eps_grid.is_empty() || eps_grid.iter().any(|&e| e.is_nan() || e <= 0.0) {
        return Err(Error::InvalidArgument(
            "eps grid must be nonempty and positive".into(),
        ));
    }
    let spec = spectrum(t)?;
    let scale = spec.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let xs: Vec<f64> = eps_grid.iter().map(|e| e.sqrt()).collect();
    let ys: Vec<f64> = eps_grid
        .iter()
        .map(|&eps| {
            let root = eps.sqrt();
            spec.iter()
                .filter(|z| z.re.abs() > 1e-10 * scale)
                .map(|z| z.re.signum() * libm::erfc(root * z.re.abs()))
                .sum()
        })
        .collect();
    Ok(Complex64::new(neville_at_zero(&xs, &ys), 0.0))
}

fn neville_at_zero(xs: &[f64], ys: &[f64]) -> f64 {
    let mut p = ys.to_vec();
    let n = xs.len();
    for level in 1..n {
        for i in 0..(n - level) {
            let (xi, xj) = (xs[i], xs[i + level]);
            p[i] = (xj * p[i] - xi * p[i + 1]) / (xj - xi);
        }
    }
    p[0]
}

/// Number of eigenvalues `iλ` with `λ < 0`.
pub fn m_minus(spec: &[Complex64], tol: f64) -> usize {
    spec.iter()
        .filter(|z| z.re.abs() <= tol && z.im < -tol)
        .count()
}

/// `η_BK = η̄ − m₋`.
pub fn eta_bk(e: &EtaValue, m: usize) -> Complex64 {
    e.reduced - m as f64
}

/// Exponent census of the circle operator: eigenvalues `2π(n + μ)` with
/// `|n| ≤ cutoff`, used for `m₋` counts without an eigensolve.
pub fn s1_mode_spectrum(mus: &[Complex64], cutoff: i64) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = mus
        .iter()
        .flat_map(|&mu| {
            (-cutoff..=cutoff).map(move |n| (mu + n as f64) * (2.0 * std::f64::consts::PI))
        })
        .collect();
    crate::spectral::sort_spectrum(&mut out);
    out
}

/// `e^{iπ r η̄}` for the untwisted signature operator.
pub fn bk_phase(rank: usize, eta_sig_trivial: &EtaValue) -> Complex64 {
    (I * std::f64::consts::PI * rank as f64 * eta_sig_trivial.reduced).exp()
}
