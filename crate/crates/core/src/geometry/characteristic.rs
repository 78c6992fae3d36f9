use num_complex::Complex64;
use num_rational::BigRational;

use super::{curvature, omega_metric, Connection, GaugeMap};
use crate::error::{Error, Result};
use crate::forms::{two_pi_i, Branch, TrigPolyForm};

/// Odd Chern form `c_{2j+1} = (2πi)^{-j} 2^{-(2j+1)} Tr[ω^{2j+1}]`.
pub fn chern_odd(c: &Connection, j: usize) -> TrigPolyForm {
    let deg = 2 * j + 1;
    if deg > c.dim() {
        return TrigPolyForm::zero(c.dim(), 1);
    }
    let omega = omega_metric(c);
    let factor = two_pi_i().powi(-(j as i32)) * 0.5f64.powi(deg as i32);
    omega.pow(deg).trace().scale(factor)
}

/// `a_j(r) = ∫_0^1 (1 + u² r²)^j du = Σ_m C(j, m) r^{2m} / (2m + 1)`.
pub fn a_coeff(j: usize, r: Complex64) -> Complex64 {
    let r2 = r * r;
    let mut binom = 1.0;
    let mut r2m = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    for m in 0..=j {
        sum += r2m * (binom / (2 * m + 1) as f64);
        binom = binom * (j - m) as f64 / (m + 1) as f64;
        r2m *= r2;
    }
    sum
}

/// `a_j` as an exact rational function of `r²`.
pub fn a_coeff_exact(j: usize, r_squared: &BigRational) -> BigRational {
    use num_rational::Ratio;
    let mut sum = BigRational::from_integer(0.into());
    let mut binom = BigRational::from_integer(1.into());
    let mut r2m = BigRational::from_integer(1.into());
    for m in 0..=j {
        sum += &binom * &r2m * Ratio::new(1.into(), (2 * m as i64 + 1).into());
        binom *= Ratio::new(((j - m) as i64).into(), ((m + 1) as i64).into());
        r2m *= r_squared;
    }
    sum
}

/// `ch(∇) = φ Tr[exp(−Θ)]`.
pub fn chern_character(c: &Connection, branch: Branch) -> TrigPolyForm {
    let theta = curvature(c);
    (-&theta)
        .exp_nilpotent()
        .expect("curvature has pure degree 2")
        .trace()
        .phi_normalize(branch)
}

/// Taylor coefficients of `(x/2) / tanh(x/2) = Σ B_{2k} x^{2k} / (2k)!` for
/// `k = 1..`.
const HALF_COTH_COEFFS: [f64; 6] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 1307674368000.0,
];

/// Hirzebruch L-form `φ det^{1/2}((R/2) / tanh(R/2))` of a curvature 2-form,
/// as `exp(½ Tr log f(R))`. Normalized so that its degree-0 part is 1; on a
/// flat torus it is the constant 1.
pub fn l_form(curv: &TrigPolyForm, branch: Branch) -> Result<TrigPolyForm> {
    if !curv.is_homogeneous(2) {
        return Err(Error::DegreeMismatch {
            expected: 2,
            found: curv.degrees().into_iter().find(|&p| p != 2).unwrap_or(0),
        });
    }
    let (dim, rank) = (curv.dim(), curv.rank());
    let r2 = curv.wedge(curv)?;
    let mut z = TrigPolyForm::zero(dim, rank);
    let mut power = TrigPolyForm::identity(dim, rank);
    for coeff in HALF_COTH_COEFFS {
        power = power.wedge(&r2)?;
        if power.is_zero() {
            break;
        }
        z += &power.scale_re(coeff);
    }
    let mut log = TrigPolyForm::zero(dim, rank);
    let mut zn = TrigPolyForm::identity(dim, rank);
    for n in 1.. {
        zn = zn.wedge(&z)?;
        if zn.is_zero() {
            break;
        }
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        log += &zn.scale_re(sign / n as f64);
    }
    let half_trace = log.trace().scale_re(0.5);
    Ok(half_trace.exp_nilpotent()?.phi_normalize(branch))
}

/// Odd Chern character of a gauge map,
/// `Σ_m (−1)^m m!/(2m+1)! (2πi)^{-(m+1)} Tr[(g^{-1}dg)^{2m+1}]`,
/// normalized so that its integral over the circle is the winding number of
/// `det g`.
pub fn odd_chern_char(gm: &GaugeMap, branch: Branch) -> TrigPolyForm {
    let theta = gm.maurer_cartan();
    let dim = theta.dim();
    let mut sum = TrigPolyForm::zero(dim, 1);
    let mut m = 0usize;
    while 2 * m < dim {
        let mut fact_ratio = 1.0; // m! / (2m+1)!
        for q in (m + 1)..=(2 * m + 1) {
            fact_ratio /= q as f64;
        }
        let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
        sum += &theta.pow(2 * m + 1).trace().scale_re(sign * fact_ratio);
        m += 1;
    }
    sum.phi_normalize(branch)
        .scale(branch.sqrt_two_pi_i().inv())
}

/// `2^{2j} j! / (2j+1)!`, the value of `a_j(i) / j!`.
pub fn imaginary_pairing_weight(j: usize) -> f64 {
    let mut w = 1.0;
    for q in 1..=j {
        w *= 4.0 * q as f64 / ((2 * q) as f64 * (2 * q + 1) as f64);
    }
    w
}
