use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;

use super::{hermitian_part, omega_metric, Connection};
use crate::error::{Error, Result};
use crate::forms::{Branch, TrigPolyForm, I};

/// `CS(∇_0, ∇_1)` along the linear path, principal branch.
pub fn cs_form(c0: &Connection, c1: &Connection) -> Result<TrigPolyForm> {
    cs_form_with_branch(c0, c1, Branch::Principal)
}

/// `−(2πi)^{-1/2} φ ∫_0^1 Tr[Ȧ_t exp(−Θ_t)] dt` for `A_t = (1−t)A_0 + tA_1`.
///
/// The integrand is a polynomial in `t` of degree at most `2⌊d/2⌋`, so a
/// Gauss–Legendre rule with `⌈d/2⌉ + 1` nodes integrates it exactly.
pub fn cs_form_with_branch(
    c0: &Connection,
    c1: &Connection,
    branch: Branch,
) -> Result<TrigPolyForm> {
    if c0.dim() != c1.dim() || c0.rank() != c1.rank() {
        return Err(Error::ShapeMismatch {
            op: "cs_form",
            ld: c0.dim(),
            lr: c0.rank(),
            rd: c1.dim(),
            rr: c1.rank(),
        });
    }
    let dim = c0.dim();
    let nodes = NonZeroUsize::new(dim.div_ceil(2) + 1).expect("positive");
    let rule = GaussLegendre::new(nodes);
    let a_dot = c1.form() - c0.form();
    let mut acc = TrigPolyForm::zero(dim, 1);
    for &(x, w) in rule.iter() {
        let t = 0.5 * (x + 1.0);
        let a_t = &c0.form().scale_re(1.0 - t) + &c1.form().scale_re(t);
        let theta = &a_t.ext_d() + &a_t.wedge(&a_t)?;
        let e = (-&theta).exp_nilpotent()?;
        acc += &a_dot.wedge(&e)?.trace().scale_re(0.5 * w);
    }
    Ok(acc
        .phi_normalize(branch)
        .scale(-branch.sqrt_two_pi_i().inv()))
}

/// `CS(∇^{F,e}, ∇^{F,e,(r)}) = Σ_{i=0}^{d} a_i r^i` with form coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct RPolynomial {
    coeffs: Vec<TrigPolyForm>,
}

impl RPolynomial {
    pub fn coeffs(&self) -> &[TrigPolyForm] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> &TrigPolyForm {
        &self.coeffs[i]
    }

    pub fn eval(&self, r: Complex64) -> TrigPolyForm {
        let mut out = TrigPolyForm::zero(self.coeffs[0].dim(), 1);
        let mut ri = Complex64::new(1.0, 0.0);
        for a in &self.coeffs {
            out += &a.scale(ri);
            ri *= r;
        }
        out
    }
}

type SPoly = Vec<TrigPolyForm>;

fn spoly_mul(p: &SPoly, q: &SPoly, max_power: usize) -> Result<SPoly> {
    let (dim, rank) = (p[0].dim(), p[0].rank());
    let mut out = vec![TrigPolyForm::zero(dim, rank); max_power + 1];
    for (i, a) in p.iter().enumerate() {
        for (j, b) in q.iter().enumerate() {
            if i + j <= max_power && !a.is_zero() && !b.is_zero() {
                out[i + j] += &a.wedge(b)?;
            }
        }
    }
    Ok(out)
}

/// Coefficients of the r-polynomial, computed exactly: along the path
/// `s = t r` the curvature is `Θ_e + s X + s² Y` with
/// `X = (i/2)(dω + [A^e, ω])`, `Y = −ω²/4`, and `∫_0^1 t^m dt = 1/(m+1)`.
pub fn cs_r_poly(c: &Connection) -> Result<RPolynomial> {
    let dim = c.dim();
    let rank = c.rank();
    let ae = hermitian_part(c).form().clone();
    let omega = omega_metric(c);
    let theta_e = &ae.ext_d() + &ae.wedge(&ae)?;
    let cov_omega = &(&omega.ext_d() + &ae.wedge(&omega)?) + &omega.wedge(&ae)?;
    let x = cov_omega.scale(I * 0.5);
    let y = omega.wedge(&omega)?.scale_re(-0.25);

    let max_power = dim.saturating_sub(1);
    let mut neg_theta: SPoly = vec![-&theta_e, -&x, -&y];
    neg_theta.resize(max_power + 1, TrigPolyForm::zero(dim, rank));
    neg_theta.truncate(max_power + 1);

    let mut exp_poly: SPoly = vec![TrigPolyForm::zero(dim, rank); max_power + 1];
    exp_poly[0] = TrigPolyForm::identity(dim, rank);
    let mut term: SPoly = exp_poly.clone();
    for n in 1.. {
        term = spoly_mul(&term, &neg_theta, max_power)?
            .into_iter()
            .map(|p| p.scale_re(1.0 / n as f64))
            .collect();
        if term.iter().all(TrigPolyForm::is_zero) {
            break;
        }
        for (e, p) in exp_poly.iter_mut().zip(&term) {
            *e += p;
        }
    }

    let branch = Branch::Principal;
    let norm = -branch.sqrt_two_pi_i().inv();
    let mut coeffs = vec![TrigPolyForm::zero(dim, 1); dim + 1];
    for (m, p) in exp_poly.iter().enumerate() {
        let integrand = omega.wedge(p)?.trace().scale(I * (0.5 / (m + 1) as f64));
        coeffs[m + 1] = integrand.phi_normalize(branch).scale(norm);
    }
    Ok(RPolynomial { coeffs })
}
