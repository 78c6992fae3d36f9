//! Connections on trivialized Hermitian bundles over `T^d` and the
//! characteristic and transgression forms built from them.

mod characteristic;
mod transgression;

pub use characteristic::{
    a_coeff, a_coeff_exact, chern_character, chern_odd, imaginary_pairing_weight, l_form,
    odd_chern_char,
};
pub use transgression::{cs_form, cs_form_with_branch, cs_r_poly, RPolynomial};

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::{two_pi_i, CMat, TrigPolyForm, I};

const VALIDATION_TOL: f64 = 1e-10;

/// Hermitian metric `g^F` together with its inverse, both as 0-forms.
///
/// The inverse is carried explicitly because the inverse of a trigonometric
/// polynomial is generally not one; constant metrics compute it directly.
#[derive(Clone, Debug, PartialEq)]
pub struct Metric {
    g: TrigPolyForm,
    g_inv: TrigPolyForm,
}

impl Metric {
    pub fn identity(dim: usize, rank: usize) -> Self {
        Self {
            g: TrigPolyForm::identity(dim, rank),
            g_inv: TrigPolyForm::identity(dim, rank),
        }
    }

    /// Constant Hermitian positive-definite metric.
    pub fn constant(dim: usize, h: CMat) -> Result<Self> {
        let inv = h
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidMetric("metric matrix is singular".into()))?;
        Self::new(
            TrigPolyForm::constant(dim, h),
            TrigPolyForm::constant(dim, inv),
        )
    }

    /// `g = h† h` for an invertible 0-form `h` with known inverse.
    pub fn from_factor(h: &TrigPolyForm, h_inv: &TrigPolyForm) -> Result<Self> {
        let g = h.dagger().wedge(h)?;
        let g_inv = h_inv.wedge(&h_inv.dagger())?;
        Self::new(g, g_inv)
    }

    pub fn new(g: TrigPolyForm, g_inv: TrigPolyForm) -> Result<Self> {
        if g.dim() != g_inv.dim() || g.rank() != g_inv.rank() {
            return Err(Error::InvalidMetric(
                "metric and inverse differ in shape".into(),
            ));
        }
        if !g.is_homogeneous(0) || !g_inv.is_homogeneous(0) {
            return Err(Error::InvalidMetric("metric must be a 0-form".into()));
        }
        if g.distance(&g.dagger()) > VALIDATION_TOL {
            return Err(Error::InvalidMetric("metric is not Hermitian".into()));
        }
        let id = TrigPolyForm::identity(g.dim(), g.rank());
        if g.wedge(&g_inv)?.distance(&id) > VALIDATION_TOL {
            return Err(Error::InvalidMetric("g * g_inv != identity".into()));
        }
        for x in sample_grid(g.dim()) {
            let gx = g.eval_function(&x);
            let herm = (&gx + gx.adjoint()) * Complex64::new(0.5, 0.0);
            let min = herm
                .symmetric_eigenvalues()
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            if min <= 0.0 {
                return Err(Error::InvalidMetric(format!(
                    "metric not positive definite at {x:?} (min eigenvalue {min:e})"
                )));
            }
        }
        Ok(Self { g, g_inv })
    }

    pub fn g(&self) -> &TrigPolyForm {
        &self.g
    }

    pub fn g_inv(&self) -> &TrigPolyForm {
        &self.g_inv
    }

    pub fn is_identity(&self) -> bool {
        self.g
            .distance(&TrigPolyForm::identity(self.g.dim(), self.g.rank()))
            == 0.0
    }
}

/// Spot-check points: 3 per axis up to `T^3`, 2 per axis beyond.
fn sample_grid(dim: usize) -> Vec<Vec<f64>> {
    let pts: &[f64] = if dim <= 3 {
        &[0.0, 0.37, 0.71]
    } else {
        &[0.13, 0.62]
    };
    let mut out = vec![Vec::new()];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|p| {
                pts.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out
}

/// Invertible matrix-valued function `g : T^d → GL_r(C)` with explicit inverse.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeMap {
    g: TrigPolyForm,
    g_inv: TrigPolyForm,
}

impl GaugeMap {
    pub fn new(g: TrigPolyForm, g_inv: TrigPolyForm) -> Result<Self> {
        if !g.is_homogeneous(0) || !g_inv.is_homogeneous(0) {
            return Err(Error::InvalidGauge("gauge map must be a 0-form".into()));
        }
        let id = TrigPolyForm::identity(g.dim(), g.rank());
        let left = g_inv
            .wedge(&g)
            .map_err(|e| Error::InvalidGauge(e.to_string()))?;
        let right = g.wedge(&g_inv)?;
        if left.distance(&id) > VALIDATION_TOL || right.distance(&id) > VALIDATION_TOL {
            return Err(Error::InvalidGauge("g_inv is not the inverse of g".into()));
        }
        Ok(Self { g, g_inv })
    }

    /// `diag(e^{2πi w_1·x}, …, e^{2πi w_r·x})`.
    pub fn diagonal_windings(dim: usize, windings: &[Vec<i64>]) -> Result<Self> {
        let r = windings.len();
        let mut g = TrigPolyForm::zero(dim, r);
        let mut g_inv = TrigPolyForm::zero(dim, r);
        for (i, w) in windings.iter().enumerate() {
            if w.len() != dim {
                return Err(Error::InvalidGauge(format!(
                    "winding vector {w:?} has wrong length"
                )));
            }
            let mut e = CMat::zeros(r, r);
            e[(i, i)] = Complex64::new(1.0, 0.0);
            g.add_term(w.clone(), 0, e.clone());
            g_inv.add_term(w.iter().map(|k| -k).collect(), 0, e);
        }
        Self::new(g, g_inv)
    }

    /// `diag(e^{2πi w x}, 1, …, 1)` on the circle.
    pub fn circle_winding(rank: usize, w: i64) -> Result<Self> {
        let mut ws = vec![vec![0]; rank];
        ws[0] = vec![w];
        Self::diagonal_windings(1, &ws)
    }

    /// `g = I + n` for a pointwise nilpotent 0-form `n`, inverse by the finite
    /// geometric series.
    pub fn unipotent(n: &TrigPolyForm) -> Result<Self> {
        let id = TrigPolyForm::identity(n.dim(), n.rank());
        let mut g_inv = id.clone();
        let mut term = id.clone();
        for _ in 0..n.rank() {
            term = -&term.wedge(n)?;
            g_inv += &term;
        }
        Self::new(&id + n, g_inv)
    }

    pub fn g(&self) -> &TrigPolyForm {
        &self.g
    }

    pub fn g_inv(&self) -> &TrigPolyForm {
        &self.g_inv
    }

    /// Maurer–Cartan form `g^{-1} dg`.
    pub fn maurer_cartan(&self) -> TrigPolyForm {
        self.g_inv.wedge(&self.g.ext_d()).expect("same shape")
    }
}

/// A connection `∇ = d + A` on the trivial bundle `T^d × C^r` with metric.
#[derive(Clone, Debug, PartialEq)]
pub struct Connection {
    a: TrigPolyForm,
    metric: Metric,
}

impl Connection {
    pub fn new(a: TrigPolyForm, metric: Metric) -> Result<Self> {
        if a.dim() != metric.g.dim() || a.rank() != metric.g.rank() {
            return Err(Error::InvalidConnection(format!(
                "connection form (dim {}, rank {}) does not match metric (dim {}, rank {})",
                a.dim(),
                a.rank(),
                metric.g.dim(),
                metric.g.rank()
            )));
        }
        if !a.is_homogeneous(1) {
            return Err(Error::InvalidConnection(
                "connection form must have pure degree 1".into(),
            ));
        }
        Ok(Self { a, metric })
    }

    /// `A = Σ_j A_j dx_j` with constant matrices and the identity metric.
    pub fn from_constant(components: &[CMat]) -> Result<Self> {
        let dim = components.len();
        let rank = components
            .first()
            .map(|m| m.nrows())
            .ok_or_else(|| Error::InvalidConnection("no components".into()))?;
        let mut a = TrigPolyForm::zero(dim, rank);
        for (j, m) in components.iter().enumerate() {
            if m.nrows() != rank || m.ncols() != rank {
                return Err(Error::InvalidConnection("components differ in size".into()));
            }
            a += &TrigPolyForm::monomial(dim, m.clone(), &vec![0; dim], &[j])?;
        }
        Self::new(a, Metric::identity(dim, rank))
    }

    /// Diagonal constant connection on the circle with `A = diag(2πi μ_m) dx`,
    /// so that its mode spectrum is `{2π(k + μ_m)}`.
    pub fn circle_diagonal(mus: &[Complex64]) -> Result<Self> {
        let diag = DVector::from_iterator(mus.len(), mus.iter().map(|&mu| two_pi_i() * mu));
        Self::from_constant(&[CMat::from_diagonal(&diag)])
    }

    pub fn with_metric(&self, metric: Metric) -> Result<Self> {
        Self::new(self.a.clone(), metric)
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn rank(&self) -> usize {
        self.a.rank()
    }

    pub fn form(&self) -> &TrigPolyForm {
        &self.a
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn is_constant(&self) -> bool {
        self.a.is_constant()
    }

    /// The constant matrices `A_j` of a constant connection.
    pub fn constant_components(&self) -> Result<Vec<CMat>> {
        if !self.is_constant() {
            return Err(Error::NotConstant(
                "connection form has nonzero frequencies".into(),
            ));
        }
        Ok((0..self.dim())
            .map(|j| self.a.constant_coefficient(&[j]))
            .collect())
    }

    /// The connection with form `A + δ`, same metric.
    pub fn shifted(&self, delta: &TrigPolyForm) -> Result<Self> {
        Self::new(&self.a + delta, self.metric.clone())
    }

    /// `g^{-1} ∇ g = g^{-1} A g + g^{-1} dg`; the metric is pulled back to
    /// `g† h g` so that unitarity is preserved.
    pub fn gauge_transform(&self, gm: &GaugeMap) -> Result<Self> {
        let a = &gm.g_inv.wedge(&self.a)?.wedge(&gm.g)? + &gm.maurer_cartan();
        let h = gm.g.dagger().wedge(&self.metric.g)?.wedge(&gm.g)?;
        let h_inv = gm
            .g_inv
            .wedge(&self.metric.g_inv)?
            .wedge(&gm.g_inv.dagger())?;
        Self::new(a, Metric::new(h, h_inv)?)
    }

    /// Linear interpolation `(1 − t) A_0 + t A_1`; the metric of `self` is kept.
    pub fn lerp(&self, other: &Self, t: f64) -> Result<Self> {
        if self.dim() != other.dim() || self.rank() != other.rank() {
            return Err(Error::ShapeMismatch {
                op: "lerp",
                ld: self.dim(),
                lr: self.rank(),
                rd: other.dim(),
                rr: other.rank(),
            });
        }
        let a = &self.a.scale_re(1.0 - t) + &other.a.scale_re(t);
        Self::new(a, self.metric.clone())
    }

    pub fn is_flat(&self, tol: f64) -> bool {
        curvature(self).is_zero_within(tol)
    }
}

/// `Θ = dA + A ∧ A`.
pub fn curvature(c: &Connection) -> TrigPolyForm {
    &c.a.ext_d() + &c.a.wedge(&c.a).expect("same shape")
}

/// `ω(F, g^F) = g^{-1}(dg − A† g − g A)`, the difference between the metric
/// adjoint connection and `∇`.
pub fn omega_metric(c: &Connection) -> TrigPolyForm {
    let g = &c.metric.g;
    let inner =
        &(&g.ext_d() - &c.a.dagger().wedge(g).expect("shape")) - &g.wedge(&c.a).expect("shape");
    c.metric.g_inv.wedge(&inner).expect("shape")
}

/// The metric adjoint `∇ + ω`.
pub fn adjoint_connection(c: &Connection) -> Connection {
    c.shifted(&omega_metric(c)).expect("degree-1 shift")
}

/// `∇^{F,e} = ∇ + ω/2`.
pub fn hermitian_part(c: &Connection) -> Connection {
    c.shifted(&omega_metric(c).scale_re(0.5))
        .expect("degree-1 shift")
}

/// `∇^{F,e,(r)} = ∇^{F,e} + (i r / 2) ω`; metric compatible for real `r`,
/// equal to `∇` at `r = i` and to the adjoint at `r = −i`.
pub fn r_deformation(c: &Connection, r: Complex64) -> Connection {
    let omega = omega_metric(c);
    let delta = omega.scale(Complex64::new(0.5, 0.0) + I * r * 0.5);
    c.shifted(&delta).expect("degree-1 shift")
}

/// Parallel transport around the loop `s ↦ base + s e_axis`, i.e. the
/// solution at `s = 1` of `P' = −A_axis P`, `P(0) = I`. For constant `A` this
/// is `exp(−A_axis)`.
pub fn holonomy(c: &Connection, axis: usize, base: &[f64], steps: usize) -> Result<CMat> {
    if axis >= c.dim() || base.len() != c.dim() {
        return Err(Error::InvalidArgument(
            "holonomy axis or base point out of range".into(),
        ));
    }
    if c.is_constant() {
        let a = c.a.constant_coefficient(&[axis]);
        return Ok((-a).exp());
    }
    let mask = 1u32 << axis;
    let coeff = |s: f64| -> CMat {
        let mut x = base.to_vec();
        x[axis] = base[axis] + s;
        c.a.evaluate(&x)
            .remove(&mask)
            .unwrap_or_else(|| CMat::zeros(c.rank(), c.rank()))
    };
    let h = 1.0 / steps as f64;
    let mut p = CMat::identity(c.rank(), c.rank());
    for n in 0..steps {
        let s = n as f64 * h;
        let (a0, am, a1) = (coeff(s), coeff(s + 0.5 * h), coeff(s + h));
        let hc = Complex64::new(h, 0.0);
        let k1 = -(&a0 * &p);
        let k2 = -(&am * (&p + &k1 * (hc * 0.5)));
        let k3 = -(&am * (&p + &k2 * (hc * 0.5)));
        let k4 = -(&a1 * (&p + &k3 * hc));
        p += (k1 + k2 * Complex64::new(2.0, 0.0) + k3 * Complex64::new(2.0, 0.0) + k4) * (hc / 6.0);
    }
    Ok(p)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConnectionRepr {
    dim: usize,
    rank: usize,
    #[serde(rename = "A")]
    a: TrigPolyForm,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    g: Option<TrigPolyForm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    g_inv: Option<TrigPolyForm>,
}

impl TryFrom<ConnectionRepr> for Connection {
    type Error = Error;

    fn try_from(r: ConnectionRepr) -> Result<Self> {
        if r.a.dim() != r.dim || r.a.rank() != r.rank {
            return Err(Error::Schema(
                "connection form does not match declared dim/rank".into(),
            ));
        }
        let metric = match (r.g, r.g_inv) {
            (None, None) => Metric::identity(r.dim, r.rank),
            (Some(g), Some(g_inv)) => Metric::new(g, g_inv)?,
            (Some(g), None) if g.is_constant() => {
                Metric::constant(r.dim, g.constant_coefficient(&[]))?
            }
            (Some(_), None) => {
                return Err(Error::Schema(
                    "a non-constant metric needs an explicit g_inv".into(),
                ))
            }
            (None, Some(_)) => return Err(Error::Schema("g_inv given without g".into())),
        };
        Connection::new(r.a, metric).map_err(|e| Error::Schema(e.to_string()))
    }
}

impl Serialize for Connection {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let ident = self.metric.is_identity();
        ConnectionRepr {
            dim: self.dim(),
            rank: self.rank(),
            a: self.a.clone(),
            g: (!ident).then(|| self.metric.g.clone()),
            g_inv: (!ident).then(|| self.metric.g_inv.clone()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Connection {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = ConnectionRepr::deserialize(d)?;
        Connection::try_from(repr).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests;
