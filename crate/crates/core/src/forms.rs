//! Matrix-valued differential forms on the flat torus `T^d = R^d / Z^d`.
//!
//! A [`TrigPolyForm`] is a finite sum of terms `M e^{2πi k·x} dx_I` with
//! `M` an `r × r` complex matrix, `k ∈ Z^d` and `I` a strictly increasing
//! index set. All operations are closed on this class, so nothing here is a
//! quadrature: the only error is floating-point roundoff in the stored
//! coefficients.
//!
//! Index sets are stored as bitmasks (bit `j` is `dx_{j+1}`), which makes the
//! ascending order canonical by construction.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;

/// Default absolute tolerance for structural comparisons.
pub const DEFAULT_TOL: f64 = 1e-12;

pub(crate) const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub(crate) fn two_pi_i() -> Complex64 {
    Complex64::new(0.0, 2.0 * PI)
}

/// Key of one term: Fourier frequency and the `dx_I` bitmask.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TermKey {
    pub freq: Vec<i64>,
    pub indices: u32,
}

impl TermKey {
    pub fn degree(&self) -> usize {
        self.indices.count_ones() as usize
    }

    pub fn is_constant(&self) -> bool {
        self.freq.iter().all(|&k| k == 0)
    }

    /// Zero-based coordinate indices in ascending order.
    pub fn index_list(&self) -> Vec<usize> {
        (0..32).filter(|j| self.indices & (1 << j) != 0).collect()
    }
}

/// Branch of `(2πi)^{1/2}` used by the normalization map.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    #[default]
    Principal,
    Flipped,
}

impl Branch {
    /// `sqrt(2π) e^{iπ/4}`, or its negative.
    pub fn sqrt_two_pi_i(self) -> Complex64 {
        let s = Complex64::from_polar((2.0 * PI).sqrt(), PI / 4.0);
        match self {
            Branch::Principal => s,
            Branch::Flipped => -s,
        }
    }
}

/// Sign of `dx_a ∧ dx_b` relative to `dx_{a ∪ b}`; `None` if they overlap.
fn merge_sign(a: u32, b: u32) -> Option<f64> {
    if a & b != 0 {
        return None;
    }
    let mut inversions = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        inversions += (a >> (j + 1)).count_ones();
        rest &= rest - 1;
    }
    Some(if inversions.is_multiple_of(2) { 1.0 } else { -1.0 })
}

/// A subtorus `{x : x_j free for j ∈ J, x_j = base_j otherwise}`, oriented by
/// increasing coordinate order.
#[derive(Clone, Debug, PartialEq)]
pub struct SubTorus {
    dim: usize,
    mask: u32,
    base: Vec<f64>,
}

impl SubTorus {
    /// `coords` are zero-based; `base` holds the fixed coordinate values (its
    /// entries for free coordinates are ignored).
    pub fn new(dim: usize, coords: &[usize], base: Vec<f64>) -> Result<Self> {
        if base.len() != dim {
            return Err(Error::InvalidArgument(format!(
                "subtorus base has {} entries for dimension {dim}",
                base.len()
            )));
        }
        let mut mask = 0u32;
        for &j in coords {
            if j >= dim || mask & (1 << j) != 0 {
                return Err(Error::InvalidArgument(format!(
                    "bad subtorus coordinate {j} for dimension {dim}"
                )));
            }
            mask |= 1 << j;
        }
        Ok(Self { dim, mask, base })
    }

    pub fn full(dim: usize) -> Self {
        Self {
            dim,
            mask: ((1u64 << dim) - 1) as u32,
            base: vec![0.0; dim],
        }
    }

    /// Every coordinate subtorus of odd dimension through the origin.
    pub fn odd_coordinate_cycles(dim: usize) -> Vec<Self> {
        (1u32..(1 << dim))
            .filter(|m| m.count_ones() % 2 == 1)
            .map(|mask| Self {
                dim,
                mask,
                base: vec![0.0; dim],
            })
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn mask(&self) -> u32 {
        self.mask
    }

    pub fn label(&self) -> String {
        let coords: Vec<String> = (0..self.dim)
            .filter(|j| self.mask & (1 << j) != 0)
            .map(|j| format!("x{}", j + 1))
            .collect();
        format!("T[{}]", coords.join(","))
    }
}

/// Matrix-valued differential form with trigonometric-polynomial coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPolyForm {
    dim: usize,
    rank: usize,
    terms: BTreeMap<TermKey, CMat>,
}

impl TrigPolyForm {
    pub fn zero(dim: usize, rank: usize) -> Self {
        assert!((1..=31).contains(&dim), "torus dimension must be in 1..=31");
        assert!(rank >= 1, "rank must be positive");
        Self {
            dim,
            rank,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(dim: usize, rank: usize) -> Self {
        Self::constant(dim, CMat::identity(rank, rank))
    }

    pub fn constant(dim: usize, m: CMat) -> Self {
        assert!(m.is_square());
        let mut f = Self::zero(dim, m.nrows());
        f.add_term(vec![0; dim], 0, m);
        f
    }

    /// Rank-1 constant.
    pub fn scalar(dim: usize, c: Complex64) -> Self {
        Self::constant(dim, CMat::from_element(1, 1, c))
    }

    /// `M e^{2πi k·x} dx_{i_1} ∧ … ∧ dx_{i_p}` with zero-based, possibly
    /// unsorted indices. Repeated indices give the zero form.
    pub fn monomial(dim: usize, m: CMat, freq: &[i64], indices: &[usize]) -> Result<Self> {
        if freq.len() != dim {
            return Err(Error::InvalidArgument(format!(
                "frequency {freq:?} has wrong length for dimension {dim}"
            )));
        }
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::InvalidArgument(
                "coefficient must be a nonempty square matrix".into(),
            ));
        }
        let mut mask = 0u32;
        let mut sign = 1.0;
        for &j in indices {
            if j >= dim {
                return Err(Error::InvalidArgument(format!(
                    "index {j} out of range for dimension {dim}"
                )));
            }
            match merge_sign(mask, 1 << j) {
                Some(s) => sign *= s,
                None => return Ok(Self::zero(dim, m.nrows())),
            }
            mask |= 1 << j;
        }
        let mut f = Self::zero(dim, m.nrows());
        f.add_term(freq.to_vec(), mask, m * Complex64::from(sign));
        Ok(f)
    }

    /// Accumulates `m` into the term `(freq, indices)`, pruning exact zeros.
    pub fn add_term(&mut self, freq: Vec<i64>, indices: u32, m: CMat) {
        debug_assert_eq!(freq.len(), self.dim);
        debug_assert_eq!(m.nrows(), self.rank);
        let key = TermKey { freq, indices };
        let remove = match self.terms.get_mut(&key) {
            Some(existing) => {
                *existing += &m;
                existing.iter().all(|z| *z == Complex64::new(0.0, 0.0))
            }
            None => {
                if m.iter().any(|z| *z != Complex64::new(0.0, 0.0)) {
                    self.terms.insert(key.clone(), m);
                }
                false
            }
        };
        if remove {
            self.terms.remove(&key);
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TermKey, &CMat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest entry modulus over all coefficients.
    pub fn max_abs(&self) -> f64 {
        self.terms
            .values()
            .flat_map(|m| m.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_zero_within(&self, tol: f64) -> bool {
        self.max_abs() <= tol
    }

    /// Max entrywise distance between canonical term maps.
    pub fn distance(&self, other: &Self) -> f64 {
        assert_eq!((self.dim, self.rank), (other.dim, other.rank));
        (self - other).max_abs()
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.dim == other.dim && self.rank == other.rank && self.distance(other) <= tol
    }

    /// Drops terms whose largest entry is at most `tol`.
    pub fn pruned(&self, tol: f64) -> Self {
        let mut out = Self::zero(self.dim, self.rank);
        for (k, m) in &self.terms {
            if m.iter().any(|z| z.norm() > tol) {
                out.terms.insert(k.clone(), m.clone());
            }
        }
        out
    }

    pub fn degrees(&self) -> BTreeSet<usize> {
        self.terms.keys().map(TermKey::degree).collect()
    }

    pub fn degree_part(&self, p: usize) -> Self {
        self.filter_terms(|k| k.degree() == p)
    }

    pub fn is_homogeneous(&self, p: usize) -> bool {
        self.terms.keys().all(|k| k.degree() == p)
    }

    /// True when every coefficient is independent of `x`.
    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(TermKey::is_constant)
    }

    fn filter_terms(&self, keep: impl Fn(&TermKey) -> bool) -> Self {
        let mut out = Self::zero(self.dim, self.rank);
        for (k, m) in &self.terms {
            if keep(k) {
                out.terms.insert(k.clone(), m.clone());
            }
        }
        out
    }

    /// Coefficient matrix of `dx_I` (zero-based indices) at frequency zero.
    pub fn constant_coefficient(&self, indices: &[usize]) -> CMat {
        let mask = indices.iter().fold(0u32, |m, &j| m | (1 << j));
        let key = TermKey {
            freq: vec![0; self.dim],
            indices: mask,
        };
        self.terms
            .get(&key)
            .cloned()
            .unwrap_or_else(|| CMat::zeros(self.rank, self.rank))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        if c == Complex64::new(0.0, 0.0) {
            return Self::zero(self.dim, self.rank);
        }
        let mut out = self.clone();
        for m in out.terms.values_mut() {
            *m *= c;
        }
        out
    }

    pub fn scale_re(&self, c: f64) -> Self {
        self.scale(Complex64::new(c, 0.0))
    }

    /// Left multiplication of every coefficient by a constant matrix.
    pub fn left_mul(&self, m: &CMat) -> Self {
        let mut out = Self::zero(self.dim, self.rank);
        for (k, c) in &self.terms {
            out.add_term(k.freq.clone(), k.indices, m * c);
        }
        out
    }

    fn check_shape(&self, other: &Self, op: &'static str) -> Result<()> {
        if self.dim != other.dim || self.rank != other.rank {
            return Err(Error::ShapeMismatch {
                op,
                ld: self.dim,
                lr: self.rank,
                rd: other.dim,
                rr: other.rank,
            });
        }
        Ok(())
    }

    /// Exterior product with matrix multiplication of coefficients.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        self.check_shape(other, "wedge")?;
        let mut out = Self::zero(self.dim, self.rank);
        for (ka, ma) in &self.terms {
            for (kb, mb) in &other.terms {
                let Some(sign) = merge_sign(ka.indices, kb.indices) else {
                    continue;
                };
                if ka.degree() + kb.degree() > self.dim {
                    continue;
                }
                let freq = ka.freq.iter().zip(&kb.freq).map(|(a, b)| a + b).collect();
                let mut prod = ma * mb;
                if sign < 0.0 {
                    prod.neg_mut();
                }
                out.add_term(freq, ka.indices | kb.indices, prod);
            }
        }
        Ok(out)
    }

    /// `n`-fold wedge power; `pow(0)` is the identity 0-form.
    pub fn pow(&self, n: usize) -> Self {
        let mut out = Self::identity(self.dim, self.rank);
        for _ in 0..n {
            if out.is_zero() {
                break;
            }
            out = out.wedge(self).expect("same shape");
        }
        out
    }

    /// Exterior derivative.
    pub fn ext_d(&self) -> Self {
        let mut out = Self::zero(self.dim, self.rank);
        for (k, m) in &self.terms {
            for (j, &kj) in k.freq.iter().enumerate() {
                if kj == 0 || k.indices & (1 << j) != 0 {
                    continue;
                }
                let below = (k.indices & ((1u32 << j) - 1)).count_ones();
                let sign = if below.is_multiple_of(2) { 1.0 } else { -1.0 };
                let c = two_pi_i() * (kj as f64 * sign);
                out.add_term(k.freq.clone(), k.indices | (1 << j), m * c);
            }
        }
        out
    }

    /// Entrywise matrix trace; the result has rank 1.
    pub fn trace(&self) -> Self {
        let mut out = Self::zero(self.dim, 1);
        for (k, m) in &self.terms {
            out.add_term(
                k.freq.clone(),
                k.indices,
                CMat::from_element(1, 1, m.trace()),
            );
        }
        out
    }

    /// Pointwise adjoint: coefficient ↦ conjugate transpose, `k ↦ −k`.
    pub fn dagger(&self) -> Self {
        let mut out = Self::zero(self.dim, self.rank);
        for (k, m) in &self.terms {
            let freq = k.freq.iter().map(|f| -f).collect();
            out.add_term(freq, k.indices, m.adjoint());
        }
        out
    }

    /// Integral over a coordinate subtorus with unit volume normalization.
    ///
    /// Terms of the right degree but a different index set pull back to zero.
    pub fn integrate(&self, cycle: &SubTorus) -> Result<CMat> {
        if cycle.dim != self.dim {
            return Err(Error::InvalidArgument(format!(
                "cycle in T^{} used on a form over T^{}",
                cycle.dim, self.dim
            )));
        }
        let p = cycle.degree();
        let mut acc = CMat::zeros(self.rank, self.rank);
        for (k, m) in &self.terms {
            if k.degree() != p {
                return Err(Error::DegreeMismatch {
                    expected: p,
                    found: k.degree(),
                });
            }
            if k.indices != cycle.mask {
                continue;
            }
            let mut phase = 0.0;
            let mut survives = true;
            for j in 0..self.dim {
                if cycle.mask & (1 << j) != 0 {
                    if k.freq[j] != 0 {
                        survives = false;
                        break;
                    }
                } else {
                    phase += k.freq[j] as f64 * cycle.base[j];
                }
            }
            if survives {
                acc += m * Complex64::from_polar(1.0, 2.0 * PI * phase);
            }
        }
        Ok(acc)
    }

    /// Scalar integral of the degree-`|J|` part of a rank-1 form.
    pub fn pair(&self, cycle: &SubTorus) -> Result<Complex64> {
        if self.rank != 1 {
            return Err(Error::InvalidArgument(
                "pairing expects a rank-1 form".into(),
            ));
        }
        Ok(self.degree_part(cycle.degree()).integrate(cycle)?[(0, 0)])
    }

    /// Exponential of a form with only even-degree (≥ 2) terms.
    pub fn exp_nilpotent(&self) -> Result<Self> {
        if let Some(k) = self
            .terms
            .keys()
            .find(|k| k.degree() == 0 || k.degree() % 2 == 1)
        {
            return Err(Error::NotNilpotent(format!(
                "term of degree {} in exponent",
                k.degree()
            )));
        }
        let mut out = Self::identity(self.dim, self.rank);
        let mut power = Self::identity(self.dim, self.rank);
        let mut n = 1.0;
        loop {
            power = power.wedge(self)?;
            if power.is_zero() {
                break;
            }
            power = power.scale_re(1.0 / n);
            out += &power;
            n += 1.0;
        }
        Ok(out)
    }

    /// Inverse of [`exp_nilpotent`](Self::exp_nilpotent): `log(1 + N)` for
    /// `self = 1 + N` with `N` of even degree ≥ 2.
    pub fn log_unipotent(&self) -> Result<Self> {
        let id = Self::identity(self.dim, self.rank);
        let n = self - &id;
        if let Some(k) = n
            .terms
            .keys()
            .find(|k| k.degree() == 0 || k.degree() % 2 == 1)
        {
            if n.terms[k].iter().any(|z| z.norm() > 0.0) {
                return Err(Error::NotNilpotent(format!(
                    "term of degree {} after removing 1",
                    k.degree()
                )));
            }
        }
        let n = n.pruned(0.0);
        let mut out = Self::zero(self.dim, self.rank);
        let mut power = id;
        let mut k = 1.0;
        loop {
            power = power.wedge(&n)?;
            if power.is_zero() {
                break;
            }
            let sign = if (k as i64) % 2 == 1 { 1.0 } else { -1.0 };
            out += &power.scale_re(sign / k);
            k += 1.0;
        }
        Ok(out)
    }

    /// The normalization `ω ∈ Λ^p ↦ (2πi)^{-p/2} ω` for the given branch.
    pub fn phi_normalize(&self, branch: Branch) -> Self {
        let s_inv = branch.sqrt_two_pi_i().inv();
        let mut out = Self::zero(self.dim, self.rank);
        for (k, m) in &self.terms {
            out.add_term(k.freq.clone(), k.indices, m * s_inv.powi(k.degree() as i32));
        }
        out
    }

    /// Coefficients of each `dx_I` evaluated at the point `x`.
    pub fn evaluate(&self, x: &[f64]) -> BTreeMap<u32, CMat> {
        assert_eq!(x.len(), self.dim);
        let mut out: BTreeMap<u32, CMat> = BTreeMap::new();
        for (k, m) in &self.terms {
            let phase: f64 = k.freq.iter().zip(x).map(|(&f, &xi)| f as f64 * xi).sum();
            let v = m * Complex64::from_polar(1.0, 2.0 * PI * phase);
            out.entry(k.indices)
                .and_modify(|acc| *acc += &v)
                .or_insert(v);
        }
        out
    }

    /// Value of the degree-0 part at `x`.
    pub fn eval_function(&self, x: &[f64]) -> CMat {
        self.evaluate(x)
            .remove(&0)
            .unwrap_or_else(|| CMat::zeros(self.rank, self.rank))
    }

    /// A rank-1 form is real valued iff its coefficients at `k` and `−k` are
    /// complex conjugates.
    pub fn is_real_valued(&self, tol: f64) -> bool {
        self.rank == 1 && {
            let conj = self.dagger();
            self.distance(&conj) <= tol
        }
    }
}

impl AddAssign<&TrigPolyForm> for TrigPolyForm {
    fn add_assign(&mut self, rhs: &TrigPolyForm) {
        assert_eq!(
            (self.dim, self.rank),
            (rhs.dim, rhs.rank),
            "shape mismatch in add"
        );
        for (k, m) in &rhs.terms {
            self.add_term(k.freq.clone(), k.indices, m.clone());
        }
    }
}

impl Add for &TrigPolyForm {
    type Output = TrigPolyForm;
    fn add(self, rhs: &TrigPolyForm) -> TrigPolyForm {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &TrigPolyForm {
    type Output = TrigPolyForm;
    fn sub(self, rhs: &TrigPolyForm) -> TrigPolyForm {
        let mut out = self.clone();
        out += &(-rhs);
        out
    }
}

impl Neg for &TrigPolyForm {
    type Output = TrigPolyForm;
    fn neg(self) -> TrigPolyForm {
        let mut out = self.clone();
        for m in out.terms.values_mut() {
            m.neg_mut();
        }
        out
    }
}

// JSON layout: {dim, rank, terms: [{k, I, re, im}]}, `I` one-based.

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermRepr {
    k: Vec<i64>,
    #[serde(rename = "I")]
    indices: Vec<usize>,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FormRepr {
    dim: usize,
    rank: usize,
    terms: Vec<TermRepr>,
}

impl From<&TrigPolyForm> for FormRepr {
    fn from(f: &TrigPolyForm) -> Self {
        let terms = f
            .terms
            .iter()
            .map(|(k, m)| TermRepr {
                k: k.freq.clone(),
                indices: k.index_list().into_iter().map(|j| j + 1).collect(),
                re: (0..f.rank)
                    .map(|i| (0..f.rank).map(|j| m[(i, j)].re).collect())
                    .collect(),
                im: (0..f.rank)
                    .map(|i| (0..f.rank).map(|j| m[(i, j)].im).collect())
                    .collect(),
            })
            .collect();
        FormRepr {
            dim: f.dim,
            rank: f.rank,
            terms,
        }
    }
}

impl TryFrom<FormRepr> for TrigPolyForm {
    type Error = Error;

    fn try_from(repr: FormRepr) -> Result<Self> {
        if !(1..=31).contains(&repr.dim) || repr.rank == 0 {
            return Err(Error::Schema(format!(
                "form needs 1 <= dim <= 31 and rank >= 1, got dim {} rank {}",
                repr.dim, repr.rank
            )));
        }
        let r = repr.rank;
        let mut out = TrigPolyForm::zero(repr.dim, r);
        for t in repr.terms {
            let shape_ok = t.re.len() == r
                && t.im.len() == r
                && t.re.iter().chain(&t.im).all(|row| row.len() == r);
            if !shape_ok {
                return Err(Error::Schema(format!("term coefficient is not {r}x{r}")));
            }
            let m = CMat::from_fn(r, r, |i, j| Complex64::new(t.re[i][j], t.im[i][j]));
            if t.indices.iter().any(|&j| j == 0 || j > repr.dim) {
                return Err(Error::Schema(format!(
                    "index set {:?} must lie in 1..={}",
                    t.indices, repr.dim
                )));
            }
            if t.indices.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Schema(format!(
                    "index set {:?} must be strictly increasing",
                    t.indices
                )));
            }
            let zero_based: Vec<usize> = t.indices.iter().map(|j| j - 1).collect();
            out += &TrigPolyForm::monomial(repr.dim, m, &t.k, &zero_based)
                .map_err(|e| Error::Schema(e.to_string()))?;
        }
        Ok(out)
    }
}

impl Serialize for TrigPolyForm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FormRepr::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for TrigPolyForm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = FormRepr::deserialize(d)?;
        TrigPolyForm::try_from(repr).map_err(serde::de::Error::custom)
    }
}
