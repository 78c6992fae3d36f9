//! Twisted odd signature operator on `T^d` in the Fourier basis.
//!
//! The operator `Γ Σ_j c(e_j) ∇_j` acts on `Λ^even(C^d) ⊗ C^r`. Exterior
//! algebra elements are indexed by bitmasks over the full `2^d`-dimensional
//! algebra; the even part is extracted after multiplying by `Γ`. On the
//! mode `e^{2πi k·x}` the covariant derivative `∇_j` becomes
//! `2πi k_j + A_j`, so constant connections give one block per mode.

use std::collections::HashMap;
use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::forms::{two_pi_i, CMat, I};
use crate::geometry::{omega_metric, Connection};

/// Clifford action `c(e_j) = e_j ∧ · − ι_{e_j}` on `Λ(C^d)` and the chirality
/// `Γ = i^{n+1} c(e_1)⋯c(e_d)`, `d = 2n + 1`.
#[derive(Clone, Debug)]
pub struct CliffordModel {
    dim: usize,
    clifford: Vec<CMat>,
    gamma: CMat,
    even: Vec<usize>,
    gamma_c_even: Vec<CMat>,
}

impl CliffordModel {
    pub fn new(dim: usize) -> Result<Self> {
        if dim.is_multiple_of(2) || dim > 15 {
            return Err(Error::InvalidArgument(format!(
                "signature operator needs an odd dimension <= 15, got {dim}"
            )));
        }
        let size = 1usize << dim;
        let clifford: Vec<CMat> = (0..dim)
            .map(|j| {
                let bit = 1usize << j;
                let mut m = CMat::zeros(size, size);
                for s in 0..size {
                    let below = (s & (bit - 1)).count_ones();
                    let sign = if below.is_multiple_of(2) { 1.0 } else { -1.0 };
                    if s & bit == 0 {
                        // exterior multiplication: e_S ↦ e_j ∧ e_S
                        m[(s | bit, s)] += Complex64::new(sign, 0.0);
                    } else {
                        // minus interior multiplication
                        m[(s & !bit, s)] -= Complex64::new(sign, 0.0);
                    }
                }
                m
            })
            .collect();
        let n = (dim - 1) / 2;
        let mut gamma = CMat::identity(size, size) * I.powi(n as i32 + 1);
        for c in &clifford {
            gamma *= c;
        }
        let even: Vec<usize> = (0..size).filter(|s| s.count_ones() % 2 == 0).collect();
        let gamma_c_even = clifford
            .iter()
            .map(|c| {
                let full = &gamma * c;
                CMat::from_fn(even.len(), even.len(), |a, b| full[(even[a], even[b])])
            })
            .collect();
        Ok(Self {
            dim,
            clifford,
            gamma,
            even,
            gamma_c_even,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `c(e_j)` on the full exterior algebra.
    pub fn clifford(&self, j: usize) -> &CMat {
        &self.clifford[j]
    }

    pub fn gamma(&self) -> &CMat {
        &self.gamma
    }

    /// `Γ c(e_j)` restricted to `Λ^even`.
    pub fn gamma_c_even(&self, j: usize) -> &CMat {
        &self.gamma_c_even[j]
    }

    pub fn even_dim(&self) -> usize {
        self.even.len()
    }
}

/// Block of the signature operator on the mode `k` for a constant connection.
pub fn build_sig_mode(c: &Connection, k: &[i64]) -> Result<CMat> {
    let model = CliffordModel::new(c.dim())?;
    sig_mode_with(&model, &c.constant_components()?, k)
}

fn sig_mode_with(model: &CliffordModel, comps: &[CMat], k: &[i64]) -> Result<CMat> {
    if k.len() != model.dim {
        return Err(Error::InvalidArgument(format!(
            "mode {k:?} has wrong length"
        )));
    }
    let r = comps[0].nrows();
    let mut block = CMat::zeros(model.even_dim() * r, model.even_dim() * r);
    for (j, a_j) in comps.iter().enumerate() {
        let cov = CMat::identity(r, r) * (two_pi_i() * k[j] as f64) + a_j;
        block += model.gamma_c_even(j).kronecker(&cov);
    }
    Ok(block)
}

#[derive(Clone, Copy, Debug)]
pub struct TruncationLimits {
    /// Largest admissible total dimension `(2N+1)^d · 2^{d−1} · r`.
    pub max_size: usize,
}

impl Default for TruncationLimits {
    fn default() -> Self {
        Self { max_size: 4096 }
    }
}

#[derive(Clone, Debug)]
pub enum TruncationMatrix {
    /// One block per mode, in the order of `OperatorTruncation::modes`.
    Blocks(Vec<CMat>),
    /// Coupled Galerkin matrix, mode-major.
    Dense(CMat),
}

/// Finite section of the signature operator on the modes `|k_j| ≤ N`.
#[derive(Clone, Debug)]
pub struct OperatorTruncation {
    pub dim: usize,
    pub rank: usize,
    pub cutoff: usize,
    pub modes: Vec<Vec<i64>>,
    pub matrix: TruncationMatrix,
    pub formally_self_adjoint: bool,
}

impl OperatorTruncation {
    pub fn block_size(&self) -> usize {
        (1usize << (self.dim - 1)) * self.rank
    }

    pub fn total_size(&self) -> usize {
        self.modes.len() * self.block_size()
    }

    pub fn is_block_diagonal(&self) -> bool {
        matches!(self.matrix, TruncationMatrix::Blocks(_))
    }

    /// The full matrix, assembling blocks on the diagonal if needed.
    pub fn to_dense(&self) -> CMat {
        match &self.matrix {
            TruncationMatrix::Dense(m) => m.clone(),
            TruncationMatrix::Blocks(blocks) => {
                let b = self.block_size();
                let mut m = CMat::zeros(self.total_size(), self.total_size());
                for (p, blk) in blocks.iter().enumerate() {
                    m.view_mut((p * b, p * b), (b, b)).copy_from(blk);
                }
                m
            }
        }
    }
}

/// All `k ∈ Z^d` with `|k_j| ≤ n`, lexicographic.
pub fn mode_list(dim: usize, n: usize) -> Vec<Vec<i64>> {
    let n = n as i64;
    let mut out = vec![Vec::new()];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|p| {
                (-n..=n).map(move |v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out
}

pub fn build_truncation(c: &Connection, cutoff: usize) -> Result<OperatorTruncation> {
    build_truncation_with(c, cutoff, TruncationLimits::default())
}

pub fn build_truncation_with(
    c: &Connection,
    cutoff: usize,
    limits: TruncationLimits,
) -> Result<OperatorTruncation> {
    if cutoff == 0 {
        return Err(Error::InvalidArgument("cutoff N must be at least 1".into()));
    }
    let model = CliffordModel::new(c.dim())?;
    let (dim, rank) = (c.dim(), c.rank());
    let size = (2 * cutoff + 1)
        .checked_pow(dim as u32)
        .and_then(|m| m.checked_mul(model.even_dim() * rank))
        .unwrap_or(usize::MAX);
    if size > limits.max_size {
        return Err(Error::MemoryGuard {
            size,
            limit: limits.max_size,
        });
    }
    let modes = mode_list(dim, cutoff);
    let formally_self_adjoint = omega_metric(c).is_zero_within(1e-12);

    let matrix = if c.is_constant() {
        let comps = c.constant_components()?;
        let blocks = modes
            .iter()
            .map(|k| sig_mode_with(&model, &comps, k))
            .collect::<Result<Vec<_>>>()?;
        TruncationMatrix::Blocks(blocks)
    } else {
        let b = model.even_dim() * rank;
        let index: HashMap<&[i64], usize> = modes
            .iter()
            .enumerate()
            .map(|(p, k)| (k.as_slice(), p))
            .collect();
        let mut m = CMat::zeros(size, size);
        for (p, k) in modes.iter().enumerate() {
            let diag = sig_mode_with(&model, &vec![CMat::zeros(rank, rank); dim], k)?;
            m.view_mut((p * b, p * b), (b, b)).copy_from(&diag);
            for (key, coeff) in c.form().terms() {
                let j = key.indices.trailing_zeros() as usize;
                let source: Vec<i64> = k.iter().zip(&key.freq).map(|(a, q)| a - q).collect();
                if let Some(&col) = index.get(source.as_slice()) {
                    let blk = model.gamma_c_even(j).kronecker(coeff);
                    let mut view = m.view_mut((p * b, col * b), (b, b));
                    view += &blk;
                }
            }
        }
        TruncationMatrix::Dense(m)
    };
    Ok(OperatorTruncation {
        dim,
        rank,
        cutoff,
        modes,
        matrix,
        formally_self_adjoint,
    })
}

/// Eigenvalues of a general complex matrix via the Schur form.
pub fn eigenvalues(m: &CMat) -> Result<Vec<Complex64>> {
    match m.nrows() {
        0 => Ok(Vec::new()),
        1 => Ok(vec![m[(0, 0)]]),
        _ => m
            .clone()
            .schur()
            .eigenvalues()
            .map(|v| v.iter().copied().collect())
            .ok_or_else(|| {
                Error::EigenSolver(format!(
                    "Schur iteration failed on a {}x{} matrix",
                    m.nrows(),
                    m.ncols()
                ))
            }),
    }
}

pub(crate) fn sort_spectrum(values: &mut [Complex64]) {
    values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// All eigenvalues with multiplicity, sorted by `(Re, Im)`.
pub fn spectrum(t: &OperatorTruncation) -> Result<Vec<Complex64>> {
    let mut values: Vec<Complex64> = spectrum_by_mode(t)?.into_iter().map(|(_, v)| v).collect();
    sort_spectrum(&mut values);
    Ok(values)
}

/// Eigenvalues tagged with their Fourier mode when the truncation is
/// block diagonal.
pub fn spectrum_by_mode(t: &OperatorTruncation) -> Result<Vec<(Option<Vec<i64>>, Complex64)>> {
    match &t.matrix {
        TruncationMatrix::Blocks(blocks) => {
            let mut out = Vec::with_capacity(t.total_size());
            for (k, blk) in t.modes.iter().zip(blocks) {
                let mut ev = eigenvalues(blk)?;
                sort_spectrum(&mut ev);
                out.extend(ev.into_iter().map(|v| (Some(k.clone()), v)));
            }
            Ok(out)
        }
        TruncationMatrix::Dense(m) => {
            let mut ev = eigenvalues(m)?;
            sort_spectrum(&mut ev);
            Ok(ev.into_iter().map(|v| (None, v)).collect())
        }
    }
}

/// CSV with columns `re,im,mode`; the mode column is `k1;k2;…` or empty.
pub fn write_spectrum_csv<W: Write>(
    mut out: W,
    rows: &[(Option<Vec<i64>>, Complex64)],
) -> std::io::Result<()> {
    writeln!(out, "re,im,mode")?;
    for (k, v) in rows {
        let mode = k
            .as_ref()
            .map(|k| {
                k.iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(";")
            })
            .unwrap_or_default();
        writeln!(out, "{:.15e},{:.15e},{}", v.re, v.im, mode)?;
    }
    Ok(())
}
