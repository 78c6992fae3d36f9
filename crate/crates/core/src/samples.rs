//! Seeded random generators for forms, connections and circle exponents.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::forms::{CMat, TrigPolyForm};
use crate::geometry::{Connection, GaugeMap, Metric};

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex(rng: &mut SampleRng, scale: f64) -> Complex64 {
    Complex64::new(
        rng.random_range(-scale..scale),
        rng.random_range(-scale..scale),
    )
}

pub fn matrix(rng: &mut SampleRng, rank: usize, scale: f64) -> CMat {
    CMat::from_fn(rank, rank, |_, _| complex(rng, scale))
}

pub fn anti_hermitian(rng: &mut SampleRng, rank: usize, scale: f64) -> CMat {
    let m = matrix(rng, rank, scale);
    (&m - m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Random form with `terms` terms, frequencies in `[-max_freq, max_freq]^d`
/// and degrees drawn from `degrees`.
pub fn form(
    rng: &mut SampleRng,
    dim: usize,
    rank: usize,
    degrees: &[usize],
    terms: usize,
    max_freq: i64,
) -> TrigPolyForm {
    let mut f = TrigPolyForm::zero(dim, rank);
    for _ in 0..terms {
        let p = degrees[rng.random_range(0..degrees.len())].min(dim);
        let mut idx: Vec<usize> = (0..dim).collect();
        for i in 0..p {
            let j = rng.random_range(i..dim);
            idx.swap(i, j);
        }
        let mask = idx[..p].iter().fold(0u32, |m, &j| m | (1 << j));
        let freq = (0..dim)
            .map(|_| rng.random_range(-max_freq..=max_freq))
            .collect();
        f.add_term(freq, mask, matrix(rng, rank, 1.0));
    }
    f
}

/// Generic non-flat connection with trigonometric coefficients and identity
/// metric.
pub fn connection(rng: &mut SampleRng, dim: usize, rank: usize, terms: usize) -> Connection {
    let mut a = TrigPolyForm::zero(dim, rank);
    for _ in 0..terms {
        let j = rng.random_range(0..dim);
        let freq = (0..dim).map(|_| rng.random_range(-1..=1)).collect();
        a.add_term(freq, 1 << j, matrix(rng, rank, 0.5));
    }
    Connection::new(a, Metric::identity(dim, rank)).expect("degree-1 form")
}

/// Constant connection with arbitrary (non-commuting) components.
pub fn constant_connection(rng: &mut SampleRng, dim: usize, rank: usize, scale: f64) -> Connection {
    let comps: Vec<CMat> = (0..dim).map(|_| matrix(rng, rank, scale)).collect();
    Connection::from_constant(&comps).expect("valid components")
}

/// Flat constant connection `A_j = P D_j P^{-1}` with commuting diagonal
/// `D_j`; unitary when `P = I` and the diagonals are imaginary.
pub fn flat_constant(rng: &mut SampleRng, dim: usize, rank: usize, unitary: bool) -> Connection {
    let p = if unitary {
        CMat::identity(rank, rank)
    } else {
        CMat::identity(rank, rank) + matrix(rng, rank, 0.3)
    };
    let p_inv = p
        .clone()
        .try_inverse()
        .expect("near-identity matrix is invertible");
    let comps: Vec<CMat> = (0..dim)
        .map(|_| {
            let d = DVector::from_fn(rank, |_, _| {
                let z = complex(rng, 1.5);
                if unitary {
                    Complex64::new(0.0, z.im)
                } else {
                    z
                }
            });
            &p * CMat::from_diagonal(&d) * &p_inv
        })
        .collect();
    Connection::from_constant(&comps).expect("valid components")
}

/// Flat connection with non-constant coefficients: a constant flat connection
/// transformed by a unipotent gauge map `I + N e^{2πi k·x}`.
pub fn flat_nonconstant(rng: &mut SampleRng, dim: usize, rank: usize) -> Connection {
    let base = flat_constant(rng, dim, rank, false);
    let mut n = CMat::zeros(rank, rank);
    for i in 0..rank {
        for j in (i + 1)..rank {
            n[(i, j)] = complex(rng, 0.5);
        }
    }
    let freq: Vec<i64> = (0..dim).map(|_| rng.random_range(-1..=1)).collect();
    let nf = TrigPolyForm::monomial(dim, n, &freq, &[]).expect("0-form");
    let gm = GaugeMap::unipotent(&nf).expect("nilpotent");
    let c = base.gauge_transform(&gm).expect("gauge transform");
    c.with_metric(Metric::identity(dim, rank))
        .expect("same shape")
}

/// Non-constant Hermitian metric `h† h` with `h = I + N e^{2πi k·x}`,
/// `N` strictly upper triangular.
pub fn metric(rng: &mut SampleRng, dim: usize, rank: usize) -> Metric {
    let mut n = CMat::zeros(rank, rank);
    for i in 0..rank {
        for j in (i + 1)..rank {
            n[(i, j)] = complex(rng, 0.4);
        }
    }
    let freq: Vec<i64> = (0..dim).map(|_| rng.random_range(-1..=1)).collect();
    let nf = TrigPolyForm::monomial(dim, n, &freq, &[]).expect("0-form");
    let h = GaugeMap::unipotent(&nf).expect("nilpotent");
    Metric::from_factor(h.g(), h.g_inv()).expect("positive definite")
}

/// Exponents `μ` with `Re μ ∈ [lo, hi)` and `|Im μ| < im_scale`.
pub fn circle_exponents(
    rng: &mut SampleRng,
    rank: usize,
    lo: f64,
    hi: f64,
    im_scale: f64,
) -> Vec<Complex64> {
    (0..rank)
        .map(|_| {
            let im = if im_scale > 0.0 {
                rng.random_range(-im_scale..im_scale)
            } else {
                0.0
            };
            Complex64::new(rng.random_range(lo..hi), im)
        })
        .collect()
}

/// Real number in `[lo, hi)` at least `margin` away from every integer.
pub fn off_integer(rng: &mut SampleRng, lo: f64, hi: f64, margin: f64) -> f64 {
    loop {
        let x: f64 = rng.random_range(lo..hi);
        if (x - x.round()).abs() >= margin {
            return x;
        }
    }
}
