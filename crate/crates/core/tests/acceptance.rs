//! Acceptance criteria, one PASS/FAIL line each.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use cseta::eta::{eta_bk, eta_s1, m_minus, s1_mode_spectrum, EtaValue};
use cseta::flow::{spectral_flow, track_spectra, TrackOptions};
use cseta::forms::{CMat, SubTorus, TrigPolyForm};
use cseta::geometry::a_coeff_exact;
use cseta::geometry::Connection;
use cseta::samples;
use cseta::scenario::random_sliding_exponents;
use cseta::spectral::{build_truncation, eigenvalues, spectrum};
use cseta::verify::{
    check_gauge_flow, check_gilkey, check_psi_path, check_r_deformation, check_re_im,
    check_variation_c, circle_distance, psi, VariationOptions, VerificationReport,
};
use cseta::Error;
use num_complex::Complex64;
use num_rational::BigRational;
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
    /// Serialized numbers, compared across runs.
    record: String,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rel(a: &TrigPolyForm, b: &TrigPolyForm) -> f64 {
    a.distance(b) / a.max_abs().max(b.max_abs()).max(1.0)
}

fn forms_suite() -> Outcome {
    let mut rng = samples::rng(101);
    let mut worst: BTreeMap<&str, f64> = BTreeMap::new();
    let mut bump = |k: &'static str, v: f64| {
        let e = worst.entry(k).or_insert(0.0);
        *e = e.max(v);
    };
    for n in 0..200 {
        let dim = [1, 3, 5][n % 3];
        let rank = 1 + n % 2;
        let degs: Vec<usize> = (0..=dim).collect();
        let a = samples::form(&mut rng, dim, rank, &degs, 4, 2);
        let b = samples::form(&mut rng, dim, rank, &degs, 4, 2);
        let e = samples::form(&mut rng, dim, rank, &degs, 3, 2);

        bump("d^2", a.ext_d().ext_d().max_abs() / a.max_abs().max(1.0));

        let left = a.wedge(&b).unwrap().wedge(&e).unwrap();
        let right = a.wedge(&b.wedge(&e).unwrap()).unwrap();
        bump("associativity", rel(&left, &right));

        let p = rng.random_range(0..=dim);
        let q = rng.random_range(0..=dim);
        let x = samples::form(&mut rng, dim, 1, &[p], 3, 2);
        let y = samples::form(&mut rng, dim, 1, &[q], 3, 2);
        let sign = if (p * q) % 2 == 0 { 1.0 } else { -1.0 };
        bump(
            "graded commutativity",
            rel(&x.wedge(&y).unwrap(), &y.wedge(&x).unwrap().scale_re(sign)),
        );

        let top = samples::form(&mut rng, dim, rank, &[dim - 1], 4, 2);
        let integral = top
            .ext_d()
            .degree_part(dim)
            .integrate(&SubTorus::full(dim))
            .unwrap();
        bump(
            "Stokes",
            integral.iter().map(|z| z.norm()).fold(0.0, f64::max),
        );
        if dim > 1 {
            let f = samples::form(&mut rng, dim, rank, &[0], 4, 2);
            let base: Vec<f64> = (0..dim).map(|_| rng.random_range(0.0..1.0)).collect();
            let cycle = SubTorus::new(dim, &[rng.random_range(0..dim)], base).unwrap();
            let loop_int = f.ext_d().integrate(&cycle).unwrap();
            bump(
                "Stokes",
                loop_int.iter().map(|z| z.norm()).fold(0.0, f64::max),
            );
        }

        if dim >= 3 {
            let even: Vec<usize> = (2..=dim).step_by(2).collect();
            let nil = samples::form(&mut rng, dim, rank, &even, 3, 1);
            let back = nil.exp_nilpotent().unwrap().log_unipotent().unwrap();
            bump("exp/log", rel(&back, &nil));
        }
    }
    let pass = worst.values().all(|&v| v < 1e-10);
    let detail = worst
        .iter()
        .map(|(k, v)| format!("{k} {v:.1e}"))
        .collect::<Vec<_>>()
        .join(", ");
    Outcome {
        pass,
        record: detail.clone(),
        detail,
    }
}

fn r_deformation() -> Outcome {
    let mut rng = samples::rng(102);
    let mut report = VerificationReport::default();
    for dim in [1, 3] {
        for k in 0..10 {
            let conn = if k % 2 == 0 {
                samples::flat_constant(&mut rng, dim, 2, false)
            } else {
                samples::flat_nonconstant(&mut rng, dim, 2)
            };
            for r in [0.5, 1.0, 2.0] {
                report.push(check_r_deformation(&conn, r, 1e-9).unwrap());
            }
        }
    }
    from_report(&report, "pairings on S^1 and T^3")
}

fn from_report(report: &VerificationReport, what: &str) -> Outcome {
    let worst = report
        .entries
        .iter()
        .map(|e| e.residual)
        .fold(0.0, f64::max);
    Outcome {
        pass: report.all_pass() && !report.entries.is_empty(),
        detail: format!(
            "{} checks, {what}, worst residual {worst:.1e}",
            report.entries.len()
        ),
        record: report.to_json(),
    }
}

fn a_coefficients() -> Outcome {
    let int = |n: i64| BigRational::from_integer(n.into());
    let fact = |n: i64| (1..=n).fold(int(1), |acc, q| acc * int(q));
    let mut ok = true;
    let mut record = String::new();
    for j in 0..=6i64 {
        let lhs = a_coeff_exact(j as usize, &int(-1)) / fact(j);
        let rhs = int(4i64.pow(j as u32)) * fact(j) / fact(2 * j + 1);
        ok &= lhs == rhs;
        record.push_str(&format!("{lhs} "));
    }
    Outcome {
        pass: ok,
        detail: format!("exact rationals for j = 0..6: {}", record.trim()),
        record,
    }
}

fn re_im() -> Outcome {
    let mut rng = samples::rng(104);
    let mut worst_im: f64 = 0.0;
    let mut worst_re: f64 = 0.0;
    let mut report = VerificationReport::default();
    for k in 0..20 {
        let mus = samples::circle_exponents(&mut rng, 1 + k % 2, -2.0, 2.0, 0.6);
        let conn = Connection::circle_diagonal(&mus).unwrap();
        let e = check_re_im(&conn, 1e-6).unwrap();
        worst_im = worst_im.max((e.lhs.im - e.rhs.im).abs());
        worst_re = worst_re.max(circle_distance(e.lhs.re - e.rhs.re));
        report.push(e);
    }
    Outcome {
        pass: worst_im < 1e-8 && worst_re < 1e-6,
        detail: format!(
            "20 connections, Im residual {worst_im:.1e}, Re residual mod Z {worst_re:.1e}"
        ),
        record: report.to_json(),
    }
}

fn gilkey() -> Outcome {
    let mut rng = samples::rng(105);
    let mut report = VerificationReport::default();
    let mut non_constant = 0;
    for k in 0..10 {
        let (c0, c1) =
            cseta::scenario::random_circle_pair(&mut rng, 1 + k % 2, k % 2 == 1).unwrap();
        non_constant += usize::from(!c0.is_constant() && !c1.is_constant());
        report.push(check_gilkey(&c0, &c1, 1e-8).unwrap());
    }
    let mut o = from_report(&report, &format!("{non_constant} non-constant pairs"));
    o.pass &= non_constant > 0;
    o
}

fn psi_constancy() -> Outcome {
    let mut rng = samples::rng(106);
    let mut report = VerificationReport::default();
    let mut worst_abs: f64 = 0.0;
    for _ in 0..5 {
        let m0 = samples::circle_exponents(&mut rng, 2, -1.5, 1.5, 0.5);
        let m1 = samples::circle_exponents(&mut rng, 2, -1.5, 1.5, 0.5);
        let path = |t: f64| {
            let mus: Vec<Complex64> = m0.iter().zip(&m1).map(|(a, b)| a + (b - a) * t).collect();
            Connection::circle_diagonal(&mus)
        };
        report.push(check_psi_path(path, 5, 1e-9).unwrap());
        for t in [0.0, 0.5, 1.0] {
            let v = psi(&path(t).unwrap()).unwrap();
            worst_abs = worst_abs.max(v.local.abs()).max(v.spectral.unwrap().abs());
        }
    }
    for _ in 0..5 {
        let d0: Vec<CMat> = (0..3)
            .map(|_| diag(&samples::circle_exponents(&mut rng, 2, -1.0, 1.0, 0.5)))
            .collect();
        let d1: Vec<CMat> = (0..3)
            .map(|_| diag(&samples::circle_exponents(&mut rng, 2, -1.0, 1.0, 0.5)))
            .collect();
        let path = |t: f64| {
            let comps: Vec<CMat> = d0
                .iter()
                .zip(&d1)
                .map(|(a, b)| a * c(1.0 - t, 0.0) + b * c(t, 0.0))
                .collect();
            Connection::from_constant(&comps)
        };
        report.push(check_psi_path(path, 5, 1e-9).unwrap());
        for t in [0.0, 0.5, 1.0] {
            worst_abs = worst_abs.max(psi(&path(t).unwrap()).unwrap().local.abs());
        }
    }
    let mut o = from_report(
        &report,
        &format!("S^1 and T^3 paths, max |Psi| {worst_abs:.1e}"),
    );
    o.pass &= worst_abs < 1e-9;
    o
}

fn diag(mus: &[Complex64]) -> CMat {
    let v: Vec<Complex64> = mus.iter().map(|m| m * c(0.0, 2.0 * PI)).collect();
    CMat::from_diagonal(&nalgebra::DVector::from_vec(v))
}

fn census(m: &CMat) -> i64 {
    eigenvalues(m)
        .unwrap()
        .iter()
        .filter(|z| z.re >= 0.0)
        .count() as i64
}

fn sf_of<F: Fn(f64) -> CMat>(f: F, intervals: usize) -> Result<i64, Error> {
    let opts = TrackOptions {
        initial_intervals: intervals,
        ..TrackOptions::default()
    };
    let tr = track_spectra(|t| eigenvalues(&f(t)), &opts)?;
    Ok(spectral_flow(&tr)?.value)
}

fn spectral_flow_suite() -> Outcome {
    let mut rng = samples::rng(107);
    let mut paths = 0;
    let mut failures = Vec::new();
    let mut record = String::new();
    let mut nonzero = 0;
    while paths < 20 {
        let n = 3 + paths % 3;
        let a0 = samples::matrix(&mut rng, n, 2.0);
        let a1 = samples::matrix(&mut rng, n, 2.0);
        let a2 = samples::matrix(&mut rng, n, 2.0);
        if [&a0, &a1, &a2]
            .iter()
            .any(|m| eigenvalues(m).unwrap().iter().any(|z| z.re.abs() < 1e-6))
        {
            continue;
        }
        paths += 1;
        let seg = |x: &CMat, y: &CMat, t: f64| x * c(1.0 - t, 0.0) + y * c(t, 0.0);
        let concat = |t: f64| {
            if t <= 0.5 {
                seg(&a0, &a1, 2.0 * t)
            } else {
                seg(&a1, &a2, 2.0 * t - 1.0)
            }
        };
        let run = || -> Result<(i64, i64, i64, i64, i64), Error> {
            let first = sf_of(|t| seg(&a0, &a1, t), 8)?;
            let first_fine = sf_of(|t| seg(&a0, &a1, t), 64)?;
            let second = sf_of(|t| seg(&a1, &a2, t), 8)?;
            let whole = sf_of(concat, 16)?;
            let whole_fine = sf_of(concat, 128)?;
            Ok((first, first_fine, second, whole, whole_fine))
        };
        match run() {
            Ok((first, first_fine, second, whole, whole_fine)) => {
                record.push_str(&format!("{first},{second},{whole};"));
                nonzero += usize::from(whole != 0);
                if first != first_fine || whole != whole_fine {
                    failures.push(format!("path {paths}: refinement changed sf"));
                }
                if first + second != whole {
                    failures.push(format!("path {paths}: {first} + {second} != {whole}"));
                }
                if whole != census(&a2) - census(&a0) {
                    failures.push(format!("path {paths}: census mismatch"));
                }
            }
            Err(e) => failures.push(format!("path {paths}: {e}")),
        }
    }
    let base = Connection::circle_diagonal(&[c(0.3, 0.15)]).unwrap();
    let opts = VariationOptions::default();
    let mut gauge = Vec::new();
    for w in -3i64..=3 {
        let e = check_gauge_flow(&base, w, &opts).unwrap();
        let sf = e.lhs.re.round() as i64;
        if sf.abs() != w.abs() || sf != w || !e.pass {
            failures.push(format!("gauge w = {w}: sf = {sf}"));
        }
        gauge.push(sf);
    }
    record.push_str(&format!("{gauge:?}"));
    Outcome {
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            format!("20 paths ({nonzero} with nonzero flow), gauge sf {gauge:?}")
        } else {
            failures.join("; ")
        },
        record,
    }
}

fn variation_c() -> Outcome {
    let mut rng = samples::rng(108);
    let mut report = VerificationReport::default();
    let mut flows = Vec::new();
    for k in 0..10 {
        let (mu0, mu1) = random_sliding_exponents(&mut rng, 1 + k % 2, 3);
        let path = |t: f64| {
            let mus: Vec<Complex64> = mu0.iter().zip(&mu1).map(|(a, b)| a + (b - a) * t).collect();
            Connection::circle_diagonal(&mus)
        };
        let e = check_variation_c(path, &VariationOptions::default(), 1e-8).unwrap();
        flows.push(e.parts["sf"].re as i64);
        report.push(e);
    }
    from_report(&report, &format!("spectral flows {flows:?}"))
}

/// Both families are sampled on a dyadic grid containing the crossing.
fn eta_bk_family() -> Outcome {
    let steps = 256;
    let cutoff = 6;
    let mut failures = Vec::new();
    let mut record = String::new();
    let eval = |mu: Complex64| -> (EtaValue, usize) {
        let e = cseta::eta::eta_s1_closed(&[mu]).unwrap();
        let m = m_minus(&s1_mode_spectrum(&[mu], cutoff), 1e-12);
        (e, m)
    };
    // an eigenvalue sliding along the imaginary axis through zero
    let along = |t: f64| c(0.0, 0.4 * (0.5 - t));
    // an eigenvalue crossing the axis below the real line
    let across = |t: f64| c(t - 0.5, -0.3);
    for (name, fam) in [
        ("along", &along as &dyn Fn(f64) -> Complex64),
        ("across", &across),
    ] {
        let mut prev = eval(fam(0.0));
        let mut jumps_m = Vec::new();
        let mut jumps_bk = Vec::new();
        for k in 1..=steps {
            let t = k as f64 / steps as f64;
            let cur = eval(fam(t));
            let dm = cur.1 as i64 - prev.1 as i64;
            let d_eta = cur.0.reduced - prev.0.reduced;
            let d_bk = eta_bk(&cur.0, cur.1) - eta_bk(&prev.0, prev.1);
            if (d_bk - (d_eta - dm as f64)).norm() > 1e-12 {
                failures.push(format!("{name}: decomposition at t = {t}"));
            }
            if dm != 0 {
                jumps_m.push((t, dm));
            }
            // continuous parts move by O(1/steps)
            let jump = (d_bk.re).round() as i64;
            if (d_bk.re - jump as f64).abs() > 0.05 || d_bk.im.abs() > 0.05 {
                failures.push(format!("{name}: irregular step at t = {t}"));
            }
            if jump != 0 {
                jumps_bk.push((t, jump));
            }
            prev = cur;
        }
        record.push_str(&format!("{name}: m {jumps_m:?} bk {jumps_bk:?}; "));
        if name == "along" {
            let expected: Vec<(f64, i64)> = jumps_m.iter().map(|&(t, dm)| (t, -dm)).collect();
            if jumps_m.is_empty() || jumps_bk != expected {
                failures.push(format!(
                    "along: m jumps {jumps_m:?}, eta_BK jumps {jumps_bk:?}"
                ));
            }
        } else if jumps_m.len() != 2 {
            failures.push(format!("across: m jumps {jumps_m:?}"));
        }
    }
    let conn = Connection::circle_diagonal(&[c(0.0, -0.2)]).unwrap();
    let full = spectrum(&build_truncation(&conn, cutoff as usize).unwrap()).unwrap();
    let m_full = m_minus(&full, 1e-9);
    let m_closed = m_minus(&s1_mode_spectrum(&[c(0.0, -0.2)], cutoff), 1e-12);
    let eta = eta_s1(&conn).unwrap();
    if m_full != m_closed || m_full != 1 {
        failures.push(format!(
            "m_minus from the truncation {m_full}, closed form {m_closed}"
        ));
    }
    record.push_str(&format!("{}", eta_bk(&eta, m_full)));
    Outcome {
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            record.clone()
        } else {
            failures.join("; ")
        },
        record,
    }
}

type Criterion = (&'static str, fn() -> Outcome);

fn criteria() -> Vec<Criterion> {
    vec![
        ("forms algebra", forms_suite as fn() -> Outcome),
        ("r-deformation transgression", r_deformation),
        ("a_j(i)/j! closed form", a_coefficients),
        ("Re/Im decomposition on S^1", re_im),
        ("variation mod Z", gilkey),
        ("Psi constancy", psi_constancy),
        ("spectral flow", spectral_flow_suite),
        ("complex variation", variation_c),
        ("eta_BK jumps", eta_bk_family),
    ]
}

fn main() {
    let mut all = true;
    let mut records = Vec::new();
    for (i, (name, f)) in criteria().into_iter().enumerate() {
        let o = f();
        all &= o.pass;
        println!(
            "{} {:>2} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
        records.push(o.record);
    }
    let again: Vec<String> = criteria().into_iter().map(|(_, f)| f().record).collect();
    let same = again == records;
    all &= same;
    println!(
        "{} 10 determinism: {}",
        if same { "PASS" } else { "FAIL" },
        if same {
            "two runs give identical reports"
        } else {
            "reports differ between runs"
        }
    );
    if !all {
        std::process::exit(1);
    }
}
