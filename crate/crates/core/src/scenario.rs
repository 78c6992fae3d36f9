//! Scenario files: connections plus a list of experiments, executed into a
//! verification report and CSV artifacts.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{
    gauge_path, spectral_flow, track_connection_path, write_track_csv, TrackOptions,
};
use crate::geometry::Connection;
use crate::samples;
use crate::spectral::{
    build_truncation_with, spectrum_by_mode, write_spectrum_csv, TruncationLimits,
};
use crate::verify::{
    check_bk_phase, check_eta_tilde, check_gauge_flow, check_gilkey, check_psi_path,
    check_r_deformation, check_re_im, check_variation_c, CheckEntry, CheckMode, VariationOptions,
    VerificationReport,
};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifold {
    pub dim: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bundle {
    pub rank: usize,
}

/// A connection given in full, or on the circle by its exponents `μ` with
/// `A = diag(2πi μ) dx`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ConnectionSpec {
    Circle(CircleSpec),
    Full(Connection),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircleSpec {
    /// `[re, im]` pairs.
    pub circle_exponents: Vec<[f64; 2]>,
}

impl ConnectionSpec {
    pub fn build(&self) -> Result<Connection> {
        match self {
            ConnectionSpec::Full(c) => Ok(c.clone()),
            ConnectionSpec::Circle(s) => {
                let mus: Vec<Complex64> = s
                    .circle_exponents
                    .iter()
                    .map(|p| Complex64::new(p[0], p[1]))
                    .collect();
                if mus.is_empty() {
                    return Err(Error::Schema("circle_exponents must be nonempty".into()));
                }
                Connection::circle_diagonal(&mus)
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PathSpec {
    /// `(1 − t) A_from + t A_to`.
    Linear { from: String, to: String },
    /// Linear path from `∇` to `g^{-1} ∇ g`, `g = diag(e^{2πi w x}, 1, …)`.
    Gauge { connection: String, w: i64 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case", deny_unknown_fields)]
pub enum Experiment {
    RDeformation {
        connection: String,
        r: Vec<f64>,
        tol: Option<f64>,
    },
    Gilkey {
        from: String,
        to: String,
        tol: Option<f64>,
    },
    VariationC {
        path: PathSpec,
        cutoff: Option<usize>,
        tol: Option<f64>,
    },
    GaugeFlow {
        connection: String,
        w: Vec<i64>,
        cutoff: Option<usize>,
    },
    ReIm {
        connection: String,
        tol: Option<f64>,
    },
    Psi {
        path: PathSpec,
        samples: Option<usize>,
        tol: Option<f64>,
    },
    EtaTilde {
        connection: String,
        reference: String,
        tol: Option<f64>,
    },
    BkPhase {
        rank: usize,
        tol: Option<f64>,
    },
    /// Spectrum CSV of the truncated operator.
    Spectrum {
        connection: String,
        cutoff: usize,
    },
    /// Track CSV along a path; optionally checks the spectral flow.
    Track {
        path: PathSpec,
        cutoff: usize,
        expected_sf: Option<i64>,
    },
    /// Randomized Gilkey checks on circle connections (constant and not).
    RandomGilkey {
        count: usize,
        rank: usize,
        tol: Option<f64>,
    },
    /// Randomized complex variation checks along sliding circle paths.
    RandomVariation {
        count: usize,
        tol: Option<f64>,
    },
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::RDeformation { .. } => "r_deformation",
            Experiment::Gilkey { .. } => "gilkey",
            Experiment::VariationC { .. } => "variation_c",
            Experiment::GaugeFlow { .. } => "gauge_flow",
            Experiment::ReIm { .. } => "re_im",
            Experiment::Psi { .. } => "psi",
            Experiment::EtaTilde { .. } => "eta_tilde",
            Experiment::BkPhase { .. } => "bk_phase",
            Experiment::Spectrum { .. } => "spectrum",
            Experiment::Track { .. } => "track",
            Experiment::RandomGilkey { .. } => "random_gilkey",
            Experiment::RandomVariation { .. } => "random_variation",
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    /// Report path, relative to the scenario file.
    pub report: Option<String>,
    /// Directory for CSV artifacts, relative to the scenario file.
    pub csv_dir: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub manifold: Manifold,
    pub bundle: Bundle,
    pub connections: BTreeMap<String, ConnectionSpec>,
    pub experiments: Vec<Experiment>,
    /// Default tolerance for every check in the file.
    pub tolerance: Option<f64>,
    pub seed: Option<u64>,
    /// Memory guard for truncations.
    pub max_matrix_size: Option<usize>,
    #[serde(default)]
    pub outputs: Outputs,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.manifold.dim;
        if d == 0 || d.is_multiple_of(2) {
            return Err(Error::Schema(format!(
                "manifold dimension must be odd, got {d}"
            )));
        }
        if self.bundle.rank == 0 {
            return Err(Error::Schema("bundle rank must be positive".into()));
        }
        for (name, spec) in &self.connections {
            let c = spec
                .build()
                .map_err(|e| Error::Schema(format!("connection {name}: {e}")))?;
            if c.dim() != d || c.rank() != self.bundle.rank {
                return Err(Error::Schema(format!(
                    "connection {name} has dim {} and rank {}, scenario declares {d} and {}",
                    c.dim(),
                    c.rank(),
                    self.bundle.rank
                )));
            }
        }
        for e in &self.experiments {
            for name in referenced(e) {
                if !self.connections.contains_key(name) {
                    return Err(Error::Schema(format!(
                        "{} refers to unknown connection {name}",
                        e.name()
                    )));
                }
            }
            let circle_only = matches!(
                e,
                Experiment::Gilkey { .. }
                    | Experiment::VariationC { .. }
                    | Experiment::GaugeFlow { .. }
                    | Experiment::ReIm { .. }
                    | Experiment::EtaTilde { .. }
                    | Experiment::Track { .. }
                    | Experiment::RandomGilkey { .. }
                    | Experiment::RandomVariation { .. }
            );
            if circle_only && d != 1 {
                return Err(Error::Schema(format!(
                    "{} is only available on the circle",
                    e.name()
                )));
            }
        }
        Ok(())
    }
}

fn path_refs(p: &PathSpec) -> Vec<&String> {
    match p {
        PathSpec::Linear { from, to } => vec![from, to],
        PathSpec::Gauge { connection, .. } => vec![connection],
    }
}

fn referenced(e: &Experiment) -> Vec<&String> {
    match e {
        Experiment::RDeformation { connection, .. }
        | Experiment::GaugeFlow { connection, .. }
        | Experiment::ReIm { connection, .. }
        | Experiment::Spectrum { connection, .. } => vec![connection],
        Experiment::Gilkey { from, to, .. } => vec![from, to],
        Experiment::EtaTilde {
            connection,
            reference,
            ..
        } => vec![connection, reference],
        Experiment::VariationC { path, .. }
        | Experiment::Psi { path, .. }
        | Experiment::Track { path, .. } => path_refs(path),
        Experiment::BkPhase { .. }
        | Experiment::RandomGilkey { .. }
        | Experiment::RandomVariation { .. } => Vec::new(),
    }
}

/// Command-line overrides; each takes precedence over the scenario file.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub check_filter: Option<String>,
    pub tol_override: Option<f64>,
    pub seed: Option<u64>,
    pub emit_csv: bool,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub report: VerificationReport,
    /// `(file name, contents)` of CSV artifacts.
    pub artifacts: Vec<(String, String)>,
}

impl RunOutcome {
    /// `0` when every check passes, `1` otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.report.all_pass() {
            0
        } else {
            1
        }
    }
}

pub const DEFAULT_SEED: u64 = 0;

fn default_tol(check: &str) -> f64 {
    match check {
        "r_deformation" => 1e-9,
        "re_im" | "gilkey" | "variation_c" | "eta_tilde" | "random_gilkey" | "random_variation" => {
            1e-8
        }
        "psi" => 1e-9,
        "bk_phase" => 1e-12,
        _ => 1e-9,
    }
}

struct Runner<'a> {
    scenario: &'a Scenario,
    opts: &'a RunOptions,
    conns: BTreeMap<String, Connection>,
    report: VerificationReport,
    artifacts: Vec<(String, String)>,
}

impl Runner<'_> {
    fn tol(&self, check: &str, local: Option<f64>) -> f64 {
        self.opts
            .tol_override
            .or(local)
            .or(self.scenario.tolerance)
            .unwrap_or_else(|| default_tol(check))
    }

    fn conn(&self, name: &str) -> &Connection {
        &self.conns[name]
    }

    fn path(&self, p: &PathSpec) -> impl Fn(f64) -> Result<Connection> + '_ {
        let p = p.clone();
        move |t| match &p {
            PathSpec::Linear { from, to } => self.conn(from).lerp(self.conn(to), t),
            PathSpec::Gauge { connection, w } => gauge_path(self.conn(connection), *w, t),
        }
    }

    fn limits(&self) -> TruncationLimits {
        TruncationLimits {
            max_size: self
                .scenario
                .max_matrix_size
                .unwrap_or(TruncationLimits::default().max_size),
        }
    }

    fn push(&mut self, label: String, e: CheckEntry) {
        let mut e = e;
        e.id = format!("{}:{label}", e.id);
        self.report.push(e);
    }

    fn run(&mut self, index: usize, e: &Experiment) -> Result<()> {
        let check = e.name();
        match e {
            Experiment::RDeformation { connection, r, tol } => {
                let tol = self.tol(check, *tol);
                for &ri in r {
                    let entry = check_r_deformation(self.conn(connection), ri, tol)?;
                    self.push(format!("{connection}@r={ri}"), entry);
                }
            }
            Experiment::Gilkey { from, to, tol } => {
                let entry = check_gilkey(self.conn(from), self.conn(to), self.tol(check, *tol))?;
                self.push(format!("{from}->{to}"), entry);
            }
            Experiment::VariationC { path, cutoff, tol } => {
                let opts = VariationOptions {
                    cutoff: cutoff.unwrap_or(10),
                    track: TrackOptions::default(),
                };
                let tol = self.tol(check, *tol);
                let entry = check_variation_c(self.path(path), &opts, tol)?;
                self.push(path_label(path), entry);
            }
            Experiment::GaugeFlow {
                connection,
                w,
                cutoff,
            } => {
                let opts = VariationOptions {
                    cutoff: cutoff.unwrap_or(10),
                    track: TrackOptions::default(),
                };
                for &wi in w {
                    let entry = check_gauge_flow(self.conn(connection), wi, &opts)?;
                    self.push(format!("{connection}@w={wi}"), entry);
                }
            }
            Experiment::ReIm { connection, tol } => {
                let entry = check_re_im(self.conn(connection), self.tol(check, *tol))?;
                self.push(connection.clone(), entry);
            }
            Experiment::Psi { path, samples, tol } => {
                let tol = self.tol(check, *tol);
                let entry = check_psi_path(self.path(path), samples.unwrap_or(5), tol)?;
                self.push(path_label(path), entry);
            }
            Experiment::EtaTilde {
                connection,
                reference,
                tol,
            } => {
                let entry = check_eta_tilde(
                    self.conn(connection),
                    self.conn(reference),
                    self.tol(check, *tol),
                )?;
                self.push(format!("{connection}|{reference}"), entry);
            }
            Experiment::BkPhase { rank, tol } => {
                let entry = check_bk_phase(*rank, self.tol(check, *tol))?;
                self.push(format!("rank={rank}"), entry);
            }
            Experiment::Spectrum { connection, cutoff } => {
                let t = build_truncation_with(self.conn(connection), *cutoff, self.limits())?;
                let rows = spectrum_by_mode(&t)?;
                if self.opts.emit_csv {
                    let mut buf = Vec::new();
                    write_spectrum_csv(&mut buf, &rows)?;
                    self.artifacts.push((
                        format!("spectrum_{index}_{connection}.csv"),
                        String::from_utf8(buf).expect("ascii csv"),
                    ));
                }
            }
            Experiment::Track {
                path,
                cutoff,
                expected_sf,
            } => {
                let limits = self.limits();
                let size = (2 * cutoff + 1) * self.scenario.bundle.rank;
                if size > limits.max_size {
                    return Err(Error::MemoryGuard {
                        size,
                        limit: limits.max_size,
                    });
                }
                let tr = track_connection_path(self.path(path), *cutoff, &TrackOptions::default())?;
                let sf = spectral_flow(&tr)?;
                if self.opts.emit_csv {
                    let mut buf = Vec::new();
                    write_track_csv(&mut buf, &tr)?;
                    self.artifacts.push((
                        format!("track_{index}.csv"),
                        String::from_utf8(buf).expect("ascii csv"),
                    ));
                }
                if let Some(expected) = expected_sf {
                    let entry = CheckEntry::new(
                        "track",
                        "spectral flow along the tracked path",
                        Complex64::new(sf.value as f64, 0.0),
                        Complex64::new(*expected as f64, 0.0),
                        CheckMode::Integer,
                        1e-9,
                    );
                    self.push(path_label(path), entry);
                }
            }
            Experiment::RandomGilkey { count, rank, tol } => {
                let tol = self.tol(check, *tol);
                let mut rng = samples::rng(self.seed().wrapping_add(index as u64));
                for k in 0..*count {
                    let (c0, c1) = random_circle_pair(&mut rng, *rank, k % 2 == 1)?;
                    let entry = check_gilkey(&c0, &c1, tol)?;
                    self.push(format!("#{k}"), entry);
                }
            }
            Experiment::RandomVariation { count, tol } => {
                let tol = self.tol(check, *tol);
                let mut rng = samples::rng(self.seed().wrapping_add(index as u64));
                for k in 0..*count {
                    let (mu0, mu1) = random_sliding_exponents(&mut rng, 1 + k % 2, 3);
                    let path = |t: f64| {
                        let mus: Vec<Complex64> =
                            mu0.iter().zip(&mu1).map(|(a, b)| a + (b - a) * t).collect();
                        Connection::circle_diagonal(&mus)
                    };
                    let entry = check_variation_c(path, &VariationOptions::default(), tol)?;
                    self.push(format!("#{k}"), entry);
                }
            }
        }
        Ok(())
    }

    fn seed(&self) -> u64 {
        self.opts
            .seed
            .or(self.scenario.seed)
            .unwrap_or(DEFAULT_SEED)
    }
}

fn path_label(p: &PathSpec) -> String {
    match p {
        PathSpec::Linear { from, to } => format!("{from}->{to}"),
        PathSpec::Gauge { connection, w } => format!("gauge({connection},w={w})"),
    }
}

/// Two circle connections of the given rank; when `non_constant`, both are
/// gauge transformed by a unipotent map so that their forms have
/// nonzero frequencies.
pub fn random_circle_pair(
    rng: &mut samples::SampleRng,
    rank: usize,
    non_constant: bool,
) -> Result<(Connection, Connection)> {
    let c0 = samples::constant_connection(rng, 1, rank, 2.0);
    let c1 = samples::constant_connection(rng, 1, rank, 2.0);
    if !non_constant {
        return Ok((c0, c1));
    }
    let bump = |c: &Connection, rng: &mut samples::SampleRng| -> Result<Connection> {
        let extra = samples::form(rng, 1, rank, &[1], 2, 2).scale_re(0.3);
        c.shifted(&extra)
    };
    Ok((bump(&c0, rng)?, bump(&c1, rng)?))
}

/// Endpoint exponents of a sliding circle path with up to `max_cross`
/// integer crossings of each real part; endpoints stay off the integers.
pub fn random_sliding_exponents(
    rng: &mut samples::SampleRng,
    rank: usize,
    max_cross: i64,
) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut mu0 = Vec::with_capacity(rank);
    let mut mu1 = Vec::with_capacity(rank);
    for _ in 0..rank {
        let re0 = samples::off_integer(rng, 0.0, 1.0, 0.05);
        let crossings = rng.random_range(0..=max_cross);
        let dir = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let frac = samples::off_integer(rng, 0.0, 1.0, 0.05);
        let re1 = dir * crossings as f64 + frac;
        let re1 = if (re1 - re1.round()).abs() < 0.05 {
            re1 + 0.1
        } else {
            re1
        };
        let im0 = rng.random_range(-0.4..0.4);
        let im1 = rng.random_range(-0.4..0.4);
        mu0.push(Complex64::new(re0, im0));
        mu1.push(Complex64::new(re1, im1));
    }
    (mu0, mu1)
}

/// Executes every experiment that passes the filter.
pub fn run_scenario(s: &Scenario, opts: &RunOptions) -> Result<RunOutcome> {
    s.validate()?;
    let mut conns = BTreeMap::new();
    for (name, spec) in &s.connections {
        conns.insert(name.clone(), spec.build()?);
    }
    let mut runner = Runner {
        scenario: s,
        opts,
        conns,
        report: VerificationReport::default(),
        artifacts: Vec::new(),
    };
    for (i, e) in s.experiments.iter().enumerate() {
        if opts.check_filter.as_deref().is_some_and(|f| f != e.name()) {
            continue;
        }
        runner.run(i, e)?;
    }
    Ok(RunOutcome {
        report: runner.report,
        artifacts: runner.artifacts,
    })
}
