//! Command-line surface of the `crnf` binary.

pub mod verify;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::contact_fields::contact_from_generating;
use crate::contact_flow::{ContactDiffeo, DeformationTensor, FlowConfig};
use crate::cr_operators::OperatorSuite;
use crate::error::{Error, Result};
use crate::io::{self, DiffeoJson, FieldJson, ScalarJson};
use crate::normal_form::harness::{self, Family, HarnessConfig};
use crate::normal_form::{self, IterRecord, NormRow, SolveConfig};
use crate::random;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_NEIGHBOURHOOD: i32 = 3;
pub const EXIT_BASIS_MISMATCH: i32 = 4;

/// Largest relative (Y, ψ) difference accepted by `slice`.
pub const SLICE_TOL: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(name = "crnf", version, about = "Spectral CR normal forms on the 3-sphere")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a deformation tensor (random, pullback-of-zero, prefab-normal-form) or a contact generator.
    Gen(RunConfig),
    /// Solve for the normal form of a deformation tensor.
    NormalForm(RunConfig),
    /// Run the operator identity suite.
    Verify(RunConfig),
    /// Record observed estimate constants over seeded ensembles.
    Scan(RunConfig),
    /// Compare the normal forms of φ and G*φ.
    Slice(RunConfig),
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, PartialEq)]
pub struct RunConfig {
    /// Truncation degree N.
    #[arg(long, default_value_t = 8)]
    pub degree: usize,
    /// Norm order s₀.
    #[arg(long, default_value_t = normal_form::DEFAULT_S0)]
    pub s: usize,
    #[arg(long, default_value_t = normal_form::DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long = "max-iter", default_value_t = normal_form::DEFAULT_MAX_ITER)]
    pub max_iter: usize,
    /// Smallness threshold ε on ‖φ‖_{s₀}.
    #[arg(long, default_value_t = normal_form::DEFAULT_EPS)]
    pub eps: f64,
    /// RK4 steps per unit time.
    #[arg(long, default_value_t = crate::contact_flow::DEFAULT_STEPS)]
    pub steps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub kind: Option<String>,
    /// Contact generator JSON for `slice`.
    #[arg(long)]
    pub generator: Option<PathBuf>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.degree < 4 {
            return Err(Error::Invalid("degree must be at least 4".into()));
        }
        if self.s < 1 || self.s > crate::harmonic_basis::MAX_NORM_ORDER - 3 {
            return Err(Error::Invalid(format!("s must lie in 1..={}", crate::harmonic_basis::MAX_NORM_ORDER - 3)));
        }
        if !(self.tol > 0.0) || !(self.eps > 0.0) {
            return Err(Error::Invalid("tol and eps must be positive".into()));
        }
        if self.steps == 0 || self.max_iter == 0 {
            return Err(Error::Invalid("steps and max-iter must be positive".into()));
        }
        Ok(())
    }

    pub fn solve_config(&self) -> SolveConfig {
        SolveConfig { s0: self.s, tol: self.tol, max_iter: self.max_iter, eps: self.eps, flow: self.flow() }
    }

    pub fn flow(&self) -> FlowConfig {
        FlowConfig::with_steps(self.steps)
    }

    fn out(&self) -> Result<&Path> {
        self.out.as_deref().ok_or_else(|| Error::Invalid("--out is required".into()))
    }

    fn input(&self) -> Result<&Path> {
        self.input.as_deref().ok_or_else(|| Error::Invalid("--in is required".into()))
    }

    fn echo(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    fn own_hash(&self) -> String {
        io::sha256_hex(self.echo().as_bytes())
    }
}

/// Deformation tensor file written by `gen`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeformationFile {
    pub config: RunConfig,
    pub input_hash: String,
    pub kind: String,
    pub phi: ScalarJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<FieldJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y0: Option<FieldJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi0: Option<ScalarJson>,
}

/// Contact generator file written by `gen --kind contact-generator`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorFile {
    pub config: RunConfig,
    pub input_hash: String,
    #[serde(flatten)]
    pub diffeo: DiffeoJson,
}

/// Normal form written by `normal-form`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultFile {
    pub config: RunConfig,
    pub input_hash: String,
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
    pub defining_residual: f64,
    pub gauge_residual: f64,
    pub harmonic_residual: f64,
    pub trunc_mass: f64,
    pub x: FieldJson,
    pub y: FieldJson,
    pub psi: ScalarJson,
    pub norms: Vec<NormJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormJson {
    pub s: usize,
    pub x: f64,
    pub y: f64,
    pub psi: f64,
}

impl From<NormRow> for NormJson {
    fn from(r: NormRow) -> Self {
        NormJson { s: r.s, x: r.x, y: r.y, psi: r.psi }
    }
}

#[derive(Debug, Clone, Serialize)]
struct SliceRow {
    s: usize,
    dy: f64,
    dpsi: f64,
    rel_y: f64,
    rel_psi: f64,
    pass: bool,
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_FAILURE } else { EXIT_OK };
        }
    };
    match dispatch(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("crnf: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NotConverged { .. } | Error::NotContracting { .. } => EXIT_NOT_CONVERGED,
        Error::Neighbourhood(_) | Error::ContactDrift { .. } => EXIT_NEIGHBOURHOOD,
        Error::BasisMismatch { .. } => EXIT_BASIS_MISMATCH,
        _ => EXIT_FAILURE,
    }
}

pub fn dispatch(cmd: &Command) -> Result<i32> {
    match cmd {
        Command::Gen(c) => cmd_gen(c),
        Command::NormalForm(c) => cmd_normal_form(c),
        Command::Verify(c) => cmd_verify(c),
        Command::Scan(c) => cmd_scan(c),
        Command::Slice(c) => cmd_slice(c),
    }
}

fn band(cfg: &RunConfig) -> usize {
    cfg.degree - 2
}

pub fn cmd_gen(cfg: &RunConfig) -> Result<i32> {
    cfg.validate()?;
    let ops = OperatorSuite::shared(cfg.degree);
    let sp = &ops.space;
    let mut rng = random::rng(cfg.seed);
    let size = cfg.eps / 2.0;
    let kind = cfg.kind.as_deref().unwrap_or("random");
    let out = cfg.out()?;
    let base = |phi: &DeformationTensor| DeformationFile {
        config: cfg.clone(),
        input_hash: cfg.own_hash(),
        kind: kind.to_string(),
        phi: ScalarJson::new(sp, &phi.phi),
        x0: None,
        y0: None,
        psi0: None,
    };
    match kind {
        "random" => {
            let phi = normal_form::random_deformation(&ops, band(cfg), cfg.s, size, &mut rng);
            io::write_json(out, &base(&phi))?;
        }
        "pullback-of-zero" => {
            let (phi, x0) = normal_form::pullback_of_zero(&ops, band(cfg), cfg.s, size, cfg.flow(), &mut rng)?;
            let file = DeformationFile { x0: Some(FieldJson::contact(sp, &x0)), ..base(&phi) };
            io::write_json(out, &file)?;
        }
        "prefab-normal-form" => {
            let pf = normal_form::prefab(&ops, band(cfg), cfg.s, size, &mut rng);
            let file = DeformationFile {
                y0: Some(FieldJson::complex(sp, &pf.y0.y)),
                psi0: Some(ScalarJson::new(sp, &pf.psi0.phi)),
                ..base(&pf.phi)
            };
            io::write_json(out, &file)?;
        }
        "contact-generator" => {
            let x = normal_form::transverse_contact_field(&ops, band(cfg), cfg.s, size, &mut rng)?;
            let diffeo = DiffeoJson {
                degree: cfg.degree,
                basis_id: sp.basis.id().to_string(),
                g: io::coeffs_to_pairs(&x.g.coeffs),
                steps: cfg.steps,
            };
            io::write_json(out, &GeneratorFile { config: cfg.clone(), input_hash: cfg.own_hash(), diffeo })?;
        }
        other => return Err(Error::Invalid(format!("unknown kind {other}"))),
    }
    Ok(EXIT_OK)
}

fn load_phi(ops: &OperatorSuite, path: &Path) -> Result<(DeformationTensor, String)> {
    let (file, hash): (DeformationFile, String) = io::read_json(path)?;
    Ok((DeformationTensor::new(file.phi.to_scalar(&ops.space)?), hash))
}

pub fn cmd_normal_form(cfg: &RunConfig) -> Result<i32> {
    cfg.validate()?;
    let ops = OperatorSuite::shared(cfg.degree);
    let sp = &ops.space;
    let (phi, input_hash) = load_phi(&ops, cfg.input()?)?;
    let res = normal_form::solve(&ops, &phi, &cfg.solve_config())?;
    let out = cfg.out()?;
    let file = ResultFile {
        config: cfg.clone(),
        input_hash: input_hash.clone(),
        converged: res.converged,
        iterations: res.iterations,
        residual: res.residual,
        defining_residual: res.defining_residual,
        gauge_residual: res.gauge_residual,
        harmonic_residual: res.harmonic_residual,
        trunc_mass: res.trunc_mass,
        x: FieldJson::contact(sp, &res.x),
        y: FieldJson::complex(sp, &res.y.y),
        psi: ScalarJson::new(sp, &res.psi.phi),
        norms: res.norms.iter().copied().map(NormJson::from).collect(),
    };
    io::write_json(out, &file)?;
    let history: Vec<IterRecord> = res.history.clone();
    io::write_csv(&out.with_extension("csv"), &[("config", cfg.echo()), ("input_sha256", input_hash)], &history)?;
    if res.converged {
        Ok(EXIT_OK)
    } else {
        eprintln!("crnf: not converged after {} iterations (residual {:e})", res.iterations, res.residual);
        Ok(EXIT_NOT_CONVERGED)
    }
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<i32> {
    cfg.validate()?;
    let ops = OperatorSuite::shared(cfg.degree);
    let rows = verify::identity_suite(&ops, 100, cfg.seed);
    io::write_csv(cfg.out()?, &[("config", cfg.echo()), ("input_sha256", cfg.own_hash())], &rows)?;
    Ok(if rows.iter().all(|r| r.pass) { EXIT_OK } else { EXIT_FAILURE })
}

pub fn cmd_scan(cfg: &RunConfig) -> Result<i32> {
    cfg.validate()?;
    let degrees: Vec<usize> = if cfg.degree >= 6 { (6..=cfg.degree).step_by(2).collect() } else { vec![cfg.degree] };
    let hc = HarnessConfig {
        degrees,
        seeds: (cfg.seed..cfg.seed + 8).collect(),
        s_max: cfg.s,
        flow: cfg.flow(),
        ..Default::default()
    };
    let preamble = [("config", cfg.echo()), ("input_sha256", cfg.own_hash())];
    let out = cfg.out()?;
    let finite = match cfg.kind.as_deref().unwrap_or("apriori") {
        "apriori" => {
            let rows = harness::apriori_harness(&hc)?;
            io::write_csv(out, &preamble, &rows)?;
            rows.iter().all(|r| r.ratio_x.is_finite() && r.ratio_y.is_finite() && r.ratio_psi.is_finite())
        }
        other => {
            let families: Vec<Family> =
                if other == "all" { Family::ALL.to_vec() } else { vec![other.parse::<Family>()?] };
            let rows = harness::estimate_harness(&families, &hc)?;
            io::write_csv(out, &preamble, &rows)?;
            rows.iter().all(|r| r.ratio.is_finite())
        }
    };
    Ok(if finite { EXIT_OK } else { EXIT_FAILURE })
}

pub fn cmd_slice(cfg: &RunConfig) -> Result<i32> {
    cfg.validate()?;
    let ops = OperatorSuite::shared(cfg.degree);
    let sp = &ops.space;
    let (phi, mut input_hash) = load_phi(&ops, cfg.input()?)?;
    let g = match &cfg.generator {
        Some(path) => {
            let (file, hash): (GeneratorFile, String) = io::read_json(path)?;
            input_hash = io::sha256_hex(format!("{input_hash}{hash}").as_bytes());
            let x = contact_from_generating(&ops, &file.diffeo.generator(sp)?)?;
            ContactDiffeo::flow(sp, &x, FlowConfig::with_steps(file.diffeo.steps))?
        }
        None => ContactDiffeo::identity(sp),
    };
    let rep = normal_form::slice_check(&ops, &phi, &g, &cfg.solve_config())?;
    let rows: Vec<SliceRow> = (0..=cfg.s)
        .map(|s| {
            let dy = ops.norm_field(&rep.first.y.y.field.sub(&rep.second.y.y.field), s);
            let dpsi = ops.norm_scalar(&rep.first.psi.phi.sub(&rep.second.psi.phi), s);
            let base_y = rep.first.y.y.norm(&ops, s);
            let base_psi = ops.norm_scalar(&rep.first.psi.phi, s);
            let rel_y = if base_y > 0.0 { dy / base_y } else { dy };
            let rel_psi = if base_psi > 0.0 { dpsi / base_psi } else { dpsi };
            SliceRow { s, dy, dpsi, rel_y, rel_psi, pass: rel_y <= SLICE_TOL && rel_psi <= SLICE_TOL }
        })
        .collect();
    io::write_csv(cfg.out()?, &[("config", cfg.echo()), ("input_sha256", input_hash)], &rows)?;
    Ok(if rows.iter().all(|r| r.pass) { EXIT_OK } else { EXIT_FAILURE })
}
