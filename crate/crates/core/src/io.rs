//! Case configuration, run orchestration and result files.
//!
//! Every file written here starts with a `#` metadata line (config hash, `A`,
//! `nu`, length convention, backend) or, for JSON, carries the same data under
//! `meta`. Nothing time-dependent is recorded, so identical configs give
//! byte-identical outputs.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::benchmarks::{
    centerline, compare_profile, detect_corner_vortices, taylor_green_errors, taylor_green_fields, tstar_steps, AnalyticCase,
    AnalyticKind, BenchError, CornerVortices, InitialDensity, ProfileDeviation, ReferenceProfile,
};
use crate::classical::{apply_dirichlet, residual, Boundary, ClassicalLks, MacroFields, Mesh, SolverError, Stepper};
use crate::lattice::{mach_check, FlowParams, LatticeError, LatticeModel, VelocitySet};
use crate::quantum::{register_layout, resource_estimate, Moment, QuantumLks, ResourceReport, StepReport};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {reason}")]
    Read { path: String, reason: String },
    #[error("{0}")]
    Schema(String),
    #[error("field `{field}`: {reason}")]
    Field { field: &'static str, reason: String },
}

impl ConfigError {
    fn field(field: &'static str, reason: impl Into<String>) -> Self {
        Self::Field {
            field,
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),
    #[error("solver failure: {0}")]
    Solver(#[from] SolverError),
    #[error("self-check failed: {0}")]
    Tolerance(String),
    #[error("benchmark evaluation: {0}")]
    Bench(#[from] BenchError),
    #[error("I/O error on {path}: {reason}")]
    Io { path: String, reason: String },
}

impl RunError {
    /// Process exit status: 2 config, 3 instability, 4 tolerance, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Solver(SolverError::Instability { .. }) => 3,
            RunError::Tolerance(_) => 4,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseKind {
    Tg2d,
    Tg3d,
    Cavity2d,
    Cavity3d,
}

impl CaseKind {
    pub fn dimension(self) -> usize {
        match self {
            CaseKind::Tg2d | CaseKind::Cavity2d => 2,
            CaseKind::Tg3d | CaseKind::Cavity3d => 3,
        }
    }

    pub fn is_cavity(self) -> bool {
        matches!(self, CaseKind::Cavity2d | CaseKind::Cavity3d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Classical,
    Quantum,
    Both,
}

impl Backend {
    pub fn runs_quantum(self) -> bool {
        !matches!(self, Backend::Classical)
    }

    pub fn runs_classical(self) -> bool {
        !matches!(self, Backend::Quantum)
    }

    pub fn label(self) -> &'static str {
        match self {
            Backend::Classical => "classical",
            Backend::Quantum => "quantum",
            Backend::Both => "both",
        }
    }
}

impl FromStr for Backend {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "classical" => Ok(Self::Classical),
            "quantum" => Ok(Self::Quantum),
            "both" => Ok(Self::Both),
            other => Err(format!("unknown backend `{other}` (classical | quantum | both)")),
        }
    }
}

/// `mesh = 16` or `mesh = [16, 16]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeshSpec {
    Uniform(usize),
    Axes(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Largest per-step backend discrepancy accepted with `backend = "both"`.
    #[serde(default = "default_discrepancy")]
    pub discrepancy: f64,
    /// Stop once the velocity residual drops below this value.
    #[serde(default)]
    pub steady_residual: Option<f64>,
}

fn default_discrepancy() -> f64 {
    1e-10
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            discrepancy: default_discrepancy(),
            steady_residual: None,
        }
    }
}

fn default_rho0() -> f64 {
    1.0
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseConfig {
    pub case: CaseKind,
    pub mesh: MeshSpec,
    pub re: f64,
    /// Characteristic velocity; the lid speed for cavities.
    pub u0: f64,
    #[serde(default = "default_rho0")]
    pub rho0: f64,
    #[serde(default)]
    pub steps: Option<usize>,
    #[serde(default)]
    pub tstar: Option<f64>,
    pub backend: Backend,
    /// Output directory; not part of the config hash.
    #[serde(default = "default_output", skip_serializing)]
    pub output: PathBuf,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub initial_density: InitialDensity,
    /// Write a field snapshot every this many steps.
    #[serde(default)]
    pub snapshot_every: Option<usize>,
    /// Extra `coord,value` reference profile for the lid-normal centerline of `u`.
    #[serde(default)]
    pub reference: Option<PathBuf>,
}

/// Command-line replacements applied before validation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub backend: Option<Backend>,
    pub output: Option<PathBuf>,
    pub steps: Option<usize>,
    pub tstar: Option<f64>,
}

impl CaseConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Schema(e.message().to_string()))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(b) = o.backend {
            self.backend = b;
        }
        if let Some(p) = &o.output {
            self.output = p.clone();
        }
        if o.steps.is_some() || o.tstar.is_some() {
            self.steps = o.steps;
            self.tstar = o.tstar;
        }
    }
}

/// A validated config with derived quantities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedCase {
    pub config: CaseConfig,
    pub lattice: LatticeModel,
    pub mesh: Mesh,
    /// Characteristic length in lattice units.
    pub length: f64,
    pub length_convention: &'static str,
    pub nu: f64,
    pub a_coeff: f64,
    pub steps: usize,
    pub config_sha256: String,
}

impl ResolvedCase {
    pub fn params(&self) -> FlowParams<f64> {
        FlowParams::from_reynolds(self.config.rho0, self.config.u0, self.config.re, self.length, 1.0 / 3.0)
            .expect("validated parameters")
    }

    pub fn analytic(&self) -> Option<AnalyticCase<f64>> {
        let kind = match self.config.case {
            CaseKind::Tg2d => AnalyticKind::TG2D,
            CaseKind::Tg3d => AnalyticKind::TG3D,
            _ => return None,
        };
        Some(AnalyticCase {
            kind,
            l: self.length,
            u0: self.config.u0,
            rho0: self.config.rho0,
            re: self.config.re,
            cs2: 1.0 / 3.0,
        })
    }

    pub fn boundary(&self) -> Boundary<f64> {
        if self.config.case.is_cavity() {
            Boundary::Cavity {
                lid_velocity: [self.config.u0, 0.0, 0.0],
            }
        } else {
            Boundary::Periodic
        }
    }

    /// Human-readable echo of the derived parameters.
    pub fn echo(&self) -> String {
        format!(
            "case={:?} lattice={:?} mesh={:?} Re={} u0={} L={} ({}) nu={:.6} A={:.6} steps={} backend={}",
            self.config.case,
            self.lattice,
            &self.mesh.sizes()[..self.mesh.dim],
            self.config.re,
            self.config.u0,
            self.length,
            self.length_convention,
            self.nu,
            self.a_coeff,
            self.steps,
            self.config.backend.label(),
        )
    }

    /// `# key=value ...` metadata line shared by every text output.
    pub fn header(&self, backend: &str) -> String {
        format!(
            "# config_sha256={} A={:.17e} nu={:.17e} L={} L_convention={} backend={}",
            self.config_sha256,
            self.a_coeff,
            self.nu,
            self.length,
            self.length_convention,
            backend
        )
    }

    fn meta(&self, backend: &str) -> serde_json::Value {
        serde_json::json!({
            "config_sha256": self.config_sha256,
            "A": self.a_coeff,
            "nu": self.nu,
            "L": self.length,
            "L_convention": self.length_convention,
            "backend": backend,
        })
    }
}

/// Validates a config and derives `L`, `nu`, `A` and the step count.
pub fn resolve(config: CaseConfig) -> Result<ResolvedCase, ConfigError> {
    let dim = config.case.dimension();
    let sizes: Vec<usize> = match &config.mesh {
        MeshSpec::Uniform(n) => vec![*n; dim],
        MeshSpec::Axes(v) => v.clone(),
    };
    if sizes.len() != dim {
        return Err(ConfigError::field("mesh", format!("{dim}D case needs {dim} sizes, got {}", sizes.len())));
    }
    if sizes.iter().any(|&n| n != sizes[0]) {
        return Err(ConfigError::field("mesh", "all axes must have the same number of nodes"));
    }
    let n = sizes[0];
    if n < 3 {
        return Err(ConfigError::field("mesh", format!("{n} nodes per axis; at least 3 are needed")));
    }
    if config.backend.runs_quantum() && !n.is_power_of_two() {
        return Err(ConfigError::field(
            "mesh",
            format!("{n} nodes per axis is not a power of two, as the quantum backend requires"),
        ));
    }
    for (name, v) in [("u0", config.u0), ("re", config.re), ("rho0", config.rho0)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(ConfigError::field(
                match name {
                    "u0" => "u0",
                    "re" => "re",
                    _ => "rho0",
                },
                format!("must be positive and finite, got {v}"),
            ));
        }
    }
    if !(config.tolerances.discrepancy >= 0.0) {
        return Err(ConfigError::field("tolerances.discrepancy", "must be non-negative"));
    }
    if let Some(every) = config.snapshot_every {
        if every == 0 {
            return Err(ConfigError::field("snapshot_every", "must be positive"));
        }
    }
    let mut arr = [1usize; 3];
    arr[..dim].copy_from_slice(&sizes);
    let mesh = Mesh::new(dim, arr).map_err(|e| ConfigError::field("mesh", e.to_string()))?;
    let (length, length_convention) = if config.case.is_cavity() {
        (n as f64, "cavity:L=N")
    } else {
        (n as f64 / 2.0, "half-domain:L=N/2")
    };
    let params = FlowParams::from_reynolds(config.rho0, config.u0, config.re, length, 1.0 / 3.0).map_err(|e| match e {
        LatticeError::NonPositiveViscosity(_) => ConfigError::field("re", e.to_string()),
        other => ConfigError::field("re", other.to_string()),
    })?;
    let steps = match (config.steps, config.tstar) {
        (Some(s), None) => s,
        (None, Some(t)) => {
            if !(t >= 0.0) || !t.is_finite() {
                return Err(ConfigError::field("tstar", format!("must be non-negative, got {t}")));
            }
            tstar_steps(t, length, config.u0)
        }
        (Some(_), Some(_)) => return Err(ConfigError::field("steps", "give exactly one of `steps` and `tstar`, not both")),
        (None, None) => return Err(ConfigError::field("steps", "give exactly one of `steps` and `tstar`")),
    };
    mach_check(config.u0, 1.0 / 3.0);
    let canonical = serde_json::to_string(&config).expect("config serializes");
    let config_sha256 = hex::encode(Sha256::digest(canonical.as_bytes()));
    Ok(ResolvedCase {
        lattice: LatticeModel::for_dimension(dim).expect("2D or 3D"),
        mesh,
        length,
        length_convention,
        nu: params.nu,
        a_coeff: params.a_coeff,
        steps,
        config_sha256,
        config,
    })
}

/// Reads, overrides and validates a TOML case file.
pub fn parse_config(path: &Path, overrides: &Overrides) -> Result<ResolvedCase, ConfigError> {
    let text = fs::read_to_string(path).map_err(|e| ConfigError::Read {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    let mut config = CaseConfig::from_toml(&text)?;
    config.apply(overrides);
    resolve(config)
}

/// Initial macroscopic state of a case.
pub fn initial_fields(case: &ResolvedCase) -> MacroFields<f64> {
    match case.analytic() {
        Some(a) => taylor_green_fields(case.mesh, &a, 0.0, case.config.initial_density),
        None => {
            let rest = MacroFields::uniform(case.mesh, case.config.rho0, [0.0; 3]);
            apply_dirichlet(&rest, &case.boundary()).expect("cavity boundary")
        }
    }
}

fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Field CSV: metadata line, header, one row per node.
pub fn field_csv(fields: &MacroFields<f64>, header: &str) -> String {
    let mut s = String::with_capacity(fields.mesh.len() * 160);
    s.push_str(header);
    s.push('\n');
    s.push_str("x,y,z,rho,u,v,w\n");
    for k in 0..fields.mesh.len() {
        let [i, j, l] = fields.mesh.coords(k);
        let v = fields.vel[k];
        let _ = writeln!(
            s,
            "{i},{j},{l},{},{},{},{}",
            fmt17(fields.rho[k]),
            fmt17(v[0]),
            fmt17(v[1]),
            fmt17(v[2])
        );
    }
    s
}

/// One field CSV row: node coordinates and `[rho, u, v, w]`.
pub type FieldRow = ([usize; 3], [f64; 4]);

pub fn parse_field_csv(text: &str) -> Result<Vec<FieldRow>, String> {
    let mut rows = Vec::new();
    let mut header = false;
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !header {
            if line != "x,y,z,rho,u,v,w" {
                return Err(format!("line {}: expected field header, got `{line}`", n + 1));
            }
            header = true;
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 7 {
            return Err(format!("line {}: expected 7 columns, got {}", n + 1, cols.len()));
        }
        let mut idx = [0usize; 3];
        for d in 0..3 {
            idx[d] = cols[d].parse().map_err(|e| format!("line {}: {e}", n + 1))?;
        }
        let mut vals = [0.0; 4];
        for d in 0..4 {
            vals[d] = cols[3 + d].parse().map_err(|e| format!("line {}: {e}", n + 1))?;
        }
        rows.push((idx, vals));
    }
    if !header {
        return Err("missing field header".into());
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldDiff {
    pub nodes: usize,
    /// Per column `rho, u, v, w`.
    pub max: [f64; 4],
    pub rms: [f64; 4],
}

/// Max and RMS difference between two field files on the same nodes.
pub fn compare_fields(a: &str, b: &str) -> Result<FieldDiff, String> {
    let ra = parse_field_csv(a)?;
    let rb = parse_field_csv(b)?;
    if ra.len() != rb.len() {
        return Err(format!("node counts differ: {} vs {}", ra.len(), rb.len()));
    }
    let mut max = [0.0f64; 4];
    let mut sum = [0.0f64; 4];
    for ((ia, va), (ib, vb)) in ra.iter().zip(&rb) {
        if ia != ib {
            return Err(format!("node order differs at {ia:?} vs {ib:?}"));
        }
        for d in 0..4 {
            let e = (va[d] - vb[d]).abs();
            max[d] = max[d].max(e);
            sum[d] += e * e;
        }
    }
    let n = ra.len().max(1) as f64;
    Ok(FieldDiff {
        nodes: ra.len(),
        max,
        rms: sum.map(|s| (s / n).sqrt()),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BackendSummary {
    pub backend: &'static str,
    pub steps: usize,
    pub converged: bool,
    pub final_residual: Option<f64>,
    /// Relative L2 error per velocity component (Taylor-Green cases).
    pub l2: Option<Vec<f64>>,
    /// Deviation from the shipped Ghia tables (`u` then `v`), 2D cavities.
    pub ghia: Option<Vec<ProfileDeviation>>,
    pub reference: Option<ProfileDeviation>,
    pub corner_vortices: Option<CornerVortices>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub meta: serde_json::Value,
    pub case: ResolvedCase,
    pub backends: Vec<BackendSummary>,
    pub max_discrepancy: Option<f64>,
    pub files: Vec<String>,
}

enum Engine {
    Classical(ClassicalLks<f64>),
    Quantum(Box<QuantumLks<f64>>),
}

struct Lane {
    name: &'static str,
    engine: Engine,
    fields: MacroFields<f64>,
    residuals: Vec<f64>,
    /// Per-step circuit diagnostics (quantum lane only).
    report_rows: String,
    last_report: Option<StepReport>,
}

impl Lane {
    fn step(&mut self, step: usize) -> Result<MacroFields<f64>, SolverError> {
        match &mut self.engine {
            Engine::Classical(c) => c.step(&self.fields, step),
            Engine::Quantum(q) => {
                let (next, r) = q.qlks_step(&self.fields, step)?;
                let cols: Vec<String> = r
                    .success_prob_collision
                    .iter()
                    .chain(&r.lcu_scale)
                    .map(|v| fmt17(*v))
                    .collect();
                let _ = writeln!(self.report_rows, "{step},{}", cols.join(","));
                self.last_report = Some(r);
                Ok(next)
            }
        }
    }
}

struct Writer {
    dir: PathBuf,
    files: Vec<String>,
}

impl Writer {
    fn write(&mut self, name: &str, contents: &str) -> Result<(), RunError> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| RunError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        self.files.push(name.to_string());
        Ok(())
    }
}

/// Runs a case, writes all artifacts to `config.output` and returns the summary.
///
/// With `backend = "both"` the backends advance in lockstep; a per-step
/// discrepancy above `tolerances.discrepancy` yields [`RunError::Tolerance`]
/// after the artifacts are written.
pub fn run_case(case: &ResolvedCase) -> Result<RunSummary, RunError> {
    let cfg = &case.config;
    fs::create_dir_all(&cfg.output).map_err(|e| RunError::Io {
        path: cfg.output.display().to_string(),
        reason: e.to_string(),
    })?;
    let mut out = Writer {
        dir: cfg.output.clone(),
        files: Vec::new(),
    };
    let set = VelocitySet::<f64>::new(case.lattice);
    let params = case.params();
    let bc = case.boundary();
    let init = initial_fields(case);

    let mut lanes: Vec<Lane> = Vec::new();
    if cfg.backend.runs_classical() {
        lanes.push(Lane {
            name: "classical",
            engine: Engine::Classical(ClassicalLks::new(set.clone(), params, bc)),
            fields: init.clone(),
            residuals: Vec::new(),
            report_rows: String::new(),
            last_report: None,
        });
    }
    let mut quantum_rows = String::new();
    if cfg.backend.runs_quantum() {
        let mut q = QuantumLks::new(set.clone(), params, bc, case.mesh).map_err(SolverError::from)?;
        q.keep_reports = false;
        let labels: Vec<String> = Moment::all(case.mesh.dim).iter().map(Moment::label).collect();
        let mut head = format!("{}\nstep", case.header("quantum"));
        for l in &labels {
            let _ = write!(head, ",p_success_{l}");
        }
        for l in &labels {
            let _ = write!(head, ",lcu_scale_{l}");
        }
        head.push('\n');
        lanes.push(Lane {
            name: "quantum",
            engine: Engine::Quantum(Box::new(q)),
            fields: init.clone(),
            residuals: Vec::new(),
            report_rows: head,
            last_report: None,
        });
    }

    let mut discrepancy = String::new();
    let mut max_disc: Option<f64> = None;
    let mut steps_done = 0;
    let mut converged = false;
    let mut failure: Option<RunError> = None;
    'outer: for step in 1..=case.steps {
        for lane in lanes.iter_mut() {
            let next = match lane.step(step).and_then(|n| n.validate(step).map(|_| n)) {
                Ok(n) => n,
                Err(e) => {
                    failure = Some(e.into());
                    break 'outer;
                }
            };
            lane.residuals.push(residual(&next, &lane.fields, cfg.u0));
            lane.fields = next;
        }
        steps_done = step;
        if lanes.len() == 2 {
            let d = lanes[0].fields.max_abs_diff(&lanes[1].fields);
            let _ = writeln!(discrepancy, "{step},{}", fmt17(d));
            max_disc = Some(max_disc.map_or(d, |m: f64| m.max(d)));
        }
        if let Some(every) = cfg.snapshot_every {
            if step % every == 0 {
                for lane in &lanes {
                    out.write(
                        &format!("fields_{}_step{step:06}.csv", lane.name),
                        &field_csv(&lane.fields, &case.header(lane.name)),
                    )?;
                }
            }
        }
        if let Some(th) = cfg.tolerances.steady_residual {
            if lanes[0].residuals.last().is_some_and(|r| *r < th) {
                converged = true;
                break;
            }
        }
    }

    let mut summaries = Vec::new();
    for lane in lanes.iter_mut() {
        out.write(&format!("fields_{}.csv", lane.name), &field_csv(&lane.fields, &case.header(lane.name)))?;
        let mut res = format!("{}\nstep,residual\n", case.header(lane.name));
        for (i, r) in lane.residuals.iter().enumerate() {
            let _ = writeln!(res, "{},{}", i + 1, fmt17(*r));
        }
        out.write(&format!("residuals_{}.csv", lane.name), &res)?;
        if matches!(lane.engine, Engine::Quantum(_)) {
            quantum_rows = std::mem::take(&mut lane.report_rows);
            if let Some(r) = &lane.last_report {
                let v = serde_json::json!({ "meta": case.meta("quantum"), "report": r });
                out.write("quantum_step_report.json", &(serde_json::to_string_pretty(&v).expect("report serializes") + "\n"))?;
            }
        }
        let mut s = BackendSummary {
            backend: lane.name,
            steps: steps_done,
            converged,
            final_residual: lane.residuals.last().copied(),
            l2: None,
            ghia: None,
            reference: None,
            corner_vortices: None,
        };
        if failure.is_none() {
            if let Some(a) = case.analytic() {
                s.l2 = Some(taylor_green_errors(&lane.fields, &a, steps_done as f64)?);
            } else {
                cavity_outputs(case, lane, &mut s, &mut out)?;
            }
        }
        summaries.push(s);
    }
    if !quantum_rows.is_empty() {
        out.write("quantum_steps.csv", &quantum_rows)?;
    }
    if case.analytic().is_some() && failure.is_none() {
        let dim = case.mesh.dim;
        let mut t = format!("{}\nmesh,u0,backend,l2_u,l2_v{}\n", case.header(cfg.backend.label()), if dim == 3 { ",l2_w" } else { "" });
        for s in &summaries {
            let l2 = s.l2.as_ref().expect("computed above");
            let cols: Vec<String> = l2.iter().map(|v| fmt17(*v)).collect();
            let _ = writeln!(t, "{},{},{},{}", case.mesh.nx, cfg.u0, s.backend, cols.join(","));
        }
        out.write("errors.csv", &t)?;
    }
    if lanes.len() == 2 {
        out.write(
            "discrepancy.csv",
            &format!("{}\nstep,max_abs\n{discrepancy}", case.header("both")),
        )?;
    }
    if register_layout(case.lattice, &case.mesh).is_ok() {
        let report = resource_estimate(&set, &case.mesh).map_err(SolverError::from)?;
        out.write("resources.json", &resources_json(case, &report))?;
    }
    let summary = RunSummary {
        meta: case.meta(cfg.backend.label()),
        case: case.clone(),
        backends: summaries,
        max_discrepancy: max_disc,
        files: {
            let mut f = out.files.clone();
            f.push("summary.json".into());
            f
        },
    };
    out.write("summary.json", &(serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n"))?;

    if let Some(e) = failure {
        return Err(e);
    }
    if let Some(d) = max_disc {
        if d > cfg.tolerances.discrepancy {
            return Err(RunError::Tolerance(format!(
                "max backend discrepancy {d:e} exceeds {:e}",
                cfg.tolerances.discrepancy
            )));
        }
    }
    Ok(summary)
}

fn cavity_outputs(case: &ResolvedCase, lane: &Lane, s: &mut BackendSummary, out: &mut Writer) -> Result<(), RunError> {
    let dim = case.mesh.dim;
    let vertical = dim - 1;
    let (cu, u) = centerline(&lane.fields, 0, vertical);
    let (cv, v) = centerline(&lane.fields, vertical, 0);
    let names = ["x", "y", "z"];
    let mut text = format!(
        "{}\n{}_coord,u,{}_coord,{}\n",
        case.header(lane.name),
        names[vertical],
        names[0],
        names[vertical].replace('y', "v").replace('z', "w")
    );
    for i in 0..cu.len().max(cv.len()) {
        let a = cu.get(i).map(|c| format!("{},{}", fmt17(*c), fmt17(u[i]))).unwrap_or_else(|| ",".into());
        let b = cv.get(i).map(|c| format!("{},{}", fmt17(*c), fmt17(v[i]))).unwrap_or_else(|| ",".into());
        let _ = writeln!(text, "{a},{b}");
    }
    out.write(&format!("centerline_{}.csv", lane.name), &text)?;
    let u0 = case.config.u0;
    let re = case.config.re;
    if dim == 2 && re.fract() == 0.0 {
        if let (Ok(gu), Ok(gv)) = (ReferenceProfile::ghia(re as u32, 'u'), ReferenceProfile::ghia(re as u32, 'v')) {
            s.ghia = Some(vec![compare_profile(&cu, &u, &gu, u0)?, compare_profile(&cv, &v, &gv, u0)?]);
        }
    }
    if let Some(path) = &case.config.reference {
        let text = fs::read_to_string(path).map_err(|e| RunError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        let r = ReferenceProfile::parse(&text)?;
        s.reference = Some(compare_profile(&cu, &u, &r, u0)?);
    }
    s.corner_vortices = Some(detect_corner_vortices(&lane.fields));
    Ok(())
}

fn resources_json(case: &ResolvedCase, report: &ResourceReport) -> String {
    let v = serde_json::json!({ "meta": case.meta(case.config.backend.label()), "resources": report });
    serde_json::to_string_pretty(&v).expect("report serializes") + "\n"
}

/// Resource report for a case without running it.
pub fn resources(case: &ResolvedCase) -> Result<String, RunError> {
    let set = VelocitySet::<f64>::new(case.lattice);
    let report = resource_estimate(&set, &case.mesh).map_err(|e| ConfigError::field("mesh", e.to_string()))?;
    Ok(resources_json(case, &report))
}
