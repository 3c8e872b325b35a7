use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use serde::Serialize;

use painleve_core::gl::{minimize_continuation, summarize, GLSummary};
use painleve_core::io::{load_field2d, save_field1d, save_field2d, save_jsonl};
use painleve_core::newton::{DescentReport, NewtonStep, Solution};
use painleve_core::ode::solve_hastings_mcleod;
use painleve_core::pde::{
    monotonicity, ordering_excess, rescale_to_allen_cahn, solve_connecting, ConnectProblem, LEFT_MARGIN,
};
use painleve_core::special::heteroclinic;
use painleve_core::verify::{gl_field_name, run_verification, Artifacts, VerificationReport};

use crate::config::RunConfig;
use crate::error::CliError;

pub const HM_FIELD: &str = "h.csv";
pub const HM_LOG: &str = "hm_log.jsonl";
pub const HM_SUMMARY: &str = "hm_summary.json";
pub const CONNECT_FIELD: &str = "y.csv";
pub const CONNECT_LOG: &str = "connect_log.jsonl";
pub const CONNECT_SUMMARY: &str = "connect_summary.json";
pub const GL_SUMMARY: &str = "gl_summary.json";
pub const PROFILE: &str = "profile.csv";
pub const REPORT: &str = "report.json";
pub const PROFILE_HEADER: [&str; 3] = ["t2", "ytilde", "tanh_ref"];

pub fn gl_log_name(epsilon: f64) -> String {
    format!("gl_log_eps{epsilon}.jsonl")
}

/// Where and how loudly a command runs.
#[derive(Debug, Clone)]
pub struct Context {
    pub out: PathBuf,
    pub quiet: bool,
}

impl Context {
    fn note(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn prepare(&self) -> Result<(), CliError> {
        fs::create_dir_all(&self.out).map_err(|source| CliError::Write {
            path: self.out.clone(),
            source,
        })
    }
}

fn started_at() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let wrap = |source| CliError::Write {
        path: path.to_owned(),
        source,
    };
    let file = File::create(path).map_err(wrap)?;
    serde_json::to_writer_pretty(BufWriter::new(file), value).map_err(|e| wrap(e.into()))
}

fn final_residual(log: &[NewtonStep]) -> f64 {
    log.last().map_or(f64::NAN, |s| s.residual_sup)
}

fn newton_iters<F>(sol: &Solution<F>) -> usize {
    sol.log.len().saturating_sub(1)
}

#[derive(Debug, Serialize)]
struct HmSummary {
    started_at: String,
    a: f64,
    b: f64,
    n: usize,
    left_bc: f64,
    right_bc: f64,
    newton_iters: usize,
    residual_sup: f64,
}

pub fn run_hm(cfg: &RunConfig, ctx: &Context) -> Result<(), CliError> {
    ctx.prepare()?;
    let started_at = started_at();
    let prob = cfg.hm_problem()?;
    ctx.note(format!(
        "hm: solving on [{}, {}] with {} nodes",
        cfg.hm.a, cfg.hm.b, cfg.hm.n
    ));
    let sol = solve_hastings_mcleod(&prob, None)?;
    save_field1d(&ctx.path(HM_FIELD), &sol.field)?;
    save_jsonl(&ctx.path(HM_LOG), &sol.log)?;
    let summary = HmSummary {
        started_at,
        a: cfg.hm.a,
        b: cfg.hm.b,
        n: cfg.hm.n,
        left_bc: prob.left_bc(),
        right_bc: prob.right_bc(),
        newton_iters: newton_iters(&sol),
        residual_sup: final_residual(&sol.log),
    };
    write_json(&ctx.path(HM_SUMMARY), &summary)?;
    ctx.note(format!(
        "hm: converged in {} Newton steps, residual {:.3e}",
        summary.newton_iters, summary.residual_sup
    ));
    Ok(())
}

#[derive(Debug, Serialize)]
struct ConnectSummary {
    started_at: String,
    x1min: f64,
    x1max: f64,
    x2max: f64,
    n1: usize,
    n2: usize,
    descent: Option<DescentReport>,
    newton_iters: usize,
    residual_sup: f64,
    ordering_excess: f64,
    x1_increases: usize,
    x2_decreases: usize,
}

pub fn run_connect(cfg: &RunConfig, ctx: &Context) -> Result<(), CliError> {
    ctx.prepare()?;
    let started_at = started_at();
    let grid = cfg.connect_grid()?;
    ctx.note(format!("connect: solving on a {}x{} grid", grid.n1(), grid.n2()));
    let prob = ConnectProblem::with_matched_h(grid, cfg.solver)?;
    let sol = solve_connecting(&prob, None)?;
    save_field2d(&ctx.path(CONNECT_FIELD), &sol.field)?;
    save_jsonl(&ctx.path(CONNECT_LOG), &sol.log)?;
    let mono = monotonicity(&sol.field, LEFT_MARGIN);
    let c = &cfg.connect;
    let summary = ConnectSummary {
        started_at,
        x1min: c.x1min,
        x1max: c.x1max,
        x2max: c.x2max,
        n1: c.n1,
        n2: c.n2,
        descent: sol.descent,
        newton_iters: newton_iters(&sol),
        residual_sup: final_residual(&sol.log),
        ordering_excess: ordering_excess(&sol.field, &prob),
        x1_increases: mono.x1_violations,
        x2_decreases: mono.x2_violations,
    };
    write_json(&ctx.path(CONNECT_SUMMARY), &summary)?;
    ctx.note(format!(
        "connect: {} descent + {} Newton steps, residual {:.3e}",
        summary.descent.map_or(0, |d| d.iterations),
        summary.newton_iters,
        summary.residual_sup
    ));
    Ok(())
}

#[derive(Debug, Serialize)]
struct GlRun {
    #[serde(flatten)]
    summary: GLSummary,
    n1: usize,
    n2: usize,
    descent: Option<DescentReport>,
    newton_iters: usize,
    residual_sup: f64,
}

#[derive(Debug, Serialize)]
struct GlSummaryFile {
    started_at: String,
    chi: f64,
    runs: Vec<GlRun>,
}

pub fn run_gl(cfg: &RunConfig, ctx: &Context) -> Result<(), CliError> {
    ctx.prepare()?;
    let started_at = started_at();
    ctx.note(format!("gl: continuation over ε = {:?}", cfg.gl.epsilons));
    let chain = minimize_continuation(cfg.gl.chi, &cfg.gl.epsilons, cfg.solver)?;
    let mut runs = Vec::with_capacity(chain.len());
    for (prob, sol) in &chain {
        let eps = prob.params().epsilon();
        save_field2d(&ctx.path(&gl_field_name(eps)), &sol.field)?;
        save_jsonl(&ctx.path(&gl_log_name(eps)), &sol.log)?;
        let run = GlRun {
            summary: summarize(&sol.field, prob)?,
            n1: prob.grid().n1(),
            n2: prob.grid().n2(),
            descent: sol.descent,
            newton_iters: newton_iters(sol),
            residual_sup: final_residual(&sol.log),
        };
        ctx.note(format!(
            "gl: ε = {eps}: energy {:.6e}, residual {:.3e}",
            run.summary.energy, run.residual_sup
        ));
        runs.push(run);
    }
    let file = GlSummaryFile {
        started_at,
        chi: cfg.gl.chi,
        runs,
    };
    write_json(&ctx.path(GL_SUMMARY), &file)
}

fn require(path: PathBuf) -> Result<PathBuf, CliError> {
    if path.is_file() {
        Ok(path)
    } else {
        Err(CliError::MissingArtifact(path))
    }
}

pub fn run_rescale(cfg: &RunConfig, ctx: &Context) -> Result<(), CliError> {
    let y = load_field2d(&require(ctx.path(CONNECT_FIELD))?)?;
    let r = &cfg.rescale;
    let profile = rescale_to_allen_cahn(&y, r.x1_level, r.x2_offset, r.t2_window)?;
    let path = ctx.path(PROFILE);
    let csv_err = |e: csv::Error| CliError::Write {
        path: path.clone(),
        source: e.into(),
    };
    let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
    w.write_record(PROFILE_HEADER).map_err(csv_err)?;
    for (t, v) in profile.t2_samples.iter().zip(&profile.values) {
        w.write_record([
            format!("{t:.16e}"),
            format!("{v:.16e}"),
            format!("{:.16e}", heteroclinic(*t)),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|source| CliError::Write {
        path: path.clone(),
        source,
    })?;
    ctx.note(format!(
        "rescale: x1 = {}, sup gap to tanh profile {:.3e}",
        r.x1_level,
        profile.heteroclinic_gap()
    ));
    Ok(())
}

fn save_artifacts(a: &Artifacts, ctx: &Context) -> Result<(), CliError> {
    save_field1d(&ctx.path(HM_FIELD), &a.h)?;
    save_field2d(&ctx.path(CONNECT_FIELD), &a.y)?;
    for (prob, u) in &a.gl {
        save_field2d(&ctx.path(&gl_field_name(prob.params().epsilon())), u)?;
    }
    Ok(())
}

/// Load (or, if allowed, compute) the fields, evaluate every check and write
/// `report.json`. A report with failures is still written before the error
/// is returned.
pub fn run_verify(cfg: &RunConfig, ctx: &Context) -> Result<VerificationReport, CliError> {
    let eps = &cfg.gl.epsilons;
    let missing: Vec<PathBuf> = Artifacts::expected_files(&ctx.out, eps)
        .into_iter()
        .filter(|p| !p.is_file())
        .collect();
    let artifacts = if missing.is_empty() {
        Artifacts::load(&ctx.out, cfg.solver, cfg.gl.chi, eps)?
    } else if cfg.verify.compute_missing {
        ctx.prepare()?;
        ctx.note(format!("verify: {} artifact(s) missing, solving", missing.len()));
        let a = Artifacts::compute(&cfg.verify_settings()?)?;
        save_artifacts(&a, ctx)?;
        a
    } else {
        return Err(CliError::MissingArtifact(missing[0].clone()));
    };

    let report = run_verification(&artifacts)?;
    write_json(&ctx.path(REPORT), &report)?;
    for c in &report.checks {
        ctx.note(format!(
            "{} {:<40} {:.3e} <= {:.3e}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.measured,
            c.tolerance
        ));
    }
    report
        .validate()
        .map_err(|e| CliError::IncompleteReport(e.to_string()))?;
    let failed = report.failures().count();
    if failed > 0 {
        return Err(CliError::ChecksFailed {
            failed,
            total: report.checks.len(),
        });
    }
    Ok(report)
}
