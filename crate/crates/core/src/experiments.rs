//! Config-driven runs: TOML ingestion, task orchestration, persistence of
//! results.json / profiles / sweeps / report.md, and re-verification of a
//! results directory from the persisted profiles.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::asymptotics::{
    exponent_checks, nonexistence_scan, sweep_mu_to_alpha_bar, sweep_mu_to_infinity, sweep_mu_to_zero, ExponentReport,
    PropertyCheck, SweepConstants, SweepKind, SweepOptions, SweepRecord,
};
use crate::bubbles::{appendix_norms, appendix_regression};
use crate::error::{Error, Result};
use crate::ode::{shoot_ground_state, GroundStateProfile};
use crate::par::ExecMode;
use crate::params::{classify_regime, Params, RegimeKind};
use crate::radial::{norm_triple, read_profile_csv, write_profile_csv, GridSpec, NormTriple};
use crate::solvers::{certify, certify_profile, solve_local_min, solve_mountain_pass, ManifoldSign, SolverOptions, SolverResult};
use crate::thresholds::{gn_constant, sobolev_constant, threshold_constants, ThresholdSet};

pub const RESULTS_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Thresholds,
    Shoot,
    SolvePlus,
    SolveMinus,
    Sweep,
    Appendix,
    Nonexist,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsBlock {
    pub n: usize,
    pub p: f64,
    pub q: f64,
    #[serde(default = "one")]
    pub a: f64,
    /// Absolute μ.
    pub mu: Option<f64>,
    /// μ as a fraction of α a^{−q(1−γ)} (Subcritical) or ᾱ (MassCritical).
    pub mu_rel: Option<f64>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub m: usize,
    pub r_max: f64,
    pub kappa: f64,
}

impl Default for GridBlock {
    fn default() -> Self {
        let g = SolverOptions::default().grid;
        GridBlock { m: g.m, r_max: g.r_max, kappa: g.kappa }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverBlock {
    pub tol_g: f64,
    pub tol_pohozaev: f64,
    pub max_iter: usize,
    pub adapt_grid: bool,
}

impl Default for SolverBlock {
    fn default() -> Self {
        let o = SolverOptions::default();
        SolverBlock { tol_g: o.tol_g, tol_pohozaev: o.tol_pohozaev, max_iter: o.max_iter, adapt_grid: o.adapt_grid }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub kind: SweepKind,
    /// μ values, or distances ᾱ − μ for `mu_to_alpha_bar`.
    pub values: Option<Vec<f64>>,
    /// Geometric grid start·ratio^k, k < count, used when `values` is absent.
    pub start: Option<f64>,
    pub ratio: Option<f64>,
    pub count: Option<usize>,
    /// Values are fractions of α a^{−q(1−γ)} or ᾱ.
    #[serde(default)]
    pub relative: bool,
    #[serde(default = "yes")]
    pub warm_start: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AppendixBlock {
    /// Overrides params.q for the L^q column.
    pub q: Option<f64>,
    pub eps: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonexistBlock {
    pub mu: Vec<f64>,
    #[serde(default = "default_triples")]
    pub triples: usize,
    #[serde(default = "default_probes")]
    pub probes: usize,
}

fn default_triples() -> usize {
    1000
}

fn default_probes() -> usize {
    50
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    /// Write profiles/*.csv.
    #[serde(default = "yes")]
    pub profiles: bool,
}

fn default_dir() -> PathBuf {
    PathBuf::from("results")
}

impl Default for OutputBlock {
    fn default() -> Self {
        OutputBlock { dir: default_dir(), profiles: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Pipeline stages; derived from the regime when empty.
    #[serde(default)]
    pub tasks: Vec<Task>,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads (0 = rayon default).
    #[serde(default)]
    pub threads: usize,
    pub params: ParamsBlock,
    #[serde(default)]
    pub grid: GridBlock,
    #[serde(default)]
    pub solver: SolverBlock,
    pub sweep: Option<SweepBlock>,
    pub appendix: Option<AppendixBlock>,
    pub nonexist: Option<NonexistBlock>,
    #[serde(default)]
    pub output: OutputBlock,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Format(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let pb = &self.params;
        Params::new(pb.n, pb.p, pb.q, pb.a, pb.mu.unwrap_or(0.0))?;
        if pb.mu.is_some() && pb.mu_rel.is_some() {
            return Err(Error::Param("params: give mu or mu_rel, not both".into()));
        }
        let s = &self.solver;
        if !(s.tol_g > 0.0 && s.tol_pohozaev > 0.0 && s.max_iter > 0) {
            return Err(Error::Param("solver: tolerances and max_iter must be positive".into()));
        }
        if !(self.grid.m >= 16 && self.grid.r_max > 0.0 && self.grid.kappa >= 0.0) {
            return Err(Error::Param("grid: need m >= 16, r_max > 0, kappa >= 0".into()));
        }
        if let Some(sw) = &self.sweep {
            let v = sweep_values(sw)?;
            let up = v.windows(2).all(|w| w[1] > w[0]);
            let down = v.windows(2).all(|w| w[1] < w[0]);
            if !(up || down) || v.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                return Err(Error::Param("sweep: values must be positive and strictly monotone".into()));
            }
        }
        if let Some(ap) = &self.appendix {
            if ap.eps.iter().any(|e| !(*e > 0.0 && *e <= 0.3)) {
                return Err(Error::Param("appendix: eps values must lie in (0, 0.3]".into()));
            }
        }
        if let Some(ne) = &self.nonexist {
            if ne.mu.iter().any(|m| !(*m < 0.0)) {
                return Err(Error::Param("nonexist: mu values must be negative".into()));
            }
        }
        for t in self.effective_tasks() {
            let needs = match t {
                Task::Sweep => self.sweep.is_none().then_some("sweep"),
                Task::Appendix => self.appendix.is_none().then_some("appendix"),
                Task::Nonexist => self.nonexist.is_none().then_some("nonexist"),
                Task::SolvePlus | Task::SolveMinus => {
                    (pb.mu.is_none() && pb.mu_rel.is_none()).then_some("params.mu or params.mu_rel")
                }
                _ => None,
            };
            if let Some(block) = needs {
                return Err(Error::Param(format!("task {t:?} needs [{block}]")));
            }
        }
        Ok(())
    }

    /// Tasks in pipeline order.
    pub fn effective_tasks(&self) -> Vec<Task> {
        let mut t = if self.tasks.is_empty() {
            let mut t = vec![Task::Thresholds, Task::Shoot];
            let has_mu = self.params.mu.is_some() || self.params.mu_rel.is_some();
            let q_ok = Params::new(self.params.n, self.params.p, self.params.q, self.params.a, 0.0).ok();
            if has_mu {
                if q_ok.is_some_and(|p| classify_regime(&p) == RegimeKind::Subcritical) {
                    t.push(Task::SolvePlus);
                }
                t.push(Task::SolveMinus);
            }
            if self.sweep.is_some() {
                t.push(Task::Sweep);
            }
            if self.appendix.is_some() {
                t.push(Task::Appendix);
            }
            if self.nonexist.is_some() {
                t.push(Task::Nonexist);
            }
            t
        } else {
            self.tasks.clone()
        };
        t.sort();
        t.dedup();
        t
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            grid: GridSpec::new(self.grid.m, self.grid.r_max, self.grid.kappa),
            tol_g: self.solver.tol_g,
            tol_pohozaev: self.solver.tol_pohozaev,
            max_iter: self.solver.max_iter,
            adapt_grid: self.solver.adapt_grid,
        }
    }
}

fn sweep_values(sw: &SweepBlock) -> Result<Vec<f64>> {
    if let Some(v) = &sw.values {
        return Ok(v.clone());
    }
    match (sw.start, sw.ratio, sw.count) {
        (Some(s), Some(r), Some(c)) if r > 0.0 && r != 1.0 && c > 0 => Ok((0..c).map(|k| s * r.powi(k as i32)).collect()),
        _ => Err(Error::Param("sweep: give values, or start, ratio (> 0, != 1) and count".into())),
    }
}

/// Lightweight summary of φ₀ for results.json.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundStateSummary {
    pub beta_star: f64,
    pub norms: NormTriple,
    pub mass_p: f64,
    pub residual: f64,
    pub r_cut: f64,
    pub bisections: usize,
    pub converged: bool,
    /// ‖φ₀‖_p^p of the persisted nodal values.
    pub grid_mass: f64,
    pub profile: Option<String>,
}

/// A persisted solve: enough to re-certify the profile from disk.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveEntry {
    pub params: Params,
    pub sign: ManifoldSign,
    pub tol_g: f64,
    pub tol_pohozaev: f64,
    pub lambda: f64,
    pub level: f64,
    pub converged: bool,
    /// Norms recomputed from the persisted nodal values.
    pub triple: NormTriple,
    pub certificate: crate::solvers::CertificateReport,
    pub profile: Option<String>,
    pub iterations: usize,
    pub newton_steps: usize,
    pub message: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepEntry {
    pub params: Params,
    pub alpha_bar: Option<f64>,
    pub report: ExponentReport,
}

/// Everything a run produces apart from profiles and CSV tables.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RunResults {
    pub version: u32,
    pub seed: u64,
    pub tasks: Vec<Task>,
    /// Flat scalar summary (name → value).
    pub scalars: BTreeMap<String, f64>,
    pub thresholds: Option<ThresholdSet>,
    pub ground_state: Option<GroundStateSummary>,
    pub solves: BTreeMap<String, SolveEntry>,
    pub sweep: Option<SweepEntry>,
    pub appendix: Option<Value>,
    pub nonexist: Option<Value>,
    pub checks: Vec<PropertyCheck>,
    pub failures: Vec<String>,
}

/// How a run ended; maps onto the CLI exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Success,
    ConfigError,
    NumericalFailure,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Success => 0,
            RunStatus::ConfigError => 2,
            RunStatus::NumericalFailure => 3,
        }
    }
}

pub struct RunOutcome {
    pub status: RunStatus,
    pub dir: PathBuf,
    pub results: RunResults,
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    dir: PathBuf,
    params: Params,
    s: Option<f64>,
    c_gn: Option<f64>,
    phi0: Option<GroundStateProfile>,
    th: Option<ThresholdSet>,
    res: RunResults,
}

impl Ctx<'_> {
    fn constants(&mut self) -> Result<(f64, f64)> {
        if let (Some(s), Some(c)) = (self.s, self.c_gn) {
            return Ok((s, c));
        }
        let s = sobolev_constant(self.params.n, self.params.p)?;
        let phi0 = shoot_ground_state(self.params.n, self.params.p, self.params.q)?;
        let c = gn_constant(&phi0)?;
        self.s = Some(s);
        self.c_gn = Some(c);
        self.phi0 = Some(phi0);
        self.res.scalars.insert("S".into(), s);
        self.res.scalars.insert("C_gn".into(), c);
        self.res.scalars.insert("sobolev_level".into(), s.powf(self.params.dim() / self.params.p));
        Ok((s, c))
    }

    /// Resolves μ from `mu` or `mu_rel` and computes the thresholds.
    fn thresholds(&mut self) -> Result<ThresholdSet> {
        if let Some(th) = self.th {
            return Ok(th);
        }
        let (s, c) = self.constants()?;
        let pb = &self.cfg.params;
        let base = threshold_constants(&self.params.with_mu(0.0), s, c)?;
        if let Some(rel) = pb.mu_rel {
            let scale = match base.regime {
                RegimeKind::Subcritical => base.alpha()? * self.params.a.powf(-self.params.q * (1.0 - self.params.gamma_q())),
                RegimeKind::MassCritical => base.alpha_bar()?,
                RegimeKind::Supercritical => {
                    return Err(Error::Param("mu_rel is undefined in the Supercritical regime; give mu".into()))
                }
            };
            self.params = self.params.with_mu(rel * scale);
        }
        let th = threshold_constants(&self.params, s, c)?;
        let sc = &mut self.res.scalars;
        if pb.mu.is_some() || pb.mu_rel.is_some() {
            sc.insert("mu".into(), self.params.mu);
        }
        sc.insert("gamma_q".into(), self.params.gamma_q());
        sc.insert("p_star".into(), self.params.p_star());
        for (k, v) in [
            ("C_prime", th.c_prime),
            ("C_dprime", th.c_dprime),
            ("alpha", th.alpha),
            ("alpha_bar", th.alpha_bar),
            ("R0", th.r0),
            ("R1", th.r1),
            ("t_bar", th.t_bar),
        ] {
            if let Some(v) = v {
                sc.insert(k.into(), v);
            }
        }
        if pb.mu.is_none() && pb.mu_rel.is_none() {
            self.th = Some(th);
            self.res.thresholds = Some(th);
            return Ok(th);
        }
        self.res.checks.push(PropertyCheck {
            name: "mu_bound".into(),
            passed: th.mu_bound_ok(&self.params),
            detail: format!("regime {:?}, mu = {:.6e}", th.regime, self.params.mu),
        });
        self.th = Some(th);
        self.res.thresholds = Some(th);
        Ok(th)
    }

    fn write_profile(&self, name: &str, u: &crate::radial::RadialFunction) -> Result<Option<String>> {
        if !self.cfg.output.profiles {
            return Ok(None);
        }
        let rel = format!("profiles/{name}.csv");
        write_profile_csv(u, self.params.p, &self.dir.join(&rel))?;
        Ok(Some(rel))
    }

    fn shoot(&mut self) -> Result<()> {
        self.constants()?;
        let phi0 = self.phi0.clone().expect("constants computes phi0");
        let path = self.write_profile("phi0", &phi0.profile)?;
        self.res.scalars.insert("phi0_beta".into(), phi0.beta_star);
        self.res.scalars.insert("phi0_mass_p".into(), phi0.mass_p);
        self.res.checks.push(PropertyCheck {
            name: "ground_state_converged".into(),
            passed: phi0.converged(),
            detail: format!("residual {:.3e}, pohozaev defect {:.3e}", phi0.residual, phi0.pohozaev_defect()),
        });
        self.res.ground_state = Some(GroundStateSummary {
            beta_star: phi0.beta_star,
            norms: phi0.norms,
            mass_p: phi0.mass_p,
            residual: phi0.residual,
            r_cut: phi0.r_cut,
            bisections: phi0.bisections,
            converged: phi0.converged(),
            grid_mass: crate::radial::lr_norm(&phi0.profile, phi0.p)?,
            profile: path,
        });
        Ok(())
    }

    fn solve(&mut self, sign: ManifoldSign) -> Result<()> {
        let th = self.thresholds()?;
        let opts = self.cfg.solver_options();
        let r: SolverResult = match sign {
            ManifoldSign::Plus => solve_local_min(&self.params, &th, None, &opts)?,
            ManifoldSign::Minus => solve_mountain_pass(&self.params, &th, None, &opts)?,
        };
        let name = match sign {
            ManifoldSign::Plus => "plus",
            ManifoldSign::Minus => "minus",
        };
        let cert = certify(&r, &self.params);
        let path = self.write_profile(name, &r.profile)?;
        self.res.scalars.insert(format!("level_{name}"), r.level);
        self.res.scalars.insert(format!("lambda_{name}"), r.lambda);
        if !r.converged {
            self.res.failures.push(format!("solve-{name}: not converged ({})", r.message));
        }
        self.res.solves.insert(
            name.into(),
            SolveEntry {
                params: self.params,
                sign,
                tol_g: opts.tol_g,
                tol_pohozaev: opts.tol_pohozaev,
                lambda: r.lambda,
                level: r.level,
                converged: r.converged,
                triple: norm_triple(&r.profile, &self.params),
                certificate: cert,
                profile: path,
                iterations: r.iterations,
                newton_steps: r.newton_steps,
                message: r.message.clone(),
            },
        );
        Ok(())
    }

    /// Level inequalities that need both branches.
    fn level_checks(&mut self) {
        let lvl = self.res.scalars.get("sobolev_level").copied();
        let nf = self.params.dim();
        let plus = self.res.solves.get("plus").filter(|e| e.converged).map(|e| e.level);
        let minus = self.res.solves.get("minus").filter(|e| e.converged).map(|e| e.level);
        if let (Some(mp), Some(mm), Some(l)) = (plus, minus, lvl) {
            self.res.checks.push(PropertyCheck {
                name: "level_gap".into(),
                passed: mp < 0.0 && mm > 0.0 && mm < mp + l / nf - 1e-3,
                detail: format!("m+ = {mp:.6e}, m- = {mm:.6e}, m+ + S^(N/p)/N = {:.6e}", mp + l / nf),
            });
        } else if let (None, Some(mm), Some(l)) = (plus, minus, lvl) {
            self.res.checks.push(PropertyCheck {
                name: "level_below_sobolev".into(),
                passed: mm > 0.0 && mm < l / nf,
                detail: format!("m- = {mm:.6e}, S^(N/p)/N = {:.6e}", l / nf),
            });
        }
    }

    fn sweep(&mut self) -> Result<()> {
        let sw = self.cfg.sweep.clone().expect("validated");
        let (s, c) = self.constants()?;
        let mut vals = sweep_values(&sw)?;
        let base = threshold_constants(&self.params.with_mu(0.0), s, c)?;
        let alpha_bar = base.alpha_bar;
        if sw.relative {
            let scale = match sw.kind {
                SweepKind::MuToZero => base.alpha()? * self.params.a.powf(-self.params.q * (1.0 - self.params.gamma_q())),
                SweepKind::MuToAlphaBar => base.alpha_bar()?,
                SweepKind::MuToInfinity => return Err(Error::Param("sweep: relative values need alpha or alpha_bar".into())),
            };
            vals.iter_mut().for_each(|v| *v *= scale);
        }
        let consts = SweepConstants { s, c_gn: c, phi0: self.phi0.as_ref() };
        let opts = SweepOptions { solver: self.cfg.solver_options(), warm_start: sw.warm_start, exec: ExecMode::Parallel };
        let template = self.params;
        let report = match sw.kind {
            SweepKind::MuToZero => sweep_mu_to_zero(&template, &vals, &consts, &opts)?,
            SweepKind::MuToAlphaBar => sweep_mu_to_alpha_bar(&template, &vals, &consts, &opts)?,
            SweepKind::MuToInfinity => sweep_mu_to_infinity(&template, &vals, &consts, &opts)?,
        };
        let rel = format!("sweeps/{}.csv", kind_name(sw.kind));
        write_file(&self.dir.join(&rel), &report.records_csv())?;
        for ch in &report.checks {
            self.res.scalars.insert(format!("slope_{}", ch.label), ch.slope);
            self.res.checks.push(PropertyCheck {
                name: format!("exponent_{}", ch.label),
                passed: ch.ok,
                detail: format!(
                    "slope {:.4} vs target {:.4} (rel err {:.2e}, R^2 {:.5}, {} points, {} dropped)",
                    ch.slope, ch.target, ch.rel_err, ch.r_squared, ch.points, ch.dropped
                ),
            });
        }
        self.res.checks.extend(report.properties.iter().cloned());
        let unconverged = report.records.iter().filter(|r| !r.converged).count();
        if unconverged > 0 {
            self.res.failures.push(format!("sweep: {unconverged} unconverged points (excluded from fits)"));
        }
        self.res.sweep = Some(SweepEntry { params: template, alpha_bar, report });
        Ok(())
    }

    fn appendix(&mut self) -> Result<()> {
        let ap = self.cfg.appendix.clone().expect("validated");
        let q = ap.q.unwrap_or(self.params.q);
        let table = appendix_norms(self.params.n, self.params.p, q, &ap.eps, None)?;
        let report = appendix_regression(&table)?;
        let mut csv = String::from("eps,grad,crit,grad_deficit,crit_deficit,lr_p,lr_q,grad_lr_p,grad_lr_q\n");
        for r in &table.rows {
            let _ = writeln!(
                csv,
                "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
                r.eps, r.grad, r.crit, r.grad_deficit, r.crit_deficit, r.lr[0], r.lr[1], r.grad_lr[0], r.grad_lr[1]
            );
        }
        write_file(&self.dir.join("sweeps/appendix.csv"), &csv)?;
        self.res.checks.push(PropertyCheck {
            name: "appendix_regressions".into(),
            passed: report.all_ok,
            detail: format!(
                "grad deficit slope {:.4} (target {:.4}), crit deficit slope {:.4} (target {:.4})",
                report.grad_deficit.fitted, report.grad_deficit.target, report.crit_deficit.fitted, report.crit_deficit.target
            ),
        });
        self.res.appendix = Some(json!({ "table": table, "report": report }));
        Ok(())
    }

    fn nonexist(&mut self) -> Result<()> {
        let ne = self.cfg.nonexist.clone().expect("validated");
        let (s, c) = self.constants()?;
        let consts = SweepConstants { s, c_gn: c, phi0: None };
        let opts = SweepOptions { solver: self.cfg.solver_options(), warm_start: false, exec: ExecMode::Parallel };
        let rep = nonexistence_scan(&self.params, &ne.mu, &consts, ne.triples, ne.probes, self.cfg.seed, &opts)?;
        let mut csv = String::from("mu,triples,rejected,min_grad_ratio,min_energy_ratio,bounds_hold,probes,negative_lambda_hits\n");
        for p in &rep.points {
            let _ = writeln!(
                csv,
                "{:e},{},{},{:e},{:e},{},{},{}",
                p.mu, p.triples, p.rejected, p.min_grad_ratio, p.min_energy_ratio, p.bounds_hold, p.probes, p.negative_lambda_hits
            );
        }
        write_file(&self.dir.join("sweeps/nonexist.csv"), &csv)?;
        self.res.checks.push(PropertyCheck {
            name: "nonexistence_negative_mu".into(),
            passed: rep.all_ok(),
            detail: format!("{} mu values, {} triples each, {} probes each", rep.points.len(), ne.triples, ne.probes),
        });
        self.res.nonexist = Some(serde_json::to_value(&rep).map_err(|e| Error::Format(e.to_string()))?);
        Ok(())
    }
}

fn kind_name(k: SweepKind) -> &'static str {
    match k {
        SweepKind::MuToZero => "mu_to_zero",
        SweepKind::MuToAlphaBar => "mu_to_alpha_bar",
        SweepKind::MuToInfinity => "mu_to_infinity",
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(d) = path.parent() {
        std::fs::create_dir_all(d)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v).map_err(|e| Error::Format(e.to_string()))
}

fn classify(e: &Error) -> RunStatus {
    if e.is_input_error() || matches!(e, Error::Threshold(_)) {
        RunStatus::ConfigError
    } else {
        RunStatus::NumericalFailure
    }
}

/// Runs every task of `cfg`, writing into `dir` (defaults to the config's
/// output directory). Outputs written before a failure are kept.
pub fn run(cfg: &RunConfig, dir: Option<&Path>) -> Result<RunOutcome> {
    cfg.validate()?;
    let dir = dir.map(Path::to_path_buf).unwrap_or_else(|| cfg.output.dir.clone());
    std::fs::create_dir_all(&dir)?;
    let pb = &cfg.params;
    let params = Params::new(pb.n, pb.p, pb.q, pb.a, pb.mu.unwrap_or(0.0))?;
    let tasks = cfg.effective_tasks();
    let mut ctx = Ctx {
        cfg,
        dir: dir.clone(),
        params,
        s: None,
        c_gn: None,
        phi0: None,
        th: None,
        res: RunResults { version: RESULTS_VERSION, seed: cfg.seed, tasks: tasks.clone(), ..Default::default() },
    };
    let mut status = RunStatus::Success;
    for &t in &tasks {
        let r = match t {
            Task::Thresholds => ctx.thresholds().map(|_| ()),
            Task::Shoot => ctx.shoot(),
            Task::SolvePlus => ctx.solve(ManifoldSign::Plus),
            Task::SolveMinus => ctx.solve(ManifoldSign::Minus),
            Task::Sweep => ctx.sweep(),
            Task::Appendix => ctx.appendix(),
            Task::Nonexist => ctx.nonexist(),
        };
        if let Err(e) = r {
            log::error!("task {t:?}: {e}");
            ctx.res.failures.push(format!("{t:?}: {e}"));
            let st = classify(&e);
            if st == RunStatus::ConfigError {
                status = st;
                break;
            }
            status = RunStatus::NumericalFailure;
        }
    }
    ctx.level_checks();
    if status == RunStatus::Success && !ctx.res.failures.is_empty() {
        status = RunStatus::NumericalFailure;
    }
    write_file(&dir.join("config.toml"), &toml::to_string(cfg).map_err(|e| Error::Format(e.to_string()))?)?;
    write_file(&dir.join("results.json"), &to_json(&ctx.res)?)?;
    write_file(&dir.join("report.md"), &report_md(&ctx.res, status))?;
    Ok(RunOutcome { status, dir, results: ctx.res })
}

fn report_md(res: &RunResults, status: RunStatus) -> String {
    let mut s = String::from("# Run report\n\n");
    let _ = writeln!(s, "Status: {status:?} (exit {})\n", status.exit_code());
    let _ = writeln!(s, "Tasks: {:?}\n", res.tasks);
    s.push_str("## Scalars\n\n| name | value |\n|---|---|\n");
    for (k, v) in &res.scalars {
        let _ = writeln!(s, "| {k} | {v:.10e} |");
    }
    s.push_str("\n## Checks\n\n");
    for c in &res.checks {
        let _ = writeln!(s, "- {} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    for (name, e) in &res.solves {
        let c = &e.certificate;
        let _ = writeln!(
            s,
            "- {} certificate_{name}: |P|/A = {:.2e}, identity = {:.2e}, grad = {:.2e}, lambda = {:.6e}",
            if c.passed { "PASS" } else { "FAIL" },
            c.pohozaev_residual,
            c.identity_residual,
            c.grad_norm,
            c.lambda
        );
    }
    if !res.failures.is_empty() {
        s.push_str("\n## Failures\n\n");
        for f in &res.failures {
            let _ = writeln!(s, "- {f}");
        }
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<PropertyCheck>,
    pub passed: bool,
}

fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

/// Re-certifies every persisted profile and refits every persisted sweep.
/// Writes verify.json and returns the report. Missing or corrupt files are
/// format errors.
pub fn verify(dir: &Path) -> Result<VerifyReport> {
    let path = dir.join("results.json");
    let text = std::fs::read_to_string(&path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    let res: RunResults = serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    if res.version != RESULTS_VERSION {
        return Err(Error::Format(format!("results version {} (expected {RESULTS_VERSION})", res.version)));
    }
    let mut checks = Vec::new();
    for (name, e) in &res.solves {
        let Some(rel) = &e.profile else { continue };
        let (u, p) = read_profile_csv(&dir.join(rel))?;
        if p != e.params.p || u.grid().dim() != e.params.n {
            return Err(Error::Format(format!("{rel}: header does not match recorded parameters")));
        }
        let t = norm_triple(&u, &e.params);
        let worst = rel_diff(t.a, e.triple.a).max(rel_diff(t.b, e.triple.b)).max(rel_diff(t.c, e.triple.c));
        checks.push(PropertyCheck {
            name: format!("{name}_norms_reload"),
            passed: worst <= 1e-12,
            detail: format!("max relative norm difference {worst:.3e}"),
        });
        let cert = certify_profile(&u, &e.params, e.sign, e.tol_g, e.tol_pohozaev);
        checks.push(PropertyCheck {
            name: format!("{name}_pohozaev"),
            passed: cert.pohozaev_ok,
            detail: format!("|P|/A = {:.3e}", cert.pohozaev_residual),
        });
        checks.push(PropertyCheck {
            name: format!("{name}_identity"),
            passed: cert.identity_ok,
            detail: format!("identity residual = {:.3e}", cert.identity_residual),
        });
        checks.push(PropertyCheck {
            name: format!("{name}_certificate"),
            passed: cert.passed == e.certificate.passed && (cert.passed || !e.converged),
            detail: format!("recertified passed = {}, recorded = {}", cert.passed, e.certificate.passed),
        });
    }
    if let Some(gs) = &res.ground_state {
        if let Some(rel) = &gs.profile {
            let (u, p) = read_profile_csv(&dir.join(rel))?;
            let d = rel_diff(crate::radial::lr_norm(&u, p)?, gs.grid_mass);
            checks.push(PropertyCheck {
                name: "phi0_reload".into(),
                passed: d <= 1e-12,
                detail: format!("relative mass difference {d:.3e}"),
            });
        }
    }
    if let Some(sw) = &res.sweep {
        let refit = exponent_checks(sw.report.kind, &sw.params, &sw.report.records, sw.alpha_bar.unwrap_or(0.0))?;
        let same = refit.len() == sw.report.checks.len()
            && refit.iter().zip(&sw.report.checks).all(|(a, b)| a.slope == b.slope && a.ok == b.ok);
        checks.push(PropertyCheck {
            name: "sweep_refit".into(),
            passed: same,
            detail: refit.iter().map(|c| format!("{} {:.4}", c.label, c.slope)).collect::<Vec<_>>().join(", "),
        });
        let csv = dir.join(format!("sweeps/{}.csv", kind_name(sw.report.kind)));
        let on_disk = std::fs::read_to_string(&csv).map_err(|e| Error::Format(format!("{}: {e}", csv.display())))?;
        checks.push(PropertyCheck {
            name: "sweep_csv".into(),
            passed: on_disk == sw.report.records_csv(),
            detail: csv.display().to_string(),
        });
    }
    let passed = checks.iter().all(|c| c.passed);
    let rep = VerifyReport { checks, passed };
    write_file(&dir.join("verify.json"), &to_json(&rep)?)?;
    Ok(rep)
}

/// Records of a persisted sweep, for callers that post-process results.
pub fn sweep_records(res: &RunResults) -> &[SweepRecord] {
    res.sweep.as_ref().map_or(&[], |s| &s.report.records)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
tasks = ["thresholds", "solve-plus"]
[params]
n = 3
p = 2.0
q = 2.5
mu_rel = 0.5
[grid]
m = 2048
r_max = 40.0
kappa = 9.0
"#;

    #[test]
    fn unknown_keys_and_bad_inputs_are_rejected() {
        assert!(RunConfig::from_toml(&MINIMAL.replace("kappa", "kapa")).is_err());
        let e = RunConfig::from_toml(&MINIMAL.replace("q = 2.5", "q = 7.0")).unwrap_err();
        assert!(e.is_input_error() && e.to_string().contains("p*"), "{e}");
        let e = RunConfig::from_toml(&format!("{MINIMAL}[sweep]\nkind = \"mu_to_zero\"\nvalues = [0.1, 0.3, 0.2]\n")).unwrap_err();
        assert!(e.to_string().contains("monotone"));
        let e = RunConfig::from_toml(&MINIMAL.replace("mu_rel = 0.5", "")).unwrap_err();
        assert!(e.to_string().contains("mu"));
    }

    #[test]
    fn minimal_run_then_verify() {
        let cfg = RunConfig::from_toml(MINIMAL).unwrap();
        let tmp = tempfile::tempdir().unwrap();
        let out = run(&cfg, Some(tmp.path())).unwrap();
        assert_eq!(out.status, RunStatus::Success, "{:?}", out.results.failures);
        let m = out.results.scalars["level_plus"];
        assert!(m < 0.0);
        let first = verify(tmp.path()).unwrap();
        assert!(first.passed, "{first:?}");
        let again = verify(tmp.path()).unwrap();
        assert_eq!(first, again);
        // Determinism of the scalar section.
        let tmp2 = tempfile::tempdir().unwrap();
        let out2 = run(&cfg, Some(tmp2.path())).unwrap();
        let bits = |r: &RunResults| r.scalars.iter().map(|(k, v)| (k.clone(), v.to_bits())).collect::<Vec<_>>();
        assert_eq!(bits(&out.results), bits(&out2.results));
        // A 1% perturbation of the persisted profile fails re-certification.
        let csv = tmp.path().join("profiles/plus.csv");
        let text = std::fs::read_to_string(&csv).unwrap();
        let bumped: String = text
            .lines()
            .map(|l| match l.split_once(',') {
                Some((r, v)) if !l.starts_with('#') && l != "r,u" => format!("{r},{}\n", v.parse::<f64>().unwrap() * 1.01),
                _ => format!("{l}\n"),
            })
            .collect();
        std::fs::write(&csv, bumped).unwrap();
        let bad = verify(tmp.path()).unwrap();
        assert!(!bad.passed);
        let pz = bad.checks.iter().find(|c| c.name == "plus_pohozaev").unwrap();
        assert!(!pz.passed, "{pz:?}");
        std::fs::remove_file(&csv).unwrap();
        assert!(verify(tmp.path()).is_err());
    }

    #[test]
    fn threshold_refusal_is_a_config_error() {
        let text = MINIMAL.replace("mu_rel = 0.5", "mu_rel = 1.5");
        let cfg = RunConfig::from_toml(&text).unwrap();
        let tmp = tempfile::tempdir().unwrap();
        let out = run(&cfg, Some(tmp.path())).unwrap();
        assert_eq!(out.status.exit_code(), 2);
        assert!(tmp.path().join("results.json").exists());
    }
}
