//! Command-line front end. Exit codes: 0 success, 1 verification mismatch,
//! 2 usage, parse, domain or I/O error.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::diagnostics::{
    a_lsc_probes, check_a_lsc, check_function_semicontinuity, check_inf_compact, check_k_inf_compact, check_multifunction_lsc,
    check_multifunction_usc, standard_probes, Companion, LevelCap, ProbeConfig, Property, Region, Semi, Verdict,
};
use crate::dsl::load_problem;
use crate::engine::{fsharp_fn, minimax_value, solution_a_from, solution_b, solution_b_multifunction, sweep, worst_loss, MinimaxCache};
use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::grid::GridSpec;
use crate::library;
use crate::multifunction::{swap_multifunction, swap_objective, Problem};
use crate::report::{ConfigEcho, Report, Row};
use crate::verify;

#[derive(Debug, Parser)]
#[command(name = "pminimax", version, about = "Two-stage minimax values, solution sets and semicontinuity diagnostics")]
pub struct Cli {
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Base truncation radius R of unbounded action sets.
    #[arg(long, global = true, value_name = "R")]
    pub radius: Option<f64>,
    /// Gain across the tail doublings that counts as divergence.
    #[arg(long = "growth-cap", global = true, value_name = "G")]
    pub growth_cap: Option<f64>,
    /// Halving levels of the local refinement.
    #[arg(long, global = true, value_name = "D")]
    pub refine: Option<u32>,
    /// Refine only around the best grid point.
    #[arg(long, global = true)]
    pub seedless: bool,
    /// Base grid spacing.
    #[arg(long, global = true, value_name = "H")]
    pub step: Option<f64>,
    /// Record wall-clock time in the report (makes reports differ between runs).
    #[arg(long, global = true)]
    pub timing: bool,
}

impl GridArgs {
    pub fn to_grid(&self) -> Result<GridSpec> {
        let mut g = GridSpec::default();
        if let Some(r) = self.radius {
            g.truncation_radius = r;
        }
        if let Some(c) = self.growth_cap {
            g.growth_cap = c;
        }
        if let Some(d) = self.refine {
            g.refinement_depth = d;
        }
        if let Some(h) = self.step {
            g.step = h;
        }
        g.seeded = !self.seedless;
        g.validate()?;
        Ok(g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutFormat {
    Text,
    Json,
    Csv,
}

/// What a diagnosis looks at; the default follows the property and the dimension of `--at`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Subject {
    /// `v#(x)`
    Vsharp,
    /// `f#(x, a)`
    Fsharp,
    /// `f(x, a, b)`
    Payoff,
    PhiA,
    PhiB,
    SolutionA,
    SolutionB,
    /// The swapped problem: `f(x, a, b)` over `a` with `(x, b)` as the parameter.
    Swap,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Prints f#, v# and the eps-solution sets at one state.
    Eval {
        /// A `.mmx` file or `builtin:<id>`.
        #[arg(long)]
        problem: String,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        /// Also report f#(x, a) and Phi*_B(x, a).
        #[arg(long, allow_hyphen_values = true)]
        a: Option<f64>,
        /// Slack of the solution sets.
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
        #[arg(long, value_enum, default_value_t = OutFormat::Text)]
        out: OutFormat,
        /// Write the report here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// v# and the bounds of Phi*_A over a grid of states.
    Sweep {
        /// A `.mmx` file or `builtin:<id>`.
        #[arg(long)]
        problem: String,
        /// `lo:hi:step`
        #[arg(long = "x-grid", allow_hyphen_values = true)]
        x_grid: String,
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
        #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
        out: OutFormat,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Looks for a counterexample to a continuity property. Never fails on one.
    Diagnose {
        /// A `.mmx` file or `builtin:<id>`.
        #[arg(long)]
        problem: String,
        #[arg(long, value_parser = parse_property)]
        /// fn-lsc, fn-usc, mf-lsc, mf-usc, a-lsc, k-inf-compact or inf-compact.
        property: Property,
        /// Comma-separated anchor, e.g. `0,0,0`.
        #[arg(long, allow_hyphen_values = true)]
        at: String,
        #[arg(long, value_enum)]
        subject: Option<Subject>,
        /// Terms per probe sequence.
        #[arg(long, default_value_t = 128)]
        probes: usize,
        /// Smallest margin that counts as a counterexample.
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        /// Level for the compactness properties.
        #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
        lambda: f64,
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
        #[arg(long, value_enum, default_value_t = OutFormat::Text)]
        out: OutFormat,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Runs the regression battery of a builtin problem; exits 1 on a mismatch.
    Verify {
        #[arg(long, default_value = "example1")]
        builtin: String,
    },
}

fn parse_property(s: &str) -> std::result::Result<Property, String> {
    Property::parse(s).ok_or_else(|| {
        let names: Vec<&str> = Property::ALL.iter().map(|p| p.name()).collect();
        format!("unknown property `{s}`; expected one of {}", names.join(", "))
    })
}

/// Loads `builtin:<id>` or a problem file. Builtins also return their companion hints.
pub fn load(source: &str) -> Result<(Problem, Vec<Companion>)> {
    if let Some(id) = source.strip_prefix("builtin:") {
        let np = library::builtin(id).ok_or_else(|| {
            Error::InvalidConfig(format!("unknown builtin `{id}`; available: {}", library::BUILTIN_IDS.join(", ")))
        })?;
        return Ok((np.problem, np.hints));
    }
    Ok((load_problem(Path::new(source))?, Vec::new()))
}

/// `lo:hi:step`, inclusive of `hi` up to rounding; `hi < lo` is an empty grid.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidConfig(format!("x-grid `{s}` is not lo:hi:step"));
    let parts: Vec<f64> = s.split(':').map(|p| p.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_>>()?;
    let [lo, hi, step] = <[f64; 3]>::try_from(parts).map_err(|_| bad())?;
    if !(lo.is_finite() && hi.is_finite() && step.is_finite() && step > 0.0) {
        return Err(bad());
    }
    if hi < lo {
        return Ok(Vec::new());
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| lo + i as f64 * step).collect())
}

fn parse_point(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| Error::InvalidConfig(format!("`{s}` is not a comma-separated point"))))
        .collect()
}

fn emit(text: &str, output: Option<&Path>) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn echo(grid: &GridSpec) -> ConfigEcho {
    ConfigEcho {
        grid: grid.clone(),
        eps: None,
        probes: None,
        tol: None,
    }
}

fn problem_id(source: &str, prob: &Problem) -> String {
    source.strip_prefix("builtin:").map(str::to_string).unwrap_or_else(|| prob.id.clone())
}

fn run_eval(source: &str, x: f64, a: Option<f64>, eps: f64, grid: &GridSpec) -> Result<Report> {
    let (prob, _) = load(source)?;
    let mut report = Report::new(problem_id(source, &prob), "eval", ConfigEcho { eps: Some(eps), ..echo(grid) });
    let v = minimax_value(&prob, x, grid)?;
    let sol = solution_a_from(&prob, x, eps, &v, grid)?;
    let mut row = Row {
        x,
        v_sharp: Some(v.value),
        status: Some(v.status.as_str().into()),
        solution_a: Some(sol.set),
        extrapolated: sol.extrapolated,
        ..Row::default()
    };
    if let Some(a) = a {
        row.a = Some(a);
        row.f_sharp = Some(worst_loss(&prob, x, a, grid)?.value);
        row.solution_b = Some(solution_b(&prob, x, a, eps, grid)?.set);
    }
    report.rows.push(row);
    Ok(report)
}

fn eval_text(r: &Report) -> String {
    let mut s = String::new();
    for row in &r.rows {
        if let (Some(a), Some(f)) = (row.a, row.f_sharp) {
            s += &format!("f#({}, {}) = {}\n", row.x, a, f);
        }
        if let Some(v) = row.v_sharp {
            s += &format!("v#({}) = {} [{}]\n", row.x, v, row.status.as_deref().unwrap_or(""));
        }
        if let Some(sa) = &row.solution_a {
            s += &format!("Phi*_A({}) = {}{}\n", row.x, sa, if row.extrapolated { " (extrapolated)" } else { "" });
        }
        if let (Some(a), Some(sb)) = (row.a, &row.solution_b) {
            s += &format!("Phi*_B({}, {}) = {}\n", row.x, a, sb);
        }
    }
    s
}

fn run_sweep(source: &str, x_grid: &str, eps: f64, grid: &GridSpec) -> Result<Report> {
    let (prob, _) = load(source)?;
    let xs = parse_grid(x_grid)?;
    let mut report = Report::new(problem_id(source, &prob), "sweep", ConfigEcho { eps: Some(eps), ..echo(grid) });
    report.rows = sweep(&prob, &xs, eps, grid)?.iter().map(Row::from).collect();
    report.sort_rows();
    Ok(report)
}

fn default_subject(property: Property, dim: usize) -> Result<Subject> {
    let s = match (property, dim) {
        (Property::FnLsc | Property::FnUsc, 1) => Subject::Vsharp,
        (Property::FnLsc | Property::FnUsc, 2) => Subject::Fsharp,
        (Property::FnLsc | Property::FnUsc, 3) => Subject::Payoff,
        (Property::MfLsc, 1) => Subject::PhiA,
        (Property::MfLsc, 2) => Subject::PhiB,
        (Property::MfUsc, 1) => Subject::SolutionA,
        (Property::MfUsc, 2) => Subject::SolutionB,
        (Property::ALsc, 3) => Subject::PhiB,
        (Property::KInfCompact | Property::InfCompact, 1) => Subject::Fsharp,
        (Property::KInfCompact, 2) => Subject::Swap,
        _ => {
            return Err(Error::InvalidConfig(format!(
                "no default subject for {} at a {dim}-dimensional point; pass --subject",
                property.name()
            )))
        }
    };
    Ok(s)
}

pub struct DiagnoseOptions {
    pub subject: Option<Subject>,
    pub probe_len: usize,
    pub tol: f64,
    pub lambda: f64,
    pub eps: f64,
}

/// Runs one diagnosis; the verdict is data, not an error.
pub fn diagnose(prob: &Problem, hints: &[Companion], property: Property, at: &[f64], opts: &DiagnoseOptions, grid: &GridSpec) -> Result<Verdict> {
    let subject = match opts.subject {
        Some(s) => s,
        None => default_subject(property, at.len())?,
    };
    let cfg = ProbeConfig {
        len: opts.probe_len,
        ..ProbeConfig::default()
    };
    let need = |d: usize| -> Result<()> {
        if at.len() == d {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("{} on {subject:?} needs a {d}-dimensional point, got {at:?}", property.name())))
        }
    };
    let x_region = Region::Set(prob.x_domain.clone());
    let cache = MinimaxCache::new(prob, grid);
    match property {
        Property::FnLsc | Property::FnUsc => {
            let mode = if property == Property::FnLsc { Semi::Lower } else { Semi::Upper };
            let (f, region): (Box<dyn Fn(&[f64]) -> Result<ExtReal> + Sync>, Region) = match subject {
                Subject::Vsharp => {
                    need(1)?;
                    let c = cache.clone();
                    (Box::new(move |p: &[f64]| c.vsharp(p[0])), x_region)
                }
                Subject::Fsharp => {
                    need(2)?;
                    (Box::new(fsharp_fn(prob, grid)), Region::Graph(prob.phi_a.clone()))
                }
                Subject::Payoff => {
                    need(3)?;
                    (Box::new(|p: &[f64]| prob.payoff(p[0], p[1], p[2])), Region::Graph(prob.phi_b.clone()))
                }
                s => return Err(Error::InvalidConfig(format!("{} applies to functions, not {s:?}", property.name()))),
            };
            let probes = standard_probes(at, &cfg, &region)?;
            check_function_semicontinuity(&f, &region, at, mode, &probes, opts.tol)
        }
        Property::MfLsc | Property::MfUsc => {
            let m = match subject {
                Subject::PhiA => prob.phi_a.clone(),
                Subject::PhiB => prob.phi_b.clone(),
                Subject::SolutionA => Arc::new(cache.solution_a_multifunction(opts.eps)),
                Subject::SolutionB => Arc::new(solution_b_multifunction(prob, opts.eps, grid)),
                Subject::Swap => Arc::new(swap_multifunction(prob, grid)),
                s => return Err(Error::InvalidConfig(format!("{} applies to multifunctions, not {s:?}", property.name()))),
            };
            need(m.arity)?;
            let probes = standard_probes(at, &cfg, &Region::DomainOf(m.clone()))?;
            if property == Property::MfLsc {
                check_multifunction_lsc(&m, at, None, &probes, grid, opts.tol)
            } else {
                check_multifunction_usc(&m, at, &probes, grid, opts.tol)
            }
        }
        Property::ALsc => {
            need(3)?;
            let probes = a_lsc_probes(prob, at[0], &cfg, hints)?;
            check_a_lsc(prob, [at[0], at[1], at[2]], &probes, grid, opts.tol)
        }
        Property::KInfCompact => {
            let cap = LevelCap::new(opts.lambda)?;
            match subject {
                Subject::Fsharp => {
                    need(1)?;
                    let f = fsharp_fn(prob, grid);
                    let u = |p: &[f64], a: f64| f(&[p[0], a]);
                    let probes = standard_probes(at, &cfg, &x_region)?;
                    check_k_inf_compact(&u, &prob.phi_a, at, cap, &probes, grid, opts.tol)
                }
                Subject::Swap => {
                    need(2)?;
                    let m = Arc::new(swap_multifunction(prob, grid));
                    let obj = swap_objective(prob);
                    let u = |p: &[f64], a: f64| obj(p[0], p[1], a);
                    let probes = standard_probes(at, &cfg, &Region::DomainOf(m.clone()))?;
                    check_k_inf_compact(&u, &m, at, cap, &probes, grid, opts.tol)
                }
                s => Err(Error::InvalidConfig(format!("k-inf-compact is checked on f# or the swapped problem, not {s:?}"))),
            }
        }
        Property::InfCompact => {
            need(1)?;
            if subject != Subject::Fsharp {
                return Err(Error::InvalidConfig(format!("inf-compact is checked on f#(x, .), not {subject:?}")));
            }
            let x = at[0];
            let s = prob.phi_a_at(x)?;
            let f = |a: f64| worst_loss(prob, x, a, grid).map(|r| r.value);
            check_inf_compact(&f, &s, &[LevelCap::new(opts.lambda)?], grid)
        }
    }
}

fn verdict_text(v: &Verdict) -> String {
    let mut s = format!("{}\n", v.summary());
    if let Some(w) = &v.witness {
        s += &format!("  estimate {:.6e}\n", w.estimate);
        for t in w.terms.iter().rev().take(4).rev() {
            s += &format!("  n = {:>4}  at {:?}  value {:.6e}  margin {:.6e}\n", t.index, t.point, t.value, t.margin);
        }
    }
    for n in &v.notes {
        s += &format!("  note: {n}\n");
    }
    s
}

fn finish(mut report: Report, started: Instant, timing: bool, out: OutFormat, output: Option<&Path>, text: impl Fn(&Report) -> String) -> Result<()> {
    if timing {
        report.timing_seconds = Some(started.elapsed().as_secs_f64());
    }
    let body = match out {
        OutFormat::Json => report.to_json()?,
        OutFormat::Csv => report.to_csv()?,
        OutFormat::Text => text(&report),
    };
    emit(&body, output)
}

/// Runs a parsed command line and returns the process exit code.
pub fn execute(cli: Cli) -> i32 {
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    let grid = cli.grid.to_grid()?;
    let started = Instant::now();
    let timing = cli.grid.timing;
    match cli.command {
        Command::Eval { problem, x, a, eps, out, output } => {
            if out == OutFormat::Csv {
                return Err(Error::InvalidConfig("eval writes text or json".into()));
            }
            let report = run_eval(&problem, x, a, eps, &grid)?;
            finish(report, started, timing, out, output.as_deref(), eval_text)?;
        }
        Command::Sweep { problem, x_grid, eps, out, output } => {
            let report = run_sweep(&problem, &x_grid, eps, &grid)?;
            let out = if out == OutFormat::Text { OutFormat::Csv } else { out };
            finish(report, started, timing, out, output.as_deref(), |_| String::new())?;
        }
        Command::Diagnose {
            problem,
            property,
            at,
            subject,
            probes,
            tol,
            lambda,
            eps,
            out,
            output,
        } => {
            if out == OutFormat::Csv {
                return Err(Error::InvalidConfig("diagnose writes text or json".into()));
            }
            let (prob, hints) = load(&problem)?;
            let point = parse_point(&at)?;
            let opts = DiagnoseOptions {
                subject,
                probe_len: probes,
                tol,
                lambda,
                eps,
            };
            let verdict = diagnose(&prob, &hints, property, &point, &opts, &grid)?;
            let mut report = Report::new(
                problem_id(&problem, &prob),
                "diagnose",
                ConfigEcho {
                    grid: grid.clone(),
                    eps: Some(eps),
                    probes: Some(ProbeConfig { len: probes, ..ProbeConfig::default() }),
                    tol: Some(tol),
                },
            );
            report.push_verdict(verdict);
            finish(report, started, timing, out, output.as_deref(), |r| r.verdicts.iter().map(|v| verdict_text(&v.verdict)).collect())?;
        }
        Command::Verify { builtin } => {
            let outcome = verify::run(&builtin, &mut std::io::stdout())?;
            if timing {
                println!("elapsed {:.1} s", started.elapsed().as_secs_f64());
            }
            return Ok(if outcome.passed() { 0 } else { 1 });
        }
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("-1:1:0.5").unwrap(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert_eq!(parse_grid("0:0.3:0.1").unwrap().len(), 4);
        assert!(parse_grid("1:0:0.5").unwrap().is_empty());
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("0:1").is_err());
    }

    #[test]
    fn global_flags_shape_the_grid() {
        let cli = Cli::try_parse_from(["pminimax", "eval", "--problem", "builtin:example1", "--x", "-2", "--radius", "32", "--seedless", "--refine", "10"]).unwrap();
        let g = cli.grid.to_grid().unwrap();
        assert_eq!((g.truncation_radius, g.refinement_depth, g.seeded), (32.0, 10, false));
        assert!(Cli::try_parse_from(["pminimax", "diagnose", "--problem", "p", "--property", "nope", "--at", "0"]).is_err());
    }

    #[test]
    fn eval_at_two() {
        let r = run_eval("builtin:example1", 2.0, None, 1e-6, &GridSpec::default()).unwrap();
        let row = &r.rows[0];
        assert!(row.v_sharp.unwrap().to_f64().abs() < 1e-6);
        let (lo, hi) = row.solution_a.as_ref().unwrap().bounds().unwrap();
        assert!((lo - 0.5).abs() < 1e-3 && (hi - 0.5).abs() < 1e-3);
    }

    #[test]
    fn unknown_builtin_is_a_usage_error() {
        assert!(matches!(load("builtin:nope"), Err(Error::InvalidConfig(_))));
    }
}
