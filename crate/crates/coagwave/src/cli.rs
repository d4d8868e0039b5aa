//! Command-line front end: configuration loading, overrides, and the
//! simulate / sweep / equilibria / speed / bounds subcommands.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::equilibria;
use crate::error::{CoagError, Result};
use crate::io::{self, fmt_f64, RunManifest};
use crate::models::{Model, ModelKind, ScalarParams};
use crate::params::Config;
use crate::rdsolver::{self, Grid1D, SolverOptions};
use crate::run::{self, SweepRow};
use crate::speed_formulas;
use crate::wavefront::{self, TestProfile};

const CSV_DOCS: &str = "CSV layouts (all files start with '# key: value' manifest lines):\n  \
    profiles.csv   t,x,component,value      full space-time stacks\n  \
    speed.csv      t,x_front                fit summary in the header\n  \
    sweep.csv      value,series,speed,converged\n  \
    equilibria.csv root,t,p_prime,principal_eig,stable";

#[derive(Parser, Debug)]
#[command(name = "coagwave", version, about = "Traveling thrombin waves in a hierarchy of coagulation models", after_help = CSV_DOCS)]
pub struct Cli {
    /// TOML configuration; built-in defaults when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory for CSV artifacts.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
    /// Override one configuration key (repeatable), e.g. --param k2_bar=13.333
    /// or --param domain.t_end=60.
    #[arg(long = "param", global = true, value_name = "KEY=VALUE")]
    pub params: Vec<String>,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Copy)]
pub struct ScalarShape {
    /// Autocatalysis exponent of the scalar model.
    #[arg(long = "scalar-n", default_value_t = 3)]
    pub n: u32,
    /// Reaction amplitude of the scalar model.
    #[arg(long = "scalar-b", default_value_t = 10.0)]
    pub b: f64,
    /// Linear suppression of the scalar model.
    #[arg(long = "scalar-sigma", default_value_t = 0.01)]
    pub sigma: f64,
}

impl ScalarShape {
    fn params(&self) -> ScalarParams {
        ScalarParams {
            n: self.n,
            b: self.b,
            sigma: self.sigma,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reaction {
    On,
    Off,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run one model and write profiles.csv plus speed.csv.
    Simulate {
        /// full14 | reduced6 | two_eq | one_eq | scalar
        #[arg(long, default_value = "reduced6")]
        model: String,
        /// Disable reactions (pure-diffusion smoke test; reports mass drift).
        #[arg(long, value_enum, default_value = "on")]
        reaction: Reaction,
        #[command(flatten)]
        scalar: ScalarShape,
    },
    /// Sweep one parameter over a list of values and models; write sweep.csv.
    Sweep {
        /// Rate-table key, D, scalar n/b/sigma, or "activity" (percent of
        /// nominal k9).
        #[arg(long)]
        parameter: String,
        /// Explicit comma-separated values, strictly increasing.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
        /// Range start (with --hi and --count).
        #[arg(long)]
        lo: Option<f64>,
        /// Range end.
        #[arg(long)]
        hi: Option<f64>,
        /// Number of range points.
        #[arg(long)]
        count: Option<usize>,
        /// Space the range logarithmically instead of linearly.
        #[arg(long)]
        log: bool,
        /// Comma-separated model list.
        #[arg(long, value_delimiter = ',', default_value = "reduced6")]
        models: Vec<String>,
        /// Append analytic estimator series where defined.
        #[arg(long)]
        estimates: bool,
        #[command(flatten)]
        scalar: ScalarShape,
    },
    /// Locate spatially uniform equilibria, classify stability, and verify
    /// the sign correspondence on random perturbations.
    Equilibria {
        /// Also write equilibria.csv.
        #[arg(long)]
        csv: bool,
        /// Random bistable perturbations for the sign-correspondence check.
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Closed-form speed estimates and their ratio to a measured speed.
    Speed,
    /// Minimax speed bracket from a converged profile (stored or fresh).
    Bounds {
        /// profiles.csv from a previous simulate run; fresh run when omitted.
        #[arg(long, value_name = "PATH")]
        profile: Option<PathBuf>,
        #[arg(long, default_value = "reduced6")]
        model: String,
        #[command(flatten)]
        scalar: ScalarShape,
    },
}

/// Load the configuration, turning a missing k2_bar into an actionable
/// message: the rate is not in the measured table and must be calibrated.
pub fn load_config(path: Option<&Path>) -> Result<Config> {
    match path {
        None => Ok(Config::default()),
        Some(p) => Config::from_path(p).map_err(|e| {
            let msg = e.to_string();
            if msg.contains("k2_bar") {
                CoagError::Config(format!(
                    "{msg}\nk2_bar is not part of the measured rate table; calibrate it so \
                     the reduced model propagates at 0.05 mm/min (see the calibrate_k2bar \
                     example) or start from config/default.toml, which ships k2_bar = 13.333."
                ))
            } else {
                e
            }
        }),
    }
}

fn apply_overrides(cfg: &mut Config, params: &[String]) -> Result<()> {
    for p in params {
        let (key, value) = p
            .split_once('=')
            .ok_or_else(|| CoagError::Config(format!("--param wants KEY=VALUE, got {p:?}")))?;
        if key == "domain.scheme" {
            cfg.domain.scheme = match value {
                "explicit" => crate::params::Scheme::Explicit,
                "semi-implicit" => crate::params::Scheme::SemiImplicit,
                other => {
                    return Err(CoagError::Config(format!(
                        "unknown scheme {other:?}; expected explicit or semi-implicit"
                    )))
                }
            };
            continue;
        }
        let v: f64 = value
            .parse()
            .map_err(|e| CoagError::Config(format!("--param {key}: bad value {value:?}: {e}")))?;
        run::apply_param(cfg, key, v)?;
    }
    Ok(())
}

/// Parse arguments and execute. Library entry point so the binary stays a
/// one-liner and tests can drive the full pipeline in-process.
pub fn main_with_args<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::parse_from(args);
    if let Some(jobs) = cli.jobs {
        // ignore the error when a global pool already exists (tests)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    let mut cfg = load_config(cli.config.as_deref())?;
    apply_overrides(&mut cfg, &cli.params)?;
    cfg.validate()?;
    match &cli.command {
        Command::Simulate {
            model,
            reaction,
            scalar,
        } => cmd_simulate(&cfg, &cli.out, model, *reaction, scalar.params()),
        Command::Sweep {
            parameter,
            values,
            lo,
            hi,
            count,
            log,
            models,
            estimates,
            scalar,
        } => {
            let values = resolve_values(values.as_deref(), *lo, *hi, *count, *log)?;
            cmd_sweep(
                &cfg,
                &cli.out,
                parameter,
                &values,
                models,
                *estimates,
                scalar.params(),
            )
        }
        Command::Equilibria { csv, trials, seed } => {
            cmd_equilibria(&cfg, &cli.out, *csv, *trials, *seed)
        }
        Command::Speed => cmd_speed(&cfg, &cli.out),
        Command::Bounds {
            profile,
            model,
            scalar,
        } => cmd_bounds(&cfg, profile.as_deref(), model, scalar.params()),
    }
}

fn resolve_values(
    values: Option<&[f64]>,
    lo: Option<f64>,
    hi: Option<f64>,
    count: Option<usize>,
    log: bool,
) -> Result<Vec<f64>> {
    match (values, lo, hi, count) {
        (Some(v), None, None, None) => Ok(v.to_vec()),
        (None, Some(lo), Some(hi), Some(count)) => {
            if count < 2 {
                return Err(CoagError::Config("--count must be at least 2".into()));
            }
            if !(lo < hi) {
                return Err(CoagError::Config("--lo must be below --hi".into()));
            }
            if log && lo <= 0.0 {
                return Err(CoagError::Config("--log needs positive --lo".into()));
            }
            Ok(if log {
                run::log_spaced(lo, hi, count)
            } else {
                run::linear_spaced(lo, hi, count)
            })
        }
        _ => Err(CoagError::Config(
            "give either --values or the full --lo/--hi/--count triple".into(),
        )),
    }
}

fn cmd_simulate(
    cfg: &Config,
    out: &Path,
    model_name: &str,
    reaction: Reaction,
    scalar: ScalarParams,
) -> Result<()> {
    let kind = run::parse_model(model_name, scalar)?;
    if reaction == Reaction::Off {
        let model = Model::new(kind, cfg)?;
        let grid = Grid1D::from_domain(&cfg.domain)?;
        let ic = run::build_ic(&model, &grid, &cfg.domain)?;
        let opts = SolverOptions {
            scheme: cfg.domain.scheme,
            reaction: false,
            ..SolverOptions::default()
        };
        let sim = rdsolver::simulate_with_options(
            &model,
            &grid,
            &ic,
            cfg.domain.t_end,
            cfg.domain.snapshot_every,
            &opts,
        )?;
        let last = sim.field.snapshots.len() - 1;
        let drift = (sim.field.trapezoid_mass(last, model.thrombin_index())
            - sim.field.trapezoid_mass(0, model.thrombin_index()))
        .abs();
        let manifest = RunManifest::new(cfg)?
            .with("model", model_name)
            .with("reaction", "off")
            .with("mass_drift", fmt_f64(drift));
        io::write_profiles(out.join("profiles.csv"), &manifest, &sim.field, &model)?;
        println!("pure diffusion: thrombin mass drift {drift:.3e}");
        if drift > 1e-10 {
            return Err(CoagError::Diverged {
                t: cfg.domain.t_end,
                dt: sim.dt_used,
                what: format!("mass drift {drift:.3e} above 1e-10"),
            });
        }
        return Ok(());
    }
    let wave = run::run_wave(cfg, kind)?;
    let manifest = RunManifest::new(cfg)?
        .with("model", model_name)
        .with("speed", fmt_f64(wave.measurement.speed));
    io::write_profiles(
        out.join("profiles.csv"),
        &manifest,
        &wave.sim.field,
        &wave.model,
    )?;
    io::write_speed(out.join("speed.csv"), &manifest, &wave.measurement)?;
    let m = &wave.measurement;
    println!(
        "{model_name}: speed {:.6} mm/min over t in [{:.1}, {:.1}], residual {:.2e}, converged: {}",
        m.speed, m.window.0, m.window.1, m.residual, m.converged
    );
    println!(
        "wrote {} and {}",
        out.join("profiles.csv").display(),
        out.join("speed.csv").display()
    );
    Ok(())
}

fn cmd_sweep(
    cfg: &Config,
    out: &Path,
    parameter: &str,
    values: &[f64],
    models: &[String],
    estimates: bool,
    scalar: ScalarParams,
) -> Result<()> {
    let kinds: Vec<ModelKind> = models
        .iter()
        .map(|m| run::parse_model(m, scalar))
        .collect::<Result<_>>()?;
    let mut rows: Vec<SweepRow> = if parameter == "activity" {
        let mut rows = Vec::new();
        for &kind in &kinds {
            for &activity in values {
                let mut c = cfg.clone();
                c.rates = c.rates.with_k9_activity(activity)?;
                let row = match run::run_wave(&c, kind) {
                    Ok(w) => SweepRow {
                        value: activity,
                        series: run::model_name(kind).to_string(),
                        speed: Some(w.measurement.speed),
                        converged: w.measurement.converged,
                    },
                    Err(_) => SweepRow {
                        value: activity,
                        series: run::model_name(kind).to_string(),
                        speed: None,
                        converged: false,
                    },
                };
                rows.push(row);
            }
        }
        rows
    } else {
        run::speed_sweep(cfg, parameter, values, &kinds)?
    };
    if estimates {
        append_estimates(cfg, parameter, values, scalar, &mut rows)?;
    }
    rows.sort_by(|a, b| {
        a.value
            .total_cmp(&b.value)
            .then_with(|| a.series.cmp(&b.series))
    });
    let manifest = RunManifest::new(cfg)?
        .with("parameter", parameter)
        .with("models", models.join("+"));
    let csv_rows = rows.iter().map(|r| {
        vec![
            fmt_f64(r.value),
            r.series.clone(),
            r.speed.map(fmt_f64).unwrap_or_else(|| "".to_string()),
            r.converged.to_string(),
        ]
    });
    let path = out.join("sweep.csv");
    io::write_csv(
        &path,
        &manifest,
        &["value", "series", "speed", "converged"],
        csv_rows,
    )?;
    println!("{} rows -> {}", rows.len(), path.display());
    for r in &rows {
        println!(
            "  {:<12} {:<22} {:<24} {}",
            fmt_f64(r.value),
            r.series,
            r.speed.map(fmt_f64).unwrap_or_else(|| "-".into()),
            if r.converged {
                "converged"
            } else {
                "not converged"
            }
        );
    }
    Ok(())
}

/// Analytic estimator series for sweeps where a closed form exists: the two
/// scalar estimates along n/b/sigma/D sweeps, the calibrated activity curve.
fn append_estimates(
    cfg: &Config,
    parameter: &str,
    values: &[f64],
    scalar: ScalarParams,
    rows: &mut Vec<SweepRow>,
) -> Result<()> {
    let mut push = |value: f64, series: &str, speed: Option<f64>| {
        rows.push(SweepRow {
            value,
            series: series.to_string(),
            speed,
            converged: speed.is_some(),
        })
    };
    match parameter {
        "activity" => {
            for p in run::activity_curve(cfg, values)? {
                push(p.activity, "c1_narrow_zone", p.speed);
            }
        }
        "n" | "b" | "sigma" | "D" | "diffusion" => {
            for &v in values {
                let (sp, d) = match parameter {
                    "n" => (
                        ScalarParams {
                            n: v as u32,
                            ..scalar
                        },
                        cfg.rates.diffusion,
                    ),
                    "b" => (ScalarParams { b: v, ..scalar }, cfg.rates.diffusion),
                    "sigma" => (ScalarParams { sigma: v, ..scalar }, cfg.rates.diffusion),
                    _ => (scalar, v),
                };
                let c1 = speed_formulas::narrow_zone_speed(sp.n, sp.b, sp.sigma, d)
                    .ok()
                    .filter(|e| e.propagating)
                    .map(|e| e.value);
                let c2 = speed_formulas::piecewise_linear_speed(sp.n, sp.b, sp.sigma, d)
                    .ok()
                    .filter(|e| e.propagating)
                    .map(|e| e.value);
                push(v, "c1_narrow_zone", c1);
                push(v, "c2_piecewise_linear", c2);
            }
        }
        other => {
            return Err(CoagError::Config(format!(
                "no analytic estimator is defined along {other:?} sweeps"
            )))
        }
    }
    Ok(())
}

fn cmd_equilibria(cfg: &Config, out: &Path, csv: bool, trials: usize, seed: u64) -> Result<()> {
    let report = equilibria::classify(&cfg.rates)?;
    match report.roots.len() {
        2 => {
            let check = equilibria::verify_theorem1(&cfg.rates, trials, seed)?;
            let verdict = if check.passed() { "PASS" } else { "FAIL" };
            println!(
                "Bistable, roots T1* = {:.6} < T2* = {:.6}, Theorem 1 check: {verdict}",
                report.roots[0].t, report.roots[1].t
            );
            println!(
                "  {} perturbations ({} sampled), {} roots checked, max residual {:.3e}",
                check.bistable_trials, check.attempts, check.roots_checked, check.max_residual
            );
            if !check.passed() {
                for f in &check.failures {
                    println!("  violation: {f}");
                }
                return Err(CoagError::NotConverged(
                    "sign correspondence failed on a perturbed configuration".into(),
                ));
            }
        }
        _ => println!("{}", report.classification),
    }
    println!(
        "  rest state: {}",
        if report.rest_stable {
            "stable"
        } else {
            "unstable"
        }
    );
    for (i, root) in report.roots.iter().enumerate() {
        println!(
            "  T{}* = {:<14.6} P'(T*) = {:<14.6} principal eigenvalue = {:<14.6} {}",
            i + 1,
            root.t,
            report.p_primes[i],
            report.principal_eigs[i],
            match report.stable[i] {
                Some(true) => "stable",
                Some(false) => "unstable",
                None => "degenerate",
            }
        );
    }
    if csv {
        let manifest = RunManifest::new(cfg)?
            .with("trials", trials)
            .with("seed", seed);
        let rows = report.roots.iter().enumerate().map(|(i, root)| {
            vec![
                (i + 1).to_string(),
                fmt_f64(root.t),
                fmt_f64(report.p_primes[i]),
                fmt_f64(report.principal_eigs[i]),
                match report.stable[i] {
                    Some(s) => s.to_string(),
                    None => "degenerate".into(),
                },
            ]
        });
        let path = out.join("equilibria.csv");
        io::write_csv(
            &path,
            &manifest,
            &["root", "t", "p_prime", "principal_eig", "stable"],
            rows,
        )?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

/// Measured speed for the ratio report: reuse a stored speed.csv when its
/// manifest carries one, otherwise run the reduced model fresh.
fn measured_speed(cfg: &Config, out: &Path) -> Result<(f64, String)> {
    let stored = out.join("speed.csv");
    if stored.is_file() {
        let table = io::read_csv(&stored)?;
        if let Some(s) = table.manifest.get("speed") {
            let speed: f64 = s
                .parse()
                .map_err(|e| CoagError::Parse(format!("stored speed {s:?}: {e}")))?;
            return Ok((speed, format!("stored in {}", stored.display())));
        }
    }
    let wave = run::run_wave(cfg, ModelKind::Reduced6)?;
    Ok((wave.measurement.speed, "fresh reduced6 run".to_string()))
}

fn cmd_speed(cfg: &Config, out: &Path) -> Result<()> {
    let est = speed_formulas::coag_speed_estimates(&cfg.rates)?;
    println!(
        "narrow reaction zone:  c1 = {:.6} mm/min{}",
        est.c1.value,
        if est.c1.propagating {
            ""
        } else {
            "  (no propagation)"
        }
    );
    println!(
        "piecewise-linear kink: c2 = {:.6} mm/min{}",
        est.c2.value,
        if est.c2.propagating {
            ""
        } else {
            "  (no propagation)"
        }
    );
    println!(
        "printed dimensional forms (verbatim): b = {:.6e}, c1 = {}, c2 = {}",
        est.printed.b_dim,
        fmt_f64(est.printed.c1),
        fmt_f64(est.printed.c2)
    );
    let (measured, source) = measured_speed(cfg, out)?;
    println!("measured speed:        c  = {measured:.6} mm/min ({source})");
    println!(
        "ratios: c1/c = {:.3}, c2/c = {:.3}",
        est.c1.value / measured,
        est.c2.value / measured
    );
    Ok(())
}

fn cmd_bounds(
    cfg: &Config,
    profile: Option<&Path>,
    model_name: &str,
    scalar: ScalarParams,
) -> Result<()> {
    let kind = run::parse_model(model_name, scalar)?;
    let model = Model::new(kind, cfg)?;
    let (rho, measured) = match profile {
        Some(path) => {
            let table = io::read_csv(path)?;
            let (t_last, xs, values) = io::read_last_profile(&table, model.names())?;
            let grid = Grid1D::new(xs.last().copied().unwrap_or(0.0), xs.len())?;
            println!(
                "using stored snapshot at t = {t_last} from {}",
                path.display()
            );
            let field = crate::rdsolver::SpaceTimeField {
                grid,
                model: kind,
                times: vec![t_last],
                snapshots: vec![values],
            };
            let rho = TestProfile::from_simulation(&field, 0, &model)?;
            let measured = table
                .manifest
                .get("speed")
                .and_then(|s| s.parse::<f64>().ok());
            (rho, measured)
        }
        None => {
            let wave = run::run_wave(cfg, kind)?;
            if !wave.measurement.converged {
                return Err(CoagError::NotConverged(format!(
                    "fresh run did not converge (residual {:.3e})",
                    wave.measurement.residual
                )));
            }
            let last = wave.sim.field.snapshots.len() - 1;
            let rho = TestProfile::from_simulation(&wave.sim.field, last, &wave.model)?;
            (rho, Some(wave.measurement.speed))
        }
    };
    let bracket = wavefront::minimax_bracket(&rho, &model)?;
    let tol = 2.0 * rho.grid.dx() / cfg.domain.snapshot_every;
    println!(
        "minimax bracket: [{:.6}, {:.6}] mm/min (discretization tolerance {:.2e})",
        bracket.lower, bracket.upper, tol
    );
    match measured {
        Some(c) => {
            let contained = bracket.lower - tol <= c && c <= bracket.upper + tol;
            println!(
                "measured speed {c:.6} -> contained: {}",
                if contained { "yes" } else { "NO" }
            );
            if !contained {
                return Err(CoagError::NotConverged(format!(
                    "measured speed {c} escapes the bracket [{}, {}] +/- {tol}",
                    bracket.lower, bracket.upper
                )));
            }
        }
        None => println!("no measured speed available for a containment check"),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_resolution_accepts_one_form_only() {
        assert_eq!(
            resolve_values(Some(&[0.1, 0.2]), None, None, None, false).unwrap(),
            vec![0.1, 0.2]
        );
        let lin = resolve_values(None, Some(1.0), Some(3.0), Some(3), false).unwrap();
        assert_eq!(lin, vec![1.0, 2.0, 3.0]);
        let log = resolve_values(None, Some(0.001), Some(0.01), Some(5), true).unwrap();
        assert!((log[2] - (0.001f64 * 0.01).sqrt()).abs() < 1e-15);
        assert!(resolve_values(None, None, None, None, false).is_err());
        assert!(resolve_values(Some(&[0.1]), Some(1.0), Some(2.0), Some(2), false).is_err());
    }

    #[test]
    fn overrides_parse_and_apply() {
        let mut cfg = Config::default();
        apply_overrides(
            &mut cfg,
            &[
                "k2_bar=9".into(),
                "domain.t_end=12".into(),
                "domain.scheme=semi-implicit".into(),
            ],
        )
        .unwrap();
        assert_eq!(cfg.rates.k2_bar, 9.0);
        assert_eq!(cfg.domain.t_end, 12.0);
        assert_eq!(cfg.domain.scheme, crate::params::Scheme::SemiImplicit);
        assert!(apply_overrides(&mut cfg, &["oops".into()]).is_err());
        assert!(apply_overrides(&mut cfg, &["k2_bar=abc".into()]).is_err());
    }

    #[test]
    fn missing_k2_bar_gets_a_calibration_hint() {
        let dir = std::env::temp_dir().join("coagwave_cli_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("nok2bar.toml");
        let mut cfg = toml::to_string(&Config::default()).unwrap();
        let start = cfg.find("k2_bar").unwrap();
        let end = start + cfg[start..].find('\n').unwrap() + 1;
        cfg.replace_range(start..end, "");
        std::fs::write(&path, cfg).unwrap();
        match load_config(Some(&path)) {
            Err(CoagError::Config(msg)) => {
                assert!(msg.contains("calibrate"), "hint missing from: {msg}")
            }
            other => panic!("expected config error with hint, got {other:?}"),
        }
    }
}
