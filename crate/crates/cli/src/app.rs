//! Command-line surface: flags, the flat config file and dispatch.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use floquet_core::metrology::ReportConfig;
use floquet_core::{OracleConfig, OracleScheme, Params64};
use serde::Deserialize;

use crate::diagnostics;
use crate::error::{CliError, Result};
use crate::grid::{
    grid_points, parse_assignment, parse_log_list, parse_sweep, parse_tie, parse_time, parse_time_grid,
    parse_usize_list, ProbeSpec,
};
use crate::scan::{base_params, run_scan, ScanSpec};
use crate::study::{self, Quantity, StudyPoint};
use crate::table::{Format, Table};

#[derive(Debug, Parser)]
#[command(name = "floquet", version, about = "Floquet-engineered multiparameter estimation")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Default, Clone, Args)]
pub struct Common {
    /// Flat TOML file with any of the long flag names as keys.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub model: Option<String>,
    #[arg(long, global = true)]
    pub b0: Option<f64>,
    #[arg(long, global = true)]
    pub b1: Option<f64>,
    #[arg(long, global = true)]
    pub b: Option<f64>,
    #[arg(long, global = true)]
    pub omega: Option<f64>,
    /// Extra parameter assignment `name=value`, repeatable.
    #[arg(long = "set", global = true)]
    pub set: Vec<String>,
    /// Single time: `3.5`, `2pi`, `T` or `0.5T` (T is the clock period).
    #[arg(long, global = true)]
    pub t: Option<String>,
    /// `start:stop:points`, inclusive.
    #[arg(long, global = true)]
    pub t_grid: Option<String>,
    /// Comma list of integers l, giving times l·T₀.
    #[arg(long, global = true)]
    pub strobe: Option<String>,
    #[arg(long, global = true)]
    pub ncut: Option<usize>,
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    /// `gs-h0`, `basis:k` or `vec:re0,im0,re1,im1,...`.
    #[arg(long, global = true)]
    pub probe: Option<String>,
    #[arg(long, global = true)]
    pub clock_omega: Option<f64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub format: Option<String>,
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true)]
    pub smooth_window: Option<usize>,
    /// Comma list of parameters to estimate.
    #[arg(long, global = true)]
    pub params: Option<String>,
    /// `name=min:max:points`, repeatable; first is the outermost axis.
    #[arg(long, global = true)]
    pub sweep: Vec<String>,
    /// `target=source`, repeatable.
    #[arg(long, global = true)]
    pub tie: Vec<String>,
    /// Also export the QFIM off-diagonal entries.
    #[arg(long, global = true)]
    pub qfim: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Floquet spectrum of the truncated matrix.
    Build,
    /// Mapped-back propagator and transition probabilities.
    Evolve,
    /// Estimation report at a single parameter point.
    Qfi,
    /// Estimation reports over a parameter grid.
    Scan,
    /// Power-law fit of a quantity versus time.
    Scaling {
        #[arg(long)]
        param: String,
        #[arg(long, default_value = "qfi")]
        quantity: String,
    },
    /// QFI versus Floquet cutoff.
    Converge {
        #[arg(long, default_value = "40,45,46,47,48,49,50,51")]
        ncuts: String,
    },
    /// QFI versus finite-difference step.
    Stepsize {
        /// `min:max:points` (log-uniform) or a comma list.
        #[arg(long, default_value = "1e-10:1e-3:29")]
        deltas: String,
    },
    /// Winding number of the Rashba drive.
    Winding {
        #[arg(long, default_value_t = 4096)]
        quad_points: usize,
    },
    /// Geometric and dynamical phases of the Rashba drive.
    Phase {
        #[arg(long, default_value_t = 1.0)]
        hbar: f64,
        #[arg(long, default_value_t = 1024)]
        quad_points: usize,
        /// Also evaluate at twice the points and report the difference.
        #[arg(long)]
        richardson: bool,
    },
    /// Floquet propagator against direct time-ordered integration.
    OracleCheck {
        #[arg(long, default_value_t = 20_000)]
        steps: usize,
        #[arg(long, default_value = "midpoint")]
        scheme: String,
        /// Also compare generators for the estimated parameters.
        #[arg(long)]
        generators: bool,
    },
    /// Dimensionless operating point to tesla.
    Units {
        #[arg(long, default_value = "10,20,60")]
        f_ghz: String,
        #[arg(long, default_value_t = 4.0)]
        g: f64,
    },
}

/// Flat config file; keys mirror the long flags with `_` for `-`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub model: Option<String>,
    pub b0: Option<f64>,
    pub b1: Option<f64>,
    pub b: Option<f64>,
    pub omega: Option<f64>,
    #[serde(default)]
    pub set: Vec<String>,
    pub t: Option<String>,
    pub t_grid: Option<String>,
    pub strobe: Option<String>,
    pub ncut: Option<usize>,
    pub delta: Option<f64>,
    pub probe: Option<String>,
    pub clock_omega: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
    pub jobs: Option<usize>,
    pub smooth_window: Option<usize>,
    pub params: Option<String>,
    #[serde(default)]
    pub sweep: Vec<String>,
    #[serde(default)]
    pub tie: Vec<String>,
    pub qfim: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        Ok(toml::from_str(&std::fs::read_to_string(path)?)?)
    }
}

impl Common {
    /// Flags override file values; list-valued keys are replaced, not merged.
    pub fn merged(&self) -> Result<Common> {
        let Some(path) = &self.config else { return Ok(self.clone()) };
        let f = FileConfig::load(path)?;
        let pick = |a: &Vec<String>, b: Vec<String>| if a.is_empty() { b } else { a.clone() };
        Ok(Common {
            config: self.config.clone(),
            model: self.model.clone().or(f.model),
            b0: self.b0.or(f.b0),
            b1: self.b1.or(f.b1),
            b: self.b.or(f.b),
            omega: self.omega.or(f.omega),
            set: pick(&self.set, f.set),
            t: self.t.clone().or(f.t),
            t_grid: self.t_grid.clone().or(f.t_grid),
            strobe: self.strobe.clone().or(f.strobe),
            ncut: self.ncut.or(f.ncut),
            delta: self.delta.or(f.delta),
            probe: self.probe.clone().or(f.probe),
            clock_omega: self.clock_omega.or(f.clock_omega),
            out: self.out.clone().or(f.out),
            format: self.format.clone().or(f.format),
            jobs: self.jobs.or(f.jobs),
            smooth_window: self.smooth_window.or(f.smooth_window),
            params: self.params.clone().or(f.params),
            sweep: pick(&self.sweep, f.sweep),
            tie: pick(&self.tie, f.tie),
            qfim: self.qfim || f.qfim.unwrap_or(false),
        })
    }
}

/// Fully resolved run settings.
#[derive(Clone, Debug)]
pub struct Settings {
    pub model: String,
    pub params: Params64,
    pub spec: ScanSpec,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub times_given: bool,
}

impl Settings {
    pub fn resolve(c: &Common) -> Result<Self> {
        let model = c.model.clone().unwrap_or_else(|| "rashba".into());
        let mut fixed = Params64::new();
        for (k, v) in [("b0", c.b0), ("b1", c.b1), ("b", c.b), ("omega", c.omega)] {
            if let Some(v) = v {
                fixed.set(k, v);
            }
        }
        for s in &c.set {
            let (k, v) = parse_assignment(s)?;
            fixed.set(&k, v);
        }
        let own = floquet_core::models::model_by_name(&model, &fixed)?.params();
        for (k, v) in [("b0", c.b0), ("b1", c.b1), ("b", c.b), ("omega", c.omega)] {
            if v.is_some() && !own.contains(k) {
                return Err(CliError::Usage(format!("model `{model}` has no parameter `{k}`")));
            }
        }
        let params = base_params(&model, &fixed)?;

        let clock_omega = c.clock_omega.unwrap_or(1.0);
        if !(clock_omega > 0.0) {
            return Err(CliError::Usage("--clock-omega must be positive".into()));
        }
        let period = 2.0 * std::f64::consts::PI / clock_omega;
        let given = [c.t.is_some(), c.t_grid.is_some(), c.strobe.is_some()].iter().filter(|&&b| b).count();
        if given > 1 {
            return Err(CliError::Usage("use only one of --t, --t-grid, --strobe".into()));
        }
        let times = if let Some(t) = &c.t {
            vec![parse_time(t, period)?]
        } else if let Some(g) = &c.t_grid {
            parse_time_grid(g, period)?
        } else if let Some(s) = &c.strobe {
            parse_usize_list(s)?.into_iter().map(|l| l as f64 * period).collect()
        } else {
            vec![period]
        };

        let report = ReportConfig {
            n_cut: c.ncut.unwrap_or(50),
            delta: c.delta.unwrap_or(floquet_core::metrology::DEFAULT_DELTA),
            clock_omega,
            qfim: c.qfim,
            ..ReportConfig::default()
        };
        let spec = ScanSpec {
            model: model.clone(),
            fixed: params.clone(),
            sweeps: c.sweep.iter().map(|s| parse_sweep(s)).collect::<Result<_>>()?,
            ties: c.tie.iter().map(|s| parse_tie(s)).collect::<Result<_>>()?,
            times,
            estimate: c
                .params
                .as_deref()
                .map(|s| s.split(',').map(|p| p.trim().to_string()).collect())
                .unwrap_or_default(),
            report,
            probe: ProbeSpec::parse(c.probe.as_deref().unwrap_or("gs-h0"))?,
            smooth_window: c.smooth_window.unwrap_or(floquet_core::metrology::DEFAULT_SMOOTH_WINDOW),
            jobs: c.jobs,
        };
        let format = c.format.as_deref().unwrap_or("csv").parse()?;
        Ok(Settings { model, params, spec, format, out: c.out.clone(), times_given: given > 0 })
    }

    fn estimate_names(&self) -> Vec<String> {
        if self.spec.estimate.is_empty() {
            self.params.names().map(str::to_string).collect()
        } else {
            self.spec.estimate.clone()
        }
    }

    fn study_point(&self) -> Result<StudyPoint> {
        let m = floquet_core::models::model_by_name(&self.model, &self.params)?;
        Ok(StudyPoint {
            model: self.model.clone(),
            params: self.params.clone(),
            probe: self.spec.probe.vector(m.levels())?,
            report: self.spec.report,
        })
    }

    fn single_time(&self) -> Result<f64> {
        match self.spec.times.as_slice() {
            [t] => Ok(*t),
            _ => Err(CliError::Usage("this command takes a single time".into())),
        }
    }

    fn grid(&self) -> Result<Vec<Params64>> {
        grid_points(&self.params, &self.spec.sweeps, &self.spec.ties)
    }

    pub fn emit(&self, table: &Table) -> Result<()> {
        match &self.out {
            Some(path) => table.write(BufWriter::new(File::create(path)?), self.format),
            None => {
                let stdout = io::stdout();
                let mut lock = stdout.lock();
                table.write(&mut lock, self.format)?;
                lock.flush()?;
                Ok(())
            }
        }
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> Result<i32> {
    let s = Settings::resolve(&cli.common.merged()?)?;
    let names = s.estimate_names();
    let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
    match &cli.command {
        Command::Build => s.emit(&diagnostics::build(&s.model, &s.params, s.spec.report.n_cut)?)?,
        Command::Evolve => s.emit(&diagnostics::evolve(
            &s.model,
            &s.params,
            s.spec.report.n_cut,
            &s.spec.times,
            s.spec.report.defect_tol,
        )?)?,
        Command::Qfi | Command::Scan => {
            if matches!(cli.command, Command::Qfi) && !s.spec.sweeps.is_empty() {
                return Err(CliError::Usage("`qfi` evaluates one point; use `scan` for sweeps".into()));
            }
            let result = run_scan(&s.spec)?;
            s.emit(&result.table)?;
            return Ok(result.exit_code());
        }
        Command::Scaling { param, quantity } => {
            study::check_param(&s.params, param)?;
            let q: Quantity = quantity.parse()?;
            if s.spec.times.len() < 8 {
                return Err(CliError::Usage("scaling needs at least 8 time points (--t-grid)".into()));
            }
            let values = study::time_series(&s.study_point()?, param, &s.spec.times, q)?;
            let fits = study::scaling(&s.spec.times, &values, s.spec.smooth_window)?;
            s.emit(&study::scaling_table(&fits))?;
        }
        Command::Converge { ncuts } => {
            let t = s.single_time()?;
            let table = study::converge(&s.study_point()?, &name_refs, &parse_usize_list(ncuts)?, t, s.spec.jobs)?;
            s.emit(&table)?;
        }
        Command::Stepsize { deltas } => {
            let t = s.single_time()?;
            let table = study::stepsize(&s.study_point()?, &name_refs, &parse_log_list(deltas)?, t, s.spec.jobs)?;
            s.emit(&table)?;
        }
        Command::Winding { quad_points } => {
            require_rashba(&s.model)?;
            let t = diagnostics::winding(&s.grid()?, *quad_points);
            s.emit(&t)?;
            return Ok(error_exit(&t));
        }
        Command::Phase { hbar, quad_points, richardson } => {
            require_rashba(&s.model)?;
            let grid = s.grid()?;
            let mut t = diagnostics::phase(&grid, *hbar, *quad_points);
            if *richardson {
                let fine = diagnostics::phase(&grid, *hbar, 2 * quad_points).column("total").unwrap_or_default();
                let coarse = t.column("total").unwrap_or_default();
                t.header.push("richardson_diff".into());
                for (row, (c, f)) in t.rows.iter_mut().zip(coarse.into_iter().zip(fine)) {
                    row.push((f - c).abs().into());
                }
            }
            s.emit(&t)?;
            return Ok(error_exit(&t));
        }
        Command::OracleCheck { steps, scheme, generators } => {
            let scheme = match scheme.as_str() {
                "midpoint" => OracleScheme::Midpoint,
                "rk4" => OracleScheme::Rk4,
                other => return Err(CliError::parse("a scheme (midpoint, rk4)", other)),
            };
            let times = if s.times_given {
                s.spec.times.clone()
            } else {
                let p = 2.0 * std::f64::consts::PI / s.spec.report.clock_omega;
                vec![p / 4.0, p / 2.0, p, 2.0 * p]
            };
            let gens: Vec<&str> = if *generators { name_refs.clone() } else { Vec::new() };
            let check = diagnostics::oracle_check(
                &s.model,
                &s.params,
                s.spec.report.n_cut,
                &times,
                &gens,
                s.spec.report.delta,
                &OracleConfig { step_count: *steps, scheme },
                s.spec.jobs,
            )?;
            s.emit(&check.table)?;
            if check.max_distance >= diagnostics::ORACLE_TOLERANCE {
                log::error!("propagator distance {:e} exceeds {:e}", check.max_distance, diagnostics::ORACLE_TOLERANCE);
                return Ok(2);
            }
        }
        Command::Units { f_ghz, g } => {
            s.emit(&diagnostics::units(&crate::grid::parse_f64_list(f_ghz)?, *g)?)?;
        }
    }
    Ok(0)
}

fn require_rashba(model: &str) -> Result<()> {
    if model == "rashba" {
        Ok(())
    } else {
        Err(CliError::Usage(format!("this command needs the rashba model, not `{model}`")))
    }
}

fn error_exit(t: &Table) -> i32 {
    let any = t.text_column("error").is_some_and(|c| c.iter().any(|e| !e.is_empty()));
    if any {
        3
    } else {
        0
    }
}
