//! Scaling fits, truncation convergence and finite-difference step studies.

use floquet_core::metrology::{generator, qfi_of, spectrum_at, ReportConfig, ReportContext, ShiftedSpectra};
use floquet_core::models::model_by_name;
use floquet_core::{CVector64, FloquetError, Params64};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::scan::worker_pool;
use crate::table::{smooth, Cell, Table};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitWindow {
    Raw,
    LocalMean,
}

impl FitWindow {
    pub fn label(self) -> &'static str {
        match self {
            FitWindow::Raw => "raw",
            FitWindow::LocalMean => "local-mean",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingFit {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub exponent: f64,
    pub r_squared: f64,
    pub window: FitWindow,
}

/// Least squares on `(log t, log value)`; nonpositive entries are dropped.
pub fn fit_power_law(times: &[f64], values: &[f64], window: FitWindow) -> Result<ScalingFit> {
    let (kept_t, kept_v): (Vec<f64>, Vec<f64>) =
        times.iter().zip(values).filter(|(&t, &v)| t > 0.0 && v > 0.0 && v.is_finite()).map(|(&t, &v)| (t, v)).unzip();
    let dropped = times.len() - kept_t.len();
    if dropped > 0 {
        log::warn!("{dropped} nonpositive points excluded from the {} fit", window.label());
    }
    if kept_t.len() < 2 {
        return Err(CliError::Usage("fewer than 2 positive points to fit".into()));
    }
    let x: Vec<f64> = kept_t.iter().map(|t| t.ln()).collect();
    let y: Vec<f64> = kept_v.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(ScalingFit { times: kept_t, values: kept_v, exponent: slope, r_squared, window })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantity {
    Qfi,
    Bound,
    Cfi,
}

impl std::str::FromStr for Quantity {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qfi" => Ok(Quantity::Qfi),
            "bound" => Ok(Quantity::Bound),
            "cfi" => Ok(Quantity::Cfi),
            _ => Err(CliError::parse("a quantity (qfi, bound, cfi)", s)),
        }
    }
}

/// Study point shared by the scaling, convergence and step-size commands.
#[derive(Clone, Debug)]
pub struct StudyPoint {
    pub model: String,
    pub params: Params64,
    pub probe: CVector64,
    pub report: ReportConfig<f64>,
}

/// Values of one quantity versus time from a single spectral context.
pub fn time_series(pt: &StudyPoint, param: &str, times: &[f64], quantity: Quantity) -> Result<Vec<f64>> {
    let model = model_by_name(&pt.model, &pt.params)?;
    let ctx = ReportContext::build(model.as_ref(), &pt.params, &[param], &pt.report)?;
    times
        .iter()
        .map(|&t| {
            let r = ctx.report(&pt.probe, t, &pt.report)?;
            let p = &r.parameters[0];
            Ok(match quantity {
                Quantity::Qfi => p.qfi_total,
                Quantity::Bound => p.qfi_upper_bound,
                Quantity::Cfi => p.cfi,
            })
        })
        .collect()
}

/// Raw and local-mean fits of a time series.
pub fn scaling(times: &[f64], values: &[f64], smooth_window: usize) -> Result<[ScalingFit; 2]> {
    Ok([
        fit_power_law(times, values, FitWindow::Raw)?,
        fit_power_law(times, &smooth(values, smooth_window), FitWindow::LocalMean)?,
    ])
}

pub fn scaling_table(fits: &[ScalingFit]) -> Table {
    let mut t = Table::new(["window", "points", "t_min", "t_max", "exponent", "r_squared"].map(String::from).to_vec());
    for f in fits {
        t.push(vec![
            f.window.label().into(),
            f.times.len().into(),
            f.times.first().copied().unwrap_or(f64::NAN).into(),
            f.times.last().copied().unwrap_or(f64::NAN).into(),
            f.exponent.into(),
            f.r_squared.into(),
        ]);
    }
    t
}

/// QFI per cutoff and the relative change from the previous cutoff.
pub fn converge(pt: &StudyPoint, names: &[&str], n_cuts: &[usize], t: f64, jobs: Option<usize>) -> Result<Table> {
    if n_cuts.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Usage("cutoffs must be strictly ascending".into()));
    }
    let model = model_by_name(&pt.model, &pt.params)?;
    let pool = worker_pool(jobs)?;
    let per_cut: Vec<Result<Vec<f64>>> = pool.install(|| {
        n_cuts
            .par_iter()
            .map(|&n| {
                let cfg = ReportConfig { n_cut: n, ..pt.report };
                let ctx = ReportContext::build(model.as_ref(), &pt.params, names, &cfg)?;
                let r = ctx.report(&pt.probe, t, &cfg)?;
                Ok(r.parameters.iter().map(|p| p.qfi_total).collect())
            })
            .collect()
    });
    let mut header = vec!["n_cut".to_string()];
    for p in names {
        header.push(format!("qfi_{p}"));
        header.push(format!("rel_change_{p}"));
    }
    let mut table = Table::new(header);
    let mut prev: Option<Vec<f64>> = None;
    for (&n, q) in n_cuts.iter().zip(per_cut) {
        let q = q?;
        let mut row: Vec<Cell> = vec![n.into()];
        for (i, &v) in q.iter().enumerate() {
            row.push(v.into());
            row.push(prev.as_ref().map_or(Cell::Empty, |p| relative_change(p[i], v).into()));
        }
        table.push(row);
        prev = Some(q);
    }
    Ok(table)
}

/// `|b − a|/|a|`, zero when both vanish.
pub fn relative_change(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (b - a).abs() / a.abs()
    }
}

/// Population standard deviation over a centered window; NaN where the
/// full window does not fit.
pub fn local_std(values: &[f64], window: usize) -> Vec<f64> {
    let half = window.max(1) / 2;
    let n = values.len();
    (0..n)
        .map(|i| {
            if i < half || i + half >= n {
                return f64::NAN;
            }
            let s = &values[i - half..=i + half];
            let m = s.iter().sum::<f64>() / s.len() as f64;
            (s.iter().map(|v| (v - m).powi(2)).sum::<f64>() / s.len() as f64).sqrt()
        })
        .collect()
}

pub const STEPSIZE_WINDOW: usize = 5;

/// QFI of the total generator versus finite-difference step, with the
/// 5-point local standard deviation.
pub fn stepsize(pt: &StudyPoint, names: &[&str], deltas: &[f64], t: f64, jobs: Option<usize>) -> Result<Table> {
    if let Some(d) = deltas.iter().find(|&&d| d <= 0.0 || !d.is_finite()) {
        return Err(CliError::Usage(format!("step {d} must be positive")));
    }
    let model = model_by_name(&pt.model, &pt.params)?;
    let center = spectrum_at(model.as_ref(), &pt.params, pt.report.n_cut)?;
    let pool = worker_pool(jobs)?;
    let mut columns = Vec::with_capacity(names.len());
    for &name in names {
        let col: Vec<Result<f64>> = pool.install(|| {
            deltas
                .par_iter()
                .map(|&d| {
                    let shifted = ShiftedSpectra::build(model.as_ref(), &pt.params, name, d, pt.report.n_cut)?;
                    Ok(qfi_of(&generator(&center, &shifted, t).h, &pt.probe)?)
                })
                .collect()
        });
        columns.push(col.into_iter().collect::<Result<Vec<f64>>>()?);
    }
    let mut header = vec!["delta".to_string()];
    for p in names {
        header.push(format!("qfi_{p}"));
        header.push(format!("local_std_{p}"));
    }
    let stds: Vec<Vec<f64>> = columns.iter().map(|c| local_std(c, STEPSIZE_WINDOW)).collect();
    let mut table = Table::new(header);
    for (i, &d) in deltas.iter().enumerate() {
        let mut row: Vec<Cell> = vec![d.into()];
        for (c, s) in columns.iter().zip(&stds) {
            row.push(c[i].into());
            row.push(s[i].into());
        }
        table.push(row);
    }
    Ok(table)
}

/// Index of the smallest finite entry.
pub fn argmin(values: &[f64]) -> Option<usize> {
    values.iter().enumerate().filter(|(_, v)| v.is_finite()).min_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i)
}

pub fn check_param(params: &Params64, name: &str) -> Result<()> {
    if params.contains(name) {
        Ok(())
    } else {
        Err(FloquetError::UnknownParameter(name.to_string()).into())
    }
}
