//! Grid scans of the estimation report.

use floquet_core::metrology::{EstimationReport, ReportConfig, ReportContext};
use floquet_core::models::model_by_name;
use floquet_core::{FloquetError, Params64, MODEL_VERSION};
use rayon::prelude::*;

use crate::error::{CliError, Result};
use crate::grid::{grid_points, ProbeSpec, Sweep};
use crate::table::{smooth, Cell, Table};

#[derive(Clone, Debug)]
pub struct ScanSpec {
    pub model: String,
    pub fixed: Params64,
    pub sweeps: Vec<Sweep>,
    pub ties: Vec<(String, String)>,
    pub times: Vec<f64>,
    /// Parameters to estimate; empty means every model parameter.
    pub estimate: Vec<String>,
    pub report: ReportConfig<f64>,
    pub probe: ProbeSpec,
    pub smooth_window: usize,
    /// Worker count; `None` uses the available parallelism.
    pub jobs: Option<usize>,
}

impl ScanSpec {
    pub fn new(model: &str) -> Self {
        Self {
            model: model.to_string(),
            fixed: Params64::new(),
            sweeps: Vec::new(),
            ties: Vec::new(),
            times: vec![2.0 * std::f64::consts::PI],
            estimate: Vec::new(),
            report: ReportConfig::default(),
            probe: ProbeSpec::GroundH0,
            smooth_window: floquet_core::metrology::DEFAULT_SMOOTH_WINDOW,
            jobs: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.times.is_empty() {
            return Err(CliError::Usage("no evaluation times".into()));
        }
        if let Some(s) = self.sweeps.iter().find(|s| s.points < 2) {
            return Err(CliError::Usage(format!("sweep `{}` needs at least 2 points", s.name)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct ScanPoint {
    pub params: Params64,
    pub time: f64,
    pub report: std::result::Result<EstimationReport<f64>, FloquetError>,
}

#[derive(Clone, Debug)]
pub struct ScanResult {
    pub estimate: Vec<String>,
    pub points: Vec<ScanPoint>,
    pub table: Table,
}

impl ScanResult {
    pub fn invariant_violations(&self) -> usize {
        self.points.iter().filter(|p| matches!(p.report, Err(FloquetError::Invariant(_)))).count()
    }

    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| p.report.is_err()).count()
    }

    /// 0 clean, 2 on any invariant violation, 3 when only per-point failures occurred.
    pub fn exit_code(&self) -> i32 {
        if self.invariant_violations() > 0 {
            2
        } else if self.failures() > 0 {
            3
        } else {
            0
        }
    }
}

pub fn worker_pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        b = b.num_threads(j.max(1));
    }
    Ok(b.build()?)
}

/// Resolved parameter set: model defaults, then fixed values.
pub fn base_params(model: &str, fixed: &Params64) -> Result<Params64> {
    let mut p = model_by_name(model, fixed)?.params();
    for (k, v) in fixed.iter() {
        p.set(k, v);
    }
    Ok(p)
}

fn points_for(spec: &ScanSpec, params: &Params64) -> Vec<ScanPoint> {
    let names: Vec<&str> = spec.estimate.iter().map(String::as_str).collect();
    let ctx = model_by_name(&spec.model, params).and_then(|m| {
        let probe = spec.probe.vector(m.levels()).map_err(|e| FloquetError::InvalidArgument(e.to_string()))?;
        Ok((ReportContext::build(m.as_ref(), params, &names, &spec.report)?, probe))
    });
    spec.times
        .iter()
        .map(|&t| {
            let report = match &ctx {
                Ok((ctx, probe)) => ctx.report(probe, t, &spec.report),
                Err(e) => Err(e.clone()),
            };
            if let Err(e) = &report {
                log::warn!("point {:?} at t = {t}: {e}", params.iter().collect::<Vec<_>>());
            }
            ScanPoint { params: params.clone(), time: t, report }
        })
        .collect()
}

pub fn run_scan(spec: &ScanSpec) -> Result<ScanResult> {
    spec.validate()?;
    let base = base_params(&spec.model, &spec.fixed)?;
    let mut spec = spec.clone();
    if spec.estimate.is_empty() {
        spec.estimate = base.names().map(str::to_string).collect();
    }
    for name in spec.sweeps.iter().map(|s| &s.name).chain(spec.estimate.iter()) {
        if !base.contains(name) {
            return Err(FloquetError::UnknownParameter(name.clone()).into());
        }
    }
    let grid = grid_points(&base, &spec.sweeps, &spec.ties)?;
    let pool = worker_pool(spec.jobs)?;
    let points: Vec<ScanPoint> = pool
        .install(|| grid.par_iter().map(|p| points_for(&spec, p)).collect::<Vec<_>>())
        .into_iter()
        .flatten()
        .collect();
    let table = scan_table(&spec, &base, &points);
    Ok(ScanResult { estimate: spec.estimate.clone(), points, table })
}

const PER_PARAM: [&str; 9] = [
    "qfi",
    "qfi_eigenmode",
    "qfi_quasienergy",
    "qfi_multiphoton",
    "qfi_coherence",
    "bound",
    "cfi",
    "min_pair_overlap",
    "gauge_unreliable",
];
const SMOOTHED: [&str; 7] =
    ["qfi", "qfi_eigenmode", "qfi_quasienergy", "qfi_multiphoton", "qfi_coherence", "bound", "cfi"];

fn scan_table(spec: &ScanSpec, base: &Params64, points: &[ScanPoint]) -> Table {
    let names = &spec.estimate;
    let mut header: Vec<String> = base.names().map(str::to_string).collect();
    header.push("t".into());
    for p in names {
        header.extend(PER_PARAM.iter().map(|f| format!("{f}_{p}")));
    }
    for (i, a) in names.iter().enumerate() {
        for b in &names[i + 1..] {
            header.push(format!("omega_{a}_{b}"));
        }
    }
    if spec.report.qfim {
        for (i, a) in names.iter().enumerate() {
            for b in &names[i + 1..] {
                header.push(format!("qfim_{a}_{b}"));
            }
        }
    }
    header.extend(
        ["truncation_defect", "truncation_flagged", "n_cut", "fd_step", "probe", "model_version", "error"]
            .map(String::from),
    );

    let mut table = Table::new(header);
    let n_pairs = names.len() * names.len().saturating_sub(1) / 2;
    for pt in points {
        let mut row: Vec<Cell> = base.names().map(|k| Cell::Float(pt.params.get(k).unwrap_or(f64::NAN))).collect();
        row.push(pt.time.into());
        match &pt.report {
            Ok(r) => {
                for p in &r.parameters {
                    row.extend([
                        p.qfi_total.into(),
                        p.qfi_eigenmode.into(),
                        p.qfi_quasienergy.into(),
                        p.qfi_multiphoton.into(),
                        p.qfi_coherence.into(),
                        p.qfi_upper_bound.into(),
                        p.cfi.into(),
                        p.min_pair_overlap.into(),
                        p.gauge_unreliable.into(),
                    ]);
                }
                for i in 0..names.len() {
                    for j in i + 1..names.len() {
                        row.push(r.incompatibility[i][j].into());
                    }
                }
                if spec.report.qfim {
                    let q = r.qfim_offdiagonal.as_ref();
                    for i in 0..names.len() {
                        for j in i + 1..names.len() {
                            row.push(q.map_or(Cell::Empty, |q| q[i][j].into()));
                        }
                    }
                }
                row.extend([r.truncation_defect.into(), r.truncation_flagged.into()]);
            }
            Err(_) => {
                let blanks = names.len() * PER_PARAM.len() + n_pairs * (1 + usize::from(spec.report.qfim)) + 2;
                row.extend(std::iter::repeat_n(Cell::Empty, blanks));
            }
        }
        row.extend([
            spec.report.n_cut.into(),
            spec.report.delta.into(),
            spec.probe.id().into(),
            MODEL_VERSION.into(),
            pt.report.as_ref().err().map_or(Cell::Empty, |e| Cell::Text(e.to_string())),
        ]);
        table.push(row);
    }
    append_smoothed(&mut table, names, innermost_len(spec), spec.smooth_window);
    table
}

/// Length of a contiguous run along the innermost axis.
fn innermost_len(spec: &ScanSpec) -> usize {
    if spec.times.len() > 1 {
        spec.times.len()
    } else {
        spec.sweeps.last().map_or(1, |s| s.points)
    }
}

fn append_smoothed(table: &mut Table, names: &[String], run: usize, window: usize) {
    for p in names {
        for f in SMOOTHED {
            let col = table.column(&format!("{f}_{p}")).unwrap_or_default();
            let smoothed: Vec<f64> = col.chunks(run.max(1)).flat_map(|c| smooth(c, window)).collect();
            table.header.push(format!("{f}_{p}_smooth"));
            for (row, v) in table.rows.iter_mut().zip(smoothed) {
                row.push(v.into());
            }
        }
    }
}
