//! Spectrum, propagator, topology, phase, oracle and unit tables.

use floquet_core::metrology::{generator, spectrum_at, ShiftedSpectra};
use floquet_core::models::{
    model_by_name, total_phase, unit_mapping, winding_number, winding_quadrature, winding_value,
};
use floquet_core::propagator::{evolve_with, transition_probability};
use floquet_core::reference::{generator_direct, propagate_direct};
use floquet_core::scalar::max_abs_diff;
use floquet_core::{build_floquet_matrix_at, diagonalize, OracleConfig, Params64, RashbaModel64};
use rayon::prelude::*;

use crate::error::Result;
use crate::scan::worker_pool;
use crate::table::{Cell, Table};

fn header(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|s| s.to_string()).collect()
}

/// Quasienergies of the truncated Floquet matrix, one row per mode.
pub fn build(model: &str, params: &Params64, n_cut: usize) -> Result<Table> {
    let m = model_by_name(model, params)?;
    let fm = build_floquet_matrix_at(m.as_ref(), params, n_cut)?;
    let spec = diagonalize(&fm)?;
    log::info!(
        "dim {} hermiticity defect {:e} reconstruction error {:e}",
        fm.dim(),
        fm.hermiticity_defect(),
        spec.reconstruction_error(&fm)
    );
    let edges = spec.edge_modes();
    let mut t = Table::new(header(&["mode", "quasienergy", "folded", "boundary_weight", "edge"]));
    for a in 0..spec.dim() {
        t.push(vec![
            a.into(),
            spec.eigenvalues[a].into(),
            spec.folded[a].into(),
            spec.boundary_weight(a).into(),
            edges.contains(&a).into(),
        ]);
    }
    Ok(t)
}

/// `U(t)` entries and bare-basis transition probabilities per time.
pub fn evolve(model: &str, params: &Params64, n_cut: usize, times: &[f64], defect_tol: f64) -> Result<Table> {
    let m = model_by_name(model, params)?;
    let spec = spectrum_at(m.as_ref(), params, n_cut)?;
    let n = m.levels();
    let mut cols = vec!["t".to_string(), "truncation_defect".into(), "truncation_flagged".into()];
    for b in 0..n {
        for g in 0..n {
            cols.push(format!("p_{b}_{g}"));
        }
    }
    for i in 0..n {
        for j in 0..n {
            cols.push(format!("u_re_{i}_{j}"));
            cols.push(format!("u_im_{i}_{j}"));
        }
    }
    let mut table = Table::new(cols);
    for &t in times {
        let s = evolve_with(&spec, t, defect_tol, 0);
        let mut row: Vec<Cell> = vec![t.into(), s.truncation_defect.into(), s.flagged.into()];
        for b in 0..n {
            for g in 0..n {
                row.push(transition_probability(&spec, t, b, g).total.into());
            }
        }
        for i in 0..n {
            for j in 0..n {
                row.push(s.u_matrix[(i, j)].re.into());
                row.push(s.u_matrix[(i, j)].im.into());
            }
        }
        table.push(row);
    }
    Ok(table)
}

fn rashba_of(p: &Params64) -> RashbaModel64 {
    RashbaModel64::new(p.get("b0").unwrap_or(0.5), p.get("b1").unwrap_or(0.5), p.get("omega").unwrap_or(1.0))
}

/// Closed-form and quadrature winding numbers per grid point.
pub fn winding(points: &[Params64], quad_points: usize) -> Table {
    let mut t = Table::new(header(&["b0", "b1", "omega", "value", "n_k", "quadrature", "error"]));
    for p in points {
        let r = rashba_of(p);
        let mut row: Vec<Cell> = vec![r.b0.into(), r.b1.into(), r.omega.into()];
        let res = winding_value(&r).and_then(|v| Ok((v, winding_number(&r)?, winding_quadrature(&r, quad_points)?)));
        match res {
            Ok((v, n, q)) => row.extend([v.into(), i64::from(n).into(), q.into(), Cell::Empty]),
            Err(e) => row.extend([Cell::Empty, Cell::Empty, Cell::Empty, e.to_string().into()]),
        }
        t.push(row);
    }
    t
}

/// Geometric, dynamical and total phase per grid point.
pub fn phase(points: &[Params64], hbar: f64, quad_points: usize) -> Table {
    let mut t = Table::new(header(&["b0", "b1", "omega", "gamma_a", "d", "total", "quad_points", "error"]));
    for p in points {
        let r = rashba_of(p);
        let mut row: Vec<Cell> = vec![r.b0.into(), r.b1.into(), r.omega.into()];
        match total_phase(&r, hbar, quad_points) {
            Ok(ph) => {
                row.extend([ph.gamma_a.into(), ph.d.into(), ph.total.into(), ph.quadrature_points.into(), Cell::Empty])
            }
            Err(e) => row.extend([Cell::Empty, Cell::Empty, Cell::Empty, quad_points.into(), e.to_string().into()]),
        }
        t.push(row);
    }
    t
}

/// Floquet-vs-direct propagator distance, and optionally generator distance
/// per parameter, at each time.
pub struct OracleCheck {
    pub table: Table,
    pub max_distance: f64,
}

pub const ORACLE_TOLERANCE: f64 = 1e-6;

pub fn oracle_check(
    model: &str,
    params: &Params64,
    n_cut: usize,
    times: &[f64],
    generators: &[&str],
    delta: f64,
    cfg: &OracleConfig,
    jobs: Option<usize>,
) -> Result<OracleCheck> {
    let m = model_by_name(model, params)?;
    let spec = spectrum_at(m.as_ref(), params, n_cut)?;
    let shifted = generators
        .iter()
        .map(|&g| ShiftedSpectra::build(m.as_ref(), params, g, delta, n_cut))
        .collect::<floquet_core::Result<Vec<_>>>()?;
    let mut cols = header(&["t", "distance", "oracle_unitarity_defect", "truncation_defect", "oracle_steps"]);
    cols.extend(generators.iter().map(|g| format!("generator_distance_{g}")));
    let pool = worker_pool(jobs)?;
    let rows: Vec<Result<(f64, Vec<Cell>)>> = pool.install(|| {
        times
            .par_iter()
            .map(|&t| {
                let fl = evolve_with(&spec, t, ORACLE_TOLERANCE, 0);
                let direct = propagate_direct(m.as_ref(), params, t, cfg)?;
                let dist = max_abs_diff(&fl.u_matrix, &direct.u_matrix);
                let mut row: Vec<Cell> = vec![
                    t.into(),
                    dist.into(),
                    direct.unitarity_defect.into(),
                    fl.truncation_defect.into(),
                    direct.steps.into(),
                ];
                for (g, s) in generators.iter().zip(&shifted) {
                    let h_fl = generator(&spec, s, t).h;
                    let h_dir = generator_direct(m.as_ref(), params, g, t, delta, cfg)?;
                    row.push(max_abs_diff(&h_fl, &h_dir).into());
                }
                Ok((dist, row))
            })
            .collect()
    });
    let mut table = Table::new(cols);
    let mut max_distance: f64 = 0.0;
    for r in rows {
        let (d, row) = r?;
        max_distance = max_distance.max(d);
        table.push(row);
    }
    Ok(OracleCheck { table, max_distance })
}

pub fn units(frequencies: &[f64], g_factor: f64) -> Result<Table> {
    let mut t = Table::new(header(&["f_ghz", "g_factor", "b_ac_tesla", "b_dc_tesla"]));
    for &f in frequencies {
        let (ac, dc) = unit_mapping(f, g_factor)?;
        t.push(vec![f.into(), g_factor.into(), ac.into(), dc.into()]);
    }
    Ok(t)
}
