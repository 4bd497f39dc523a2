use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;

use super::{evaluate, prepare_reference, BasisChoice, FitReport, Scheme};
use crate::ansatz::FitConfig;
use crate::error::{Error, Result};
use crate::fci::SolverOptions;
use crate::integrals::{build_hubbard, Boundary, HubbardSpec};

pub const SWEEP_COLUMNS: [&str; 11] = [
    "u",
    "order",
    "overlap",
    "r2",
    "e_true",
    "e_approx",
    "rel_log_error",
    "n_params",
    "fraction",
    "wall_seconds",
    "error",
];

/// Grid of Hubbard chains and ansatz orders.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub n_sites: usize,
    pub n_alpha: usize,
    pub n_beta: usize,
    pub boundary: Boundary,
    pub us: Vec<f64>,
    pub orders: Vec<usize>,
    pub basis: BasisChoice,
    pub scheme: Scheme,
    pub fit: FitConfig,
    pub solver: SolverOptions,
}

impl SweepSpec {
    /// Half-filled open chain in the natural-orbital basis with the main scheme.
    pub fn half_filled(n_sites: usize, us: Vec<f64>, orders: Vec<usize>) -> Self {
        SweepSpec {
            n_sites,
            n_alpha: n_sites / 2,
            n_beta: n_sites / 2,
            boundary: Boundary::Open,
            us,
            orders,
            basis: BasisChoice::Natural,
            scheme: Scheme::Main,
            fit: FitConfig::default(),
            solver: SolverOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub u: f64,
    pub order: usize,
    pub report: Option<FitReport>,
    pub wall_seconds: f64,
    pub error: Option<String>,
}

/// Runs every `(u, order)` cell; a failing cell records its error and the
/// sweep carries on. Rows come back sorted by `(u, order)`.
pub fn sweep(spec: &SweepSpec) -> Vec<SweepRow> {
    let mut rows: Vec<SweepRow> = spec
        .us
        .par_iter()
        .flat_map_iter(|&u| {
            let hubbard = HubbardSpec {
                boundary: spec.boundary,
                ..HubbardSpec::chain(spec.n_sites, u)
            };
            let reference = build_hubbard(&hubbard)
                .and_then(|ints| prepare_reference(&ints, spec.n_alpha, spec.n_beta, spec.basis, &spec.solver));
            spec.orders
                .iter()
                .map(|&order| {
                    let start = Instant::now();
                    let result = match &reference {
                        Ok(r) => evaluate(r, order, &spec.scheme, &spec.fit).map(|e| e.report),
                        Err(e) => Err(Error::Domain(format!("reference solve failed: {e}"))),
                    };
                    let wall_seconds = start.elapsed().as_secs_f64();
                    match result {
                        Ok(report) => SweepRow {
                            u,
                            order,
                            report: Some(report),
                            wall_seconds,
                            error: None,
                        },
                        Err(e) => SweepRow {
                            u,
                            order,
                            report: None,
                            wall_seconds,
                            error: Some(e.to_string()),
                        },
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect();
    rows.sort_by(|a, b| a.u.total_cmp(&b.u).then(a.order.cmp(&b.order)));
    rows
}

/// Writes the sweep table with a header row.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let to_err = |e: csv::Error| Error::Domain(format!("CSV write failed: {e}"));
    w.write_record(SWEEP_COLUMNS).map_err(to_err)?;
    for row in rows {
        let mut record = vec![row.u.to_string(), row.order.to_string()];
        match &row.report {
            Some(r) => record.extend([
                r.overlap.to_string(),
                r.r_squared.to_string(),
                r.e_true.to_string(),
                r.e_approx.to_string(),
                r.rel_log_error.to_string(),
                r.n_parameters.to_string(),
                r.parameter_fraction.to_string(),
            ]),
            None => record.extend(std::iter::repeat_n(String::new(), 7)),
        }
        record.push(row.wall_seconds.to_string());
        record.push(row.error.clone().unwrap_or_default());
        w.write_record(&record).map_err(to_err)?;
    }
    w.flush().map_err(|e| Error::Domain(format!("CSV write failed: {e}")))?;
    Ok(())
}
