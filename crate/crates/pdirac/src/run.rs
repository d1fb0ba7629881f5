//! Dispatch of one command on a validated configuration.

use std::time::Instant;

use pdirac_core::eigen::{dense_spectrum, orthonormality_defect, variational_spectrum, MinimizeOptions};
use pdirac_core::experiments::{
    commutator_decay, critical_point, dtn_check, inequality_suite, nonrel_limit, scaling_limit, CriticalRow,
    InequalityReport,
};
use pdirac_core::grid::RadialGrid;
use pdirac_core::operator::assemble_operator;
use pdirac_core::{ChannelSpec, ChiProfile, PhysParams};
use rayon::prelude::*;

use crate::config::{Route, RunConfig};
use crate::report::{Command, Results, RunReport, SpectrumRow, Stage, Timings};

/// Largest accepted eigenpair residual ‖(A - λ)x‖/‖x‖.
pub const RESIDUAL_LIMIT: f64 = 1e-7;
/// Largest accepted route difference in units of mc².
pub const ROUTE_LIMIT: f64 = 1e-8;
/// Largest accepted orthonormality defect of the minimizer output.
pub const ORTHONORMALITY_LIMIT: f64 = 1e-10;
/// Accepted window for the commutator decay slope.
pub const SLOPE_WINDOW: (f64, f64) = (-1.15, -0.85);

type Outcome = (Results, Vec<String>, Vec<String>);

/// Runs `command` and wraps the outcome in a report; module errors become an
/// error report rather than a panic.
pub fn run_command(command: Command, config: &RunConfig) -> RunReport {
    let start = Instant::now();
    let mut stages = Vec::new();
    let outcome = dispatch(command, config, &mut stages).map_err(|e| e.to_string());
    let timings = Timings {
        total_seconds: start.elapsed().as_secs_f64(),
        stages,
    };
    RunReport::new(command, config.clone(), outcome, timings)
}

fn timed<T>(stages: &mut Vec<Stage>, name: &str, f: impl FnOnce() -> T) -> T {
    let t = Instant::now();
    let out = f();
    stages.push(Stage {
        name: name.into(),
        seconds: t.elapsed().as_secs_f64(),
    });
    out
}

fn dispatch(command: Command, config: &RunConfig, stages: &mut Vec<Stage>) -> pdirac_core::Result<Outcome> {
    config.params.validate()?;
    let channel = ChannelSpec::new(config.channel.kappa)?;
    let params = config.params;
    let e = &config.experiments;
    match command {
        Command::Spectrum => spectrum(config, channel, stages),
        Command::DtnCheck => {
            let report = timed(stages, "dtn", || dtn_check(&e.dtn, &params))?;
            let mut flags = Vec::new();
            if report.flagged {
                flags.push(format!(
                    "extension identities out of tolerance: max energy difference {:.3e}, min gain {:.3e}, richardson {:.3e}, min trace margin {:.3e}, equality margin {:.3e}",
                    max_of(&report.energy_differences),
                    min_of(&report.minimality_gains),
                    report.richardson_residual,
                    min_of(&report.trace_margins),
                    report.equality_margin
                ));
            }
            let mut warnings = Vec::new();
            if report.tail_warnings > 0 {
                warnings.push(format!(
                    "{} extension profiles were cut at the tail",
                    report.tail_warnings
                ));
            }
            Ok((Results::DtnCheck(report), flags, warnings))
        }
        Command::Inequalities => {
            let reports = timed(stages, "inequalities", || inequality_suite(&e.inequalities, &params))?;
            let flags = reports
                .iter()
                .filter(|r| r.flagged || r.margin < 0.0)
                .map(inequality_flag)
                .collect();
            Ok((Results::Inequalities(reports), flags, Vec::new()))
        }
        Command::CommutatorDecay => {
            let c = &e.commutator;
            let grid = RadialGrid::build(c.n, c.s)?;
            let report = timed(stages, "commutator", || {
                commutator_decay(&c.r_values, &grid, channel, ChiProfile::Gaussian, &params)
            })?;
            let mut flags = Vec::new();
            if report.flagged {
                flags.push(format!("commutator fit residual {:.3e} too large", report.fit_residual));
            }
            if !(report.fitted_slope >= SLOPE_WINDOW.0 && report.fitted_slope <= SLOPE_WINDOW.1) {
                flags.push(format!(
                    "commutator slope {:.4} outside [{}, {}]",
                    report.fitted_slope, SLOPE_WINDOW.0, SLOPE_WINDOW.1
                ));
            }
            Ok((Results::CommutatorDecay(report), flags, Vec::new()))
        }
        Command::ScalingLimit => {
            let s = &e.scaling;
            let report = timed(stages, "scaling", || {
                scaling_limit(s.phi, &s.eta_values, channel, &params)
            })?;
            let mut flags = Vec::new();
            if report.flagged {
                flags.push(format!(
                    "scaling limit off: leading error {:.3e}, remainder exponent {:.3}, monotone {}",
                    report.leading_relative_error, report.remainder_exponent, report.monotone_divergence
                ));
            }
            Ok((Results::ScalingLimit(report), flags, Vec::new()))
        }
        Command::CriticalScan => {
            let c = &e.critical;
            let rows = timed(stages, "critical", || {
                c.z_values
                    .par_iter()
                    .map(|&z| critical_point(z, channel.kappa, &c.settings, &params))
                    .collect::<pdirac_core::Result<Vec<_>>>()
            })?;
            let flags = rows.iter().filter_map(critical_flag).collect();
            Ok((Results::CriticalScan(rows), flags, Vec::new()))
        }
        Command::NonrelLimit => {
            let report = timed(stages, "nonrel", || nonrel_limit(&e.nonrel, channel.kappa, &params))?;
            let mut flags = Vec::new();
            if report.flagged {
                let dev = report.rows.first().map(|r| max_abs(&r.deviation)).unwrap_or(f64::NAN);
                flags.push(format!(
                    "nonrelativistic deviations out of tolerance, max {dev:.3e} at the configured c"
                ));
            }
            Ok((Results::NonrelLimit(report), flags, Vec::new()))
        }
    }
}

fn inequality_flag(r: &InequalityReport) -> String {
    format!(
        "{} ratio {:.10} exceeds the constant {:.10} (margin {:.3e})",
        r.inequality_name, r.max_ratio, r.theoretical_constant, r.margin
    )
}

/// Rows below the critical charge must be stable, rows above must not be.
fn critical_flag(row: &CriticalRow) -> Option<String> {
    if row.below_critical && row.collapsed {
        Some(format!(
            "Z = {} lies below the critical charge but collapses: {:?}",
            row.z, row.lambda1
        ))
    } else if !row.below_critical && row.stable {
        Some(format!(
            "Z = {} lies above the critical charge but is stable: {:?}",
            row.z, row.lambda1
        ))
    } else {
        None
    }
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn min_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn spectrum_row(config: &RunConfig, channel: ChannelSpec, params: PhysParams) -> pdirac_core::Result<SpectrumRow> {
    let scheme = config.grid.scheme.resolve(&params);
    let grid = RadialGrid::build_stretched(config.grid.n, config.grid.scale_for(&params), config.grid.stretch)?;
    let op = assemble_operator(&grid, channel, &params, scheme)?;
    let k = config.solver.k;
    let route = config.solver.route;
    let dense = match route {
        Route::Dense | Route::Both => Some(dense_spectrum(&op, k)?),
        Route::Variational => None,
    };
    let (variational, iterations) = match route {
        Route::Variational | Route::Both => {
            let opts = MinimizeOptions {
                tol: config.solver.tol,
                max_iter: config.solver.max_iter,
                seed: config.solver.seed,
            };
            let (res, traces) = variational_spectrum(&op, k, &opts).map_err(|f| f.error)?;
            (Some(res), traces.iter().map(|t| t.energies.len()).collect())
        }
        Route::Dense => (None, Vec::new()),
    };
    let route_difference = match (&dense, &variational) {
        (Some(d), Some(v)) => Some(
            d.eigenvalues
                .iter()
                .zip(&v.eigenvalues)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
                / params.rest_energy(),
        ),
        _ => None,
    };
    let orthonormality_defect = variational.as_ref().map(|v| orthonormality_defect(&v.coordinates));
    Ok(SpectrumRow {
        z: params.z,
        scheme,
        dense,
        variational,
        iterations,
        route_difference,
        orthonormality_defect,
        warnings: op.warnings,
    })
}

fn spectrum(config: &RunConfig, channel: ChannelSpec, stages: &mut Vec<Stage>) -> pdirac_core::Result<Outcome> {
    let charges = if config.experiments.z_values.is_empty() {
        vec![config.params.z]
    } else {
        config.experiments.z_values.clone()
    };
    let rows = timed(stages, "spectrum", || {
        charges
            .par_iter()
            .map(|&z| spectrum_row(config, channel, config.params.with_z(z)))
            .collect::<pdirac_core::Result<Vec<_>>>()
    })?;
    let mut flags = Vec::new();
    let mut warnings = Vec::new();
    for row in &rows {
        let z = row.z;
        warnings.extend(row.warnings.iter().cloned());
        let mc2 = row.primary().params.rest_energy();
        for res in row.dense.iter().chain(&row.variational) {
            let worst = max_of(&res.residuals);
            if !(worst <= RESIDUAL_LIMIT) {
                flags.push(format!(
                    "Z = {z}: {:?} residual {worst:.3e} exceeds {RESIDUAL_LIMIT:e}",
                    res.route
                ));
            }
            let bound = &res.eigenvalues[..res.bound_states];
            if bound.iter().any(|&l| !(l > 0.0 && l < mc2)) {
                flags.push(format!("Z = {z}: bound eigenvalues leave (0, mc²): {bound:?}"));
            }
            if res.eigenvalues.windows(2).any(|w| !(w[0] < w[1])) {
                flags.push(format!(
                    "Z = {z}: {:?} eigenvalues are not strictly increasing",
                    res.route
                ));
            }
        }
        if let Some(d) = row.route_difference {
            if !(d <= ROUTE_LIMIT) {
                flags.push(format!("Z = {z}: routes differ by {d:.3e} mc²"));
            }
        }
        if let Some(d) = row.orthonormality_defect {
            if !(d <= ORTHONORMALITY_LIMIT) {
                flags.push(format!("Z = {z}: minimizer output orthonormality defect {d:.3e}"));
            }
        }
    }
    let mut by_z: Vec<(f64, f64)> = rows.iter().map(|r| (r.z, r.primary().eigenvalues[0])).collect();
    by_z.sort_by(|a, b| a.0.total_cmp(&b.0));
    for w in by_z.windows(2) {
        if w[0].0 < w[1].0 && !(w[1].1 < w[0].1) {
            flags.push(format!(
                "lowest eigenvalue does not decrease from Z = {} to Z = {}",
                w[0].0, w[1].0
            ));
        }
    }
    Ok((Results::Spectrum(rows), flags, warnings))
}
