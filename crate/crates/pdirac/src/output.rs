//! Persistence of reports: the full JSON report and a flat CSV table.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use crate::config::Format;
use crate::report::{Results, RunReport};

/// Float with 17 significant digits.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Header and rows of the flat table for a report, if it has results.
pub fn csv_table(report: &RunReport) -> Option<(Vec<&'static str>, Vec<Vec<String>>)> {
    let results = report.results.as_ref()?;
    let mut rows = Vec::new();
    let header = match results {
        Results::Spectrum(spectra) => {
            for row in spectra {
                let dense = row.dense.as_ref();
                let var = row.variational.as_ref();
                let primary = row.primary();
                let mc2 = primary.params.rest_energy();
                for k in 0..primary.eigenvalues.len() {
                    let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
                    rows.push(vec![
                        num(row.z),
                        (k + 1).to_string(),
                        opt(dense.map(|d| d.eigenvalues[k])),
                        opt(var.map(|v| v.eigenvalues[k])),
                        num(mc2 - primary.eigenvalues[k]),
                        num(primary.residuals[k]),
                        (k < primary.bound_states).to_string(),
                    ]);
                }
            }
            vec![
                "z",
                "level",
                "dense_eigenvalue",
                "variational_eigenvalue",
                "binding",
                "residual",
                "bound",
            ]
        }
        Results::DtnCheck(r) => {
            let series: [(&str, &[f64]); 3] = [
                ("energy_difference", &r.energy_differences),
                ("minimality_gain", &r.minimality_gains),
                ("trace_margin", &r.trace_margins),
            ];
            for (name, values) in series {
                for (i, v) in values.iter().enumerate() {
                    rows.push(vec![name.to_string(), i.to_string(), num(*v)]);
                }
            }
            rows.push(vec![
                "richardson_residual".into(),
                "0".into(),
                num(r.richardson_residual),
            ]);
            rows.push(vec!["equality_margin".into(), "0".into(), num(r.equality_margin)]);
            vec!["quantity", "sample", "value"]
        }
        Results::Inequalities(reports) => {
            for r in reports {
                for (label, ratio) in r.trial_labels.iter().zip(&r.ratios) {
                    rows.push(vec![
                        r.inequality_name.clone(),
                        label.clone(),
                        num(*ratio),
                        num(r.theoretical_constant),
                    ]);
                }
            }
            vec!["inequality", "trial", "ratio", "constant"]
        }
        Results::CommutatorDecay(r) => {
            for (rv, norm) in r.r_values.iter().zip(&r.norms) {
                rows.push(vec![num(*rv), num(*norm)]);
            }
            vec!["r", "norm"]
        }
        Results::ScalingLimit(r) => {
            for i in 0..r.eta_values.len() {
                rows.push(vec![
                    num(r.eta_values[i]),
                    num(r.form_values[i]),
                    num(r.remainder_values[i]),
                    num(r.rescaled_values[i]),
                ]);
            }
            vec!["eta", "form", "remainder", "rescaled"]
        }
        Results::CriticalScan(scan) => {
            for row in scan {
                for (n, l) in row.sizes.iter().zip(&row.lambda1) {
                    rows.push(vec![
                        num(row.z),
                        n.to_string(),
                        num(*l),
                        row.stable.to_string(),
                        row.collapsed.to_string(),
                    ]);
                }
            }
            vec!["z", "n", "lambda1_over_mc2", "stable", "collapsed"]
        }
        Results::NonrelLimit(r) => {
            for row in &r.rows {
                for (k, (b, d)) in row.binding.iter().zip(&row.deviation).enumerate() {
                    rows.push(vec![
                        num(row.c),
                        r.principal[k].to_string(),
                        num(*b),
                        num(r.exact[k]),
                        num(*d),
                    ]);
                }
            }
            vec!["c", "principal", "binding", "exact", "deviation"]
        }
    };
    Some((header, rows))
}

pub fn write_csv<W: io::Write>(report: &RunReport, writer: W) -> io::Result<usize> {
    let Some((header, rows)) = csv_table(report) else {
        return Ok(0);
    };
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(&header).map_err(io::Error::other)?;
    for row in &rows {
        w.write_record(row).map_err(io::Error::other)?;
    }
    w.flush()?;
    Ok(rows.len())
}

/// Writes `<command>.json` and `<command>.csv` into `dir` as requested;
/// returns the paths written.
pub fn write_report(report: &RunReport, formats: &[Format], dir: &Path) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let stem = report.command.name();
    let mut written = Vec::new();
    for format in formats {
        let path = match format {
            Format::Json => {
                let path = dir.join(format!("{stem}.json"));
                fs::write(&path, report.to_json()?)?;
                path
            }
            Format::Csv => {
                if report.results.is_none() {
                    continue;
                }
                let path = dir.join(format!("{stem}.csv"));
                write_csv(report, fs::File::create(&path)?)?;
                path
            }
        };
        written.push(path);
    }
    Ok(written)
}
