//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::f64::consts::{FRAC_2_PI, FRAC_PI_2};
use std::time::Instant;

use pdirac::config::{Format, Route};
use pdirac::output::{csv_table, write_report};
use pdirac::{run_command, Command, Results, RunConfig, RunReport, Status};
use pdirac_core::experiments::{algebra_scan, bound_scan, dtn_check, DtnSettings};
use pdirac_core::PhysParams;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn config(overrides: &[&str]) -> RunConfig {
    let owned: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
    RunConfig::from_parts(None, &owned).expect("acceptance configs are valid")
}

fn require(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn run(command: Command, config: &RunConfig) -> Result<Results, String> {
    let report = run_command(command, config);
    match (report.status, report.results) {
        (Status::Error, _) | (_, None) => Err(format!("run failed: {:?}", report.error)),
        (_, Some(results)) => Ok(results),
    }
}

fn fw_algebra() -> Check {
    let s = algebra_scan(1000, 1, &PhysParams::default()).map_err(|e| e.to_string())?;
    require(
        s.samples == 1000 && s.unitarity < 1e-12 && s.diagonalization < 1e-11 && s.projector < 1e-12,
        format!(
            "unitarity {:.1e}, diagonalization {:.1e}, projector {:.1e}",
            s.unitarity, s.diagonalization, s.projector
        ),
    )
}

fn pointwise_bounds() -> Check {
    let s = bound_scan(10_000, 2, &PhysParams::default()).map_err(|e| e.to_string())?;
    let limit = 1.0 + 1e-10;
    require(
        s.samples == 10_000 && s.kernel_ratio <= limit && s.a_plus_ratio <= limit && s.a_minus_ratio <= limit,
        format!(
            "max ratios: kernel {:.6}, a+ {:.6}, a- {:.6}",
            s.kernel_ratio, s.a_plus_ratio, s.a_minus_ratio
        ),
    )
}

fn commutator_decay() -> Check {
    let Results::CommutatorDecay(r) = run(Command::CommutatorDecay, &config(&[]))? else {
        return Err("wrong payload".into());
    };
    require(
        r.r_values.first() == Some(&2.0)
            && r.r_values.last() == Some(&64.0)
            && (-1.15..=-0.85).contains(&r.fitted_slope)
            && r.fit_residual < 0.1,
        format!("slope {:.4}, fit residual {:.2e}", r.fitted_slope, r.fit_residual),
    )
}

fn dtn() -> Result<pdirac_core::experiments::DtnReport, String> {
    dtn_check(&DtnSettings::default(), &PhysParams::default()).map_err(|e| e.to_string())
}

fn extension_identities() -> Check {
    let r = dtn()?;
    let energy = r.energy_differences.iter().copied().fold(0.0f64, f64::max);
    let gain = r.minimality_gains.iter().copied().fold(f64::INFINITY, f64::min);
    require(
        r.energy_differences.len() == 20
            && r.minimality_gains.len() == 50
            && energy < 1e-7
            && gain >= 0.0
            && r.richardson_residual < 1e-8,
        format!(
            "energy {:.1e}, min gain {:.1e}, richardson {:.1e}",
            energy, gain, r.richardson_residual
        ),
    )
}

fn trace_inequality() -> Check {
    let r = dtn()?;
    let worst = r.trace_margins.iter().copied().fold(f64::INFINITY, f64::min);
    require(
        r.trace_margins.len() == 50 && worst >= -1e-10 && r.equality_margin.abs() < 1e-10,
        format!("min margin {:.2e}, equality margin {:.1e}", worst, r.equality_margin),
    )
}

fn nonrelativistic_limit() -> Check {
    let cfg = config(&["c=137.035999", "z=1", "kappa=-1", "n=200", "route=dense", "k=3"]);
    let Results::Spectrum(rows) = run(Command::Spectrum, &cfg)? else {
        return Err("wrong payload".into());
    };
    let b = rows[0].primary().binding_energies();
    // hydrogen levels Z²/(2n²)
    let exact = [0.5, 0.125, 1.0 / 18.0];
    let tol = [1e-3, 5e-4, 5e-4];
    let dev: Vec<f64> = b.iter().zip(&exact).map(|(b, e)| (b - e).abs()).collect();
    require(
        dev.iter().zip(&tol).all(|(d, t)| d < t),
        format!("deviations {:.2e} {:.2e} {:.2e}", dev[0], dev[1], dev[2]),
    )
}

fn variational_route() -> Check {
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    for z in ["1", "50"] {
        let cfg = config(&["route=both", "k=5", &format!("z={z}")]);
        let Results::Spectrum(rows) = run(Command::Spectrum, &cfg)? else {
            return Err("wrong payload".into());
        };
        let row = &rows[0];
        let (d, v) = (row.dense.as_ref().unwrap(), row.variational.as_ref().unwrap());
        let mc2 = d.params.rest_energy();
        let diff = d
            .eigenvalues
            .iter()
            .zip(&v.eigenvalues)
            .map(|(a, b)| (a - b).abs() / mc2)
            .fold(0.0, f64::max);
        // pairwise L² inner products of the minimizers
        let mut ortho = 0.0f64;
        for (i, x) in v.coordinates.iter().enumerate() {
            for y in &v.coordinates[..i] {
                ortho = ortho.max(x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>().abs());
            }
        }
        let resid = v.residuals.iter().copied().fold(0.0, f64::max);
        worst = (worst.0.max(diff), worst.1.max(ortho), worst.2.max(resid));
        if v.eigenvalues.len() != 5 {
            return Err(format!("Z = {z}: expected 5 levels"));
        }
    }
    require(
        worst.0 < 1e-8 && worst.1 < 1e-10 && worst.2 < 1e-7,
        format!(
            "route difference {:.1e} mc², orthogonality {:.1e}, residual {:.1e}",
            worst.0, worst.1, worst.2
        ),
    )
}

fn spectral_bounds() -> Check {
    let cfg = config(&["route=dense", "experiments.z_values=[1,10,50,100,120]"]);
    let Results::Spectrum(rows) = run(Command::Spectrum, &cfg)? else {
        return Err("wrong payload".into());
    };
    let mut lambda1 = Vec::new();
    for row in &rows {
        let r = row.primary();
        let mc2 = r.params.rest_energy();
        let bound = &r.eigenvalues[..r.bound_states];
        if r.bound_states == 0 || bound.iter().any(|&l| !(l > 0.0 && l < mc2)) {
            return Err(format!("Z = {}: bound eigenvalues {bound:?} outside (0, mc²)", row.z));
        }
        let binding: Vec<f64> = bound.iter().map(|l| mc2 - l).collect();
        if binding.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(format!("Z = {}: binding energies not decreasing in k", row.z));
        }
        lambda1.push(r.eigenvalues[0] / mc2);
    }
    require(
        lambda1.windows(2).all(|w| w[1] < w[0]),
        format!(
            "λ₁/mc² = {}",
            lambda1.iter().map(|l| format!("{l:.5}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn inequality_constants() -> Check {
    let Results::Inequalities(reports) = run(Command::Inequalities, &config(&[]))? else {
        return Err("wrong payload".into());
    };
    let windows = [
        ("hardy", 1.8, 2.0),
        ("kato", 1.45, FRAC_PI_2),
        ("tix", 1.0, (FRAC_PI_2 + FRAC_2_PI) / 2.0),
    ];
    let mut detail = Vec::new();
    let mut ok = reports.len() == 3;
    for (r, (name, lo, hi)) in reports.iter().zip(windows) {
        ok &= r.inequality_name.to_lowercase().contains(name);
        ok &= r.max_ratio >= lo && r.max_ratio <= hi && r.margin >= 0.0;
        ok &= (r.theoretical_constant - hi).abs() < 1e-15;
        detail.push(format!("{name} {:.4} (margin {:.4})", r.max_ratio, r.margin));
    }
    require(ok, detail.join(", "))
}

fn critical_coupling() -> Check {
    let cfg = config(&["experiments.critical.z_values=[120,130]"]);
    let Results::CriticalScan(rows) = run(Command::CriticalScan, &cfg)? else {
        return Err("wrong payload".into());
    };
    let (below, above) = (&rows[0], &rows[1]);
    require(
        below.stable && below.lambda1.iter().all(|&l| l > 0.0) && above.collapsed && !above.stable,
        format!(
            "Z=120 λ₁/mc² {:.6} (variation {:.1e}), Z=130 λ₁/mc² {:.3e} at n = {}",
            below.lambda1.last().unwrap(),
            below.variation,
            above.lambda1.last().unwrap(),
            above.sizes.last().unwrap()
        ),
    )
}

fn scaling_limit() -> Check {
    let Results::ScalingLimit(r) = run(Command::ScalingLimit, &config(&[]))? else {
        return Err("wrong payload".into());
    };
    // Z·∫ e^{-y²} y dy = Z/2 for the Gaussian at Z = 1
    let expected = 0.5;
    let err = (r.leading_coefficient - expected).abs() / expected;
    let monotone = r.rescaled_values.windows(2).all(|w| w[1] < w[0]) && r.rescaled_values.iter().all(|&v| v < 0.0);
    require(
        err < 0.02 && r.remainder_exponent >= 1.7 && monotone,
        format!(
            "leading error {:.1e}, remainder exponent {:.3}, monotone {monotone}",
            err, r.remainder_exponent
        ),
    )
}

fn determinism() -> Check {
    let cfg = config(&["n=64", "k=3", "experiments.z_values=[1,2]"]);
    let a = run_command(Command::Spectrum, &cfg);
    let b = run_command(Command::Spectrum, &cfg);
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    write_report(&a, &[Format::Json, Format::Csv], dir.path()).map_err(|e| e.to_string())?;
    let text = std::fs::read_to_string(dir.path().join("spectrum.json")).map_err(|e| e.to_string())?;
    let back = RunReport::from_json(&text).map_err(|e| e.to_string())?;
    let rows = csv_table(&a).map(|t| t.1.len()).unwrap_or(0);
    require(
        a.status == Status::Ok
            && a.report_hash == b.report_hash
            && a.input_hash == b.input_hash
            && back == a
            && back.compute_hash() == a.report_hash
            && rows == 2 * 3
            && cfg.solver.route == Route::Both,
        format!(
            "report hash {}…, round trip {}, csv rows {rows}",
            &a.report_hash[..12],
            back == a
        ),
    )
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("FW algebra", fw_algebra),
        ("pointwise kernel and a± bounds", pointwise_bounds),
        ("commutator decay", commutator_decay),
        ("extension identities", extension_identities),
        ("trace inequality", trace_inequality),
        ("nonrelativistic limit", nonrelativistic_limit),
        ("variational route equivalence", variational_route),
        ("spectral bounds", spectral_bounds),
        ("inequality constants", inequality_constants),
        ("critical coupling", critical_coupling),
        ("scaling limit", scaling_limit),
        ("determinism and serialization", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = check();
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.1} s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail} [{secs:.1} s]", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
