//! Run reports: config echo, constants, results, hashes and timings.

use std::io;

use clap::ValueEnum;
use pdirac_core::eigen::SpectralResult;
use pdirac_core::experiments::{
    CommutatorDecayReport, CriticalRow, DtnReport, InequalityReport, NonrelReport, ScalingLimitReport,
};
use pdirac_core::params::{
    CRITICAL_COUPLING, HARDY_CONSTANT, KATO_CONSTANT, TIX_CONSTANT, Z_THRESHOLD_HARDY, Z_THRESHOLD_KATO,
    Z_THRESHOLD_TIX,
};
use pdirac_core::{PhysParams, Scheme};
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

pub const TOOL: &str = "pdirac";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Spectrum,
    DtnCheck,
    Inequalities,
    CommutatorDecay,
    ScalingLimit,
    CriticalScan,
    NonrelLimit,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Spectrum,
        Command::DtnCheck,
        Command::Inequalities,
        Command::CommutatorDecay,
        Command::ScalingLimit,
        Command::CriticalScan,
        Command::NonrelLimit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::DtnCheck => "dtn-check",
            Command::Inequalities => "inequalities",
            Command::CommutatorDecay => "commutator-decay",
            Command::ScalingLimit => "scaling-limit",
            Command::CriticalScan => "critical-scan",
            Command::NonrelLimit => "nonrel-limit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Flagged,
    Error,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Flagged => 1,
            Status::Error => 3,
        }
    }
}

/// Constants the margins are measured against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantTable {
    pub kato: f64,
    pub hardy: f64,
    pub tix: f64,
    /// 1/tix, the critical value of Z/c.
    pub critical_coupling: f64,
    /// critical_coupling·c for the configured c.
    pub critical_charge: f64,
    pub z_threshold_hardy: u32,
    pub z_threshold_kato: u32,
    pub z_threshold_tix: u32,
}

impl ConstantTable {
    pub fn for_params(params: &PhysParams) -> Self {
        Self {
            kato: KATO_CONSTANT,
            hardy: HARDY_CONSTANT,
            tix: TIX_CONSTANT,
            critical_coupling: CRITICAL_COUPLING,
            critical_charge: params.critical_charge(),
            z_threshold_hardy: Z_THRESHOLD_HARDY,
            z_threshold_kato: Z_THRESHOLD_KATO,
            z_threshold_tix: Z_THRESHOLD_TIX,
        }
    }
}

/// One charge of a spectrum run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub z: f64,
    pub scheme: Scheme,
    pub dense: Option<SpectralResult>,
    pub variational: Option<SpectralResult>,
    /// Iterations of the minimizer per level.
    pub iterations: Vec<usize>,
    /// max |λ_dense - λ_variational| / mc².
    pub route_difference: Option<f64>,
    pub orthonormality_defect: Option<f64>,
    pub warnings: Vec<String>,
}

impl SpectrumRow {
    /// The dense result if present, the variational one otherwise.
    pub fn primary(&self) -> &SpectralResult {
        self.dense
            .as_ref()
            .or(self.variational.as_ref())
            .expect("a spectrum row holds at least one route")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "kebab-case")]
pub enum Results {
    Spectrum(Vec<SpectrumRow>),
    DtnCheck(DtnReport),
    Inequalities(Vec<InequalityReport>),
    CommutatorDecay(CommutatorDecayReport),
    ScalingLimit(ScalingLimitReport),
    CriticalScan(Vec<CriticalRow>),
    NonrelLimit(NonrelReport),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub name: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Timings {
    pub total_seconds: f64,
    pub stages: Vec<Stage>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub command: Command,
    pub config: RunConfig,
    pub constants: ConstantTable,
    /// sha256 of tool, version, command and config.
    pub input_hash: String,
    pub status: Status,
    pub flags: Vec<String>,
    pub warnings: Vec<String>,
    pub error: Option<String>,
    pub results: Option<Results>,
    /// sha256 of everything above except the timings.
    pub report_hash: String,
    pub timings: Timings,
}

#[derive(Serialize)]
struct HashedInputs<'a> {
    tool: &'a str,
    version: &'a str,
    command: Command,
    config: &'a RunConfig,
}

#[derive(Serialize)]
struct HashedReport<'a> {
    input_hash: &'a str,
    status: Status,
    flags: &'a [String],
    warnings: &'a [String],
    error: &'a Option<String>,
    results: &'a Option<Results>,
}

fn sha256_json<T: Serialize>(value: &T) -> String {
    let bytes = to_json_bytes(value, false).expect("report values serialize");
    let digest = Sha256::digest(&bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn input_hash(command: Command, config: &RunConfig) -> String {
    sha256_json(&HashedInputs {
        tool: TOOL,
        version: VERSION,
        command,
        config,
    })
}

impl RunReport {
    pub fn new(
        command: Command,
        config: RunConfig,
        outcome: Result<(Results, Vec<String>, Vec<String>), String>,
        timings: Timings,
    ) -> Self {
        let input_hash = input_hash(command, &config);
        let (status, flags, warnings, error, results) = match outcome {
            Ok((results, flags, warnings)) => {
                let status = if flags.is_empty() { Status::Ok } else { Status::Flagged };
                (status, flags, warnings, None, Some(results))
            }
            Err(e) => (Status::Error, Vec::new(), Vec::new(), Some(e), None),
        };
        let mut report = Self {
            tool: TOOL.into(),
            version: VERSION.into(),
            command,
            constants: ConstantTable::for_params(&config.params),
            config,
            input_hash,
            status,
            flags,
            warnings,
            error,
            results,
            report_hash: String::new(),
            timings,
        };
        report.report_hash = report.compute_hash();
        report
    }

    pub fn compute_hash(&self) -> String {
        sha256_json(&HashedReport {
            input_hash: &self.input_hash,
            status: self.status,
            flags: &self.flags,
            warnings: &self.warnings,
            error: &self.error,
            results: &self.results,
        })
    }

    pub fn to_json(&self) -> io::Result<String> {
        let bytes = to_json_bytes(self, true)?;
        String::from_utf8(bytes).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

/// Writes finite floats with 17 significant digits, otherwise pretty or
/// compact JSON.
struct DigitsFormatter {
    pretty: Option<PrettyFormatter<'static>>,
}

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*)),* $(,)?) => {
        $(fn $name<W: ?Sized + io::Write>(&mut self, writer: &mut W $(, $arg: $ty)*) -> io::Result<()> {
            match &mut self.pretty {
                Some(p) => p.$name(writer $(, $arg)*),
                None => serde_json::ser::CompactFormatter.$name(writer $(, $arg)*),
            }
        })*
    };
}

impl Formatter for DigitsFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    delegate!(
        begin_array(),
        end_array(),
        begin_array_value(first: bool),
        end_array_value(),
        begin_object(),
        end_object(),
        begin_object_key(first: bool),
        end_object_key(),
        begin_object_value(),
        end_object_value(),
    );
}

fn to_json_bytes<T: Serialize + ?Sized>(value: &T, pretty: bool) -> io::Result<Vec<u8>> {
    let mut out = Vec::new();
    let formatter = DigitsFormatter {
        pretty: pretty.then(PrettyFormatter::new),
    };
    let mut ser = serde_json::Serializer::with_formatter(&mut out, formatter);
    value.serialize(&mut ser).map_err(io::Error::other)?;
    if pretty {
        out.push(b'\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_seventeen_digits() {
        let v = vec![0.1, 1.0 / 3.0, 137.035999084, -2.5e-300, 0.0];
        let text = String::from_utf8(to_json_bytes(&v, false).unwrap()).unwrap();
        assert!(text.starts_with("[1.0000000000000001e-1,"), "{text}");
        let back: Vec<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, v);
        let pretty = String::from_utf8(to_json_bytes(&v, true).unwrap()).unwrap();
        assert!(pretty.contains("\n  3.3333333333333331e-1,"), "{pretty}");
    }

    #[test]
    fn hashes_ignore_timings() {
        let outcome = || Err::<(Results, Vec<String>, Vec<String>), _>("boom".to_string());
        let a = RunReport::new(Command::Spectrum, RunConfig::default(), outcome(), Timings::default());
        let b = RunReport::new(
            Command::Spectrum,
            RunConfig::default(),
            outcome(),
            Timings {
                total_seconds: 3.0,
                stages: vec![],
            },
        );
        assert_eq!(a.report_hash, b.report_hash);
        assert_eq!(a.report_hash.len(), 64);
        let c = RunReport::new(Command::DtnCheck, RunConfig::default(), outcome(), Timings::default());
        assert_ne!(a.input_hash, c.input_hash);
        assert_eq!(RunReport::from_json(&a.to_json().unwrap()).unwrap(), a);
    }

    #[test]
    fn command_names_match_clap() {
        for c in Command::ALL {
            assert_eq!(c.to_possible_value().unwrap().get_name(), c.name());
            assert_eq!(
                serde_json::to_value(c).unwrap(),
                serde_json::Value::String(c.name().into())
            );
        }
    }
}
