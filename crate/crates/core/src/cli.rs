//! Command-line front end for the `hom` binary.
//!
//! Every flag may also be given in a config file of `key = value` lines whose
//! keys are the long flag names without dashes. Flags on the command line win.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde::Serialize;

use crate::closedform::InterferenceModel;
use crate::engine::{joint_probability, DelayPair, ProbabilityMatrix, QuadratureSpec};
use crate::experiments::{
    discrepancy_scan, format_number, sweep_delay, zero_detuning_bunching_window, EvalPath, LinearRange, SweepSpec,
};
use crate::model::{
    apply_beamsplitter, make_detuned_spectrum, make_entangled_spectrum, GridSpectrum, PortPair, ReducedSpectrum,
    SourceParams,
};
use crate::oracle::{compare_closed_forms, ParameterGrid};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Curve,
    Matrix,
    Scan,
    Validate,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SourceArg {
    Entangled,
    Detuned,
    Grid(PathBuf),
}

impl fmt::Display for SourceArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceArg::Entangled => write!(f, "entangled"),
            SourceArg::Detuned => write!(f, "detuned"),
            SourceArg::Grid(p) => write!(f, "grid:{}", p.display()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Full,
    Literature,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EngineArg {
    Closed,
    Numeric,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// A single delay or an inclusive `start:end:steps` range, in ps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DtauArg {
    Value(f64),
    Range(LinearRange),
}

impl fmt::Display for DtauArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DtauArg::Value(v) => write!(f, "{v:?}"),
            DtauArg::Range(r) => write!(f, "{:?}:{:?}:{}", r.start, r.end, r.steps),
        }
    }
}

fn parse_number(token: &str) -> std::result::Result<f64, String> {
    let v: f64 = token
        .trim()
        .parse()
        .map_err(|_| format!("'{token}' is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{token}' is not finite"))
    }
}

/// Numbers plus `pi`, `-pi`, `pi/N`, `-pi/N` and `K*pi`.
pub fn parse_phase(token: &str) -> std::result::Result<f64, String> {
    let t = token.trim();
    let (sign, body) = match t.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, t),
    };
    if body == "pi" {
        return Ok(sign * PI);
    }
    if let Some(den) = body.strip_prefix("pi/") {
        let d = parse_number(den).map_err(|_| format!("'{token}' is not a phase"))?;
        if d == 0.0 {
            return Err(format!("'{token}' divides by zero"));
        }
        return Ok(sign * PI / d);
    }
    if let Some(k) = body.strip_suffix("*pi") {
        let k = parse_number(k).map_err(|_| format!("'{token}' is not a phase"))?;
        return Ok(sign * k * PI);
    }
    parse_number(t)
}

fn parse_range(token: &str) -> std::result::Result<LinearRange, String> {
    let parts: Vec<&str> = token.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("'{token}' is not a start:end:steps range"));
    }
    let start = parse_number(parts[0])?;
    let end = parse_number(parts[1])?;
    let steps: usize = parts[2]
        .trim()
        .parse()
        .map_err(|_| format!("'{}' in '{token}' is not a step count", parts[2]))?;
    LinearRange::new(start, end, steps).map_err(|e| format!("'{token}': {e}"))
}

fn parse_dtau(token: &str) -> std::result::Result<DtauArg, String> {
    if token.contains(':') {
        parse_range(token).map(DtauArg::Range)
    } else {
        parse_number(token).map(DtauArg::Value)
    }
}

fn parse_source(token: &str) -> std::result::Result<SourceArg, String> {
    match token {
        "entangled" => Ok(SourceArg::Entangled),
        "detuned" => Ok(SourceArg::Detuned),
        _ => match token.strip_prefix("grid:") {
            Some(path) if !path.is_empty() => Ok(SourceArg::Grid(PathBuf::from(path))),
            _ => Err(format!("'{token}' is not entangled, detuned or grid:<path>")),
        },
    }
}

#[derive(Parser, Debug, Clone)]
#[command(
    name = "hom",
    version,
    about = "Two-photon interference at a beam splitter: coincidence curves, detection matrices, model scans",
    args_override_self = true
)]
struct Args {
    /// What to compute.
    #[arg(value_enum)]
    command: Option<Command>,

    #[arg(long = "command", value_enum, hide = true)]
    command_key: Option<Command>,

    /// Config file of `key = value` lines; flags given here override it.
    #[arg(long)]
    config: Option<PathBuf>,

    /// entangled, detuned or grid:<csv path>.
    #[arg(long, value_parser = parse_source)]
    source: Option<SourceArg>,

    /// Frequency separation ν = μ/2π in THz.
    #[arg(long, value_parser = parse_number, allow_hyphen_values = true)]
    nu_thz: Option<f64>,

    /// Spectral bandwidth ξ in rad/ps.
    #[arg(long, value_parser = parse_number, allow_hyphen_values = true)]
    xi_radps: Option<f64>,

    /// Symmetry phase φ; accepts `pi`, `pi/N`.
    #[arg(long, value_parser = parse_phase, allow_hyphen_values = true)]
    phi_rad: Option<f64>,

    /// Beam-splitter phase θ; accepts `pi`, `pi/N`.
    #[arg(long, value_parser = parse_phase, allow_hyphen_values = true)]
    theta_rad: Option<f64>,

    /// Delay in ps, or `start:end:steps`.
    #[arg(long, value_parser = parse_dtau, allow_hyphen_values = true)]
    dtau: Option<DtauArg>,

    /// Frequency scan `start:end:steps` in THz.
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
    nu_thz_range: Option<LinearRange>,

    #[arg(long, value_enum)]
    model: Option<ModelArg>,

    /// closed forms or numerical quadrature; defaults by source.
    #[arg(long, value_enum)]
    engine: Option<EngineArg>,

    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long, value_enum)]
    format: Option<Format>,
}

/// A fully resolved run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub source: SourceArg,
    pub nu_thz: f64,
    pub xi_radps: f64,
    pub phi_rad: f64,
    pub theta_rad: f64,
    pub dtau: DtauArg,
    pub nu_thz_range: LinearRange,
    pub model: ModelArg,
    pub engine: EngineArg,
    pub out: Option<PathBuf>,
    pub format: Format,
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

fn enum_name<T: ValueEnum>(v: &T) -> String {
    v.to_possible_value().expect("no skipped variants").get_name().to_string()
}

fn clap_error(e: clap::Error) -> Error {
    if !e.use_stderr() {
        // --help and --version
        e.exit();
    }
    usage(e.render().to_string())
}

/// Turns `key = value` lines into flag tokens.
fn config_tokens(text: &str) -> Result<Vec<String>> {
    let mut tokens = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("config line {}: expected key = value, got '{line}'", n + 1)))?;
        let key = key.trim();
        if key.is_empty() || key.starts_with('-') || key == "config" {
            return Err(usage(format!("config line {}: invalid key '{key}'", n + 1)));
        }
        tokens.push(format!("--{key}"));
        tokens.push(value.trim().to_string());
    }
    Ok(tokens)
}

/// Parses argv (program name first), merging an optional config file beneath it.
pub fn parse_config<I, T>(argv: I) -> Result<RunConfig>
where
    I: IntoIterator<Item = T>,
    T: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let first = Args::try_parse_from(&argv).map_err(clap_error)?;
    let args = match &first.config {
        None => first,
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
            let mut merged = vec![argv.first().cloned().unwrap_or_else(|| "hom".into())];
            merged.extend(config_tokens(&text)?);
            merged.extend(argv.iter().skip(1).cloned());
            Args::try_parse_from(&merged).map_err(clap_error)?
        }
    };
    resolve(args)
}

fn resolve(args: Args) -> Result<RunConfig> {
    let command = args
        .command
        .or(args.command_key)
        .ok_or_else(|| usage("missing command: curve, matrix, scan or validate"))?;
    let source = args.source.unwrap_or(SourceArg::Entangled);
    let engine = args.engine.unwrap_or(match source {
        SourceArg::Grid(_) => EngineArg::Numeric,
        _ => EngineArg::Closed,
    });
    let dtau = args.dtau.unwrap_or(match command {
        Command::Matrix => DtauArg::Value(0.0),
        _ => DtauArg::Range(LinearRange { start: -3.0, end: 3.0, steps: 601 }),
    });
    let config = RunConfig {
        command,
        source,
        nu_thz: args.nu_thz.unwrap_or(0.265),
        xi_radps: args.xi_radps.unwrap_or(1.356),
        phi_rad: args.phi_rad.unwrap_or(PI),
        theta_rad: args.theta_rad.unwrap_or(0.0),
        dtau,
        nu_thz_range: args
            .nu_thz_range
            .unwrap_or(LinearRange { start: 0.01, end: 2.0, steps: 100 }),
        model: args.model.unwrap_or(ModelArg::Full),
        engine,
        out: args.out,
        format: args.format.unwrap_or(Format::Csv),
    };
    config.validate()?;
    Ok(config)
}

impl RunConfig {
    /// Detuning `μ = 2πν` in rad/ps.
    pub fn mu(&self) -> f64 {
        TAU * self.nu_thz
    }

    pub fn source_params(&self) -> Result<SourceParams> {
        SourceParams::new(0.0, self.mu(), self.xi_radps, self.phi_rad, self.theta_rad).map_err(|e| usage(e.to_string()))
    }

    /// Closed-form model implied by source and model flags.
    pub fn interference_model(&self) -> InterferenceModel {
        match (&self.source, self.model) {
            (SourceArg::Detuned, _) => InterferenceModel::Detuned,
            (_, ModelArg::Full) => InterferenceModel::EntangledFull,
            (_, ModelArg::Literature) => InterferenceModel::EntangledLiterature,
        }
    }

    fn validate(&self) -> Result<()> {
        self.source_params()?;
        let grid = matches!(self.source, SourceArg::Grid(_));
        if grid && self.engine == EngineArg::Closed {
            return Err(usage("a grid source has no closed form; use --engine numeric"));
        }
        if self.engine == EngineArg::Numeric && self.interference_model() == InterferenceModel::EntangledLiterature {
            return Err(usage("--model literature is only available with --engine closed"));
        }
        match (self.command, self.dtau) {
            (Command::Matrix, DtauArg::Range(_)) => {
                return Err(usage(format!("matrix needs a single --dtau, got '{}'", self.dtau)))
            }
            (Command::Curve | Command::Scan, DtauArg::Value(_)) => {
                return Err(usage(format!("--dtau must be a start:end:steps range, got '{}'", self.dtau)))
            }
            _ => {}
        }
        if grid && matches!(self.command, Command::Scan | Command::Validate) {
            return Err(usage("scan and validate work on the sinc sources only"));
        }
        if self.command == Command::Scan && self.nu_thz_range.start < 0.0 {
            return Err(usage("--nu-thz-range must be non-negative"));
        }
        Ok(())
    }

    /// Renders the config in the file format accepted by `--config`.
    pub fn to_config_file(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        put("command", enum_name(&self.command));
        put("source", self.source.to_string());
        put("nu-thz", format!("{:?}", self.nu_thz));
        put("xi-radps", format!("{:?}", self.xi_radps));
        put("phi-rad", format!("{:?}", self.phi_rad));
        put("theta-rad", format!("{:?}", self.theta_rad));
        put("dtau", self.dtau.to_string());
        let r = self.nu_thz_range;
        put("nu-thz-range", format!("{:?}:{:?}:{}", r.start, r.end, r.steps));
        put("model", enum_name(&self.model));
        put("engine", enum_name(&self.engine));
        if let Some(out) = &self.out {
            put("out", out.display().to_string());
        }
        put("format", enum_name(&self.format));
        s
    }

    fn dtau_range(&self) -> LinearRange {
        match self.dtau {
            DtauArg::Range(r) => r,
            DtauArg::Value(_) => unreachable!("validated"),
        }
    }

    fn spectrum(&self, params: &SourceParams) -> Result<ReducedSpectrum> {
        Ok(match &self.source {
            SourceArg::Entangled => make_entangled_spectrum(params),
            SourceArg::Detuned => make_detuned_spectrum(params),
            SourceArg::Grid(path) => ReducedSpectrum::Grid(GridSpectrum::from_csv_path(path)?),
        })
    }

    fn sweep_spec(&self) -> Result<SweepSpec> {
        let params = self.source_params()?;
        let grid = match self.spectrum(&params)? {
            ReducedSpectrum::Grid(g) => Some(g),
            _ => None,
        };
        Ok(SweepSpec {
            model: self.interference_model(),
            dtau_range: self.dtau_range(),
            nu_range: Some(self.nu_thz_range),
            params,
            path: match self.engine {
                EngineArg::Closed => EvalPath::ClosedForm,
                EngineArg::Numeric => EvalPath::Engine,
            },
            grid,
        })
    }
}

#[derive(Serialize)]
struct MatrixOutput {
    dtau_ps: f64,
    probabilities: [[f64; 2]; 2],
    coincidence: f64,
    error_bound: f64,
    engine: &'static str,
}

fn matrix_output(config: &RunConfig, dtau: f64) -> Result<MatrixOutput> {
    let params = config.source_params()?;
    match config.engine {
        EngineArg::Numeric => {
            let wf = apply_beamsplitter(&config.spectrum(&params)?, &params);
            let quad = QuadratureSpec::default_for(&wf);
            let m: ProbabilityMatrix = joint_probability(&wf, DelayPair::from_difference(dtau)?, &quad)?;
            Ok(MatrixOutput {
                dtau_ps: dtau,
                probabilities: m.as_array(),
                coincidence: m.coincidence(),
                error_bound: m.error_bound(),
                engine: "numeric",
            })
        }
        EngineArg::Closed => {
            // the beam splitter splits each outcome class evenly between its two entries
            let pc = config
                .interference_model()
                .coincidence(params.detuning_mu(), params.bandwidth_xi(), params.symmetry_phase_phi(), dtau)?;
            let (b, c) = ((1.0 - pc) / 2.0, pc / 2.0);
            Ok(MatrixOutput {
                dtau_ps: dtau,
                probabilities: [[b, c], [c, b]],
                coincidence: pc,
                error_bound: 0.0,
                engine: "closed",
            })
        }
    }
}

fn open_output(config: &RunConfig) -> Result<Box<dyn Write>> {
    Ok(match &config.out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<W: Write, T: Serialize>(mut w: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Executes a resolved config. Returns `Ok(false)` when `validate` finds failing rows.
pub fn run(config: &RunConfig) -> Result<bool> {
    match config.command {
        Command::Curve => {
            let curve = sweep_delay(&config.sweep_spec()?)?;
            let out = open_output(config)?;
            match config.format {
                Format::Csv => curve.write_csv(out)?,
                Format::Json => write_json(out, &curve)?,
            }
            Ok(true)
        }
        Command::Matrix => {
            let DtauArg::Value(dtau) = config.dtau else {
                unreachable!("validated")
            };
            let m = matrix_output(config, dtau)?;
            let mut out = open_output(config)?;
            match config.format {
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(&mut out);
                    w.write_record(["s1", "s2", "probability"])?;
                    for ports in PortPair::all() {
                        let p = m.probabilities[ports.first.index()][ports.second.index()];
                        w.write_record([ports.first.to_string(), ports.second.to_string(), format_number(p)])?;
                    }
                    w.flush()?;
                }
                Format::Json => write_json(out, &m)?,
            }
            Ok(true)
        }
        Command::Scan => {
            let table = discrepancy_scan(&config.sweep_spec()?)?;
            let out = open_output(config)?;
            match config.format {
                Format::Csv => table.write_csv(out)?,
                Format::Json => {
                    #[derive(Serialize)]
                    struct ScanOutput<'a> {
                        table: &'a crate::experiments::DiscrepancyTable,
                        zero_detuning_bunching: crate::experiments::BunchingWindow,
                    }
                    let window = zero_detuning_bunching_window(config.xi_radps)?;
                    write_json(out, &ScanOutput { table: &table, zero_detuning_bunching: window })?
                }
            }
            Ok(true)
        }
        Command::Validate => {
            let report = compare_closed_forms(&ParameterGrid::default_grid(), config.interference_model())?;
            let out = open_output(config)?;
            match config.format {
                Format::Csv => report.write_csv(out)?,
                Format::Json => write_json(out, &report)?,
            }
            if !report.all_passed() {
                eprintln!(
                    "validate: {} of {} rows exceed the oracle bound (max abs error {:e})",
                    report.failures(),
                    report.rows.len(),
                    report.max_abs_err()
                );
            }
            Ok(report.all_passed())
        }
    }
}

/// Parses, runs and maps the outcome to an exit status: 0 success, 1 numerical
/// failure, 2 usage error.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<String>,
{
    let config = match parse_config(argv) {
        Ok(c) => c,
        Err(Error::Usage(msg)) => {
            eprintln!("{}", msg.trim_end());
            return 2;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    match run(&config) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(Error::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<RunConfig> {
        parse_config(std::iter::once("hom").chain(args.iter().copied()))
    }

    #[test]
    fn phase_literals() {
        assert_eq!(parse_phase("pi").unwrap(), PI);
        assert_eq!(parse_phase("-pi").unwrap(), -PI);
        assert_eq!(parse_phase("pi/2").unwrap(), PI / 2.0);
        assert_eq!(parse_phase("2*pi").unwrap(), 2.0 * PI);
        assert_eq!(parse_phase("0.5").unwrap(), 0.5);
        assert!(parse_phase("NaN").is_err());
        assert!(parse_phase("pie").is_err());
    }

    #[test]
    fn nu_becomes_angular_detuning() {
        let c = parse(&["matrix", "--nu-thz", "0.265"]).unwrap();
        assert!((c.mu() - 1.66504).abs() < 1e-5);
        let c = parse(&["matrix", "--phi-rad", "pi"]).unwrap();
        assert_eq!(c.phi_rad, PI);
    }

    #[test]
    fn dtau_ranges() {
        let c = parse(&["curve", "--dtau", "-3:3:2"]).unwrap();
        assert_eq!(c.dtau, DtauArg::Range(LinearRange { start: -3.0, end: 3.0, steps: 2 }));
        for bad in ["3:-3:10", "-3:3:1", "1:2", "a:b:3"] {
            let e = parse(&["curve", "--dtau", bad]).unwrap_err();
            assert!(matches!(e, Error::Usage(ref m) if m.contains(bad)), "{bad}: {e}");
        }
    }

    #[test]
    fn usage_errors() {
        assert!(matches!(parse(&[]), Err(Error::Usage(_))));
        assert!(matches!(parse(&["curve", "--bogus", "1"]), Err(Error::Usage(_))));
        assert!(matches!(parse(&["curve", "--xi-radps", "nan"]), Err(Error::Usage(_))));
        assert!(matches!(parse(&["curve", "--xi-radps", "-1"]), Err(Error::Usage(_))));
        assert!(matches!(parse(&["matrix", "--dtau", "0:1:3"]), Err(Error::Usage(_))));
        assert!(matches!(
            parse(&["curve", "--source", "grid:x.csv", "--engine", "closed"]),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn engine_defaults_by_source() {
        assert_eq!(parse(&["curve"]).unwrap().engine, EngineArg::Closed);
        assert_eq!(parse(&["curve", "--source", "grid:x.csv"]).unwrap().engine, EngineArg::Numeric);
    }

    #[test]
    fn config_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let c = parse(&[
            "curve", "--source", "detuned", "--nu-thz", "1.7", "--phi-rad", "pi/3", "--dtau", "-2:2:41", "--out", "x.csv",
        ])
        .unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(&path, c.to_config_file()).unwrap();
        let back = parse(&["--config", path.to_str().unwrap()]).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(&path, "# comment\ncommand = curve\nnu-thz = 1.0\nxi-radps = 2.0\n").unwrap();
        let c = parse(&["--config", path.to_str().unwrap(), "--nu-thz", "0.5"]).unwrap();
        assert_eq!(c.command, Command::Curve);
        assert_eq!(c.nu_thz, 0.5);
        assert_eq!(c.xi_radps, 2.0);
        let c = parse(&["matrix", "--config", path.to_str().unwrap()]).unwrap();
        assert_eq!(c.command, Command::Matrix);
    }

    #[test]
    fn bad_config_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(&path, "nu-thz 1.0\n").unwrap();
        assert!(matches!(parse(&["curve", "--config", path.to_str().unwrap()]), Err(Error::Usage(_))));
    }
}
