//! `qmask`: build, apply, emit, verify and bound multipartite masking schemes.
//!
//! Exit codes: 0 success, 2 masking verification failed, 3 the requested
//! input dimension exceeds `d^⌊m/2⌋`, 64 usage error. On any error nothing
//! is written to stdout and a single diagnostic line goes to stderr.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use masking_core::gates::Circuit;
use masking_core::masker::{self, build_scheme, mask, MaskingScheme};
use masking_core::tensor::{distance_to_maximally_mixed, marginal};
use masking_core::verify::{bounds_report, verify_scheme};
use masking_core::{DensityMatrix, MaskError, StateVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const EXIT_MASKING_FAILURE: u8 = 2;
const EXIT_BOUND_VIOLATION: u8 = 3;
const EXIT_USAGE: u8 = 64;

/// Inputs off unit norm by more than this are rejected unless `--renormalize`.
const NORM_TOL: f64 = 1e-9;

#[derive(Parser, Debug)]
#[command(
    name = "qmask",
    version,
    about = "Multipartite quantum information masking"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format; defaults to text for `circuit` without an input, json otherwise.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write output here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    /// Directory for `<subcommand>.<ext>` when `--output` is not given.
    #[arg(long, global = true, env = "QMASK_OUTPUT_DIR", hide_env_values = true)]
    output_dir: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the scheme C^w -> (C^d)^{⊗m} and print its images.
    Build(SchemeArgs),
    /// Mask an input state and print the output with its marginals.
    Mask {
        #[command(flatten)]
        register: Register,
        /// Expected input dimension; defaults to the number of amplitudes.
        #[arg(long)]
        w: Option<usize>,
        #[command(flatten)]
        input: InputArgs,
    },
    /// Emit the four-party masking circuit, or run a circuit file on an input.
    Circuit {
        /// Local dimension of the built-in circuit.
        #[arg(long, required_unless_present = "from")]
        d: Option<usize>,
        /// Circuit in the gate text format.
        #[arg(long)]
        from: Option<PathBuf>,
        #[command(flatten)]
        input: InputArgs,
    },
    /// Certify a scheme on all basis inputs plus seeded random inputs.
    Verify {
        /// Input dimension.
        #[arg(long, required_unless_present = "scheme")]
        w: Option<usize>,
        /// Local dimension of each party.
        #[arg(long, required_unless_present = "scheme")]
        d: Option<usize>,
        /// Number of parties.
        #[arg(long, required_unless_present = "scheme")]
        m: Option<usize>,
        /// Scheme JSON as printed by `build`, in place of --w/--d/--m.
        #[arg(long, conflicts_with_all = ["w", "d", "m"])]
        scheme: Option<PathBuf>,
        /// Random inputs checked on top of the w basis states.
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Compare d^⌊m/2⌋ with the quantum Singleton bound.
    Bounds {
        /// Local dimension of each party.
        #[arg(long)]
        d: usize,
        /// Number of parties.
        #[arg(long)]
        m: usize,
        /// Input dimensions for the minimum-party table.
        #[arg(long, value_delimiter = ',')]
        w: Vec<usize>,
    },
}

#[derive(Args, Debug)]
struct SchemeArgs {
    /// Input dimension.
    #[arg(long)]
    w: usize,
    #[command(flatten)]
    register: Register,
}

#[derive(Args, Debug)]
struct Register {
    /// Local dimension of each party.
    #[arg(long)]
    d: usize,
    /// Number of parties.
    #[arg(long)]
    m: usize,
}

#[derive(Args, Debug)]
struct InputArgs {
    /// Inline amplitudes: comma-separated entries, each `re` or `re im`.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "input")]
    amps: Option<String>,
    /// File with one amplitude per line as `re im`.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Rescale inputs that are off unit norm instead of rejecting them.
    #[arg(long)]
    renormalize: bool,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<MaskError> for Failure {
    fn from(err: MaskError) -> Self {
        let code = match err {
            MaskError::BoundViolation { .. } => EXIT_BOUND_VIOLATION,
            _ => EXIT_USAGE,
        };
        Self {
            code,
            message: err.to_string(),
        }
    }
}

/// Rendered output plus the exit code to report after writing it.
struct Outcome {
    body: String,
    code: u8,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            if matches!(
                err.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
            ) {
                print!("{err}");
                return ExitCode::SUCCESS;
            }
            let rendered = err.to_string();
            let line = rendered
                .lines()
                .take_while(|l| !l.starts_with("Usage:"))
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .collect::<Vec<_>>()
                .join(" ");
            eprintln!("qmask: {}", line.trim_start_matches("error: "));
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match run(&cli).and_then(|outcome| emit(&cli, outcome)) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("qmask: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn emit(cli: &Cli, outcome: Outcome) -> Result<u8, Failure> {
    let target = match (&cli.output, &cli.output_dir) {
        (Some(path), _) => Some(path.clone()),
        (None, Some(dir)) => {
            let ext = if outcome.body.trim_start().starts_with(['{', '[']) {
                "json"
            } else {
                "txt"
            };
            Some(dir.join(format!("{}.{ext}", subcommand_name(&cli.command))))
        }
        (None, None) => None,
    };
    match target {
        Some(path) => fs::write(&path, &outcome.body)
            .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(outcome.body.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure::usage(format!("cannot write output: {e}")))?;
        }
    }
    Ok(outcome.code)
}

fn subcommand_name(command: &Command) -> &'static str {
    match command {
        Command::Build(_) => "build",
        Command::Mask { .. } => "mask",
        Command::Circuit { .. } => "circuit",
        Command::Verify { .. } => "verify",
        Command::Bounds { .. } => "bounds",
    }
}

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    let format = cli.format;
    match &cli.command {
        Command::Build(args) => {
            let scheme = build_scheme(args.w, args.register.d, args.register.m)?;
            let body = match format.unwrap_or(Format::Json) {
                Format::Json => json_line(&scheme),
                Format::Text => scheme_text(&scheme),
            };
            Ok(Outcome { body, code: 0 })
        }
        Command::Mask { register, w, input } => {
            let (state, renormalized) = read_input(
                input.amps.as_deref(),
                input.input.as_ref(),
                input.renormalize,
            )?
            .ok_or_else(|| Failure::usage("an input state is required"))?;
            if let Some(w) = w {
                if *w != state.len() {
                    return Err(Failure::usage(format!(
                        "--w {w} does not match the {} input amplitudes",
                        state.len()
                    )));
                }
            }
            let scheme = build_scheme(state.len(), register.d, register.m)?;
            let output = mask(&scheme, &state)?;
            let report = StateReport::new(&output, renormalized)?;
            let body = match format.unwrap_or(Format::Json) {
                Format::Json => json_line(&report),
                Format::Text => report.text(&output),
            };
            Ok(Outcome { body, code: 0 })
        }
        Command::Circuit { d, from, input } => {
            let circuit = match from {
                Some(path) => {
                    let text = fs::read_to_string(path).map_err(|e| {
                        Failure::usage(format!("cannot read {}: {e}", path.display()))
                    })?;
                    Circuit::parse(&text)?
                }
                None => {
                    let d = d.expect("clap requires --d without --from");
                    if d == 2 {
                        masker::qubit4_circuit()
                    } else {
                        masker::qudit4_circuit(d)?
                    }
                }
            };
            let loaded = read_input(
                input.amps.as_deref(),
                input.input.as_ref(),
                input.renormalize,
            )?;
            match loaded {
                None => {
                    let body = match format.unwrap_or(Format::Text) {
                        Format::Text => circuit.to_text(),
                        Format::Json => json_line(&CircuitDoc::new(&circuit)),
                    };
                    Ok(Outcome { body, code: 0 })
                }
                Some((state, renormalized)) => {
                    let start = circuit_start(&circuit, &state)?;
                    let output = circuit.apply(&start)?;
                    let report = StateReport::new(&output, renormalized)?;
                    let body = match format.unwrap_or(Format::Json) {
                        Format::Json => json_line(&report),
                        Format::Text => report.text(&output),
                    };
                    Ok(Outcome { body, code: 0 })
                }
            }
        }
        Command::Verify {
            w,
            d,
            m,
            scheme,
            samples,
            seed,
        } => {
            let built = match (scheme, w, d, m) {
                (Some(path), ..) => read_scheme(path)?,
                (None, Some(w), Some(d), Some(m)) => build_scheme(*w, *d, *m)?,
                _ => return Err(Failure::usage("verify needs --w, --d and --m, or --scheme")),
            };
            let report = verify_scheme(&built, *samples, *seed)?;
            let code = if report.passed() {
                0
            } else {
                EXIT_MASKING_FAILURE
            };
            let body = match format.unwrap_or(Format::Json) {
                Format::Json => json_line(&report),
                Format::Text => {
                    let v = &report.verdict;
                    format!(
                        "scheme C^{} -> (C^{})^{}: {}\n  inputs checked: {} ({} basis + {} random, seed {})\n  \
                         max deviation from I/d per party: {:?}\n  max cross-input variation per party: {:?}\n  \
                         gram deviation: {:e}\n  maximally mixed: {}  input independent: {}  isometry: {}\n",
                        report.w,
                        report.d,
                        report.m,
                        if v.pass { "PASS" } else { "FAIL" },
                        report.n_inputs,
                        report.w,
                        report.n_samples,
                        report.seed,
                        report.per_party_max_deviation,
                        report.cross_input_max_variation,
                        report.isometry_gram_deviation,
                        v.maximally_mixed,
                        v.input_independent,
                        v.isometry,
                    )
                }
            };
            Ok(Outcome { body, code })
        }
        Command::Bounds { d, m, w } => {
            let report = bounds_report(*d, *m, w)?;
            let body = match format.unwrap_or(Format::Json) {
                Format::Json => json_line(&report),
                Format::Text => {
                    let mut out = format!(
                        "d = {}, m = {}\n  masking bound d^floor(m/2) = {}\n  singleton bound d^(m-2) = {}\n  tighter: {}\n",
                        report.d, report.m, report.masking_bound, report.singleton_bound, report.tighter
                    );
                    for row in &report.min_parties_table {
                        out.push_str(&format!(
                            "  w = {}: at least {} parties{}{}\n",
                            row.w,
                            row.min_parties,
                            if row.needs_m4 {
                                " (schemes need m >= 4)"
                            } else {
                                ""
                            },
                            if row.constructible {
                                ""
                            } else {
                                " (exceeds bound for this m)"
                            },
                        ));
                    }
                    out
                }
            };
            Ok(Outcome { body, code: 0 })
        }
    }
}

/// Input as given when it already fills the register, otherwise digit-encoded
/// onto a `[d; 4]` register with two ancillas.
fn circuit_start(circuit: &Circuit, state: &StateVector) -> Result<StateVector, Failure> {
    let dims = circuit.dims();
    let total: usize = dims.iter().product();
    if state.len() == total {
        return Ok(StateVector::new(dims.to_vec(), state.amps().to_vec())?);
    }
    let d = dims[0];
    if dims.len() == 4 && dims.iter().all(|&x| x == d) && state.len() <= d * d {
        return Ok(masker::circuit_input(state, d)?);
    }
    Err(Failure::usage(format!(
        "{} amplitudes fit neither the register {dims:?} nor its digit encoding",
        state.len()
    )))
}

fn read_input(
    inline: Option<&str>,
    path: Option<&PathBuf>,
    renormalize: bool,
) -> Result<Option<(StateVector, bool)>, Failure> {
    let amps = match (inline, path) {
        (Some(text), None) => parse_inline(text)?,
        (None, Some(path)) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
            parse_amplitude_file(&text)?
        }
        (None, None) => return Ok(None),
        (Some(_), Some(_)) => {
            return Err(Failure::usage("give either --amps or --input, not both"))
        }
    };
    let state = StateVector::from_amplitudes(amps)
        .map_err(|e| Failure::usage(format!("bad input state: {e}")))?;
    let norm = state.norm_sqr();
    if (norm - 1.0).abs() <= NORM_TOL {
        return Ok(Some((state, false)));
    }
    if !renormalize {
        return Err(Failure::usage(format!(
            "input has squared norm {norm}, expected 1 (pass --renormalize to rescale)"
        )));
    }
    eprintln!("qmask: warning: input renormalized from squared norm {norm}");
    let state = state
        .normalized()
        .map_err(|e| Failure::usage(format!("bad input state: {e}")))?;
    Ok(Some((state, true)))
}

#[derive(Deserialize)]
struct SchemeFile {
    d: usize,
    m: usize,
    images: Vec<Vec<[f64; 2]>>,
}

fn read_scheme(path: &PathBuf) -> Result<MaskingScheme, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    let file: SchemeFile = serde_json::from_str(&text)
        .map_err(|e| Failure::usage(format!("bad scheme file {}: {e}", path.display())))?;
    let images = file
        .images
        .into_iter()
        .map(|amps| {
            let amps = amps
                .into_iter()
                .map(|[re, im]| Complex64::new(re, im))
                .collect();
            StateVector::new(vec![file.d; file.m], amps)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(MaskingScheme::custom(file.d, file.m, images)?)
}

fn parse_complex(entry: &str) -> Result<Complex64, String> {
    let parts: Vec<&str> = entry.split_whitespace().collect();
    let num = |s: &str| {
        s.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| format!("bad number {s:?}"))
    };
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(format!("expected `re` or `re im`, got {entry:?}")),
    }
}

fn parse_inline(text: &str) -> Result<Vec<Complex64>, Failure> {
    text.split(',')
        .map(|entry| parse_complex(entry).map_err(|e| Failure::usage(format!("--amps: {e}"))))
        .collect()
}

/// One amplitude per line as `re im`; blank lines and `#` comments are skipped.
fn parse_amplitude_file(text: &str) -> Result<Vec<Complex64>, Failure> {
    let mut amps = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let z = parse_complex(line)
            .map_err(|e| Failure::usage(format!("amplitude file line {}: {e}", idx + 1)))?;
        amps.push(z);
    }
    Ok(amps)
}

fn json_line<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serialization is infallible");
    s.push('\n');
    s
}

fn scheme_text(scheme: &MaskingScheme) -> String {
    let mut out = format!(
        "scheme C^{} -> (C^{})^{} ({:?})\n",
        scheme.w(),
        scheme.d(),
        scheme.m(),
        scheme.provenance()
    );
    for (k, image) in scheme.images().iter().enumerate() {
        out.push_str(&format!("|{k}⟩ -> {image}\n"));
    }
    out
}

#[derive(Serialize)]
struct CircuitDoc {
    dims: Vec<usize>,
    gates: Vec<String>,
}

impl CircuitDoc {
    fn new(circuit: &Circuit) -> Self {
        Self {
            dims: circuit.dims().to_vec(),
            gates: circuit.gates().iter().map(|g| g.to_string()).collect(),
        }
    }
}

#[derive(Serialize)]
struct StateReport<'a> {
    dims: &'a [usize],
    renormalized: bool,
    state: &'a StateVector,
    marginals: Vec<DensityMatrix>,
    max_deviation_from_maximally_mixed: Vec<f64>,
}

impl<'a> StateReport<'a> {
    fn new(state: &'a StateVector, renormalized: bool) -> Result<Self, Failure> {
        let marginals = (0..state.n_parties())
            .map(|p| marginal(state, p))
            .collect::<Result<Vec<_>, _>>()?;
        let max_deviation_from_maximally_mixed =
            marginals.iter().map(distance_to_maximally_mixed).collect();
        Ok(Self {
            dims: state.dims(),
            renormalized,
            state,
            marginals,
            max_deviation_from_maximally_mixed,
        })
    }

    fn text(&self, state: &StateVector) -> String {
        let mut out = format!("state on {:?}: {state}\n", self.dims);
        for (p, dev) in self.max_deviation_from_maximally_mixed.iter().enumerate() {
            out.push_str(&format!("  party {p}: max |rho - I/d| = {dev:e}\n"));
        }
        out
    }
}
