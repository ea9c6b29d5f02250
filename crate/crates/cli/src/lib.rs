//! `qsc`: command-line front end for qsc-core.
//!
//! Exit codes: 0 success or feasible, 2 malformed input, 3 infeasible or a
//! failed check, 4 boundary verdict, 1 numerical failure.

pub mod io;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use qsc_core::channels::{is_channel, random_channel_with, Channel};
use qsc_core::divergences::diamond_distance;
use qsc_core::entropies::{ecme, guess_probability_sdp, h_min_cond, h_min_ext, BipartiteChannel};
use qsc_core::majorization::{gibbs_majorize, majorize_direct, ChannelFamily, MajorizationCertificate, Verdict};
use qsc_core::random::{random_density, SeedStream};
use qsc_core::supermaps::{
    is_completely_uniformity_preserving, is_completely_unital_preserving, is_doubly_stochastic, is_superchannel,
    random_superchannel, realize, DimSpec, PropertyReport,
};

use io::{InputError, StateInput};

#[derive(Parser, Debug)]
#[command(name = "qsc", version, about = "Superchannels, extended min-entropies and channel majorization")]
pub struct Cli {
    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    pub json: bool,
    /// Seed for instance generation.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Numerical tolerance, in (0, 1e-2].
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub tol: f64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check complete positivity and trace preservation of a channel.
    CheckChannel { file: PathBuf },
    /// Check superchannel properties.
    CheckSuperchannel {
        file: PathBuf,
        #[arg(long, value_enum)]
        property: Option<Property>,
    },
    /// Extended min-entropy of a channel.
    HminExt { file: PathBuf },
    /// H_min(B|A) of a state with `dims: [dA, dB]`.
    HminCond { file: PathBuf },
    /// Extended conditional min-entropy H^ext(B|A) of a bipartite channel.
    Ecme { file: PathBuf },
    /// Guessing probability of a bipartite channel with classical B legs.
    Guess { file: PathBuf },
    /// Diamond distance between two channels.
    Diamond { a: PathBuf, b: PathBuf },
    /// Decide whether a superchannel maps every source channel to its target.
    Majorize {
        #[arg(long)]
        from: PathBuf,
        #[arg(long)]
        to: PathBuf,
        #[arg(long, requires = "gibbs_out")]
        gibbs_in: Option<PathBuf>,
        #[arg(long, requires = "gibbs_in")]
        gibbs_out: Option<PathBuf>,
        /// Write the full certificate as JSON.
        #[arg(long)]
        certificate: Option<PathBuf>,
    },
    /// Pre- and post-processing realizing a superchannel.
    Realize { file: PathBuf },
    /// Seeded random instance, written as JSON.
    Gen {
        #[arg(value_enum)]
        kind: GenKind,
        /// Leg dimensions: d_in,d_out for channels and families, four legs for
        /// superchannels and bipartite channels, subsystems for states. All
        /// legs are 2 by default.
        #[arg(long, value_delimiter = ',')]
        dims: Vec<usize>,
        /// Number of family members.
        #[arg(long, default_value_t = 2)]
        count: usize,
        /// Kraus rank, or environment dimension for superchannels.
        #[arg(long, default_value_t = 2)]
        rank: usize,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Property {
    Sc,
    Ds,
    Cup,
    Cucp,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenKind {
    Channel,
    Superchannel,
    Family,
    Bipartite,
    State,
}

/// Options shared by every subcommand.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub tol: f64,
    pub seed: u64,
    pub json: bool,
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Result<Self, InputError> {
        if !(cli.tol > 0.0 && cli.tol <= 1e-2) {
            return Err(InputError(format!("--tol {} outside (0, 1e-2]", cli.tol)));
        }
        Ok(RunConfig { tol: cli.tol, seed: cli.seed, json: cli.json })
    }
}

enum Failure {
    Input(String),
    Numerical(String),
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        Failure::Input(e.0)
    }
}

fn numerical(e: impl std::fmt::Display) -> Failure {
    Failure::Numerical(e.to_string())
}

/// Output of one subcommand: human text, JSON, and exit code.
struct Report {
    text: String,
    value: Value,
    code: i32,
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {}", path.display(), e)))
}

fn load<T>(path: &Path, parse: fn(&str) -> Result<T, InputError>) -> Result<T, Failure> {
    let text = read(path)?;
    parse(&text).map_err(|e| Failure::Input(format!("{}: {}", path.display(), e)))
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn report_json(r: &PropertyReport) -> Value {
    json!({
        "holds": r.holds,
        "violations": r.violations.iter().map(|v| json!({"condition": v.condition, "residual": v.residual})).collect::<Vec<_>>(),
    })
}

/// Parse `argv` (including the program name), run, print, and return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let cfg = match RunConfig::from_cli(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}", e);
            return 2;
        }
    };
    match execute(&cli.command, &cfg) {
        Ok(r) => {
            let out = if cfg.json { serde_json::to_string_pretty(&r.value).expect("serializable") } else { r.text };
            // a closed pipe downstream is not an error of ours
            let _ = writeln!(std::io::stdout().lock(), "{}", out);
            r.code
        }
        Err(Failure::Input(m)) => {
            eprintln!("error: {}", m);
            2
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("numerical failure: {}", m);
            1
        }
    }
}

fn execute(cmd: &Command, cfg: &RunConfig) -> Result<Report, Failure> {
    match cmd {
        Command::CheckChannel { file } => {
            let c = load(file, io::parse_channel_json)?;
            let v = is_channel(&c, cfg.tol);
            Ok(Report {
                text: format!("cp: {}; tp: {}", yes(v.cp), yes(v.tp)),
                value: json!({"cp": v.cp, "tp": v.tp}),
                code: if v.cptp() { 0 } else { 3 },
            })
        }
        Command::CheckSuperchannel { file, property } => {
            let s = load(file, io::parse_superchannel_json)?;
            let wanted: Vec<Property> = match property {
                Some(p) => vec![*p],
                None => vec![Property::Sc, Property::Ds, Property::Cup],
            };
            let mut parts = Vec::new();
            let mut details = Vec::new();
            let mut obj = serde_json::Map::new();
            let mut all = true;
            for p in wanted {
                let (name, r) = match p {
                    Property::Sc => ("superchannel", is_superchannel(&s, cfg.tol)),
                    Property::Ds => ("ds", is_doubly_stochastic(&s, cfg.tol)),
                    Property::Cup => ("cup", is_completely_uniformity_preserving(&s, cfg.tol)),
                    Property::Cucp => ("cucp", is_completely_unital_preserving(&s, cfg.tol)),
                };
                all &= r.holds;
                parts.push(format!("{}: {}", name, yes(r.holds)));
                for v in &r.violations {
                    details.push(format!("  {}: {} (residual {:.3e})", name, v.condition, v.residual));
                }
                obj.insert(name.to_string(), report_json(&r));
            }
            let mut text = parts.join("; ");
            for d in details {
                text.push('\n');
                text.push_str(&d);
            }
            Ok(Report { text, value: Value::Object(obj), code: if all { 0 } else { 3 } })
        }
        Command::HminExt { file } => {
            let c = load(file, io::parse_channel_json)?;
            let v = h_min_ext(&c).map_err(numerical)?;
            Ok(Report { text: format!("hmin-ext: {:.9}", v), value: json!({"value": v}), code: 0 })
        }
        Command::HminCond { file } => {
            let s: StateInput = load(file, io::parse_state_json)?;
            let dims = match s.dims.as_deref() {
                Some([a, b]) => (*a, *b),
                _ => return Err(Failure::Input(format!("{}: field `dims`: expected [dA, dB]", file.display()))),
            };
            let h = h_min_cond(&s.state, dims.0, dims.1).map_err(numerical)?;
            Ok(Report {
                text: format!("hmin-cond: {:.9}", h.value),
                value: json!({"value": h.value, "dual_value": h.dual_value, "sigma": io::matrix_value(&h.sigma)}),
                code: 0,
            })
        }
        Command::Ecme { file } => {
            let b = load(file, io::parse_bipartite_json)?;
            let e = ecme(&b).map_err(numerical)?;
            Ok(Report {
                text: format!("ecme: {:.9}\ndual: {:.9}\ngap: {:.3e}", e.value, e.dual_value, e.gap()),
                value: json!({
                    "value": e.value,
                    "dual_value": e.dual_value,
                    "gamma": io::matrix_value(&e.gamma),
                    "superchannel": io::superchannel_value(&e.alpha),
                }),
                code: 0,
            })
        }
        Command::Guess { file } => {
            let b: BipartiteChannel = load(file, io::parse_bipartite_json)?;
            let p = guess_probability_sdp(&b).map_err(|e| Failure::Input(e.to_string()))?;
            Ok(Report { text: format!("guess: {:.9}", p), value: json!({"value": p}), code: 0 })
        }
        Command::Diamond { a, b } => {
            let f: Channel = load(a, io::parse_channel_json)?;
            let g: Channel = load(b, io::parse_channel_json)?;
            if f.d_in != g.d_in || f.d_out != g.d_out {
                return Err(Failure::Input(format!(
                    "channels are {}→{} and {}→{}",
                    f.d_in, f.d_out, g.d_in, g.d_out
                )));
            }
            let r = diamond_distance(&f, &g).map_err(numerical)?;
            let rho = &r.input_state;
            let mut text = format!("diamond: {:.9}\ninput state (reference marginal):", r.value);
            for i in 0..rho.rows {
                text.push_str("\n ");
                for j in 0..rho.cols {
                    let z = rho[(i, j)];
                    text.push_str(&format!(" {:+.6}{:+.6}i", z.re, z.im));
                }
            }
            Ok(Report { text, value: json!({"value": r.value, "input_state": io::matrix_value(rho)}), code: 0 })
        }
        Command::Majorize { from, to, gibbs_in, gibbs_out, certificate } => {
            let src: ChannelFamily = load(from, io::parse_family_json)?;
            let dst: ChannelFamily = load(to, io::parse_family_json)?;
            if src.len() != dst.len() {
                return Err(Failure::Input(format!("families have {} and {} members", src.len(), dst.len())));
            }
            let cert = match (gibbs_in, gibbs_out) {
                (Some(gi), Some(go)) => {
                    let gi = load(gi, io::parse_state_json)?.state;
                    let go = load(go, io::parse_state_json)?.state;
                    gibbs_majorize(&src, &dst, &gi, &go, cfg.tol)
                }
                _ => majorize_direct(&src, &dst, cfg.tol),
            }
            .map_err(|e| match e {
                qsc_core::majorization::MajorizationError::Solver(m) => Failure::Numerical(m),
                other => Failure::Input(other.to_string()),
            })?;
            let value = certificate_value(&cert);
            if let Some(path) = certificate {
                let text = serde_json::to_string_pretty(&value).expect("serializable");
                fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {}", path.display(), e)))?;
            }
            Ok(Report { text: certificate_text(&cert), value, code: cert.verdict.exit_code() })
        }
        Command::Realize { file } => {
            let s = load(file, io::parse_superchannel_json)?;
            let r = realize(&s).map_err(|e| Failure::Input(e.to_string()))?;
            let value = io::realization_value(&r);
            let text = format!(
                "d_E: {}\npre: {}→{}\npost: {}→{}\n{}",
                r.d_e,
                r.pre.d_in,
                r.pre.d_out,
                r.post.d_in,
                r.post.d_out,
                serde_json::to_string_pretty(&value).expect("serializable")
            );
            Ok(Report { text, value, code: 0 })
        }
        Command::Gen { kind, dims, count, rank } => {
            let dims = if dims.is_empty() { default_dims(*kind) } else { dims.clone() };
            let value = generate(*kind, &dims, *count, *rank, cfg.seed)?;
            let text = serde_json::to_string_pretty(&value).expect("serializable");
            Ok(Report { text, value, code: 0 })
        }
    }
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Feasible => "feasible",
        Verdict::Infeasible => "infeasible",
        Verdict::Boundary => "boundary",
    }
}

fn certificate_value(c: &MajorizationCertificate) -> Value {
    json!({
        "verdict": verdict_name(c.verdict),
        "slack": c.slack,
        "residual": c.residual,
        "superchannel": c.superchannel.as_ref().map(io::superchannel_value),
        "witness": c.witness.as_ref().map(|w| json!({
            "h_source": w.h_source,
            "h_target": w.h_target,
            "margin": w.margin,
            "repair": w.repair,
            "lambda": w.lambda.iter().map(|g| g.iter().map(io::matrix_value).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })),
    })
}

fn certificate_text(c: &MajorizationCertificate) -> String {
    let mut t = format!("verdict: {}\nslack: {:.9}", verdict_name(c.verdict), c.slack);
    if let Some(r) = c.residual {
        t.push_str(&format!("\nresidual: {:.3e}", r));
    }
    if let Some(w) = &c.witness {
        t.push_str(&format!(
            "\nwitness: H^ext(B|A) = {:.9} > H^ext(B|B~) = {:.9} (margin {:.3e}, repair {:.3e})",
            w.h_source, w.h_target, w.margin, w.repair
        ));
    }
    t
}

fn default_dims(kind: GenKind) -> Vec<usize> {
    match kind {
        GenKind::Superchannel | GenKind::Bipartite => vec![2; 4],
        GenKind::Channel | GenKind::Family | GenKind::State => vec![2; 2],
    }
}

fn dims4(dims: &[usize]) -> Result<DimSpec, Failure> {
    match dims {
        [a0, a1, b0, b1] if dims.iter().all(|&d| d > 0) => Ok(DimSpec::new(*a0, *a1, *b0, *b1)),
        _ => Err(Failure::Input(format!("--dims must list four positive legs, got {:?}", dims))),
    }
}

fn dims2(dims: &[usize]) -> Result<(usize, usize), Failure> {
    match dims {
        [a, b] if *a > 0 && *b > 0 => Ok((*a, *b)),
        _ => Err(Failure::Input(format!("--dims must list d_in,d_out, got {:?}", dims))),
    }
}

/// Random instance of the requested kind. Every draw comes from one
/// counted seed stream, so equal seeds give identical output.
pub fn generate_json(kind: GenKind, dims: &[usize], count: usize, rank: usize, seed: u64) -> Result<Value, String> {
    generate(kind, dims, count, rank, seed).map_err(|e| match e {
        Failure::Input(m) | Failure::Numerical(m) => m,
    })
}

fn generate(kind: GenKind, dims: &[usize], count: usize, rank: usize, seed: u64) -> Result<Value, Failure> {
    let mut stream = SeedStream::new(seed);
    let bad = |e: &dyn std::fmt::Display| Failure::Input(e.to_string());
    let rank = rank.max(1);
    let text = match kind {
        GenKind::Channel => {
            let (a, b) = dims2(dims)?;
            let c = random_channel_with(a, b, rank, &mut stream.next_rng()).map_err(|e| bad(&e))?;
            io::emit_channel_json(&c)
        }
        GenKind::Family => {
            let (a, b) = dims2(dims)?;
            let channels = (0..count)
                .map(|_| random_channel_with(a, b, rank, &mut stream.next_rng()))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| bad(&e))?;
            let fam = ChannelFamily::new(a, b, channels).map_err(|e| bad(&e))?;
            io::emit_family_json(&fam)
        }
        GenKind::Superchannel => {
            let d = dims4(dims)?;
            let s = random_superchannel(d, rank, &mut stream.next_rng()).map_err(|e| bad(&e))?;
            io::emit_superchannel_json(&s)
        }
        GenKind::Bipartite => {
            let d = dims4(dims)?;
            let c = random_channel_with(d.a0 * d.b0, d.a1 * d.b1, rank, &mut stream.next_rng()).map_err(|e| bad(&e))?;
            let b = BipartiteChannel::from_channel(&c, d).map_err(|e| bad(&e))?;
            io::emit_bipartite_json(&b)
        }
        GenKind::State => {
            let n: usize = dims.iter().product();
            if n == 0 {
                return Err(Failure::Input("--dims must be positive".into()));
            }
            let rho = random_density(n, rank.min(n), &mut stream.next_rng());
            io::emit_state_json(&StateInput { dims: Some(dims.to_vec()), state: rho })
        }
    };
    Ok(serde_json::from_str(&text).expect("emitted JSON parses"))
}
