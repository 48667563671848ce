use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use permqubo::encodings::{Constraint, Construction, EncodingSpec, Instance, Solution};
use permqubo::format::{self, Ising};
use permqubo::networks::Topology;
use permqubo::oracle::oracle_solutions;
use permqubo::pbf::{Assignment, VarId};
use permqubo::perm::Permutation;
use permqubo::solve::{sample_instance, SaParams};
use permqubo::stats::instance_stats;
use permqubo::verify::{
    enum_cap, uniformity_check, zero_set_exhaustive, DomainKind, VerifyOptions,
};
use serde_json::{json, Value};

const EXIT_MISMATCH: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_CAP: u8 = 3;

#[derive(Parser)]
#[command(
    name = "permqubo",
    version,
    about = "Compile permutation constraints into QUBO instances"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an instance file.
    Build {
        /// perm, matrix or match.
        construction: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "batcher")]
        network: String,
        /// Side condition, e.g. `derangement`, `fix:1=2`, `order:3`. Repeatable.
        #[arg(long = "constraint")]
        constraints: Vec<String>,
        /// Pattern for `match`, e.g. `2,1`.
        #[arg(long)]
        pattern: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check an instance's zero set against the reference oracle.
    Verify {
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Draw simulated-annealing samples.
    Sample {
        file: PathBuf,
        #[arg(long, default_value_t = 100)]
        reads: usize,
        #[arg(long, default_value_t = 1000)]
        sweeps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.1)]
        beta_start: f64,
        #[arg(long, default_value_t = 10.0)]
        beta_end: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Size and sparsity report.
    Stats {
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write the polynomial in a solver text format.
    Export {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = ExportFormat::Qubo)]
        format: ExportFormat,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ExportFormat {
    Qubo,
    Ising,
}

/// An error carrying the process exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        let error = e.into();
        let code = match error.downcast_ref::<permqubo::Error>() {
            Some(permqubo::Error::CapExceeded { .. } | permqubo::Error::DomainTooLarge { .. }) => {
                EXIT_CAP
            }
            _ => EXIT_USAGE,
        };
        Failure { code, error }
    }
}

fn usage(error: anyhow::Error) -> Failure {
    Failure {
        code: EXIT_USAGE,
        error,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Build {
            construction,
            n,
            network,
            constraints,
            pattern,
            output,
        } => {
            let spec = parse_spec(&construction, n, &network, &constraints, pattern.as_deref())
                .map_err(usage)?;
            let instance = spec.build().context("building instance").map_err(usage)?;
            emit(output.as_deref(), &format::to_string(&instance)?)?;
            Ok(0)
        }
        Command::Verify { file, output } => {
            let instance = load(&file)?;
            let (report, pass) = verify(&instance)?;
            emit(output.as_deref(), &pretty(&report)?)?;
            Ok(if pass { 0 } else { EXIT_MISMATCH })
        }
        Command::Sample {
            file,
            reads,
            sweeps,
            seed,
            beta_start,
            beta_end,
            output,
        } => {
            let instance = load(&file)?;
            let params = SaParams {
                reads,
                sweeps,
                beta_start,
                beta_end,
                seed,
            };
            emit(output.as_deref(), &pretty(&sample(&instance, &params)?)?)?;
            Ok(0)
        }
        Command::Stats { file, output } => {
            let instance = load(&file)?;
            emit(output.as_deref(), &pretty(&stats(&instance)?)?)?;
            Ok(0)
        }
        Command::Export {
            file,
            format: fmt,
            output,
        } => {
            let instance = load(&file)?;
            let text = match fmt {
                ExportFormat::Qubo => format::to_qubo(&instance.poly, instance.num_vars()),
                ExportFormat::Ising => Ising::from_qubo(&instance.poly).to_text(),
            };
            emit(output.as_deref(), &text)?;
            Ok(0)
        }
    }
}

fn parse_spec(
    construction: &str,
    n: usize,
    network: &str,
    constraints: &[String],
    pattern: Option<&str>,
) -> Result<EncodingSpec> {
    let construction: Construction = construction.parse()?;
    let topology: Topology = network.parse()?;
    let mut spec = match construction {
        Construction::Perm => EncodingSpec::perm(n),
        Construction::Matrix => EncodingSpec::matrix(n),
        Construction::Match => {
            let Some(p) = pattern else {
                bail!("`match` needs --pattern");
            };
            EncodingSpec::pattern_match(n, p.parse::<Permutation>()?)
        }
        Construction::Raw => bail!("raw instances cannot be built"),
    }
    .with_topology(topology);
    for c in constraints {
        spec = spec.with(c.parse::<Constraint>()?);
    }
    Ok(spec)
}

fn load(path: &Path) -> Result<Instance, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(usage)?;
    format::from_str(&text)
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(usage)
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => Ok(std::io::stdout().write_all(text.as_bytes())?),
    }
}

fn pretty(v: &Value) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn solution_label(s: &Solution) -> String {
    s.iter()
        .map(|(g, p)| format!("{g}={p}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn solutions_json(solutions: &BTreeMap<Solution, usize>) -> Value {
    Value::Object(
        solutions
            .iter()
            .map(|(s, &c)| (solution_label(s), json!(c)))
            .collect(),
    )
}

/// Rebuilds the instance from its metadata, checks that the file matches,
/// and compares the zero set with the oracle. Returns the report and the
/// overall verdict.
fn verify(file: &Instance) -> Result<(Value, bool), Failure> {
    let meta = &file.meta;
    if meta.construction == Construction::Raw {
        // No construction to compare against: report the zero set only.
        let vars: Vec<VarId> = file.registry.ids().collect();
        let zs = zero_set_exhaustive(&file.poly, &vars, enum_cap())?;
        let report = json!({
            "construction": "raw",
            "variables": vars.len(),
            "minimum": zs.minimum,
            "zeros": if zs.minimum == 0 { zs.zeros.len() } else { 0 },
            "pass": zs.minimum == 0,
        });
        return Ok((report, zs.minimum == 0));
    }

    let spec = meta.spec();
    let rebuilt = spec.build().context("rebuilding from metadata")?;
    let structure = rebuilt.poly == file.poly
        && rebuilt.registry == file.registry
        && rebuilt.decode == file.decode
        && rebuilt.meta == *meta;
    let oracle = oracle_solutions(&spec).map_err(|e| Failure {
        code: EXIT_CAP,
        error: e.into(),
    })?;
    let expect_uniform = meta.construction != Construction::Match;

    let mut report = json!({
        "construction": meta.construction,
        "n": meta.n,
        "constraints": meta.constraints.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "structure": if structure { "match" } else { "mismatch" },
        "oracle": { "solutions": oracle.len(), "zeros": oracle.values().sum::<usize>() },
    });

    if !structure {
        // The file differs from what its metadata builds; fall back to the
        // file's own zero set when it is small enough to enumerate.
        let vars: Vec<VarId> = file.registry.ids().collect();
        if vars.len() <= enum_cap() {
            let zs = zero_set_exhaustive(&file.poly, &vars, enum_cap())?;
            let mut found: BTreeMap<Solution, usize> = BTreeMap::new();
            if zs.minimum == 0 {
                for z in &zs.zeros {
                    let asg = Assignment::from_pairs(vars.iter().copied().zip(z.iter().copied()));
                    if let Ok(s) = file.decode.solution(&asg) {
                        *found.entry(s).or_insert(0) += 1;
                    }
                }
            }
            report["zeros"] = json!(if zs.minimum == 0 { zs.zeros.len() } else { 0 });
            report["solutions"] = json!(found.len());
            report["oracle_match"] = json!(found == oracle);
        }
        report["pass"] = json!(false);
        return Ok((report, false));
    }

    let start = Instant::now();
    let u = uniformity_check(&rebuilt, &VerifyOptions::default())?;
    report["seconds"] = json!(start.elapsed().as_secs_f64());
    let oracle_match = u.solutions == oracle;
    let pass = oracle_match && u.uniform == expect_uniform;
    report["domain"] = json!(match u.domain {
        DomainKind::Exhaustive => "exhaustive",
        DomainKind::Permutations => "permutations",
    });
    report["points"] = json!(u.points);
    report["zeros"] = json!(u.zeros);
    report["solutions"] = json!(u.solutions.len());
    report["uniform"] = json!(u.uniform);
    report["non_uniform"] = json!(!u.uniform);
    report["oracle_match"] = json!(oracle_match);
    report["certificates"] = json!({
        "kinds": u.certificates.kinds,
        "distinct": u.certificates.distinct,
    });
    if u.solutions.len() <= 64 {
        report["decoded"] = solutions_json(&u.solutions);
    }
    report["pass"] = json!(pass);
    Ok((report, pass))
}

fn sample(instance: &Instance, params: &SaParams) -> Result<Value> {
    let meta = &instance.meta;
    let support = if meta.construction != Construction::Raw && meta.n <= 8 {
        oracle_solutions(&meta.spec()).ok().map(|o| o.len())
    } else {
        None
    };
    let (samples, stats) = sample_instance(instance, params, support)?;
    let vars: Vec<VarId> = instance.registry.ids().collect();
    let samples: Vec<Value> = samples
        .iter()
        .map(|s| {
            let bits: String = s
                .values
                .iter()
                .map(|&b| if b { '1' } else { '0' })
                .collect();
            let asg = Assignment::from_pairs(vars.iter().copied().zip(s.values.iter().copied()));
            let decoded = (s.energy == 0)
                .then(|| instance.decode.solution(&asg).ok())
                .flatten()
                .filter(|sol| !sol.is_empty())
                .map(|sol| solution_label(&sol));
            json!({ "energy": s.energy, "values": bits, "decoded": decoded })
        })
        .collect();
    Ok(json!({
        "params": {
            "reads": params.reads,
            "sweeps": params.sweeps,
            "seed": params.seed,
            "beta_start": params.beta_start,
            "beta_end": params.beta_end,
        },
        "variables": instance.num_vars(),
        "samples": samples,
        "stats": {
            "reads": stats.reads,
            "ground": stats.ground,
            "energy_histogram": stats.energy_histogram.iter().map(|(e, c)| (e.to_string(), json!(c))).collect::<serde_json::Map<_, _>>(),
            "solutions": stats.solutions,
            "support": stats.support,
            "chi_square": stats.chi_square,
        },
    }))
}

fn stats(instance: &Instance) -> Result<Value> {
    let s = instance_stats(instance);
    let mut v = serde_json::to_value(&s)?;
    if let Some(e) = s.expected {
        v["delta"] = json!({
            "vars": s.vars as i64 - e.vars as i64,
            "aux": s.aux as i64 - e.aux as i64,
            "controls": s.controls as i64 - e.controls as i64,
        });
    }
    Ok(v)
}
