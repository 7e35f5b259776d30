use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use markov_ci::contingency::{
    count_identities, cube_to_space, diagnostics, parse_cube_csv, reference_suite, ContingencyCube,
};
use markov_ci::fuzz::{run_fuzz, FuzzConfig};
use markov_ci::gaussian::{
    conditional_kernel_law, discretized_check, gaussian_kernels_independent, TrivariateCovariance,
    DEFAULT_TOLERANCE,
};
use markov_ci::io::{MapDocument, SpaceDocument};
use markov_ci::theorems::{classify, verify_theorem1, verify_theorem3, verify_theorem4};
use markov_ci::VerificationReport;

#[derive(Parser)]
#[command(name = "markov-ci", version, about = "Exact conditional-independence checks for finite Markov kernels")]
struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Suppress the version banner on stderr.
    #[arg(long, global = true)]
    no_banner: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify 2x2x2 contingency cubes into the triple (i, ii, iii).
    Classify(ClassifyArgs),
    /// Verify a theorem on a finite space read from JSON.
    Verify(VerifyArgs),
    /// Classify the five worked cubes and compare with their expected triples.
    PaperSuite,
    /// Run the seeded invariant sweep.
    Fuzz(FuzzArgs),
    /// Conditional-kernel law and independence verdict for a trivariate normal.
    Gaussian(GaussianArgs),
    /// Prevalence, sensitivities and specificities of a cube.
    Diagnostics(CountsArg),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct ClassifyArgs {
    /// Eight counts n000,n001,...,n111.
    #[arg(long)]
    counts: Option<String>,
    /// CSV file with one cube per line.
    #[arg(long)]
    batch: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_parser = ["1", "3", "4"])]
    theorem: String,
    /// Map on the codomain of X3 (theorem 4 only).
    #[arg(long)]
    f: Option<PathBuf>,
}

#[derive(Args)]
struct FuzzArgs {
    /// Print a short text summary instead of the JSON report.
    #[arg(long)]
    summary: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 12)]
    max_states: usize,
    #[arg(long, default_value_t = 3)]
    max_codomain: usize,
    #[arg(long, default_value_t = 24)]
    weight_bound: u64,
}

#[derive(Args)]
struct GaussianArgs {
    /// Upper triangle s11,s12,s13,s22,s23,s33.
    #[arg(long)]
    cov: String,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tol: f64,
    /// Also run the discretized exact check on an odd grid of this size.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long, default_value_t = 4.0, requires = "grid")]
    extent: f64,
}

#[derive(Args)]
struct CountsArg {
    #[arg(long)]
    counts: String,
}

/// Malformed input, reported with the offending field and exit code 2.
struct InputError(String);

fn field<E: std::fmt::Display>(name: &str) -> impl Fn(E) -> InputError + '_ {
    move |e| InputError(format!("{name}: {e}"))
}

type Outcome = Result<bool, InputError>;

fn emit(json_mode: bool, value: Value, text: impl FnOnce() -> String) {
    if json_mode {
        println!("{}", serde_json::to_string_pretty(&value).expect("serializable"));
    } else {
        println!("{}", text());
    }
}

fn parse_counts(text: &str) -> Result<ContingencyCube, InputError> {
    text.parse().map_err(field("--counts"))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, name: &str) -> Result<T, InputError> {
    let text = fs::read_to_string(path).map_err(field(name))?;
    serde_json::from_str(&text).map_err(field(name))
}

fn classify_cube(cube: &ContingencyCube) -> Result<markov_ci::PropositionTriple, InputError> {
    let (space, x1, x2, x3) = cube_to_space(cube).map_err(field("--counts"))?;
    classify(&space, &x1, &x2, &x3).map_err(field("--counts"))
}

fn cmd_classify(args: &ClassifyArgs, json_mode: bool) -> Outcome {
    let cubes = match (&args.counts, &args.batch) {
        (Some(c), _) => vec![parse_counts(c)?],
        (None, Some(path)) => {
            let text = fs::read_to_string(path).map_err(field("--batch"))?;
            parse_cube_csv(&text).map_err(field("--batch"))?
        }
        (None, None) => unreachable!("clap enforces one of --counts, --batch"),
    };
    let mut rows = Vec::with_capacity(cubes.len());
    for cube in &cubes {
        let triple = classify_cube(cube)?;
        let counted = count_identities(cube).map_err(field("--counts"))?;
        debug_assert_eq!(counted.triple, triple);
        rows.push((cube, triple));
    }
    let value = if args.counts.is_some() {
        json!(rows[0].1)
    } else {
        json!(rows
            .iter()
            .map(|(c, t)| json!({"cube": c, "triple": t}))
            .collect::<Vec<_>>())
    };
    emit(json_mode, value, || {
        if args.counts.is_some() {
            rows[0].1.to_string()
        } else {
            rows.iter()
                .map(|(c, t)| format!("{c} {t}"))
                .collect::<Vec<_>>()
                .join("\n")
        }
    });
    Ok(true)
}

fn print_report(report: &VerificationReport, json_mode: bool) {
    emit(json_mode, json!(report), || {
        let mut out = format!("{}\ntheorem holds: {}", report.triple, report.theorem_holds);
        if let Some(agrees) = report.representation_agrees {
            out.push_str(&format!("\nrepresentation agrees: {agrees}"));
        }
        if let Some(w) = &report.witness {
            out.push_str(&format!(
                "\nwitness: {} at ({}): {} != {}",
                w.identity,
                w.cell.join(", "),
                w.lhs,
                w.rhs
            ));
        }
        out
    });
}

fn cmd_verify(args: &VerifyArgs, json_mode: bool) -> Outcome {
    let doc: SpaceDocument = read_json(&args.input, "--input")?;
    let input = field("--input");
    let report = match args.theorem.as_str() {
        "3" => verify_theorem3(&doc.kernel_triple().map_err(&input)?).map_err(&input)?,
        t => {
            let space = doc.space().map_err(&input)?;
            let x1 = doc.rv("X1").map_err(&input)?;
            let x2 = doc.rv("X2").map_err(&input)?;
            let x3 = doc.rv("X3").map_err(&input)?;
            if t == "1" {
                verify_theorem1(&space, &x1, &x2, &x3).map_err(&input)?
            } else {
                let path = args
                    .f
                    .as_ref()
                    .ok_or_else(|| InputError("--f: required for theorem 4".into()))?;
                let f = read_json::<MapDocument>(path, "--f")?
                    .to_value_map()
                    .map_err(field("--f"))?;
                verify_theorem4(&space, &x1, &x2, &x3, &f).map_err(field("--f"))?
            }
        }
    };
    print_report(&report, json_mode);
    Ok(report.theorem_holds && report.representation_agrees != Some(false))
}

fn cmd_suite(json_mode: bool) -> Outcome {
    let table = reference_suite().expect("built-in cubes are valid");
    emit(json_mode, json!(table), || table.to_string());
    Ok(table.all_match())
}

fn cmd_fuzz(args: &FuzzArgs, json_mode: bool) -> Outcome {
    let config = FuzzConfig {
        seed: args.seed,
        trials: args.trials,
        max_states: args.max_states,
        max_codomain: args.max_codomain,
        weight_denominator_bound: args.weight_bound,
    };
    let report = run_fuzz(&config).map_err(field("fuzz"))?;
    emit(json_mode, json!(report), || {
        let mut out = format!(
            "trials: {}\nviolations: {}",
            report.trials_run,
            report.violations.len()
        );
        for v in report.violations.iter().take(20) {
            out.push_str(&format!("\n  trial {} {} {}", v.trial, v.check, v.detail));
        }
        out.push_str("\npatterns:");
        for (k, n) in &report.pattern_census {
            out.push_str(&format!("\n  {k:<12} {n}"));
        }
        out
    });
    Ok(report.passed())
}

fn cmd_gaussian(args: &GaussianArgs, json_mode: bool) -> Outcome {
    let parts: Vec<f64> = args
        .cov
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(field("--cov"))?;
    let upper: [f64; 6] = parts.try_into().map_err(|p: Vec<f64>| {
        InputError(format!("--cov: expected 6 entries s11,s12,s13,s22,s23,s33, got {}", p.len()))
    })?;
    let cov = TrivariateCovariance::from_upper(upper).map_err(field("--cov"))?;
    let law = conditional_kernel_law(&cov);
    let independent = gaussian_kernels_independent(&cov, args.tol).map_err(field("--tol"))?;
    let discrepancy = args
        .grid
        .map(|n| discretized_check(&cov, n, args.extent).map_err(field("--grid")))
        .transpose()?;
    let mut value = json!({"law": law, "independent": independent});
    if let Some(d) = discrepancy {
        value["discretized_discrepancy"] = json!(d);
    }
    emit(json_mode, value, || {
        let mut out = format!(
            "mean slope: {}\nvariance: {}\nindependent: {independent}",
            law.mean_slope, law.variance
        );
        if let Some(d) = discrepancy {
            out.push_str(&format!("\ndiscretized discrepancy: {d:e}"));
        }
        out
    });
    Ok(true)
}

fn cmd_diagnostics(args: &CountsArg, json_mode: bool) -> Outcome {
    let cube = parse_counts(&args.counts)?;
    let d = diagnostics(&cube).map_err(field("--counts"))?;
    emit(json_mode, json!(d), || {
        format!(
            "prevalence: {}\nsensitivity_1: {}\nsensitivity_2: {}\nspecificity_1: {}\nspecificity_2: {}",
            d.prevalence, d.sensitivity_1, d.sensitivity_2, d.specificity_1, d.specificity_2
        )
    });
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if !cli.no_banner {
        eprintln!("markov-ci {}", env!("CARGO_PKG_VERSION"));
    }
    let outcome = match &cli.command {
        Command::Classify(a) => cmd_classify(a, cli.json),
        Command::Verify(a) => cmd_verify(a, cli.json),
        Command::PaperSuite => cmd_suite(cli.json),
        Command::Fuzz(a) => cmd_fuzz(a, cli.json || !a.summary),
        Command::Gaussian(a) => cmd_gaussian(a, cli.json),
        Command::Diagnostics(a) => cmd_diagnostics(a, cli.json),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(InputError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
