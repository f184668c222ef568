use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use exptype_core::constants::{constant_bundle, localization};
use exptype_core::norms::{galpha_norm, NormEngine};
use exptype_core::verify::{
    read_rows, run_all, run_check, summarise_records, summarise_rows, write_reports, CheckId, CheckSummary,
    Context, Prepared, RunConfig,
};
use exptype_core::Error;
use serde_json::json;

#[derive(Parser)]
#[command(name = "exptype-verify", version, about = "Check weighted-norm estimates numerically")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print geometry and constants of the configured domain as JSON.
    DomainInfo { config: PathBuf },
    /// Evaluate one norm for every configured function.
    Norm { kind: NormKind, config: PathBuf },
    /// Run one check (or `all`) and write the reports.
    Verify {
        check: String,
        config: PathBuf,
        /// Overrides `[output] dir`.
        #[arg(short, long)]
        output_dir: Option<PathBuf>,
    },
    /// Summarise reports written earlier.
    Report { dir: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum NormKind {
    Pbeta,
    Galpha,
}

enum Failure {
    Checks,
    Config(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Config(e)
    }
}

fn prepare(path: &Path) -> Result<Prepared, Failure> {
    Ok(RunConfig::load(path)?.prepare()?)
}

fn print_summary(summary: &std::collections::BTreeMap<String, CheckSummary>) -> bool {
    let mut ok = true;
    for (check, s) in summary {
        let tag = if s.failed == 0 { "PASS" } else { "FAIL" };
        ok &= s.failed == 0;
        println!(
            "{tag} {check}: {}/{} records pass, min margin {:.3e} ({})",
            s.passed,
            s.passed + s.failed,
            s.min_margin,
            s.worst
        );
    }
    ok
}

fn domain_info(path: &Path) -> Result<(), Failure> {
    let run = prepare(path)?;
    let v = &run.config.verify;
    let bundles: Vec<_> = v
        .beta
        .iter()
        .map(|&b| match constant_bundle(b, &run.domain, run.eps, v.a_abs, v.A_abs) {
            Ok(c) => json!(c),
            Err(e) => json!({ "beta": b, "error": e.to_string() }),
        })
        .collect();
    let locs: Vec<_> = v
        .alpha
        .iter()
        .map(|&a| match localization(a, &run.domain, run.eps) {
            Ok(l) => json!(l),
            Err(e) => json!({ "alpha": a, "error": e.to_string() }),
        })
        .collect();
    let info = json!({
        "domain": run.domain.label(),
        "metrics": run.domain.metrics(),
        "eps": run.eps,
        "constants": bundles,
        "localization": locs,
        "functions": run.functions.iter().map(|(id, _)| id).collect::<Vec<_>>(),
    });
    println!("{}", serde_json::to_string_pretty(&info).expect("serialisable"));
    Ok(())
}

fn norm(kind: NormKind, path: &Path) -> Result<(), Failure> {
    let run = prepare(path)?;
    let spec = run.config.quadrature;
    let engine = NormEngine::new(run.domain.clone(), spec);
    let (label, params) = match kind {
        NormKind::Pbeta => ("beta", run.config.verify.beta.clone()),
        NormKind::Galpha => ("alpha", run.config.verify.alpha.clone()),
    };
    println!("func_id\t{label}\tvalue\terror_estimate\tmeshes");
    let mut ok = true;
    for (id, f) in &run.functions {
        for &p in &params {
            let value = match kind {
                NormKind::Pbeta => engine.pbeta_norm(f, p),
                NormKind::Galpha => galpha_norm(&run.domain, f, p, &spec),
            };
            match value {
                Ok(v) => println!("{id}\t{p}\t{}\t{}\t{:?}", v.value, v.error_estimate, v.meshes),
                Err(e) => {
                    ok = false;
                    println!("{id}\t{p}\tNaN\tNaN\t{e}");
                }
            }
        }
    }
    if ok {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

fn verify(check: &str, path: &Path, output_dir: Option<PathBuf>) -> Result<(), Failure> {
    let selected = match check {
        "all" => None,
        other => Some(other.parse::<CheckId>()?),
    };
    let mut run = prepare(path)?;
    if let Some(dir) = output_dir {
        run.config.output.dir = dir;
    }
    let output = run.config.output.clone();
    let ctx = Context::new(run);
    let records = match selected {
        None => run_all(&ctx),
        Some(id) => run_check(&ctx, id),
    };
    let files = write_reports(&records, &output)?;
    for r in records.iter().filter(|r| !r.passed()) {
        println!(
            "  failed: {} {} beta={} margin={:.3e} {}",
            r.check_id, r.func_id, r.beta, r.margin, r.note
        );
    }
    let ok = print_summary(&summarise_records(&records));
    for f in files {
        println!("wrote {}", f.display());
    }
    if ok {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

fn report(dir: &Path) -> Result<(), Failure> {
    let rows = read_rows(dir)?;
    if print_summary(&summarise_rows(&rows)) {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::DomainInfo { config } => domain_info(&config),
        Command::Norm { kind, config } => norm(kind, &config),
        Command::Verify { check, config, output_dir } => verify(&check, &config, output_dir),
        Command::Report { dir } => report(&dir),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => ExitCode::from(1),
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
