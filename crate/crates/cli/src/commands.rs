use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use psum_core::format::{
    classification_to_json, distribution_to_json, operator_to_json, read_distribution,
    read_weights, spectral_report_to_json, to_canonical_string, trace_csv, weights_to_json,
};
use psum_core::{
    analyze, build_operator, classify, derive_fixed_point_weights, hypergeometric,
    inverse_hypergeometric, limit_distribution, Backend, Error, HypergeomParams,
    InvHypergeomParams, ProbabilityMatrix, Rational, Scalar, WeightFunction,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::{ClassifyArgs, Cli, Command, Family};

pub const EXIT_INVALID: u8 = 2;
pub const EXIT_UNDEFINED: u8 = 3;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn invalid(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INVALID,
            message: message.into(),
        }
    }

    fn core(context: &str, err: &Error) -> Self {
        let code = match err {
            Error::DegenerateSum { .. }
            | Error::NotApplicable(_)
            | Error::SignedLimit { .. }
            | Error::ZeroImage { .. } => EXIT_UNDEFINED,
            _ => EXIT_INVALID,
        };
        let message = if context.is_empty() {
            err.to_string()
        } else {
            format!("{context}: {err}")
        };
        Self { code, message }
    }
}

type CmdResult<T = ()> = Result<T, Failure>;

fn read_text(flag: &str, path: &Path) -> CmdResult<String> {
    fs::read_to_string(path)
        .map_err(|e| Failure::invalid(format!("{flag} {}: {e}", path.display())))
}

fn load_distribution<T: Scalar>(path: &Path) -> CmdResult<ProbabilityMatrix<T>> {
    read_distribution(&read_text("--dist", path)?)
        .map_err(|e| Failure::core(&format!("--dist {}", path.display()), &e))
}

fn load_weights<T: Scalar>(path: &Path) -> CmdResult<WeightFunction<T>> {
    read_weights(&read_text("--g", path)?)
        .map_err(|e| Failure::core(&format!("--g {}", path.display()), &e))
}

fn write_file(path: &Path, text: &str) -> CmdResult {
    fs::write(path, text).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

fn emit(cli: &Cli, text: &str) -> CmdResult {
    match &cli.out {
        Some(path) => write_file(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn check_budget(cli: &Cli) -> CmdResult {
    if cli.tol.is_nan() || cli.tol <= 0.0 {
        return Err(Failure::invalid(format!(
            "--tol must be positive, got {}",
            cli.tol
        )));
    }
    if cli.max_iter == 0 {
        return Err(Failure::invalid("--max-iter must be at least 1"));
    }
    Ok(())
}

pub fn run(cli: &Cli) -> CmdResult {
    match cli.backend {
        Backend::Exact => run_with::<Rational>(cli),
        Backend::Float => run_with::<f64>(cli),
    }
}

fn run_with<T: Scalar>(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::Generate(family) => generate::<T>(cli, family),
        Command::Iterate {
            dist,
            g,
            k,
            out_dir,
            trace_out,
        } => iterate::<T>(cli, dist, g, *k, out_dir.as_deref(), trace_out.as_deref()),
        Command::Limit { g, dump_operator } => limit::<T>(cli, g, dump_operator.as_deref()),
        Command::Classify(args) => classify_cmd::<T>(cli, args),
        Command::DeriveG { dist } => {
            let target = load_distribution::<T>(dist)?;
            let g = derive_fixed_point_weights(&target).map_err(|e| Failure::core("--dist", &e))?;
            emit(cli, &to_canonical_string(&weights_to_json(&g)))
        }
        Command::Analyze { g, dump_operator } => {
            let g = load_weights::<T>(g)?;
            let op = build_operator(&g);
            if let Some(path) = dump_operator {
                write_file(path, &to_canonical_string(&operator_to_json(&op)))?;
            }
            emit(
                cli,
                &to_canonical_string(&spectral_report_to_json(&analyze(&op))),
            )
        }
    }
}

fn generate<T: Scalar>(cli: &Cli, family: &Family) -> CmdResult {
    let pm = match *family {
        Family::InvHypergeom { n1, n2, n3, k } => {
            InvHypergeomParams::new(n1, n2, n3, k).and_then(inverse_hypergeometric)
        }
        Family::Hypergeom { n1, n2, n3, sample } => {
            HypergeomParams::new(n1, n2, n3, sample).and_then(hypergeometric)
        }
    }
    .map_err(|e| Failure::core("", &e))?;
    let pm: ProbabilityMatrix<T> = pm.cast().map_err(|e| Failure::core("", &e))?;
    emit(cli, &to_canonical_string(&distribution_to_json(&pm)))
}

fn iterate<T: Scalar>(
    cli: &Cli,
    dist: &Path,
    g: &Path,
    k: usize,
    out_dir: Option<&Path>,
    trace_out: Option<&Path>,
) -> CmdResult {
    let parent = load_distribution::<T>(dist)?;
    let g = load_weights::<T>(g)?;
    let outcomes = psum_core::iterate(&parent, &g, k).map_err(|e| Failure::core("--g", &e))?;
    let mut generations = vec![parent.grid().clone()];
    for (j, out) in outcomes.into_iter().enumerate() {
        if out.signed {
            eprintln!("warning: generation {} has negative entries", j + 1);
        }
        generations.push(out.descendant);
    }
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir)
            .map_err(|e| Failure::invalid(format!("--out-dir {}: {e}", dir.display())))?;
        for (j, grid) in generations.iter().enumerate().skip(1) {
            let path: PathBuf = dir.join(format!("generation_{j}.json"));
            write_file(
                &path,
                &to_canonical_string(&psum_core::format::grid_to_json(grid)),
            )?;
        }
    }
    if let Some(path) = trace_out {
        write_file(path, &trace_csv(&generations))?;
    }
    let last = generations.last().expect("generation 0 is always present");
    emit(
        cli,
        &to_canonical_string(&psum_core::format::grid_to_json(last)),
    )
}

fn limit<T: Scalar>(cli: &Cli, g: &Path, dump_operator: Option<&Path>) -> CmdResult {
    let g = load_weights::<T>(g)?;
    let op = build_operator(&g);
    if let Some(path) = dump_operator {
        write_file(path, &to_canonical_string(&operator_to_json(&op)))?;
    }
    match limit_distribution(&op) {
        Ok(limit) => {
            let limit: ProbabilityMatrix<T> = limit.cast().map_err(|e| Failure::core("", &e))?;
            emit(cli, &to_canonical_string(&distribution_to_json(&limit)))
        }
        Err(err) => {
            let kind = match err {
                Error::SignedLimit { .. } => "SignedLimit",
                _ => "NotApplicable",
            };
            let report = json!({
                "status": kind,
                "reason": err.to_string(),
                "spectral": spectral_report_to_json(&analyze(&op)),
            });
            emit(cli, &to_canonical_string(&report))?;
            Err(Failure::core("", &err))
        }
    }
}

fn classify_one<T: Scalar>(
    cli: &Cli,
    dist: &Path,
    g: &Path,
) -> CmdResult<psum_core::SequenceClassification<T>> {
    let parent = load_distribution::<T>(dist)?;
    let g = load_weights::<T>(g)?;
    classify(&parent, &g, cli.tol, cli.max_iter).map_err(|e| Failure::core("--g", &e))
}

fn classify_cmd<T: Scalar>(cli: &Cli, args: &ClassifyArgs) -> CmdResult {
    check_budget(cli)?;
    if let Some(dir) = &args.batch {
        return classify_batch::<T>(cli, dir);
    }
    let (dist, g) = (
        args.dist.as_ref().expect("clap"),
        args.g.as_ref().expect("clap"),
    );
    let c = classify_one::<T>(cli, dist, g)?;
    if let Some(path) = &args.trace_out {
        write_file(path, &trace_csv(&c.generations))?;
    }
    emit(cli, &to_canonical_string(&classification_to_json(&c)))
}

/// Pairs every `NAME.dist.json` in `dir` with `NAME.g.json`.
fn classify_batch<T: Scalar>(cli: &Cli, dir: &Path) -> CmdResult {
    let entries = fs::read_dir(dir)
        .map_err(|e| Failure::invalid(format!("--batch {}: {e}", dir.display())))?;
    let mut names: Vec<String> = entries
        .filter_map(|e| e.ok())
        .filter_map(|e| {
            e.file_name()
                .to_str()
                .and_then(|n| n.strip_suffix(".dist.json"))
                .map(str::to_owned)
        })
        .collect();
    names.sort();
    if names.is_empty() {
        return Err(Failure::invalid(format!(
            "--batch {}: no *.dist.json files",
            dir.display()
        )));
    }
    let results: Vec<(String, Result<Value, Failure>)> = names
        .par_iter()
        .map(|name| {
            let dist = dir.join(format!("{name}.dist.json"));
            let g = dir.join(format!("{name}.g.json"));
            let result = classify_one::<T>(cli, &dist, &g).map(|c| classification_to_json(&c));
            (name.clone(), result)
        })
        .collect();
    let mut report = BTreeMap::new();
    let mut worst = 0u8;
    for (name, result) in results {
        let value = match result {
            Ok(v) => v,
            Err(f) => {
                worst = worst.max(f.code);
                json!({ "error": f.message, "exitCode": f.code })
            }
        };
        report.insert(name, value);
    }
    emit(cli, &to_canonical_string(&json!(report)))?;
    match worst {
        0 => Ok(()),
        code => Err(Failure {
            code,
            message: "some batch entries failed".to_string(),
        }),
    }
}
