//! `validate`: permutation-test a supplied ensemble/surrogate pair and
//! report per-measure agreement, optionally with the within/between
//! decomposition when the surrogate comes from a partition file.


use std::path::PathBuf;

use clap::{ArgGroup, Args};
use serde::Serialize;

use nloi::io::{read_matrix_csv, read_partition_csv, read_weights_csv};
use nloi::matrix::{NodeWeights, Partition, ProximityMatrix};
use nloi::measures::{loi_decompose, LoIDecomposition, MeasureKind, MeasureParams};
use nloi::permtest::{run_permutation_test, PermTestConfig, TestReport};

use crate::util::{write_atomic, CliError};

fn parse_measure(s: &str) -> Result<MeasureKind, String> {
    s.parse::<MeasureKind>().map_err(|e| e.to_string())
}

#[derive(Args)]
#[command(group(
    ArgGroup::new("reference").required(true).args(["surrogate", "partition"])
))]
pub struct ValidateArgs {
    /// CSV file with the fuzzy ensemble co-occurrence matrix.
    #[arg(long)]
    ensemble: PathBuf,
    /// CSV file with the surrogate co-occurrence matrix.
    #[arg(long, conflicts_with = "weights")]
    surrogate: Option<PathBuf>,
    /// CSV file with a node partition; the surrogate is its crisp
    /// co-membership matrix.
    #[arg(long)]
    partition: Option<PathBuf>,
    /// CSV file with per-block weights for the partition's crisp matrix.
    #[arg(long, requires = "partition")]
    weights: Option<PathBuf>,
    /// Comma-separated measures to run.
    #[arg(long, value_delimiter = ',', value_parser = parse_measure,
          default_values_t = MeasureKind::ALL)]
    measures: Vec<MeasureKind>,
    /// Number of random permutations.
    #[arg(long, default_value_t = 999)]
    permutations: usize,
    /// Significance level; rejection means p < alpha.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Seed for the permutation stream.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the JSON report here (text always goes to stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// SSIM window side; defaults to min(n, 8).
    #[arg(long)]
    ssim_window: Option<usize>,
    /// Weight floor for the weighted RMSE.
    #[arg(long, default_value_t = 1e-8)]
    epsilon: f64,
    /// Dataset label in the report; defaults to the ensemble file stem.
    #[arg(long)]
    label: Option<String>,
    /// Mean between-block loss below this is favorable.
    #[arg(long, default_value_t = 0.1)]
    mean_out_favorable: f64,
    /// Mean between-block loss above this is a warning.
    #[arg(long, default_value_t = 0.3)]
    mean_out_warning: f64,
    /// Mean within-block loss below this is favorable.
    #[arg(long, default_value_t = 0.01)]
    mean_in_favorable: f64,
    /// Mean within-block loss above this is a warning.
    #[arg(long, default_value_t = 0.1)]
    mean_in_warning: f64,
}

#[derive(Serialize)]
struct Thresholds {
    mean_out_favorable: f64,
    mean_out_warning: f64,
    mean_in_favorable: f64,
    mean_in_warning: f64,
}

#[derive(Serialize)]
struct DecompositionDoc {
    #[serde(flatten)]
    parts: LoIDecomposition<f64>,
    mean_in_verdict: &'static str,
    mean_out_verdict: &'static str,
    thresholds: Thresholds,
}

#[derive(Serialize)]
struct ValidationDoc<'a> {
    schema_version: u32,
    dataset: &'a str,
    #[serde(flatten)]
    report: &'a TestReport<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    decomposition: &'a Option<DecompositionDoc>,
}

fn verdict(value: Option<f64>, favorable: f64, warning: f64) -> &'static str {
    match value {
        None => "undefined",
        Some(v) if v < favorable => "favorable",
        Some(v) if v > warning => "warning",
        Some(_) => "acceptable",
    }
}

fn fmt_p(p: f64) -> String {
    if p < 0.0005 {
        "<0.001".to_string()
    } else {
        format!("{p:.3}")
    }
}

fn print_text_report(
    label: &str,
    report: &TestReport<f64>,
    decomposition: &Option<DecompositionDoc>,
    args: &ValidateArgs,
) {
    println!("Dataset: {label} (n = {})", report.n);
    println!(
        "Permutations: {}, alpha = {}, seed = {}",
        report.permutations, report.alpha, report.seed
    );
    println!();
    println!(
        "{:<10} {:<11} {:>9} {:>10} {:>8} {:>8} {:>7}",
        "Method", "Type", "Observed", "Null mean", "Null SD", "Z", "p"
    );
    for m in &report.measures {
        let z = match m.z {
            Some(z) => format!("{z:.3}"),
            None => "n/a".to_string(),
        };
        println!(
            "{:<10} {:<11} {:>9.3} {:>10.3} {:>8.3} {:>8} {:>7}",
            m.kind.label(),
            m.orientation.to_string(),
            m.observed,
            m.null_mean,
            m.null_sd,
            z,
            fmt_p(m.p)
        );
    }
    if let Some(doc) = decomposition {
        let d = &doc.parts;
        println!();
        println!("LoI decomposition:");
        println!(
            "  total {:.3} over {} pairs ({} within blocks, {} between)",
            d.loi_total,
            d.n_in + d.n_out,
            d.n_in,
            d.n_out
        );
        let fmt_mean = |v: Option<f64>| match v {
            Some(v) => format!("{v:.3}"),
            None => "n/a".to_string(),
        };
        println!(
            "  mean within-block loss  {:>7}  [{}]  (favorable < {}, warning > {})",
            fmt_mean(d.mean_in),
            doc.mean_in_verdict,
            args.mean_in_favorable,
            args.mean_in_warning
        );
        println!(
            "  mean between-block loss {:>7}  [{}]  (favorable < {}, warning > {})",
            fmt_mean(d.mean_out),
            doc.mean_out_verdict,
            args.mean_out_favorable,
            args.mean_out_warning
        );
    }
}

pub fn run(args: ValidateArgs) -> Result<(), CliError> {
    let ensemble = read_matrix_csv(&args.ensemble)?;

    let (surrogate, partition): (ProximityMatrix<f64>, Option<Partition>) =
        if let Some(path) = &args.surrogate {
            (read_matrix_csv(path)?, None)
        } else {
            let path = args.partition.as_ref().expect("clap enforces the reference group");
            let pf = read_partition_csv(path)?;
            let weights = match &args.weights {
                Some(wpath) => read_weights_csv(wpath, &pf)?,
                None => NodeWeights::unit(),
            };
            let crisp = pf
                .partition
                .to_crisp(&weights)
                .map_err(|e| CliError::Invalid(e.to_string()))?;
            (crisp, Some(pf.partition))
        };

    let mut measures = Vec::new();
    for m in &args.measures {
        if !measures.contains(m) {
            measures.push(*m);
        }
    }
    let cfg = PermTestConfig::<f64> {
        permutations: args.permutations,
        alpha: args.alpha,
        seed: args.seed,
        measures,
        params: MeasureParams { epsilon: args.epsilon, ssim_window: args.ssim_window, ..Default::default() },
        ..PermTestConfig::new(args.seed)
    };
    let report = run_permutation_test(&ensemble, &surrogate, &cfg)?;

    let decomposition = match &partition {
        Some(p) => {
            let parts = loi_decompose(&ensemble, &surrogate, p)?;
            Some(DecompositionDoc {
                mean_in_verdict: verdict(parts.mean_in, args.mean_in_favorable, args.mean_in_warning),
                mean_out_verdict: verdict(parts.mean_out, args.mean_out_favorable, args.mean_out_warning),
                thresholds: Thresholds {
                    mean_out_favorable: args.mean_out_favorable,
                    mean_out_warning: args.mean_out_warning,
                    mean_in_favorable: args.mean_in_favorable,
                    mean_in_warning: args.mean_in_warning,
                },
                parts,
            })
        }
        None => None,
    };

    let label = match &args.label {
        Some(l) => l.clone(),
        None => args
            .ensemble
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "ensemble".to_string()),
    };

    print_text_report(&label, &report, &decomposition, &args);

    if let Some(out) = &args.out {
        let doc = ValidationDoc {
            schema_version: 1,
            dataset: &label,
            report: &report,
            decomposition: &decomposition,
        };
        let json = serde_json::to_string_pretty(&doc)
            .map_err(|e| CliError::Invalid(format!("cannot serialize report: {e}")))?;
        write_atomic(out, |w| {
            w.write_all(json.as_bytes())?;
            writeln!(w)
        })?;
        println!();
        println!("Report written to {}", out.display());
    }
    Ok(())
}
