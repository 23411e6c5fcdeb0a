//! Baseline and both debate settings on the 20-item fixture with a scripted
//! backend, then scored and compared.
//!
//!     cargo run --example classify_fixture [oracle|constant_f]

use std::path::PathBuf;

use madre::classify::{load_dataset, run_baseline, run_mad, LabelMapping, RunOptions};
use madre::cli::experiment::ExperimentConfig;
use madre::eval::report::{mcnemar_table, metrics_table};
use madre::eval::{compute_metrics, mcnemar, pair_predictions};
use madre::llm::{MockBackend, MockScript};

fn repo() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn main() -> anyhow::Result<()> {
    let script = std::env::args().nth(1).unwrap_or_else(|| "oracle".into());
    let backend = MockBackend::new(MockScript::from_toml(&std::fs::read_to_string(
        repo().join(format!("fixtures/mock/{script}.toml")),
    )?)?);
    let dataset = load_dataset(&repo().join("fixtures/requirements_20.csv"), &LabelMapping::default())?;
    let options = RunOptions::default();

    let baseline = run_baseline(&dataset, &backend, &options);
    let mut runs = vec![("Baseline".to_string(), baseline.records.clone())];
    for n in [0, 1] {
        let config = ExperimentConfig::load(&repo().join(format!("configs/mad_n{n}.cfg")))?;
        let output = run_mad(&dataset, config.debate.as_ref().unwrap(), &backend, &options)?;
        runs.push((format!("MAD (n={n})"), output.records));
    }

    let reports = runs
        .iter()
        .map(|(name, records)| Ok((name.as_str(), compute_metrics(records)?)))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let rows: Vec<_> = reports.iter().map(|(n, r)| (*n, r)).collect();
    print!("{}", metrics_table(&rows));
    println!();

    let mut comparisons = Vec::new();
    for (name, records) in &runs[1..] {
        let table = pair_predictions(records, &runs[0].1)?;
        comparisons.push((format!("{name} vs Baseline"), table, mcnemar(&table)));
    }
    let rows: Vec<_> = comparisons.iter().map(|(n, t, r)| (n.as_str(), t, r)).collect();
    print!("{}", mcnemar_table(&rows));
    Ok(())
}
