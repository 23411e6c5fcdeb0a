#![allow(dead_code)]

use std::path::{Path, PathBuf};

use madre::classify::{load_dataset, write_predictions, Dataset, Label, LabelMapping, PredictionRecord};
use madre::llm::{MockRule, MockScript};

pub fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .canonicalize()
        .unwrap()
}

pub fn path(rel: &str) -> String {
    repo().join(rel).display().to_string()
}

pub fn fixture() -> Dataset {
    load_dataset(&repo().join("fixtures/requirements_20.csv"), &LabelMapping::default()).unwrap()
}

pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn cli(args: &[&str]) -> Output {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("madre").chain(args.iter().copied());
    let code = madre::cli::main_with(argv, &mut out, &mut err);
    Output {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

/// Mock run of a shipped config on the fixture.
pub fn mock_run(config: &str, script: &str, out: &Path) -> Output {
    cli(&[
        "run",
        "--config",
        &path(&format!("configs/{config}.cfg")),
        "--dataset",
        &path("fixtures/requirements_20.csv"),
        "--out",
        out.to_str().unwrap(),
        "--backend",
        "mock",
        "--mock-script",
        script,
        "--max-concurrency",
        "4",
    ])
}

pub fn mock_script_path(name: &str) -> String {
    path(&format!("fixtures/mock/{name}.toml"))
}

/// Every agent answers `answers[i]` for item `i`.
pub fn answering(dataset: &Dataset, answers: &[Label]) -> MockScript {
    dataset
        .items
        .iter()
        .zip(answers)
        .fold(MockScript::default(), |script, (item, label)| {
            script.rule(MockRule::reply(format!("ANSWER: {label}. CLASSIFICATION: {label}")).when_contains(&item.text))
        })
}

pub fn write_script(dir: &Path, name: &str, script: &MockScript) -> String {
    let p = dir.join(format!("{name}.toml"));
    std::fs::write(&p, script.to_toml()).unwrap();
    p.display().to_string()
}

/// Prediction rows realising a confusion matrix (F positive).
pub fn expand_confusion(tp: usize, fn_: usize, fp: usize, tn: usize) -> Vec<PredictionRecord> {
    let groups = [
        (tp, Label::F, Label::F),
        (fn_, Label::NF, Label::F),
        (fp, Label::F, Label::NF),
        (tn, Label::NF, Label::NF),
    ];
    let mut records = Vec::new();
    for (count, predicted, gold) in groups {
        for _ in 0..count {
            records.push(PredictionRecord::new(
                format!("R{:04}", records.len() + 1),
                predicted,
                gold,
            ));
        }
    }
    records
}

pub fn write_records(path: &Path, records: &[PredictionRecord]) -> String {
    write_predictions(records, std::fs::File::create(path).unwrap()).unwrap();
    path.display().to_string()
}

/// Paired runs over ids `R0001..` with exactly `a, b, c, d` outcomes;
/// the first run is the candidate.
pub fn engineered_pair(a: usize, b: usize, c: usize, d: usize) -> (Vec<PredictionRecord>, Vec<PredictionRecord>) {
    let mut cand = Vec::new();
    let mut base = Vec::new();
    for (count, cand_ok, base_ok) in [(a, true, true), (b, true, false), (c, false, true), (d, false, false)] {
        for _ in 0..count {
            let id = format!("R{:04}", cand.len() + 1);
            let pick = |ok: bool| if ok { Label::F } else { Label::NF };
            cand.push(PredictionRecord::new(id.clone(), pick(cand_ok), Label::F));
            base.push(PredictionRecord::new(id, pick(base_ok), Label::F));
        }
    }
    (cand, base)
}
