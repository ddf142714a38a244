use std::path::PathBuf;

use polyrace::harness::{outcome_map, parse_manifest, run_corpus, tally, ConfusionCounts, Policy};
use polyrace::racecheck::{CheckOptions, Outcome};

fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

fn run(manifest: &str, threads: usize) -> Vec<polyrace::harness::KernelRun> {
    let text = std::fs::read_to_string(corpus_dir().join(manifest)).unwrap();
    let kernels = parse_manifest(&text).unwrap();
    run_corpus(&kernels, &corpus_dir(), CheckOptions::default(), threads).unwrap()
}

#[test]
fn every_kernel_matches_its_label() {
    let runs = run("manifest.csv", 4);
    assert!(runs.len() >= 30);
    let bad: Vec<String> = runs
        .iter()
        .filter(|r| !r.accepted)
        .map(|r| format!("{}: expected {:?}, got {}", r.kernel.path, r.kernel.expected, r.outcome))
        .collect();
    assert!(bad.is_empty(), "{bad:#?}");
}

#[test]
fn classic_subset_counts() {
    let runs = run("classic.csv", 2);
    let kernels: Vec<_> = runs.iter().map(|r| r.kernel.clone()).collect();
    let c = tally(&outcome_map(&runs), &kernels, Policy::Exclude).unwrap();
    assert_eq!(c, ConfusionCounts::new(5, 1, 3, 1));
    let fn_kernel = runs.iter().find(|r| r.kernel.expected == polyrace::harness::Label::Race && r.outcome == Outcome::RaceFree);
    assert_eq!(fn_kernel.unwrap().kernel.path, "kernels/nowait_single.c");
}

#[test]
fn thread_count_does_not_change_results() {
    let one = run("manifest.csv", 1);
    for t in [2, 8] {
        assert_eq!(run("manifest.csv", t), one);
    }
}

#[test]
fn strict_policy_counts_unanalyzable_as_negative() {
    let runs = run("manifest.csv", 4);
    let kernels: Vec<_> = runs.iter().map(|r| r.kernel.clone()).collect();
    let m = outcome_map(&runs);
    let ex = tally(&m, &kernels, Policy::Exclude).unwrap();
    let st = tally(&m, &kernels, Policy::Strict).unwrap();
    let na = runs.iter().filter(|r| r.outcome == Outcome::NotAnalyzable).count() as u64;
    assert_eq!(ex.analyzed() + na, st.analyzed());
    assert_eq!(st.analyzed(), st.total);
    assert_eq!((ex.tp, ex.fp), (st.tp, st.fp));
}

#[test]
fn missing_kernel_fails_before_analysis() {
    let kernels = parse_manifest("kernels/does_not_exist.c,race,\n").unwrap();
    assert!(run_corpus(&kernels, &corpus_dir(), CheckOptions::default(), 2).is_err());
}
