//! Labeled-corpus runner, confusion counts and classifier metrics.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use num_rational::Ratio;
use num_traits::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::frontend::{parse, FrontendError};
use crate::racecheck::{check_program, CheckOptions, Outcome, Verdict};

pub type Rational = Ratio<i64>;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("manifest line {line}: {message}")]
    Manifest { line: u64, message: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{source}")]
    Parse { path: PathBuf, source: FrontendError },
    #[error("no verdict for `{0}`")]
    MissingVerdict(String),
    #[error("{0} is undefined (zero denominator)")]
    UndefinedMetric(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Label {
    Race,
    NoRace,
}

impl Label {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "race" | "yes" => Some(Label::Race),
            "norace" | "no-race" | "no" => Some(Label::NoRace),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Race => "race",
            Label::NoRace => "norace",
        }
    }
}

pub const TAG_NOWAIT_FN: &str = "nowait-known-FN";
pub const TAG_NONAFFINE_FP: &str = "nonaffine-known-FP";
pub const TAG_UNSUPPORTED: &str = "unsupported";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LabeledKernel {
    pub path: String,
    pub expected: Label,
    pub tags: Vec<String>,
}

impl LabeledKernel {
    pub fn has_tag(&self, t: &str) -> bool {
        self.tags.iter().any(|x| x == t)
    }

    /// Whether `got` is the labeled outcome or a mismatch the tags allow.
    pub fn accepts(&self, got: Outcome) -> bool {
        match (self.expected, got) {
            (Label::Race, Outcome::RaceDetected) | (Label::NoRace, Outcome::RaceFree) => true,
            (Label::Race, Outcome::RaceFree) => self.has_tag(TAG_NOWAIT_FN),
            (Label::NoRace, Outcome::RaceDetected) => self.has_tag(TAG_NONAFFINE_FP),
            (_, Outcome::NotAnalyzable) => self.has_tag(TAG_UNSUPPORTED),
        }
    }
}

/// Reads a `path,label,tags` manifest. Tags are `;`-separated; a leading
/// `path,...` header row and `#` comment lines are skipped.
pub fn parse_manifest(text: &str) -> Result<Vec<LabeledKernel>, HarnessError> {
    let mut rd = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| HarnessError::Manifest {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |message: String| HarnessError::Manifest { line, message };
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if out.is_empty() && rec.get(0) == Some("path") {
            continue;
        }
        if rec.len() < 2 || rec.len() > 3 {
            return Err(bad(format!("expected `path,label,tags`, found {} fields", rec.len())));
        }
        let expected = Label::parse(&rec[1]).ok_or_else(|| bad(format!("unknown label `{}`", &rec[1])))?;
        let tags = rec
            .get(2)
            .unwrap_or("")
            .split(';')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(String::from)
            .collect();
        out.push(LabeledKernel { path: rec[0].to_string(), expected, tags });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
    pub fp: u64,
    /// Kernels given a verdict, including excluded ones.
    pub total: u64,
}

impl ConfusionCounts {
    /// Counts over fully analyzed kernels.
    pub fn new(tp: u64, fn_: u64, tn: u64, fp: u64) -> Self {
        ConfusionCounts { tp, fn_, tn, fp, total: tp + fn_ + tn + fp }
    }

    pub fn analyzed(&self) -> u64 {
        self.tp + self.fn_ + self.tn + self.fp
    }

    pub fn coverage(&self) -> Option<Rational> {
        ratio(self.analyzed(), self.total)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Policy {
    /// Not-analyzable kernels are left out of the counts and only lower
    /// coverage.
    #[default]
    Exclude,
    /// Not-analyzable kernels count as negative reports.
    Strict,
}

/// Kernel-level outcome: positive if any region is racy.
pub fn kernel_outcome(regions: &[Outcome]) -> Outcome {
    regions.iter().copied().max().unwrap_or(Outcome::RaceFree)
}

/// Folds per-kernel region outcomes against labels.
pub fn tally(
    verdicts: &BTreeMap<String, Vec<Outcome>>,
    labels: &[LabeledKernel],
    policy: Policy,
) -> Result<ConfusionCounts, HarnessError> {
    let mut c = ConfusionCounts::default();
    for k in labels {
        let v = verdicts.get(&k.path).ok_or_else(|| HarnessError::MissingVerdict(k.path.clone()))?;
        c.total += 1;
        let positive = match kernel_outcome(v) {
            Outcome::RaceDetected => true,
            Outcome::RaceFree => false,
            Outcome::NotAnalyzable => match policy {
                Policy::Exclude => continue,
                Policy::Strict => false,
            },
        };
        match (k.expected, positive) {
            (Label::Race, true) => c.tp += 1,
            (Label::Race, false) => c.fn_ += 1,
            (Label::NoRace, false) => c.tn += 1,
            (Label::NoRace, true) => c.fp += 1,
        }
    }
    Ok(c)
}

fn ratio(n: u64, d: u64) -> Option<Rational> {
    (d != 0).then(|| Rational::new(n as i64, d as i64))
}

fn div(a: Option<Rational>, b: Option<Rational>) -> Option<Rational> {
    match (a, b) {
        (Some(a), Some(b)) if !b.is_zero() => Some(a / b),
        _ => None,
    }
}

/// Exact metric values; `None` marks a zero denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Metrics {
    pub precision: Option<Rational>,
    pub recall: Option<Rational>,
    pub accuracy: Option<Rational>,
    pub f1: Option<Rational>,
    pub tpr: Option<Rational>,
    pub fpr: Option<Rational>,
    pub fnr: Option<Rational>,
    pub tnr: Option<Rational>,
    pub lr_plus: Option<Rational>,
    pub lr_minus: Option<Rational>,
    pub dor: Option<Rational>,
}

pub const METRIC_NAMES: [&str; 11] =
    ["precision", "recall", "accuracy", "f1", "tpr", "fpr", "fnr", "tnr", "lr_plus", "lr_minus", "dor"];

impl Metrics {
    pub fn get(&self, name: &str) -> Option<Option<Rational>> {
        Some(match name {
            "precision" => self.precision,
            "recall" => self.recall,
            "accuracy" => self.accuracy,
            "f1" => self.f1,
            "tpr" => self.tpr,
            "fpr" => self.fpr,
            "fnr" => self.fnr,
            "tnr" => self.tnr,
            "lr_plus" => self.lr_plus,
            "lr_minus" => self.lr_minus,
            "dor" => self.dor,
            _ => return None,
        })
    }

    /// The named metric, or `UndefinedMetric` if its denominator is zero.
    pub fn require(&self, name: &'static str) -> Result<Rational, HarnessError> {
        self.get(name).flatten().ok_or(HarnessError::UndefinedMetric(name))
    }
}

pub fn compute_metrics(c: &ConfusionCounts) -> Metrics {
    let pos = c.tp + c.fn_;
    let neg = c.tn + c.fp;
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = ratio(c.tp, pos);
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) if !(p + r).is_zero() => Some(Rational::from_integer(2) * p * r / (p + r)),
        _ => None,
    };
    let tpr = recall;
    let fpr = ratio(c.fp, neg);
    let fnr = ratio(c.fn_, pos);
    let tnr = ratio(c.tn, neg);
    let lr_plus = div(tpr, fpr);
    let lr_minus = div(fnr, tnr);
    Metrics {
        precision,
        recall,
        accuracy: ratio(c.tp + c.tn, pos + neg),
        f1,
        tpr,
        fpr,
        fnr,
        tnr,
        lr_plus,
        lr_minus,
        dor: div(lr_plus, lr_minus),
    }
}

/// Decimal rendering rounded half away from zero.
pub fn render(x: Rational, decimals: u32) -> String {
    let neg = x.is_negative();
    let (n, d) = (x.numer().unsigned_abs() as u128, x.denom().unsigned_abs() as u128);
    let scale = 10u128.pow(decimals);
    let q = (2 * n * scale + d) / (2 * d);
    let mut s = String::new();
    if neg && q != 0 {
        s.push('-');
    }
    write!(s, "{}", q / scale).unwrap();
    if decimals > 0 {
        write!(s, ".{:0width$}", q % scale, width = decimals as usize).unwrap();
    }
    s
}

pub fn render_opt(x: Option<Rational>, decimals: u32) -> String {
    x.map_or_else(|| "undefined".to_string(), |v| render(v, decimals))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Csv,
    Json,
}

/// A named row of a metrics table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportRow {
    pub name: String,
    pub counts: ConfusionCounts,
}

const TABLE_METRICS: [(&str, &str); 5] =
    [("precision", "Precision"), ("recall", "Recall"), ("accuracy", "Accuracy"), ("f1", "F1"), ("dor", "DOR")];

/// Renders rows as a metrics table, columns in fixed order.
pub fn report(rows: &[ReportRow], format: Format, decimals: u32) -> String {
    match format {
        Format::Text => {
            let mut header = vec!["Tool".to_string()];
            header.extend(["TP", "FN", "TN", "FP", "Coverage"].map(String::from));
            header.extend(TABLE_METRICS.iter().map(|(_, h)| h.to_string()));
            let mut cells = vec![header];
            for r in rows {
                let m = compute_metrics(&r.counts);
                let c = &r.counts;
                let mut line = vec![
                    r.name.clone(),
                    c.tp.to_string(),
                    c.fn_.to_string(),
                    c.tn.to_string(),
                    c.fp.to_string(),
                    format!("{}/{}", c.analyzed(), c.total),
                ];
                line.extend(TABLE_METRICS.iter().map(|(k, _)| render_opt(m.get(k).flatten(), decimals)));
                cells.push(line);
            }
            let widths: Vec<usize> =
                (0..cells[0].len()).map(|i| cells.iter().map(|r| r[i].len()).max().unwrap_or(0)).collect();
            let mut out = String::new();
            for row in &cells {
                let parts: Vec<String> = row
                    .iter()
                    .enumerate()
                    .map(|(i, s)| if i == 0 { format!("{s:<w$}", w = widths[i]) } else { format!("{s:>w$}", w = widths[i]) })
                    .collect();
                writeln!(out, "{}", parts.join("  ").trim_end()).unwrap();
            }
            out
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let mut header = vec!["tool", "tp", "fn", "tn", "fp", "analyzed", "total"];
            header.extend(METRIC_NAMES);
            w.write_record(&header).unwrap();
            for r in rows {
                let m = compute_metrics(&r.counts);
                let c = &r.counts;
                let mut rec =
                    vec![r.name.clone(), c.tp.to_string(), c.fn_.to_string(), c.tn.to_string(), c.fp.to_string()];
                rec.push(c.analyzed().to_string());
                rec.push(c.total.to_string());
                rec.extend(METRIC_NAMES.iter().map(|k| render_opt(m.get(k).flatten(), decimals)));
                w.write_record(&rec).unwrap();
            }
            String::from_utf8(w.into_inner().unwrap()).unwrap()
        }
        Format::Json => {
            let rows: Vec<serde_json::Value> = rows
                .iter()
                .map(|r| {
                    let m = compute_metrics(&r.counts);
                    let mut obj = serde_json::Map::new();
                    obj.insert("tool".into(), r.name.clone().into());
                    obj.insert("counts".into(), serde_json::to_value(r.counts).unwrap());
                    for k in METRIC_NAMES {
                        let v = m.get(k).flatten().map(|x| render(x, decimals));
                        obj.insert(k.into(), v.map_or(serde_json::Value::Null, Into::into));
                    }
                    serde_json::Value::Object(obj)
                })
                .collect();
            let mut s = serde_json::to_string_pretty(&serde_json::json!({ "rows": rows })).unwrap();
            s.push('\n');
            s
        }
    }
}

/// Result of checking one corpus kernel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelRun {
    pub kernel: LabeledKernel,
    pub verdicts: Vec<Verdict>,
    pub outcome: Outcome,
    pub accepted: bool,
}

/// Reads every kernel (failing before any analysis if one is missing or
/// malformed) and checks them on `threads` workers. Results follow
/// manifest order.
pub fn run_corpus(
    kernels: &[LabeledKernel],
    root: &Path,
    opts: CheckOptions,
    threads: usize,
) -> Result<Vec<KernelRun>, HarnessError> {
    let mut programs = Vec::with_capacity(kernels.len());
    for k in kernels {
        let path = root.join(&k.path);
        let text = std::fs::read_to_string(&path).map_err(|source| HarnessError::Io { path: path.clone(), source })?;
        programs.push(parse(&text).map_err(|source| HarnessError::Parse { path, source })?);
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Vec<Verdict>>>> = Mutex::new(vec![None; kernels.len()]);
    std::thread::scope(|s| {
        for _ in 0..threads.max(1).min(kernels.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= programs.len() {
                    break;
                }
                let v = check_program(&programs[i], opts);
                slots.lock().unwrap()[i] = Some(v);
            });
        }
    });
    Ok(kernels
        .iter()
        .zip(slots.into_inner().unwrap())
        .map(|(k, v)| {
            let verdicts = v.expect("every kernel is checked");
            let outcome = kernel_outcome(&verdicts.iter().map(|v| v.outcome).collect::<Vec<_>>());
            KernelRun { kernel: k.clone(), accepted: k.accepts(outcome), outcome, verdicts }
        })
        .collect())
}

/// Region outcomes keyed by kernel path, as `tally` expects.
pub fn outcome_map(runs: &[KernelRun]) -> BTreeMap<String, Vec<Outcome>> {
    runs.iter()
        .map(|r| (r.kernel.path.clone(), r.verdicts.iter().map(|v| v.outcome).collect()))
        .collect()
}

/// Per-kernel listing: path, label, outcome, and `ok`/`MISMATCH`.
pub fn kernel_table(runs: &[KernelRun], format: Format) -> String {
    match format {
        Format::Text => {
            let w = runs.iter().map(|r| r.kernel.path.len()).max().unwrap_or(0);
            let mut out = String::new();
            for r in runs {
                let status = if r.accepted { "ok" } else { "MISMATCH" };
                writeln!(out, "{:<w$}  {:<6}  {:<13}  {status}", r.kernel.path, r.kernel.expected.as_str(), r.outcome.label())
                    .unwrap();
            }
            out
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["path", "label", "outcome", "accepted"]).unwrap();
            for r in runs {
                w.write_record([
                    r.kernel.path.as_str(),
                    r.kernel.expected.as_str(),
                    r.outcome.label(),
                    if r.accepted { "true" } else { "false" },
                ])
                .unwrap();
            }
            String::from_utf8(w.into_inner().unwrap()).unwrap()
        }
        Format::Json => {
            let items: Vec<serde_json::Value> = runs
                .iter()
                .map(|r| {
                    serde_json::json!({
                        "path": r.kernel.path,
                        "label": r.kernel.expected.as_str(),
                        "tags": r.kernel.tags,
                        "outcome": r.outcome.label(),
                        "accepted": r.accepted,
                    })
                })
                .collect();
            let mut s = serde_json::to_string_pretty(&items).unwrap();
            s.push('\n');
            s
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn rounding_is_half_away_from_zero() {
        assert_eq!(render(r(1, 8), 2), "0.13");
        assert_eq!(render(r(-1, 8), 2), "-0.13");
        assert_eq!(render(r(864, 5), 2), "172.80");
        assert_eq!(render(r(1, 1000), 2), "0.00");
        assert_eq!(render(r(-1, 1000), 2), "0.00");
        assert_eq!(render(r(7, 2), 0), "4");
    }

    #[test]
    fn counting_policy() {
        let k = |p: &str, l| LabeledKernel { path: p.into(), expected: l, tags: vec![] };
        let labels = [k("a", Label::Race), k("b", Label::NoRace), k("c", Label::Race)];
        let mut v = BTreeMap::new();
        v.insert("a".to_string(), vec![Outcome::RaceFree, Outcome::RaceDetected]);
        v.insert("b".to_string(), vec![Outcome::NotAnalyzable]);
        v.insert("c".to_string(), vec![]);
        let c = tally(&v, &labels, Policy::Exclude).unwrap();
        assert_eq!((c.tp, c.fn_, c.tn, c.fp, c.total), (1, 1, 0, 0, 3));
        assert_eq!(c.coverage(), Some(r(2, 3)));
        let s = tally(&v, &labels, Policy::Strict).unwrap();
        assert_eq!((s.tp, s.fn_, s.tn, s.fp), (1, 1, 1, 0));
        v.remove("c");
        assert!(matches!(tally(&v, &labels, Policy::Exclude), Err(HarnessError::MissingVerdict(p)) if p == "c"));
    }

    #[test]
    fn perfect_classifier_has_undefined_dor() {
        let m = compute_metrics(&ConfusionCounts::new(1, 0, 1, 0));
        for k in ["precision", "recall", "accuracy", "f1", "tpr", "tnr"] {
            assert_eq!(m.get(k).unwrap(), Some(r(1, 1)), "{k}");
        }
        assert_eq!(m.lr_plus, None);
        assert!(matches!(m.require("dor"), Err(HarnessError::UndefinedMetric("dor"))));
    }

    #[test]
    fn empty_report_is_header_only() {
        assert_eq!(report(&[], Format::Text, 2).lines().count(), 1);
        assert_eq!(report(&[], Format::Csv, 2).lines().count(), 1);
    }

    #[test]
    fn text_row() {
        let rows = [ReportRow { name: "polyrace".into(), counts: ConfusionCounts::new(48, 2, 36, 5) }];
        let t = report(&rows, Format::Text, 2);
        let last = t.lines().nth(1).unwrap();
        assert_eq!(last, "polyrace  48   2  36   5     91/91       0.91    0.96      0.92  0.93  172.80");
    }

    #[test]
    fn manifest_parsing() {
        let m = "path,label,tags\n# comment\nk/a.c,race,\nk/b.c, norace ,nonaffine-known-FP; simd\n\nk/c.c,race\n";
        let ks = parse_manifest(m).unwrap();
        assert_eq!(ks.len(), 3);
        assert_eq!(ks[1].tags, ["nonaffine-known-FP", "simd"]);
        assert!(ks[1].accepts(Outcome::RaceDetected));
        assert!(!ks[0].accepts(Outcome::NotAnalyzable));
        assert!(matches!(parse_manifest("a.c,maybe,"), Err(HarnessError::Manifest { line: 1, .. })));
        assert!(parse_manifest("").unwrap().is_empty());
    }
}
