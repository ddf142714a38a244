use std::fmt::Write as _;
use std::io::IsTerminal;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use polyrace::depgraph::compute_dependences;
use polyrace::frontend::{extract_directives, parse, Directive, Program};
use polyrace::graph::to_dot;
use polyrace::harness::{
    self, kernel_table, outcome_map, parse_manifest, run_corpus, tally, HarnessError, Policy, ReportRow,
};
use polyrace::racecheck::{check_program, is_parallel, parallel_dims, projected_delta, CheckOptions, Outcome, Verdict};
use polyrace::scop::{construct_scop, Access};

const EXIT_RACE: u8 = 1;
const EXIT_NOT_ANALYZABLE: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_DATA: u8 = 65;
const EXIT_IO: u8 = 66;

#[derive(Parser)]
#[command(name = "polyrace", version, about = "Static data-race checker for OpenMP affine loop kernels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check kernel files and print one verdict per parallel region.
    Check {
        /// Report non-affine regions as not analyzable.
        #[arg(long)]
        disable_mayref: bool,
        #[arg(long, value_enum, default_value_t = CheckFormat::Text)]
        format: CheckFormat,
        /// Internal representations to print before the verdicts.
        #[arg(long, value_enum, value_delimiter = ',')]
        dump: Vec<Dump>,
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Run the checker over a labeled corpus and report metrics.
    Bench {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, value_enum, default_value_t = BenchFormat::Text)]
        format: BenchFormat,
        /// Directory for report.txt, report.csv and report.json.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Count not-analyzable kernels as negative reports.
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        disable_mayref: bool,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// Decimal places for rendered metrics.
        #[arg(long, default_value_t = 2)]
        decimals: u32,
    },
    /// Export the directive tree of a kernel as a dot graph.
    Graph {
        file: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CheckFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BenchFormat {
    Text,
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
enum Dump {
    Directives,
    Scop,
    Rdg,
    Sets,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn io(path: &Path, e: std::io::Error) -> Self {
        Failure { code: EXIT_IO, message: format!("{}: {e}", path.display()) }
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        let code = match e {
            HarnessError::Io { .. } => EXIT_IO,
            _ => EXIT_DATA,
        };
        Failure { code, message: e.to_string() }
    }
}

fn use_color() -> bool {
    std::env::var_os("NO_COLOR").is_none_or(|v| v.is_empty()) && std::io::stdout().is_terminal()
}

fn paint(o: Outcome, color: bool) -> String {
    if !color {
        return o.label().to_string();
    }
    let code = match o {
        Outcome::RaceDetected => 31,
        Outcome::RaceFree => 32,
        Outcome::NotAnalyzable => 33,
    };
    format!("\x1b[{code}m{}\x1b[0m", o.label())
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

fn load(path: &Path) -> Result<Program, Failure> {
    let text = read(path)?;
    let p = parse(&text).map_err(|e| Failure { code: EXIT_DATA, message: format!("{}:{e}", path.display()) })?;
    for w in &p.warnings {
        eprintln!("{}:{w}", path.display());
    }
    Ok(p)
}

fn loop_directives(forest: &[Directive]) -> Vec<&Directive> {
    let mut out = Vec::new();
    for d in forest {
        d.walk(&mut |x| {
            if x.kind.is_loop() {
                out.push(x);
            }
        });
    }
    out
}

fn dumps(p: &Program, which: &[Dump]) -> String {
    let dirs = extract_directives(p);
    let mut out = String::new();
    let mut which = which.to_vec();
    which.sort();
    which.dedup();
    for d in which {
        match d {
            Dump::Directives => {
                out.push_str("== directives ==\n");
                for x in &dirs {
                    out.push_str(&x.dump());
                }
            }
            Dump::Scop | Dump::Rdg | Dump::Sets => {
                let title = match d {
                    Dump::Scop => "scop",
                    Dump::Rdg => "rdg",
                    _ => "sets",
                };
                writeln!(out, "== {title} ==").unwrap();
                for l in loop_directives(&dirs) {
                    writeln!(out, "-- {} at line {}", l.kind.spelling(), l.span.line).unwrap();
                    out.push_str(&model_dump(l, p, &dirs, d));
                }
            }
        }
    }
    out
}

fn model_dump(l: &Directive, p: &Program, dirs: &[Directive], what: Dump) -> String {
    let scop = match construct_scop(l, p, dirs) {
        Ok(s) => s,
        Err(e) => return format!("not modeled: {e}\n"),
    };
    if what == Dump::Scop {
        return scop.dump();
    }
    let eligible = |a: &Access| a.is_eligible() && a.affine && a.map.is_some();
    let g = match compute_dependences(&scop, eligible) {
        Ok(g) => g,
        Err(e) => return format!("not modeled: {e}\n"),
    };
    if what == Dump::Rdg {
        return g.dump();
    }
    let mut out = String::new();
    for dim in parallel_dims(l, &scop) {
        let var = scop.stmts.iter().find_map(|s| s.loops.get(dim)).map(|&i| scop.loops[i].var.as_str()).unwrap_or("?");
        match is_parallel(&g, dim) {
            Ok(par) => writeln!(out, "dim {dim} ({var}): {}", if par { "parallel" } else { "carries a dependence" }).unwrap(),
            Err(e) => writeln!(out, "dim {dim} ({var}): {e}").unwrap(),
        }
        for e in &g.edges {
            if let Ok(Some(s)) = projected_delta(e, dim) {
                let (a, b) = (g.access(e.src), g.access(e.dst));
                writeln!(out, "  {} {} ~ {}: {s}", e.kind.label(), a.text, b.text).unwrap();
            }
        }
    }
    out
}

fn verdict_json(file: &str, v: &Verdict) -> serde_json::Value {
    serde_json::json!({
        "file": file,
        "line": v.span.line,
        "construct": v.kind.spelling(),
        "outcome": v.outcome.label(),
        "reason": v.reason,
        "witnesses": v.witnesses.iter().map(|w| serde_json::json!({
            "array": w.array,
            "write_line": w.write_line,
            "other": w.other_kind,
            "other_line": w.other_line,
            "dim": w.dim,
            "delta": w.delta_sample,
            "may": w.may,
        })).collect::<Vec<_>>(),
        "notes": v.notes,
    })
}

fn run_check(files: &[PathBuf], opts: CheckOptions, format: CheckFormat, dump: &[Dump]) -> u8 {
    let color = format == CheckFormat::Text && use_color();
    let mut worst = Outcome::RaceFree;
    let mut failure = None;
    let mut json = Vec::new();
    for f in files {
        let name = f.display().to_string();
        let p = match load(f) {
            Ok(p) => p,
            Err(e) => {
                eprintln!("polyrace: {}", e.message);
                failure = Some(failure.map_or(e.code, |c: u8| c.max(e.code)));
                continue;
            }
        };
        if !dump.is_empty() && format == CheckFormat::Text {
            print!("{}", dumps(&p, dump));
        }
        let verdicts = check_program(&p, opts);
        for v in &verdicts {
            worst = worst.max(v.outcome);
            match format {
                CheckFormat::Text => {
                    let line = v.diagnostic(&name);
                    let plain = v.outcome.label();
                    println!("{}", line.replacen(plain, &paint(v.outcome, color), 1));
                    for n in &v.notes {
                        eprintln!("{name}:{}: note: {n}", v.span.line);
                    }
                }
                CheckFormat::Json => json.push(verdict_json(&name, v)),
            }
        }
        if format == CheckFormat::Json && !dump.is_empty() {
            json.push(serde_json::json!({ "file": name, "dump": dumps(&p, dump) }));
        }
    }
    if format == CheckFormat::Json {
        println!("{}", serde_json::to_string_pretty(&json).unwrap());
    }
    if let Some(code) = failure {
        return code;
    }
    match worst {
        Outcome::RaceDetected => EXIT_RACE,
        Outcome::NotAnalyzable => EXIT_NOT_ANALYZABLE,
        Outcome::RaceFree => 0,
    }
}

struct BenchArgs {
    manifest: PathBuf,
    format: BenchFormat,
    out: Option<PathBuf>,
    policy: Policy,
    opts: CheckOptions,
    threads: usize,
    decimals: u32,
}

fn run_bench(a: &BenchArgs) -> Result<u8, Failure> {
    let kernels = parse_manifest(&read(&a.manifest)?)?;
    let root = a.manifest.parent().unwrap_or(Path::new("."));
    let runs = run_corpus(&kernels, root, a.opts, a.threads)?;
    let counts = tally(&outcome_map(&runs), &kernels, a.policy)?;
    let rows = if kernels.is_empty() { vec![] } else { vec![ReportRow { name: "polyrace".into(), counts }] };
    let text = format!(
        "{}\n{}",
        harness::report(&rows, harness::Format::Text, a.decimals),
        kernel_table(&runs, harness::Format::Text)
    );
    let csv = harness::report(&rows, harness::Format::Csv, a.decimals);
    let json = {
        let metrics: serde_json::Value =
            serde_json::from_str(&harness::report(&rows, harness::Format::Json, a.decimals)).unwrap();
        let ks: serde_json::Value = serde_json::from_str(&kernel_table(&runs, harness::Format::Json)).unwrap();
        let mut s = serde_json::to_string_pretty(&serde_json::json!({ "rows": metrics["rows"], "kernels": ks })).unwrap();
        s.push('\n');
        s
    };
    if let Some(dir) = &a.out {
        std::fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
        for (name, body) in [("report.txt", &text), ("report.csv", &csv), ("report.json", &json)] {
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(|e| Failure::io(&path, e))?;
        }
    }
    print!(
        "{}",
        match a.format {
            BenchFormat::Text => &text,
            BenchFormat::Csv => &csv,
            BenchFormat::Json => &json,
        }
    );
    Ok(if runs.iter().all(|r| r.accepted) { 0 } else { 1 })
}

fn run_graph(file: &Path, output: Option<&Path>) -> Result<u8, Failure> {
    let p = load(file)?;
    let name = file.file_name().map_or_else(|| file.display().to_string(), |n| n.to_string_lossy().into_owned());
    let dot = to_dot(&name, &extract_directives(&p));
    match output {
        Some(o) => std::fs::write(o, dot).map_err(|e| Failure::io(o, e))?,
        None => print!("{dot}"),
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Check { disable_mayref, format, dump, files } => {
            Ok(run_check(&files, CheckOptions { disable_mayref }, format, &dump))
        }
        Command::Bench { manifest, format, out, strict, disable_mayref, threads, decimals } => run_bench(&BenchArgs {
            manifest,
            format,
            out,
            policy: if strict { Policy::Strict } else { Policy::Exclude },
            opts: CheckOptions { disable_mayref },
            threads,
            decimals,
        }),
        Command::Graph { file, output } => run_graph(&file, output.as_deref()),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("polyrace: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
