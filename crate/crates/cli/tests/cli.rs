use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_polyrace"));
    c.env("NO_COLOR", "1");
    c
}

fn corpus() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/corpus")
}

fn kernel(name: &str) -> PathBuf {
    corpus().join("kernels").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

/// Parsed dot graph: node labels by id and edges as (from, to, dashed).
#[derive(Debug, Default)]
struct Dot {
    labels: BTreeMap<String, String>,
    edges: Vec<(String, String, bool)>,
}

/// Checks the subset of the dot grammar the exporter may use and returns
/// the graph, or a description of the first syntax error.
fn parse_dot(src: &str) -> Result<Dot, String> {
    #[derive(Debug, Clone, PartialEq)]
    enum T {
        Id(String),
        Sym(&'static str),
    }
    let mut toks = Vec::new();
    let cs: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '"' {
            let mut s = String::new();
            i += 1;
            loop {
                match cs.get(i) {
                    None => return Err("unterminated string".into()),
                    Some('"') => break,
                    Some('\\') => {
                        s.push('\\');
                        s.push(*cs.get(i + 1).ok_or("dangling escape")?);
                        i += 2;
                    }
                    Some(&ch) => {
                        s.push(ch);
                        i += 1;
                    }
                }
            }
            i += 1;
            toks.push(T::Id(s));
        } else if c.is_alphanumeric() || c == '_' {
            let st = i;
            while i < cs.len() && (cs[i].is_alphanumeric() || cs[i] == '_' || cs[i] == '.') {
                i += 1;
            }
            toks.push(T::Id(cs[st..i].iter().collect()));
        } else if c == '-' && cs.get(i + 1) == Some(&'>') {
            toks.push(T::Sym("->"));
            i += 2;
        } else {
            let s = match c {
                '{' => "{",
                '}' => "}",
                '[' => "[",
                ']' => "]",
                '=' => "=",
                ',' => ",",
                ';' => ";",
                _ => return Err(format!("unexpected character {c:?}")),
            };
            toks.push(T::Sym(s));
            i += 1;
        }
    }
    let mut pos = 0;
    let next = |pos: &mut usize| -> Result<T, String> {
        let t = toks.get(*pos).cloned().ok_or("unexpected end of input")?;
        *pos += 1;
        Ok(t)
    };
    let id = |t: T| match t {
        T::Id(s) => Ok(s),
        t => Err(format!("expected identifier, found {t:?}")),
    };
    if next(&mut pos)? != T::Id("digraph".into()) {
        return Err("expected `digraph`".into());
    }
    let mut t = next(&mut pos)?;
    if matches!(t, T::Id(_)) {
        t = next(&mut pos)?;
    }
    if t != T::Sym("{") {
        return Err("expected `{`".into());
    }
    let mut g = Dot::default();
    loop {
        let t = next(&mut pos)?;
        if t == T::Sym("}") {
            break;
        }
        let head = id(t)?;
        let mut chain = vec![head];
        while toks.get(pos) == Some(&T::Sym("->")) {
            pos += 1;
            chain.push(id(next(&mut pos)?)?);
        }
        let mut attrs = BTreeMap::new();
        if toks.get(pos) == Some(&T::Sym("[")) {
            pos += 1;
            loop {
                let t = next(&mut pos)?;
                if t == T::Sym("]") {
                    break;
                }
                let k = id(t)?;
                if next(&mut pos)? != T::Sym("=") {
                    return Err("expected `=` in attribute".into());
                }
                attrs.insert(k, id(next(&mut pos)?)?);
                if toks.get(pos) == Some(&T::Sym(",")) {
                    pos += 1;
                }
            }
        }
        if toks.get(pos) == Some(&T::Sym(";")) {
            pos += 1;
        }
        if chain.len() > 1 {
            let dashed = attrs.get("style").is_some_and(|s| s == "dashed");
            for w in chain.windows(2) {
                g.edges.push((w[0].clone(), w[1].clone(), dashed));
            }
        } else if !matches!(chain[0].as_str(), "node" | "edge" | "graph") {
            g.labels.insert(chain[0].clone(), attrs.get("label").cloned().unwrap_or_default());
        }
    }
    if pos != toks.len() {
        return Err("trailing input after graph".into());
    }
    for (a, b, _) in &g.edges {
        if !g.labels.contains_key(a) || !g.labels.contains_key(b) {
            return Err(format!("edge {a} -> {b} names an undeclared node"));
        }
    }
    Ok(g)
}

impl Dot {
    fn children(&self, id: &str) -> Vec<&str> {
        self.edges.iter().filter(|e| e.0 == id && !e.2).map(|e| e.1.as_str()).collect()
    }

    fn first_line(&self, id: &str) -> &str {
        self.labels[id].split("\\l").next().unwrap()
    }
}

#[test]
fn dot_checker_rejects_malformed_graphs() {
    assert!(parse_dot("digraph g { a -> b; a [label=\"x\"]; b; }").is_ok());
    for bad in ["graph g { }", "digraph { a -> }", "digraph { a [label=\"x] }", "digraph { a -> b; }", "digraph { } x"] {
        assert!(parse_dot(bad).is_err(), "{bad}");
    }
}

#[test]
fn inner_loop_placement_is_racy() {
    let o = run(&["check", kernel("inner_loop_carried.c").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 1);
    assert!(out.contains("RaceDetected") && out.contains("witness: b write@") && out.contains("dim j"), "{out}");
}

#[test]
fn outer_loop_placement_is_race_free() {
    let o = run(&["check", kernel("outer_loop_carried_inner.c").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 1);
    assert!(out.contains(": RaceFree: parallel for"), "{out}");
}

#[test]
fn sections_are_not_analyzable() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "s.c",
        "int x, y;\n#pragma omp parallel\n{\n#pragma omp sections\n  {\n#pragma omp section\n    x = 1;\n#pragma omp section\n    y = 2;\n  }\n}\n",
    );
    let o = run(&["check", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("NotAnalyzable: parallel [reason: unsupported: sections]"), "{}", stdout(&o));
}

#[test]
fn json_output_is_structured() {
    let o = run(&["check", "--format", "json", kernel("inner_loop_carried.c").to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v[0]["outcome"], "RaceDetected");
    assert_eq!(v[0]["witnesses"][0]["array"], "b");
    assert_eq!(v[0]["witnesses"][0]["dim"], "j");
}

#[test]
fn disable_mayref_changes_only_nonaffine_kernels() {
    let mut files: Vec<PathBuf> = std::fs::read_dir(corpus().join("kernels")).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    let args: Vec<&str> = files.iter().map(|p| p.to_str().unwrap()).collect();
    let on = stdout(&run(&[&["check"], args.as_slice()].concat()));
    let off = stdout(&run(&[&["check", "--disable-mayref"], args.as_slice()].concat()));
    let (on, off): (Vec<&str>, Vec<&str>) = (on.lines().collect(), off.lines().collect());
    assert_eq!(on.len(), off.len());
    let mut changed = 0;
    for (a, b) in on.iter().zip(&off) {
        if a != b {
            changed += 1;
            assert!(a.contains("indirect_"), "{a}");
            assert!(b.contains("NotAnalyzable") && b.contains("non-affine"), "{b}");
        }
    }
    assert_eq!(changed, 3);
}

#[test]
fn nowait_graph_matches_directive_tree() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.dot");
    let o = run(&["graph", kernel("nowait_single.c").to_str().unwrap(), "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let g = parse_dot(&std::fs::read_to_string(out).unwrap()).unwrap();
    let top = g.children("n0");
    assert_eq!(top.len(), 1);
    assert_eq!(g.first_line(top[0]), "OMP_Parallel");
    let kids: Vec<&str> = g.children(top[0]).into_iter().map(|k| g.first_line(k)).collect();
    assert_eq!(kids, ["OMP_Workshare_Loop", "OMP_Workshare_single", "OMP_Barrier"]);
    assert!(g.labels[g.children(top[0])[0]].contains("nowait"));
}

#[test]
fn graph_shapes() {
    let dir = tempfile::tempdir().unwrap();
    let plain = write(dir.path(), "plain.c", "int x;\nx = 1;\n");
    let g = parse_dot(&stdout(&run(&["graph", plain.to_str().unwrap()]))).unwrap();
    assert_eq!(g.labels.len(), 1);
    assert!(g.edges.is_empty());
    let two = write(
        dir.path(),
        "two.c",
        "param n;\nint i;\ndouble a[n];\n#pragma omp parallel for\nfor (i = 0; i < n; i++) a[i] = 1;\n#pragma omp parallel\n{\n#pragma omp for\n  for (i = 0; i < n; i++) a[i] = 2;\n}\n",
    );
    let g = parse_dot(&stdout(&run(&["graph", two.to_str().unwrap()]))).unwrap();
    let roots = g.children("n0");
    assert_eq!(roots.len(), 2);
    assert_eq!(g.first_line(roots[0]), "OMP_Parallel_For");
    assert_eq!(g.first_line(roots[1]), "OMP_Parallel");
    assert_eq!(g.children(roots[1]).len(), 2);
    for f in std::fs::read_dir(corpus().join("kernels")).unwrap() {
        let o = run(&["graph", f.unwrap().path().to_str().unwrap()]);
        parse_dot(&stdout(&o)).unwrap();
    }
}

#[test]
fn bench_reports_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let manifest = corpus().join("classic.csv");
    let o = run(&["bench", "--manifest", manifest.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(out.join("report.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("polyrace,5,1,3,1,10,10,"), "{csv}");
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(json["kernels"].as_array().unwrap().len(), 10);
    assert!(std::fs::read_to_string(out.join("report.txt")).unwrap().starts_with("Tool"));

    let empty = write(dir.path(), "empty.csv", "path,label,tags\n");
    let o = run(&["bench", "--manifest", empty.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 1);

    let missing = write(dir.path(), "missing.csv", "nope.c,race,\n");
    let out2 = dir.path().join("out2");
    let o = run(&["bench", "--manifest", missing.to_str().unwrap(), "--out", out2.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(66));
    assert!(!out2.exists());

    let bad = write(dir.path(), "bad.csv", "x.c,perhaps,\n");
    assert_eq!(run(&["bench", "--manifest", bad.to_str().unwrap()]).status.code(), Some(65));
}

#[test]
fn runs_are_deterministic() {
    let manifest = corpus().join("manifest.csv");
    let a = run(&["bench", "--manifest", manifest.to_str().unwrap(), "--threads", "4", "--format", "json"]);
    let b = run(&["bench", "--manifest", manifest.to_str().unwrap(), "--threads", "1", "--format", "json"]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.status.code(), Some(0));
}

#[test]
fn usage_and_input_errors() {
    assert_eq!(run(&["check"]).status.code(), Some(64));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["check", "/nonexistent/k.c"]).status.code(), Some(66));
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "bad.c", "for (;;) {\n");
    let o = run(&["check", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(65));
    assert!(String::from_utf8_lossy(&o.stderr).contains("syntax error"));
}
