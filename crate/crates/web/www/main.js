// Built with: wasm-pack build crates/web --target web --out-dir www/pkg
import init, { check_kernel, delta_view, metrics } from "./pkg/polyrace_web.js";

const SAMPLE = `param m = 7, n = 7;
int i, j;
double b[m][n];
for (i = 0; i < m; i++) {
#pragma omp parallel for
  for (j = 1; j < n; j++)
    b[i][j] = b[i][j-1];
}
`;

const $ = (id) => document.getElementById(id);

function el(tag, text, cls) {
  const e = document.createElement(tag);
  if (text !== undefined) e.textContent = text;
  if (cls) e.className = cls;
  return e;
}

function showError(out, msg) {
  out.replaceChildren(el("pre", msg, "race"));
}

const OUTCOME_CLASS = { RaceDetected: "race", RaceFree: "free", NotAnalyzable: "na" };

function runCheck() {
  const reply = JSON.parse(check_kernel($("check-src").value, $("no-mayref").checked));
  const out = $("check-out");
  if (reply.error) return showError(out, reply.error);
  if (reply.verdicts.length === 0) return out.replaceChildren(el("p", "No OpenMP constructs."));
  out.replaceChildren(...reply.verdicts.map((v, k) => {
    const p = el("pre", reply.diagnostics[k], OUTCOME_CLASS[v.outcome]);
    for (const n of v.notes) p.append("\n  note: " + n);
    return p;
  }));
}

function runDeltas() {
  const reply = JSON.parse(delta_view($("delta-src").value));
  const out = $("delta-out");
  if (reply.error) return showError(out, reply.error);
  const parts = [];
  for (const r of reply) {
    parts.push(el("h3", `line ${r.line}: ${r.directive}`));
    if (r.error) { parts.push(el("pre", r.error, "na")); continue; }
    const par = r.parallel.map(([v, p]) => `${v}: ${p ? "parallel" : "carried"}`).join(", ");
    parts.push(el("p", `loops [${r.loops.join(", ")}], checked [${r.checked.join(", ")}]; ${par}`));
    for (const e of r.edges) {
      const lines = [`${e.kind} on ${e.array}, line ${e.src_line} -> line ${e.dst_line}`, e.relation];
      if (e.delta) lines.push("delta: " + e.delta);
      for (const p of e.projections) {
        const vals = p.values ? ` = {${p.values.join(", ")}}` : "";
        lines.push(`  ${p.dim}${vals}  ${p.set}${p.carried ? "  (carried)" : ""}`);
      }
      parts.push(el("pre", lines.join("\n")));
    }
    if (r.edges.length === 0) parts.push(el("p", "No dependences."));
  }
  out.replaceChildren(...parts);
}

function runMetrics() {
  const n = (id) => Math.max(0, parseInt($(id).value, 10) || 0);
  const rows = JSON.parse(metrics(n("tp"), n("fn"), n("tn"), n("fp"), n("decimals")));
  $("metrics-out").replaceChildren(...rows.map(([name, value]) => {
    const tr = el("tr");
    tr.append(el("th", name), el("td", value));
    return tr;
  }));
}

function showTab(name) {
  for (const b of document.querySelectorAll("nav button")) {
    b.setAttribute("aria-selected", String(b.dataset.tab === name));
    $(b.dataset.tab).hidden = b.dataset.tab !== name;
  }
}

await init();
$("check-src").value = SAMPLE;
$("delta-src").value = SAMPLE;
for (const b of document.querySelectorAll("nav button")) b.addEventListener("click", () => showTab(b.dataset.tab));
$("check-run").addEventListener("click", runCheck);
$("delta-run").addEventListener("click", runDeltas);
for (const id of ["tp", "fn", "tn", "fp", "decimals"]) $(id).addEventListener("input", runMetrics);
runMetrics();
