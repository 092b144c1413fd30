import init, { curve_json, point_json, scan_json } from "./pkg/bkm_wasm.js";

const $ = (id) => document.getElementById(id);
const read = (form) => Object.fromEntries(new FormData(form));

function fail(el, err) {
  el.textContent = String(err);
  el.classList.add("error");
}

function plot(e) {
  e?.preventDefault();
  const f = read($("curve-form"));
  const status = $("curve-status");
  status.classList.remove("error");
  try {
    const t0 = performance.now();
    const out = JSON.parse(curve_json(f.model, +f.n, +f.j, +f.gamma, +f.points, f.logy === "on"));
    $("chart").innerHTML = out.svg;
    const v = out.verdict;
    const ms = (performance.now() - t0).toFixed(0);
    status.textContent = v.error
      ? `${out.ok_points}/${out.points} reliable points: ${v.error}`
      : `${v.classification}, min R = ${v.min_r?.toExponential(3)}, ${out.ok_points}/${out.points} reliable points, ${ms} ms`;
  } catch (err) {
    fail(status, err);
  }
}

function evaluate(e) {
  e.preventDefault();
  const f = read($("point-form"));
  const out = $("point-out");
  out.classList.remove("error");
  try {
    out.textContent = JSON.stringify(JSON.parse(point_json(f.model, +f.n, +f.theta, +f.x)), null, 2);
  } catch (err) {
    fail(out, err);
  }
}

function scan(e) {
  e.preventDefault();
  const f = read($("scan-form"));
  const table = $("scan-out");
  table.innerHTML = "<tr><th>Γ</th><th>verdict</th><th>min R</th><th>R(T max)</th></tr>";
  try {
    for (const row of JSON.parse(scan_json(f.model, 0, 1, +f.lo, +f.hi, +f.count))) {
      const tr = table.insertRow();
      if (row.error || row.classification !== "monotone_decreasing") tr.className = "bad";
      const cells = row.error
        ? [row.gamma.toFixed(3), row.error, "", ""]
        : [row.gamma.toFixed(3), row.classification, row.min_r.toExponential(3), row.r_at_tmax.toExponential(3)];
      for (const c of cells) tr.insertCell().textContent = c;
    }
  } catch (err) {
    fail(table, err);
  }
}

await init();
$("curve-form").addEventListener("submit", plot);
$("point-form").addEventListener("submit", evaluate);
$("scan-form").addEventListener("submit", scan);
plot();
