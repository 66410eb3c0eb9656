import init, { tradeoff_curve, qubit_uncertainty, steer_qubit_pair } from "./pkg/infodist_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => parseFloat($(id).value);

function bindOutput(id) {
  const show = () => { $(id + "-out").textContent = (+$(id).value).toFixed(2); };
  $(id).addEventListener("input", show);
  show();
}

function drawCurve(points) {
  const cv = $("curve");
  const g = cv.getContext("2d");
  const pad = 36, w = cv.width - 2 * pad, h = cv.height - 2 * pad;
  g.clearRect(0, 0, cv.width, cv.height);
  g.strokeStyle = "#999";
  g.strokeRect(pad, pad, w, h);
  g.fillStyle = "#555";
  g.fillText("0", pad - 4, cv.height - pad + 14);
  g.fillText("π/2", pad + w - 10, cv.height - pad + 14);
  g.fillText("1 bit", 2, pad + 4);
  const x = (t) => pad + (t / (Math.PI / 2)) * w;
  const y = (v) => pad + (1 - v) * h;
  for (const [key, color] of [["h_error", "#c33"], ["i_ae_lower", "#36c"]]) {
    g.strokeStyle = color;
    g.beginPath();
    points.forEach((p, i) => (i ? g.lineTo(x(p.theta), y(p[key])) : g.moveTo(x(p.theta), y(p[key]))));
    g.stroke();
    g.fillStyle = color;
    for (const p of points) g.fillRect(x(p.theta) - 2, y(p[key]) - 2, 4, 4);
  }
}

function runCurve() {
  const out = JSON.parse(tradeoff_curve(+$("pts").value, 4, 1));
  if (out.error) return alert(out.error);
  drawCurve(out);
}

function runEur() {
  const r = JSON.parse(qubit_uncertainty(num("a"), num("b"), num("x"), 0, num("z")));
  const text = $("eur-text");
  if (r.error) { text.textContent = r.error; return; }
  const cv = $("eur");
  const g = cv.getContext("2d");
  g.clearRect(0, 0, cv.width, cv.height);
  const scale = (cv.width - 20) / 2;
  g.fillStyle = "#36c";
  g.fillRect(10, 20, r.h_a * scale, 20);
  g.fillStyle = "#6a3";
  g.fillRect(10 + r.h_a * scale, 20, r.h_b * scale, 20);
  g.strokeStyle = "#c33";
  g.beginPath();
  g.moveTo(10 + r.bound * scale, 10);
  g.lineTo(10 + r.bound * scale, 50);
  g.stroke();
  g.fillStyle = "#555";
  g.fillText("H(A) + H(B), red line: lower bound", 10, 70);
  text.textContent =
    `H(A) = ${r.h_a.toFixed(4)}  H(B) = ${r.h_b.toFixed(4)}  sum = ${r.lhs.toFixed(4)}\n` +
    `c = ${r.overlap.toFixed(4)}  bound = ${r.bound.toFixed(4)} bits`;
}

function fmt(m) {
  return m.map((row) => row.map(([re, im]) => `${re.toFixed(4)}${im >= 0 ? "+" : "-"}${Math.abs(im).toFixed(4)}i`).join("  ")).join("\n");
}

function runSteer() {
  const r = JSON.parse(steer_qubit_pair(num("p"), num("t0"), num("t1")));
  if (r.error) { $("steer-text").textContent = r.error; return; }
  const parts = [`average state\n${fmt(r.average)}`];
  r.elements.forEach((e, i) => parts.push(`element ${i}\n${fmt(e)}`));
  parts.push(`completeness error ${r.completeness_error.toExponential(2)}, ` +
    `probability error ${r.max_prob_error.toExponential(2)}, state error ${r.max_state_error.toExponential(2)}`);
  $("steer-text").textContent = parts.join("\n\n");
}

await init();
for (const id of ["pts", "a", "b", "x", "z", "p", "t0", "t1"]) bindOutput(id);
$("curve-run").addEventListener("click", runCurve);
for (const id of ["a", "b", "x", "z"]) $(id).addEventListener("input", runEur);
for (const id of ["p", "t0", "t1"]) $(id).addEventListener("input", runSteer);
runCurve();
runEur();
runSteer();
