import init, { layer_report, mellin_scan, glue_pairs } from "./pkg/gpdlab_web.js";

const $ = (id) => document.getElementById(id);
const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2"];

function points() {
  return $("points").value
    .split("\n")
    .map((l) => l.split("#")[0].trim())
    .filter((l) => l)
    .map((l) => l.split(/[\s,]+/).map(Number));
}

function drawShape() {
  const cv = $("shape"), g = cv.getContext("2d");
  g.clearRect(0, 0, cv.width, cv.height);
  const p = points().filter((q) => q.length === 2 && q.every(Number.isFinite));
  if (p.length < 2) return;
  const xs = p.map((q) => q[0]), ys = p.map((q) => q[1]);
  const [x0, x1, y0, y1] = [Math.min(...xs), Math.max(...xs), Math.min(...ys), Math.max(...ys)];
  const s = 180 / Math.max(x1 - x0, y1 - y0, 1e-9);
  const T = ([x, y]) => [20 + (x - x0) * s, cv.height - 20 - (y - y0) * s];
  g.beginPath();
  p.forEach((q, i) => (i ? g.lineTo(...T(q)) : g.moveTo(...T(q))));
  g.closePath();
  g.fillStyle = "#e8f0fb";
  g.fill();
  g.stroke();
  g.fillStyle = "#222";
  p.forEach((q, i) => g.fillText("p" + i, ...T(q)));
}

function plot(curves, c) {
  const cv = $("plot"), g = cv.getContext("2d");
  g.clearRect(0, 0, cv.width, cv.height);
  if (!curves.length) return;
  const lmax = Math.max(...curves.flatMap((k) => k.lambda));
  const smax = Math.max(c, ...curves.flatMap((k) => k.sigma_min)) * 1.1;
  const X = (l) => 40 + (l / lmax) * (cv.width - 60);
  const Y = (s) => cv.height - 25 - (s / smax) * (cv.height - 45);
  g.strokeStyle = "#999";
  g.beginPath();
  g.moveTo(X(0), Y(0));
  g.lineTo(X(lmax), Y(0));
  g.moveTo(X(0), Y(0));
  g.lineTo(X(0), Y(smax));
  g.stroke();
  g.fillStyle = "#444";
  g.fillText("λ", X(lmax) - 10, Y(0) + 16);
  g.fillText(lmax.toFixed(0), X(lmax) - 20, Y(0) + 16);
  g.fillText("σ_min", 2, Y(smax) + 10);
  g.fillText(smax.toFixed(2), 2, Y(smax) + 24);
  curves.forEach((k, i) => {
    g.strokeStyle = COLORS[i % COLORS.length];
    g.beginPath();
    k.lambda.forEach((l, j) => (j ? g.lineTo(X(l), Y(k.sigma_min[j])) : g.moveTo(X(l), Y(k.sigma_min[j]))));
    g.stroke();
    g.fillStyle = g.strokeStyle;
    g.fillText(k.vertex, cv.width - 40, 15 + 14 * i);
  });
}

function verdictText(ok, yes, no) {
  return `<span class="${ok ? "ok" : "bad"}">${ok ? yes : no}</span>`;
}

function guard(f, out) {
  try {
    f();
  } catch (e) {
    out.textContent = "error: " + (e.message ?? e);
  }
}

await init();

$("preset").onchange = () => {
  $("points").value = $("preset").value.replaceAll("\\n", "\n");
  drawShape();
};
$("preset").onchange();
$("points").oninput = drawShape;

$("layer").onclick = () =>
  guard(() => {
    const r = JSON.parse(layer_report($("points").value));
    const angles = r.angles.map((a) => `${a.vertex}: ${a.angle_over_pi?.toFixed(4)}π`).join(", ");
    $("summary").innerHTML = `boundary algebra <b>${r.report.algebra_compact}</b>; b-groupoid equal: ${r.report.b_equal}; angles ${angles}`;
    plot([], 0);
    $("out").textContent = JSON.stringify(r, null, 2);
  }, $("out"));

$("scan").onclick = () =>
  guard(() => {
    const c = Number($("c").value);
    const r = JSON.parse(mellin_scan($("points").value, c, Number($("lmax").value)));
    const v = r.verdict;
    const min = Math.min(...v.vertices.map((s) => s.min_sigma));
    $("summary").innerHTML =
      verdictText(v.fredholm, "Fredholm", "not Fredholm") +
      ` on the critical weight line; min σ_min = ${min.toPrecision(6)}` +
      (v.witness ? `, witness ${v.witness}` : "");
    plot(r.curves, c);
    $("out").textContent = JSON.stringify(v, null, 2);
  }, $("out"));

$("glue").onclick = () =>
  guard(() => {
    const r = JSON.parse(glue_pairs($("charts").value));
    let s = `weak gluing ${verdictText(r.weak.holds, "holds", "fails")}, strong gluing ${verdictText(r.strong.holds, "holds", "fails")}`;
    if (r.glued) s += `; glued: ${r.glued.units} units, ${r.glued.arrows} arrows, pair groupoid: ${r.glued.pair_groupoid}`;
    if (r.weak.witness) s += `; no chart contains the composable pair ${r.weak.witness.join(" · ")}`;
    $("gsummary").innerHTML = s;
    $("gout").textContent = JSON.stringify(r, null, 2);
  }, $("gout"));
