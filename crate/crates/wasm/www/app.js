// Expects the wasm-bindgen output in ./pkg (see the README for the build).
import init, { conjugate_profile, ex44_margin, ex52_gap_profile } from "./pkg/bigconj_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (v) => (typeof v === "number" ? v : v === "inf" ? Infinity : -Infinity);
const fmt = (v) => (typeof v === "number" ? v.toPrecision(6) : v === "inf" ? "+inf" : "-inf");

function call(f, out) {
  try {
    return JSON.parse(f());
  } catch (e) {
    out.className = "out err";
    out.textContent = String(e.message ?? e);
    return null;
  }
}

// Draws finite segments of each series; infinite values break the line.
function plot(canvas, xs, series, opts = {}) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  ctx.clearRect(0, 0, w, h);
  const finite = series.flatMap((s) => s.y.filter(Number.isFinite));
  let lo = opts.ymin ?? Math.min(...finite);
  let hi = opts.ymax ?? Math.max(...finite);
  if (hi - lo < 1e-9) { lo -= 1; hi += 1; }
  const x0 = xs[0], x1 = xs[xs.length - 1];
  const px = (x) => 30 + ((x - x0) / (x1 - x0)) * (w - 40);
  const py = (y) => h - 20 - ((y - lo) / (hi - lo)) * (h - 30);
  ctx.strokeStyle = "#bbb";
  ctx.beginPath();
  if (lo <= 0 && hi >= 0) { ctx.moveTo(30, py(0)); ctx.lineTo(w - 10, py(0)); }
  if (x0 <= 0 && x1 >= 0) { ctx.moveTo(px(0), 10); ctx.lineTo(px(0), h - 20); }
  ctx.stroke();
  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.lineWidth = s.width ?? 1.5;
    ctx.setLineDash(s.dash ?? []);
    ctx.beginPath();
    let pen = false;
    xs.forEach((x, i) => {
      const y = s.y[i];
      if (!Number.isFinite(y) || y > hi + (hi - lo)) { pen = false; return; }
      pen ? ctx.lineTo(px(x), py(y)) : ctx.moveTo(px(x), py(y));
      pen = true;
    });
    ctx.stroke();
  }
  ctx.setLineDash([]);
  ctx.fillStyle = "#444";
  ctx.fillText(opts.title ?? "", 35, 15);
  ctx.fillText(`[${lo.toPrecision(3)}, ${hi.toPrecision(3)}]`, w - 120, 15);
}

function conjugate() {
  const n = 2 ** Number($("conj-n").value) + 1;
  $("conj-n-val").textContent = n;
  const out = $("conj-out");
  const p = call(() => conjugate_profile($("conj-kind").value, n, Number($("conj-r").value)), out);
  if (!p) return;
  const f = p.f.map(num), bi = p.biconjugate.map(num), c = p.conjugate.map(num);
  plot($("conj-f"), p.x, [
    { y: f, color: "#1f77b4", width: 3 },
    { y: bi, color: "#d62728", dash: [4, 3] },
  ], { title: "f (blue) and f** (red)" });
  plot($("conj-c"), p.y, [{ y: c, color: "#2ca02c" }], { title: "f*" });
  out.className = "out";
  out.textContent = `N = ${n}, h = ${p.spacing.toPrecision(4)}, max |f** - f| = ${p.biconjugate_gap.toExponential(3)}`;
}

let xstar = [0, 0];
function ex44() {
  const canvas = $("ex44-plane");
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const scale = w / 4;
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#999";
  ctx.beginPath();
  ctx.arc(w / 2, h / 2, scale, 0, 2 * Math.PI);
  ctx.moveTo(0, h / 2); ctx.lineTo(w, h / 2);
  ctx.moveTo(w / 2, 0); ctx.lineTo(w / 2, h);
  ctx.stroke();
  const z = [Number($("ex44-z1").value), Number($("ex44-z2").value)];
  ctx.fillStyle = "#2ca02c";
  ctx.fillRect(w / 2 + z[0] * scale - 3, h / 2 - z[1] * scale - 3, 6, 6);
  ctx.fillStyle = "#d62728";
  ctx.beginPath();
  ctx.arc(w / 2 + xstar[0] * scale, h / 2 - xstar[1] * scale, 4, 0, 2 * Math.PI);
  ctx.fill();
  const out = $("ex44-out");
  const p = call(() => ex44_margin(xstar[0], xstar[1], z[0], z[1]), out);
  if (!p) return;
  out.className = "out";
  out.textContent =
    `x* = (${xstar.map((v) => v.toFixed(3)).join(", ")})  z* = (${z.join(", ")})\n` +
    `LHS = ${fmt(p.lhs)}   RHS = ${fmt(p.rhs)}   LHS - RHS = ${fmt(p.margin)}`;
}

function ex52() {
  const out = $("ex52-out");
  const p = call(() => ex52_gap_profile(Number($("ex52-n").value), 1001), out);
  if (!p) return;
  const lhs = num(p.lhs_at_0);
  plot($("ex52-plot"), p.t, [
    { y: p.values, color: "#1f77b4", width: 2 },
    { y: p.t.map(() => lhs), color: "#d62728", dash: [5, 3] },
    { y: p.t.map(() => p.rhs), color: "#2ca02c", dash: [2, 2] },
  ], { ymin: 0, ymax: Math.max(lhs, p.rhs) * 1.1, title: "profile (blue), LHS at 0 (red), its maximum (green)" });
  out.className = "out";
  out.textContent =
    `n = ${p.n}, <e1, Se1> = ${p.coupling}\nLHS = ${fmt(p.lhs_at_0)}  RHS = max profile = ${p.rhs.toPrecision(6)} at t = ${p.t_star}\n` +
    `gap = ${p.margin.toPrecision(6)}`;
}

await init();
for (const id of ["conj-kind", "conj-n", "conj-r"]) $(id).addEventListener("input", conjugate);
for (const id of ["ex44-z1", "ex44-z2"]) $(id).addEventListener("input", ex44);
$("ex52-n").addEventListener("input", ex52);
$("ex44-plane").addEventListener("click", (ev) => {
  const c = ev.target, r = c.getBoundingClientRect(), s = c.width / 4;
  xstar = [(ev.clientX - r.left - c.width / 2) / s, -(ev.clientY - r.top - c.height / 2) / s];
  ex44();
});
$("ex44-plane").addEventListener("dblclick", () => { xstar = [0, 0]; ex44(); });
conjugate();
ex44();
ex52();
