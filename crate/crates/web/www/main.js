import init, { circle_view, flow_view, family_view } from "./pkg/cseta_web.js";

const $ = (id) => document.getElementById(id);

function parseComplex(s) {
  const t = s.replace(/\s+/g, "");
  const num = (x) => {
    if (x === "" || x === "+") return 1;
    if (x === "-") return -1;
    if (!/^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$/.test(x)) throw new Error(`cannot parse "${s}"`);
    return parseFloat(x);
  };
  if (!t.endsWith("i")) return [num(t === "" ? "x" : t), 0];
  const body = t.slice(0, -1);
  let cut = 0;
  for (let k = body.length - 1; k > 0; k--) {
    if ((body[k] === "+" || body[k] === "-") && !/[eE]/.test(body[k - 1])) { cut = k; break; }
  }
  return cut ? [num(body.slice(0, cut)), num(body.slice(cut))] : [0, num(body)];
}

function parseList(s) {
  const pairs = s.split(",").filter((x) => x.trim()).map(parseComplex);
  return [Float64Array.from(pairs.map((p) => p[0])), Float64Array.from(pairs.map((p) => p[1]))];
}

function frame(canvas, xs, ys) {
  const ctx = canvas.getContext("2d");
  const pad = 30;
  const [x0, x1] = extent(xs);
  const [y0, y1] = extent(ys);
  const sx = (x) => pad + ((x - x0) / (x1 - x0)) * (canvas.width - 2 * pad);
  const sy = (y) => canvas.height - pad - ((y - y0) / (y1 - y0)) * (canvas.height - 2 * pad);
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.strokeStyle = "#aaa";
  ctx.fillStyle = "#555";
  ctx.font = "11px sans-serif";
  ctx.fillText(`${x0.toFixed(2)} .. ${x1.toFixed(2)}`, pad, canvas.height - 8);
  ctx.fillText(`${y0.toFixed(2)} .. ${y1.toFixed(2)}`, 4, 12);
  return { ctx, sx, sy, x0, x1, y0, y1 };
}

function extent(v) {
  let lo = Math.min(...v), hi = Math.max(...v);
  if (!isFinite(lo)) { lo = -1; hi = 1; }
  if (hi - lo < 1e-9) { lo -= 1; hi += 1; }
  const m = 0.05 * (hi - lo);
  return [lo - m, hi + m];
}

function axisLine(f, vertical, at) {
  const { ctx, sx, sy, x0, x1, y0, y1 } = f;
  ctx.beginPath();
  if (vertical) { ctx.moveTo(sx(at), sy(y0)); ctx.lineTo(sx(at), sy(y1)); }
  else { ctx.moveTo(sx(x0), sy(at)); ctx.lineTo(sx(x1), sy(at)); }
  ctx.stroke();
}

function show(id, f) {
  try { $(id).textContent = f(); $(id).className = ""; }
  catch (e) { $(id).textContent = String(e.message ?? e); $(id).className = "err"; }
}

function runSpectrum() {
  show("spectrum-out", () => {
    const [re, im] = parseList($("mu").value);
    const v = JSON.parse(circle_view(re, im, Number($("cutoff").value)));
    const f = frame($("spectrum"), v.spectrum.map((p) => p[0]).concat([0]), v.spectrum.map((p) => p[1]).concat([0]));
    axisLine(f, true, 0);
    axisLine(f, false, 0);
    f.ctx.fillStyle = "#1f5fbf";
    for (const [x, y] of v.spectrum) {
      f.ctx.beginPath();
      f.ctx.arc(f.sx(x), f.sy(y), 3, 0, 2 * Math.PI);
      f.ctx.fill();
    }
    return [
      `eta      = ${v.eta[0].toFixed(10)} ${v.eta[1] >= 0 ? "+" : "-"} ${Math.abs(v.eta[1]).toFixed(10)} i`,
      `eta bar  = ${v.reduced[0].toFixed(10)} ${v.reduced[1] >= 0 ? "+" : "-"} ${Math.abs(v.reduced[1]).toFixed(10)} i`,
      `dim ker  = ${v.kernel_dim}`,
      `m_minus  = ${v.m_minus}`,
      `eta_BK   = ${v.eta_bk[0].toFixed(10)} ${v.eta_bk[1] >= 0 ? "+" : "-"} ${Math.abs(v.eta_bk[1]).toFixed(10)} i`,
    ].join("\n");
  });
}

function runFlow() {
  show("flow-out", () => {
    const [r0, i0] = parseList($("mu0").value);
    const [r1, i1] = parseList($("mu1").value);
    const v = JSON.parse(flow_view(r0, i0, r1, i1, Number($("flow-cutoff").value)));
    const all = v.tracks.flat();
    const f = frame($("flow"), v.grid, all.map((p) => p[0]).concat([0]));
    axisLine(f, false, 0);
    v.tracks.forEach((tr, k) => {
      f.ctx.strokeStyle = `hsl(${(k * 47) % 360} 60% 45%)`;
      f.ctx.beginPath();
      tr.forEach(([x], i) => (i ? f.ctx.lineTo : f.ctx.moveTo).call(f.ctx, f.sx(v.grid[i]), f.sy(x)));
      f.ctx.stroke();
    });
    const lhs = [v.eta1[0] - v.eta0[0], v.eta1[1] - v.eta0[1]];
    const rhs = [v.sf + v.cs[0], v.cs[1]];
    return [
      `Re of tracks plotted against t; the horizontal line is Re = 0`,
      `spectral flow = ${v.sf}  (${v.to_nonnegative} up, ${v.to_negative} down)`,
      `eta1 - eta0   = ${lhs[0].toFixed(12)} + ${lhs[1].toFixed(12)} i`,
      `sf + CS       = ${rhs[0].toFixed(12)} + ${rhs[1].toFixed(12)} i`,
    ].join("\n");
  });
}

function runFamily() {
  show("family-out", () => {
    const a = parseComplex($("fam0").value);
    const b = parseComplex($("fam1").value);
    const v = JSON.parse(family_view(a[0], a[1], b[0], b[1], 256));
    const ys = v.reduced.map((p) => p[0]).concat(v.eta_bk.map((p) => p[0]));
    const f = frame($("family"), v.t, ys);
    const line = (vals, colour) => {
      f.ctx.strokeStyle = colour;
      f.ctx.beginPath();
      vals.forEach((p, i) => (i ? f.ctx.lineTo : f.ctx.moveTo).call(f.ctx, f.sx(v.t[i]), f.sy(p[0])));
      f.ctx.stroke();
    };
    line(v.reduced, "#1f5fbf");
    line(v.eta_bk, "#c0392b");
    const jumps = v.m_minus.map((m, i) => (i && m !== v.m_minus[i - 1] ? `t=${v.t[i].toFixed(4)}: ${v.m_minus[i - 1]} -> ${m}` : null)).filter(Boolean);
    return [`blue: Re eta bar, red: Re eta_BK`, `m_minus changes: ${jumps.join(", ") || "none"}`].join("\n");
  });
}

await init();
$("run-spectrum").onclick = runSpectrum;
$("run-flow").onclick = runFlow;
$("run-family").onclick = runFamily;
runSpectrum();
runFlow();
runFamily();
