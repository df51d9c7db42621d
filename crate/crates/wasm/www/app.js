import init, { kernelProbe, energyDecay, resolventCurve } from "./pkg/fkv_wasm.js";

const $ = (id) => document.getElementById(id);

function common() {
  return {
    model: $("model").value,
    alpha: Number($("alpha").value),
    eta: Number($("eta").value),
    elements: Number($("elements").value),
  };
}

function show(id, text, isError = false) {
  const el = $(id);
  el.textContent = text;
  el.className = isError ? "out err" : "out";
}

// Log-log polyline with decade ticks. `pts` is an interleaved Float64Array.
function plotLogLog(canvas, pts, xlabel, ylabel) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height, pad = 50;
  ctx.clearRect(0, 0, w, h);
  const xs = [], ys = [];
  for (let i = 0; i < pts.length; i += 2) {
    if (pts[i] > 0 && pts[i + 1] > 0) {
      xs.push(Math.log10(pts[i]));
      ys.push(Math.log10(pts[i + 1]));
    }
  }
  if (xs.length < 2) return;
  const x0 = Math.floor(Math.min(...xs)), x1 = Math.ceil(Math.max(...xs));
  const y0 = Math.floor(Math.min(...ys)), y1 = Math.ceil(Math.max(...ys));
  const sx = (x) => pad + (x - x0) / Math.max(x1 - x0, 1e-9) * (w - 2 * pad);
  const sy = (y) => h - pad - (y - y0) / Math.max(y1 - y0, 1e-9) * (h - 2 * pad);

  ctx.strokeStyle = "#ddd";
  ctx.fillStyle = "#555";
  ctx.font = "11px sans-serif";
  for (let d = x0; d <= x1; d++) {
    ctx.beginPath(); ctx.moveTo(sx(d), pad); ctx.lineTo(sx(d), h - pad); ctx.stroke();
    ctx.fillText("1e" + d, sx(d) - 10, h - pad + 14);
  }
  const ystep = Math.max(1, Math.ceil((y1 - y0) / 8));
  for (let d = y0; d <= y1; d += ystep) {
    ctx.beginPath(); ctx.moveTo(pad, sy(d)); ctx.lineTo(w - pad, sy(d)); ctx.stroke();
    ctx.fillText("1e" + d, 4, sy(d) + 4);
  }
  ctx.fillText(xlabel, w / 2, h - 8);
  ctx.fillText(ylabel, 4, 14);

  ctx.strokeStyle = "#1f5fa8";
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  xs.forEach((x, i) => (i ? ctx.lineTo(sx(x), sy(ys[i])) : ctx.moveTo(sx(x), sy(ys[i]))));
  ctx.stroke();
}

// Least-squares slope of log y on log x over the last half of the points.
function tailSlope(pts) {
  const xs = [], ys = [];
  for (let i = 0; i < pts.length; i += 2) {
    if (pts[i] > 0 && pts[i + 1] > 0) { xs.push(Math.log(pts[i])); ys.push(Math.log(pts[i + 1])); }
  }
  const n0 = Math.floor(xs.length / 2), n = xs.length - n0;
  if (n < 2) return NaN;
  let mx = 0, my = 0;
  for (let i = n0; i < xs.length; i++) { mx += xs[i]; my += ys[i]; }
  mx /= n; my /= n;
  let sxy = 0, sxx = 0;
  for (let i = n0; i < xs.length; i++) { sxy += (xs[i] - mx) * (ys[i] - my); sxx += (xs[i] - mx) ** 2; }
  return sxy / sxx;
}

function probe() {
  const { alpha, eta } = common();
  const n = Number($("nxi").value);
  $("nxi-val").textContent = n;
  try {
    const [kappa, exact, approx, err, ximax] = kernelProbe(alpha, eta, n);
    show("probe-out",
      `kappa      ${kappa.toPrecision(10)}\n` +
      `I1 closed  ${exact.toPrecision(12)}\n` +
      `I1 grid    ${approx.toPrecision(12)}\n` +
      `rel. error ${err.toExponential(3)}   (xi_max ${ximax.toExponential(3)})`);
  } catch (e) {
    show("probe-out", String(e.message ?? e), true);
  }
}

function decay() {
  const c = common();
  show("decay-out", "running...");
  setTimeout(() => {
    try {
      const t0 = performance.now();
      const pts = energyDecay(c.model, c.alpha, c.eta, c.elements, Number($("tend").value), Number($("dt").value));
      const last = pts[pts.length - 1];
      show("decay-out",
        `E(T)/E(0) = ${last.toExponential(3)}, tail slope ${tailSlope(pts).toFixed(3)}` +
        `  (${(performance.now() - t0).toFixed(0)} ms)`);
      plotLogLog($("decay-plot"), pts, "t", "E(t)/E(0)");
    } catch (e) {
      show("decay-out", String(e.message ?? e), true);
    }
  }, 0);
}

function resolvent() {
  const c = common();
  show("resolvent-out", "running...");
  setTimeout(() => {
    try {
      const t0 = performance.now();
      const pts = resolventCurve(c.model, c.alpha, c.eta, c.elements,
        Number($("llo").value), Number($("lhi").value), Number($("lcount").value));
      show("resolvent-out",
        `tail slope ${tailSlope(pts).toFixed(3)}  (${(performance.now() - t0).toFixed(0)} ms)`);
      plotLogLog($("resolvent-plot"), pts, "lambda", "||R(i lambda)||");
    } catch (e) {
      show("resolvent-out", String(e.message ?? e), true);
    }
  }, 0);
}

await init();
$("nxi").addEventListener("input", probe);
for (const id of ["alpha", "eta"]) $(id).addEventListener("change", probe);
$("run-decay").addEventListener("click", decay);
$("run-resolvent").addEventListener("click", resolvent);
probe();
