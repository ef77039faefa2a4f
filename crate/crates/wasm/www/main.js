import init, { berryCurve, zHolonomy, lzScan } from "../pkg/holo_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => parseFloat($(id).value);

function fail(target, e) {
  target.textContent = String(e.message ?? e);
  target.className = "err";
}

// Scatter/line plot with auto-scaled axes. `series` is [{x, y, color, dots}].
function plot(canvas, series, xLabel, yLabel) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height, pad = 40;
  ctx.clearRect(0, 0, w, h);
  const xs = series.flatMap((s) => s.x), ys = series.flatMap((s) => s.y).filter(Number.isFinite);
  let [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  let [y0, y1] = [Math.min(...ys), Math.max(...ys)];
  if (x1 === x0) x1 = x0 + 1;
  if (y1 === y0) { y0 -= 0.5; y1 += 0.5; }
  const px = (x) => pad + ((x - x0) / (x1 - x0)) * (w - 2 * pad);
  const py = (y) => h - pad - ((y - y0) / (y1 - y0)) * (h - 2 * pad);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  ctx.fillStyle = "#444";
  ctx.font = "11px sans-serif";
  ctx.fillText(x0.toPrecision(3), pad, h - pad + 14);
  ctx.fillText(x1.toPrecision(3), w - pad - 24, h - pad + 14);
  ctx.fillText(y0.toPrecision(3), 2, h - pad);
  ctx.fillText(y1.toPrecision(3), 2, pad + 4);
  ctx.fillText(xLabel, w / 2 - 20, h - 8);
  ctx.fillText(yLabel, 2, pad - 10);
  for (const s of series) {
    ctx.strokeStyle = ctx.fillStyle = s.color;
    ctx.beginPath();
    s.x.forEach((x, i) => {
      if (!Number.isFinite(s.y[i])) return;
      if (s.dots) {
        ctx.moveTo(px(x) + 3, py(s.y[i]));
        ctx.arc(px(x), py(s.y[i]), 3, 0, 2 * Math.PI);
      } else if (i === 0) ctx.moveTo(px(x), py(s.y[i]));
      else ctx.lineTo(px(x), py(s.y[i]));
    });
    s.dots ? ctx.fill() : ctx.stroke();
  }
}

function drawBerry() {
  const phi1 = num("bc-phi1");
  $("bc-phi1-val").textContent = phi1.toFixed(3);
  try {
    const c = JSON.parse(berryCurve(num("bc-gamma"), phi1, 200));
    plot($("bc-plot"), [{ x: c.phi2_star, y: c.berry_phase, color: "#1f5fa8" }], "phi2*", "Berry phase");
  } catch (e) {
    fail($("status"), e);
  }
}

function runHolonomy() {
  const out = $("zh-out");
  out.className = "";
  try {
    const v = JSON.parse(zHolonomy(num("zh-gamma"), num("zh-phi1"), num("zh-phi2"), Math.round(num("zh-samples"))));
    const path = v.path;
    plot($("zh-plot"), [{ x: path.map((p) => p[0]), y: path.map((p) => p[1]), color: "#a83a1f" }], "phi1", "phi2");
    out.textContent =
      `closed form    ${v.closed_form.toFixed(9)}\n` +
      `Wilson phase   ${v.wilson_phase.toFixed(9)}\n` +
      `gate distance  ${v.distance.toExponential(3)}\n` +
      `halving change ${v.discretization_error_estimate.toExponential(3)}  (${v.samples} samples)`;
  } catch (e) {
    fail(out, e);
  }
}

function runScan() {
  const out = $("lz-out");
  out.className = "";
  out.textContent = "running...";
  setTimeout(() => {
    try {
      const s = JSON.parse(lzScan(num("lz-gamma"), num("lz-kmin"), num("lz-kmax"), Math.round(num("lz-n"))));
      const x = s.eta_over_gap.map((r) => 1 / (r * s.gap));
      const series = [{ x, y: s.leakage.map(Math.log), color: "#2b8a3e", dots: true }];
      if (s.slope !== null) {
        series.push({ x, y: x.map((t) => s.intercept + s.slope * t), color: "#888" });
      }
      plot($("lz-plot"), series, "1/eta", "ln leakage");
      out.textContent =
        `gap ${s.gap.toFixed(4)}   pi*gap ${s.pi_gap.toFixed(4)}\n` +
        (s.slope === null
          ? "too few points above the leakage floor to fit"
          : `slope ${(-s.slope).toFixed(4)}   R^2 ${s.r_squared.toFixed(4)}`);
    } catch (e) {
      fail(out, e);
    }
  }, 0);
}

await init();
$("status").textContent = "Ready.";
for (const id of ["bc-gamma", "bc-phi1"]) $(id).addEventListener("input", drawBerry);
$("zh-run").addEventListener("click", runHolonomy);
$("lz-run").addEventListener("click", runScan);
drawBerry();
runHolonomy();
