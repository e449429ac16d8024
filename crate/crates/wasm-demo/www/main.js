import init, { costCurve, optimize, simulate } from "./pkg/stator_wasm.js";

const $ = (id) => document.getElementById(id);
const fmt = (x) => Number(x).toPrecision(6);

function call(out, f) {
  try {
    return JSON.parse(f());
  } catch (e) {
    out.innerHTML = `<p class="err">${e.message ?? e}</p>`;
    return null;
  }
}

function plot(data) {
  const c = $("curve");
  const g = c.getContext("2d");
  const pad = { l: 50, r: 10, t: 10, b: 30 };
  const w = c.width - pad.l - pad.r;
  const h = c.height - pad.t - pad.b;
  const lx = data.alpha.map(Math.log10);
  const [x0, x1] = [Math.min(...lx), Math.max(...lx)];
  const ys = data.optimized_ratio.concat(data.cdkl_ratio);
  const [y0, y1] = [Math.floor(Math.min(...ys)), Math.ceil(Math.max(...ys))];
  const px = (x) => pad.l + ((x - x0) / (x1 - x0)) * w;
  const py = (y) => pad.t + (1 - (y - y0) / (y1 - y0)) * h;

  g.clearRect(0, 0, c.width, c.height);
  g.strokeStyle = "#999";
  g.fillStyle = "#444";
  g.font = "12px sans-serif";
  g.strokeRect(pad.l, pad.t, w, h);
  for (let e = Math.ceil(x0); e <= x1; e++) g.fillText(`1e${e}`, px(e) - 12, c.height - 10);
  for (let y = y0; y <= y1; y += 0.5) g.fillText(y.toFixed(1), 8, py(y) + 4);

  const line = (vals, color) => {
    g.strokeStyle = color;
    g.beginPath();
    vals.forEach((v, i) => (i ? g.lineTo : g.moveTo).call(g, px(lx[i]), py(v)));
    g.stroke();
  };
  line(data.cdkl_ratio, "#c33");
  line(data.optimized_ratio, "#36c");
  g.fillStyle = "#c33";
  g.fillText("dyadic", pad.l + 10, pad.t + 16);
  g.fillStyle = "#36c";
  g.fillText("optimized", pad.l + 10, pad.t + 32);
}

function table(head, rows) {
  const th = head.map((x) => `<th>${x}</th>`).join("");
  const tr = rows.map((r) => `<tr>${r.map((x) => `<td>${x}</td>`).join("")}</tr>`).join("");
  return `<table><tr>${th}</tr>${tr}</table>`;
}

$("plot").onclick = () => {
  const d = call($("status"), () => costCurve(Number($("points").value)));
  if (d) plot(d);
};

$("optimize").onclick = () => {
  const out = $("schedule");
  const d = call(out, () => optimize(Number($("opt-alpha").value)));
  if (!d) return;
  out.innerHTML =
    `<p>expected ebits ${fmt(d.expected_ebits)} (dyadic ${fmt(d.cdkl_ebits)})</p>` +
    table(
      ["stage", "α", "β", "γ", "kind", "reach", "ebits"],
      d.stages.map((s) => [s.index, fmt(s.alpha), fmt(s.beta), fmt(s.gamma), s.kind, fmt(s.reach_probability), fmt(s.ebits)]),
    );
};

$("simulate").onclick = () => {
  const out = $("runs");
  const d = call(out, () =>
    simulate(Number($("sim-alpha").value), Number($("sim-parties").value), Number($("sim-runs").value), BigInt($("sim-seed").value)),
  );
  if (!d) return;
  out.innerHTML =
    `<p>mean ebits ${fmt(d.mean_ebits)} ± ${fmt(d.standard_error)}, analytic ${fmt(d.analytic_ebits)}, ` +
    `max distance to target ${Number(d.max_distance).toExponential(2)}</p>` +
    table(
      ["stages used", "runs"],
      d.stages_used.map((n, k) => [k, n]).filter(([, n]) => n > 0),
    );
};

await init();
$("status").textContent = "Building cost tables…";
setTimeout(() => {
  $("plot").onclick();
  $("status").textContent = "Ready.";
}, 0);
