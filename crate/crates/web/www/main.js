import init, { ring_summary, census, compare } from "./pkg/stdet_web.js";

const $ = (id) => document.getElementById(id);

function call(f, ...args) {
  try {
    return JSON.parse(f(...args));
  } catch (e) {
    throw new Error(typeof e === "string" ? e : e.message);
  }
}

function show(target, render) {
  try {
    target.innerHTML = render();
  } catch (e) {
    target.innerHTML = `<p class="error">${e.message}</p>`;
  }
}

function table(head, rows, cls = () => "") {
  const th = head.map((h) => `<th>${h}</th>`).join("");
  const body = rows.map((r) => `<tr class="${cls(r)}">${r.map((c) => `<td>${c ?? ""}</td>`).join("")}</tr>`);
  return `<table><tr>${th}</tr>${body.join("")}</table>`;
}

function inspect() {
  show($("ring-out"), () => {
    const r = call(ring_summary, $("desc").value);
    return table(["ring", "|R|", "q", "e", "|U|", "|Q|", "|N|", "γ"],
      [[r.ring, r.size, r.q, r.e, r.units, r.squares, r.nonunits, r.gamma]]);
  });
}

// bar heights on a log scale: counts span many orders of magnitude
function draw(counts) {
  const canvas = $("chart");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const logs = counts.map((c) => Math.log10(1 + Number(c.count)));
  const top = Math.max(...logs, 1);
  const w = canvas.width / counts.length;
  const colors = { "qr-unit": "#3a7bd5", "nqr-unit": "#e07b39", "non-unit": "#888" };
  counts.forEach((c, i) => {
    const h = (logs[i] / top) * (canvas.height - 30);
    ctx.fillStyle = colors[c.class] ?? "#888";
    ctx.fillRect(i * w + 1, canvas.height - 20 - h, Math.max(w - 2, 1), h);
    if (counts.length <= 32) {
      ctx.fillStyle = "#222";
      ctx.font = "11px system-ui";
      ctx.fillText(c.det, i * w + 2, canvas.height - 6);
    }
  });
}

function runCensus() {
  show($("census-out"), () => {
    const c = call(census, $("desc").value, Number($("n").value));
    draw(c.counts);
    const summary = table(["total", "units", "zero", "layers", "character sum"],
      [[c.total, c.ist, c.zero, c.layers.join(" / "), c.character_sum ?? "—"]]);
    const rows = c.counts.map((x) => [x.det, x.valuation, x.class, x.count]);
    return summary + table(["det", "valuation", "class", "count"], rows);
  });
}

function runCompare() {
  show($("compare-out"), () => {
    const c = call(compare, $("desc").value, Number($("n").value), $("variant").value);
    const rows = c.rows.map((r) => [r.quantity, r.formula, r.census]);
    return table(["quantity", "formula", "census"], rows, (r) => (r[1] === r[2] ? "" : "mismatch"));
  });
}

await init();
$("inspect").onclick = inspect;
$("run").onclick = runCensus;
$("compare").onclick = runCompare;
inspect();
runCensus();
