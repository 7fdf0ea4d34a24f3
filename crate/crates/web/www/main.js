import init, { generateCase, scenarioSvg, Flight } from "./pkg/uavsim_web.js";

const $ = (id) => document.getElementById(id);
const depth = $("depth");
const ctx = depth.getContext("2d");

let caseJson = null;
let flight = null;
let running = false;

function showStatus(s) {
  const fmt = (v, n) => (v == null ? "-" : v.toFixed(n));
  $("status").textContent =
    `t ${fmt(s.t, 1)} s   steps ${s.steps}\n` +
    `pos (${fmt(s.x, 2)}, ${fmt(s.y, 2)})  yaw ${fmt((s.yaw * 180) / Math.PI, 1)} deg\n` +
    `min distance ${fmt(s.min_distance, 3)} m\n` +
    (s.finished ? `${s.outcome} -> ${s.verdict}` : "flying");
}

function drawDepth() {
  const px = flight.depthRgba(depth.width, depth.height);
  ctx.putImageData(new ImageData(new Uint8ClampedArray(px), depth.width, depth.height), 0, 0);
}

function refresh() {
  $("plot").innerHTML = flight.svg();
  drawDepth();
  showStatus(JSON.parse(flight.status()));
}

function generate() {
  running = false;
  try {
    caseJson = generateCase(BigInt($("seed").value || 0), Number($("index").value || 0));
  } catch (e) {
    $("status").textContent = String(e);
    return;
  }
  $("case").textContent = caseJson;
  $("plot").innerHTML = scenarioSvg(caseJson);
  flight = new Flight(caseJson);
  drawDepth();
  showStatus(JSON.parse(flight.status()));
  $("fly").disabled = false;
  $("pause").disabled = true;
}

function frame() {
  if (!running) return;
  const done = flight.advance(Math.max(1, Number($("speed").value) || 1));
  refresh();
  if (done) {
    running = false;
    $("fly").disabled = true;
    $("pause").disabled = true;
    return;
  }
  requestAnimationFrame(frame);
}

await init();
$("generate").onclick = generate;
$("fly").onclick = () => {
  running = true;
  $("pause").disabled = false;
  requestAnimationFrame(frame);
};
$("pause").onclick = () => {
  running = false;
  $("pause").disabled = true;
};
generate();
