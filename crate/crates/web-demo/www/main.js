import init, { Demo, sweep_svg } from "./pkg/rspose_web.js";

const $ = (id) => document.getElementById(id);
let demo = null;

function paint(id, rgba, side) {
  const c = $(id);
  c.width = side;
  c.height = side;
  c.getContext("2d").putImageData(new ImageData(new Uint8ClampedArray(rgba), side, side), 0, 0);
}

function guard(f) {
  return () => {
    $("status").textContent = "";
    try {
      f();
    } catch (e) {
      $("status").textContent = String(e);
    }
  };
}

function showValues() {
  for (const id of ["speed", "rot", "phi"]) $(`${id}-v`).textContent = $(id).value;
}

const render = guard(() => {
  demo?.free();
  demo = new Demo(Number($("seed").value), Number($("speed").value), Number($("rot").value), Number($("phi").value));
  const n = demo.size();
  paint("rs", demo.rolling_rgba(), n);
  paint("gs", demo.global_rgba(), n);
  $("rmse").textContent = "";
});

const correct = guard(() => {
  if (!demo) render();
  demo.correct($("fill").checked);
  const n = demo.size();
  paint("fixed", demo.corrected_rgba(), n);
  paint("ov-before", demo.overlay_before_rgba(), n);
  paint("ov-after", demo.overlay_after_rgba(), n);
  $("rmse").textContent = `RMSE ${demo.rmse_before().toFixed(2)} → ${demo.rmse_after().toFixed(2)}`;
});

const sweep = guard(() => {
  $("chart").innerHTML = sweep_svg($("var").value, Number($("trials").value), Number($("seed").value));
});

await init();
$("status").textContent = "";
for (const id of ["speed", "rot", "phi"]) $(id).addEventListener("input", showValues);
$("render").addEventListener("click", render);
$("correct").addEventListener("click", correct);
$("sweep").addEventListener("click", sweep);
showValues();
render();
