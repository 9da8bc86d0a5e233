// Page wiring: binds the static panels in index.html to the controller and
// re-renders on every state change. All computation stays on the server.

import { Client, isPairResponse } from "./api.js";
import { SteeringController } from "./controller.js";
import { drawMidline, drawPolyline, drawSparkline, fitScale, renderKymogram, snakePoints } from "./draw.js";
import { base64ToBytes, decodePgm } from "./pgm.js";
import { formatWeight, positionToValue, valueToPosition } from "./sliders.js";
import { SteeringState, lineageTraces } from "./state.js";

const client = new Client("");
const controller = new SteeringController(client);

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const kymoCanvas = el<HTMLCanvasElement>("kymo");
const traceCanvas = el<HTMLCanvasElement>("trace");
const banner = el<HTMLDivElement>("banner");
const historyList = el<HTMLUListElement>("history");
const verdictBox = el<HTMLDivElement>("verdict");

// -- synthesize panel ------------------------------------------------------

el<HTMLButtonElement>("synth-run").addEventListener("click", () => {
  const preset = el<HTMLSelectElement>("synth-preset").value;
  const periods = Number(el<HTMLInputElement>("synth-periods").value);
  const seed = Number(el<HTMLInputElement>("synth-seed").value);
  void controller.synthesize({ preset, periods, seed });
});

el<HTMLInputElement>("upload-file").addEventListener("change", (ev) => {
  const input = ev.target as HTMLInputElement;
  const file = input.files?.[0];
  if (file) void controller.upload(file, file.name);
  input.value = "";
});

// -- steering panel --------------------------------------------------------

for (const name of ["alpha", "beta", "gamma"] as const) {
  const slider = el<HTMLInputElement>(`w-${name}`);
  slider.value = String(valueToPosition(1) * 1000);
  slider.addEventListener("input", () => {
    controller.setWeight(name, positionToValue(Number(slider.value) / 1000));
  });
}

el<HTMLInputElement>("midline").addEventListener("change", (ev) => {
  controller.setMidline(Number((ev.target as HTMLInputElement).value));
});
el<HTMLInputElement>("band-halfwidth").addEventListener("change", (ev) => {
  controller.setBandHalfwidth(Number((ev.target as HTMLInputElement).value));
});

el<HTMLButtonElement>("deform-step").addEventListener("click", () => void controller.step());
el<HTMLButtonElement>("deform-run").addEventListener("click", () => void controller.runToConvergence());
banner.addEventListener("click", () => controller.dismissBanner());

for (const name of ["snake", "groundTruth", "trace"] as const) {
  el<HTMLInputElement>(`overlay-${name}`).addEventListener("change", (ev) => {
    controller.setOverlay(name, (ev.target as HTMLInputElement).checked);
  });
}

// -- decide panel ----------------------------------------------------------

el<HTMLButtonElement>("decide-run").addEventListener("click", async () => {
  const text = el<HTMLTextAreaElement>("decide-string").value.trim();
  const eps = Number(el<HTMLInputElement>("decide-eps").value);
  const c = el<HTMLInputElement>("decide-c").value.split(",").map(Number) as [number, number, number];
  try {
    const resp = await client.decide(text, c, eps);
    if (resp.verdict === "accept") {
      verdictBox.innerHTML = `<span class="ok">accept</span> <code>${text}</code>`;
      return;
    }
    // highlight the run named in the violation, when one is named
    const match = resp.violation?.match(/run (\d+)/);
    let marked = `<code>${text}</code>`;
    if (match) {
      const bad = Number(match[1]);
      let offset = 0;
      const parts: string[] = [];
      resp.runs.forEach(([sym, len], i) => {
        const chunk = text.slice(offset, offset + len);
        parts.push(i === bad ? `<mark>${chunk}</mark>` : chunk);
        offset += len;
      });
      parts.push(text.slice(offset));
      marked = `<code>${parts.join("")}</code>`;
    }
    verdictBox.innerHTML = `<span class="bad">reject</span> ${marked}<br><small>${resp.violation ?? ""}</small>`;
  } catch (err) {
    verdictBox.textContent = String(err);
  }
});

// -- rendering -------------------------------------------------------------

function render(state: SteeringState): void {
  banner.textContent = state.banner ?? "";
  banner.style.display = state.banner ? "block" : "none";

  for (const id of ["deform-step", "deform-run", "synth-run"]) {
    el<HTMLButtonElement>(id).disabled = state.pending || (id !== "synth-run" && !state.sessionId);
  }
  for (const name of ["alpha", "beta", "gamma"] as const) {
    el<HTMLSpanElement>(`w-${name}-value`).textContent = formatWeight(state.weights[name]);
  }
  if (state.midline !== null) el<HTMLInputElement>("midline").value = String(state.midline);
  el<HTMLInputElement>("band-halfwidth").value = String(state.bandHalfwidth);

  if (state.imageB64) {
    const img = decodePgm(base64ToBytes(state.imageB64));
    const scale = fitScale(img.width, img.height, 880, 512);
    renderKymogram(kymoCanvas, img, scale);
    const ctx = kymoCanvas.getContext("2d")!;
    if (state.midline !== null) drawMidline(ctx, state.midline, scale, kymoCanvas.width);
    if (state.overlays.groundTruth && state.groundTruth) {
      const upper = state.groundTruth.edges.map(([u], x) => [x, u] as [number, number]);
      const lower = state.groundTruth.edges.map(([, l], x) => [x, l] as [number, number]);
      drawPolyline(ctx, snakePoints(upper, scale), "rgba(255, 158, 100, 0.6)", 1);
      drawPolyline(ctx, snakePoints(lower, scale), "rgba(255, 158, 100, 0.6)", 1);
    }
    if (state.overlays.snake && state.cursor !== null) {
      const r = state.history[state.cursor].response;
      if (isPairResponse(r)) {
        drawPolyline(ctx, snakePoints(r.upper.snake.snaxels, scale), "#9ece6a");
        drawPolyline(ctx, snakePoints(r.lower.snake.snaxels, scale), "#9ece6a");
      } else {
        drawPolyline(ctx, snakePoints(r.snake.snaxels, scale), "#9ece6a");
      }
    }
  }

  drawSparkline(traceCanvas, state.overlays.trace ? lineageTraces(state) : []);

  historyList.innerHTML = "";
  state.history.forEach((entry) => {
    const item = document.createElement("li");
    const r = entry.response;
    const iters = isPairResponse(r) ? r.upper.iterations : r.iterations;
    const converged = isPairResponse(r) ? r.upper.converged && r.lower.converged : r.converged;
    item.textContent =
      `#${entry.id}${entry.parent !== null ? `<-#${entry.parent}` : ""} ` +
      `${entry.stepMode ? "step" : "run"} ${iters} it${converged ? " done" : ""}`;
    if (entry.id === state.cursor) item.classList.add("selected");
    item.addEventListener("click", () => controller.selectHistory(entry.id));
    historyList.appendChild(item);
  });
}

controller.onChange(render);
render(controller.getState());

void client.presets().then((table) => {
  const select = el<HTMLSelectElement>("synth-preset");
  select.innerHTML = "";
  for (const name of Object.keys(table)) {
    const opt = document.createElement("option");
    opt.value = name;
    opt.textContent = name;
    select.appendChild(opt);
  }
});
