// DOM wiring for the preview client: load a chart pair, preview the
// static endpoints, play/scrub the generated transition, adjust the
// configuration, and export.

import { ServiceClient, ServiceError } from "./api.js";
import { Player } from "./player.js";
import { sampleMarks } from "./sampler.js";
import {
  SessionState, canExport, canReplay, configChanged, defaultsLoaded,
  effectSelected, initialState, pairSelected, planFailed, planReceived,
  playToggled, scrubbed, scrubberSegments, ticked,
} from "./state.js";
import { renderScene } from "./svg.js";
import type { PlanDoc } from "./types.js";

const client = new ServiceClient("");
let state: SessionState = initialState();
let pendingPlan = 0;

const el = (id: string) => document.getElementById(id)!;

const player = new Player((dt) => {
  state = ticked(state, dt);
  renderCanvas();
  renderScrubber();
  if (!state.playing) player.stop();
});

function setState(next: SessionState): void {
  state = next;
  render();
}

async function loadDefaults(): Promise<void> {
  try {
    setState(defaultsLoaded(state, await client.defaults()));
  } catch {
    // service offline: the panel shows a hint when planning fails
  }
}

async function requestPlan(): Promise<void> {
  if (!state.pair) return;
  const ticket = ++pendingPlan;
  try {
    const plan = await client.plan(
      state.pair.source, state.pair.target, state.config,
    );
    if (ticket === pendingPlan) setState(planReceived(state, plan));
  } catch (err) {
    if (ticket !== pendingPlan) return;
    if (err instanceof ServiceError) {
      setState(planFailed(state, err.violations));
    } else {
      setState(planFailed(state, [
        { code: "ServiceUnavailable", message: String(err), path: "" },
      ]));
    }
  }
}

async function onLoadPair(): Promise<void> {
  const sourceInput = el("source-file") as HTMLInputElement;
  const targetInput = el("target-file") as HTMLInputElement;
  const sourceFile = sourceInput.files?.[0];
  const targetFile = targetInput.files?.[0];
  if (!sourceFile || !targetFile) return;
  const [source, target] = await Promise.all([
    sourceFile.text().then(JSON.parse),
    targetFile.text().then(JSON.parse),
  ]);
  setState(pairSelected(state, source, target));
  await requestPlan();
}

function sceneSvg(plan: PlanDoc, t: number): string {
  const timeline = plan.timeline!;
  const marks = sampleMarks(timeline, t);
  return renderScene(marks, timeline.canvas.width, timeline.canvas.height);
}

function renderPreviews(): void {
  const source = el("preview-source");
  const target = el("preview-target");
  if (state.plan?.timeline) {
    source.innerHTML = sceneSvg(state.plan, 0);
    target.innerHTML = sceneSvg(state.plan, state.plan.total);
  } else {
    source.innerHTML = "";
    target.innerHTML = "";
  }
}

function renderCanvas(): void {
  const canvas = el("animation-canvas");
  canvas.innerHTML = state.plan?.timeline
    ? sceneSvg(state.plan, state.position)
    : "";
}

function renderScrubber(): void {
  const scrubber = el("scrubber") as HTMLInputElement;
  const total = state.plan?.total ?? 0;
  scrubber.max = String(total);
  scrubber.value = String(state.position);
  scrubber.disabled = !canReplay(state);
  const markers = el("stage-markers");
  if (!state.plan) {
    markers.innerHTML = "";
    return;
  }
  markers.innerHTML = scrubberSegments(state.plan)
    .map(
      (segment) =>
        `<div class="stage-segment" data-stage="${segment.id}" ` +
        `style="left:${(segment.from * 100).toFixed(2)}%;` +
        `width:${((segment.to - segment.from) * 100).toFixed(2)}%"></div>`,
    )
    .join("");
}

function renderStages(): void {
  const list = el("stage-list");
  if (!state.plan) {
    list.innerHTML = "";
    return;
  }
  list.innerHTML = state.plan.stages
    .map(
      (stage) =>
        `<li><code>${stage.id}</code> ${stage.kindLabels.join(" + ")} ` +
        `<small>${stage.duration} ms</small></li>`,
    )
    .join("");
}

function renderEffectControls(): void {
  const panel = el("effect-controls");
  if (!state.defaults) {
    panel.innerHTML = "";
    return;
  }
  const kinds = Object.keys(state.defaults.effects).sort();
  panel.innerHTML = kinds
    .map((kind) => {
      const options = state.defaults!.effects[kind]
        .map((eff) => {
          const selected = state.config.effects[kind] === eff ? " selected" : "";
          return `<option value="${eff}"${selected}>${eff}</option>`;
        })
        .join("");
      return (
        `<label>${kind} <select data-kind="${kind}">` +
        `<option value="">default</option>${options}</select></label>`
      );
    })
    .join("");
  panel.querySelectorAll("select").forEach((select) => {
    select.addEventListener("change", () => {
      const kind = select.getAttribute("data-kind")!;
      const effect = (select as HTMLSelectElement).value;
      if (effect) setState(effectSelected(state, kind, effect));
    });
  });
}

function renderMessages(): void {
  el("violations").innerHTML = state.violations
    .map((v) => `<li><code>${v.code}</code> ${v.path} ${v.message}</li>`)
    .join("");
  el("notice").textContent = state.notice ?? "";
  el("effect-error").textContent = state.effectError ?? "";
  const exportState = canExport(state);
  el("export-notice").textContent = exportState.reason ?? "";
  (el("play") as HTMLButtonElement).disabled = !canReplay(state);
  (el("apply") as HTMLButtonElement).disabled = !state.dirty || !state.pair;
  (el("export-frames") as HTMLButtonElement).disabled = !exportState.ok;
  (el("export-gif") as HTMLButtonElement).disabled = !exportState.ok;
}

function render(): void {
  renderPreviews();
  renderCanvas();
  renderScrubber();
  renderStages();
  renderEffectControls();
  renderMessages();
}

async function onExport(format: string): Promise<void> {
  if (!state.pair || !canExport(state).ok) return;
  try {
    const blob = await client.exportArchive(
      state.pair.source, state.pair.target, state.config, format, 30,
    );
    const url = URL.createObjectURL(blob);
    const link = document.createElement("a");
    link.href = url;
    link.download = format === "planOnly" ? "plan.zip" : "transition.zip";
    link.click();
    URL.revokeObjectURL(url);
  } catch (err) {
    if (err instanceof ServiceError) setState(planFailed(state, err.violations));
  }
}

export function boot(): void {
  el("load").addEventListener("click", () => void onLoadPair());
  el("apply").addEventListener("click", () => void requestPlan());
  el("play").addEventListener("click", () => {
    setState(playToggled(state));
    if (state.playing) player.start();
    else player.stop();
  });
  el("replay").addEventListener("click", () => {
    setState(scrubbed(state, 0));
    setState(playToggled(state));
    if (state.playing) player.start();
  });
  (el("scrubber") as HTMLInputElement).addEventListener("input", (event) => {
    const value = Number((event.target as HTMLInputElement).value);
    setState(scrubbed(state, value));
  });
  el("timing-mode").addEventListener("change", (event) => {
    const mode = (event.target as HTMLSelectElement).value;
    const total = Number((el("fixed-total") as HTMLInputElement).value) || 2000;
    setState(configChanged(state, {
      timing: mode === "fixed" ? `fixed:${total}` : "animation",
    }));
  });
  el("step-ms").addEventListener("change", (event) => {
    setState(configChanged(state, {
      stepMs: Number((event.target as HTMLInputElement).value) || 500,
    }));
  });
  el("easing").addEventListener("change", (event) => {
    setState(configChanged(state, {
      easing: (event.target as HTMLSelectElement).value as "linear" | "in-out",
    }));
  });
  el("export-frames").addEventListener("click", () => void onExport("frames"));
  el("export-gif").addEventListener("click", () => void onExport("gif"));
  void loadDefaults();
  render();
}

if (typeof document !== "undefined" && document.getElementById("load")) {
  boot();
}
