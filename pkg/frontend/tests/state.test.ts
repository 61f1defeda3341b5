import { describe, expect, it } from "vitest";

import plan from "./fixtures/composite-plan.json";
import defaults from "./fixtures/defaults.json";
import pair from "./fixtures/composite-pair.json";
import {
  canExport, canReplay, configChanged, defaultsLoaded, effectSelected,
  initialState, pairSelected, planFailed, planReceived, playToggled,
  scrubbed, scrubberSegments, ticked,
} from "../src/state.js";
import type { DefaultsDoc, PlanDoc } from "../src/types.js";

const planDoc = plan as unknown as PlanDoc;
const defaultsDoc = defaults as unknown as DefaultsDoc;

function loadedState() {
  let state = defaultsLoaded(initialState(), defaultsDoc);
  state = pairSelected(state, pair.source, pair.target);
  return planReceived(state, planDoc);
}

describe("loading a pair", () => {
  it("enables playback with the service's stage list verbatim", () => {
    const state = loadedState();
    expect(canReplay(state)).toBe(true);
    expect(state.plan!.stages.map((s) => s.id)).toEqual(["s0", "s1", "s2", "s3"]);
    expect(state.plan!.stages.map((s) => s.kindLabels[0])).toEqual([
      "RemoveSeries", "AddDataItem", "AddDimension", "ChangeTitle",
    ]);
  });

  it("shows a 4+ stage scrubber for the composite pair", () => {
    const segments = scrubberSegments(loadedState().plan!);
    expect(segments.length).toBeGreaterThanOrEqual(4);
    for (const segment of segments) {
      expect(segment.from).toBeGreaterThanOrEqual(0);
      expect(segment.to).toBeLessThanOrEqual(1);
      expect(segment.to).toBeGreaterThan(segment.from);
    }
  });

  it("surfaces violations and disables playback on failure", () => {
    let state = pairSelected(initialState(), {}, {});
    state = planFailed(state, [
      { code: "SchemaViolation", message: "missing field 'type'", path: "source:chart" },
    ]);
    expect(state.plan).toBeNull();
    expect(canReplay(state)).toBe(false);
    expect(state.violations).toHaveLength(1);
  });

  it("notes an empty transition for identical charts", () => {
    const empty = { ...planDoc, stages: [], total: 0 } as PlanDoc;
    const state = planReceived(pairSelected(initialState(), {}, {}), empty);
    expect(state.notice).toBe("no changes detected");
  });
});

describe("configuration", () => {
  it("marks the session dirty until the plan is re-applied", () => {
    let state = loadedState();
    state = configChanged(state, { easing: "in-out" });
    expect(state.dirty).toBe(true);
    expect(canReplay(state)).toBe(false);
    expect(canExport(state)).toEqual({ ok: false, reason: "apply first" });
    state = planReceived(state, planDoc);
    expect(state.dirty).toBe(false);
    expect(canReplay(state)).toBe(true);
  });

  it("rejects an effect outside the allowed set inline", () => {
    let state = loadedState();
    state = effectSelected(state, "Sort", "fadeIn");
    expect(state.effectError).toContain("UnsupportedCombination");
    expect(state.config.effects["Sort"]).toBeUndefined();
    expect(state.dirty).toBe(false);
  });

  it("accepts an allowed effect and dirties the session", () => {
    let state = loadedState();
    state = effectSelected(state, "AddDataItem", "fadeIn");
    expect(state.effectError).toBeNull();
    expect(state.config.effects["AddDataItem"]).toBe("fadeIn");
    expect(state.dirty).toBe(true);
  });

  it("surfaces a service-side unsupported combination inline", () => {
    let state = loadedState();
    state = planFailed(state, [{
      code: "UnsupportedCombination",
      message: "Sort is only supported on bar and pie charts, not scatter",
      path: "",
    }]);
    expect(state.effectError).toContain("Sort is only supported");
  });
});

describe("playback position", () => {
  it("clamps scrubbing into [0, total]", () => {
    let state = loadedState();
    state = scrubbed(state, -50);
    expect(state.position).toBe(0);
    state = scrubbed(state, planDoc.total + 500);
    expect(state.position).toBe(planDoc.total);
  });

  it("advances on ticks and stops at the end", () => {
    let state = playToggled(loadedState());
    expect(state.playing).toBe(true);
    state = ticked(state, 700);
    expect(state.position).toBe(700);
    state = ticked(state, planDoc.total);
    expect(state.position).toBe(planDoc.total);
    expect(state.playing).toBe(false);
  });

  it("replays from the start after finishing", () => {
    let state = loadedState();
    state = scrubbed(state, planDoc.total);
    state = playToggled(state);
    expect(state.playing).toBe(true);
    expect(state.position).toBe(0);
  });

  it("does not play while dirty", () => {
    let state = configChanged(loadedState(), { stepMs: 300 });
    state = playToggled(state);
    expect(state.playing).toBe(false);
  });
});
