// Session state machine for the preview client.
//
// The client never computes plans locally: every displayed stage list
// comes verbatim from the service's plan document. A config change
// marks the session dirty, which disables replay and export until the
// user applies it (triggering a re-plan).

import type {
  DefaultsDoc, PlanDoc, TransitionConfig, Violation,
} from "./types.js";
import { defaultConfig } from "./types.js";

export interface SessionState {
  pair: { source: unknown; target: unknown } | null;
  plan: PlanDoc | null;
  config: TransitionConfig;
  defaults: DefaultsDoc | null;
  position: number;
  playing: boolean;
  dirty: boolean;
  violations: Violation[];
  notice: string | null;
  effectError: string | null;
}

export function initialState(): SessionState {
  return {
    pair: null,
    plan: null,
    config: defaultConfig(),
    defaults: null,
    position: 0,
    playing: false,
    dirty: false,
    violations: [],
    notice: null,
    effectError: null,
  };
}

export function defaultsLoaded(state: SessionState, defaults: DefaultsDoc): SessionState {
  return { ...state, defaults };
}

export function pairSelected(
  state: SessionState, source: unknown, target: unknown,
): SessionState {
  return {
    ...state,
    pair: { source, target },
    plan: null,
    position: 0,
    playing: false,
    violations: [],
    notice: null,
  };
}

export function planReceived(state: SessionState, plan: PlanDoc): SessionState {
  return {
    ...state,
    plan,
    dirty: false,
    position: 0,
    playing: false,
    violations: [],
    effectError: null,
    notice: plan.stages.length === 0 ? "no changes detected" : null,
  };
}

export function planFailed(state: SessionState, violations: Violation[]): SessionState {
  const effectViolation = violations.find((v) => v.code === "UnsupportedCombination");
  return {
    ...state,
    plan: null,
    playing: false,
    violations,
    effectError: effectViolation ? effectViolation.message : null,
  };
}

export function configChanged(
  state: SessionState, patch: Partial<TransitionConfig>,
): SessionState {
  return {
    ...state,
    config: { ...state.config, ...patch, effects: { ...state.config.effects, ...(patch.effects ?? {}) } },
    dirty: true,
    playing: false,
    notice: null,
  };
}

/** Select an effect override; invalid choices surface inline and leave
 *  the config untouched. */
export function effectSelected(
  state: SessionState, kind: string, effect: string,
): SessionState {
  const allowed = state.defaults?.effects[kind] ?? [];
  if (!allowed.includes(effect)) {
    return {
      ...state,
      effectError: `UnsupportedCombination: effect '${effect}' not allowed for ${kind}`,
    };
  }
  return {
    ...configChanged(state, { effects: { [kind]: effect } }),
    effectError: null,
  };
}

export function canReplay(state: SessionState): boolean {
  return state.plan !== null && !state.dirty;
}

export function canExport(state: SessionState): { ok: boolean; reason: string | null } {
  if (state.plan === null) return { ok: false, reason: "load a chart pair first" };
  if (state.dirty) return { ok: false, reason: "apply first" };
  return { ok: true, reason: null };
}

export function scrubbed(state: SessionState, t: number): SessionState {
  const total = state.plan?.total ?? 0;
  return {
    ...state,
    position: Math.min(Math.max(t, 0), total),
    playing: false,
  };
}

export function ticked(state: SessionState, dt: number): SessionState {
  if (!state.playing || !state.plan) return state;
  const next = state.position + dt;
  if (next >= state.plan.total) {
    return { ...state, position: state.plan.total, playing: false };
  }
  return { ...state, position: next };
}

export function playToggled(state: SessionState): SessionState {
  if (!canReplay(state)) return state;
  if (!state.playing && state.plan && state.position >= state.plan.total) {
    return { ...state, playing: true, position: 0 };
  }
  return { ...state, playing: !state.playing };
}

/** Scrubber segments normalized to [0,1], one per stage, plus standing gaps. */
export function scrubberSegments(
  plan: PlanDoc,
): { id: string; from: number; to: number }[] {
  if (plan.total <= 0) return [];
  return plan.stages.map((stage) => ({
    id: stage.id,
    from: stage.start / plan.total,
    to: (stage.start + stage.duration) / plan.total,
  }));
}
