// Service document shapes (mirroring the HTTP API's JSON).

export interface Violation {
  code: string;
  message: string;
  path: string;
}

export interface StageDoc {
  id: string;
  unitIds: string[];
  kindLabels: string[];
  start: number;
  duration: number;
  standingBefore: number;
  easing: string;
  effects: Record<string, string>;
  steps: number;
}

export interface UnitDoc {
  id: string;
  kind: string;
  payload: Record<string, unknown>;
  dependsOn?: string;
}

export interface Geom {
  [key: string]: number | string | number[][] | undefined;
}

export interface MarkDoc {
  id: string;
  shape: string;
  geom: Geom;
  fill: string;
  opacity: number;
  layer: string;
}

export interface SceneDoc {
  chartType: string;
  marks: MarkDoc[];
}

export interface Keyframe {
  t: number;
  shape: string;
  geom: Geom;
  fill: string;
  opacity: number;
}

export interface TrackDoc {
  layer: string;
  keyframes: Keyframe[];
}

export interface TimelineDoc {
  total: number;
  easing: string;
  canvas: { width: number; height: number };
  stages: { id: string; start: number; end: number }[];
  tracks: Record<string, TrackDoc>;
}

export interface PlanDoc {
  stages: StageDoc[];
  total: number;
  config: Record<string, unknown>;
  units: UnitDoc[];
  timeline?: TimelineDoc;
  sourceScene?: SceneDoc;
  targetScene?: SceneDoc;
}

export interface DefaultsDoc {
  effects: Record<string, string[]>;
  morphPlans: Record<string, string[]>;
  easings: string[];
  formats: string[];
  priorityRows: { name: string; frequency: number }[];
}

export interface TransitionConfig {
  timing: string; // "animation" | "fixed:<ms>"
  stepMs: number;
  easing: "linear" | "in-out";
  effects: Record<string, string>;
}

export const defaultConfig = (): TransitionConfig => ({
  timing: "animation",
  stepMs: 500,
  easing: "linear",
  effects: {},
});
