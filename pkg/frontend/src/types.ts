export const NUM_LANDMARKS = 60;

export type Point = [number, number];
export type Landmarks = (Point | null)[];

export type TaskStatus =
  | "unlabeled"
  | "single-labeled"
  | "double-labeled"
  | "flagged"
  | "merged"
  | "completed";

export interface TaskSummary {
  id: string;
  status: TaskStatus;
  version: number;
  labelers: string[];
  flags: string[];
}

export interface CropInfo {
  canvas: number;
  scale: number;
  tx: number;
  ty: number;
}

export interface TaskDetail extends TaskSummary {
  bbox: [number, number, number, number];
  crop: CropInfo;
  annotations: Record<string, Landmarks>;
  merged: Landmarks | null;
  completed: Landmarks | null;
}

export interface DisagreementReport {
  tolerance: number;
  flagged: number[];
  presence_mismatches: number[];
  distances: Record<string, number>;
}

/** Canonical index layout: [start, stop) per group. */
export const GROUPS = {
  chin: [0, 17],
  leftEyebrow: [17, 22],
  rightEyebrow: [22, 27],
  nose: [27, 28],
  leftEye: [28, 38],
  leftPupil: [38, 39],
  rightEye: [39, 49],
  rightPupil: [49, 50],
  mouth: [50, 60],
} as const;
