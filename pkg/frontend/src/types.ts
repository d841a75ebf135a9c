/** Artifact document shapes served by the room Poisson service. */

export type Vec2 = [number, number];
export type Vec3 = [number, number, number];

export interface SpaceDoc {
  schema: string;
  footprint: Vec2[];
  z_floor: number;
  z_ceiling: number;
}

export interface BoundaryFacet {
  tri: [number, number, number];
  tag: string;
}

export interface MeshDoc {
  schema: string;
  vertices: Vec3[];
  tets: [number, number, number, number][];
  boundary: BoundaryFacet[];
}

export interface SourceDoc {
  position: Vec3;
  strength: number;
}

export interface ProblemDoc {
  schema?: string;
  sources: SourceDoc[];
  dirichlet: Record<string, number>;
}

export interface SolutionDoc {
  schema: string;
  vertices: Vec3[];
  values: number[];
  min: number;
  max: number;
  mesh_checksum: string;
}

export type StageName = "EMPTY" | "SCANNED" | "SPACED" | "MESHED" | "SOLVED";

/** Pipeline stages in order; index comparison gives stage gating. */
export const STAGE_ORDER: readonly StageName[] = [
  "EMPTY",
  "SCANNED",
  "SPACED",
  "MESHED",
  "SOLVED",
];

export function stageAtLeast(stage: StageName, wanted: StageName): boolean {
  return STAGE_ORDER.indexOf(stage) >= STAGE_ORDER.indexOf(wanted);
}

export interface StatusDoc {
  id: string;
  stage: StageName;
  solving: boolean;
  error: string | null;
}
