/** Scene derivation and assembly.
 *
 * deriveScene is a pure function of (server artifacts, pending edits):
 * re-deriving from the same inputs yields a deeply equal description, so
 * refreshing the page and re-fetching reproduces the identical scene.
 * buildSceneGraph turns that plain description into three.js objects.
 */

import * as THREE from "three";

import { colorMap, type Rgb } from "./colors.js";
import { sphereRadius } from "./glyphs.js";
import type {
  MeshDoc,
  ProblemDoc,
  SolutionDoc,
  SourceDoc,
  SpaceDoc,
  Vec3,
} from "./types.js";

export interface SphereSpec {
  position: Vec3;
  radius: number;
  color: Rgb;
  value: number;
}

export interface SourceMarkerSpec {
  position: Vec3;
  strength: number;
  pending: boolean;
}

export interface SceneSpec {
  /** One sphere per mesh nodal point, present once a solution exists. */
  spheres: SphereSpec[];
  /** Room wireframe segments as point pairs. */
  outline: [Vec3, Vec3][];
  /** Source markers from the server problem plus local pending edits. */
  sources: SourceMarkerSpec[];
  /** Wall tags that carry a Dirichlet value (server or pending). */
  taggedWalls: Record<string, number>;
}

export interface Artifacts {
  space?: SpaceDoc;
  mesh?: MeshDoc;
  problem?: ProblemDoc;
  solution?: SolutionDoc;
}

export interface PendingEdits {
  sources: SourceDoc[];
  walls: Record<string, number>;
}

export const EMPTY_PENDING: PendingEdits = { sources: [], walls: {} };

export interface SceneOptions {
  /** Largest sphere radius in room units (meters). */
  rMax: number;
}

export const DEFAULT_SCENE_OPTIONS: SceneOptions = { rMax: 0.1 };

export function deriveScene(
  artifacts: Artifacts,
  pending: PendingEdits = EMPTY_PENDING,
  options: SceneOptions = DEFAULT_SCENE_OPTIONS,
): SceneSpec {
  const spheres: SphereSpec[] = [];
  const solution = artifacts.solution;
  if (solution) {
    for (let i = 0; i < solution.vertices.length; i += 1) {
      const value = solution.values[i]!;
      spheres.push({
        position: solution.vertices[i]!,
        value,
        radius: sphereRadius(value, solution.min, solution.max, options.rMax),
        color: colorMap(value, solution.min, solution.max),
      });
    }
  }

  const sources: SourceMarkerSpec[] = [];
  for (const s of artifacts.problem?.sources ?? []) {
    sources.push({ position: s.position, strength: s.strength, pending: false });
  }
  for (const s of pending.sources) {
    sources.push({ position: s.position, strength: s.strength, pending: true });
  }

  return {
    spheres,
    outline: artifacts.space ? spaceOutline(artifacts.space) : [],
    sources,
    taggedWalls: { ...(artifacts.problem?.dirichlet ?? {}), ...pending.walls },
  };
}

/** Wireframe of the prism: floor loop, ceiling loop and vertical edges. */
export function spaceOutline(space: SpaceDoc): [Vec3, Vec3][] {
  const segments: [Vec3, Vec3][] = [];
  const n = space.footprint.length;
  for (let i = 0; i < n; i += 1) {
    const [ax, ay] = space.footprint[i]!;
    const [bx, by] = space.footprint[(i + 1) % n]!;
    segments.push([
      [ax, ay, space.z_floor],
      [bx, by, space.z_floor],
    ]);
    segments.push([
      [ax, ay, space.z_ceiling],
      [bx, by, space.z_ceiling],
    ]);
    segments.push([
      [ax, ay, space.z_floor],
      [ax, ay, space.z_ceiling],
    ]);
  }
  return segments;
}

export const SPHERE_GROUP = "solution-spheres";
export const OUTLINE_GROUP = "room-outline";
export const SOURCE_GROUP = "source-markers";

/** Build the three.js object graph for a derived scene description. */
export function buildSceneGraph(spec: SceneSpec): THREE.Group {
  const root = new THREE.Group();

  const spheres = new THREE.Group();
  spheres.name = SPHERE_GROUP;
  for (const sphere of spec.spheres) {
    const geometry = new THREE.SphereGeometry(1, 12, 8);
    const material = new THREE.MeshLambertMaterial({
      color: new THREE.Color(
        sphere.color[0] / 255,
        sphere.color[1] / 255,
        sphere.color[2] / 255,
      ),
    });
    const mesh = new THREE.Mesh(geometry, material);
    mesh.position.set(...sphere.position);
    mesh.scale.setScalar(sphere.radius);
    spheres.add(mesh);
  }
  root.add(spheres);

  const outline = new THREE.Group();
  outline.name = OUTLINE_GROUP;
  if (spec.outline.length > 0) {
    const positions = new Float32Array(spec.outline.length * 6);
    spec.outline.forEach(([a, b], i) => {
      positions.set(a, 6 * i);
      positions.set(b, 6 * i + 3);
    });
    const geometry = new THREE.BufferGeometry();
    geometry.setAttribute("position", new THREE.BufferAttribute(positions, 3));
    outline.add(
      new THREE.LineSegments(
        geometry,
        new THREE.LineBasicMaterial({ color: 0x888888 }),
      ),
    );
  }
  root.add(outline);

  const sources = new THREE.Group();
  sources.name = SOURCE_GROUP;
  for (const marker of spec.sources) {
    const mesh = new THREE.Mesh(
      new THREE.OctahedronGeometry(0.06),
      new THREE.MeshLambertMaterial({
        color: marker.pending ? 0xffaa00 : 0xff00ff,
      }),
    );
    mesh.position.set(...marker.position);
    sources.add(mesh);
  }
  root.add(sources);

  return root;
}

export interface WallPick {
  tag: string;
  point: Vec3;
  distance: number;
}

/**
 * Intersect a ray with the mesh's tagged boundary facets.
 *
 * Returns the nearest hit (wall/floor/ceiling tag plus the 3D point) or
 * null when the ray misses the room, which callers surface as a no-op
 * hint.
 */
export function pickBoundary(mesh: MeshDoc, ray: THREE.Ray): WallPick | null {
  const target = new THREE.Vector3();
  let best: WallPick | null = null;
  const a = new THREE.Vector3();
  const b = new THREE.Vector3();
  const c = new THREE.Vector3();
  for (const facet of mesh.boundary) {
    a.set(...mesh.vertices[facet.tri[0]]!);
    b.set(...mesh.vertices[facet.tri[1]]!);
    c.set(...mesh.vertices[facet.tri[2]]!);
    const hit = ray.intersectTriangle(a, b, c, false, target);
    if (hit) {
      const distance = hit.distanceTo(ray.origin);
      if (best === null || distance < best.distance) {
        best = { tag: facet.tag, point: [hit.x, hit.y, hit.z], distance };
      }
    }
  }
  return best;
}
