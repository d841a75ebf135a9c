import { describe, expect, it } from "vitest";
import * as THREE from "three";

import { colorMap } from "../src/colors.js";
import { RADIUS_FLOOR_FRACTION, sphereRadius } from "../src/glyphs.js";
import {
  buildSceneGraph,
  deriveScene,
  pickBoundary,
  spaceOutline,
  DEFAULT_SCENE_OPTIONS,
  EMPTY_PENDING,
  OUTLINE_GROUP,
  SOURCE_GROUP,
  SPHERE_GROUP,
  type Artifacts,
  type PendingEdits,
} from "../src/scene.js";
import { cubeMesh, cubeSolution, cubeSpace } from "./fixtures.js";

function solvedArtifacts(): Artifacts {
  return {
    space: cubeSpace(),
    mesh: cubeMesh(),
    problem: { sources: [], dirichlet: { "WALL:0": 0.0 } },
    solution: cubeSolution(),
  };
}

describe("deriveScene", () => {
  it("yields an empty scene for empty artifacts", () => {
    const spec = deriveScene({}, EMPTY_PENDING);
    expect(spec.spheres).toEqual([]);
    expect(spec.outline).toEqual([]);
    expect(spec.sources).toEqual([]);
    expect(spec.taggedWalls).toEqual({});
  });

  it("is a pure function of artifacts and pending edits", () => {
    const pending: PendingEdits = {
      sources: [{ position: [0.2, 0.2, 0.2], strength: 1 }],
      walls: { "WALL:1": 0.0 },
    };
    const first = deriveScene(solvedArtifacts(), pending);
    const second = deriveScene(solvedArtifacts(), pending);
    expect(second).toEqual(first);
    expect(JSON.stringify(second)).toBe(JSON.stringify(first));
  });

  it("renders one sphere per solution vertex", () => {
    const spec = deriveScene(solvedArtifacts(), EMPTY_PENDING);
    expect(spec.spheres).toHaveLength(cubeMesh().vertices.length);
  });

  it("sizes and colors each sphere from its nodal value", () => {
    const spec = deriveScene(solvedArtifacts(), EMPTY_PENDING);
    const solution = cubeSolution();
    spec.spheres.forEach((sphere, i) => {
      const value = solution.values[i]!;
      expect(sphere.value).toBe(value);
      expect(sphere.radius).toBe(
        sphereRadius(value, solution.min, solution.max, DEFAULT_SCENE_OPTIONS.rMax),
      );
      expect(sphere.color).toEqual(colorMap(value, solution.min, solution.max));
      expect(sphere.position).toEqual(solution.vertices[i]);
    });
  });

  it("marks server sources as committed and local ones as pending", () => {
    const artifacts: Artifacts = {
      problem: {
        sources: [{ position: [0.1, 0.1, 0.1], strength: 1 }],
        dirichlet: {},
      },
    };
    const pending: PendingEdits = {
      sources: [{ position: [0.9, 0.9, 0.9], strength: 2 }],
      walls: {},
    };
    const spec = deriveScene(artifacts, pending);
    expect(spec.sources).toEqual([
      { position: [0.1, 0.1, 0.1], strength: 1, pending: false },
      { position: [0.9, 0.9, 0.9], strength: 2, pending: true },
    ]);
  });

  it("overlays pending wall values on the server's", () => {
    const spec = deriveScene(
      { problem: { sources: [], dirichlet: { FLOOR: 1.0, "WALL:0": 2.0 } } },
      { sources: [], walls: { FLOOR: 0.0 } },
    );
    expect(spec.taggedWalls).toEqual({ FLOOR: 0.0, "WALL:0": 2.0 });
  });
});

describe("spaceOutline", () => {
  it("draws three segments per footprint vertex", () => {
    const segments = spaceOutline(cubeSpace());
    expect(segments).toHaveLength(12);
  });

  it("spans the floor and ceiling heights", () => {
    const segments = spaceOutline(cubeSpace());
    const zs = new Set(segments.flat().map((p) => p[2]));
    expect(zs).toEqual(new Set([0, 1]));
    const vertical = segments.filter(
      ([a, b]) => a[0] === b[0] && a[1] === b[1],
    );
    expect(vertical).toHaveLength(4);
  });
});

describe("buildSceneGraph", () => {
  it("creates named groups for spheres, outline and sources", () => {
    const spec = deriveScene(solvedArtifacts(), {
      sources: [{ position: [0.5, 0.5, 0.5], strength: 1 }],
      walls: {},
    });
    const root = buildSceneGraph(spec);
    const spheres = root.getObjectByName(SPHERE_GROUP);
    const outline = root.getObjectByName(OUTLINE_GROUP);
    const sources = root.getObjectByName(SOURCE_GROUP);
    expect(spheres?.children).toHaveLength(spec.spheres.length);
    expect(outline?.children).toHaveLength(1);
    expect(sources?.children).toHaveLength(1);
  });

  it("scales each sphere mesh by its radius and positions it at the node", () => {
    const spec = deriveScene(solvedArtifacts(), EMPTY_PENDING);
    const root = buildSceneGraph(spec);
    const spheres = root.getObjectByName(SPHERE_GROUP)!;
    spheres.children.forEach((child, i) => {
      const expected = spec.spheres[i]!;
      expect(child.scale.x).toBe(expected.radius);
      expect([child.position.x, child.position.y, child.position.z]).toEqual(
        expected.position,
      );
    });
  });

  it("builds an empty graph from an empty spec", () => {
    const root = buildSceneGraph(deriveScene({}, EMPTY_PENDING));
    expect(root.getObjectByName(SPHERE_GROUP)?.children).toHaveLength(0);
    expect(root.getObjectByName(OUTLINE_GROUP)?.children).toHaveLength(0);
    expect(root.getObjectByName(SOURCE_GROUP)?.children).toHaveLength(0);
  });
});

describe("pickBoundary", () => {
  it("returns the nearest facet when the ray crosses the room", () => {
    const ray = new THREE.Ray(
      new THREE.Vector3(0.6, 0.3, 2),
      new THREE.Vector3(0, 0, -1),
    );
    const pick = pickBoundary(cubeMesh(), ray);
    expect(pick?.tag).toBe("CEILING");
    expect(pick?.point[2]).toBeCloseTo(1, 12);
    expect(pick?.distance).toBeCloseTo(1, 12);
  });

  it("identifies the wall a sideways ray hits first", () => {
    const ray = new THREE.Ray(
      new THREE.Vector3(-1, 0.3, 0.5),
      new THREE.Vector3(1, 0, 0),
    );
    const pick = pickBoundary(cubeMesh(), ray);
    expect(pick?.tag).toBe("WALL:3");
    expect(pick?.point).toEqual([0, 0.3, 0.5]);
  });

  it("returns null when the ray misses the room", () => {
    const away = new THREE.Ray(
      new THREE.Vector3(5, 5, 5),
      new THREE.Vector3(0, 0, -1),
    );
    expect(pickBoundary(cubeMesh(), away)).toBeNull();
    const backwards = new THREE.Ray(
      new THREE.Vector3(0.6, 0.3, 2),
      new THREE.Vector3(0, 0, 1),
    );
    expect(pickBoundary(cubeMesh(), backwards)).toBeNull();
  });
});

describe("radius floor", () => {
  it("keeps zero-valued nodes visible at the configured floor", () => {
    const spec = deriveScene(solvedArtifacts(), EMPTY_PENDING, { rMax: 0.5 });
    const smallest = Math.min(...spec.spheres.map((s) => s.radius));
    expect(smallest).toBe(RADIUS_FLOOR_FRACTION * 0.5);
  });
});
