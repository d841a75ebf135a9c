/** Shared test fixtures: a hand-built cube mesh and an in-memory fake
 * of the room Poisson service, driven through the client's injected
 * fetch so every test exercises the real request/response code path.
 */

import type { FetchLike } from "../src/api.js";
import type {
  MeshDoc,
  ProblemDoc,
  SolutionDoc,
  SpaceDoc,
  StageName,
  StatusDoc,
} from "../src/types.js";
import { STAGE_ORDER } from "../src/types.js";

/**
 * Unit cube with one interior vertex: corners 0-7 (floor loop then
 * ceiling loop) plus vertex 8 at the center.  Every boundary facet
 * references corners only, so {0..7} is exactly the boundary node set.
 */
export function cubeMesh(): MeshDoc {
  return {
    schema: "roomfem/v1",
    vertices: [
      [0, 0, 0],
      [1, 0, 0],
      [1, 1, 0],
      [0, 1, 0],
      [0, 0, 1],
      [1, 0, 1],
      [1, 1, 1],
      [0, 1, 1],
      [0.5, 0.5, 0.5],
    ],
    tets: [
      [0, 1, 2, 8],
      [0, 2, 3, 8],
      [4, 6, 5, 8],
      [4, 7, 6, 8],
      [0, 5, 1, 8],
      [0, 4, 5, 8],
    ],
    boundary: [
      { tri: [0, 1, 2], tag: "FLOOR" },
      { tri: [0, 2, 3], tag: "FLOOR" },
      { tri: [4, 5, 6], tag: "CEILING" },
      { tri: [4, 6, 7], tag: "CEILING" },
      { tri: [0, 1, 5], tag: "WALL:0" },
      { tri: [0, 5, 4], tag: "WALL:0" },
      { tri: [1, 2, 6], tag: "WALL:1" },
      { tri: [1, 6, 5], tag: "WALL:1" },
      { tri: [2, 3, 7], tag: "WALL:2" },
      { tri: [2, 7, 6], tag: "WALL:2" },
      { tri: [3, 0, 4], tag: "WALL:3" },
      { tri: [3, 4, 7], tag: "WALL:3" },
    ],
  };
}

/** Boundary node indices of a mesh: every index referenced by a facet. */
export function boundaryNodes(mesh: MeshDoc): Set<number> {
  const nodes = new Set<number>();
  for (const facet of mesh.boundary) {
    for (const index of facet.tri) {
      nodes.add(index);
    }
  }
  return nodes;
}

export function cubeSpace(): SpaceDoc {
  return {
    schema: "roomfem/v1",
    footprint: [
      [0, 0],
      [1, 0],
      [1, 1],
      [0, 1],
    ],
    z_floor: 0,
    z_ceiling: 1,
  };
}

/** Zero on the cube's boundary nodes, one at the interior center node. */
export function cubeSolution(): SolutionDoc {
  const mesh = cubeMesh();
  const values = mesh.vertices.map(() => 0);
  values[8] = 1.0;
  return {
    schema: "roomfem/v1",
    vertices: mesh.vertices,
    values,
    min: 0,
    max: 1,
    mesh_checksum: "sha256:" + "0".repeat(64),
  };
}

export interface RecordedCall {
  method: string;
  path: string;
  body: unknown;
}

function jsonResponse(doc: unknown, status = 200): Response {
  return new Response(JSON.stringify(doc), {
    status,
    headers: { "content-type": "application/json" },
  });
}

/**
 * Minimal stand-in for the HTTP service: stage bookkeeping, artifact
 * stores, and a solve that completes after a configurable number of
 * status polls.  Mount it by passing `server.fetch` to ServiceClient.
 */
export class FakeServer {
  readonly sessionId = "sess-1";
  calls: RecordedCall[] = [];

  stage: StageName = "EMPTY";
  solving = false;
  error: string | null = null;

  space?: SpaceDoc;
  mesh?: MeshDoc;
  problem?: ProblemDoc;
  solution?: SolutionDoc;

  /** Solution installed when a started solve completes. */
  solutionOnSolve: SolutionDoc = cubeSolution();
  /** Status polls served before a started solve completes. */
  pollsUntilDone = 1;
  /** When set, the solve fails with this message instead of finishing. */
  failSolveWith: string | null = null;

  private pollsLeft = 0;

  /** Jump the fake session to a stage, installing stock artifacts. */
  seedStage(stage: StageName): void {
    this.stage = stage;
    const reached = (s: StageName) =>
      STAGE_ORDER.indexOf(stage) >= STAGE_ORDER.indexOf(s);
    if (reached("SPACED")) this.space = cubeSpace();
    if (reached("MESHED")) this.mesh = cubeMesh();
    if (reached("SOLVED")) {
      this.problem = { sources: [], dirichlet: { FLOOR: 0.0 } };
      this.solution = cubeSolution();
    }
  }

  fetch: FetchLike = async (input, init) => {
    const method = (init?.method ?? "GET").toUpperCase();
    const url = new URL(input, "http://fake");
    const path = url.pathname + url.search;
    let body: unknown;
    if (typeof init?.body === "string") {
      try {
        body = JSON.parse(init.body);
      } catch {
        body = init.body;
      }
    }
    this.calls.push({ method, path, body });
    return this.route(method, url, body);
  };

  private route(method: string, url: URL, body: unknown): Response {
    const path = url.pathname;
    if (method === "POST" && path === "/api/sessions") {
      return jsonResponse({ id: this.sessionId, stage: this.stage });
    }
    const match = path.match(/^\/api\/sessions\/([^/]+)\/(\w+)$/);
    if (!match) {
      return jsonResponse({ error: "NotFound", detail: path }, 404);
    }
    const [, sessionId, endpoint] = match;
    if (sessionId !== this.sessionId) {
      return jsonResponse(
        { error: "UnknownSession", detail: `no session ${sessionId}` },
        404,
      );
    }
    switch (`${method} ${endpoint}`) {
      case "GET status":
        return jsonResponse(this.statusDoc());
      case "GET space":
        return this.artifact(this.space);
      case "GET mesh":
        return this.artifact(this.mesh);
      case "GET problem":
        return this.artifact(this.problem);
      case "GET solution":
        return this.artifact(this.solution);
      case "POST scan":
        this.stage = "SCANNED";
        return jsonResponse({ ok: true });
      case "POST space":
        this.stage = "SPACED";
        this.space = cubeSpace();
        return jsonResponse({ ok: true });
      case "POST mesh":
        this.stage = "MESHED";
        this.mesh = cubeMesh();
        return jsonResponse({ ok: true });
      case "PUT problem":
        if (this.solving) {
          return jsonResponse(
            { error: "Busy", detail: "a solve is running" },
            409,
          );
        }
        this.problem = body as ProblemDoc;
        if (this.stage === "SOLVED") {
          this.stage = "MESHED";
          this.solution = undefined;
        }
        return jsonResponse({ ok: true });
      case "POST solve":
        return this.startSolve();
      default:
        return jsonResponse(
          { error: "NotFound", detail: `${method} ${path}` },
          404,
        );
    }
  }

  private startSolve(): Response {
    if (this.solving) {
      return jsonResponse({ error: "Busy", detail: "a solve is running" }, 409);
    }
    if (this.stage !== "MESHED" && this.stage !== "SOLVED") {
      return jsonResponse(
        { error: "StageConflict", detail: `stage is ${this.stage}` },
        409,
      );
    }
    if (!this.problem || Object.keys(this.problem.dirichlet).length === 0) {
      return jsonResponse(
        { error: "NoDirichletData", detail: "no boundary values posed" },
        422,
      );
    }
    this.solving = true;
    this.error = null;
    this.pollsLeft = this.pollsUntilDone;
    return jsonResponse({ ok: true });
  }

  private statusDoc(): StatusDoc {
    if (this.solving) {
      this.pollsLeft -= 1;
      if (this.pollsLeft <= 0) {
        this.solving = false;
        if (this.failSolveWith) {
          this.error = this.failSolveWith;
        } else {
          this.stage = "SOLVED";
          this.solution = this.solutionOnSolve;
        }
      }
    }
    return {
      id: this.sessionId,
      stage: this.stage,
      solving: this.solving,
      error: this.error,
    };
  }

  private artifact(doc: unknown): Response {
    if (doc === undefined) {
      return jsonResponse(
        { error: "NotFound", detail: "artifact not available yet" },
        404,
      );
    }
    return jsonResponse(doc);
  }
}
