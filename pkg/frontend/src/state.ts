/** Session store: server artifacts, local pending edits and stage gating.
 *
 * Layer toggles and pending edits are purely local; the only way local
 * edits reach the server is an explicit PUT of the merged problem.
 * Solves never overlap: a second solve request while one is running is
 * rejected locally before any network call.
 */

import type { ServiceClient } from "./api.js";
import type { Artifacts, PendingEdits } from "./scene.js";
import { EMPTY_PENDING } from "./scene.js";
import type {
  ProblemDoc,
  SourceDoc,
  StageName,
  StatusDoc,
  Vec3,
} from "./types.js";
import { stageAtLeast } from "./types.js";

export type LayerName = "scan" | "space" | "mesh" | "problem" | "solution";

export class StateError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "StateError";
  }
}

/** Merge the server problem with local pending edits (pending wins). */
export function mergeProblem(
  base: ProblemDoc | undefined,
  pending: PendingEdits,
): ProblemDoc {
  return {
    sources: [...(base?.sources ?? []), ...pending.sources],
    dirichlet: { ...(base?.dirichlet ?? {}), ...pending.walls },
  };
}

export class SessionController {
  stage: StageName = "EMPTY";
  solving = false;
  solveError: string | null = null;
  artifacts: Artifacts = {};
  pending: PendingEdits = structuredClone(EMPTY_PENDING);
  layers: Record<LayerName, boolean> = {
    scan: true,
    space: true,
    mesh: true,
    problem: true,
    solution: true,
  };

  constructor(
    private readonly client: ServiceClient,
    readonly sessionId: string,
  ) {}

  /** Pull status and whichever artifacts the current stage provides. */
  async refresh(): Promise<StatusDoc> {
    const status = await this.client.getStatus(this.sessionId);
    this.stage = status.stage;
    this.solving = status.solving;
    this.solveError = status.error;

    const artifacts: Artifacts = {};
    if (stageAtLeast(status.stage, "SPACED")) {
      artifacts.space = await this.client.getSpace(this.sessionId);
    }
    if (stageAtLeast(status.stage, "MESHED")) {
      artifacts.mesh = await this.client.getMesh(this.sessionId);
      artifacts.problem = await this.fetchProblemIfAny();
    }
    if (stageAtLeast(status.stage, "SOLVED")) {
      artifacts.solution = await this.client.getSolution(this.sessionId);
    }
    this.artifacts = artifacts;
    return status;
  }

  private async fetchProblemIfAny(): Promise<ProblemDoc | undefined> {
    try {
      return await this.client.getProblem(this.sessionId);
    } catch {
      return undefined; // no problem posed yet
    }
  }

  /** Toggle a display layer; never touches the server. */
  toggleLayer(name: LayerName): void {
    this.layers[name] = !this.layers[name];
  }

  /** Queue a point source locally; flushed by flushProblem. */
  placeSource(position: Vec3, strength = 1.0): void {
    this.requireStage("MESHED", "place a source");
    const source: SourceDoc = { position, strength };
    this.pending.sources.push(source);
  }

  /** Queue a Dirichlet value for a boundary tag locally. */
  setWallValue(tag: string, value: number): void {
    this.requireStage("MESHED", "set a boundary value");
    this.pending.walls[tag] = value;
  }

  clearPending(): void {
    this.pending = structuredClone(EMPTY_PENDING);
  }

  /** PUT the merged problem to the server; clears pending on success. */
  async flushProblem(): Promise<ProblemDoc> {
    this.requireStage("MESHED", "upload a problem");
    if (this.solving) {
      throw new StateError("cannot edit the problem while a solve is running");
    }
    const merged = mergeProblem(this.artifacts.problem, this.pending);
    await this.client.putProblem(this.sessionId, merged);
    this.artifacts = { ...this.artifacts, problem: merged, solution: undefined };
    this.stage = "MESHED";
    this.pending = structuredClone(EMPTY_PENDING);
    return merged;
  }

  /**
   * Flush pending edits if any, start a solve and poll to completion.
   * Rejects immediately when a solve is already in flight.
   */
  async solve(pollMs = 100): Promise<void> {
    if (this.solving) {
      throw new StateError("a solve is already running");
    }
    this.requireStage("MESHED", "solve");
    if (this.pending.sources.length > 0 || Object.keys(this.pending.walls).length > 0) {
      await this.flushProblem();
    }
    this.solving = true;
    try {
      await this.client.startSolve(this.sessionId);
      let status = await this.client.getStatus(this.sessionId);
      while (status.solving) {
        await sleep(pollMs);
        status = await this.client.getStatus(this.sessionId);
      }
      this.stage = status.stage;
      this.solveError = status.error;
      if (status.error) {
        throw new StateError(status.error);
      }
      this.artifacts = {
        ...this.artifacts,
        solution: await this.client.getSolution(this.sessionId),
      };
    } finally {
      this.solving = false;
    }
  }

  private requireStage(wanted: StageName, action: string): void {
    if (!stageAtLeast(this.stage, wanted)) {
      throw new StateError(
        `cannot ${action} at stage ${this.stage}; needs ${wanted}`,
      );
    }
  }
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}
