/** Browser entry point: wires the service client, session state and
 * three.js rendering together.  Click a wall to set its value to zero,
 * click inside the room to drop a point source, then solve.
 */

import * as THREE from "three";

import { ApiError, ServiceClient } from "./api.js";
import {
  buildSceneGraph,
  deriveScene,
  pickBoundary,
  DEFAULT_SCENE_OPTIONS,
} from "./scene.js";
import { SessionController, StateError } from "./state.js";

const client = new ServiceClient("");

const canvas = document.getElementById("view") as HTMLCanvasElement;
const hint = document.getElementById("hint") as HTMLElement;
const statusLine = document.getElementById("status") as HTMLElement;

const renderer = new THREE.WebGLRenderer({ canvas, antialias: true });
const scene = new THREE.Scene();
scene.background = new THREE.Color(0x101014);
const camera = new THREE.PerspectiveCamera(50, 1, 0.01, 100);
camera.position.set(6, -6, 4);
camera.up.set(0, 0, 1);
camera.lookAt(2, 1.5, 1.2);
scene.add(new THREE.AmbientLight(0xffffff, 0.7));
const sun = new THREE.DirectionalLight(0xffffff, 1.2);
sun.position.set(4, -8, 10);
scene.add(sun);

let sceneRoot: THREE.Group | null = null;
let controller: SessionController | null = null;

function showHint(text: string): void {
  hint.textContent = text;
  hint.classList.add("visible");
  window.setTimeout(() => hint.classList.remove("visible"), 2500);
}

function showStatus(): void {
  if (!controller) {
    statusLine.textContent = "no session";
    return;
  }
  const pendingCount =
    controller.pending.sources.length +
    Object.keys(controller.pending.walls).length;
  statusLine.textContent =
    `session ${controller.sessionId} — stage ${controller.stage}` +
    (controller.solving ? " (solving…)" : "") +
    (pendingCount > 0 ? ` — ${pendingCount} pending edit(s)` : "");
}

function rebuildScene(): void {
  if (sceneRoot) {
    scene.remove(sceneRoot);
  }
  if (controller) {
    const spec = deriveScene(
      controller.artifacts,
      controller.pending,
      DEFAULT_SCENE_OPTIONS,
    );
    sceneRoot = buildSceneGraph(spec);
    scene.add(sceneRoot);
  }
  showStatus();
}

function resize(): void {
  const width = canvas.clientWidth || window.innerWidth;
  const height = canvas.clientHeight || window.innerHeight - 80;
  renderer.setSize(width, height, false);
  camera.aspect = width / height;
  camera.updateProjectionMatrix();
}

window.addEventListener("resize", resize);

function animate(): void {
  requestAnimationFrame(animate);
  renderer.render(scene, camera);
}

async function guard(action: () => Promise<void>): Promise<void> {
  try {
    await action();
  } catch (err) {
    if (err instanceof ApiError || err instanceof StateError) {
      showHint(err.message);
    } else {
      throw err;
    }
  }
  rebuildScene();
}

function wireButton(id: string, action: () => Promise<void>): void {
  const button = document.getElementById(id) as HTMLButtonElement;
  button.addEventListener("click", () => void guard(action));
}

wireButton("new-session", async () => {
  const id = await client.createSession();
  controller = new SessionController(client, id);
  await controller.refresh();
});

wireButton("refresh", async () => {
  await controller?.refresh();
});

wireButton("solve", async () => {
  if (!controller) throw new StateError("create a session first");
  await controller.solve();
});

wireButton("flush", async () => {
  if (!controller) throw new StateError("create a session first");
  await controller.flushProblem();
});

canvas.addEventListener("click", (event) => {
  if (!controller?.artifacts.mesh) {
    showHint("generate a mesh first");
    return;
  }
  const rect = canvas.getBoundingClientRect();
  const ndc = new THREE.Vector2(
    ((event.clientX - rect.left) / rect.width) * 2 - 1,
    -((event.clientY - rect.top) / rect.height) * 2 + 1,
  );
  const raycaster = new THREE.Raycaster();
  raycaster.setFromCamera(ndc, camera);
  const pick = pickBoundary(controller.artifacts.mesh, raycaster.ray);
  if (!pick) {
    showHint("pick missed the room");
    return;
  }
  try {
    if (event.shiftKey) {
      controller.setWallValue(pick.tag, 0.0);
      showHint(`queued ${pick.tag} = 0`);
    } else {
      controller.placeSource(pick.point, 1.0);
      showHint("queued a point source");
    }
  } catch (err) {
    if (err instanceof StateError) {
      showHint(err.message);
      return;
    }
    throw err;
  }
  rebuildScene();
});

resize();
rebuildScene();
animate();
