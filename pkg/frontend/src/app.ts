import { ApiClient } from './api.js';
import { intersectPlane, pixelRay } from './camera.js';
import { Editor } from './editor.js';
import { cross, normalize, sub } from './vec.js';
import { runAndRender } from './session.js';
import type { RenderScene } from './render.js';
import type { Vec3 } from './types.js';

/** Browser wiring: canvas rendering and mouse interaction for the studio. */

function drawScene(ctx: CanvasRenderingContext2D, scene: RenderScene): void {
  ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);
  for (const polygon of scene.polygons) {
    ctx.beginPath();
    polygon.points.forEach(([x, y], i) => (i === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y)));
    ctx.closePath();
    ctx.fillStyle = polygon.fill;
    ctx.fill();
  }
  for (const line of scene.polylines) {
    ctx.beginPath();
    ctx.setLineDash(line.dashed ? [6, 4] : []);
    line.points.forEach(([x, y], i) => (i === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y)));
    ctx.strokeStyle = line.color;
    ctx.lineWidth = 1.5;
    ctx.stroke();
  }
  ctx.setLineDash([]);
  // warp-angle legend, bottom left
  scene.legend.forEach((tick, i) => {
    ctx.fillStyle = tick.color;
    ctx.fillRect(12, ctx.canvas.height - 20 - i * 18, 14, 14);
    ctx.fillStyle = '#222';
    ctx.font = '11px sans-serif';
    ctx.fillText(`${tick.value.toFixed(2)}°`, 32, ctx.canvas.height - 8 - i * 18);
  });
}

function activePlane(editor: Editor): { origin: Vec3; normal: Vec3 } | null {
  if (!editor.activePlaneDefined) return null;
  const last = editor.rulings[editor.rulings.length - 1];
  const anchor = editor.anchor!;
  const normal = normalize(cross(sub(last.p, last.q), sub(anchor.b, anchor.a)));
  return { origin: anchor.a, normal };
}

export function mountStudio(root: HTMLElement, baseUrl: string): Editor {
  const api = new ApiClient(baseUrl);
  const editor = new Editor(api);

  const canvas = document.createElement('canvas');
  canvas.width = 900;
  canvas.height = 640;
  canvas.style.border = '1px solid #ccc';
  root.appendChild(canvas);
  const ctx = canvas.getContext('2d')!;

  const status = document.createElement('div');
  status.className = 'status';
  root.appendChild(status);

  const setStatus = (text: string) => {
    status.textContent = text;
  };

  let pendingQ: Vec3 | null = null;
  let dragging = false;
  let lastX = 0;
  let lastY = 0;
  let scene: RenderScene | null = null;

  canvas.addEventListener('mousedown', (event) => {
    if (event.shiftKey) {
      // shift-click pair: pick Q then P on the active plane
      const plane = activePlane(editor);
      if (!plane) {
        setStatus('define the working plane first (startChain + setAnchor)');
        return;
      }
      const ray = pixelRay(editor.camera, event.offsetX, event.offsetY,
                           { width: canvas.width, height: canvas.height });
      const hit = intersectPlane(ray, plane.origin, plane.normal);
      if (!hit) return;
      if (pendingQ === null) {
        pendingQ = hit;
        setStatus('Q placed; shift-click again for P');
      } else {
        const q = pendingQ;
        pendingQ = null;
        void editor.placeRuling(q, hit).then((ok) => {
          setStatus(ok ? `${editor.rulings.length} rulings` : editor.banner ?? 'rejected');
        });
      }
      return;
    }
    dragging = true;
    lastX = event.offsetX;
    lastY = event.offsetY;
  });

  canvas.addEventListener('mousemove', (event) => {
    if (!dragging) return;
    editor.orbit((event.offsetX - lastX) * 0.01, (event.offsetY - lastY) * 0.01);
    lastX = event.offsetX;
    lastY = event.offsetY;
    if (scene) drawScene(ctx, scene);
  });

  canvas.addEventListener('mouseup', () => {
    dragging = false;
  });

  canvas.addEventListener('wheel', (event) => {
    event.preventDefault();
    editor.zoom(event.deltaY > 0 ? 1.1 : 0.9);
    if (scene) drawScene(ctx, scene);
  });

  const runButton = document.createElement('button');
  runButton.textContent = 'optimize';
  runButton.addEventListener('click', () => {
    setStatus('optimizing…');
    void runAndRender(editor, api, {
      viewport: { width: canvas.width, height: canvas.height },
    }).then((result) => {
      if (result.error || !result.scene || !result.metrics) {
        setStatus(`job failed: ${result.error ?? 'no output'}`);
        return;
      }
      scene = result.scene;
      drawScene(ctx, scene);
      const m = result.metrics;
      setStatus(
        `β_max ${m.beta_max.toFixed(3)}° β_avg ${m.beta_avg.toFixed(3)}° `
        + `D_max ${m.d_max.toFixed(4)} D_avg ${m.d_avg.toFixed(4)} `
        + `(${m.outer_iterations} rounds, ${m.termination})`,
      );
    }).catch((err: Error) => setStatus(err.message));
  });
  root.appendChild(runButton);

  return editor;
}
