import type { Viewport } from './camera.js';
import { projectPoint } from './camera.js';
import { legendTicks, warpColor, type LegendEntry } from './colormap.js';
import type { CameraState, OverlayToggles } from './editor.js';
import { boundaryPolylines, meshBetaMax, type SurfaceMesh } from './mesh.js';
import { sampleCurve } from './spline-sample.js';
import type { ControlNetDoc, RulingData, Vec3 } from './types.js';

export interface ScenePolygon {
  points: Array<[number, number]>;
  depth: number;
  fill: string;
}

export interface ScenePolyline {
  points: Array<[number, number]>;
  color: string;
  dashed: boolean;
}

export interface RenderScene {
  polygons: ScenePolygon[];
  polylines: ScenePolyline[];
  legend: LegendEntry[];
  /** Maximum per-vertex warp angle across the rendered mesh, in degrees. */
  meshBetaMax: number;
}

function projectPolyline(points: Vec3[], camera: CameraState,
                         viewport: Viewport): Array<[number, number]> {
  const out: Array<[number, number]> = [];
  for (const point of points) {
    const projected = projectPoint(camera, point, viewport);
    if (projected) out.push([projected.x, projected.y]);
  }
  return out;
}

export interface BuildSceneOptions {
  mesh: SurfaceMesh;
  camera: CameraState;
  viewport: Viewport;
  overlays: OverlayToggles;
  rulings?: RulingData[];
  controlNet?: ControlNetDoc;
}

/**
 * Project the mesh and overlays into a drawable scene: painter-sorted filled
 * quads colored by warp angle, plus boundary curves and ruling segments.
 */
export function buildScene(options: BuildSceneOptions): RenderScene {
  const { mesh, camera, viewport, overlays } = options;
  const betaMax = meshBetaMax(mesh);
  const polygons: ScenePolygon[] = [];

  for (const face of mesh.faces) {
    const points: Array<[number, number]> = [];
    let depth = 0;
    let warp = 0;
    let visible = true;
    for (const index of face) {
      const vertex = mesh.vertices[index];
      const projected = projectPoint(camera, vertex.position, viewport);
      if (!projected) {
        visible = false;
        break;
      }
      points.push([projected.x, projected.y]);
      depth += projected.depth;
      warp += vertex.warp;
    }
    if (!visible) continue;
    polygons.push({
      points,
      depth: depth / face.length,
      fill: overlays.warpColor
        ? warpColor(warp / face.length, betaMax)
        : 'rgb(200,200,205)',
    });
  }
  polygons.sort((a, b) => b.depth - a.depth);

  const polylines: ScenePolyline[] = [];
  if (overlays.resultCurves) {
    const bounds = boundaryPolylines(mesh);
    polylines.push({ points: projectPolyline(bounds.c0, camera, viewport),
                     color: '#15447a', dashed: false });
    polylines.push({ points: projectPolyline(bounds.c1, camera, viewport),
                     color: '#7a2315', dashed: false });
  }
  if (overlays.initialCurves && options.controlNet?.initial_curves) {
    for (const key of ['c0', 'c1'] as const) {
      const curve = options.controlNet.initial_curves[key];
      polylines.push({
        points: projectPolyline(sampleCurve(curve), camera, viewport),
        color: '#777777',
        dashed: true,
      });
    }
  }
  if (overlays.rulings && options.rulings) {
    for (const ruling of options.rulings) {
      polylines.push({
        points: projectPolyline([ruling.q, ruling.p], camera, viewport),
        color: '#111111',
        dashed: false,
      });
    }
  }

  return { polygons, polylines, legend: legendTicks(betaMax), meshBetaMax: betaMax };
}
