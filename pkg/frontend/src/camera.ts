import type { CameraState } from './editor.js';
import type { Vec3 } from './types.js';
import { add, cross, dot, normalize, scale, sub } from './vec.js';

export interface Viewport {
  width: number;
  height: number;
}

export interface ProjectedPoint {
  x: number;
  y: number;
  depth: number;
}

export interface CameraFrame {
  eye: Vec3;
  forward: Vec3;
  right: Vec3;
  up: Vec3;
}

const WORLD_UP: Vec3 = [0, 0, 1];
const FOCAL = 1.8;

export function cameraFrame(camera: CameraState): CameraFrame {
  const cp = Math.cos(camera.pitch);
  const offset: Vec3 = [
    cp * Math.cos(camera.yaw),
    cp * Math.sin(camera.yaw),
    Math.sin(camera.pitch),
  ];
  const eye = add(camera.target, scale(offset, camera.distance));
  const forward = normalize(sub(camera.target, eye));
  const right = normalize(cross(forward, WORLD_UP));
  const up = cross(right, forward);
  return { eye, forward, right, up };
}

/** Perspective projection to pixel coordinates; null when behind the eye. */
export function projectPoint(camera: CameraState, point: Vec3,
                             viewport: Viewport): ProjectedPoint | null {
  const frame = cameraFrame(camera);
  const d = sub(point, frame.eye);
  const depth = dot(d, frame.forward);
  if (depth <= 1e-9) return null;
  const sx = (dot(d, frame.right) / depth) * FOCAL;
  const sy = (dot(d, frame.up) / depth) * FOCAL;
  const half = Math.min(viewport.width, viewport.height) / 2;
  return {
    x: viewport.width / 2 + sx * half,
    y: viewport.height / 2 - sy * half,
    depth,
  };
}

/** World-space ray through a pixel; used to pick points on the active plane. */
export function pixelRay(camera: CameraState, x: number, y: number,
                         viewport: Viewport): { origin: Vec3; direction: Vec3 } {
  const frame = cameraFrame(camera);
  const half = Math.min(viewport.width, viewport.height) / 2;
  const sx = (x - viewport.width / 2) / half / FOCAL;
  const sy = (viewport.height / 2 - y) / half / FOCAL;
  const direction = normalize(add(
    frame.forward,
    add(scale(frame.right, sx), scale(frame.up, sy)),
  ));
  return { origin: frame.eye, direction };
}

/** Intersection of a ray with the plane through `origin` with `normal`. */
export function intersectPlane(ray: { origin: Vec3; direction: Vec3 },
                               origin: Vec3, normal: Vec3): Vec3 | null {
  const denom = dot(ray.direction, normal);
  if (Math.abs(denom) < 1e-12) return null;
  const t = dot(sub(origin, ray.origin), normal) / denom;
  if (t <= 0) return null;
  return add(ray.origin, scale(ray.direction, t));
}
