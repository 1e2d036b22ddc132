import type { Vec3 } from './types.js';

export interface MeshVertex {
  position: Vec3;
  warp: number;
}

export interface SurfaceMesh {
  vertices: MeshVertex[];
  faces: number[][];
  /** Grid dimensions recovered from the face layout: rows along t, cols along s. */
  rows: number;
  cols: number;
}

/** Parse the service's ASCII PLY export (x y z warp_angle per vertex). */
export function parsePly(text: string): SurfaceMesh {
  const lines = text.split('\n');
  let vertexCount = -1;
  let faceCount = -1;
  let cursor = 0;
  const properties: string[] = [];

  for (; cursor < lines.length; cursor += 1) {
    const line = lines[cursor].trim();
    if (cursor === 0 && line !== 'ply') throw new Error('not a PLY document');
    const vertexMatch = line.match(/^element vertex (\d+)$/);
    if (vertexMatch) vertexCount = Number(vertexMatch[1]);
    const faceMatch = line.match(/^element face (\d+)$/);
    if (faceMatch) faceCount = Number(faceMatch[1]);
    if (line.startsWith('property float ')) properties.push(line.slice('property float '.length));
    if (line === 'end_header') {
      cursor += 1;
      break;
    }
  }
  if (vertexCount < 0 || faceCount < 0) throw new Error('PLY header missing element counts');
  const warpIndex = properties.indexOf('warp_angle');
  if (warpIndex < 0) throw new Error('PLY mesh lacks the warp_angle channel');

  const vertices: MeshVertex[] = [];
  for (let i = 0; i < vertexCount; i += 1) {
    const parts = lines[cursor + i].trim().split(/\s+/).map(Number);
    vertices.push({ position: [parts[0], parts[1], parts[2]], warp: parts[warpIndex] });
  }
  cursor += vertexCount;

  const faces: number[][] = [];
  for (let i = 0; i < faceCount; i += 1) {
    const parts = lines[cursor + i].trim().split(/\s+/).map(Number);
    faces.push(parts.slice(1, 1 + parts[0]));
  }

  let cols = vertexCount;
  if (faces.length > 0 && faces[0].length === 4) {
    cols = faces[0][3] - faces[0][0];
  }
  const rows = Math.round(vertexCount / cols);
  return { vertices, faces, rows, cols };
}

export function meshBetaMax(mesh: SurfaceMesh): number {
  let max = -Infinity;
  for (const vertex of mesh.vertices) {
    if (vertex.warp > max) max = vertex.warp;
  }
  return max;
}

/** Boundary polylines of the tessellation: the s=0 and s=1 grid columns. */
export function boundaryPolylines(mesh: SurfaceMesh): { c0: Vec3[]; c1: Vec3[] } {
  const c0: Vec3[] = [];
  const c1: Vec3[] = [];
  for (let row = 0; row < mesh.rows; row += 1) {
    c0.push(mesh.vertices[row * mesh.cols].position);
    c1.push(mesh.vertices[row * mesh.cols + mesh.cols - 1].position);
  }
  return { c0, c1 };
}
