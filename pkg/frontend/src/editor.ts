import { ApiClient } from './api.js';
import { writeRul } from './rul.js';
import type { AnchorData, RulingData, Vec3 } from './types.js';
import { add, distanceToSegment, scale, sub } from './vec.js';

export interface CameraState {
  yaw: number;
  pitch: number;
  distance: number;
  target: Vec3;
}

export interface OverlayToggles {
  initialCurves: boolean;
  resultCurves: boolean;
  rulings: boolean;
  warpColor: boolean;
}

interface Snapshot {
  rulings: RulingData[];
  anchor: AnchorData | null;
}

const ANCHOR_ON_RULING_TOL = 1e-9;

const copyRuling = (r: RulingData): RulingData => ({ q: [...r.q], p: [...r.p] });
const copyAnchor = (w: AnchorData | null): AnchorData | null =>
  w === null ? null : { a: [...w.a], b: [...w.b] };

/**
 * Single-page editor state machine for drawing a chain of control rulings.
 *
 * Geometry is never derived client-side: candidate rulings are snapped by the
 * service (`/extend-chain`) and edits are re-validated by the service. The
 * editor only mutates camera, overlays, and raw user input.
 */
export class Editor {
  rulings: RulingData[] = [];
  anchor: AnchorData | null = null;
  camera: CameraState = { yaw: 0.6, pitch: 0.4, distance: 6, target: [0.5, 0.5, 0] };
  overlays: OverlayToggles = {
    initialCurves: false, resultCurves: true, rulings: true, warpColor: true,
  };
  selectedJobId: string | null = null;
  jobInFlight = false;
  banner: string | null = null;
  /** Per-adjacent-pair planarity defects, as last reported by the service. */
  defects: number[] = [];

  private undoStack: Snapshot[] = [];
  private redoStack: Snapshot[] = [];

  constructor(private readonly api: ApiClient) {}

  private snapshot(): Snapshot {
    return {
      rulings: this.rulings.map(copyRuling),
      anchor: copyAnchor(this.anchor),
    };
  }

  private pushUndo(): void {
    this.undoStack.push(this.snapshot());
    this.redoStack = [];
  }

  private restore(snap: Snapshot): void {
    this.rulings = snap.rulings.map(copyRuling);
    this.anchor = copyAnchor(snap.anchor);
  }

  /** Place the first ruling; raw user input, no plane exists yet. */
  startChain(q: Vec3, p: Vec3): void {
    this.pushUndo();
    this.rulings = [{ q: [...q], p: [...p] }];
    this.anchor = null;
    this.defects = [];
    this.banner = null;
  }

  /** Define the working plane: A must sit on the last ruling, B tilts it. */
  setAnchor(a: Vec3, b: Vec3): void {
    const last = this.rulings[this.rulings.length - 1];
    if (!last) throw new Error('place a ruling before anchoring a plane');
    if (distanceToSegment(a, last.q, last.p) > ANCHOR_ON_RULING_TOL) {
      throw new Error('anchor point A must lie on the last ruling');
    }
    this.pushUndo();
    this.anchor = { a: [...a], b: [...b] };
  }

  get activePlaneDefined(): boolean {
    return this.anchor !== null && this.rulings.length > 0;
  }

  /**
   * Send candidate endpoints to the service for snapping onto the active
   * plane. Appends the snapped ruling on acceptance and advances the plane
   * to the new ruling (same tilt, re-anchored at its midpoint). On rejection
   * or network failure the state is unchanged and `banner` explains why.
   */
  async placeRuling(q: Vec3, p: Vec3, snapTol = 1e-6): Promise<boolean> {
    if (!this.activePlaneDefined) throw new Error('no active plane to place on');
    const anchor = this.anchor!;
    let response;
    try {
      response = await this.api.extendChain({
        rulings: this.rulings,
        anchor: { a: anchor.a, b: anchor.b },
        q, p, snap_tol: snapTol,
      });
    } catch (err) {
      this.banner = `service unreachable: ${(err as Error).message}`;
      return false;
    }
    if (!response.accepted || !response.rulings) {
      this.banner = response.reason ?? 'ruling rejected';
      return false;
    }
    this.pushUndo();
    this.rulings = response.rulings.map(copyRuling);
    this.defects = response.defects ?? [];
    this.banner = null;

    const appended = this.rulings[this.rulings.length - 1];
    const mid = scale(add(appended.q, appended.p), 0.5);
    const tilt = sub(anchor.b, anchor.a);
    this.anchor = { a: mid, b: add(mid, tilt) };
    return true;
  }

  /**
   * Retroactively edit a placed ruling. Downstream coplanarity may break;
   * the service re-validates and the new defects are surfaced rather than
   * silently accepted.
   */
  async updateRuling(index: number, q: Vec3, p: Vec3): Promise<number[]> {
    if (index < 0 || index >= this.rulings.length) {
      throw new Error(`no ruling at index ${index}`);
    }
    this.pushUndo();
    this.rulings[index] = { q: [...q], p: [...p] };
    if (this.rulings.length >= 2) {
      try {
        const report = await this.api.validateRulings(this.rulings);
        this.defects = report.defects;
        if (report.max_defect > 1e-9) {
          this.banner = `edit broke coplanarity: max defect ${report.max_defect.toExponential(2)}`;
        }
      } catch (err) {
        this.banner = `service unreachable: ${(err as Error).message}`;
      }
    }
    return this.defects;
  }

  undo(): boolean {
    const snap = this.undoStack.pop();
    if (!snap) return false;
    this.redoStack.push(this.snapshot());
    this.restore(snap);
    return true;
  }

  redo(): boolean {
    const snap = this.redoStack.pop();
    if (!snap) return false;
    this.undoStack.push(this.snapshot());
    this.restore(snap);
    return true;
  }

  /** Camera-only mutations; geometry untouched. */
  orbit(dYaw: number, dPitch: number): void {
    this.camera.yaw += dYaw;
    this.camera.pitch = Math.max(-1.5, Math.min(1.5, this.camera.pitch + dPitch));
  }

  zoom(factor: number): void {
    this.camera.distance = Math.max(0.1, this.camera.distance * factor);
  }

  pan(delta: Vec3): void {
    this.camera.target = add(this.camera.target, delta);
  }

  exportRul(unit = 'unitless'): string {
    return writeRul(this.rulings, unit, this.anchor ? [this.anchor] : undefined);
  }
}
