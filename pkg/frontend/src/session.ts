import type { ApiClient } from './api.js';
import type { Viewport } from './camera.js';
import type { Editor } from './editor.js';
import { pollJob, type PollOptions } from './jobs.js';
import { parsePly } from './mesh.js';
import { buildScene, type RenderScene } from './render.js';
import type {
  ControlNetDoc,
  FitMode,
  JobStatus,
  MetricsDoc,
  WeightsSpec,
} from './types.js';

export interface SessionOptions {
  mode?: FitMode;
  weights?: WeightsSpec;
  samples?: number;
  viewport?: Viewport;
  poll?: PollOptions;
}

export interface SessionResult {
  status: JobStatus;
  metrics?: MetricsDoc;
  controlNet?: ControlNetDoc;
  scene?: RenderScene;
  /** Solver/validation diagnostics when the job failed. */
  error?: string;
}

/** Sampling density of the service's metrics report. */
const METRIC_SAMPLES = 100;

/**
 * Submit the editor's chain, poll to completion, and build the rendered
 * scene. The mesh is requested on the same t-grid the metrics report
 * samples (METRIC_SAMPLES points), so the rendered warp maximum equals the
 * metrics document's beta_max exactly.
 */
export async function runAndRender(editor: Editor, api: ApiClient,
                                   options: SessionOptions = {}): Promise<SessionResult> {
  if (editor.rulings.length < 2) {
    throw new Error('draw at least two rulings before optimizing');
  }
  if (editor.jobInFlight) {
    throw new Error('an optimization is already running for this session');
  }
  const samples = options.samples ?? 100;
  const viewport = options.viewport ?? { width: 800, height: 600 };

  editor.jobInFlight = true;
  try {
    const submitted = await api.submitJob({
      mode: options.mode ?? 'relaxed',
      rulings: editor.rulings,
      weights: options.weights,
      samples,
      exports: ['metrics', 'mesh', 'control-net'],
      mesh_grid: [METRIC_SAMPLES - 1, 10],
    });
    editor.selectedJobId = submitted.id;
    const status = await pollJob(api, submitted.id, options.poll);
    if (status.status === 'failed') {
      return { status, error: status.error ?? 'job failed' };
    }
    const metrics = JSON.parse(status.exports!.metrics!) as MetricsDoc;
    const controlNet = JSON.parse(status.exports!['control-net']!) as ControlNetDoc;
    const mesh = parsePly(status.exports!.mesh!);
    const scene = buildScene({
      mesh,
      camera: editor.camera,
      viewport,
      overlays: editor.overlays,
      rulings: editor.rulings,
      controlNet,
    });
    return { status, metrics, controlNet, scene };
  } finally {
    editor.jobInFlight = false;
  }
}
