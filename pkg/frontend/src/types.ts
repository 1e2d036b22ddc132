/** Wire types shared with the fitting service. */

export type Vec3 = [number, number, number];

export interface RulingData {
  q: Vec3;
  p: Vec3;
}

export interface AnchorData {
  a: Vec3;
  b: Vec3;
}

export interface RulDocument {
  format: 'rul';
  version: 1;
  unit: string;
  rulings: RulingData[];
  anchors?: AnchorData[];
}

export interface CurveData {
  degree: number;
  knots: number[];
  control_points: Vec3[];
}

export interface WeightsSpec {
  lambda_energy?: number;
  lambda_width?: number;
  lambda_interior?: number;
  lambda_closeness?: number;
  lambda_unit?: number;
}

export type FitMode = 'relaxed' | 'fixed-boundary';
export type ExportFormat = 'metrics' | 'mesh' | 'control-net';

export interface JobSpecBody {
  mode: FitMode;
  rulings: RulingData[];
  curve?: CurveData;
  weights?: WeightsSpec;
  samples?: number;
  exports?: ExportFormat[];
  mesh_grid?: [number, number];
  refine?: number;
}

export interface OuterIterate {
  beta_max: number;
  beta_avg: number;
  objective: number;
}

export interface MetricsDoc {
  format: 'metrics';
  version: 1;
  mode: string;
  beta_max: number;
  beta_avg: number;
  d_max: number;
  d_avg: number;
  sample_count: number;
  defects: number[];
  scale: number;
  closeness_residual: number;
  termination: string;
  outer_iterations: number;
  outer_trace: OuterIterate[];
}

export interface ControlNetDoc {
  format: 'control-net';
  version: 1;
  curves: { c0: CurveData; c1: CurveData };
  initial_curves?: { c0: CurveData; c1: CurveData };
}

export type JobState = 'queued' | 'running' | 'done' | 'failed';

export interface JobStatus {
  id: string;
  status: JobState;
  error?: string;
  metrics?: MetricsDoc;
  exports?: Partial<Record<ExportFormat, string>>;
}

export interface ExtendChainResponse {
  accepted: boolean;
  reason?: string;
  tolerance?: number;
  rulings?: RulingData[];
  defects?: number[];
}

export interface ValidateResponse {
  count: number;
  defects: number[];
  max_defect: number;
}
