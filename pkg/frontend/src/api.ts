import type {
  ExtendChainResponse,
  JobSpecBody,
  JobStatus,
  RulingData,
  ValidateResponse,
} from './types.js';

export class ApiError extends Error {
  constructor(message: string, readonly status: number, readonly detail?: unknown) {
    super(message);
  }
}

export interface ExtendChainRequest {
  rulings: RulingData[];
  anchor: { a: number[]; b: number[] };
  q: number[];
  p: number[];
  snap_tol?: number;
}

/** Thin typed client for the fitting service. */
export class ApiClient {
  constructor(readonly baseUrl: string,
              private readonly fetchFn: typeof fetch = fetch) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, {
      method,
      headers: body === undefined ? undefined : { 'content-type': 'application/json' },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await response.text();
    const payload = text ? JSON.parse(text) : null;
    if (!response.ok) {
      const detail = payload && typeof payload === 'object' ? payload.detail : payload;
      throw new ApiError(
        `${method} ${path} failed with ${response.status}`, response.status, detail,
      );
    }
    return payload as T;
  }

  health(): Promise<{ status: string; version: string }> {
    return this.request('GET', '/health');
  }

  validateRulings(rulings: RulingData[]): Promise<ValidateResponse> {
    return this.request('POST', '/validate-rulings', { rulings });
  }

  extendChain(req: ExtendChainRequest): Promise<ExtendChainResponse> {
    return this.request('POST', '/extend-chain', req);
  }

  submitJob(spec: JobSpecBody): Promise<{ id: string; status: string }> {
    return this.request('POST', '/jobs', spec);
  }

  getJob(id: string): Promise<JobStatus> {
    return this.request('GET', `/jobs/${id}`);
  }
}
