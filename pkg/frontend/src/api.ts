/** Typed client for the recovery-curve prediction service.
 *
 * The UI performs no statistical computation: everything plotted comes
 * straight from these response payloads.
 */

export interface PredictionRequest {
  age?: number;
  age_bin?: number;
  init_bin?: number;
  covariates?: number[];
  s: number;
  times: number[];
  quantiles?: number[];
  observation_noise?: boolean;
  draws?: number;
  include_draws?: number;
}

export interface PatientClass {
  age_bin: number;
  init_bin: number;
  age_range: [number, number | null];
  init_range: [number, number];
}

export interface ClassesResponse {
  classes: PatientClass[];
  fit_id: string | null;
}

export interface HealthResponse {
  status: string;
  fit_id: string | null;
}

export interface PredictResponse {
  fit_id: string;
  max_r_hat: number;
  times: number[];
  quantiles: Record<string, number[]>;
  class: { age_bin: number; init_bin: number } | null;
  s: number;
  draw_subsample?: number[][];
}

export class ServiceError extends Error {
  constructor(
    readonly status: number,
    readonly body: unknown,
  ) {
    super(`service returned ${status}: ${JSON.stringify(body)}`);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  private async call<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchImpl(this.baseUrl + path, init);
    let body: unknown;
    try {
      body = await resp.json();
    } catch {
      body = null;
    }
    if (!resp.ok) {
      throw new ServiceError(resp.status, body);
    }
    return body as T;
  }

  health(): Promise<HealthResponse> {
    return this.call<HealthResponse>("/health");
  }

  classes(): Promise<ClassesResponse> {
    return this.call<ClassesResponse>("/classes");
  }

  predict(request: PredictionRequest): Promise<PredictResponse> {
    return this.call<PredictResponse>("/predict", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(request),
    });
  }
}
