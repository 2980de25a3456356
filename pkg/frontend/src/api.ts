// Typed client for the calibration service. All segmentation semantics
// live server-side; this file only moves JSON and PNG bytes.

export interface Params {
  alpha: number;
  beta: number;
  gamma: number;
  delta: number;
  tau: number;
  semantic_pregate: boolean;
  pregate_epsilon: number;
  min_area: number;
  margin: number;
  connectivity: 4 | 8;
  iou_min: number;
  gap_max: number;
  tail_propagate: boolean;
}

export interface Meta {
  frames: number;
  width: number;
  height: number;
  videos: string[];
  ground_truth: boolean;
  kernel_backend: string;
  cue_roles: string[];
}

export interface BoxJson {
  id: number;
  x0: number;
  y0: number;
  x1: number;
  y1: number;
  score: number;
}

export interface FuseResponse {
  frame: number;
  boxes: BoxJson[];
  mask_pixels: number;
  overlay_png: string; // base64
}

export interface ScoreResponse {
  frame: number;
  iou: number;
  dice: number;
}

export class ApiError extends Error {
  constructor(
    message: string,
    readonly kind: "unreachable" | "validation" | "http",
    readonly status?: number,
  ) {
    super(message);
  }
}

async function parseFailure(resp: Response): Promise<never> {
  let detail = `${resp.status} ${resp.statusText}`;
  try {
    const body = await resp.json();
    if (body && body.detail) detail = JSON.stringify(body.detail);
  } catch {
    // non-JSON error body; keep the status line
  }
  throw new ApiError(detail, resp.status === 422 ? "validation" : "http", resp.status);
}

export class CalibApi {
  constructor(
    readonly baseUrl: string,
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    let resp: Response;
    try {
      resp = await this.fetchFn(`${this.baseUrl}${path}`, init);
    } catch (err) {
      throw new ApiError(`server unreachable: ${err}`, "unreachable");
    }
    if (!resp.ok) await parseFailure(resp);
    return resp;
  }

  async meta(): Promise<Meta> {
    return (await this.request("/meta")).json();
  }

  frameUrl(t: number): string {
    return `${this.baseUrl}/frames/${t}`;
  }

  cueUrl(role: string, t: number): string {
    return `${this.baseUrl}/cues/${role}/${t}`;
  }

  async fuse(frame: number, params: Params): Promise<FuseResponse> {
    const body = {
      frame,
      weights: {
        alpha: params.alpha,
        beta: params.beta,
        gamma: params.gamma,
        delta: params.delta,
      },
      tau: params.tau,
      semantic_pregate: params.semantic_pregate,
      pregate_epsilon: params.pregate_epsilon,
      min_area: params.min_area,
      margin: params.margin,
      connectivity: params.connectivity,
    };
    const resp = await this.request("/fuse", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    return resp.json();
  }

  async score(frame: number, params: Params): Promise<ScoreResponse> {
    const query = new URLSearchParams({
      frame: String(frame),
      alpha: String(params.alpha),
      beta: String(params.beta),
      gamma: String(params.gamma),
      delta: String(params.delta),
      tau: String(params.tau),
      min_area: String(params.min_area),
      margin: String(params.margin),
    });
    return (await this.request(`/score?${query}`)).json();
  }

  async getConfig(): Promise<Params> {
    return (await this.request("/config")).json();
  }

  async putConfig(params: Params): Promise<Params> {
    const resp = await this.request("/config", {
      method: "PUT",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(params),
    });
    return resp.json();
  }
}
