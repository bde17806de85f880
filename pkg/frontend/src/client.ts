import type {
  ConfigOverrides, HealthInfo, MakeEnvResponse, ObservationPayload, StepResult,
} from "./types.js";

export class BindingError extends Error {
  constructor(message: string, readonly code: string = "error") {
    super(message);
    this.name = "BindingError";
  }
}

async function requestJson<T>(
  url: string,
  init?: RequestInit,
): Promise<T> {
  let response: Response;
  try {
    response = await fetch(url, init);
  } catch (err) {
    throw new BindingError(`service unreachable at ${url}: ${err}`, "unreachable");
  }
  const body = await response.json().catch(() => ({}));
  if (!response.ok) {
    const detail = (body as { detail?: { code?: string; message?: string } }).detail;
    throw new BindingError(
      detail?.message ?? `HTTP ${response.status}`,
      detail?.code ?? String(response.status),
    );
  }
  return body as T;
}

/** One live environment session; operations after close() throw. */
export class BoundEnv {
  private closed = false;

  constructor(
    private readonly baseUrl: string,
    readonly envId: string,
    readonly game: string,
    readonly actionDim: number,
    readonly config: Record<string, unknown>,
  ) {}

  private ensureOpen(): void {
    if (this.closed) {
      throw new BindingError(`env ${this.envId} is closed`, "use_after_close");
    }
  }

  async reset(seed?: number): Promise<ObservationPayload> {
    this.ensureOpen();
    return requestJson<ObservationPayload>(
      `${this.baseUrl}/envs/${this.envId}/reset`,
      {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ seed: seed ?? null }),
      },
    );
  }

  async step(action: number[]): Promise<StepResult> {
    this.ensureOpen();
    if (!Array.isArray(action) || action.length !== this.actionDim) {
      throw new BindingError(
        `action has length ${action?.length}, expected ${this.actionDim}`,
        "bad_action",
      );
    }
    return requestJson<StepResult>(`${this.baseUrl}/envs/${this.envId}/step`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ action }),
    });
  }

  async close(): Promise<void> {
    if (this.closed) return;
    this.closed = true;
    await requestJson(`${this.baseUrl}/envs/${this.envId}`, { method: "DELETE" });
  }
}

/** Client for the environment service; mirrors make/reset/step/close. */
export class EmbodiedClient {
  constructor(readonly baseUrl: string) {}

  async health(): Promise<HealthInfo> {
    return requestJson<HealthInfo>(`${this.baseUrl}/health`);
  }

  /** Build identifier of the native package this client is talking to. */
  async version(): Promise<string> {
    const info = await this.health();
    return info.build;
  }

  async make(
    name: string,
    overrides: ConfigOverrides = {},
    seed?: number,
  ): Promise<BoundEnv> {
    const made = await requestJson<MakeEnvResponse>(`${this.baseUrl}/envs`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ name, overrides, seed: seed ?? null }),
    });
    return new BoundEnv(
      this.baseUrl, made.env_id, made.game, made.action_dim, made.config,
    );
  }
}
