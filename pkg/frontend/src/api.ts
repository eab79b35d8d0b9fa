import type {
  GatewayEvent,
  SamplingConfig,
  SessionView,
  TurnResponse,
} from './types.js';

export class GatewayError extends Error {
  constructor(message: string, readonly status?: number) {
    super(message);
    this.name = 'GatewayError';
  }
}

async function asJson<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    let detail = `${resp.status}`;
    try {
      const body = (await resp.json()) as { detail?: string };
      if (body.detail) detail = `${resp.status}: ${body.detail}`;
    } catch {
      // keep the bare status
    }
    throw new GatewayError(`gateway error ${detail}`, resp.status);
  }
  return (await resp.json()) as T;
}

export class GatewayClient {
  constructor(readonly baseUrl: string) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let resp: Response;
    try {
      resp = await fetch(`${this.baseUrl}${path}`, init);
    } catch (err) {
      throw new GatewayError(`gateway unreachable: ${String(err)}`);
    }
    return asJson<T>(resp);
  }

  health(): Promise<{ status: string }> {
    return this.request('/healthz');
  }

  presets(): Promise<Record<string, SamplingConfig>> {
    return this.request('/presets');
  }

  createSession(body: {
    model_id: string;
    sampling?: SamplingConfig;
    preset?: string;
    scenario?: string;
    response_language?: string;
  }): Promise<SessionView> {
    return this.request('/sessions', {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(body),
    });
  }

  getSession(sessionId: string): Promise<SessionView> {
    return this.request(`/sessions/${encodeURIComponent(sessionId)}`);
  }

  postMessage(sessionId: string, text: string): Promise<TurnResponse> {
    return this.request(`/sessions/${encodeURIComponent(sessionId)}/messages`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ text }),
    });
  }

  async events(sessionId: string): Promise<GatewayEvent[]> {
    const body = await this.request<{ events: GatewayEvent[] }>(
      `/sessions/${encodeURIComponent(sessionId)}/events`,
    );
    return body.events;
  }
}
