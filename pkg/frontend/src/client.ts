/** Transport to the service: one POST endpoint, zod-validated responses. */
import {
  ProtocolRequest,
  ProtocolResponse,
  parseResponse,
} from "./protocol.js";

export interface FetchLike {
  (url: string, init: {
    method: string;
    headers: Record<string, string>;
    body: string;
  }): Promise<{ ok: boolean; status: number; json(): Promise<unknown> }>;
}

export class ServiceClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetcher: FetchLike = globalThis.fetch.bind(globalThis),
  ) {}

  async send(req: ProtocolRequest): Promise<ProtocolResponse> {
    const r = await this.fetcher(`${this.baseUrl}/api/command`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(req),
    });
    if (!r.ok) {
      throw new Error(`service replied ${r.status}`);
    }
    return parseResponse(await r.json());
  }
}
