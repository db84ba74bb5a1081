/**
 * The controller: maps user actions 1:1 onto protocol commands and swaps the
 * whole view state for every response. At most one request is in flight;
 * interactions during a round-trip are dropped rather than queued, so the
 * rendered state always mirrors the service.
 */
import { ServiceClient } from "./client.js";
import { Listing, ProtocolResponse } from "./protocol.js";
import { Actions, ViewState, fromResponse } from "./view.js";

export class AppController implements Actions {
  state: ViewState | null = null;
  examples: Listing[] = [];
  private inflight = false;

  constructor(
    private readonly client: ServiceClient,
    private readonly onChange: (state: ViewState | null) => void = () => undefined,
  ) {}

  private async send(
    command: string,
    payload: Record<string, unknown> = {},
  ): Promise<ProtocolResponse | null> {
    if (this.inflight) {
      return null;
    }
    this.inflight = true;
    try {
      const resp = await this.client.send({
        session_id: this.state?.sessionId ?? undefined,
        command,
        payload,
      });
      this.state = fromResponse(resp, this.state ?? undefined);
      this.onChange(this.state);
      return resp;
    } finally {
      this.inflight = false;
    }
  }

  async loadExamples(): Promise<void> {
    const resp = await this.client.send({ command: "list_examples" });
    this.examples = resp.listing ?? [];
  }

  async start(exampleId: string): Promise<void> {
    this.state = null;
    await this.send("start", { example_id: exampleId, settings: {} });
  }

  async startCas(text: string): Promise<void> {
    this.state = null;
    await this.send("start", { cas: text, settings: {} });
  }

  submitItem(field: string, text: string): void {
    void this.send("input", { field, text });
  }

  editBuffer(key: string, text: string): void {
    if (this.state) {
      this.state = {
        ...this.state,
        buffers: { ...this.state.buffers, [key]: text },
      };
      this.onChange(this.state);
    }
  }

  deleteItem(field: string, descriptor: string): void {
    void this.send("delete", { field, descriptor });
  }

  requestNextStep(): void {
    void this.send("next_step");
  }

  toggleView(): void {
    void this.send("toggle");
  }

  autoComplete(): void {
    void this.send("complete");
  }

  refine(): void {
    void this.send("refine");
  }

  finish(): void {
    void this.send("finish");
  }
}
