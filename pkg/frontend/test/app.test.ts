import { describe, expect, it } from "vitest";

import { AppController } from "../src/app.js";
import { ProtocolRequest, ProtocolResponse } from "../src/protocol.js";
import { bufferKey } from "../src/view.js";
import { fixture } from "./helpers.js";

class MockClient {
  sent: ProtocolRequest[] = [];

  constructor(private readonly script: Record<string, ProtocolResponse[]>) {}

  async send(req: ProtocolRequest): Promise<ProtocolResponse> {
    this.sent.push(req);
    const queue = this.script[req.command];
    if (!queue || queue.length === 0) {
      throw new Error(`unscripted command ${req.command}`);
    }
    return queue.length > 1 ? queue.shift()! : queue[0]!;
  }
}

const flush = () => new Promise((resolve) => setTimeout(resolve, 0));

describe("controller", () => {
  it("toggling twice restores the identical view state", async () => {
    const client = new MockClient({
      start: [fixture("fig2_complete.json")],
      toggle: [fixture("fig4_method.json"), fixture("fig2_complete.json")],
    });
    const app = new AppController(client as never);
    await app.start("Diff_App/coil-kernel");
    const before = JSON.stringify(app.state);
    app.toggleView();
    await flush();
    expect(app.state?.view).toBe("Method");
    app.toggleView();
    await flush();
    expect(JSON.stringify(app.state)).toBe(before);
  });

  it("pre-fills the edit buffer with the proposal text verbatim", async () => {
    const client = new MockClient({
      start: [fixture("fig1_fresh.json")],
      next_step: [fixture("next_step_fresh.json")],
    });
    const app = new AppController(client as never);
    await app.start("Diff_App/coil-kernel");
    app.requestNextStep();
    await flush();
    const proposal = app.state?.proposal;
    expect(proposal?.tactic).toBe("Add_Given");
    expect(proposal?.text).toBe("Constants [r = 7]");
    const line = app.state!.lines.find((l) => l.descriptor === "Constants")!;
    expect(app.state!.buffers[bufferKey(line)]).toBe(proposal!.text);
  });

  it("maps every action onto its protocol command", async () => {
    const snapshot = fixture("fig2_complete.json");
    const client = new MockClient({
      start: [snapshot],
      input: [snapshot],
      toggle: [snapshot],
      complete: [snapshot],
      refine: [snapshot],
      finish: [snapshot],
      delete: [snapshot],
      next_step: [snapshot],
    });
    const app = new AppController(client as never);
    await app.start("Diff_App/coil-kernel");
    app.submitItem("Given", "Constants [r = 7]");
    await flush();
    app.toggleView();
    await flush();
    app.autoComplete();
    await flush();
    app.refine();
    await flush();
    app.finish();
    await flush();
    app.deleteItem("Relate", "SideConditions");
    await flush();
    app.requestNextStep();
    await flush();
    expect(client.sent.map((r) => r.command)).toEqual([
      "start", "input", "toggle", "complete", "refine", "finish",
      "delete", "next_step",
    ]);
    const input = client.sent[1]!;
    expect(input.payload).toEqual({ field: "Given", text: "Constants [r = 7]" });
    expect(input.session_id).toBe(snapshot.session_id);
  });

  it("drops interactions while a request is in flight", async () => {
    let release: (value: ProtocolResponse) => void = () => undefined;
    const pending = new Promise<ProtocolResponse>((resolve) => {
      release = resolve;
    });
    const client = {
      sent: [] as ProtocolRequest[],
      async send(req: ProtocolRequest) {
        this.sent.push(req);
        return req.command === "start" ? fixture("fig1_fresh.json") : pending;
      },
    };
    const app = new AppController(client as never);
    await app.start("Diff_App/coil-kernel");
    app.toggleView();
    app.autoComplete(); // dropped: toggle still in flight
    release(fixture("fig4_method.json"));
    await flush();
    expect(client.sent.map((r) => r.command)).toEqual(["start", "toggle"]);
    expect(app.state?.view).toBe("Method");
  });

  it("local edits never touch semantic state", async () => {
    const client = new MockClient({ start: [fixture("fig2_complete.json")] });
    const app = new AppController(client as never);
    await app.start("Diff_App/coil-kernel");
    const semantic = JSON.stringify({ ...app.state, buffers: null });
    app.editBuffer("Given:Constants", "Constants [r = 9]");
    expect(app.state!.buffers["Given:Constants"]).toBe("Constants [r = 9]");
    expect(JSON.stringify({ ...app.state, buffers: null })).toBe(semantic);
  });
});
