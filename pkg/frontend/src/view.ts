/**
 * View state and rendering for the Specification.
 *
 * All feedback comes from the service; this module never classifies input.
 * Rendering is a pure function of the state, so reloading against the same
 * session reproduces the identical tree.
 */
import {
  ModelLine,
  PrecondLine,
  Proposal,
  ProtocolResponse,
  RefLine,
  TrailEntry,
} from "./protocol.js";
import { VNode, h, withHandlers } from "./vdom.js";

export interface ViewState {
  sessionId: string | null;
  status: "ok" | "error";
  message: string | null;
  view: "Problem" | "Method";
  lines: ModelLine[];
  refs: RefLine[];
  preconds: PrecondLine[];
  allPrecondsTrue: boolean;
  isComplete: boolean;
  methodComplete: boolean;
  finished: boolean;
  liveVariants: number[];
  proposal: Proposal | null;
  trail: TrailEntry[] | null;
  matched: string | null;
  /** local edit buffers, one per item line; semantics never depend on them */
  buffers: Record<string, string>;
}

export function bufferKey(line: ModelLine): string {
  return `${line.m_field}:${line.descriptor ?? `entry${line.entry ?? "?"}`}`;
}

export function fromResponse(
  resp: ProtocolResponse,
  prev?: ViewState,
): ViewState {
  const buffers: Record<string, string> = {};
  for (const line of resp.model_render) {
    buffers[bufferKey(line)] = line.text;
  }
  const proposal = resp.proposals?.[0] ?? null;
  if (proposal?.field && proposal.text) {
    const descriptor = proposal.text.split(" ", 1)[0] ?? "";
    buffers[`${proposal.field}:${descriptor}`] = proposal.text;
  }
  return {
    sessionId: resp.session_id ?? prev?.sessionId ?? null,
    status: resp.status,
    message: resp.message ?? null,
    view: resp.view ?? prev?.view ?? "Problem",
    lines: resp.model_render,
    refs: resp.refs_render,
    preconds: resp.preconds_render,
    allPrecondsTrue: resp.all_preconds_true ?? false,
    isComplete: resp.is_complete ?? false,
    methodComplete: resp.method_complete ?? false,
    finished: resp.finished ?? false,
    liveVariants: resp.live_variants,
    proposal,
    trail: resp.trail ?? null,
    matched: resp.matched ?? null,
    buffers,
  };
}

export interface Actions {
  submitItem(field: string, text: string): void;
  editBuffer(key: string, text: string): void;
  deleteItem(field: string, descriptor: string): void;
  requestNextStep(): void;
  toggleView(): void;
  autoComplete(): void;
  refine(): void;
  finish(): void;
}

const NO_ACTIONS: Actions = {
  submitItem: () => undefined,
  editBuffer: () => undefined,
  deleteItem: () => undefined,
  requestNextStep: () => undefined,
  toggleView: () => undefined,
  autoComplete: () => undefined,
  refine: () => undefined,
  finish: () => undefined,
};

const FIELD_ORDER = ["Given", "Find", "Relate"];

export function renderSpecification(
  vs: ViewState,
  actions: Actions = NO_ACTIONS,
): VNode {
  return h(
    "section",
    { class: "specification", "data-view": vs.view },
    vs.message
      ? h("div", { class: `banner banner-${vs.status}` }, vs.message)
      : null,
    renderModel(vs, actions),
    renderReferences(vs, actions),
    renderControls(vs, actions),
    vs.trail ? renderTrail(vs) : null,
  );
}

function renderModel(vs: ViewState, actions: Actions): VNode {
  const rows: VNode[] = [];
  for (const field of FIELD_ORDER) {
    for (const line of vs.lines.filter((l) => l.m_field === field)) {
      rows.push(renderItemLine(vs, line, actions));
    }
    if (field === "Given" && vs.view === "Problem") {
      for (const pre of vs.preconds) {
        rows.push(renderWhereLine(pre));
      }
    }
  }
  return h(
    "section",
    { class: "model" },
    h(
      "h2",
      {},
      "Model",
      h(
        "span",
        { class: "variants", title: "consistent variants" },
        vs.liveVariants.map((v) => `#${v}`).join(" "),
      ),
    ),
    ...rows,
  );
}

function renderItemLine(
  vs: ViewState,
  line: ModelLine,
  actions: Actions,
): VNode {
  const key = bufferKey(line);
  const buffer = vs.buffers[key] ?? line.text;
  const input = withHandlers(
    h("input", {
      class: "item-input" + (line.feedback_kind === "syntax" ? " underlined" : ""),
      value: buffer,
      placeholder: line.template ?? "",
      "data-key": key,
    }),
    {
      input: (ev) =>
        actions.editBuffer(key, (ev as { target: HTMLInputElement }).target.value),
      keydown: (ev) => {
        const e = ev as KeyboardEvent & { target: HTMLInputElement };
        if (e.key === "Enter") {
          actions.submitItem(line.m_field, e.target.value);
        }
      },
    },
  );
  const attrs: Record<string, string> = {
    class: `item-line kind-${line.feedback_kind}`,
    "data-field": line.m_field,
    "data-kind": line.feedback_kind,
  };
  if (line.descriptor) {
    attrs["data-descriptor"] = line.descriptor;
  }
  if (line.pos) {
    attrs["data-line"] = String(line.pos.line);
    attrs["data-col"] = String(line.pos.col);
  }
  return h(
    "div",
    attrs,
    h("span", { class: "field-label" }, line.m_field),
    input,
    h(
      "span",
      { class: `marker marker-${line.feedback_kind}`, title: line.feedback_kind },
      markerGlyph(line.feedback_kind),
    ),
    line.variants.length
      ? h(
          "span",
          { class: "variant-badges" },
          ...line.variants.map((v) =>
            h("span", { class: "variant-badge" }, `#${v}`),
          ),
        )
      : null,
    line.entry !== undefined && line.descriptor
      ? withHandlers(h("button", { class: "delete" }, "×"), {
          click: () => actions.deleteItem(line.m_field, line.descriptor!),
        })
      : null,
  );
}

function markerGlyph(kind: ModelLine["feedback_kind"]): string {
  switch (kind) {
    case "correct":
      return "✓";
    case "incomplete":
      return "…";
    case "superfluous":
      return "✗";
    case "syntax":
      return "⚠";
    case "missing":
      return "·";
  }
}

function renderWhereLine(pre: PrecondLine): VNode {
  return h(
    "div",
    {
      class: `where-line ${pre.holds ? "holds" : "fails"}`,
      "data-holds": String(pre.holds),
    },
    h("span", { class: "field-label" }, "Where"),
    h("span", { class: "where-text" }, pre.text),
    h(
      "span",
      {
        class: `marker marker-${pre.holds ? "correct" : "superfluous"}`,
        title: pre.note ?? (pre.holds ? "holds" : "fails"),
      },
      pre.holds ? "✓" : "✗",
    ),
  );
}

const REF_LABELS: Record<RefLine["kind"], string> = {
  theory: "Theory_Ref",
  problem: "Problem_Ref",
  method: "Method_Ref",
};

const REF_TEMPLATES: Record<RefLine["kind"], string> = {
  theory: '"__"',
  problem: '"__/__"',
  method: '"__/__"',
};

export function toggleMark(
  kind: RefLine["kind"],
  view: ViewState["view"],
): string {
  // the active model owner shows ⊗, the idle one ⊙
  if (kind === "problem") {
    return view === "Problem" ? "⊗" : "⊙";
  }
  if (kind === "method") {
    return view === "Method" ? "⊗" : "⊙";
  }
  return "";
}

function renderReferences(vs: ViewState, actions: Actions): VNode {
  return h(
    "section",
    { class: "references" },
    h("h2", {}, "References"),
    ...vs.refs.map((ref) =>
      h(
        "div",
        {
          class: "ref-line",
          "data-kind": ref.kind,
          "data-entered": String(ref.entered),
        },
        h("span", { class: "toggle-mark" }, toggleMark(ref.kind, vs.view)),
        h("span", { class: "ref-label" }, REF_LABELS[ref.kind]),
        ref.entered
          ? h("span", { class: "ref-id" }, `"${ref.id}"`)
          : h(
              "span",
              { class: "ref-id unconfirmed", title: ref.id },
              REF_TEMPLATES[ref.kind],
            ),
      ),
    ),
  );
}

function renderControls(vs: ViewState, actions: Actions): VNode {
  const button = (label: string, cls: string, onClick: () => void) =>
    withHandlers(h("button", { class: cls }, label), { click: onClick });
  return h(
    "section",
    { class: "controls" },
    button("next step", "next-step", actions.requestNextStep),
    button(
      vs.view === "Problem" ? "show method ⊙" : "show problem ⊙",
      "toggle-view",
      actions.toggleView,
    ),
    button("complete", "auto-complete", actions.autoComplete),
    button("refine", "refine", actions.refine),
    button("finish", "finish", actions.finish),
    h(
      "span",
      { class: "status-flags" },
      [
        vs.isComplete ? "model complete" : "",
        vs.finished ? "finished" : "",
      ]
        .filter(Boolean)
        .join(", "),
    ),
  );
}

function renderTrail(vs: ViewState): VNode {
  return h(
    "section",
    { class: "trail" },
    h("h2", {}, `Refinement${vs.matched ? ` → ${vs.matched}` : ""}`),
    ...(vs.trail ?? []).map((t) =>
      h(
        "div",
        { class: "trail-line", "data-holds": String(t.holds) },
        h("span", { class: "marker" }, t.holds ? "✓" : "✗"),
        h("span", { class: "trail-path" }, t.path),
      ),
    ),
  );
}
