import { describe, expect, it } from "vitest";

import { findAll, textOf } from "../src/vdom.js";
import { fromResponse, renderSpecification, toggleMark } from "../src/view.js";
import { fixture, itemRows, refRows } from "./helpers.js";

describe("fresh Specification (template figure)", () => {
  const tree = renderSpecification(fromResponse(fixture("fig1_fresh.json")));

  it("lays out Given, Where, Find, Relate with templates", () => {
    expect(itemRows(tree)).toEqual([
      { field: "Given", descriptor: "Constants", kind: "missing",
        value: "", placeholder: "[__=__, __=__]" },
      { field: "Find", descriptor: "Maximum", kind: "missing",
        value: "", placeholder: "__" },
      { field: "Find", descriptor: "AdditionalValues", kind: "missing",
        value: "", placeholder: "[__, __]" },
      { field: "Relate", descriptor: "Extremum", kind: "missing",
        value: "", placeholder: "__" },
      { field: "Relate", descriptor: "SideConditions", kind: "missing",
        value: "", placeholder: "[__=__, __=__]" },
    ]);
    const where = findAll(tree, (n) => n.attrs["class"]?.startsWith("where-line") ?? false);
    expect(where).toHaveLength(1);
    expect(where[0]!.attrs["data-holds"]).toBe("false");
  });

  it("shows unconfirmed references as quoted templates", () => {
    expect(refRows(tree)).toEqual([
      { kind: "theory", entered: false, mark: "", shown: '"__"' },
      { kind: "problem", entered: false, mark: "⊗", shown: '"__/__"' },
      { kind: "method", entered: false, mark: "⊙", shown: '"__/__"' },
    ]);
  });
});

describe("complete Specification figure", () => {
  const tree = renderSpecification(fromResponse(fixture("fig2_complete.json")));

  it("marks every item correct with the entered text", () => {
    expect(itemRows(tree)).toEqual([
      { field: "Given", descriptor: "Constants", kind: "correct",
        value: "Constants [r = 7]", placeholder: "" },
      { field: "Find", descriptor: "Maximum", kind: "correct",
        value: "Maximum A", placeholder: "" },
      { field: "Find", descriptor: "AdditionalValues", kind: "correct",
        value: "AdditionalValues [u, v]", placeholder: "" },
      { field: "Relate", descriptor: "Extremum", kind: "correct",
        value: "Extremum (A = 2 * u * v - u ^ 2)", placeholder: "" },
      { field: "Relate", descriptor: "SideConditions", kind: "correct",
        value: "SideConditions [(u / 2) ^ 2 + (v / 2) ^ 2 = r ^ 2]",
        placeholder: "" },
    ]);
  });

  it("shows the evaluated precondition holding", () => {
    const where = findAll(tree, (n) => n.attrs["class"]?.startsWith("where-line") ?? false);
    expect(where.map((w) => [w.attrs["data-holds"], textOf(w)])).toEqual([
      ["true", "Where0 < 7✓"],
    ]);
  });

  it("shows confirmed references verbatim", () => {
    expect(refRows(tree).map((r) => r.shown)).toEqual([
      '"Diff_App"',
      '"univariate_calculus/Optimisation"',
      '"Optimisation/by_univariate_calculus"',
    ]);
  });

  it("titles every feedback marker with the service classification", () => {
    const itemLines = findAll(tree, (n) =>
      n.attrs["class"]?.includes("item-line") ?? false);
    for (const line of itemLines) {
      const marker = findAll(line, (n) =>
        (n.attrs["class"] ?? "").includes("marker-"))[0]!;
      expect(marker.attrs["title"]).toBe(line.attrs["data-kind"]);
    }
    const whereMarker = findAll(tree, (n) =>
      n.attrs["class"]?.startsWith("where-line") ?? false)
      .flatMap((w) => findAll(w, (n) => (n.attrs["class"] ?? "").includes("marker-")));
    expect(whereMarker[0]!.attrs["title"]).toBe("holds");
  });
});

describe("method view figure", () => {
  const tree = renderSpecification(fromResponse(fixture("fig4_method.json")));

  it("renders the method guard: six Given and two Find items", () => {
    const rows = itemRows(tree);
    expect(rows.map((r) => [r.field, r.descriptor, r.kind])).toEqual([
      ["Given", "Constants", "correct"],
      ["Given", "Extremum", "correct"],
      ["Given", "SideConditions", "correct"],
      ["Given", "FunctionVariable", "correct"],
      ["Given", "Domain", "correct"],
      ["Given", "ErrorBound", "correct"],
      ["Find", "Maximum", "correct"],
      ["Find", "AdditionalValues", "correct"],
    ]);
    // Where belongs to the problem view only
    expect(findAll(tree, (n) => n.attrs["class"]?.startsWith("where-line") ?? false))
      .toHaveLength(0);
  });

  it("flips the toggle: method active, problem idle", () => {
    const marks = Object.fromEntries(refRows(tree).map((r) => [r.kind, r.mark]));
    expect(marks).toEqual({ theory: "", problem: "⊙", method: "⊗" });
    expect(toggleMark("method", "Method")).toBe("⊗");
    expect(toggleMark("problem", "Method")).toBe("⊙");
  });
});

describe("syntax feedback", () => {
  const tree = renderSpecification(fromResponse(fixture("syntax_error.json")));

  it("underlines the offending input at its submitted position", () => {
    const bad = findAll(tree, (n) => n.attrs["data-kind"] === "syntax");
    expect(bad).toHaveLength(1);
    const input = findAll(bad[0]!, (n) => n.tag === "input")[0]!;
    expect(input.attrs["class"]).toContain("underlined");
    expect(input.attrs["value"]).toBe("Constants [r = ");
    expect(bad[0]!.attrs["data-line"]).toBe("2");
    expect(bad[0]!.attrs["data-col"]).toBe("1");
  });
});

describe("refinement trail panel", () => {
  const tree = renderSpecification(fromResponse(fixture("refine_trail.json")));

  it("lists visited nodes with verdicts and the matched leaf", () => {
    const lines = findAll(tree, (n) => n.attrs["class"] === "trail-line");
    const rows = lines.map((l) => [textOf(l).slice(1), l.attrs["data-holds"]]);
    expect(rows).toEqual([
      ["univariate/equation", "true"],
      ["univariate/equation/linear", "false"],
      ["univariate/equation/root", "false"],
      ["univariate/equation/polynomial", "true"],
    ]);
    const heading = findAll(tree, (n) => n.tag === "h2")
      .map(textOf)
      .find((t) => t.startsWith("Refinement"));
    expect(heading).toContain("univariate/equation/polynomial");
  });
});

describe("rendering is a pure function of the response", () => {
  it("same response, same tree", () => {
    const resp = fixture("fig2_complete.json");
    const a = renderSpecification(fromResponse(resp));
    const b = renderSpecification(fromResponse(resp));
    expect(JSON.stringify(a)).toBe(JSON.stringify(b));
  });
});
