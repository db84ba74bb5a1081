import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { ProtocolResponse, parseResponse } from "../src/protocol.js";
import { VNode, findAll } from "../src/vdom.js";

const here = dirname(fileURLToPath(import.meta.url));

export function fixture(name: string): ProtocolResponse {
  const raw = readFileSync(join(here, "fixtures", name), "utf-8");
  return parseResponse(JSON.parse(raw));
}

export interface ItemRow {
  field: string;
  descriptor?: string;
  kind: string;
  value: string;
  placeholder: string;
}

export function itemRows(tree: VNode): ItemRow[] {
  return findAll(tree, (n) => n.attrs["class"]?.includes("item-line") ?? false)
    .map((line) => {
      const input = findAll(line, (n) => n.tag === "input")[0];
      return {
        field: line.attrs["data-field"] ?? "",
        descriptor: line.attrs["data-descriptor"],
        kind: line.attrs["data-kind"] ?? "",
        value: input?.attrs["value"] ?? "",
        placeholder: input?.attrs["placeholder"] ?? "",
      };
    });
}

export function refRows(tree: VNode) {
  return findAll(tree, (n) => n.attrs["class"] === "ref-line").map((line) => ({
    kind: line.attrs["data-kind"] ?? "",
    entered: line.attrs["data-entered"] === "true",
    mark: textOfClass(line, "toggle-mark"),
    shown: textOfClass(line, "ref-id"),
  }));
}

function textOfClass(node: VNode, cls: string): string {
  const hit = findAll(node, (n) => n.attrs["class"]?.split(" ").includes(cls) ?? false)[0];
  if (!hit) {
    return "";
  }
  return hit.children.filter((c): c is string => typeof c === "string").join("");
}
