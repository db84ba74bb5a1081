/**
 * A minimal element tree. Render functions build VNodes so tests can assert
 * on structure without a DOM; `mount` turns the tree into real elements in
 * the browser.
 */

export interface VNode {
  tag: string;
  attrs: Record<string, string>;
  children: Array<VNode | string>;
  on?: Record<string, (ev?: unknown) => void>;
}

type Child = VNode | string | null | undefined | false;

export function h(
  tag: string,
  attrs: Record<string, string> = {},
  ...children: Child[]
): VNode {
  return {
    tag,
    attrs,
    children: children.filter(
      (c): c is VNode | string => c !== null && c !== undefined && c !== false,
    ),
  };
}

export function withHandlers(
  node: VNode,
  on: Record<string, (ev?: unknown) => void>,
): VNode {
  return { ...node, on };
}

export function mount(node: VNode | string): Node {
  if (typeof node === "string") {
    return document.createTextNode(node);
  }
  const el = document.createElement(node.tag);
  for (const [key, value] of Object.entries(node.attrs)) {
    if (key === "value" && el instanceof HTMLInputElement) {
      el.value = value;
    } else {
      el.setAttribute(key, value);
    }
  }
  for (const [event, handler] of Object.entries(node.on ?? {})) {
    el.addEventListener(event, handler);
  }
  for (const child of node.children) {
    el.appendChild(mount(child));
  }
  return el;
}

/** Depth-first search helpers used by the tests. */
export function findAll(
  node: VNode,
  pred: (n: VNode) => boolean,
  acc: VNode[] = [],
): VNode[] {
  if (pred(node)) {
    acc.push(node);
  }
  for (const child of node.children) {
    if (typeof child !== "string") {
      findAll(child, pred, acc);
    }
  }
  return acc;
}

export function textOf(node: VNode | string): string {
  if (typeof node === "string") {
    return node;
  }
  return node.children.map(textOf).join("");
}
