/** Browser bootstrap: example picker plus the specification panel. */
import { AppController } from "./app.js";
import { ServiceClient } from "./client.js";
import { h, mount, withHandlers } from "./vdom.js";
import { renderSpecification } from "./view.js";

function rerender(root: HTMLElement, controller: AppController): void {
  root.replaceChildren();
  const picker = h(
    "div",
    { class: "picker" },
    ...controller.examples.map((ex) =>
      withHandlers(h("button", { class: "example", title: ex.text }, ex.id), {
        click: () => void controller.start(ex.id),
      }),
    ),
  );
  root.appendChild(mount(picker));
  if (controller.state) {
    root.appendChild(mount(renderSpecification(controller.state, controller)));
  }
}

async function init(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) {
    throw new Error("missing #app element");
  }
  const client = new ServiceClient("");
  const controller: AppController = new AppController(client, () =>
    rerender(root, controller),
  );
  await controller.loadExamples();
  rerender(root, controller);
}

void init();
