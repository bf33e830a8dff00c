import { ServiceClient } from "./api.js";
import { renderConsole } from "./render.js";
import { QueueController } from "./state.js";

const REFRESH_MS = 5000;

function serviceBaseUrl(): string {
  const fromQuery = new URLSearchParams(window.location.search).get("service");
  return fromQuery ?? window.location.origin;
}

async function start(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app element");
  const controller = new QueueController(new ServiceClient(serviceBaseUrl()));

  const rerender = () => renderConsole(root, controller.getState(), controller, rerender);
  const sync = async () => {
    await controller.refresh();
    rerender();
  };
  await sync();
  window.setInterval(() => void sync(), REFRESH_MS);
}

void start();
