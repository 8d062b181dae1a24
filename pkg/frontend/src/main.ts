import { ApiClient, ConditionName } from "./api.js";
import { App } from "./app.js";

const params = new URLSearchParams(window.location.search);
const condition = (params.get("condition") ?? "labels") as ConditionName;
const corpus = params.get("corpus") ?? undefined;

const root = document.getElementById("app");
if (!root) throw new Error("missing #app container");

const client = new ApiClient(window.location.origin);
const app = new App(document, root, client, {
  condition,
  corpus,
  randomSeed: () => Math.floor(Math.random() * 2 ** 31),
});
app.renderWarning(() => {
  void app.start();
});
