import { ApiClient } from "./api.js";
import { createApp } from "./app.js";

const root = document.getElementById("app");
if (!root) {
  throw new Error("missing #app mount point");
}
// same-origin service; the page is served from the artifact root's ui/ mount
const app = createApp(new ApiClient(""), root, window.localStorage, { pollMs: 5000 });
void app.init();
