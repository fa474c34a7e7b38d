/** Browser entry point: mount the editor into #app once the DOM is ready. */

import { mountStudio } from "./app.js";

function boot(): void {
  const root = document.getElementById("app");
  if (!root) throw new Error("page has no #app element");
  mountStudio(root).catch((error: unknown) => {
    root.textContent = `failed to reach the studio service: ${
      error instanceof Error ? error.message : String(error)
    }`;
  });
}

if (document.readyState === "loading") {
  document.addEventListener("DOMContentLoaded", boot);
} else {
  boot();
}
