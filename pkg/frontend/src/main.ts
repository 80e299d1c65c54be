// Browser bootstrap: read connection parameters from the query string and
// mount the dashboard. Example:
//   index.html?base=http://127.0.0.1:8400&session=ses-abc&key=ikey-def

import { mountDashboard } from "./dashboard.js";

function param(name: string): string {
  return new URLSearchParams(window.location.search).get(name) ?? "";
}

window.addEventListener("load", () => {
  const root = document.getElementById("app");
  if (!root) return;
  const baseUrl = param("base") || window.location.origin;
  const sessionId = param("session");
  const instructorKey = param("key");
  if (!sessionId || !instructorKey) {
    root.textContent = "missing ?session= and ?key= query parameters";
    return;
  }
  mountDashboard(root, { baseUrl, sessionId, instructorKey });
});
