import { mountApp } from "./app.js";

function param(name: string, fallback: string): string {
  const url = new URL(window.location.href);
  return url.searchParams.get(name) || fallback;
}

const root = document.getElementById("root");
if (root) {
  mountApp(root, {
    baseUrl: "",
    userId: param("user", "guest"),
    name: param("name", "Guest"),
    gender: param("gender", "unspecified"),
  }).catch((error) => {
    console.error("failed to start", error);
  });
}
