import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "jsdom",
    testTimeout: 120_000,
    hookTimeout: 120_000,
    // The end-to-end suite drives one shared backend process; run files
    // one at a time so its port and store stay isolated.
    fileParallelism: false,
  },
});
