import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "happy-dom",
    include: ["tests/**/*.test.ts"],
    // the e2e file spawns the Python service and two CLI runs
    testTimeout: 60_000,
    hookTimeout: 60_000,
  },
});
