import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    // WASM runtime startup, batch extraction, and spawning the consumer
    // pipeline are all slow; give every test generous room.
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
