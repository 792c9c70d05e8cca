/// <reference types="vitest/config" />
import { defineConfig } from "vite";

// The dev server proxies API paths to a running `manipkit serve` so the
// browser talks same-origin and the service needs no CORS setup.
const service = process.env.MANIPKIT_SERVICE_URL ?? "http://127.0.0.1:8321";

export default defineConfig({
  server: {
    proxy: {
      "/episodes": service,
      "/jobs": service,
      "/progress": service,
    },
  },
  test: {
    environment: "node",
    // the flow tests spawn a real service and wait on its job queue
    testTimeout: 120_000,
    hookTimeout: 180_000,
  },
});
