/// <reference types="vitest/config" />
import { defineConfig } from "vite";

// The exam service runs separately (default port 8000); the dev server
// forwards API paths there so the app can use same-origin requests.
const API = process.env.API_TARGET ?? "http://127.0.0.1:8000";

export default defineConfig({
  server: {
    proxy: {
      "/questionnaire": API,
      "/sessions": API,
    },
  },
  test: {
    environment: "jsdom",
    include: ["tests/**/*.test.ts"],
    testTimeout: 120000,
    hookTimeout: 120000,
  },
});
