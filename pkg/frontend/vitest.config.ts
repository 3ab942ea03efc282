import { defineConfig } from 'vitest/config';

export default defineConfig({
  test: {
    include: ['tests/**/*.test.ts'],
    // the live suite boots a real service process and runs a full episode
    testTimeout: 90_000,
    hookTimeout: 90_000,
  },
});
