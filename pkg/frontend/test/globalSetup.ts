/** Boot the Python service once for the integration suite. */

import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { SERVICE_PORT, SERVICE_URL } from "./serviceUrl.js";

async function waitForHealth(timeoutMs = 30_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const response = await fetch(`${SERVICE_URL}/health`);
      if (response.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 200));
  }
  throw new Error(`service did not come up on ${SERVICE_URL}`);
}

export default async function setup(): Promise<() => void> {
  const dbDir = mkdtempSync(join(tmpdir(), "sgl-console-test-"));
  const python = process.env.SGL_TEST_PYTHON ?? "python3";
  const child: ChildProcess = spawn(
    python,
    ["-m", "sgl.cli", "serve", "--port", String(SERVICE_PORT)],
    {
      env: { ...process.env, SGL_DB_PATH: join(dbDir, "console.db") },
      stdio: "ignore",
    },
  );
  child.on("error", (error) => {
    throw new Error(`could not spawn the sgl service: ${error.message}`);
  });
  await waitForHealth();
  return () => {
    child.kill();
  };
}
