/** Spawns a real curation service on a scratch corpus for the flow tests. */
import { type ChildProcess, spawn, spawnSync } from "node:child_process";
import { mkdtemp, rm } from "node:fs/promises";
import net from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";

const SYNTH_SNIPPET = `
import os
from pathlib import Path
from manipkit.synth import make_corpus
make_corpus(
    Path(os.environ["UI_TEST_ROOT"]),
    n_episodes=int(os.environ["UI_TEST_EPISODES"]),
    seed=int(os.environ["UI_TEST_SEED"]),
)
`;

const SERVE_SNIPPET = `
import os
import sys
from manipkit.cli import main
sys.exit(main([
    "serve",
    "--data-root", os.environ["UI_TEST_ROOT"],
    "--host", "127.0.0.1",
    "--port", os.environ["UI_TEST_PORT"],
]))
`;

export interface LiveService {
  baseUrl: string;
  dataRoot: string;
  stop: () => Promise<void>;
}

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const probe = net.createServer();
    probe.once("error", reject);
    probe.listen(0, "127.0.0.1", () => {
      const address = probe.address() as net.AddressInfo;
      probe.close(() => resolve(address.port));
    });
  });
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

async function waitUntilUp(baseUrl: string, child: ChildProcess, log: () => string) {
  const deadline = Date.now() + 30_000;
  for (;;) {
    if (child.exitCode !== null) {
      throw new Error(`service exited with ${child.exitCode}:\n${log()}`);
    }
    try {
      const res = await fetch(`${baseUrl}/progress`);
      if (res.ok) return;
    } catch {
      // not listening yet
    }
    if (Date.now() > deadline) throw new Error(`service never came up:\n${log()}`);
    await sleep(200);
  }
}

export async function startService(episodes = 2, seed = 7): Promise<LiveService> {
  const dataRoot = await mkdtemp(join(tmpdir(), "manipkit-ui-"));
  const env = {
    ...process.env,
    UI_TEST_ROOT: dataRoot,
    UI_TEST_EPISODES: String(episodes),
    UI_TEST_SEED: String(seed),
  };

  const synth = spawnSync("python3", ["-c", SYNTH_SNIPPET], { env, encoding: "utf8" });
  if (synth.status !== 0) {
    throw new Error(`corpus synthesis failed:\n${synth.stderr}`);
  }

  const port = await freePort();
  const child = spawn("python3", ["-c", SERVE_SNIPPET], {
    env: { ...env, UI_TEST_PORT: String(port) },
    stdio: ["ignore", "pipe", "pipe"],
  });
  let captured = "";
  child.stdout?.on("data", (chunk: Buffer) => {
    captured += chunk.toString();
  });
  child.stderr?.on("data", (chunk: Buffer) => {
    captured += chunk.toString();
  });
  const exited = new Promise<void>((resolve) => {
    child.once("exit", () => resolve());
  });

  const baseUrl = `http://127.0.0.1:${port}`;
  try {
    await waitUntilUp(baseUrl, child, () => captured);
  } catch (err) {
    child.kill("SIGKILL");
    await rm(dataRoot, { recursive: true, force: true });
    throw err;
  }

  return {
    baseUrl,
    dataRoot,
    stop: async () => {
      child.kill("SIGTERM");
      await Promise.race([exited, sleep(5000)]);
      if (child.exitCode === null) child.kill("SIGKILL");
      await rm(dataRoot, { recursive: true, force: true });
    },
  };
}
