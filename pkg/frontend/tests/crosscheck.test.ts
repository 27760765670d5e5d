// End-to-end cross-check against the real service: train a model with the
// CLI, serve it, and verify that a slider-mode invert request returns the
// same 100 contour points as the CLI's own inversion CSV. Also exercises
// ack-gated config edits over the live socket.

import { execFileSync, spawn } from "node:child_process";
import type { ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import WebSocket from "ws";

import { encodeMessage, parseServerMessage } from "../src/protocol.js";
import type { ClientMessage, ServerMessage } from "../src/protocol.js";
import { ViewState } from "../src/viewstate.js";

const PORT = 8700 + (process.pid % 500);
const SETUP_TIMEOUT = 120_000;
const TEST_TIMEOUT = 30_000;

let dir: string;
let server: ChildProcess | null = null;
let csvX: number[] = [];
let csvY: number[] = [];

function cli(...args: string[]): void {
  execFileSync("aurora", args, { cwd: dir, stdio: ["ignore", "ignore", "pipe"] });
}

class Client {
  private queue: ServerMessage[] = [];
  private waiters: (() => void)[] = [];

  private constructor(private ws: WebSocket) {
    ws.on("message", (data) => {
      const msg = parseServerMessage(String(data));
      if (msg !== null) {
        this.queue.push(msg);
        this.waiters.splice(0).forEach((w) => w());
      }
    });
  }

  static connect(url: string): Promise<Client> {
    return new Promise((resolve, reject) => {
      const ws = new WebSocket(url);
      ws.once("open", () => resolve(new Client(ws)));
      ws.once("error", reject);
    });
  }

  send(msg: ClientMessage): void {
    this.ws.send(encodeMessage(msg));
  }

  async next<T extends ServerMessage["type"]>(
    type: T, timeoutMs = 10_000,
  ): Promise<Extract<ServerMessage, { type: T }>> {
    const deadline = Date.now() + timeoutMs;
    for (;;) {
      const i = this.queue.findIndex((m) => m.type === type);
      if (i >= 0) {
        return this.queue.splice(i, 1)[0] as Extract<ServerMessage, { type: T }>;
      }
      if (Date.now() > deadline) throw new Error(`timed out waiting for ${type}`);
      await new Promise<void>((resolve) => {
        this.waiters.push(resolve);
        setTimeout(resolve, 100);
      });
    }
  }

  frameCount(): number {
    return this.queue.filter((m) => m.type === "frame").length;
  }

  close(): void {
    this.ws.close();
  }
}

async function waitForServer(url: string, timeoutMs: number): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    try {
      const client = await Client.connect(url);
      client.close();
      return;
    } catch {
      if (Date.now() > deadline) throw new Error("service never came up");
      await new Promise((resolve) => setTimeout(resolve, 250));
    }
  }
}

beforeAll(async () => {
  dir = mkdtempSync(join(tmpdir(), "aurora-ui-"));
  cli("synth", "--out", "corpus.csv", "--speakers", "8", "--tokens-per-item", "2",
    "--noise-sd-mm", "0", "--formant-jitter-hz", "0", "--seed", "5");
  cli("train", "--corpus", "corpus.csv", "--out", "model.json");
  cli("lut", "--model", "model.json", "--out", "table.lut",
    "--f1-lo", "320", "--f1-hi", "903", "--f2-lo", "828", "--f2-hi", "2616",
    "--step", "20");
  cli("invert", "--model", "model.json", "--f1", "320", "--f2", "828",
    "--out", "contour.csv");

  const rows = readFileSync(join(dir, "contour.csv"), "utf8").trim().split("\n");
  expect(rows[0]).toBe("index,x_mm,y_mm,is_knot");
  for (const row of rows.slice(1)) {
    const parts = row.split(",");
    csvX.push(Number(parts[1]));
    csvY.push(Number(parts[2]));
  }
  expect(csvX).toHaveLength(100);

  execFileSync("python3", ["-c", [
    "from aurora.vowelsynth import synth_vowel, write_wav",
    "sig = synth_vowel([(500.0, 80.0), (1500.0, 120.0), (2500.0, 160.0)],",
    "                  duration_s=0.5, sample_rate=16000, f0_hz=100.0)",
    `write_wav(${JSON.stringify(join(dir, "vowel.wav"))}, sig, 16000)`,
  ].join("\n")]);

  server = spawn("aurora", [
    "serve", "--model", "model.json", "--lut", "table.lut",
    "--wav", "vowel.wav", "--port", String(PORT),
  ], { cwd: dir, stdio: ["ignore", "ignore", "pipe"] });
  await waitForServer(`ws://127.0.0.1:${PORT}/ws`, 60_000);
}, SETUP_TIMEOUT);

afterAll(() => {
  server?.kill("SIGTERM");
  setTimeout(() => server?.kill("SIGKILL"), 2000).unref();
  rmSync(dir, { recursive: true, force: true });
});

describe("live service cross-check", () => {
  it("slider request at (320, 828) equals the CLI inversion bit for bit", async () => {
    const client = await Client.connect(`ws://127.0.0.1:${PORT}/ws`);
    try {
      const ack = await client.next("ack");
      expect(ack.config.lut.f1_lo).toBe(320);
      expect(ack.config.lut.f2_lo).toBe(828);

      client.send({ type: "invert", id: 1, f1: 320, f2: 828 });
      const reply = await client.next("contour");
      expect(reply.id).toBe(1);
      expect(reply.contour.x).toHaveLength(100);
      // full-precision JSON and repr() CSV both round-trip doubles exactly,
      // so transport precision means equality, not closeness
      for (let i = 0; i < 100; i += 1) {
        expect(reply.contour.x[i]).toBe(csvX[i]);
        expect(reply.contour.y[i]).toBe(csvY[i]);
      }
    } finally {
      client.close();
    }
  }, TEST_TIMEOUT);

  it("config edits show up in ViewState only after the server ack", async () => {
    const client = await Client.connect(`ws://127.0.0.1:${PORT}/ws`);
    try {
      const state = new ViewState();
      state.applyServer(await client.next("ack"));
      const before = state.acked?.lpc_order;
      expect(before).toBeGreaterThan(2);

      client.send({ type: "config", lpc_order: 12 });
      // nothing changes until the ack lands
      expect(state.acked?.lpc_order).toBe(before);
      state.applyServer(await client.next("ack"));
      expect(state.acked?.lpc_order).toBe(12);

      // a rejected edit leaves the acked value and raises an inline error
      client.send({ type: "config", lpc_order: 1 });
      const error = await client.next("error");
      state.applyServer(error);
      expect(state.panelError).toContain("lpc_order");
      expect(state.acked?.lpc_order).toBe(12);
    } finally {
      client.close();
    }
  }, TEST_TIMEOUT);

  it("streams live frames that parse and carry the full schema", async () => {
    const client = await Client.connect(`ws://127.0.0.1:${PORT}/ws`);
    try {
      await client.next("ack");
      const frame = await client.next("frame");
      expect(frame.envelope_db).toHaveLength(256);
      expect(typeof frame.voiced).toBe("boolean");
      expect(frame.dropped).toBeGreaterThanOrEqual(0);
      // let the 100 frames/s stream accumulate, then confirm the reader
      // kept up without help (queue stays bounded by consumption)
      await new Promise((resolve) => setTimeout(resolve, 300));
      expect(client.frameCount()).toBeGreaterThan(5);
    } finally {
      client.close();
    }
  }, TEST_TIMEOUT);
});
