// NDJSON client for the simulation service.
//
// Two transports: spawn the server as a child process and talk over stdio,
// or connect to a TCP port.  Requests are answered strictly in order, so a
// simple FIFO of pending resolvers is enough.

import { spawn } from "node:child_process";
import { createInterface, Interface } from "node:readline";
import { Socket, createConnection } from "node:net";

import type { Request, Response } from "./protocol.js";

interface Pending {
  resolve: (r: Response) => void;
  reject: (e: Error) => void;
}

export class ServiceClient {
  private pending: Pending[] = [];
  private write: (line: string) => void;
  private closeTransport: () => void;

  private constructor(
    write: (line: string) => void,
    closeTransport: () => void,
    lines: Interface,
  ) {
    this.write = write;
    this.closeTransport = closeTransport;
    lines.on("line", (line) => {
      const waiter = this.pending.shift();
      if (!waiter) return;
      try {
        waiter.resolve(JSON.parse(line) as Response);
      } catch (e) {
        waiter.reject(e as Error);
      }
    });
    lines.on("close", () => {
      for (const waiter of this.pending.splice(0)) {
        waiter.reject(new Error("connection closed"));
      }
    });
  }

  /** Spawn `python -m latreason.cli serve --stdio` and drive it over pipes. */
  static spawnStdio(python = "python3"): ServiceClient {
    const child = spawn(python, ["-m", "latreason.cli", "serve", "--stdio"], {
      stdio: ["pipe", "pipe", "inherit"],
    });
    const lines = createInterface({ input: child.stdout });
    return new ServiceClient(
      (line) => child.stdin.write(line),
      () => child.kill(),
      lines,
    );
  }

  static async connectTcp(host: string, port: number): Promise<ServiceClient> {
    const socket: Socket = await new Promise((resolve, reject) => {
      const s = createConnection({ host, port }, () => resolve(s));
      s.on("error", reject);
    });
    const lines = createInterface({ input: socket });
    return new ServiceClient(
      (line) => socket.write(line),
      () => socket.end(),
      lines,
    );
  }

  call(request: Request): Promise<Response> {
    return new Promise((resolve, reject) => {
      this.pending.push({ resolve, reject });
      this.write(JSON.stringify(request) + "\n");
    });
  }

  /** Like call(), but protocol-level errors become exceptions. */
  async expectOk(request: Request): Promise<Extract<Response, { ok: true }>> {
    const response = await this.call(request);
    if (!response.ok) {
      throw new Error(`${request.cmd} failed: ${response.error}`);
    }
    return response;
  }

  async close(): Promise<void> {
    try {
      await this.call({ cmd: "close" });
    } catch {
      // the transport may already be gone
    }
    this.closeTransport();
  }
}
