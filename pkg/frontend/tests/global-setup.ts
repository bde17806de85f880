import { spawn, type ChildProcess } from "node:child_process";

export const SERVER_PORT = 8473;
export const SERVER_URL = `http://127.0.0.1:${SERVER_PORT}`;

const sleep = (ms: number) => new Promise((r) => setTimeout(r, ms));

export default async function setup(): Promise<() => void> {
  const proc: ChildProcess = spawn(
    "python3",
    ["-m", "embodied.cli", "serve", "--port", String(SERVER_PORT)],
    { stdio: "ignore" },
  );
  let healthy = false;
  for (let attempt = 0; attempt < 150; attempt++) {
    try {
      const response = await fetch(`${SERVER_URL}/health`);
      if (response.ok) {
        healthy = true;
        break;
      }
    } catch {
      // server still booting
    }
    await sleep(200);
  }
  if (!healthy) {
    proc.kill();
    throw new Error("environment service did not become healthy");
  }
  return () => {
    proc.kill();
  };
}
