/**
 * Browser teleoperation UI: connect form, live sensor panels, keyboard
 * control, episode banners, transcript download, reconnect prompt.
 */

import { decodeFrame } from "./frames.js";
import { actionForKey } from "./keys.js";
import {
  ObservationEnvelope,
  SensorEntry,
  SessionClient,
  SessionConfig,
  SocketLike,
} from "./protocol.js";

function browserSocket(url: string): Promise<SocketLike> {
  return new Promise((resolve, reject) => {
    const ws = new WebSocket(url);
    const adapter: SocketLike = {
      send: (d) => ws.send(d),
      close: () => ws.close(),
      set onmessage(h: (data: string) => void) {
        ws.onmessage = (ev) => h(typeof ev.data === "string" ? ev.data : "");
      },
      set onclose(h: () => void) {
        ws.onclose = () => h();
      },
      set onerror(h: (err: unknown) => void) {
        ws.onerror = (ev) => h(ev);
      },
    };
    ws.onopen = () => resolve(adapter);
    ws.onerror = (ev) => reject(ev);
  });
}

interface Panels {
  container: HTMLElement;
  canvases: Map<string, HTMLCanvasElement>;
  contact: HTMLElement | null;
  measurements: HTMLElement | null;
}

export class App {
  private client: SessionClient | null = null;
  private panels: Panels | null = null;
  private maxSteps = 500;
  private root: Document;

  constructor(root: Document) {
    this.root = root;
    this.bind();
  }

  private el<T extends HTMLElement>(id: string): T {
    const node = this.root.getElementById(id);
    if (!node) throw new Error(`missing element #${id}`);
    return node as T;
  }

  private bind(): void {
    this.el<HTMLButtonElement>("connect").addEventListener("click", () => {
      void this.connect();
    });
    this.el<HTMLButtonElement>("reset").addEventListener("click", () => {
      this.client?.resetEpisode(this.readSeed() + Math.floor(Math.random() * 1e6));
      this.banner("", "");
    });
    this.el<HTMLButtonElement>("download").addEventListener("click", () => {
      this.downloadTranscript();
    });
    this.root.addEventListener("keydown", (ev) => this.onKey(ev as KeyboardEvent));
  }

  private readSeed(): number {
    return Number(this.el<HTMLInputElement>("episode-seed").value) || 1;
  }

  private buildConfig(): SessionConfig {
    const sceneSeed = Number(this.el<HTMLInputElement>("scene-seed").value) || 7;
    const rooms = Number(this.el<HTMLInputElement>("rooms").value) || 3;
    const furnished = this.el<HTMLInputElement>("furnished").checked;
    const preset = this.el<HTMLSelectElement>("preset").value;
    this.maxSteps = 500;
    return {
      scene: { generate: { seed: sceneSeed, n_rooms: rooms, furnished } },
      agent: { preset },
      sensors: [
        { name: "color", kind: "color", resolution: [84, 84] },
        { name: "depth", kind: "depth", resolution: [84, 84] },
        { name: "semantic", kind: "semantic", resolution: [84, 84] },
        { name: "contact", kind: "contact" },
        { name: "measurements", kind: "measurements" },
      ],
      episode: { goal: { type: "point" }, max_steps: this.maxSteps },
    };
  }

  private async connect(): Promise<void> {
    const url = this.el<HTMLInputElement>("server-url").value;
    this.banner("connecting...", "info");
    let socket: SocketLike;
    try {
      socket = await browserSocket(url);
    } catch {
      this.banner(`cannot reach ${url} - is navsim-server running?`, "error");
      return;
    }
    this.client = new SessionClient(socket, {
      onObservation: (env) => this.render(env),
      onEpisodeOver: (env) => this.showEpisodeOver(env),
      onProtocolError: (code, message) => this.banner(`${code}: ${message}`, "error"),
      onFatal: (message) => {
        this.banner(`${message} - reconnect?`, "error");
        this.el<HTMLButtonElement>("connect").textContent = "reconnect";
      },
    });
    this.client.start(this.buildConfig(), this.readSeed());
    this.banner("", "");
  }

  private onKey(ev: KeyboardEvent): void {
    if (!this.client || ev.repeat) return;
    const action = actionForKey(ev.key);
    if (!action) return;
    ev.preventDefault();
    const accepted = this.client.enqueueAction(action);
    if (!accepted && this.client.episodeDone) {
      this.banner("episode over - press reset", "info");
    }
  }

  private ensurePanels(sensors: SensorEntry[]): Panels {
    if (this.panels) return this.panels;
    const container = this.el<HTMLElement>("panels");
    container.textContent = "";
    const canvases = new Map<string, HTMLCanvasElement>();
    let contact: HTMLElement | null = null;
    let measurements: HTMLElement | null = null;
    for (const entry of sensors) {
      const box = this.root.createElement("div");
      box.className = "panel";
      const title = this.root.createElement("h3");
      title.textContent = `${entry.name} (${entry.kind})`;
      box.appendChild(title);
      if (entry.width && entry.height) {
        const canvas = this.root.createElement("canvas");
        canvas.width = entry.width;
        canvas.height = entry.height;
        canvas.className = "frame";
        box.appendChild(canvas);
        canvases.set(entry.name, canvas);
      } else if (entry.kind === "contact") {
        contact = this.root.createElement("div");
        contact.className = "contact";
        box.appendChild(contact);
      } else if (entry.kind === "measurements") {
        measurements = this.root.createElement("pre");
        measurements.className = "measurements";
        box.appendChild(measurements);
      }
      container.appendChild(box);
    }
    this.panels = { container, canvases, contact, measurements };
    return this.panels;
  }

  private render(env: ObservationEnvelope): void {
    const panels = this.ensurePanels(env.observation.sensors);
    for (const entry of env.observation.sensors) {
      if (entry.width && entry.height) {
        const canvas = panels.canvases.get(entry.name);
        if (!canvas) continue; // only sensors from the first observation
        const frame = decodeFrame(entry);
        const ctx = canvas.getContext("2d");
        if (ctx) {
          ctx.putImageData(
            new ImageData(frame.rgba, frame.width, frame.height), 0, 0,
          );
        }
      } else if (entry.kind === "contact" && panels.contact) {
        const [front, right, back, left] = entry.data as number[];
        panels.contact.textContent =
          `front ${front ? "■" : "·"}  right ${right ? "■" : "·"}  ` +
          `back ${back ? "■" : "·"}  left ${left ? "■" : "·"}`;
      } else if (entry.kind === "measurements" && panels.measurements) {
        const [dE, dSp, dirX, dirZ, vel, t] = entry.data as number[];
        panels.measurements.textContent =
          `distance    ${dE.toFixed(2)} m (path ${dSp < 0 ? "unreachable" : dSp.toFixed(2) + " m"})\n` +
          `direction   (${dirX.toFixed(2)}, ${dirZ.toFixed(2)})\n` +
          `speed       ${vel.toFixed(2)} m/s\n` +
          `time        ${(t * 100).toFixed(0)} %`;
      }
    }
    this.el<HTMLElement>("step-counter").textContent =
      `step ${env.step} | reward ${env.reward.toFixed(3)}`;
  }

  private showEpisodeOver(env: ObservationEnvelope): void {
    const speed = env.success ? 1 - env.step / this.maxSteps : 0;
    this.banner(
      env.success
        ? `goal reached in ${env.step} steps - speed ${(speed * 100).toFixed(1)} %`
        : `timeout after ${env.step} steps`,
      env.success ? "success" : "failure",
    );
  }

  private banner(text: string, kind: string): void {
    const node = this.el<HTMLElement>("banner");
    node.textContent = text;
    node.className = kind ? `banner ${kind}` : "banner";
  }

  private downloadTranscript(): void {
    if (!this.client) return;
    const blob = new Blob(
      [JSON.stringify(this.client.transcript(), null, 2)],
      { type: "application/json" },
    );
    const a = this.root.createElement("a");
    a.href = URL.createObjectURL(blob);
    a.download = "transcript.json";
    a.click();
    URL.revokeObjectURL(a.href);
  }
}
