import { describe, expect, it } from "vitest";

import {
  Action,
  ObservationEnvelope,
  PROTOCOL_VERSION,
  SessionClient,
  SocketLike,
} from "../src/protocol.js";

/** Deterministic PRNG for the property runs. */
function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a |= 0;
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

const CONFIG = {
  scene: { generate: { seed: 1, n_rooms: 1, furnished: false } },
  episode: { goal: { type: "point" }, max_steps: 50 },
};

type ServerState = "await_hello" | "ready" | "configured" | "episode";

/**
 * Mock server enforcing the wire grammar; any client message that is illegal
 * in the current state fails the test, which is exactly the "client never
 * sends outside the state machine" invariant.
 */
class MockServer {
  state: ServerState = "await_hello";
  stepIndex = 0;
  maxSteps: number;
  received: string[] = [];
  outbox: string[] = [];
  deferReplies = false;

  constructor(maxSteps = 50) {
    this.maxSteps = maxSteps;
  }

  socket(): SocketLike {
    const server = this;
    let messageHandler: (data: string) => void = () => {};
    const socket: SocketLike = {
      send(data: string) {
        server.receive(data);
      },
      close() {},
      set onmessage(h: (data: string) => void) {
        messageHandler = h;
      },
      set onclose(_h: () => void) {},
      set onerror(_h: (err: unknown) => void) {},
    };
    this.deliverTo = (frame) => messageHandler(frame);
    return socket;
  }

  private deliverTo: (frame: string) => void = () => {};

  /** Deliver one queued reply (reentrant sends queue their own replies). */
  pump(): void {
    const frame = this.outbox.shift();
    if (frame !== undefined) this.deliverTo(frame);
  }

  private reply(obj: unknown): void {
    this.outbox.push(JSON.stringify(obj));
    if (!this.deferReplies) this.pump();
  }

  private observationEnvelope(done: boolean, success: boolean): ObservationEnvelope {
    return {
      type: "observation",
      session: "mock",
      step: this.stepIndex,
      reward: -0.002,
      done,
      success,
      observation: { sensors: [], goal: null },
    };
  }

  receive(raw: string): void {
    this.received.push(raw);
    const msg = JSON.parse(raw) as Record<string, unknown>;
    const kind = msg.type as string;
    switch (kind) {
      case "hello":
        if (this.state !== "await_hello") throw new Error(`hello in ${this.state}`);
        expect(msg.version).toBe(PROTOCOL_VERSION);
        this.state = "ready";
        this.reply({ type: "ready", session: "mock", version: PROTOCOL_VERSION });
        return;
      case "configure":
        if (this.state !== "ready") throw new Error(`configure in ${this.state}`);
        this.state = "configured";
        this.reply({ type: "ready", session: "mock", version: PROTOCOL_VERSION });
        return;
      case "reset":
        if (this.state !== "configured" && this.state !== "episode") {
          throw new Error(`reset in ${this.state}`);
        }
        this.state = "episode";
        this.stepIndex = 0;
        this.reply(this.observationEnvelope(false, false));
        return;
      case "step": {
        if (this.state !== "episode") throw new Error(`step in ${this.state}`);
        this.stepIndex += 1;
        const done = this.stepIndex >= this.maxSteps;
        this.reply(this.observationEnvelope(done, false));
        return;
      }
      case "close":
        this.reply({ type: "ready", session: "mock", version: PROTOCOL_VERSION });
        return;
      default:
        throw new Error(`unknown client message ${kind}`);
    }
  }
}

function startedClient(server: MockServer, seed = 3): SessionClient {
  const client = new SessionClient(server.socket());
  client.start(CONFIG, seed);
  return client;
}

describe("session client state machine", () => {
  it("performs the hello/configure/reset handshake", () => {
    const server = new MockServer();
    const client = startedClient(server);
    expect(client.currentPhase).toBe("episode");
    const kinds = server.received.map((r) => JSON.parse(r).type);
    expect(kinds).toEqual(["hello", "configure", "reset"]);
  });

  it("sends exactly one step message per keypress, in order", () => {
    const server = new MockServer();
    const client = startedClient(server);
    const burst: Action[] = [];
    for (let i = 0; i < 10; i++) {
      const action: Action = i % 2 ? "turn_left" : "step_forward";
      burst.push(action);
      client.enqueueAction(action);
    }
    const steps = server.received
      .map((r) => JSON.parse(r))
      .filter((m) => m.type === "step")
      .map((m) => m.action);
    expect(steps).toEqual(burst);
    expect(client.latest?.step).toBe(10);
  });

  it("keeps at most one step in flight and queues the rest", () => {
    const server = new MockServer();
    server.deferReplies = true;
    const client = new SessionClient(server.socket());
    client.start(CONFIG, 1);
    server.pump(); // ready -> configure sent
    server.pump(); // ready -> reset sent
    server.pump(); // first observation -> episode
    expect(client.currentPhase).toBe("episode");
    client.enqueueAction("step_forward");
    client.enqueueAction("turn_left");
    client.enqueueAction("turn_right");
    const sentSteps = () =>
      server.received.filter((r) => JSON.parse(r).type === "step").length;
    expect(sentSteps()).toBe(1); // two queued, one on the wire
    server.pump();
    expect(sentSteps()).toBe(2);
    server.pump();
    expect(sentSteps()).toBe(3);
  });

  it("ignores keypresses after the episode ends", () => {
    const server = new MockServer(2);
    const client = startedClient(server);
    client.enqueueAction("step_forward");
    client.enqueueAction("step_forward");
    expect(client.episodeDone).toBe(true);
    expect(client.enqueueAction("step_forward")).toBe(false);
    const steps = server.received.filter((r) => JSON.parse(r).type === "step");
    expect(steps.length).toBe(2);
  });

  it("fails visibly on a protocol version mismatch", () => {
    let fatal = "";
    const server = new MockServer();
    const socket = server.socket();
    const original = socket.send.bind(socket);
    // Tamper: the server replies with a different version string.
    const badSocket: SocketLike = {
      send(data: string) {
        const msg = JSON.parse(data);
        if (msg.type === "hello") {
          server.received.push(data);
          server.state = "ready";
          badHandler(JSON.stringify({ type: "ready", session: "mock", version: "0" }));
          return;
        }
        original(data);
      },
      close() {},
      set onmessage(h: (data: string) => void) {
        badHandler = h;
      },
      set onclose(_h: () => void) {},
      set onerror(_h: (err: unknown) => void) {},
    };
    let badHandler: (d: string) => void = () => {};
    const client = new SessionClient(badSocket, {
      onFatal: (m) => (fatal = m),
    });
    client.start(CONFIG, 1);
    expect(fatal).toContain("version");
    expect(client.currentPhase).toBe("failed");
  });

  it("records a replayable transcript of completed steps", () => {
    const server = new MockServer();
    const client = startedClient(server, 42);
    const actions: Action[] = ["step_forward", "turn_left", "step_forward"];
    for (const a of actions) client.enqueueAction(a);
    const transcript = client.transcript();
    expect(transcript.seed).toBe(42);
    expect(transcript.actions).toEqual(actions);
    expect(transcript.config).toEqual(CONFIG);
  });

  it("reset starts a fresh episode and clears the queue", () => {
    const server = new MockServer(3);
    const client = startedClient(server);
    client.enqueueAction("step_forward");
    client.enqueueAction("step_forward");
    client.enqueueAction("step_forward");
    expect(client.episodeDone).toBe(true);
    client.resetEpisode(7);
    expect(client.episodeDone).toBe(false);
    expect(client.latest?.step).toBe(0);
    expect(client.transcript().seed).toBe(7);
    expect(client.transcript().actions).toEqual([]);
  });

  it("never sends an illegal message under random schedules", () => {
    // Property: for any interleaving of keypresses, resets, and delayed
    // server replies, every client frame is legal in the mock's state
    // (the mock throws otherwise).
    const ACTIONS: Action[] = ["step_forward", "step_back", "turn_left",
                               "turn_right", "strafe_left", "strafe_right"];
    for (let trial = 0; trial < 200; trial++) {
      const rand = mulberry32(trial * 2654435761 + 1);
      const server = new MockServer(5 + Math.floor(rand() * 10));
      server.deferReplies = rand() < 0.5;
      const client = new SessionClient(server.socket());
      client.start(CONFIG, trial);
      const ops = 5 + Math.floor(rand() * 40);
      for (let i = 0; i < ops; i++) {
        const r = rand();
        if (r < 0.55) {
          client.enqueueAction(ACTIONS[Math.floor(rand() * ACTIONS.length)]);
        } else if (r < 0.75) {
          server.pump();
        } else if (r < 0.85) {
          if (client.currentPhase === "episode") client.resetEpisode(i);
        } else {
          server.deferReplies = !server.deferReplies;
          server.pump();
        }
      }
      server.pump();
    }
  });
});
