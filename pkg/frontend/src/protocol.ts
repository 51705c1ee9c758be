/**
 * Session protocol client: strict state machine over a WebSocket-like
 * transport, one in-flight request at a time, with transcript recording.
 *
 * The wire contract: every client message is answered by exactly one server
 * message (ready | observation | error); the session grammar is
 * hello -> configure -> (reset -> step*)* -> close.
 */

export type Json = Record<string, unknown>;

export interface SocketLike {
  send(data: string): void;
  close(): void;
  set onmessage(handler: (data: string) => void);
  set onclose(handler: () => void);
  set onerror(handler: (err: unknown) => void);
}

export const PROTOCOL_VERSION = "1";

export type Action =
  | "step_forward"
  | "step_back"
  | "turn_left"
  | "turn_right"
  | "strafe_left"
  | "strafe_right"
  | "look_up"
  | "look_down"
  | "idle";

export interface SensorEntry {
  name: string;
  kind: string;
  data: string | number[];
  width?: number;
  height?: number;
  channels?: number;
  encoding?: string;
}

export interface ObservationEnvelope {
  type: "observation";
  session: string;
  step: number;
  reward: number;
  done: boolean;
  success: boolean;
  observation: { sensors: SensorEntry[]; goal: number[] | null };
}

export interface SessionConfig {
  scene: Json;
  agent?: Json;
  sensors?: Json[];
  episode?: Json;
  variation?: Json;
}

export interface Transcript {
  config: SessionConfig;
  seed: number;
  actions: Action[];
}

export type ClientPhase =
  | "idle"
  | "hello_sent"
  | "ready"
  | "configure_sent"
  | "configured"
  | "reset_sent"
  | "episode"
  | "step_sent"
  | "closed"
  | "failed";

export interface ClientEvents {
  onObservation?: (env: ObservationEnvelope, raw: string) => void;
  onEpisodeOver?: (env: ObservationEnvelope) => void;
  onProtocolError?: (code: string, message: string) => void;
  onFatal?: (message: string) => void;
  onPhase?: (phase: ClientPhase) => void;
}

/** Messages legal to send from each phase; guards every outbound frame. */
const LEGAL_SENDS: Record<ClientPhase, string[]> = {
  idle: ["hello"],
  hello_sent: [],
  ready: ["configure", "close"],
  configure_sent: [],
  configured: ["reset", "close"],
  reset_sent: [],
  episode: ["step", "reset", "close"],
  step_sent: [],
  closed: [],
  failed: [],
};

export class SessionClient {
  private phase: ClientPhase = "idle";
  private socket: SocketLike;
  private events: ClientEvents;
  private pendingActions: Action[] = [];
  private seed = 0;
  private config: SessionConfig | null = null;
  private actionsTaken: Action[] = [];
  private stepsInFlight: Action[] = [];
  sessionId: string | null = null;
  latest: ObservationEnvelope | null = null;
  latestRaw: string | null = null;
  payloads: string[] = [];
  episodeDone = false;

  constructor(socket: SocketLike, events: ClientEvents = {}) {
    this.socket = socket;
    this.events = events;
    socket.onmessage = (data) => this.handleMessage(data);
    socket.onclose = () => {
      if (this.phase !== "closed") this.fail("connection lost");
    };
    socket.onerror = () => this.fail("socket error");
  }

  get currentPhase(): ClientPhase {
    return this.phase;
  }

  /** hello -> configure -> reset(seed); resolves after the first observation. */
  start(config: SessionConfig, seed: number): void {
    this.config = config;
    this.seed = seed;
    this.sendChecked({ type: "hello", version: PROTOCOL_VERSION }, "hello_sent");
  }

  /** Queue one discrete step per keypress; at most one in flight. */
  enqueueAction(action: Action): boolean {
    if (this.episodeDone || this.phase === "closed" || this.phase === "failed") {
      return false;
    }
    this.pendingActions.push(action);
    this.flush();
    return true;
  }

  resetEpisode(seed?: number): void {
    if (seed !== undefined) this.seed = seed;
    this.pendingActions = [];
    this.actionsTaken = [];
    this.payloads = [];
    this.episodeDone = false;
    if (this.phase === "episode" || this.phase === "configured") {
      this.sendChecked({ type: "reset", seed: this.seed }, "reset_sent");
    }
  }

  close(): void {
    if (this.phase === "ready" || this.phase === "configured" || this.phase === "episode") {
      this.socket.send(JSON.stringify({ type: "close" }));
    }
    this.setPhase("closed");
    this.socket.close();
  }

  /** The replayable record of this episode. */
  transcript(): Transcript {
    if (!this.config) throw new Error("session never configured");
    return {
      config: this.config,
      seed: this.seed,
      actions: [...this.actionsTaken],
    };
  }

  private flush(): void {
    if (this.phase !== "episode" || this.pendingActions.length === 0) return;
    const action = this.pendingActions.shift()!;
    this.stepsInFlight.push(action);
    this.sendChecked({ type: "step", action }, "step_sent");
  }

  private sendChecked(msg: Json, nextPhase: ClientPhase): void {
    const kind = msg["type"] as string;
    if (!LEGAL_SENDS[this.phase].includes(kind)) {
      throw new Error(`illegal send ${kind} in phase ${this.phase}`);
    }
    // Advance the phase before the send: a transport may deliver the reply
    // synchronously, and the reply handler owns the phase from then on.
    this.setPhase(nextPhase);
    this.socket.send(JSON.stringify(msg));
  }

  private setPhase(phase: ClientPhase): void {
    this.phase = phase;
    this.events.onPhase?.(phase);
  }

  private fail(message: string): void {
    if (this.phase === "failed") return;
    this.setPhase("failed");
    this.events.onFatal?.(message);
  }

  private handleMessage(data: string): void {
    let msg: Json;
    try {
      msg = JSON.parse(data) as Json;
    } catch {
      this.fail(`unparseable server frame: ${data.slice(0, 80)}`);
      return;
    }
    const type = msg["type"];
    if (type === "error") {
      const code = String(msg["code"] ?? "unknown");
      const text = String(msg["message"] ?? "");
      this.events.onProtocolError?.(code, text);
      // An error answers the in-flight request; roll the phase back.
      if (this.phase === "hello_sent" || this.phase === "configure_sent") {
        this.fail(`${code}: ${text}`);
      } else if (this.phase === "reset_sent") {
        this.setPhase("configured");
      } else if (this.phase === "step_sent") {
        this.stepsInFlight.shift();
        this.setPhase("episode");
        this.flush();
      }
      return;
    }
    if (type === "ready") {
      this.sessionId = String(msg["session"] ?? "");
      if (this.phase === "hello_sent") {
        if (msg["version"] !== PROTOCOL_VERSION) {
          this.fail(`server protocol version ${msg["version"]}, client ${PROTOCOL_VERSION}`);
          return;
        }
        this.setPhase("ready");
        this.sendChecked(
          { type: "configure", ...(this.config as unknown as Json) },
          "configure_sent",
        );
      } else if (this.phase === "configure_sent") {
        this.setPhase("configured");
        this.sendChecked({ type: "reset", seed: this.seed }, "reset_sent");
      }
      return;
    }
    if (type === "observation") {
      const env = msg as unknown as ObservationEnvelope;
      this.latest = env;
      this.latestRaw = data;
      this.payloads.push(data);
      if (this.phase === "step_sent") {
        const acted = this.stepsInFlight.shift();
        if (acted) this.actionsTaken.push(acted);
      }
      this.setPhase("episode");
      this.events.onObservation?.(env, data);
      if (env.done) {
        this.episodeDone = true;
        this.pendingActions = [];
        this.events.onEpisodeOver?.(env);
      } else {
        this.flush();
      }
      return;
    }
    this.fail(`unknown server message type ${String(type)}`);
  }
}
