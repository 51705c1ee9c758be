"""Session server: one isolated simulator per WebSocket connection.

Protocol (text frames, JSON objects, one response per request):

  client -> server
    {"type": "hello", "version": "1"}
    {"type": "configure", "scene": {...}, "agent": {...}, "sensors": [...],
     "episode": {...}, "variation": {...}}
    {"type": "reset", "seed": 7}            # seed optional
    {"type": "step", "action": "step_forward", "repeat": 5, "scale": 1.0}
    {"type": "close"}

  server -> client
    {"type": "ready", "session": "s1", "version": "1"}
    {"type": "observation", "session": "s1", "step": n, "reward": r,
     "done": b, "success": b, "observation": {"sensors": [...], "goal": ...}}
    {"type": "error", "code": "...", "message": "..."}

State machine: hello -> configure -> (reset -> step*)* -> close.  Any
out-of-order message produces error{code="bad_state"} and leaves the session
unchanged.  Frame buffers are base64-encoded row-major bytes.  Infinite
shortest-path distances appear as -1 in measurement vectors.
"""

from __future__ import annotations

import argparse
import asyncio
import base64
import itertools
import json
import logging
import os
from pathlib import Path

from . import scene as scene_mod
from .goals import goal_from_json
from .nav import NavError, SamplingError, UnsatisfiableGoalError
from .physics import COMMAND_KINDS, ControlCommand, agent_config_from_json
from .sensors import CameraFrame, Measurements, sensor_spec_from_json
from .task import EpisodeConfig, EpisodeDoneError, Simulation

PROTOCOL_VERSION = "1"
SEED_ENV_VAR = "NAVSIM_SEED"

log = logging.getLogger("navsim.server")

_session_counter = itertools.count(1)


class ProtocolError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code
        self.message = message


def _dumps(obj) -> str:
    return json.dumps(obj, separators=(",", ":"))


def encode_observation_payload(obs) -> dict:
    entries = []
    for entry in obs.entries:
        if isinstance(entry, CameraFrame):
            entries.append({
                "name": entry.name,
                "kind": entry.kind,
                "width": entry.width,
                "height": entry.height,
                "channels": entry.channels,
                "encoding": entry.encoding,
                "data": base64.b64encode(entry.buffer).decode("ascii"),
            })
        elif isinstance(entry, Measurements):
            entries.append({
                "name": "measurements",
                "kind": "measurements",
                "data": list(entry.vector()),
            })
        else:  # ContactReading
            entries.append({
                "name": "contact",
                "kind": "contact",
                "data": list(entry.flags),
            })
    goal = list(obs.goal_one_hot) if obs.goal_one_hot is not None else None
    return {"sensors": entries, "goal": goal}


class Session:
    """Protocol state machine owning one simulator instance."""

    def __init__(self, session_id: str, scene_dir: Path | None = None,
                 default_seed: int | None = None):
        self.id = session_id
        self.scene_dir = scene_dir
        self.state = "await_hello"
        self.sim: Simulation | None = None
        self.closed = False
        env_seed = os.environ.get(SEED_ENV_VAR)
        self.default_seed = default_seed if default_seed is not None else (
            int(env_seed) if env_seed is not None else None
        )

    # -- message dispatch ----------------------------------------------------

    def handle_raw(self, raw: str | bytes) -> dict:
        try:
            try:
                msg = json.loads(raw)
            except (json.JSONDecodeError, UnicodeDecodeError) as exc:
                raise ProtocolError("bad_message", f"malformed JSON: {exc}")
            if not isinstance(msg, dict) or "type" not in msg:
                raise ProtocolError("bad_message", "expected an object with a 'type' field")
            return self.handle(msg)
        except ProtocolError as exc:
            return {"type": "error", "code": exc.code, "message": exc.message}
        except Exception as exc:  # defensive: never take the session down
            log.exception("internal error in session %s", self.id)
            return {"type": "error", "code": "internal", "message": str(exc)}

    def handle(self, msg: dict) -> dict:
        kind = msg["type"]
        if kind == "close":
            self.closed = True
            return self._ready()
        if kind == "hello":
            return self._handle_hello(msg)
        if kind == "configure":
            return self._handle_configure(msg)
        if kind == "reset":
            return self._handle_reset(msg)
        if kind == "step":
            return self._handle_step(msg)
        raise ProtocolError("bad_message", f"unknown message type {kind!r}")

    def _ready(self) -> dict:
        return {"type": "ready", "session": self.id, "version": PROTOCOL_VERSION}

    def _handle_hello(self, msg: dict) -> dict:
        if self.state != "await_hello":
            raise ProtocolError("bad_state", "hello only opens a session")
        version = msg.get("version")
        if version != PROTOCOL_VERSION:
            raise ProtocolError(
                "bad_message",
                f"protocol version mismatch: client {version!r}, server {PROTOCOL_VERSION!r}",
            )
        self.state = "ready"
        return self._ready()

    def _handle_configure(self, msg: dict) -> dict:
        if self.state != "ready":
            raise ProtocolError("bad_state", f"configure not allowed in state {self.state!r}")
        try:
            sim = self._build_simulation(msg)
        except ProtocolError:
            raise
        except (scene_mod.SceneError, NavError, ValueError, KeyError, OSError) as exc:
            raise ProtocolError("bad_config", str(exc))
        self.sim = sim
        self.state = "configured"
        return self._ready()

    def _build_simulation(self, msg: dict) -> Simulation:
        known = {"type", "scene", "variation", "agent", "sensors", "episode"}
        unknown = set(msg) - known
        if unknown:
            raise ProtocolError("bad_message", f"unknown configure fields {sorted(unknown)}")
        scene_spec = msg.get("scene")
        if not isinstance(scene_spec, dict):
            raise ProtocolError("bad_config", "configure requires a 'scene' object")
        house = self._load_scene(scene_spec)

        variation = msg.get("variation")
        if variation:
            spec = scene_mod.VariationSpec(
                retexture_seed=variation.get("retexture_seed"),
                remove_categories=frozenset(variation.get("remove_categories", ())),
            )
            house = scene_mod.apply_variation(house, spec)

        agent = agent_config_from_json(msg.get("agent", {}))
        sensor_docs = msg.get("sensors")
        specs = tuple(sensor_spec_from_json(d) for d in sensor_docs) if sensor_docs else None

        episode_doc = dict(msg.get("episode", {}))
        min_path_dist = episode_doc.pop("min_path_dist", None)
        goal_doc = episode_doc.pop("goal", None)
        goal = goal_from_json(goal_doc) if goal_doc else None
        seed = episode_doc.pop("seed", None)
        if seed is None:
            seed = self.default_seed if self.default_seed is not None else 0
        known_ep = {"max_steps", "trials_per_scene", "house_id"}
        unknown_ep = set(episode_doc) - known_ep
        if unknown_ep:
            raise ProtocolError("bad_config", f"unknown episode fields {sorted(unknown_ep)}")
        episode = EpisodeConfig(
            goal=goal if goal is not None else EpisodeConfig().goal,
            seed=int(seed),
            max_steps=int(episode_doc.get("max_steps", 500)),
            trials_per_scene=int(episode_doc.get("trials_per_scene", 10)),
            house_id=episode_doc.get("house_id"),
        )
        return Simulation(
            house, agent=agent, sensor_specs=specs, episode=episode,
            min_path_dist=float(min_path_dist) if min_path_dist is not None else None,
        )

    def _load_scene(self, spec: dict) -> scene_mod.House:
        kinds = {"file", "generate", "inline"} & set(spec)
        if len(kinds) != 1:
            raise ProtocolError(
                "bad_config", "scene must have exactly one of 'file', 'generate', 'inline'"
            )
        if "file" in spec:
            path = Path(spec["file"])
            if not path.is_absolute() and self.scene_dir is not None:
                path = self.scene_dir / path
            return scene_mod.load_house(path)
        if "inline" in spec:
            return scene_mod.loads_house(json.dumps(spec["inline"]))
        gen = spec["generate"]
        return scene_mod.generate_house(
            seed=int(gen.get("seed", 0)),
            n_rooms=int(gen.get("n_rooms", 1)),
            furnished=bool(gen.get("furnished", False)),
        )

    def _handle_reset(self, msg: dict) -> dict:
        if self.state not in ("configured", "episode") or self.sim is None:
            raise ProtocolError("bad_state", f"reset not allowed in state {self.state!r}")
        seed = msg.get("seed")
        try:
            obs = self.sim.reset(int(seed) if seed is not None else None)
        except UnsatisfiableGoalError as exc:
            raise ProtocolError("unsatisfiable_goal", str(exc))
        except (SamplingError, NavError) as exc:
            raise ProtocolError("bad_config", str(exc))
        self.state = "episode"
        return {
            "type": "observation",
            "session": self.id,
            "step": 0,
            "reward": 0.0,
            "done": False,
            "success": False,
            "observation": encode_observation_payload(obs),
        }

    def _handle_step(self, msg: dict) -> dict:
        if self.state != "episode" or self.sim is None:
            raise ProtocolError("bad_state", f"step not allowed in state {self.state!r}")
        action = msg.get("action")
        if not isinstance(action, str) or action not in COMMAND_KINDS:
            raise ProtocolError("bad_action", f"unknown action {action!r}")
        repeat = msg.get("repeat", 1)
        if not isinstance(repeat, int) or repeat < 1:
            raise ProtocolError("bad_message", "repeat must be a positive integer")
        scale = float(msg.get("scale", 1.0))
        cmd = ControlCommand(kind=action, scale=scale)
        total_reward = 0.0
        result = None
        try:
            for _ in range(repeat):
                result = self.sim.step(cmd)
                total_reward += result.reward
                if result.done:
                    break
        except EpisodeDoneError as exc:
            raise ProtocolError("bad_state", str(exc))
        assert result is not None
        return {
            "type": "observation",
            "session": self.id,
            "step": self.sim.t,
            "reward": total_reward,
            "done": result.done,
            "success": result.success,
            "observation": encode_observation_payload(result.observation),
        }


# ---------------------------------------------------------------------------
# Serving

async def serve(bind: str = "127.0.0.1:8765", scene_dir: str | Path | None = None):
    """Start the WebSocket service; returns the running server object."""
    from websockets.asyncio.server import serve as ws_serve

    host, _, port_text = bind.rpartition(":")
    if not host:
        raise ValueError("--bind must look like host:port")
    port = int(port_text)
    scene_path = Path(scene_dir) if scene_dir is not None else None

    async def handler(websocket):
        session = Session(f"s{next(_session_counter)}", scene_dir=scene_path)
        log.info("session %s opened", session.id)
        try:
            async for raw in websocket:
                response = session.handle_raw(raw)
                await websocket.send(_dumps(response))
                if session.closed:
                    await websocket.close()
                    break
        finally:
            log.info("session %s closed", session.id)

    server = await ws_serve(handler, host or "127.0.0.1", port)
    sock = server.sockets[0] if server.sockets else None
    if sock is not None:
        actual = sock.getsockname()
        log.info("listening on %s:%s", actual[0], actual[1])
        print(f"listening on {actual[0]}:{actual[1]}", flush=True)
    return server


def replay_transcript(url: str, transcript: dict) -> list[str]:
    """Replay a recorded (config, seed, actions) transcript over a live server.

    Returns the raw observation payload frames in order, for byte-exact
    replay comparison.
    """
    from websockets.sync.client import connect

    payloads: list[str] = []
    with connect(url, max_size=None) as ws:
        ws.send(_dumps({"type": "hello", "version": PROTOCOL_VERSION}))
        _expect_type(ws.recv(), "ready")
        config = dict(transcript["config"])
        config["type"] = "configure"
        ws.send(_dumps(config))
        _expect_type(ws.recv(), "ready")
        ws.send(_dumps({"type": "reset", "seed": transcript["seed"]}))
        payloads.append(_expect_type(ws.recv(), "observation"))
        for action in transcript["actions"]:
            msg = {"type": "step"}
            if isinstance(action, str):
                msg["action"] = action
            else:
                msg.update(action)
            ws.send(_dumps(msg))
            payloads.append(_expect_type(ws.recv(), "observation"))
        ws.send(_dumps({"type": "close"}))
    return payloads


def _expect_type(raw, expected: str) -> str:
    text = raw.decode() if isinstance(raw, bytes) else raw
    msg = json.loads(text)
    if msg.get("type") != expected:
        raise RuntimeError(f"expected {expected!r}, got: {text[:200]}")
    return text


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="navsim-server",
        description="WebSocket session server for the navsim simulator",
    )
    parser.add_argument("--bind", default="127.0.0.1:8765",
                        help="host:port to listen on (port 0 picks a free port)")
    parser.add_argument("--scene-dir", default=None,
                        help="directory that scene file references resolve against")
    parser.add_argument("--log-level", default="info",
                        choices=["debug", "info", "warning", "error"])
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(),
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")

    async def run():
        server = await serve(args.bind, args.scene_dir)
        await server.serve_forever()

    try:
        asyncio.run(run())
    except KeyboardInterrupt:
        pass
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
