"""Live session service and recorded-input replay.

A connection speaks JSON envelopes over a websocket:

    inbound  {"type": "gaze"|"emg"|"control", "t_ms": <client ms>, "payload": {...}}
    outbound {"type": "state"|"event"|"metrics", "t_ms": <session ms>, "payload": {...}}

The server is authoritative about time: every inbound message is applied at
the next 10 ms tick and recorded with that tick in an input trace, so a
trace replayed headlessly reproduces the event log byte for byte. Human
sessions run on a wall clock; replay runs the same core on simulated time.
"""

from __future__ import annotations

import asyncio
import json
from pathlib import Path
from uuid import uuid4

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse, PlainTextResponse

from . import analysis, wire
from .panel import GazeSample
from .runner import TICK_MS, ProtocolConfig, SessionCore
from .signals import EmgFrame

STATE_EVERY_TICKS = 3  # ~33 Hz state broadcast

TRACE_SCHEMA = 1


def _clamp(v: float, lo: float, hi: float) -> float:
    return max(lo, min(hi, float(v)))


class EnvelopeError(ValueError):
    pass


class LiveSession:
    """One session driven by inbound envelopes instead of a scripted agent.

    Transport-agnostic and clock-agnostic: the caller queues envelopes with
    handle_inbound() and calls tick() at whatever pace its clock dictates.
    """

    def __init__(self, protocol: ProtocolConfig, session_id: str | None = None):
        self.session_id = session_id or uuid4().hex[:12]
        self.core = SessionCore(protocol)
        self.meta = {**self.core.meta(None), "live": True}
        self._pending: list[dict] = []
        self._trace: list[dict] = []
        self._last_tick: int | None = None
        self.end_requested = False

    @property
    def done(self) -> bool:
        return self.core.done or self.end_requested

    def handle_inbound(self, envelope: dict) -> None:
        kind = envelope.get("type")
        payload = envelope.get("payload")
        if kind not in ("gaze", "emg", "control") or not isinstance(payload, dict):
            raise EnvelopeError(f"bad inbound envelope: {envelope!r}")
        self._pending.append(envelope)

    def _apply(self, env: dict, t_ms: int) -> tuple[list, list, float | None]:
        gaze: list[GazeSample] = []
        emg: list[EmgFrame] = []
        arm: float | None = None
        kind, payload = env["type"], env["payload"]
        if kind == "gaze":
            gaze.append(
                GazeSample(
                    t_ms=t_ms,
                    x=float(payload["x"]),
                    y=float(payload["y"]),
                    valid=bool(payload.get("valid", True)),
                )
            )
        elif kind == "emg":
            emg.append(
                EmgFrame(
                    t_ms=t_ms,
                    flexor_raw=_clamp(payload.get("flexor", 0.0), -1.0, 1.0),
                    extensor_raw=_clamp(payload.get("extensor", 0.0), -1.0, 1.0),
                )
            )
        elif kind == "control":
            action = payload.get("action")
            if action == "arm":
                arm = _clamp(payload.get("pos", 0.0), -0.5, 1.5)
            elif action == "end":
                self.end_requested = True
        return gaze, emg, arm

    def tick(self, t_ms: int) -> list[dict]:
        """Apply queued inputs at this tick, advance the core, and return the
        outbound event/metric envelopes it produced."""
        if self.done:
            return []
        self._last_tick = t_ms
        gaze: list[GazeSample] = []
        emg: list[EmgFrame] = []
        arm: float | None = None
        pending, self._pending = self._pending, []
        for env in pending:
            g, e, a = self._apply(env, t_ms)
            gaze.extend(g)
            emg.extend(e)
            if a is not None:
                arm = a
            self._trace.append(
                {"tick": t_ms, "type": env["type"], "payload": env["payload"]}
            )
        records = self.core.advance(t_ms, gaze or None, emg or None, arm)
        out = [
            {"type": "event", "t_ms": t_ms, "payload": rec.to_json()}
            for rec in records
        ]
        if any(rec.kind == "TrialEnd" for rec in records):
            report = analysis.compute_metrics(self.core.events, self.core.protocol.mode)
            out.append({"type": "metrics", "t_ms": t_ms, "payload": report.to_json()})
        return out

    def state_envelope(self, t_ms: int) -> dict:
        obs = self.core.observe(t_ms)
        hand = self.core.hand
        trial = None
        if obs.trial_index is not None:
            trial = {
                "index": obs.trial_index,
                "block": obs.block,
                "trial_in_block": obs.trial_in_block,
                "object_id": obs.obj.id,
                "object": obs.obj.name,
                "optimal_type": obs.optimal.label,
                "trial_t_ms": obs.trial_t_ms,
                "object_grip_cm": obs.obj.grip_size_cm,
                "contact": obs.contact,
                "held": obs.held,
            }
        dwell = self.core.dwell
        return {
            "type": "state",
            "t_ms": t_ms,
            "payload": {
                "hand": {
                    "s": hand.s,
                    "theta_deg": list(hand.theta_deg()),
                    "phase": hand.phase.label,
                    "active_type": hand.active_type.label,
                    "aperture_cm": hand.aperture_cm(),
                    "contact": hand.contact,
                    "s_pre": hand.s_pre,
                },
                "dwell": {
                    "button": dwell.button_id,
                    "progress_ms": dwell.progress_ms,
                    "threshold_ms": dwell.threshold_ms,
                },
                "trial": trial,
                "arm_pos": obs.arm_pos,
                "in_zone": obs.in_zone,
                "zone": list(self.core.space.zone),
                "object_pos": self.core.space.object_pos,
                "layout": self.core.layout.to_json(),
                "done": self.done,
            },
        }

    def trace_lines(self) -> list[str]:
        header = {
            "schema_version": TRACE_SCHEMA,
            "trace": "inputs",
            "meta": self.meta,
            "last_tick": self._last_tick,
        }

        def dumps(d: dict) -> str:
            return json.dumps(d, sort_keys=True, separators=(",", ":"))

        return [dumps(header)] + [dumps(rec) for rec in self._trace]

    def event_lines(self) -> list[str]:
        return wire.records_to_lines(self.core.events, self.meta)


def replay_trace(lines: list[str]) -> tuple[dict, list[wire.EventRecord]]:
    """Re-run a recorded input trace headlessly on simulated time.

    The transport adds no semantics, so the produced event records match
    the original session's exactly.
    """
    if not lines:
        raise ValueError("empty input trace")
    header = json.loads(lines[0])
    if header.get("trace") != "inputs":
        raise ValueError("not an input trace file")
    meta = header["meta"]
    last_tick = header.get("last_tick")
    by_tick: dict[int, list[dict]] = {}
    max_input_tick = -TICK_MS
    for line in lines[1:]:
        if not line.strip():
            continue
        rec = json.loads(line)
        by_tick.setdefault(int(rec["tick"]), []).append(rec)
        max_input_tick = max(max_input_tick, int(rec["tick"]))
    if last_tick is None:
        last_tick = max_input_tick
    session = LiveSession(ProtocolConfig.from_json(meta["protocol"]))
    session.meta = meta
    t = 0
    while t <= last_tick and not session.done:
        for rec in by_tick.get(t, []):
            session.handle_inbound(
                {"type": rec["type"], "t_ms": t, "payload": rec["payload"]}
            )
        session.tick(t)
        t += TICK_MS
    return meta, session.core.events


def load_trace(path: str | Path) -> list[str]:
    return Path(path).read_text().splitlines()


# -- websocket service -------------------------------------------------------


def create_app(logdir: str | Path = "sessions", ui_dir: str | Path | None = None):
    """Build the FastAPI app: websocket sessions, log downloads, static UI."""
    logdir = Path(logdir)
    app = FastAPI(title="myogaze gateway")
    app.state.sessions = {}

    def _finalize(session: LiveSession) -> None:
        if session.session_id in app.state.sessions:
            return
        logdir.mkdir(parents=True, exist_ok=True)
        events_path = logdir / f"{session.session_id}.events.jsonl"
        inputs_path = logdir / f"{session.session_id}.inputs.jsonl"
        events_path.write_text("\n".join(session.event_lines()) + "\n")
        inputs_path.write_text("\n".join(session.trace_lines()) + "\n")
        app.state.sessions[session.session_id] = {
            "events": events_path,
            "inputs": inputs_path,
        }

    @app.get("/sessions")
    async def list_sessions():
        return JSONResponse(sorted(app.state.sessions.keys()))

    @app.get("/sessions/{sid}/{which}.jsonl")
    async def get_log(sid: str, which: str):
        entry = app.state.sessions.get(sid)
        if entry is None or which not in entry:
            return PlainTextResponse("unknown session or log", status_code=404)
        return PlainTextResponse(
            Path(entry[which]).read_text(), media_type="application/jsonl"
        )

    @app.websocket("/ws")
    async def ws_session(ws: WebSocket):
        await ws.accept()
        protocol = ProtocolConfig()
        # an optional leading control/start message reconfigures the session
        try:
            first = await asyncio.wait_for(ws.receive_text(), timeout=0.2)
            env = json.loads(first)
            if env.get("type") == "control" and env.get("payload", {}).get("action") == "start":
                cfg = env["payload"].get("protocol")
                if cfg:
                    protocol = ProtocolConfig.from_json(cfg)
                first = None
        except asyncio.TimeoutError:
            first = None
        session = LiveSession(protocol)
        event_q: asyncio.Queue = asyncio.Queue()
        latest_state: list   = [None]  # slot; replaced under slow consumers
        stop = asyncio.Event()

        async def ticker():
            loop = asyncio.get_running_loop()
            t = 0
            next_wall = loop.time()
            while not stop.is_set() and not session.done:
                for env in session.tick(t):
                    event_q.put_nowait(env)
                if (t // TICK_MS) % STATE_EVERY_TICKS == 0:
                    latest_state[0] = session.state_envelope(t)
                t += TICK_MS
                next_wall += TICK_MS / 1000.0
                delay = next_wall - loop.time()
                if delay > 0:
                    await asyncio.sleep(delay)
                else:
                    next_wall = loop.time()  # fell behind; drop the debt
            if session.done:
                report = analysis.compute_metrics(
                    session.core.events, session.core.protocol.mode
                )
                event_q.put_nowait(
                    {"type": "metrics", "t_ms": t, "payload": report.to_json()}
                )
                latest_state[0] = session.state_envelope(t)
                _finalize(session)

        async def sender():
            while not stop.is_set():
                try:
                    env = event_q.get_nowait()
                except asyncio.QueueEmpty:
                    env = latest_state[0]
                    latest_state[0] = None
                    if env is None:
                        await asyncio.sleep(0.005)
                        continue
                await ws.send_text(json.dumps(env))

        tick_task = asyncio.create_task(ticker())
        send_task = asyncio.create_task(sender())
        try:
            if first is not None:
                env = json.loads(first)
                session.handle_inbound(env)
            while True:
                text = await ws.receive_text()
                try:
                    session.handle_inbound(json.loads(text))
                except (EnvelopeError, json.JSONDecodeError, ValueError):
                    pass  # malformed client input; drop it
        except WebSocketDisconnect:
            pass
        finally:
            stop.set()
            for task in (tick_task, send_task):
                task.cancel()
                try:
                    await task
                except asyncio.CancelledError:
                    pass
                except Exception:
                    pass
            _finalize(session)  # connection drop aborts; keep what we have

    if ui_dir is not None and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def serve(
    port: int, logdir: str | Path = "sessions", ui_dir: str | Path | None = None
) -> None:
    import uvicorn

    uvicorn.run(create_app(logdir=logdir, ui_dir=ui_dir), host="0.0.0.0", port=port)
