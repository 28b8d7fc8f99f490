"""Client for external generator processes speaking the line-delimited JSON
wire protocol (version 1).

Messages are one JSON object per line (0x0A terminated, UTF-8) over the
child's standard input/output:

    parent -> child   {"type": "hello", "version": 1, "dims": d, "context_len": p}
    child  -> parent  {"type": "ready", "version": 1, "dims": d, "context_len": p}
    parent -> child   {"type": "propose", "id": n, "context": [[...]], "seed": u64}
    child  -> parent  {"type": "proposal", "id": n, "value": [d reals]}
    parent -> child   {"type": "shutdown"}        (child then exits 0)

Anything else, a wrong id, or a non-finite value is a protocol error.  The
child's standard error passes through for diagnostics.
"""

import json
import math
import queue
import subprocess
import threading
from dataclasses import dataclass

import numpy as np

from .exceptions import (
    ChildExit,
    HandshakeMismatch,
    ProtocolError,
    SpawnError,
    Timeout,
)
from .validation import check_context

PROTOCOL_VERSION = 1


@dataclass(frozen=True)
class ExternalSourceConfig:
    """How to launch and talk to an external generator process."""

    command: tuple
    handshake_timeout_ms: int = 5000
    proposal_timeout_ms: int = 5000

    def __post_init__(self):
        object.__setattr__(self, "command", tuple(str(c) for c in self.command))
        if not self.command:
            raise ValueError("command must be nonempty")
        if self.handshake_timeout_ms <= 0 or self.proposal_timeout_ms <= 0:
            raise ValueError("timeouts must be positive")


class ExternalSource:
    """Proposal source backed by a child process.

    One outstanding request at a time; the process lives for the duration of
    a run and is restarted at most once if it dies mid-run.  Use as a context
    manager or call :meth:`close` to shut the child down.
    """

    def __init__(self, config, dims, context_len):
        self.config = config
        self.dims = int(dims)
        self.context_len = int(context_len)
        self._proc = None
        self._lines = None
        self._reader = None
        self._next_id = 0
        self._restarts = 0
        self._lock = threading.Lock()

    # -- lifecycle ---------------------------------------------------------

    def start(self):
        if self._proc is not None:
            return self
        try:
            self._proc = subprocess.Popen(
                self.config.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=None,
                text=True,
                bufsize=1,
            )
        except OSError as e:
            raise SpawnError(f"cannot spawn {self.config.command}: {e}") from e
        self._lines = queue.Queue()
        self._reader = threading.Thread(
            target=self._pump, args=(self._proc.stdout, self._lines), daemon=True
        )
        self._reader.start()
        self._handshake()
        return self

    @staticmethod
    def _pump(stream, sink):
        for line in stream:
            sink.put(line)
        sink.put(None)  # EOF marker

    def _handshake(self):
        self._send(
            {
                "type": "hello",
                "version": PROTOCOL_VERSION,
                "dims": self.dims,
                "context_len": self.context_len,
            }
        )
        msg = self._recv(self.config.handshake_timeout_ms, "handshake")
        if msg.get("type") != "ready" or msg.get("version") != PROTOCOL_VERSION:
            raise ProtocolError(f"expected ready message, got {msg!r}")
        if msg.get("dims") != self.dims or msg.get("context_len") != self.context_len:
            raise HandshakeMismatch(
                f"child advertises dims={msg.get('dims')} context_len="
                f"{msg.get('context_len')}, expected dims={self.dims} "
                f"context_len={self.context_len}"
            )

    def close(self):
        proc, self._proc = self._proc, None
        if proc is None:
            return
        try:
            if proc.poll() is None:
                try:
                    proc.stdin.write(json.dumps({"type": "shutdown"}) + "\n")
                    proc.stdin.flush()
                except (BrokenPipeError, OSError, ValueError):
                    pass
                try:
                    proc.wait(timeout=self.config.proposal_timeout_ms / 1000.0)
                except subprocess.TimeoutExpired:
                    proc.kill()
                    proc.wait()
        finally:
            for stream in (proc.stdin, proc.stdout):
                if stream is not None:
                    try:
                        stream.close()
                    except OSError:
                        pass

    def __enter__(self):
        return self.start()

    def __exit__(self, *exc):
        self.close()

    def __del__(self):
        try:
            self.close()
        except Exception:
            pass

    # -- wire --------------------------------------------------------------

    def _send(self, obj):
        if self._proc is None or self._proc.poll() is not None:
            raise ChildExit("generator process is not running")
        try:
            self._proc.stdin.write(json.dumps(obj) + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as e:
            raise ChildExit(f"generator process pipe closed: {e}") from e

    def _recv(self, timeout_ms, what):
        try:
            line = self._lines.get(timeout=timeout_ms / 1000.0)
        except queue.Empty:
            raise Timeout(f"no reply within {timeout_ms} ms during {what}") from None
        if line is None:
            code = self._proc.poll() if self._proc is not None else None
            raise ChildExit(f"generator process exited (code {code}) during {what}")
        try:
            msg = json.loads(line)
        except json.JSONDecodeError as e:
            raise ProtocolError(f"malformed line from child: {line!r}") from e
        if not isinstance(msg, dict):
            raise ProtocolError(f"expected a JSON object, got {msg!r}")
        return msg

    # -- proposal ----------------------------------------------------------

    def propose(self, context, rng):
        ctx = check_context(context, self.dims, min_rows=self.context_len)
        seed = rng.draw_seed()
        with self._lock:
            if self._proc is None:
                self.start()
            try:
                return self._propose_once(ctx, seed)
            except ChildExit:
                if self._restarts >= 1:
                    raise
                self._restarts += 1
                self.close()
                self.start()
                return self._propose_once(ctx, seed)

    def _propose_once(self, ctx, seed):
        self._next_id += 1
        req_id = self._next_id
        self._send(
            {
                "type": "propose",
                "id": req_id,
                "context": ctx[-self.context_len :].tolist(),
                "seed": seed,
            }
        )
        msg = self._recv(self.config.proposal_timeout_ms, f"propose id={req_id}")
        if msg.get("type") != "proposal":
            raise ProtocolError(f"expected proposal, got {msg!r}")
        if msg.get("id") != req_id:
            raise ProtocolError(f"id mismatch: sent {req_id}, got {msg.get('id')!r}")
        value = msg.get("value")
        if (
            not isinstance(value, list)
            or len(value) != self.dims
            or not all(isinstance(v, (int, float)) for v in value)
        ):
            raise ProtocolError(f"bad proposal value {value!r}")
        arr = np.asarray(value, dtype=np.float64)
        if not all(math.isfinite(v) for v in arr):
            raise ProtocolError(f"non-finite proposal value {value!r}")
        return arr
