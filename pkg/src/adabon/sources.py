"""Where rewards come from: synthetic distributions, replayed logs, or a
remote scoring service.

A source turns ``(width, run_seed)`` into a :class:`~adabon.core.RewardMatrix`.
Prompt ``i`` of a synthetic or replay source draws from the stream
``make_rng(run_seed, "matrix", i)``.

Reward log format (UTF-8, one JSON object per line)::

    {"prompt_id": "alpaca-0017", "rewards": [0.31, -1.2, ...]}

Remote protocol: ``POST {base}/score`` with ``{"prompt_id": str, "n": int}``,
answered by ``{"rewards": [float, ...]}`` holding exactly ``n`` numbers.
"""

from __future__ import annotations

import json
import threading
import urllib.error
import urllib.request
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import RewardMatrix
from .distributions import SyntheticDistribution, from_dict
from .streams import make_rng

RESAMPLE_MODES = ("without_replacement", "with_replacement")


class RewardLogError(ValueError):
    pass


class TransportError(RuntimeError):
    pass


def load_reward_log(path) -> dict[str, np.ndarray]:
    """Read a line-delimited reward log into ``{prompt_id: rewards}`` (file order)."""
    pools: dict[str, np.ndarray] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                pid = rec["prompt_id"]
                rewards = np.asarray(rec["rewards"], dtype=np.float64)
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise RewardLogError(f"{path}:{lineno}: malformed record ({exc})") from None
            if not isinstance(pid, str) or rewards.ndim != 1:
                raise RewardLogError(f"{path}:{lineno}: malformed record")
            if pid in pools:
                raise RewardLogError(f"{path}:{lineno}: duplicate prompt_id {pid!r}")
            pools[pid] = rewards
    return pools


@dataclass(frozen=True)
class SyntheticSource:
    dists: tuple[SyntheticDistribution, ...]
    kind = "synthetic"

    def __post_init__(self):
        object.__setattr__(self, "dists", tuple(
            from_dict(d) if isinstance(d, dict) else d for d in self.dists))

    @property
    def K(self):
        return len(self.dists)

    def materialize(self, width: int, run_seed: int) -> RewardMatrix:
        rows = [d.draw(width, make_rng(run_seed, "matrix", i)) for i, d in enumerate(self.dists)]
        return RewardMatrix(rows)


@dataclass(frozen=True)
class ReplaySource:
    pools: dict
    prompt_ids: tuple[str, ...]
    resample: str = "without_replacement"
    kind = "replay"

    def __post_init__(self):
        object.__setattr__(self, "prompt_ids", tuple(self.prompt_ids))
        if self.resample not in RESAMPLE_MODES:
            raise ValueError(f"resample must be one of {RESAMPLE_MODES}")
        missing = [p for p in self.prompt_ids if p not in self.pools]
        if missing:
            raise KeyError(f"prompts missing from reward log: {missing}")

    @property
    def K(self):
        return len(self.prompt_ids)

    def materialize(self, width: int, run_seed: int) -> RewardMatrix:
        rows = []
        for i, pid in enumerate(self.prompt_ids):
            pool = self.pools[pid]
            rng = make_rng(run_seed, "matrix", i)
            if self.resample == "with_replacement":
                rows.append(pool[rng.integers(0, pool.size, size=width)])
                continue
            if pool.size < width:
                raise ValueError(
                    f"reward pool for prompt {pid!r} has {pool.size} entries, need {width}")
            rows.append(pool[rng.permutation(pool.size)[:width]])
        return RewardMatrix(rows)


@dataclass
class RemoteSource:
    """Synchronous client of a remote scoring service.

    ``max_in_flight`` bounds concurrent requests across every thread sharing
    this source.  Retries are off unless ``retries`` is raised.
    """

    base_url: str
    prompt_ids: Sequence[str]
    timeout: float = 30.0
    max_in_flight: int = 4
    retries: int = 0
    kind = "remote"
    _gate: threading.BoundedSemaphore = field(init=False, repr=False)

    def __post_init__(self):
        self.prompt_ids = tuple(self.prompt_ids)
        if self.max_in_flight < 1:
            raise ValueError("max_in_flight must be at least 1")
        self._gate = threading.BoundedSemaphore(self.max_in_flight)

    @property
    def K(self):
        return len(self.prompt_ids)

    def score(self, prompt_id: str, n: int) -> np.ndarray:
        body = json.dumps({"prompt_id": prompt_id, "n": int(n)}).encode()
        url = self.base_url.rstrip("/") + "/score"
        last = None
        for _ in range(self.retries + 1):
            try:
                with self._gate:
                    req = urllib.request.Request(
                        url, data=body, method="POST",
                        headers={"Content-Type": "application/json"})
                    with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                        payload = json.loads(resp.read().decode("utf-8"))
                rewards = np.asarray(payload["rewards"], dtype=np.float64)
                if rewards.shape != (n,):
                    raise TransportError(
                        f"{url}: expected {n} rewards for {prompt_id!r}, got {rewards.size}")
                return rewards
            except TransportError as exc:
                last = exc
            except (urllib.error.URLError, OSError, ValueError, KeyError, TypeError) as exc:
                last = TransportError(f"{url}: {exc}")
        raise last

    def materialize(self, width: int, run_seed: int) -> RewardMatrix:
        # run_seed is unused: the service owns its randomness
        with ThreadPoolExecutor(max_workers=self.max_in_flight) as pool:
            rows = list(pool.map(lambda pid: self.score(pid, width), self.prompt_ids))
        return RewardMatrix(rows)


def materialize_matrix(source, width: int, run_seed: int) -> RewardMatrix:
    """A ``K x width`` reward matrix for one run."""
    if width < 1:
        raise ValueError("width must be positive")
    return source.materialize(int(width), run_seed)


def source_from_dict(spec: dict, prompts: Sequence, pools: dict | None = None):
    """Build the source for one batch from a config ``source`` block.

    ``prompts`` holds distributions (synthetic) or prompt ids (replay, remote).
    """
    kind = spec.get("kind", "synthetic")
    if kind == "synthetic":
        return SyntheticSource(tuple(prompts))
    if kind == "replay":
        if pools is None:
            pools = load_reward_log(Path(spec["path"]))
        return ReplaySource(pools, tuple(prompts), spec.get("resample", "without_replacement"))
    if kind == "remote":
        return RemoteSource(spec["url"], tuple(prompts), spec.get("timeout", 30.0),
                            spec.get("max_in_flight", 4), spec.get("retries", 0))
    raise ValueError(f"unknown source kind {kind!r}")
