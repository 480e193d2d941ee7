"""Loss sequences for experiments. Every adversary is called as adv(t, p_t) -> l_t."""
from __future__ import annotations

import io
import itertools
from pathlib import Path
from typing import Callable, Optional, Union

import numpy as np

from ..errors import AdversaryExhausted, ConfigError


class IidUniform:
    """Each coordinate uniform on [lo, hi], independently across rounds."""

    def __init__(self, lo: np.ndarray, hi: np.ndarray, rng: np.random.Generator):
        self.lo = np.asarray(lo, dtype=float)
        self.hi = np.asarray(hi, dtype=float)
        self.rng = rng

    def __call__(self, t: int, p: np.ndarray) -> np.ndarray:
        return self.rng.uniform(self.lo, self.hi)


class FixedSequence:
    """Replays rows of a table (one loss vector per round)."""

    def __init__(self, rows: np.ndarray):
        self.rows = np.atleast_2d(np.asarray(rows, dtype=float))

    @classmethod
    def from_file(cls, path: Union[str, Path], m: Optional[int] = None) -> "FixedSequence":
        text = Path(path).read_text()
        if not text.strip():
            raise ConfigError(f"loss file {path} is empty", field="loss_file")
        rows = np.loadtxt(io.StringIO(text), ndmin=2)
        if m is not None and rows.shape[1] != m:
            raise ConfigError(f"loss file has {rows.shape[1]} columns, instance needs {m}", field="loss_file")
        return cls(rows)

    def __call__(self, t: int, p: np.ndarray) -> np.ndarray:
        if t >= self.rows.shape[0]:
            raise AdversaryExhausted(t)
        return self.rows[t].copy()


class AdaptiveWorst:
    """Sees p_t and picks the loss-box vertex that maximizes the regret after the round.

    `score(Z)` evaluates the (clamped) regret of a cumulative basis point.  Only
    box-shaped loss sets are supported, since the vertices are enumerated.
    """

    def __init__(self, lo: np.ndarray, hi: np.ndarray, score: Callable[[np.ndarray], float],
                 max_vertices: int = 1 << 16):
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        if 2 ** lo.size > max_vertices:
            raise ConfigError(f"{2 ** lo.size} loss vertices is too many to enumerate", field="adversary")
        self.vertices = np.array([[h if b else l for b, l, h in zip(bits, lo, hi)]
                                  for bits in itertools.product([0, 1], repeat=lo.size)])
        self.score = score
        self.cum: Optional[np.ndarray] = None

    def __call__(self, t: int, p: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if self.cum is None:
            self.cum = np.zeros((p.size, self.vertices.shape[1]))
        best, best_v = None, -np.inf
        for v in self.vertices:
            s = self.score(self.cum + np.outer(p, v))
            if s > best_v + 1e-12:
                best, best_v = v, s
        self.cum = self.cum + np.outer(p, best)
        return best.copy()
