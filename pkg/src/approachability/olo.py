"""Follow-the-regularized-leader for online linear optimization.

Three regularizers: negative entropy on the (padded) simplex, squared distance
to a center over a convex body, and an arbitrary convex function supplied by
the caller (the maximum-entropy regularizer lives with its application).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .convex import ConvexBody, convex_minimize
from .errors import ConfigError


@dataclass(frozen=True)
class OloState:
    """Cumulative loss, round counter and step size of one FTRL instance."""
    cumulative: np.ndarray
    eta: float
    t: int = 0

    def __post_init__(self):
        if not (self.eta > 0 and math.isfinite(self.eta)):
            raise ConfigError(f"learning rate must be finite and positive, got {self.eta}", field="eta")

    def observe(self, y: np.ndarray) -> "OloState":
        y = np.asarray(y, dtype=float)
        if y.shape != self.cumulative.shape:
            raise ConfigError(f"loss shape {y.shape} does not match {self.cumulative.shape}", field="y")
        return OloState(self.cumulative + y, self.eta, self.t + 1)

    @classmethod
    def start(cls, shape, eta: float) -> "OloState":
        return cls(np.zeros(shape), eta, 0)


def pad_loss(y: np.ndarray) -> np.ndarray:
    """Embed a loss for the sub-simplex {x >= 0, sum x <= 1} into the full simplex.

    The extra coordinate carries slack 1 - sum x and loss 0, so inner products
    are preserved exactly.
    """
    return np.append(np.asarray(y, dtype=float), 0.0)


def ftrl_negentropy_step(state: OloState) -> np.ndarray:
    """argmin over the simplex of sum x log x + eta <x, L>, i.e. softmax(-eta L)."""
    s = -state.eta * state.cumulative
    s = s - s.max()
    w = np.exp(s)
    return w / w.sum()


def ftrl_quadratic_step(state: OloState, body: ConvexBody, center: np.ndarray,
                        eps: float = 1e-9) -> np.ndarray:
    """argmin over the body of |x - x0|^2 + eta <x, L>: the projection of x0 - (eta/2) L."""
    center = np.asarray(center, dtype=float)
    target = center - 0.5 * state.eta * state.cumulative
    shape = target.shape
    if body.projection is not None:
        return np.asarray(body.projection(target.ravel()), float).reshape(shape)
    cum = state.cumulative.ravel()
    c0 = center.ravel()

    def obj(x):
        d = x - c0
        return d @ d + state.eta * (x @ cum)

    def grad(x):
        return 2 * (x - c0) + state.eta * cum

    x, _ = convex_minimize(body, obj, eps=eps, grad=grad)
    return x.reshape(shape)


def ftrl_custom_step(state: OloState, regularizer: Callable[[np.ndarray], float], body: ConvexBody,
                     eps: float = 1e-9) -> np.ndarray:
    """argmin over the body of R(x) + eta <x, L> for a caller-supplied convex R."""
    cum = state.cumulative.ravel()
    shape = state.cumulative.shape

    def obj(x):
        return regularizer(x.reshape(shape)) + state.eta * (x @ cum)

    x, _ = convex_minimize(body, obj, eps=eps)
    return x.reshape(shape)


def learning_rate(kind: str, T: int, D_x: float = 1.0, D_y: float = 1.0,
                  dim: Optional[int] = None, log_dim: Optional[float] = None) -> float:
    """Fixed-horizon step size.

    quadratic: D_x / (D_y sqrt T);  negentropy: sqrt(log(dim) / T) / D_y.
    `log_dim` may replace `dim` when the dimension is astronomically large.
    """
    if T < 1:
        raise ConfigError(f"horizon must be >= 1, got T={T}", field="T")
    if D_x <= 0 or D_y <= 0:
        raise ConfigError("diameters must be positive", field="D")
    if kind == "quadratic":
        return D_x / (D_y * math.sqrt(T))
    if kind == "negentropy":
        if log_dim is None:
            if dim is None or dim < 2:
                raise ConfigError("negentropy rate needs dim >= 2", field="dim")
            log_dim = math.log(dim)
        return math.sqrt(log_dim / T) / D_y
    raise ConfigError(f"unknown regularizer kind {kind!r}", field="kind")


@dataclass
class Ftrl:
    """Stateful wrapper: `iterate()` plays, `update(y)` observes.

    `step` maps an OloState to the next iterate; `transform` maps raw losses into
    the learner's domain (e.g. the simplex padding).
    """
    step: Callable[[OloState], np.ndarray]
    state: OloState
    transform: Optional[Callable[[np.ndarray], np.ndarray]] = None
    _cache: Optional[np.ndarray] = field(default=None, repr=False)

    def iterate(self) -> np.ndarray:
        if self._cache is None:
            self._cache = self.step(self.state)
        return self._cache

    def update(self, y: np.ndarray) -> None:
        if self.transform is not None:
            y = self.transform(y)
        self.state = self.state.observe(y)
        self._cache = None


def negentropy_learner(d: int, eta: float) -> Ftrl:
    """Exponential weights over the padded simplex of dimension d + 1."""
    return Ftrl(ftrl_negentropy_step, OloState.start(d + 1, eta), transform=pad_loss)


def quadratic_learner(body: ConvexBody, center: np.ndarray, eta: float, eps: float = 1e-9) -> Ftrl:
    center = np.asarray(center, dtype=float)
    return Ftrl(lambda s: ftrl_quadratic_step(s, body, center, eps), OloState.start(center.shape, eta))


def closed_form_learner(argmin: Callable[[np.ndarray, float], np.ndarray], shape, eta: float) -> Ftrl:
    """FTRL whose regularized argmin is known in closed form: argmin(cumulative, eta)."""
    return Ftrl(lambda s: argmin(s.cumulative, s.eta), OloState.start(shape, eta))


def linear_regret(iterates: np.ndarray, losses: np.ndarray, best_value: float) -> float:
    """sum_t <x_t, y_t> minus the best fixed point's cumulative loss."""
    X = np.asarray(iterates, dtype=float).reshape(len(iterates), -1)
    Y = np.asarray(losses, dtype=float).reshape(len(losses), -1)
    return float(np.einsum("ij,ij->", X, Y) - best_value)
