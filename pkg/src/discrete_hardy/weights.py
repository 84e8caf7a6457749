"""Carleman-type weight families ``psi(t, n) = exp(kappa(t, n))``.

Three families are used:

* :class:`EnergyWeight`      ``kappa = alpha |n| log(1+|n|) / (1+t)``
* :class:`BridgeWeight`      ``kappa = gamma (1+|n|) log(1+|n|)**b``  (static)
* :class:`ConvexityWeight`   ``kappa = gamma M log M`` with ``M = |n| + R(t)``,
  ``R(t) = c0 + r0 t (1-t)``

Only ``kappa`` is ever materialised.  The lattice increments
``kappa(n+1) - kappa(n)`` are needed to ~1e-15 relative accuracy while
``kappa`` itself reaches 1e6 at the scan edges, so each family supplies a
cancellation-free closed form for the increment (``step``).  All methods
accept integer arrays for ``n`` and a scalar ``t``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _abs_n(n):
    return np.abs(np.asarray(n, dtype=np.int64)).astype(float)


def _signed_step(step_pos, n):
    # kappa is even in n: for n < 0, kappa(n+1)-kappa(n) = -(step from |n|-1 to |n|)
    n = np.asarray(n, dtype=np.int64)
    m = np.where(n >= 0, n, -n - 1).astype(float)
    s = step_pos(m)
    return np.where(n >= 0, s, -s)


def _centred_second(second_pos, step_pos, n):
    # second difference centred at c = n+1; kappa even so only |c| matters,
    # and at c = 0 it is twice the first increment
    c = np.abs(np.asarray(n, dtype=np.int64) + 1).astype(float)
    safe = np.where(c == 0, 1.0, c)
    return np.where(c == 0, 2.0 * step_pos(np.zeros_like(c)), second_pos(safe))


class _Weight:
    def weight_log(self, t: float, n):
        return self.kappa(t, n)

    def second_step(self, t: float, n):
        """``kappa(n+2) + kappa(n) - 2 kappa(n+1)`` via increments."""
        n = np.asarray(n, dtype=np.int64)
        return self.step(t, n + 1) - self.step(t, n)


@dataclass(frozen=True)
class EnergyWeight(_Weight):
    alpha: float

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"energy weight needs 0 < alpha <= 1, got {self.alpha}")

    def kappa(self, t, n):
        m = _abs_n(n)
        return self.alpha * m * np.log1p(m) / (1.0 + t)

    def _step_pos(self, m, c):
        # (m+1) log(m+2) - m log(m+1) = log(m+2) + m log1p(1/(m+1))
        return c * (np.log(m + 2.0) + m * np.log1p(1.0 / (m + 1.0)))

    def step(self, t, n):
        c = self.alpha / (1.0 + t)
        return _signed_step(lambda m: self._step_pos(m, c), n)

    def second_step(self, t, n):
        c = self.alpha / (1.0 + t)

        def pos(m):
            # m log1p(-1/(m+1)^2) + log1p(2/m): no cancellation between O(m log m) terms
            return c * (m * np.log1p(-1.0 / (m + 1.0) ** 2) + np.log1p(2.0 / m))

        return _centred_second(pos, lambda m: self._step_pos(m, c), n)

    def kappa_t(self, t, n):
        return -self.kappa(t, n) / (1.0 + t)

    def kappa_tt(self, t, n):
        return 2.0 * self.kappa(t, n) / (1.0 + t) ** 2

    def kappa_t_step(self, t, n):
        return -self.step(t, n) / (1.0 + t)


@dataclass(frozen=True)
class BridgeWeight(_Weight):
    gamma: float
    b: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"bridge weight needs gamma > 0, got {self.gamma}")
        if not 0.5 < self.b < 1.0:
            raise ValueError(f"bridge weight needs 1/2 < b < 1, got {self.b}")

    def kappa(self, t, n):
        m = _abs_n(n)
        return self.gamma * (1.0 + m) * np.log1p(m) ** self.b

    def _step_pos(self, m):
        b = self.b
        l0 = np.log1p(m)
        l1 = np.log(m + 2.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            # l1^b - l0^b = l0^b * expm1(b * log1p((l1 - l0) / l0))
            ratio = np.log1p(1.0 / (m + 1.0)) / l0
            diff = l0 ** b * np.expm1(b * np.log1p(ratio))
        diff = np.where(m == 0, l1 ** b, diff)
        return self.gamma * (l1 ** b + (1.0 + m) * diff)

    def step(self, t, n):
        return _signed_step(self._step_pos, n)

    def kappa_t(self, t, n):
        return np.zeros(np.shape(n))

    def kappa_tt(self, t, n):
        return np.zeros(np.shape(n))

    def kappa_t_step(self, t, n):
        return np.zeros(np.shape(n))


@dataclass(frozen=True)
class ConvexityWeight(_Weight):
    gamma: float
    c0: float
    r0: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"convexity weight needs gamma > 0, got {self.gamma}")
        if not self.c0 > 0 or not self.r0 > 0:
            raise ValueError("convexity weight needs c0 > 0 and r0 > 0")

    def R(self, t):
        return self.c0 + self.r0 * t * (1.0 - t)

    def dR(self, t):
        return self.r0 * (1.0 - 2.0 * t)

    def M(self, t, n):
        return _abs_n(n) + self.R(t)

    def kappa(self, t, n):
        M = self.M(t, n)
        return self.gamma * M * np.log(M)

    def step(self, t, n):
        R = self.R(t)

        def pos(m):
            M = m + R
            return self.gamma * (np.log(M + 1.0) + M * np.log1p(1.0 / M))

        return _signed_step(pos, n)

    def second_step(self, t, n):
        R = self.R(t)

        def pos(c):
            M = c + R
            return self.gamma * (M * np.log1p(-1.0 / (M * M)) + np.log1p(2.0 / (M - 1.0)))

        def step0(m):
            M = m + R
            return self.gamma * (np.log(M + 1.0) + M * np.log1p(1.0 / M))

        return _centred_second(pos, step0, n)

    def dphi(self, M):
        return self.gamma * (np.log(M) + 1.0)

    def ddphi(self, M):
        return self.gamma / M

    def kappa_t(self, t, n):
        return self.dR(t) * self.dphi(self.M(t, n))

    def kappa_tt(self, t, n):
        M = self.M(t, n)
        return -2.0 * self.r0 * self.dphi(M) + self.dR(t) ** 2 * self.ddphi(M)

    def kappa_t_step(self, t, n):
        R = self.R(t)
        return self.dR(t) * _signed_step(lambda m: self.gamma * np.log1p(1.0 / (m + R)), n)

    def default_eps(self) -> float:
        return min(0.01, (self.gamma - 1.0) ** 2 / 12.0)


WeightFamily = EnergyWeight | BridgeWeight | ConvexityWeight


def weight_log(w: WeightFamily, t: float, n):
    """``log psi(t, n)`` for any weight family."""
    return w.kappa(t, n)


def kappa_derivatives(w: ConvexityWeight, t: float, n):
    """``(kappa, d kappa/dt, d^2 kappa/dt^2)`` for the convexity weight.

    Requires ``M = |n| + R(t) > 1``.
    """
    if not isinstance(w, ConvexityWeight):
        raise TypeError("kappa_derivatives is defined for the convexity weight")
    M = w.M(t, n)
    if np.any(M <= 1.0):
        raise ValueError("kappa derivatives need |n| + R(t) > 1")
    return w.kappa(t, n), w.kappa_t(t, n), w.kappa_tt(t, n)


def weight_to_dict(w: WeightFamily) -> dict:
    if isinstance(w, EnergyWeight):
        return {"family": "energy", "alpha": w.alpha}
    if isinstance(w, BridgeWeight):
        return {"family": "bridge", "gamma": w.gamma, "b": w.b}
    return {"family": "convexity", "gamma": w.gamma, "c0": w.c0, "r0": w.r0}


def weight_from_dict(d: dict) -> WeightFamily:
    family = d.get("family")
    if family == "energy":
        return EnergyWeight(float(d["alpha"]))
    if family == "bridge":
        return BridgeWeight(float(d["gamma"]), float(d["b"]))
    if family == "convexity":
        return ConvexityWeight(float(d["gamma"]), float(d["c0"]), float(d["r0"]))
    raise ValueError(f"unknown weight family {family!r}")

