"""Single-path stopped-sum construction.

A path is stepped until the accumulated conditional variance reaches the
threshold n.  Indexing contract (the one off-by-one hazard, stated once):
model step i emits (X_{i+1}, sigma^2_i, Y_i); nu is the smallest k >= 1
with sum_{i=0}^{k} sigma^2_i >= n, so the step at which the threshold is
crossed already carries the extra increment X_{nu+1} used by S'_nu.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateStartError, PathOverflowError
from .models import step_model

__all__ = [
    "StoppedSample",
    "Lemma1Result",
    "run_path",
    "compute_gamma",
    "lemma1_check",
]


@dataclass(frozen=True)
class StoppedSample:
    nu: int
    gamma: float
    s_nu: float
    s_prime_nu: float
    y_nu: float
    v_before: float          # sum_{i=0}^{nu-1} sigma^2_i
    sigma_nu_sq: float
    sigma_prefix: np.ndarray | None = None  # partial sums up to v_before


def compute_gamma(v_before, sigma_nu_sq, n):
    """Fraction of the final conditional variance that lands the total on n."""
    if sigma_nu_sq <= 0:
        raise DegenerateStartError(f"sigma_nu_sq = {sigma_nu_sq} must be > 0")
    if not v_before < n <= v_before + sigma_nu_sq:
        raise DegenerateStartError(
            f"need v_before < n <= v_before + sigma_nu_sq, got "
            f"({v_before}, {n}, {v_before + sigma_nu_sq})"
        )
    return (n - v_before) / sigma_nu_sq


def run_path(state, n, keep_prefix=False):
    """Run one model path to its stopping time.

    Variance accumulation is Kahan-compensated: nu is defined by a
    threshold comparison and million-step paths would otherwise drift.
    """
    if n <= 0:
        raise ValueError("n must be positive")
    if n < 2.0 * state.spec.sigma0_sq_max:
        raise DegenerateStartError(
            f"n = {n} < 2 * max sigma^2_0 = {2.0 * state.spec.sigma0_sq_max}; "
            "the nu = 1 edge could make gamma nonpositive"
        )
    cap = state.spec.step_cap(n)
    total = 0.0
    comp = 0.0  # Kahan compensation term
    s = 0.0
    prefix = [] if keep_prefix else None
    k = 0
    while True:
        if k >= cap:
            raise PathOverflowError(
                f"no stop after {cap} steps (n = {n}, kind = {state.spec.kind})"
            )
        out = step_model(state)  # (X_{k+1}, sigma^2_k, Y_k)
        v_before = total
        yv = out.sigma_sq - comp
        t = total + yv
        comp = (t - total) - yv
        total = t
        if prefix is not None:
            prefix.append(total)
        if k >= 1 and total >= n:
            gamma = compute_gamma(v_before, out.sigma_sq, n)
            return StoppedSample(
                nu=k,
                gamma=gamma,
                s_nu=s,
                s_prime_nu=s + math.sqrt(gamma) * out.x,
                y_nu=out.y,
                v_before=v_before,
                sigma_nu_sq=out.sigma_sq,
                sigma_prefix=(
                    np.asarray(prefix[:-1], dtype=float)
                    if prefix is not None else None
                ),
            )
        s += out.x
        k += 1


@dataclass(frozen=True)
class Lemma1Result:
    lhs: float
    rhs: float
    margin: float

    @property
    def ok(self):
        return self.lhs <= self.rhs


def lemma1_check(sample, t, n):
    """Deterministic pathwise inequality on the stopped prefix.

    LHS = sum_{j=1}^{nu} exp((t^2/2n) * P_j) * (t^2/2n) * sigma^2_{j-1}
    with P_j = sum_{p=0}^{j-1} sigma^2_p, against
    RHS = exp(t^2/2) * (1 + Y_nu^2 t^2 / n).
    """
    if sample.sigma_prefix is None:
        raise ValueError("run the path with keep_prefix=True for Lemma-1 checks")
    if not math.isfinite(t):
        raise ValueError("t must be finite")
    prefix = sample.sigma_prefix  # P_j for j = 1..nu, P_nu = v_before
    sigmas = np.diff(prefix, prepend=0.0)
    c = t * t / (2.0 * n)
    lhs = float(np.sum(np.exp(c * prefix) * c * sigmas))
    rhs = math.exp(t * t / 2.0) * (1.0 + sample.y_nu**2 * t * t / n)
    return Lemma1Result(lhs=lhs, rhs=rhs, margin=rhs - lhs)
