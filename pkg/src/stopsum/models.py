"""Adapted martingale-difference generators.

Each model emits, at step k, the triple (X_{k+1}, sigma^2_k, Y_k): the
conditional variance and the dominating sequence are computed from the
history *before* the next increment is drawn.  All conditional laws are
symmetric two-point laws, so conditional moments are available in closed
form and the hypothesis checks are exact rather than statistical.

Kinds
-----
iid_bounded   X = +/- sqrt(v), constant variance v <= M^2, Y = max(M, 1).
product       X_{k+1} = A_k * zeta_{k+1} with Rademacher zeta and
              A_k = a_lo + (a_hi - a_lo) * (1 - 2^{-N_k}) driven by a
              nondecreasing Bernoulli counting process N_k; Y_k = A_k.
regime_switch sigma^2_k in {v_lo, v_hi} selected by the sign of the
              running sum; X_{k+1} = +/- sigma_k; Y = max(1, sqrt(v_hi)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, ModelInvalidError, PathOverflowError

__all__ = [
    "KINDS",
    "ModelSpec",
    "ModelState",
    "StepOutput",
    "ValidationReport",
    "init_model",
    "step_model",
    "validate_model",
]

KINDS = ("iid_bounded", "product", "regime_switch")

_PARAM_DEFAULTS = {
    "iid_bounded": {"m": 1.0, "v": 1.0},
    "product": {"a_lo": 1.0, "a_hi": 2.0, "p_growth": 0.05},
    "regime_switch": {"v_lo": 1.0, "v_hi": 1.0},
}


@dataclass(frozen=True)
class ModelSpec:
    """Model kind plus its flat parameter set and a hard step cap."""

    kind: str
    params: dict
    max_steps: int = 10_000_000

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown model kind {self.kind!r}")
        merged = dict(_PARAM_DEFAULTS[self.kind])
        unknown = set(self.params) - set(merged)
        if unknown:
            raise ConfigurationError(
                f"unknown parameters for {self.kind}: {sorted(unknown)}"
            )
        merged.update({k: float(v) for k, v in self.params.items()})
        object.__setattr__(self, "params", merged)
        if self.max_steps < 1:
            raise ConfigurationError("max_steps must be positive")
        p = merged
        if self.kind == "iid_bounded":
            if p["m"] < 1.0:
                raise ConfigurationError("iid_bounded requires M >= 1")
            if not 0.0 < p["v"] <= p["m"] ** 2:
                raise ConfigurationError("iid_bounded requires 0 < v <= M^2")
        elif self.kind == "product":
            if p["a_lo"] < 1.0 or p["a_hi"] < p["a_lo"]:
                raise ConfigurationError("product requires 1 <= a_lo <= a_hi")
            if not 0.0 <= p["p_growth"] <= 1.0:
                raise ConfigurationError("product requires p_growth in [0, 1]")
        else:
            if not 0.0 < p["v_lo"] <= p["v_hi"]:
                raise ConfigurationError("regime_switch requires 0 < v_lo <= v_hi")

    @property
    def variance_floor(self):
        """Lower bound on sigma^2_k, valid on every path."""
        p = self.params
        if self.kind == "iid_bounded":
            return p["v"]
        if self.kind == "product":
            return p["a_lo"] ** 2
        return p["v_lo"]

    @property
    def sigma0_sq_max(self):
        """Largest possible first conditional variance sigma^2_0."""
        p = self.params
        if self.kind == "iid_bounded":
            return p["v"]
        if self.kind == "product":
            return p["a_lo"] ** 2  # A_0 = a_lo since N_0 = 0
        return p["v_lo"]  # S_0 = 0 selects the low regime

    def step_cap(self, n):
        """Worst-case path length for threshold n, clamped by max_steps."""
        return min(self.max_steps, math.ceil(n / self.variance_floor) + 2)


@dataclass(frozen=True)
class StepOutput:
    x: float        # the increment X_{k+1}
    sigma_sq: float  # sigma^2_k, known before X_{k+1} is drawn
    y: float        # Y_k >= 1, nondecreasing


@dataclass
class ModelState:
    """Exclusively-owned mutable path state; replay is exact per (spec, seed)."""

    spec: ModelSpec
    step: int
    rng: np.random.Generator
    running_sum: float = 0.0   # S_k, drives the regime_switch variance
    a_current: float = 1.0     # product model: A_k
    _bits: np.ndarray = field(default_factory=lambda: np.empty(0, np.int8))
    _bit_pos: int = 0
    _unif: np.ndarray = field(default_factory=lambda: np.empty(0, float))
    _unif_pos: int = 0

    def _sign(self):
        if self._bit_pos >= self._bits.size:
            self._bits = self.rng.integers(0, 2, size=4096, dtype=np.int8)
            self._bit_pos = 0
        b = self._bits[self._bit_pos]
        self._bit_pos += 1
        return 1.0 if b else -1.0

    def _uniform(self):
        if self._unif_pos >= self._unif.size:
            self._unif = self.rng.random(4096)
            self._unif_pos = 0
        u = self._unif[self._unif_pos]
        self._unif_pos += 1
        return u


def init_model(spec, seed):
    """Deterministic state: the same (spec, seed) replays the same path."""
    if not isinstance(spec, ModelSpec):
        raise ConfigurationError("spec must be a ModelSpec")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))
    state = ModelState(spec=spec, step=0, rng=rng)
    if spec.kind == "product":
        state.a_current = spec.params["a_lo"]
    return state


def step_model(state):
    """Advance one step, emitting (X_{k+1}, sigma^2_k, Y_k).

    sigma^2 and Y are computed from the history alone; the sign driving
    X_{k+1} is drawn afterwards.
    """
    spec = state.spec
    if state.step >= spec.max_steps:
        raise PathOverflowError(
            f"step cap {spec.max_steps} reached for kind {spec.kind}"
        )
    p = spec.params
    if spec.kind == "iid_bounded":
        sigma_sq = p["v"]
        y = max(p["m"], 1.0)
        x = state._sign() * math.sqrt(sigma_sq)
    elif spec.kind == "product":
        a = state.a_current
        sigma_sq = a * a
        y = max(1.0, a)
        x = state._sign() * a
        # advance the counting process for the next step
        if state._uniform() < p["p_growth"]:
            span = p["a_hi"] - p["a_lo"]
            gap = p["a_hi"] - a
            state.a_current = p["a_hi"] - 0.5 * gap if span > 0 else a
    else:  # regime_switch
        sigma_sq = p["v_hi"] if state.running_sum > 0 else p["v_lo"]
        y = max(1.0, math.sqrt(p["v_hi"]))
        x = state._sign() * math.sqrt(sigma_sq)
    state.running_sum += x
    state.step += 1
    return StepOutput(x=x, sigma_sq=sigma_sq, y=y)


@dataclass(frozen=True)
class ValidationReport:
    kind: str
    n_paths: int
    path_len: int
    steps_checked: int
    martingale_checks: tuple  # (name, mean, stderr, ok) per test function
    passed: bool


def validate_model(spec, seed, n_paths=1000, path_len=128):
    """Check the theorem hypotheses on sampled paths.

    Exact, per step: Y >= 1 and nondecreasing, 0 < sigma^2 <= Y^2, and the
    closed-form third-moment domination E(|X|^3 | F) = sigma^3 <= Y sigma^2
    (all three kinds have conditionally two-point laws with |X| = sigma).
    Any violation raises ModelInvalidError.

    Statistical: for history-measurable g in {1, sign(S_k)} the average of
    g * X_{k+1} must sit within 4 standard errors of zero.
    """
    if n_paths < 1000:
        raise ValueError("validate_model requires n_paths >= 1000")
    g_names = ("constant", "sign_running_sum")
    sums = np.zeros(2)
    sq_sums = np.zeros(2)
    count = 0
    for path in range(n_paths):
        state = init_model(spec, _path_seed(seed, path))
        prev_y = 1.0
        s = 0.0
        for _ in range(path_len):
            out = step_model(state)
            if not out.sigma_sq > 0.0:
                raise ModelInvalidError(f"sigma_sq = {out.sigma_sq} <= 0")
            if out.y < 1.0:
                raise ModelInvalidError(f"Y = {out.y} < 1")
            if out.y < prev_y:
                raise ModelInvalidError(f"Y decreased: {prev_y} -> {out.y}")
            if out.sigma_sq > out.y * out.y:
                raise ModelInvalidError(
                    f"sigma_sq = {out.sigma_sq} exceeds Y^2 = {out.y * out.y}"
                )
            third = out.sigma_sq * math.sqrt(out.sigma_sq)
            if third > out.y * out.sigma_sq:
                raise ModelInvalidError(
                    f"E(|X|^3|F) = {third} exceeds Y*sigma^2 = "
                    f"{out.y * out.sigma_sq}"
                )
            g = (1.0, 1.0 if s >= 0 else -1.0)
            for k in range(2):
                gx = g[k] * out.x
                sums[k] += gx
                sq_sums[k] += gx * gx
            prev_y = out.y
            s += out.x
            count += 1
    checks = []
    ok_all = True
    for k, name in enumerate(g_names):
        mean = sums[k] / count
        var = sq_sums[k] / count - mean * mean
        stderr = math.sqrt(max(var, 0.0) / count)
        ok = abs(mean) <= 4.0 * stderr
        ok_all = ok_all and ok
        checks.append((name, mean, stderr, ok))
    return ValidationReport(
        kind=spec.kind,
        n_paths=n_paths,
        path_len=path_len,
        steps_checked=count,
        martingale_checks=tuple(checks),
        passed=ok_all,
    )


def derive_seed(seed, *key):
    """Counter-style child seed: a pure function of (seed, key)."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, np.uint64)[0])


_path_seed = derive_seed
