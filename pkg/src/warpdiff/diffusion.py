"""Monte Carlo simulation of the radial drift diffusion.

The radial process solves  dr = sqrt(2) d_beta + b(r) dt  with drift
b(r) = (n-1) f'(r)/f(r) - phi'(r); the sqrt(2) matches a generator without
the 1/2 factor, so the quadratic variation is 2t.  Paths use tamed
Euler-Maruyama steps (drift increment b dt / (1 + dt |b|)) with step
control dt = min(dt_max, c/(1 + b^2)), a reflecting floor near the pole,
an explosion threshold, and an optional Brownian-bridge correction for
barrier crossings between step endpoints.

Determinism: paths are grouped in fixed batches of 2048; batch ``b`` of a
run draws from ``numpy.random.default_rng((seed, nonce, b))`` in blocks of
shape (batch, 1024), and path ``i`` of the batch consumes row ``i``.  The
trajectory of every path is therefore a pure function of (seed, task,
path index), and estimates are bit-identical for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DriftOverflow, InvalidStart, StepUnderflow
from .manifolds import WeightedModel
from .tails import PowerTail

try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dependency, but stay importable
    numba = None

BATCH = 2048
BLOCK = 1024
_ALIVE, _EVENT, _CENSORED, _OVERFLOW = 0, 1, 2, 3
_WILSON_Z = 1.959963984540054  # 95% two-sided

_WARP_CODES = {"euclidean": 0, "sphere": 1, "hyperbolic": 2}
_POTENTIAL_CODES = {"zero": 0, "power": 1, "log_power": 2}


def _advance_impl(r, t, status, z, u, horizon, dt_max, c_step, r_target,
                  r_explode, r_floor, use_bridge, tame, explode_is_event,
                  n1, wcode, pcode, pa, pb):
    n_paths, block = z.shape
    for i in range(n_paths):
        if status[i] != _ALIVE:
            continue
        ri = r[i]
        ti = t[i]
        st = _ALIVE
        for k in range(block):
            rem = horizon - ti
            if rem <= 1e-14 * horizon:
                st = _CENSORED
                break
            if wcode == 0:
                w = 1.0 / ri
            elif wcode == 1:
                w = math.cos(ri) / math.sin(ri)
            else:
                w = 1.0 / math.tanh(ri)
            if pcode == 0:
                dp = 0.0
            elif pcode == 1:
                dp = pa * pb * ri ** (pb - 1.0)
            else:
                rq = ri**pb
                dp = pa * pb * rq / (ri * (1.0 + rq))
            b = n1 * w - dp
            if not math.isfinite(b):
                st = _OVERFLOW
                break
            dt = dt_max
            policy = c_step / (1.0 + b * b)
            if policy < dt:
                dt = policy
            if dt > rem:
                dt = rem
            move = b * dt / (1.0 + dt * abs(b)) if tame else b * dt
            rn = ri + move + math.sqrt(2.0 * dt) * z[i, k]
            if r_target > 0.0:
                if rn <= r_target:
                    st = _EVENT
                    break
                if use_bridge:
                    prod = (ri - r_target) * (rn - r_target)
                    if prod < 30.0 * dt and u[i, k] < math.exp(-prod / dt):
                        st = _EVENT
                        break
            if rn >= r_explode:
                st = _EVENT if explode_is_event else _CENSORED
                break
            if rn < r_floor:
                rn = 2.0 * r_floor - rn
            ri = rn
            ti = ti + dt
        r[i] = ri
        t[i] = ti
        status[i] = st
    return 0


if numba is not None:
    _advance_jit = numba.njit(cache=True, nogil=True)(_advance_impl)
else:  # pragma: no cover
    _advance_jit = None


@dataclass(frozen=True)
class SimulationEstimate:
    """Monte Carlo probability estimate with a Wilson 95% interval."""

    p_hat: float
    ci_low: float
    ci_high: float
    n_paths: int
    n_events: int
    n_censored: int
    seed: int
    r_start: float
    scheme: dict = field(default_factory=dict, repr=False)

    def summary(self) -> str:
        return (
            f"p_hat={self.p_hat:.6g} ci=[{self.ci_low:.6g}, {self.ci_high:.6g}] "
            f"events={self.n_events}/{self.n_paths} censored={self.n_censored} "
            f"seed={self.seed}"
        )


def wilson_interval(events: int, n: int, z: float = _WILSON_Z) -> tuple[float, float]:
    p = events / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def _drift_codes(model: WeightedModel):
    wcode = _WARP_CODES.get(model.warp.kind)
    pcode = _POTENTIAL_CODES.get(model.potential.kind)
    if wcode is None or pcode is None or _advance_jit is None:
        return None
    pa, pb = (model.potential.params + (0.0, 0.0))[:2]
    return float(model.n - 1), wcode, pcode, float(pa), float(pb)


def _advance_python(model, r, t, status, z, u, horizon, dt_max, c_step,
                    r_target, r_explode, r_floor, use_bridge, tame, explode_is_event):
    """Pure-python stepping for custom warp/potential families."""
    n_paths, block = z.shape
    drift = model.drift
    for i in range(n_paths):
        if status[i] != _ALIVE:
            continue
        ri, ti, st = r[i], t[i], _ALIVE
        for k in range(block):
            rem = horizon - ti
            if rem <= 1e-14 * horizon:
                st = _CENSORED
                break
            b = float(drift(ri))
            if not math.isfinite(b):
                st = _OVERFLOW
                break
            dt = min(dt_max, c_step / (1.0 + b * b), rem)
            move = b * dt / (1.0 + dt * abs(b)) if tame else b * dt
            rn = ri + move + math.sqrt(2.0 * dt) * z[i, k]
            if r_target > 0.0:
                if rn <= r_target:
                    st = _EVENT
                    break
                if use_bridge:
                    prod = (ri - r_target) * (rn - r_target)
                    if prod < 30.0 * dt and u[i, k] < math.exp(-prod / dt):
                        st = _EVENT
                        break
            if rn >= r_explode:
                st = _EVENT if explode_is_event else _CENSORED
                break
            if rn < r_floor:
                rn = 2.0 * r_floor - rn
            ri, ti = rn, ti + dt
        r[i], t[i], status[i] = ri, ti, st
    return 0


def _run_batch(model, codes, batch_index, size, seed, nonce, r_start, horizon,
               dt_max, c_step, r_target, r_explode, r_floor, use_bridge, tame,
               explode_is_event, max_blocks):
    rng = np.random.default_rng((seed, nonce, batch_index))
    r = np.full(size, float(r_start))
    t = np.zeros(size)
    status = np.zeros(size, dtype=np.int64)
    for _ in range(max_blocks):
        if not np.any(status == _ALIVE):
            break
        z = rng.standard_normal((size, BLOCK))
        u = rng.random((size, BLOCK))
        if codes is not None:
            n1, wcode, pcode, pa, pb = codes
            _advance_jit(r, t, status, z, u, horizon, dt_max, c_step, r_target,
                         r_explode, r_floor, use_bridge, tame, explode_is_event,
                         n1, wcode, pcode, pa, pb)
        else:
            _advance_python(model, r, t, status, z, u, horizon, dt_max, c_step,
                            r_target, r_explode, r_floor, use_bridge, tame,
                            explode_is_event)
    else:
        raise StepUnderflow(
            "path clock stalled: step policy produced too many iterations "
            f"(over {max_blocks * BLOCK} per path)"
        )
    return status


def _simulate(model, *, nonce, r_start, horizon, n_paths, seed, dt_max, c_step,
              r_target, r_explode, r_floor, use_bridge, tame, explode_is_event,
              n_workers) -> tuple[int, int]:
    if not horizon > 0:
        raise InvalidStart("horizon must be positive")
    if n_paths < 1:
        raise InvalidStart("need at least one path")
    codes = _drift_codes(model)
    max_blocks = max(64, int(8.0 * horizon / dt_max / BLOCK) + 64)
    sizes = [(b, min(BATCH, n_paths - b * BATCH)) for b in range((n_paths + BATCH - 1) // BATCH)]

    def work(item):
        b, size = item
        return _run_batch(model, codes, b, size, seed, nonce, r_start, horizon,
                          dt_max, c_step, r_target, r_explode, r_floor, use_bridge,
                          tame, explode_is_event, max_blocks)

    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            statuses = list(pool.map(work, sizes))
    else:
        statuses = [work(item) for item in sizes]
    status = np.concatenate(statuses)
    if np.any(status == _OVERFLOW):
        raise DriftOverflow("drift evaluated to a non-finite value along a path")
    return int(np.sum(status == _EVENT)), int(np.sum(status == _CENSORED))


def _estimate(events, censored, n_paths, seed, r_start, scheme) -> SimulationEstimate:
    lo, hi = wilson_interval(events, n_paths)
    return SimulationEstimate(
        p_hat=events / n_paths, ci_low=lo, ci_high=hi,
        n_paths=n_paths, n_events=events, n_censored=censored,
        seed=seed, r_start=r_start, scheme=scheme,
    )


def simulate_explosion(
    model: WeightedModel,
    r_start: float,
    horizon: float,
    n_paths: int,
    seed: int,
    *,
    dt_max: float = 0.01,
    c_step: float | None = None,
    r_explode: float | None = None,
    r_floor: float | None = None,
    n_workers: int = 1,
) -> SimulationEstimate:
    """Estimate the probability that a path exceeds ``r_explode`` before the horizon.

    ``c_step`` defaults to +inf here (constant dt), because the tamed step
    already controls superlinear drift and a drift-dependent dt would stall
    the clock exactly on the exploding paths the threshold must detect.
    """
    if not 0 < r_start < model.radius:
        raise InvalidStart(f"r_start must lie in (0, {model.radius:g})")
    r_explode = 1e6 * r_start if r_explode is None else float(r_explode)
    r_floor = 1e-3 * min(1.0, r_start) if r_floor is None else float(r_floor)
    c_step = math.inf if c_step is None else float(c_step)
    if not r_floor < r_start < r_explode:
        raise InvalidStart("need r_floor < r_start < r_explode")
    events, censored = _simulate(
        model, nonce=1, r_start=r_start, horizon=horizon, n_paths=n_paths, seed=seed,
        dt_max=dt_max, c_step=c_step, r_target=-1.0, r_explode=r_explode,
        r_floor=r_floor, use_bridge=False, tame=True, explode_is_event=True,
        n_workers=n_workers,
    )
    scheme = {"task": "explosion", "horizon": horizon, "dt_max": dt_max, "c_step": c_step,
              "r_explode": r_explode, "r_floor": r_floor, "bridge": False, "tamed": True}
    return _estimate(events, censored, n_paths, seed, r_start, scheme)


def estimate_hitting_probability(
    model: WeightedModel,
    r_start: float,
    r_target: float,
    horizon: float,
    n_paths: int,
    seed: int,
    *,
    dt_max: float = 0.01,
    c_step: float | None = None,
    r_floor: float | None = None,
    r_escape: float | None = None,
    bridge: bool = True,
    n_workers: int = 1,
) -> SimulationEstimate:
    """Estimate P(path reaches the ball of radius ``r_target`` before the horizon).

    The drift increment is untamed here: with the bounded drifts of a
    hitting run, taming only biases the drift by O(dt |b|), and hitting
    probabilities amplify any drift error through the scale function.
    Paths that leave ``r_escape`` before the horizon are censored.
    """
    if not 0 < r_target < r_start < model.radius:
        raise InvalidStart("need 0 < r_target < r_start < R")
    r_floor = 1e-3 * min(1.0, r_start) if r_floor is None else float(r_floor)
    if not r_floor < r_target:
        raise InvalidStart("need r_floor < r_target")
    c_step = dt_max if c_step is None else float(c_step)
    r_escape = 1e6 * r_start if r_escape is None else float(r_escape)
    events, censored = _simulate(
        model, nonce=2, r_start=r_start, horizon=horizon, n_paths=n_paths, seed=seed,
        dt_max=dt_max, c_step=c_step, r_target=r_target, r_explode=r_escape,
        r_floor=r_floor, use_bridge=bridge, tame=False, explode_is_event=False,
        n_workers=n_workers,
    )
    scheme = {"task": "hitting", "horizon": horizon, "dt_max": dt_max, "c_step": c_step,
              "r_target": r_target, "r_floor": r_floor, "r_escape": r_escape,
              "bridge": bridge, "tamed": False}
    return _estimate(events, censored, n_paths, seed, r_start, scheme)


@dataclass(frozen=True)
class FellerScan:
    """Hitting-probability decay over increasing start radii."""

    starts: tuple
    estimates: tuple
    verdict: str  # feller_consistent | not_feller_consistent

    def summary(self) -> str:
        pieces = ", ".join(f"{s:g}:{e.p_hat:.4g}" for s, e in zip(self.starts, self.estimates))
        return f"{self.verdict} ({pieces})"


def feller_decay_scan(
    model: WeightedModel,
    r_target: float,
    horizon: float,
    starts,
    n_paths: int,
    seed: int,
    *,
    dt_max: float = 0.01,
    c_step: float | None = None,
    bridge: bool = True,
    n_workers: int = 1,
    decay_ceiling: float = 0.01,
) -> FellerScan:
    """Scan P_x(hit before t) over increasing starts.

    Consistent with hitting probabilities vanishing at spatial infinity when
    the estimates are non-increasing within confidence overlap and the final
    upper confidence bound is at most ``decay_ceiling``.
    """
    starts = tuple(float(s) for s in starts)
    if any(b <= a for a, b in zip(starts, starts[1:])) or starts[0] <= r_target:
        raise InvalidStart("starts must be strictly increasing and above r_target")
    estimates = []
    for k, r_start in enumerate(starts):
        est = estimate_hitting_probability(
            model, r_start, r_target, horizon, n_paths, seed + 1000 * k,
            dt_max=dt_max, c_step=c_step, bridge=bridge, n_workers=n_workers,
        )
        estimates.append(est)
    monotone = all(
        nxt.p_hat <= prev.ci_high + 1e-12
        for prev, nxt in zip(estimates, estimates[1:])
    )
    ok = monotone and estimates[-1].ci_high <= decay_ceiling
    return FellerScan(starts=starts, estimates=tuple(estimates),
                      verdict="feller_consistent" if ok else "not_feller_consistent")


@dataclass(frozen=True)
class BoundaryClassification:
    """Feller test of the two boundaries of the radial diffusion on (0, R)."""

    infinity: str  # accessible | inaccessible | inconclusive
    zero: str
    evidence: dict = field(default_factory=dict)

    def summary(self) -> str:
        return f"+inf {self.infinity}, 0 {self.zero}"


def classify_boundaries(model: WeightedModel, r_mid: float = 1.0) -> BoundaryClassification:
    """Independent oracle for explosion: Feller's integral test.

    The scale density is exp(-int b) = exp(phi)/f^{n-1} = 1/J(r) and the
    speed density J(r)/2, so accessibility of +inf is decided by
    convergence of int 1/J(x) * (int_c^x J/2) dx; the pole's exponents are
    fixed by the validated conditions f ~ r and phi(0) finite, making 0
    inaccessible for every n >= 2.
    """
    from .criteria import _density_tail, classify_divergence

    density_tail = _density_tail(model)
    cumulative = model._cumulative("vol")

    def v_integrand(x):
        return 0.5 * cumulative(float(x)) / float(model.density(x))

    tail = None
    if density_tail is not None:
        m_tail = density_tail.antiderivative().mul(PowerTail(coeff=0.5))
        tail = density_tail.reciprocal().mul(m_tail)
    verdict = classify_divergence(v_integrand, r0=r_mid, tail=tail)
    infinity = {"diverges": "inaccessible", "converges": "accessible"}.get(
        verdict.verdict, "inconclusive"
    )
    # near the pole: scale ~ r^{1-n} (non-integrable for n >= 2), speed integrable
    zero = "inaccessible" if model.n >= 2 else "accessible"
    return BoundaryClassification(
        infinity=infinity, zero=zero,
        evidence={"infinity_test": verdict.evidence, "pole_scale_exponent": 1 - model.n},
    )
