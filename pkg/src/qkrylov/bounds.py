"""Closed-form lower and upper bounds on the thresholded ground-energy error.

All quantities are evaluated from realized (or user-estimated) norms
``dH = ||H'-H||`` and ``dS = ||S'-S||`` together with spectral data of H.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import InfeasibleError, PreconditionError

GRID_SIZE = 200
REFINE_RTOL = 1e-6


@dataclass(frozen=True)
class BoundInputs:
    dH: float
    dS: float
    hNorm: float
    epsilon: float
    d: int
    gamma0sq: float
    Delta: float
    R: float = float("nan")
    D: int | None = None

    def __post_init__(self):
        if self.D is None:
            object.__setattr__(self, "D", 2 * self.d + 1)
        if self.D != 2 * self.d + 1:
            raise PreconditionError(f"D={self.D} must equal 2d+1={2 * self.d + 1}")
        for name in ("dH", "dS", "hNorm", "epsilon", "gamma0sq", "Delta"):
            if getattr(self, name) < 0:
                raise PreconditionError(f"{name} must be nonnegative")

    @property
    def chi(self) -> float:
        return self.dH + self.dS * self.hNorm

    @property
    def zeta(self) -> float:
        return 2 * self.D * (self.epsilon + self.dS)

    @property
    def gamma0primeSq(self) -> float:
        return self.gamma0sq - 2 * self.epsilon - 2 * self.dS

    @property
    def DeltaPrime(self) -> float:
        g = self.gamma0primeSq
        return self.Delta - self.chi / g if g > 0 else float("nan")


@dataclass(frozen=True)
class Assumptions:
    a_i: bool
    a_ii: bool
    a_iii: bool
    lower_ok: bool

    @property
    def upper_ok(self) -> bool:
        return self.a_i and self.a_ii and self.a_iii


@dataclass(frozen=True)
class OptimizedBound:
    value: float
    deltaStar: float
    deltaPrimeStar: float
    evaluations: int = 0


@dataclass(frozen=True)
class BoundReport:
    chi: float
    zeta: float
    gamma0primeSq: float
    DeltaPrime: float
    lower: float
    upperOptimal: float
    deltaStar: float
    deltaPrimeStar: float
    upperGapChoice: float
    assumptionsOk: Assumptions = field(default_factory=lambda: Assumptions(False, False, False, False))

    def to_dict(self) -> dict:
        out = asdict(self)
        flags = out.pop("assumptionsOk")
        out.update({f"ok_{k}": v for k, v in flags.items()})
        return out


def lower_bound(inputs: BoundInputs) -> tuple[float, bool]:
    """``-(dH + (1+sqrt2) dS ||H||) / epsilon`` and whether ``dS <= epsilon``."""
    if inputs.epsilon == 0:
        raise ZeroDivisionError("lower bound is undefined for epsilon = 0")
    value = -(inputs.dH + (1 + math.sqrt(2.0)) * inputs.dS * inputs.hNorm) / inputs.epsilon
    return value, inputs.dS <= inputs.epsilon


def _upper_terms(inputs: BoundInputs, delta, delta_p):
    g = inputs.gamma0primeSq
    h = inputs.hNorm
    delta = np.asarray(delta, dtype=float)
    delta_p = np.asarray(delta_p, dtype=float)
    indicator = np.where(delta_p > inputs.DeltaPrime, delta_p, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        decay = 8.0 * np.exp(-2 * inputs.d * np.log1p(np.pi * delta / (2 * h)))
        inner = inputs.chi / (delta_p - delta) + inputs.zeta + decay
    return indicator + inputs.chi / g + 6 * h / g * inner


def upper_bound(inputs: BoundInputs, delta: float, deltaPrime: float) -> tuple[float, Assumptions]:
    """Upper bound on the signed error at analysis parameters 0 < delta < deltaPrime.

    The value is only a valid bound when every returned assumption flag holds;
    with a nonpositive effective overlap the value is NaN.
    """
    if not 0 < delta < deltaPrime:
        raise PreconditionError(f"need 0 < delta < deltaPrime, got {delta}, {deltaPrime}")
    g = inputs.gamma0primeSq
    a_iii = g > 0
    a_ii = inputs.epsilon >= inputs.dS
    lower_ok = inputs.dS <= inputs.epsilon
    if not a_iii:
        return float("nan"), Assumptions(False, a_ii, False, lower_ok)
    a_i = inputs.chi / g < deltaPrime - delta
    return float(_upper_terms(inputs, delta, deltaPrime)), Assumptions(bool(a_i), a_ii, True, lower_ok)


def gap_choice_bound(inputs: BoundInputs) -> float:
    """Upper bound at delta = Delta'/2, delta' = Delta'."""
    g = inputs.gamma0primeSq
    if not g > 0:
        raise InfeasibleError("effective overlap |gamma0'|^2 is not positive")
    dp = inputs.DeltaPrime
    if not dp > 0:
        raise InfeasibleError(f"effective gap Delta'={dp:g} is not positive")
    if inputs.chi / g >= dp / 2:
        raise InfeasibleError("chi/|gamma0'|^2 >= Delta'/2: the gap choice violates assumption (i)")
    h = inputs.hNorm
    return float(
        inputs.chi / g
        + 6 * h / g * (2 * inputs.chi / dp + inputs.zeta + 8 * (1 + np.pi * dp / (4 * h)) ** (-2 * inputs.d))
    )


def upper_bound_floor(chi, zeta, gamma0primeSq, hNorm):
    """A value no larger than the optimized upper bound (drops nonnegative terms).

    Vectorized; used to skip the optimizer when an error is clearly inside the bound.
    """
    return chi / gamma0primeSq + 6 * hNorm * zeta / gamma0primeSq


def _fraction_grid(n: int) -> np.ndarray:
    half = n // 2
    small = np.geomspace(1e-6, 1.0, half, endpoint=False)
    f = np.unique(np.concatenate([small, 1.0 - small]))
    return f[(f > 0) & (f < 1)]


def optimize_upper_bound(inputs: BoundInputs) -> OptimizedBound:
    """Minimize the upper bound over 0 < delta < delta' < ||H|| subject to assumption (i).

    A fixed log-spaced grid (delta' log-spaced, delta as a log-spaced fraction
    of its admissible range from both ends) is followed by coordinate descent
    with bounded scalar minimization, alternating delta and delta'. The delta'
    step treats the branches delta' <= Delta' and delta' > Delta' separately so
    the indicator discontinuity is respected. The gap choice is always a
    candidate when feasible.
    """
    g = inputs.gamma0primeSq
    h = inputs.hNorm
    if not g > 0:
        raise InfeasibleError("effective overlap |gamma0'|^2 is not positive")
    margin = inputs.chi / g
    if margin >= h:
        raise InfeasibleError("chi/|gamma0'|^2 >= ||H||: no admissible (delta, delta')")
    dprime_gap = inputs.DeltaPrime
    top = h * (1 - 1e-12)
    lo = max(margin * (1 + 1e-9), h * 1e-8)
    dps = np.geomspace(lo, top, GRID_SIZE)
    if margin < dprime_gap < h:
        dps = np.unique(np.append(dps, dprime_gap))
    fr = _fraction_grid(GRID_SIZE)
    width = dps[:, None] - margin
    deltas = width * fr[None, :]
    vals = _upper_terms(inputs, deltas, np.broadcast_to(dps[:, None], deltas.shape))
    vals = np.where(deltas > 0, vals, np.inf)
    evaluations = vals.size
    i, j = np.unravel_index(np.argmin(vals), vals.shape)
    best = (float(vals[i, j]), float(deltas[i, j]), float(dps[i]))
    try:
        gap_val = gap_choice_bound(inputs)
        if gap_val < best[0]:
            best = (gap_val, dprime_gap / 2, dprime_gap)
    except InfeasibleError:
        pass

    def f(dl, dp):
        return float(_upper_terms(inputs, dl, dp))

    value, dl, dp = best
    for _ in range(100):
        prev = value
        # delta with delta' fixed: admissible (0, dp - margin)
        hi = dp - margin
        if hi > 0:
            r = minimize_scalar(lambda x: f(x, dp), bounds=(hi * 1e-12, hi * (1 - 1e-12)), method="bounded",
                                options={"xatol": hi * 1e-10})
            evaluations += r.nfev
            if r.fun < value:
                value, dl = float(r.fun), float(r.x)
        # delta' with delta fixed, per indicator branch
        a = dl + margin
        segments = []
        if dprime_gap > a:
            segments.append((a, min(dprime_gap, top)))
        segments.append((max(a, dprime_gap), top))
        for s0, s1 in segments:
            if s1 <= s0:
                continue
            r = minimize_scalar(lambda x: f(dl, x), bounds=(s0 + (s1 - s0) * 1e-12, s1), method="bounded",
                                options={"xatol": (s1 - s0) * 1e-10})
            evaluations += r.nfev
            cands = [(float(r.fun), float(r.x)), (f(dl, s1), s1)]
            for v, x in cands:
                if v < value and x - dl > margin:
                    value, dp = v, x
        if abs(prev - value) <= REFINE_RTOL * abs(value):
            break
    return OptimizedBound(value, dl, dp, evaluations)


def evaluate_bounds(inputs: BoundInputs, optimize: bool = True) -> BoundReport:
    """Full report: derived noise aggregates, both bounds and assumption flags."""
    g = inputs.gamma0primeSq
    lower, lower_ok = lower_bound(inputs) if inputs.epsilon > 0 else (float("-inf"), inputs.dS == 0)
    a_ii = inputs.epsilon >= inputs.dS
    try:
        gap = gap_choice_bound(inputs)
    except InfeasibleError:
        gap = float("nan")
    opt = OptimizedBound(float("nan"), float("nan"), float("nan"))
    a_i = False
    if optimize and g > 0:
        try:
            opt = optimize_upper_bound(inputs)
            a_i = inputs.chi / g < opt.deltaPrimeStar - opt.deltaStar
        except InfeasibleError:
            pass
    return BoundReport(
        chi=inputs.chi,
        zeta=inputs.zeta,
        gamma0primeSq=g,
        DeltaPrime=inputs.DeltaPrime,
        lower=lower,
        upperOptimal=opt.value,
        deltaStar=opt.deltaStar,
        deltaPrimeStar=opt.deltaPrimeStar,
        upperGapChoice=gap,
        assumptionsOk=Assumptions(bool(a_i), bool(a_ii), bool(g > 0), bool(lower_ok)),
    )


def asymptotic_form(eta: float, Delta: float, D: int, gamma0primeSq: float, beta: float) -> float:
    """Constant-free scaling indicator ((1/Delta + D) eta + (1+beta)^(-2d)) / |gamma0'|^2.

    Not a rigorous bound; only its dependence on the arguments is meaningful.
    """
    for name, v in (("Delta", Delta), ("D", D), ("gamma0primeSq", gamma0primeSq), ("beta", beta)):
        if not v > 0:
            raise PreconditionError(f"{name} must be positive")
    d = (D - 1) / 2
    return ((1 / Delta + D) * eta + (1 + beta) ** (-2 * d)) / gamma0primeSq
