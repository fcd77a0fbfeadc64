"""Monte Carlo noise sweeps over (sigma, d) with per-trial bound audits."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from ..bounds import BoundInputs, evaluate_bounds, optimize_upper_bound, upper_bound_floor
from ..errors import InfeasibleError, PreconditionError
from ..noise import hermitian_from_normals, spectral_norm, trial_rng
from ..operators import (
    SpectralDecomposition,
    SpectralQuantities,
    StateVector,
    antiferromagnetic_state,
    build_heisenberg,
    sector_restrict,
    spectral_decompose,
    spectral_quantities,
)
from ..pencil import KrylovPencil, build_exact_pencil, default_dt
from ..solver import solve_batch
from .config import SweepConfig

log = logging.getLogger(__name__)

CHUNK = 200
# absolute slack (in units of ||H||) before a bound comparison counts as violated
AUDIT_TOL = 1e-10


@dataclass(frozen=True)
class Model:
    spec: SpectralDecomposition
    state: StateVector
    quantities: SpectralQuantities
    dt: float


@dataclass
class SweepRow:
    sigma: float
    d: int
    D: int
    epsilon: float
    trials: int
    medianEnergy: float
    medianAbsError: float
    medianSignedError: float
    posErrMedian: float
    negErrMedian: float
    medianKeptDim: float
    dHMedian: float
    dSMedian: float
    chiMedian: float
    lowerBound: float
    upperBoundOpt: float
    upperGapChoice: float
    boundAssumptionsOk: bool
    failedTrials: int
    lowerChecked: int
    lowerViolations: int
    upperChecked: int
    upperViolations: int
    errors: np.ndarray = field(default=None, repr=False, compare=False)
    lowers: np.ndarray = field(default=None, repr=False, compare=False)
    chis: np.ndarray = field(default=None, repr=False, compare=False)


CSV_COLUMNS = [f.name for f in fields(SweepRow) if f.name not in ("errors", "lowers", "chis")]


def prepare_model(config: SweepConfig) -> Model:
    lattice = config.lattice
    H = build_heisenberg(lattice, config.j, config.h)
    psi = antiferromagnetic_state(lattice, config.up_is_even_sublattice)
    label = "full"
    if config.sector:
        H, psi = sector_restrict(H, psi)
        label = "sector"
    spec = spectral_decompose(H)
    q = spectral_quantities(spec, psi, operator=label)
    dt = default_dt(q) if config.dt == "auto" else float(config.dt)
    return Model(spec, psi, q, dt)


def _median(a) -> float:
    a = np.asarray(a, dtype=float)
    return float(np.median(np.sort(a))) if a.size else float("nan")


def run_cell(
    pencil: KrylovPencil,
    q: SpectralQuantities,
    sigma: float,
    sigma_index: int,
    trials: int,
    master_seed: int,
    epsilon: float,
) -> SweepRow:
    """All trials for one (sigma, d): noise, threshold, solve, bound audit."""
    D, d = pencil.D, pencil.d
    h = q.opNorm
    errs = np.empty(trials)
    kept = np.empty(trials, dtype=int)
    dH = np.empty(trials)
    dS = np.empty(trials)
    for start in range(0, trials, CHUNK):
        idx = range(start, min(start + CHUNK, trials))
        zs = np.empty((len(idx), 2, D, D))
        zh = np.empty((len(idx), 2, D, D))
        for k, t in enumerate(idx):
            rng = trial_rng(master_seed, sigma_index, d, t)
            zs[k] = rng.standard_normal((2, D, D))
            zh[k] = rng.standard_normal((2, D, D))
        ns = sigma * hermitian_from_normals(zs)
        nh = (h * sigma) * hermitian_from_normals(zh)
        sl = slice(start, start + len(idx))
        dS[sl] = spectral_norm(ns)
        dH[sl] = spectral_norm(nh)
        e0t, kk = solve_batch(pencil.Hmat + nh, pencil.Smat + ns, epsilon)
        errs[sl] = e0t - q.E0
        kept[sl] = kk
    ok = kept > 0
    failed = int((~ok).sum())
    if failed:
        log.info("sigma=%g d=%d: %d/%d trials removed every direction", sigma, d, failed, trials)

    chi = dH + dS * h
    lowers = -(dH + (1 + math.sqrt(2.0)) * dS * h) / epsilon
    tol = AUDIT_TOL * h
    lower_ok = ok & (dS <= epsilon)
    lower_viol = int((lower_ok & (errs < lowers - tol)).sum())

    g = q.gamma0sq - 2 * epsilon - 2 * dS
    zeta = 2 * D * (epsilon + dS)
    with np.errstate(divide="ignore", invalid="ignore"):
        upper_ok = ok & (epsilon >= dS) & (g > 0) & (chi / g < h)
        floor = upper_bound_floor(chi, zeta, g, h)
    upper_viol = 0
    for t in np.flatnonzero(upper_ok & (errs > floor + tol)):
        inp = BoundInputs(dH[t], dS[t], h, epsilon, d, q.gamma0sq, q.Delta, q.R)
        try:
            opt = optimize_upper_bound(inp)
        except InfeasibleError:
            continue
        if errs[t] > opt.value + tol:
            upper_viol += 1
            log.warning("upper bound violated: sigma=%g d=%d trial=%d err=%g bound=%g", sigma, d, t, errs[t], opt.value)

    e = errs[ok]
    med_in = BoundInputs(_median(dH[ok]), _median(dS[ok]), h, epsilon, d, q.gamma0sq, q.Delta, q.R)
    rep = evaluate_bounds(med_in)
    return SweepRow(
        sigma=sigma,
        d=d,
        D=D,
        epsilon=epsilon,
        trials=trials,
        medianEnergy=_median(e + q.E0),
        medianAbsError=_median(np.abs(e)),
        medianSignedError=_median(e),
        posErrMedian=_median(e[e > 0]),
        negErrMedian=_median(e[e < 0]),
        medianKeptDim=_median(kept[ok]),
        dHMedian=med_in.dH,
        dSMedian=med_in.dS,
        chiMedian=_median(chi[ok]),
        lowerBound=_median(lowers[ok]),
        upperBoundOpt=rep.upperOptimal,
        upperGapChoice=rep.upperGapChoice,
        boundAssumptionsOk=rep.assumptionsOk.upper_ok,
        failedTrials=failed,
        lowerChecked=int(lower_ok.sum()),
        lowerViolations=lower_viol,
        upperChecked=int(upper_ok.sum()),
        upperViolations=upper_viol,
        errors=e,
        lowers=lowers[ok],
        chis=chi[ok],
    )


def _cell_job(args):
    eigenvalues, gamma, dt, q, sigma, si, d, trials, seed, eps = args
    spec = SpectralDecomposition(eigenvalues, np.eye(len(eigenvalues)))
    pencil = build_exact_pencil(spec, StateVector(gamma), d, dt)
    return run_cell(pencil, q, sigma, si, trials, seed, eps)


def run_sweep(config: SweepConfig, model: Model | None = None) -> list[SweepRow]:
    """Rows ordered by sigma (config order), then d ascending. Deterministic in config."""
    model = model or prepare_model(config)
    gamma = model.spec.overlaps(model.state)
    jobs = [
        (model.spec.eigenvalues, gamma, model.dt, model.quantities, sigma, si, d, config.trials,
         config.master_seed, config.epsilon_rule.epsilon(2 * d + 1, sigma))
        for si, sigma in enumerate(config.sigmas)
        for d in config.ds
    ]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as ex:
            return list(ex.map(_cell_job, jobs))
    return [_cell_job(j) for j in jobs]


@dataclass
class ConvergedStats:
    sigma: float
    posMedian: float
    negMedian: float
    absMedian: float
    nPos: int
    nNeg: int
    chiMedian: float
    lowerMagnitude: float
    upperBound: float
    upperGapChoice: float

    @property
    def has_pos(self) -> bool:
        return self.nPos > 0

    @property
    def has_neg(self) -> bool:
        return self.nNeg > 0


def pooled_sign_medians(errors) -> tuple[float | None, float | None]:
    """Median of the positive and of the negative errors; None for an empty subset."""
    e = np.asarray(errors, dtype=float)
    pos, neg = e[e > 0], e[e < 0]
    return (_median(pos) if pos.size else None, _median(neg) if neg.size else None)


def converged_errors(rows: list[SweepRow], window: tuple[int, int]) -> list[ConvergedStats]:
    """Per-sigma statistics pooled over every trial with d in ``window``."""
    lo, hi = window
    out = []
    for sigma in dict.fromkeys(r.sigma for r in rows):
        sel = [r for r in rows if r.sigma == sigma and lo <= r.d <= hi]
        if not sel:
            continue
        errs = np.concatenate([r.errors for r in sel])
        pos, neg = pooled_sign_medians(errs)
        out.append(ConvergedStats(
            sigma=sigma,
            posMedian=float("nan") if pos is None else pos,
            negMedian=float("nan") if neg is None else neg,
            absMedian=_median(np.abs(errs)),
            nPos=int((errs > 0).sum()),
            nNeg=int((errs < 0).sum()),
            chiMedian=_median(np.concatenate([r.chis for r in sel])),
            lowerMagnitude=_median(-np.concatenate([r.lowers for r in sel])),
            upperBound=_median([r.upperBoundOpt for r in sel]),
            upperGapChoice=_median([r.upperGapChoice for r in sel]),
        ))
    return out


def fit_monomial(points) -> tuple[float, float]:
    """Least-squares power law ``value = coefficient * sigma**exponent`` in log-log space."""
    pts = [(float(s), float(v)) for s, v in points]
    if len(pts) < 2:
        raise PreconditionError("need at least two points")
    if any(not (s > 0 and v > 0) for s, v in pts):
        raise PreconditionError("monomial fit needs positive sigma and value")
    x = np.log([s for s, _ in pts])
    y = np.log([v for _, v in pts])
    slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(np.exp(intercept))


def summarize(rows: list[SweepRow], window: tuple[int, int]) -> tuple[list[ConvergedStats], dict]:
    """Converged statistics plus monomial fits of the positive and |negative| medians."""
    stats = converged_errors(rows, window)
    fits = {}
    for key, attr, sign in (("positive", "posMedian", 1), ("negative_abs", "negMedian", -1)):
        pts = [(s.sigma, sign * getattr(s, attr)) for s in stats if sign * getattr(s, attr) > 0]
        if len(pts) >= 2:
            k, c = fit_monomial(pts)
            fits[key] = {"exponent": k, "coefficient": c, "points": len(pts)}
    return stats, fits
