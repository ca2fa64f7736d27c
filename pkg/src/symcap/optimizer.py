"""Multi-start maximisation of the coherent information and threshold bisection.

Inputs are parameterised by the 4(n+1) real numbers x = (Re alpha, Im alpha).
Two maps from x to a valid input are available:

* ``"mixture"``: each row is normalised on its own, so psi0 and psi1 may
  overlap (the general rank-two mixture).
* ``"subspace"``: the rows are orthonormalised, so rho is the maximally mixed
  state on the span of psi0 and psi1. This removes the trivial optimum
  psi0 = psi1 (CI = 0) that attracts most random starts near a threshold.

Ascent uses L-BFGS (scipy) or a plain backtracking gradient ascent. Gradients
are analytic by default; central and five-point finite differences are there
for checking and for ``gradient="fd"`` runs.
"""

from __future__ import annotations

import csv
import io
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy.optimize import minimize

from .basis import SpanningBasis, choose_spanning_states
from .channel import FAMILY_ALIASES, PauliChannel, family_channel
from .coherent_info import (
    Precomputation,
    SymmetricInput,
    ci_and_gradient,
    evaluate_ci,
    precompute,
    product_state_dicke,
)
from .rep_core import binom

log = logging.getLogger(__name__)

EPS_POS = 1e-7
BISECTION_WIDTH = 1e-6
SEED_KINDS = ("repetition", "random", "dicke_sparse", "spaced_dicke")
CSV_COLUMNS = ("family", "n", "p_star", "ci_lo", "ci_hi", "seed", "restarts", "wall_time_s")


class BracketError(ValueError):
    """The threshold bracket does not straddle the positivity criterion."""


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 20
    max_iterations: int = 2000
    gradient: str = "analytic"  # or "fd"
    gradient_step: float = 1e-6
    method: str = "lbfgs"  # or "ascent"
    parameterization: str = "subspace"  # or "mixture"
    step_size: float = 0.05
    step_grow: float = 1.2
    step_shrink: float = 0.5
    tol: float = 1e-15
    seed: int = 0
    basis_seed: int = 0
    refine_restarts: int = 2
    threads: int | None = None

    def __post_init__(self):
        if self.restarts < 1 or self.refine_restarts < 1:
            raise ValueError("restarts must be at least 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.gradient_step <= 0 or self.tol <= 0 or self.step_size <= 0:
            raise ValueError("step sizes and tolerances must be positive")
        if not 0 < self.step_shrink < 1 or self.step_grow < 1:
            raise ValueError("need 0 < step_shrink < 1 <= step_grow")
        if self.gradient not in ("analytic", "fd"):
            raise ValueError(f"unknown gradient mode {self.gradient!r}")
        if self.method not in ("lbfgs", "ascent"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.parameterization not in ("subspace", "mixture"):
            raise ValueError(f"unknown parameterization {self.parameterization!r}")

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, data: dict) -> OptimizerConfig:
        return cls(**data)


# ---------------------------------------------------------------------------
# Parameterisation


def pack(alpha: np.ndarray) -> np.ndarray:
    alpha = np.asarray(alpha, dtype=complex)
    return np.concatenate([alpha.real.ravel(), alpha.imag.ravel()])


def unpack(x: np.ndarray, n: int) -> np.ndarray:
    m = n + 1
    return (x[: 2 * m] + 1j * x[2 * m :]).reshape(2, m)


def to_input(x: np.ndarray, n: int, parameterization: str) -> tuple[np.ndarray, np.ndarray]:
    """Map parameters to valid Dicke coefficients; also return the factor used by the gradient."""
    b = unpack(x, n)
    if parameterization == "mixture":
        norms = np.linalg.norm(b, axis=1, keepdims=True)
        return b / norms, norms
    q, r = np.linalg.qr(b.conj().T)
    # fix the phase of r's diagonal so the map is a function of b alone
    ph = np.diag(r) / np.abs(np.diag(r))
    q = q * ph
    r = ph.conj()[:, None] * r
    return q.conj().T, r


def _pullback(alpha: np.ndarray, factor: np.ndarray, g: np.ndarray, parameterization: str) -> np.ndarray:
    """Real gradient in x from the Wirtinger gradient g = dCI/d conj(alpha)."""
    G = 2.0 * g
    if parameterization == "mixture":
        G = (G - alpha * np.real(np.sum(alpha.conj() * G, axis=1, keepdims=True))) / factor
    else:
        # CI depends only on the span of the rows: project out the span, undo the triangular factor
        G = np.linalg.solve(factor, G - (G @ alpha.conj().T) @ alpha)
    return pack(G)


class Objective:
    """CI as a function of the real parameter vector, with call counting."""

    def __init__(self, pre: Precomputation, parameterization: str = "subspace"):
        self.pre = pre
        self.n = pre.n
        self.parameterization = parameterization
        self.calls = 0

    def value(self, x: np.ndarray) -> float:
        alpha, _ = to_input(x, self.n, self.parameterization)
        self.calls += 1
        return _value_only(alpha, self.pre)

    def value_and_grad(self, x: np.ndarray) -> tuple[float, np.ndarray]:
        alpha, factor = to_input(x, self.n, self.parameterization)
        self.calls += 1
        v, g = ci_and_gradient(alpha, self.pre)
        return v, _pullback(alpha, factor, g, self.parameterization)

    def value_and_fd_grad(self, x: np.ndarray, h: float) -> tuple[float, np.ndarray]:
        return self.value(x), central_difference_gradient(self.value, x, h)


def _value_only(alpha: np.ndarray, pre: Precomputation) -> float:
    return ci_and_gradient(alpha, pre)[0]


def central_difference_gradient(f, x: np.ndarray, h: float = 1e-6) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def five_point_gradient(f, x: np.ndarray, h: float = 1e-6) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (-f(x + 2 * e) + 8 * f(x + e) - 8 * f(x - e) + f(x - 2 * e)) / (12 * h)
    return g


# ---------------------------------------------------------------------------
# Restart seeds


def spaced_dicke_alpha(n: int, spacing: int, count: int, offset: int = 0, width: float = 0.7) -> np.ndarray:
    """Binomial envelope on Dicke weights offset + spacing*j, j = 0..count, alternating rows.

    Each peak is smeared into a Gaussian of the given width over neighbouring
    weights; width 0 gives exact Dicke components.
    """
    if spacing < 1 or count < 0 or offset < 0 or offset + spacing * count > n:
        raise ValueError(f"peaks offset={offset} spacing={spacing} count={count} do not fit in 0..{n}")
    ks = np.arange(n + 1)
    a = np.zeros((2, n + 1))
    for j in range(count + 1):
        c = offset + spacing * j
        prof = np.exp(-0.5 * ((ks - c) / width) ** 2) if width > 0 else (ks == c).astype(float)
        a[j % 2] += np.sqrt(binom(count, j)) * prof
    return a.astype(complex)


def spaced_dicke_input(n: int, spacing: int, count: int, offset: int = 0, width: float = 0.7) -> SymmetricInput:
    """:func:`spaced_dicke_alpha` with its two rows orthonormalised into a valid input."""
    alpha, _ = to_input(pack(spaced_dicke_alpha(n, spacing, count, offset, width)), n, "subspace")
    return SymmetricInput(n, alpha)


def seed_alpha(kind: str, n: int, rng: np.random.Generator) -> np.ndarray:
    """Initial Dicke coefficients for one restart (unnormalised)."""
    m = n + 1
    noise = rng.normal(size=(2, m)) + 1j * rng.normal(size=(2, m))
    if kind == "random":
        return noise
    if kind == "repetition":
        # |+>^n, |->^n under a random common rotation, slightly perturbed
        th, ph = rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi)
        u = np.array([np.cos(th / 2), np.exp(1j * ph) * np.sin(th / 2)])
        v = np.array([-np.exp(-1j * ph) * np.sin(th / 2), np.cos(th / 2)])
        s = 1 / np.sqrt(2)
        a = np.stack([product_state_dicke(n, s * (u + v)), product_state_dicke(n, s * (u - v))])
        return a + 1e-3 * noise
    if kind == "dicke_sparse":
        # binomial envelope on a random sub-lattice of Dicke weights, alternating between rows
        g = int(rng.integers(1, max(2, n // 3) + 1))
        a = np.zeros((2, m), dtype=complex)
        k = n // g
        for j in range(k + 1):
            a[j % 2, g * j] = np.sqrt(binom(k, j))
        return a + 1e-2 * noise
    if kind == "spaced_dicke":
        g = int(rng.integers(1, max(1, n // 4) + 1))
        off = int(rng.integers(0, g))
        a = spaced_dicke_alpha(n, g, (n - off) // g, off, float(rng.uniform(0.4, 1.0)))
        return a + 1e-3 * noise
    raise ValueError(f"unknown seed kind {kind!r}")


def restart_seeds(n: int, config: OptimizerConfig, count: int, warm_start: SymmetricInput | None = None):
    """(label, alpha) pairs, deterministic in (config.seed, restart index)."""
    out = []
    if warm_start is not None:
        if warm_start.n != n:
            raise ValueError(f"warm start has n={warm_start.n}, expected {n}")
        out.append(("warm", warm_start.alpha.copy()))
    i = 0
    while len(out) < count:
        rng = np.random.default_rng([config.seed, i])
        kind = SEED_KINDS[i % len(SEED_KINDS)]
        out.append((f"{kind}:{i}", seed_alpha(kind, n, rng)))
        i += 1
    return out


# ---------------------------------------------------------------------------
# Single run and multi-start driver


@dataclass
class RunResult:
    label: str
    index: int
    ci: float
    alpha: np.ndarray
    iterations: int
    converged: bool


def _ascent(obj: Objective, x: np.ndarray, config: OptimizerConfig, grad_fn):
    """Gradient ascent with a step that grows on success and backtracks on decrease."""
    v, g = grad_fn(x)
    step = config.step_size
    converged = False
    it = 0
    for it in range(1, config.max_iterations + 1):
        gn = np.linalg.norm(g)
        if gn == 0:
            converged = True
            break
        while True:
            trial = x + step * g / gn
            vt = obj.value(trial)
            if vt > v:
                break
            step *= config.step_shrink
            if step < 1e-14:
                return x, v, it, True
        gain = vt - v
        x = trial
        v, g = grad_fn(x)
        step *= config.step_grow
        if gain < config.tol:
            converged = True
            break
    return x, v, it, converged


def _run_one(pre: Precomputation, config: OptimizerConfig, label: str, index: int, alpha0: np.ndarray) -> RunResult:
    obj = Objective(pre, config.parameterization)
    if config.gradient == "analytic":
        grad_fn = obj.value_and_grad
    else:
        def grad_fn(x):
            return obj.value_and_fd_grad(x, config.gradient_step)

    x0 = pack(alpha0)
    if config.method == "lbfgs":
        res = minimize(
            lambda x: tuple(-t for t in grad_fn(x)),
            x0,
            jac=True,
            method="L-BFGS-B",
            options=dict(maxiter=config.max_iterations, maxcor=20, gtol=1e-16, ftol=config.tol),
        )
        x, iters = res.x, int(res.nit)
        converged = bool(res.success) or iters < config.max_iterations
    else:
        x, _, iters, converged = _ascent(obj, x0, config, grad_fn)
    alpha, _ = to_input(x, pre.n, config.parameterization)
    alpha = alpha / np.linalg.norm(alpha, axis=1, keepdims=True)
    ci = evaluate_ci(SymmetricInput(pre.n, alpha), pre)
    return RunResult(label, index, float(ci), alpha, iters, converged)


def _thread_count(config: OptimizerConfig) -> int:
    if config.threads is not None:
        return max(1, int(config.threads))
    env = os.environ.get("SYMCAP_THREADS")
    return max(1, int(env)) if env else 1


@dataclass
class MaximizeResult:
    input: SymmetricInput
    ci: float
    converged: bool
    best_label: str
    runs: list = field(default_factory=list)

    def __iter__(self):
        # unpacks as (input, ci)
        yield self.input
        yield self.ci


def maximize_ci(
    channel: PauliChannel,
    n: int,
    config: OptimizerConfig | None = None,
    warm_start: SymmetricInput | None = None,
    pre: Precomputation | None = None,
    restarts: int | None = None,
) -> MaximizeResult:
    """Best coherent information over restarts; deterministic given ``config.seed``.

    A warm start, when given, is the first restart, so the result is never
    below the warm start's own (locally improved) value.
    """
    config = config or OptimizerConfig()
    if pre is None:
        pre = precompute(channel, n, choose_spanning_states(n, config.basis_seed), keep_q=False)
    count = restarts if restarts is not None else config.restarts
    seeds = restart_seeds(n, config, count, warm_start)
    jobs = [(label, i, a) for i, (label, a) in enumerate(seeds)]
    threads = _thread_count(config)
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            runs = list(ex.map(lambda j: _run_one(pre, config, *j), jobs))
    else:
        runs = [_run_one(pre, config, *j) for j in jobs]
    # merge by CI, ties broken by restart index
    runs.sort(key=lambda r: (-r.ci, r.index))
    best = runs[0]
    log.debug("maximize_ci n=%d best %.6e from %s", n, best.ci, best.label)
    return MaximizeResult(SymmetricInput(n, best.alpha), best.ci, best.converged, best.label, runs)


# ---------------------------------------------------------------------------
# Threshold search


@dataclass
class ThresholdRecord:
    family: str
    n: int
    p_star: float
    ci_at_bracket: tuple
    best_input: SymmetricInput
    seed: int
    restarts: int
    wall_time: float
    p_hi: float = float("nan")
    evaluations: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "n": self.n,
            "p_star": self.p_star,
            "p_hi": self.p_hi,
            "ci_at_bracket": list(self.ci_at_bracket),
            "best_input": self.best_input.to_json(),
            "seed": self.seed,
            "restarts": self.restarts,
            "wall_time_s": self.wall_time,
            "evaluations": [list(e) for e in self.evaluations],
        }

    @classmethod
    def from_json(cls, data: dict) -> ThresholdRecord:
        return cls(
            data["family"],
            int(data["n"]),
            float(data["p_star"]),
            tuple(data["ci_at_bracket"]),
            SymmetricInput.from_json(data["best_input"]),
            int(data["seed"]),
            int(data["restarts"]),
            float(data["wall_time_s"]),
            float(data.get("p_hi", "nan")),
            [tuple(e) for e in data.get("evaluations", [])],
        )

    def csv_row(self) -> dict:
        return {
            "family": self.family,
            "n": self.n,
            "p_star": repr(self.p_star),
            "ci_lo": repr(self.ci_at_bracket[0]),
            "ci_hi": repr(self.ci_at_bracket[1]),
            "seed": self.seed,
            "restarts": self.restarts,
            "wall_time_s": f"{self.wall_time:.3f}",
        }


def records_to_csv(records) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in records:
        w.writerow(r.csv_row())
    return buf.getvalue()


def threshold_search(
    family: str,
    n: int,
    config: OptimizerConfig | None = None,
    p_bracket: tuple[float, float] = (0.0, 1.0),
    warm_start: SymmetricInput | None = None,
    eps: float = EPS_POS,
    width: float = BISECTION_WIDTH,
    basis: SpanningBasis | None = None,
) -> ThresholdRecord:
    """Bisect on p for the largest noise level with optimised CI >= ``eps``.

    Endpoints get the full restart budget; interior points warm-start from
    the optimum at the current lower end and use ``config.refine_restarts``.
    The reported p_star is always a point where CI >= eps was certified, so
    optimiser failures can only make it conservative.
    """
    config = config or OptimizerConfig()
    kind = FAMILY_ALIASES.get(family)
    if kind is None:
        raise ValueError(f"unknown channel family {family!r}")
    lo, hi = map(float, p_bracket)
    if not lo < hi:
        raise BracketError(f"empty bracket [{lo}, {hi}]")
    t0 = time.perf_counter()
    if basis is None:
        basis = choose_spanning_states(n, config.basis_seed)
    evaluations = []

    def solve(p, start, count):
        pre = precompute(family_channel(kind, p), n, basis, keep_q=False)
        res = maximize_ci(pre.channel, n, config, warm_start=start, pre=pre, restarts=count)
        evaluations.append((p, res.ci))
        log.info("%s n=%d p=%.8f ci=%.6e", kind, n, p, res.ci)
        return res

    r_lo = solve(lo, warm_start, config.restarts)
    if r_lo.ci < eps:
        raise BracketError(f"CI at p_lo={lo} is {r_lo.ci:.3e} < {eps:g}")
    r_hi = solve(hi, r_lo.input, config.restarts)
    if r_hi.ci >= eps:
        raise BracketError(f"CI at p_hi={hi} is {r_hi.ci:.3e} >= {eps:g}")
    best, ci_lo, ci_hi = r_lo.input, r_lo.ci, r_hi.ci
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        r = solve(mid, best, config.refine_restarts)
        if r.ci >= eps:
            lo, ci_lo, best = mid, r.ci, r.input
        else:
            hi, ci_hi = mid, r.ci
    return ThresholdRecord(
        kind, n, lo, (ci_lo, ci_hi), best, config.seed, config.restarts, time.perf_counter() - t0, hi, evaluations
    )


def with_seed(config: OptimizerConfig, seed: int) -> OptimizerConfig:
    return replace(config, seed=seed)
