"""Seeded simulation of Lévy paths and Poisson random-measure statistics.

Paths are generated in fixed-size blocks.  Block ``k`` draws from its own
Philox stream keyed by ``(seed, k)``, so the output does not depend on how
many worker threads process the blocks (``LEVY_QUANT_THREADS``, 0 = auto).
"""
from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidGrid, JumpBelowMinusOne, RegionTouchesOrigin, StripViolation, UnsupportedModel
from .levy_core import JumpLaw, NormalJumps
from .model_zoo import BS, NIG, VG, Kou, Merton, ModelParams
from .samplers import inverse_gaussian, standard_gamma

BLOCK_SIZE = 8192


def worker_count() -> int:
    raw = os.environ.get("LEVY_QUANT_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)


def block_rng(seed: int, block: int, stream: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=(stream, block))))


def _run_blocks(n_paths: int, seed: int, fn: Callable[[np.random.Generator, int], object], stream: int = 0):
    """Call fn(rng, n) per block and return the results in block order."""
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    sizes = [min(BLOCK_SIZE, n_paths - k * BLOCK_SIZE) for k in range(math.ceil(n_paths / BLOCK_SIZE))]
    tasks = [(k, s) for k, s in enumerate(sizes)]
    workers = min(worker_count(), len(tasks))
    if workers <= 1:
        return [fn(block_rng(seed, k, stream), s) for k, s in tasks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda ks: fn(block_rng(seed, ks[0], stream), ks[1]), tasks))


@dataclass(frozen=True)
class TimeGrid:
    times: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or t.size < 2:
            raise InvalidGrid("time grid needs t_0 = 0 and at least one further point")
        if t[0] != 0.0:
            raise InvalidGrid("time grid must start at 0", t0=float(t[0]))
        if not np.all(np.diff(t) > 0) or not np.all(np.isfinite(t)):
            raise InvalidGrid("time grid must be strictly increasing and finite")
        t.setflags(write=False)
        object.__setattr__(self, "times", t)

    @classmethod
    def uniform(cls, T: float, n: int) -> "TimeGrid":
        if not (T > 0 and n >= 1):
            raise InvalidGrid("uniform grid needs T > 0 and n >= 1", T=T, n=n)
        return cls(np.linspace(0.0, T, n + 1))

    @property
    def T(self) -> float:
        return float(self.times[-1])

    @property
    def dt(self) -> np.ndarray:
        return np.diff(self.times)

    @property
    def n(self) -> int:
        return self.times.size - 1


@dataclass(frozen=True)
class JumpRecord:
    """Flat record of simulated jumps: path index, jump time, jump size (sorted by path, then time)."""

    path: np.ndarray
    time: np.ndarray
    size: np.ndarray

    def for_path(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = np.searchsorted(self.path, [k, k + 1])
        return self.time[lo:hi], self.size[lo:hi]


@dataclass(frozen=True)
class PathBundle:
    grid: TimeGrid
    paths: np.ndarray
    seed: int
    model: dict
    c: float = 0.0
    jumps: JumpRecord | None = field(default=None, repr=False)

    @property
    def n_paths(self) -> int:
        return self.paths.shape[0]

    @property
    def terminal(self) -> np.ndarray:
        return self.paths[:, -1]

    def to_csv(self, fh=None) -> str | None:
        """Write ``t,path_0,...`` with one row per grid time; returns the text if ``fh`` is None."""
        out = io.StringIO() if fh is None else fh
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["t"] + [f"path_{k}" for k in range(self.n_paths)])
        for i, t in enumerate(self.grid.times):
            w.writerow([repr(float(t))] + [repr(float(v)) for v in self.paths[:, i]])
        return out.getvalue() if fh is None else None

    def stochastic_exponential(self, k: int, require_positive: bool = False) -> np.ndarray:
        if self.jumps is None:
            raise ValueError("bundle was simulated without jump records")
        times, sizes = self.jumps.for_path(k)
        return stochastic_exponential(self.grid, self.paths[k], self.c, times, sizes, require_positive)


# ---------------------------------------------------------------------------
# Jump-diffusion
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class JumpDiffusionSpec:
    """Generic finite-activity model: L_t = b t + sigma W_t + sum of N_t i.i.d. jumps with law ``law``."""

    b: float
    sigma: float
    lam: float
    law: JumpLaw = NormalJumps(0.0, 1.0)

    def __post_init__(self):
        if not (self.sigma >= 0 and self.lam >= 0):
            raise ValueError("sigma and lam must be >= 0")

    def to_dict(self) -> dict:
        return {"family": "jump_diffusion", "b": self.b, "sigma": self.sigma, "lam": self.lam,
                "law": repr(self.law)}


def _as_jump_spec(params) -> JumpDiffusionSpec:
    if isinstance(params, JumpDiffusionSpec):
        return params
    if isinstance(params, BS):
        return JumpDiffusionSpec(params.mu, params.sigma, 0.0)
    if isinstance(params, Merton):
        return JumpDiffusionSpec(params.mu, params.sigma, params.lam, NormalJumps(params.mu_j, params.sigma_j))
    if isinstance(params, Kou):
        return JumpDiffusionSpec(params.mu, params.sigma, params.lam, params.jump_law)
    raise UnsupportedModel(f"not a finite-activity jump-diffusion: {type(params).__name__}")


def _descriptor(params) -> dict:
    return params.to_dict() if hasattr(params, "to_dict") else {"model": repr(params)}


def simulate_jump_diffusion(params, grid: TimeGrid, n_paths: int, seed: int,
                            keep_jumps: bool = False) -> PathBundle:
    """Gaussian increments with variance sigma^2 dt plus a Poisson(lam T) number of
    uniformly placed jumps; L_{t_i} = b t_i + sum_j G_j + sum_k 1{tau_k < t_i} J_k."""
    spec = _as_jump_spec(params)
    times = grid.times
    T = grid.T
    sd = spec.sigma * np.sqrt(grid.dt)

    def block(rng, n):
        incr = rng.standard_normal((n, grid.n)) * sd
        path = np.zeros((n, grid.n + 1))
        np.cumsum(incr, axis=1, out=path[:, 1:])
        path += spec.b * times
        counts = rng.poisson(spec.lam * T, n) if spec.lam > 0 else np.zeros(n, dtype=np.int64)
        total = int(counts.sum())
        owner = np.repeat(np.arange(n), counts)
        tau = rng.random(total) * T
        size = spec.law.sample(rng, total) if total else np.zeros(0)
        order = np.lexsort((tau, owner))
        owner, tau, size = owner[order], tau[order], size[order]
        if total:
            first = np.searchsorted(times, tau, side="right")  # first grid index with t_i > tau
            bump = np.zeros((n, grid.n + 2))
            np.add.at(bump, (owner, first), size)
            path += np.cumsum(bump[:, :-1], axis=1)
        return path, owner, tau, size

    parts = _run_blocks(n_paths, seed, block)
    paths = np.vstack([p[0] for p in parts])
    jumps = None
    if keep_jumps:
        offsets = np.cumsum([0] + [p[0].shape[0] for p in parts[:-1]])
        jumps = JumpRecord(np.concatenate([p[1] + o for p, o in zip(parts, offsets)]),
                           np.concatenate([p[2] for p in parts]), np.concatenate([p[3] for p in parts]))
    return PathBundle(grid, paths, seed, _descriptor(params), spec.sigma**2, jumps)


# ---------------------------------------------------------------------------
# Subordinated Brownian motions
# ---------------------------------------------------------------------------


def simulate_nig(params: NIG, grid: TimeGrid, n_paths: int, seed: int) -> PathBundle:
    """dL = mu dt + beta I + sqrt(I) G with I inverse Gaussian of mean delta dt/gamma and shape (delta dt)^2."""
    dt = grid.dt
    ig_mean = params.delta * dt / params.gamma
    ig_shape = (params.delta * dt) ** 2

    def block(rng, n):
        clock = inverse_gaussian(rng, ig_mean, ig_shape, (n, grid.n))
        g = rng.standard_normal((n, grid.n))
        incr = params.mu * dt + params.beta * clock + np.sqrt(clock) * g
        path = np.zeros((n, grid.n + 1))
        np.cumsum(incr, axis=1, out=path[:, 1:])
        return path

    return PathBundle(grid, np.vstack(_run_blocks(n_paths, seed, block)), seed, params.to_dict())


def simulate_vg(params: VG, grid: TimeGrid, n_paths: int, seed: int) -> PathBundle:
    """dL = mu dt + theta Gam + sigma sqrt(Gam) G with Gam = kappa * Gamma(dt/kappa)."""
    dt = grid.dt

    def block(rng, n):
        clock = params.kappa * standard_gamma(rng, dt / params.kappa, (n, grid.n))
        g = rng.standard_normal((n, grid.n))
        incr = params.mu * dt + params.theta * clock + params.sigma * np.sqrt(clock) * g
        path = np.zeros((n, grid.n + 1))
        np.cumsum(incr, axis=1, out=path[:, 1:])
        return path

    return PathBundle(grid, np.vstack(_run_blocks(n_paths, seed, block)), seed, params.to_dict())


def simulate_model(params: ModelParams, grid: TimeGrid, n_paths: int, seed: int) -> PathBundle:
    if isinstance(params, (BS, Merton, Kou, JumpDiffusionSpec)):
        return simulate_jump_diffusion(params, grid, n_paths, seed)
    if isinstance(params, NIG):
        return simulate_nig(params, grid, n_paths, seed)
    if isinstance(params, VG):
        return simulate_vg(params, grid, n_paths, seed)
    raise UnsupportedModel(f"no exact increment sampler for {getattr(params, 'family', type(params).__name__)}",
                           family=getattr(params, "family", None))


def simulate_poisson(lam: float, grid: TimeGrid, n_paths: int, seed: int, compensated: bool = False) -> PathBundle:
    if lam < 0:
        raise ValueError("lam must be >= 0")
    dt = grid.dt

    def block(rng, n):
        path = np.zeros((n, grid.n + 1))
        if lam > 0:
            np.cumsum(rng.poisson(lam * dt, (n, grid.n)), axis=1, out=path[:, 1:])
        if compensated:
            path -= lam * grid.times
        return path

    desc = {"family": "poisson", "lam": lam, "compensated": compensated}
    return PathBundle(grid, np.vstack(_run_blocks(n_paths, seed, block)), seed, desc)


# ---------------------------------------------------------------------------
# Poisson random measure integrals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IntegralStats:
    sample_mean: float
    sample_var: float
    analytic_mean: float
    analytic_var: float
    mean_stderr: float
    var_stderr: float
    n_paths: int

    @property
    def mean_z(self) -> float:
        return (self.sample_mean - self.analytic_mean) / self.mean_stderr if self.mean_stderr > 0 else 0.0

    @property
    def var_z(self) -> float:
        return (self.sample_var - self.analytic_var) / self.var_stderr if self.var_stderr > 0 else 0.0


def _in_region(x: np.ndarray, region: Sequence[tuple[float, float]]) -> np.ndarray:
    mask = np.zeros(x.shape, dtype=bool)
    for lo, hi in region:
        mask |= (x >= lo) & (x <= hi)
    return mask


def poisson_integral_stats(lam: float, law: JumpLaw, f: Callable, region: Sequence[tuple[float, float]],
                           t: float, n_paths: int, seed: int) -> IntegralStats:
    """Empirical and exact mean/variance of int_0^t int_A f(x) mu(ds, dx) for nu = lam * law.

    ``region`` is a union of closed intervals whose closure must avoid 0.
    """
    for lo, hi in region:
        if lo <= 0 <= hi:
            raise RegionTouchesOrigin("region must stay away from 0", interval=[lo, hi])
    vf = np.vectorize(f, otypes=[float])

    def block(rng, n):
        counts = rng.poisson(lam * t, n)
        owner = np.repeat(np.arange(n), counts)
        x = law.sample(rng, int(counts.sum()))
        vals = np.where(_in_region(x, region), vf(x) if x.size else x, 0.0)
        return np.bincount(owner, weights=vals, minlength=n)

    sample = np.concatenate(_run_blocks(n_paths, seed, block))
    m1 = sum(law.expect(f, lo, hi) for lo, hi in region)
    m2 = sum(law.expect(lambda x: f(x) ** 2, lo, hi) for lo, hi in region)
    mean = float(np.mean(sample))
    var = float(np.var(sample, ddof=1))
    m4 = float(np.mean((sample - mean) ** 4))
    return IntegralStats(mean, var, t * lam * m1, t * lam * m2, math.sqrt(var / n_paths),
                         math.sqrt(max(m4 - var * var, 0.0) / n_paths), n_paths)


# ---------------------------------------------------------------------------
# Stochastic exponential and exponential martingales
# ---------------------------------------------------------------------------


def stochastic_exponential(grid: TimeGrid, path: np.ndarray, c: float, jump_times=(), jump_sizes=(),
                           require_positive: bool = False) -> np.ndarray:
    """E(L)_t = exp(L_t - c t/2) prod_{s <= t} (1 + dL_s) e^{-dL_s} on the grid."""
    jump_times = np.asarray(jump_times, dtype=float)
    jump_sizes = np.asarray(jump_sizes, dtype=float)
    if require_positive and np.any(jump_sizes <= -1):
        bad = np.nonzero(jump_sizes <= -1)[0]
        first = bad[np.argmin(jump_times[bad])]
        raise JumpBelowMinusOne("jump of size <= -1 makes the stochastic exponential non-positive",
                                time=float(jump_times[first]), size=float(jump_sizes[first]))
    times = grid.times
    base = np.exp(np.asarray(path, dtype=float) - 0.5 * c * times)
    factor = np.ones(times.size)
    if jump_sizes.size:
        # jump at tau is reflected from the first grid point t_i > tau onwards
        first = np.searchsorted(times, jump_times, side="right")
        per_jump = (1.0 + jump_sizes) * np.exp(-jump_sizes)
        step = np.ones(times.size + 1)
        np.multiply.at(step, first, per_jump)
        factor = np.cumprod(step[:-1])
    return base * factor


@dataclass(frozen=True)
class MartingaleCheck:
    z: float
    sample_mean: float
    stderr: float
    n_paths: int


def exponential_martingale_check(params: ModelParams, u: float, t: float, n_paths: int, seed: int) -> MartingaleCheck:
    """z-score of the sample mean of exp(u L_t - t kappa(u)) against 1."""
    if not params.strip().contains(u):
        raise StripViolation("u outside the exponential-moment strip", u=u)
    if u == 0 or t == 0:
        return MartingaleCheck(0.0, 1.0, 0.0, n_paths)
    kappa = float(np.real(params.exponent(np.array(-1j * u))))
    bundle = simulate_model(params, TimeGrid(np.array([0.0, t])), n_paths, seed)
    m = np.exp(u * bundle.terminal - t * kappa)
    mean = float(np.mean(m))
    se = float(np.std(m, ddof=1) / math.sqrt(n_paths))
    return MartingaleCheck((mean - 1.0) / se if se > 0 else 0.0, mean, se, n_paths)
