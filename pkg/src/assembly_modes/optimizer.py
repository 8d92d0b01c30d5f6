"""Stochastic maximization of the assembly-mode count over integer bar lengths.

Three searches share one objective wrapper: direct Gaussian sampling,
simulated annealing with a linear cooling schedule, and the cross-entropy
method. Ten lengths are free; the eleventh (on bar 5-7 by default) is fixed.

Randomness is counter based: every draw uses a generator seeded from
``(seed, stream, index)``, so a run is reproducible bit for bit and does not
depend on how a generation is spread over worker threads.
"""
from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .assembly import count_assembly_N
from .distance import V17_EDGE_ORDER, DistanceAssignment
from .graph import TopologyId
from .homotopy import TrackerConfig

METHODS = ("random", "sa", "ce")
FREE_DIM = 10
CSV_COLUMNS = ["method", "seed", "best_N", "evals_to_best", "wall_ms", "display"]

# stream tags for counter-based generators
_NEIGHBOUR, _ACCEPT, _SAMPLE = 1, 2, 3


@dataclass
class OptimizerConfig:
    """Search settings; defaults follow the published parameter blocks.

    ``budget`` caps the number of distinct objective evaluations. With
    ``memoize`` a candidate that was already scored is looked up and does not
    consume budget; ``max_draws`` bounds the total number of candidates drawn
    so a collapsed sampling law cannot loop forever.
    """

    method: str = "ce"
    budget: int = 600
    seed: int = 0
    target: int = 56
    # simulated annealing
    T0: float = 4.0
    max_step: int = 1000
    sa_sigma: tuple[float, ...] = (10.0,) * FREE_DIM
    start: tuple[int, ...] = (100,) * FREE_DIM
    # cross entropy
    samples: int = 20
    elite: int = 5
    alpha: float = 0.5
    ce_mu: tuple[float, ...] = (100.0,) * FREE_DIM
    ce_sigma: tuple[float, ...] = (100.0,) * FREE_DIM
    sigma_floor: float = 0.5
    sigma_centre: str = "elite"
    # direct sampling
    rs_center: float = 100.0
    rs_std: float = 100.0
    # fixed slot (l_10 on bar 5-7)
    fixed_value: int = 100
    memoize: bool = True
    max_draws: int | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.budget <= 0:
            raise ValueError("budget must be positive")
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must lie in (0, 1]")
        if not 0 < self.elite <= self.samples:
            raise ValueError("need 0 < elite <= samples")
        for name in ("sa_sigma", "ce_sigma"):
            vals = getattr(self, name)
            if len(vals) != FREE_DIM or min(vals) < 0:
                raise ValueError(f"{name} needs {FREE_DIM} non-negative entries")
        if self.rs_std < 0 or self.sigma_floor < 0:
            raise ValueError("deviations must be non-negative")
        if len(self.start) != FREE_DIM or len(self.ce_mu) != FREE_DIM:
            raise ValueError(f"start and ce_mu need {FREE_DIM} entries")
        if self.sigma_centre not in ("elite", "previous"):
            raise ValueError("sigma_centre must be 'elite' or 'previous'")
        if self.fixed_value < 1:
            raise ValueError("fixed length must be positive")

    @property
    def draw_limit(self) -> int:
        return self.max_draws if self.max_draws is not None else 50 * self.budget

    def as_dict(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self).items()}


@dataclass
class Evaluation:
    index: int
    candidate: tuple[int, ...]
    value: int


@dataclass
class OptimizerRun:
    """Trajectory of distinct evaluations plus the best point.

    ``evals_to_best`` is the 1-based index of the evaluation that first
    reached ``best_value``.
    """

    method: str
    seed: int
    trajectory: list[Evaluation]
    best_candidate: tuple[int, ...]
    best_value: int
    evals_to_best: int
    wall_ms: float
    draws: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def evaluations(self) -> int:
        return len(self.trajectory)

    def best_so_far(self) -> list[int]:
        out, best = [], -1
        for ev in self.trajectory:
            best = max(best, ev.value)
            out.append(best)
        return out

    def display(self) -> str:
        return f"{self.best_value} ({self.evals_to_best})"

    def csv_row(self) -> dict:
        return {
            "method": self.method,
            "seed": self.seed,
            "best_N": self.best_value,
            "evals_to_best": self.evals_to_best,
            "wall_ms": round(self.wall_ms, 1),
            "display": self.display(),
        }

    def to_dict(self) -> dict:
        return {
            **self.csv_row(),
            "best_candidate": list(self.best_candidate),
            "draws": self.draws,
            "trajectory": [[e.index, list(e.candidate), e.value] for e in self.trajectory],
            "extra": self.extra,
        }


class Objective:
    """Memoizing, budget-counting wrapper around a function of 10 integer lengths."""

    def __init__(self, fn: Callable[[tuple[int, ...]], int], budget: int, memoize: bool = True, workers: int = 1):
        self.fn = fn
        self.budget = budget
        self.memoize = memoize
        self.workers = max(1, workers)
        self.cache: dict[tuple[int, ...], int] = {}
        self.trajectory: list[Evaluation] = []

    @property
    def remaining(self) -> int:
        return self.budget - len(self.trajectory)

    def _record(self, cand: tuple[int, ...], value: int) -> None:
        self.trajectory.append(Evaluation(len(self.trajectory) + 1, cand, int(value)))
        if self.memoize:
            self.cache[cand] = int(value)

    def __call__(self, cand: Sequence[int]) -> int:
        return self.batch([cand])[0]

    def batch(self, cands: Sequence[Sequence[int]]) -> list[int | None]:
        """Evaluate in order; entries past the budget come back as None.

        New candidates are scored (possibly in parallel) and recorded in
        input order, so the trajectory does not depend on ``workers``.
        """
        keys = [tuple(int(v) for v in c) for c in cands]
        todo: list[int] = []  # positions that need a fresh evaluation
        first: dict[tuple[int, ...], int] = {}
        for pos, k in enumerate(keys):
            if self.memoize and (k in self.cache or k in first):
                continue
            if len(todo) >= self.remaining:
                break
            todo.append(pos)
            first.setdefault(k, pos)
        points = [keys[pos] for pos in todo]
        if self.workers > 1 and len(points) > 1:
            with ThreadPoolExecutor(self.workers) as pool:
                values = list(pool.map(self.fn, points))
        else:
            values = [self.fn(k) for k in points]
        fresh = dict(zip(todo, values))
        out: list[int | None] = []
        for pos, k in enumerate(keys):
            if pos in fresh:
                self._record(k, fresh[pos])
                out.append(int(fresh[pos]))
            elif self.memoize and k in self.cache:
                out.append(self.cache[k])
            else:
                out.append(None)
        return out


def assembly_objective(
    topology: TopologyId | str = TopologyId.V17,
    fixed_value: int = 100,
    cfg: TrackerConfig | None = None,
    seed: int = 0,
) -> Callable[[tuple[int, ...]], int]:
    """N as a function of the 10 free lengths l_0..l_9 (l_10 fixed)."""

    def fn(free: tuple[int, ...]) -> int:
        lengths = DistanceAssignment.from_vector(list(free) + [fixed_value], V17_EDGE_ORDER)
        return count_assembly_N(topology, lengths, cfg, seed)

    return fn


def _rng(seed: int, stream: int, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, stream, index])


def gaussian_neighbour(point: Sequence[float], sigma: Sequence[float], rng: np.random.Generator) -> tuple[int, ...]:
    """Normal draw around ``point``, rounded to integers and clamped to >= 1."""
    p = np.asarray(point, dtype=float)
    s = np.asarray(sigma, dtype=float)
    if p.shape != s.shape:
        raise ValueError("point and sigma dimensions differ")
    x = p + s * rng.standard_normal(p.shape)
    return tuple(int(v) for v in np.maximum(1, np.rint(x)))


def _finish(method: str, cfg: OptimizerConfig, obj: Objective, t0: float, draws: int, extra=None) -> OptimizerRun:
    traj = obj.trajectory
    if not traj:
        raise RuntimeError("no evaluation was made")
    best = max(traj, key=lambda e: (e.value, -e.index))
    return OptimizerRun(
        method=method,
        seed=cfg.seed,
        trajectory=list(traj),
        best_candidate=best.candidate,
        best_value=best.value,
        evals_to_best=best.index,
        wall_ms=(time.perf_counter() - t0) * 1000.0,
        draws=draws,
        extra=extra or {},
    )


def random_search(cfg: OptimizerConfig, objective: Callable, workers: int = 1) -> OptimizerRun:
    """Independent draws around a fixed centre until the budget is spent."""
    obj = objective if isinstance(objective, Objective) else Objective(objective, cfg.budget, cfg.memoize, workers)
    t0 = time.perf_counter()
    centre = [cfg.rs_center] * FREE_DIM
    sigma = [cfg.rs_std] * FREE_DIM
    draws = 0
    while obj.remaining > 0 and draws < cfg.draw_limit:
        n = min(obj.remaining, 20)
        cands = [gaussian_neighbour(centre, sigma, _rng(cfg.seed, _SAMPLE, draws + i)) for i in range(n)]
        draws += n
        values = obj.batch(cands)
        if any(v is not None and v >= cfg.target for v in values):
            break
    return _finish("random", cfg, obj, t0, draws)


def sa_accept(new: int, old: int, T: float, u: float) -> bool:
    """Improvements always pass; otherwise accept when u < exp((new - old) / T)."""
    if new > old:
        return True
    if T <= 0:
        return False
    return u < math.exp((new - old) / T)


def simulated_annealing(cfg: OptimizerConfig, objective: Callable, workers: int = 1) -> OptimizerRun:
    """Annealing from the start point with T = T0 (1 - n / max_step)."""
    obj = objective if isinstance(objective, Objective) else Objective(objective, cfg.budget, cfg.memoize, workers)
    t0 = time.perf_counter()
    point = tuple(int(v) for v in cfg.start)
    value = obj(point)
    T = cfg.T0
    accepted = 0
    draws = 1
    for n in range(1, cfg.max_step + 1):
        if value >= cfg.target or obj.remaining <= 0 or draws >= cfg.draw_limit:
            break
        cand = gaussian_neighbour(point, cfg.sa_sigma, _rng(cfg.seed, _NEIGHBOUR, n))
        draws += 1
        new = obj(cand)
        if new is None:
            break
        u = float(_rng(cfg.seed, _ACCEPT, n).random())
        if sa_accept(new, value, T, u):
            point, value = cand, new
            accepted += 1
        T = cfg.T0 * (1 - n / cfg.max_step)
    return _finish("sa", cfg, obj, t0, draws, {"accepted": accepted, "final_point": list(point), "final_T": T})


def ce_update(
    samples: Sequence[Sequence[float]],
    values: Sequence[float],
    mu: np.ndarray,
    sigma: np.ndarray,
    elite: int,
    alpha: float,
    floor: float = 0.0,
    centre: str = "elite",
) -> tuple[np.ndarray, np.ndarray, float]:
    """One smoothed cross-entropy update; returns (mu, sigma, gamma).

    Samples are ranked by value (ties keep draw order), the top ``elite``
    give the new mean and deviation, and both are blended with weight
    ``alpha``. ``gamma`` is the value of the last elite sample.

    ``centre`` picks the point the elite spread is measured from: the new
    elite mean (``"elite"``) or the mean the samples were drawn around
    (``"previous"``), which also rewards a mean that moved.
    """
    order = sorted(range(len(values)), key=lambda i: -values[i])[:elite]
    X = np.asarray([samples[i] for i in order], dtype=float)
    mu_new = X.mean(axis=0)
    ref = mu_new if centre == "elite" else np.asarray(mu, dtype=float)
    sigma_new = np.sqrt(((X - ref) ** 2).mean(axis=0))
    mu = alpha * mu_new + (1 - alpha) * mu
    sigma = np.maximum(alpha * sigma_new + (1 - alpha) * sigma, floor)
    return mu, sigma, float(values[order[-1]])


def cross_entropy(cfg: OptimizerConfig, objective: Callable, workers: int = 1) -> OptimizerRun:
    """Cross-entropy search with Gaussian sampling laws and smoothed updates."""
    obj = objective if isinstance(objective, Objective) else Objective(objective, cfg.budget, cfg.memoize, workers)
    t0 = time.perf_counter()
    mu = np.asarray(cfg.ce_mu, dtype=float)
    sigma = np.asarray(cfg.ce_sigma, dtype=float)
    best = 0
    draws = 0
    generations = []
    gen = 0
    while best < cfg.target and obj.remaining > 0 and draws < cfg.draw_limit:
        cands = [gaussian_neighbour(mu, sigma, _rng(cfg.seed, _SAMPLE, draws + i)) for i in range(cfg.samples)]
        draws += cfg.samples
        values = obj.batch(cands)
        scored = [(c, v) for c, v in zip(cands, values) if v is not None]
        if len(scored) < cfg.elite:
            break
        best = max(best, max(v for _, v in scored))
        mu, sigma, gamma = ce_update(
            [c for c, _ in scored], [v for _, v in scored], mu, sigma, cfg.elite, cfg.alpha, cfg.sigma_floor, cfg.sigma_centre
        )
        gen += 1
        generations.append({"generation": gen, "gamma": gamma, "max": best})
    return _finish("ce", cfg, obj, t0, draws, {"generations": generations, "final_mu": mu.tolist(), "final_sigma": sigma.tolist()})


RUNNERS = {"random": random_search, "sa": simulated_annealing, "ce": cross_entropy}


def run_optimizer(cfg: OptimizerConfig, objective: Callable | None = None, workers: int = 1) -> OptimizerRun:
    fn = objective or assembly_objective(fixed_value=cfg.fixed_value)
    return RUNNERS[cfg.method](cfg, fn, workers)


def runs_csv(runs: Sequence[OptimizerRun]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in runs:
        w.writerow(r.csv_row())
    return buf.getvalue()
