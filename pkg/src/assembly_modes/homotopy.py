"""Total-degree homotopy continuation for square polynomial systems.

All paths are tracked together: the state is a (paths, n+1) array of
homogeneous coordinates on a random affine patch, and every predictor or
corrector step is a batched linear solve. Each path keeps its own t and step
size, so easy paths finish early while hard ones shrink their steps.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from itertools import product
from typing import Sequence

import numpy as np

from .polynomial import Polynomial


@dataclass
class TrackerConfig:
    """Path-tracking knobs. ``gamma=None`` draws a unit complex number from the seed."""

    gamma: complex | None = None
    initial_step: float = 0.05
    min_step: float = 1e-10
    max_step: float = 0.1
    corrector_tol: float = 1e-12
    max_corrector_iters: int = 3
    divergence_bound: float = 1e8
    refinement_tol: float = 1e-10
    dedup_radius: float = 1e-6
    real_tol: float = 1e-8
    endgame_gap: float = 1e-6
    stationary_tol: float = 1e-8
    drift_limit: float = 1e-2
    max_steps: int = 20000

    def __post_init__(self):
        if not 0 < self.min_step < self.initial_step <= 0.1:
            raise ValueError("need 0 < min_step < initial_step <= 0.1")
        if min(self.corrector_tol, self.refinement_tol, self.dedup_radius, self.real_tol,
               self.stationary_tol, self.drift_limit) <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_step < self.initial_step:
            raise ValueError("max_step must be at least initial_step")

    def as_dict(self) -> dict:
        out = asdict(self)
        if self.gamma is not None:
            out["gamma"] = [self.gamma.real, self.gamma.imag]
        return out


class CompiledSystem:
    """Vectorised evaluator for a square system, optionally homogenised.

    Each polynomial is a list of (exponent, complex coefficient) pairs.
    ``evaluate(Z)`` returns values (P, m) and the Jacobian (P, m, k) for a
    batch of points Z of shape (P, k).
    """

    def __init__(self, polys: Sequence[Sequence[tuple[tuple[int, ...], complex]]], nvars: int, homogenize: bool = False):
        self.m = len(polys)
        self.degrees = [max(sum(e) for e, _ in p) for p in polys]
        rows_e, rows_c, rows_i = [], [], []
        for i, p in enumerate(polys):
            d = self.degrees[i]
            for e, c in p:
                e = tuple(e)
                if homogenize:
                    e = (d - sum(e),) + e
                rows_e.append(e)
                rows_c.append(complex(c))
                rows_i.append(i)
        self.k = nvars + (1 if homogenize else 0)
        E = np.array(rows_e, dtype=np.int64).reshape(-1, self.k)
        self.maxdeg = int(E.max()) if E.size else 0
        self.E = E
        C = np.zeros((len(rows_c), self.m), dtype=complex)
        C[np.arange(len(rows_c)), rows_i] = rows_c
        self.C = C
        # derivative terms, one block of columns per variable
        de, dc = [], []
        for j in range(self.k):
            mask = E[:, j] > 0
            Ej = E[mask].copy()
            Ej[:, j] -= 1
            coeff = np.zeros((mask.sum(), self.m * self.k), dtype=complex)
            owners = np.array(rows_i)[mask]
            coeff[np.arange(mask.sum()), owners * self.k + j] = np.array(rows_c)[mask] * E[mask, j]
            de.append(Ej)
            dc.append(coeff)
        self.dE = np.concatenate(de) if de else np.zeros((0, self.k), dtype=np.int64)
        self.dC = np.concatenate(dc) if dc else np.zeros((0, self.m * self.k), dtype=complex)
        self._cols = np.arange(self.k)

    def _monomials(self, pw: np.ndarray, E: np.ndarray) -> np.ndarray:
        return pw[:, self._cols[None, :], E].prod(axis=-1)

    def evaluate(self, Z: np.ndarray, jacobian: bool = True):
        pw = Z[:, :, None] ** np.arange(self.maxdeg + 1)[None, None, :]
        vals = self._monomials(pw, self.E) @ self.C
        if not jacobian:
            return vals
        jac = (self._monomials(pw, self.dE) @ self.dC).reshape(-1, self.m, self.k)
        return vals, jac


def _terms(p: Polynomial, variables: Sequence[str]) -> list[tuple[tuple[int, ...], complex]]:
    q = p.reorder(variables)
    return [(e, complex(float(c))) for e, c in q.terms.items()]


@dataclass
class Solution:
    point: np.ndarray
    residual: float
    condition: float
    path: int
    multiplicity: int = 1

    def is_real(self, tol: float) -> bool:
        return bool(np.all(np.abs(self.point.imag) < tol))

    def is_real_positive(self, tol: float) -> bool:
        return self.is_real(tol) and bool(np.all(self.point.real > tol))

    def to_dict(self, tol: float = 1e-8) -> dict:
        return {
            "re": self.point.real.tolist(),
            "im": self.point.imag.tolist(),
            "residual": self.residual,
            "multiplicity": self.multiplicity,
            "real": self.is_real(tol),
            "real_positive": self.is_real_positive(tol),
        }


@dataclass
class SolutionSet:
    """Finite endpoints after refinement and deduplication, with path statistics."""

    variables: list[str]
    solutions: list[Solution]
    tracked: int
    diverged: int
    failed: int
    duplicates: int
    seed: int
    config: TrackerConfig
    borderline: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def finite(self) -> int:
        return len(self.solutions)

    def counts(self, tol: float | None = None) -> dict:
        return classify_solutions(self, self.config.real_tol if tol is None else tol)

    def to_dict(self) -> dict:
        tol = self.config.real_tol
        return {
            "variables": self.variables,
            "solutions": [s.to_dict(tol) for s in self.solutions],
            "paths": {
                "tracked": self.tracked,
                "diverged": self.diverged,
                "failed": self.failed,
                "duplicates": self.duplicates,
            },
            "counts": self.counts(),
            "seed": self.seed,
            "config": self.config.as_dict(),
        }


def classify_solutions(s: SolutionSet | Sequence, tol: float = 1e-8) -> dict:
    """Count real and real-positive points.

    Real means every imaginary part is below ``tol`` in magnitude; positive
    additionally needs every real part above ``tol``. Points within ten times
    the tolerance of either threshold are counted as borderline.
    """
    sols = s.solutions if isinstance(s, SolutionSet) else s
    pts = [x.point if isinstance(x, Solution) else np.asarray(x, dtype=complex) for x in sols]
    real = positive = borderline = 0
    for p in pts:
        im = np.abs(p.imag)
        is_real = bool(np.all(im < tol))
        if is_real:
            real += 1
            if np.all(p.real > tol):
                positive += 1
        if np.any((im >= tol) & (im < 10 * tol)) or (is_real and np.any(np.abs(p.real) < 10 * tol)):
            borderline += 1
    return {"real": real, "real_positive": positive, "borderline": borderline}


def _start_solutions(degrees: Sequence[int], roots_of: Sequence[complex]) -> np.ndarray:
    per_var = []
    for d, r in zip(degrees, roots_of):
        base = r ** (1.0 / d)
        per_var.append([base * np.exp(2j * np.pi * k / d) for k in range(d)])
    return np.array(list(product(*per_var)), dtype=complex)


def _solve(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Batched ``A x = b``; rows with a singular matrix come back as NaN."""
    try:
        return np.linalg.solve(A, b[..., None])[..., 0]
    except np.linalg.LinAlgError:
        out = np.full(b.shape, np.nan, dtype=complex)
        for i in range(A.shape[0]):
            try:
                out[i] = np.linalg.solve(A[i], b[i])
            except np.linalg.LinAlgError:
                pass
        return out


class _Homotopy:
    """H(Z, t) = (1 - t) * gamma * G(Z) + t * F(Z) on the patch a . Z = 1."""

    def __init__(self, target: CompiledSystem, start: CompiledSystem, gamma: complex, patch: np.ndarray):
        self.F = target
        self.G = start
        self.gamma = gamma
        self.patch = patch
        self.n = target.m

    def _full(self, Z, t):
        fv, fj = self.F.evaluate(Z)
        gv, gj = self.G.evaluate(Z)
        tt = t[:, None]
        hv = (1 - tt) * self.gamma * gv + tt * fv
        hj = (1 - tt)[:, :, None] * self.gamma * gj + tt[:, :, None] * fj
        P = Z.shape[0]
        jac = np.empty((P, self.n + 1, self.n + 1), dtype=complex)
        jac[:, : self.n, :] = hj
        jac[:, self.n, :] = self.patch
        val = np.empty((P, self.n + 1), dtype=complex)
        val[:, : self.n] = hv
        val[:, self.n] = Z @ self.patch - 1
        dt = np.zeros((P, self.n + 1), dtype=complex)
        dt[:, : self.n] = fv - self.gamma * gv
        return val, jac, dt

    def velocity(self, Z, t):
        _, jac, dt = self._full(Z, t)
        return -_solve(jac, dt)

    def newton(self, Z, t, iters: int):
        steps = []
        for _ in range(iters):
            val, jac, _ = self._full(Z, t)
            delta = _solve(jac, -val)
            Z = Z + delta
            steps.append(np.linalg.norm(delta, axis=1))
        return Z, steps


def _track(hom: _Homotopy, Z0: np.ndarray, cfg: TrackerConfig, t_end: float, t0: float = 0.0):
    """Track points from ``t0`` to ``t_end``; returns (Z, t, status)."""
    P = Z0.shape[0]
    Z = Z0.copy()
    t = np.full(P, t0)
    h = np.full(P, cfg.initial_step)
    status = np.zeros(P, dtype=np.int8)
    # 0 active, 1 reached t_end, 2 failed
    streak = np.zeros(P, dtype=np.int64)
    for _ in range(cfg.max_steps):
        act = np.flatnonzero(status == 0)
        if act.size == 0:
            break
        za, ta = Z[act], t[act]
        ha = np.minimum(h[act], t_end - ta)
        # RK4 predictor
        k1 = hom.velocity(za, ta)
        k2 = hom.velocity(za + 0.5 * ha[:, None] * k1, ta + 0.5 * ha)
        k3 = hom.velocity(za + 0.5 * ha[:, None] * k2, ta + 0.5 * ha)
        k4 = hom.velocity(za + ha[:, None] * k3, ta + ha)
        zp = za + (ha[:, None] / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        tn = ta + ha
        zc, steps = hom.newton(zp, tn, cfg.max_corrector_iters)
        scale = 1.0 + np.linalg.norm(zc, axis=1)
        last = steps[-1]
        ok = np.isfinite(last) & (last <= cfg.corrector_tol * scale * 1e3)
        if len(steps) > 1:
            # contraction guards against converging onto a neighbouring path
            ok &= steps[1] <= 0.5 * steps[0] + cfg.corrector_tol * scale
        ok &= steps[0] <= 0.1 * scale
        good, bad = act[ok], act[~ok]
        Z[good] = zc[ok]
        t[good] = tn[ok]
        streak[good] += 1
        grow = good[streak[good] >= 2]
        h[grow] = np.minimum(h[grow] * 2.0, cfg.max_step)
        streak[grow] = 0
        h[bad] = ha[~ok] * 0.5
        streak[bad] = 0
        status[good[t[good] >= t_end - 1e-15]] = 1
        status[bad[h[bad] < cfg.min_step]] = 2
    status[status == 0] = 2
    return Z, t, status


def _affine_newton(F: CompiledSystem, x: np.ndarray, iters: int):
    """Plain Newton in affine coordinates; also returns the relative size of the last step."""
    step = np.full(x.shape[0], np.inf)
    for _ in range(iters):
        val, jac = F.evaluate(x)
        delta = _solve(jac, -val)
        ok = np.all(np.isfinite(delta), axis=1)
        # keep the last good iterate where the Jacobian went singular
        x = np.where(ok[:, None], x + delta, x)
        step = np.where(ok, np.linalg.norm(delta, axis=1) / (1.0 + np.linalg.norm(x, axis=1)), np.inf)
    val, jac = F.evaluate(x)
    return x, val, jac, step


def _scaled_system(polys: Sequence[Polynomial], variables: Sequence[str]):
    terms = []
    for p in polys:
        tp = _terms(p, variables)
        big = max(abs(c) for _, c in tp)
        terms.append([(e, c / big) for e, c in tp])
    return terms


def _endpoints(hom: _Homotopy, F_aff, Z: np.ndarray, mask: np.ndarray, cfg: TrackerConfig, top: int) -> dict:
    """Refine tracked endpoints at t = 1 and sort them into finite or lost.

    Returns per-path arrays; rows outside ``mask`` are marked neither lost
    nor converged.
    """
    P, m = Z.shape
    n = m - 1
    x = np.full((P, n), np.nan, dtype=complex)
    x0 = np.full((P, n), np.nan, dtype=complex)
    val = np.full((P, n), np.nan, dtype=complex)
    jac = np.full((P, n, n), np.nan, dtype=complex)
    step = np.full(P, np.inf)
    idx = np.flatnonzero(mask)
    # singular endpoints converge only linearly, so iterate longer
    Zr, _ = hom.newton(Z[idx], np.ones(idx.size), 8)
    z0 = Zr[:, 0]
    bounded = np.abs(z0) * cfg.divergence_bound > np.linalg.norm(Zr[:, 1:], axis=1)
    keep = idx[bounded]
    x0[keep] = Zr[bounded, 1:] / z0[bounded, None]
    x[keep], val[keep], jac[keep], step[keep] = _affine_newton(F_aff, x0[keep], 6)
    # An endpoint at infinity has no affine root nearby, so Newton runs away
    # from it. A finite root, however large or badly conditioned, stays put
    # (quadratically when simple, linearly when singular).
    drift = np.linalg.norm(x - x0, axis=1) / (1.0 + np.linalg.norm(x0, axis=1))
    norm_x = np.linalg.norm(x, axis=1)
    finite = np.all(np.isfinite(x), axis=1) & (norm_x < cfg.divergence_bound) & (drift < cfg.drift_limit)
    resid = np.linalg.norm(val, axis=1) / (1.0 + norm_x ** top)
    resid = np.where(np.isfinite(resid), resid, np.inf)
    conv = finite & (step < cfg.stationary_tol) & (resid < cfg.refinement_tol)
    return {"x": x, "val": val, "jac": jac, "resid": resid, "conv": conv, "lost": mask & ~finite}


def solve_system(
    system: Sequence[Polynomial] | Sequence[Sequence[tuple[tuple[int, ...], complex]]],
    cfg: TrackerConfig | None = None,
    seed: int = 0,
    variables: Sequence[str] | None = None,
) -> SolutionSet:
    """Find the isolated solutions of a square system by total-degree homotopy.

    ``system`` is a list of :class:`Polynomial` or of raw ``(exponent, coeff)``
    term lists (for complex coefficients). Each equation is scaled so its
    largest coefficient has modulus one.
    """
    cfg = cfg or TrackerConfig()
    rng = np.random.default_rng(seed)
    if system and isinstance(system[0], Polynomial):
        names = list(variables) if variables is not None else list(system[0].variables)
        terms = _scaled_system(system, names)
    else:
        terms = [list(p) for p in system]
        names = list(variables) if variables is not None else [f"z{i}" for i in range(len(terms))]
        terms = [[(tuple(e), complex(c) / max(abs(complex(cc)) for _, cc in p)) for e, c in p] for p in terms]
    n = len(names)
    if len(terms) != n:
        raise ValueError(f"system is not square: {len(terms)} equations in {n} unknowns")
    F_aff = CompiledSystem(terms, n)
    F = CompiledSystem(terms, n, homogenize=True)
    degrees = F.degrees
    start_polys = []
    for i, d in enumerate(degrees):
        z = [0] * n
        z[i] = d
        start_polys.append([(tuple(z), 1.0), ((0,) * n, -1.0)])
    G = CompiledSystem(start_polys, n, homogenize=True)

    gamma = cfg.gamma
    if gamma is None:
        gamma = complex(np.exp(2j * np.pi * rng.random()))
    patch = rng.normal(size=n + 1) + 1j * rng.normal(size=n + 1)
    patch /= np.linalg.norm(patch)

    x0 = _start_solutions(degrees, [1.0] * n)
    Z0 = np.concatenate([np.ones((x0.shape[0], 1), dtype=complex), x0], axis=1)
    Z0 = Z0 / (Z0 @ patch)[:, None]
    hom = _Homotopy(F, G, gamma, patch)
    top = max(degrees)
    with np.errstate(all="ignore"):
        Z, t, status = _track(hom, Z0, cfg, 1.0 - cfg.endgame_gap)
        end = _endpoints(hom, F_aff, Z, status == 1, cfg, top)
        # Ill-conditioned finite roots can look unsettled this far from t = 1.
        # Give those paths a few more decades of tracking before judging them.
        retry = np.flatnonzero((status == 1) & ~end["conv"])
        if retry.size:
            t_deep = 1.0 - cfg.endgame_gap * 1e-4
            Zd, _, sd = _track(hom, Z[retry], cfg, t_deep, t0=1.0 - cfg.endgame_gap)
            deep = _endpoints(hom, F_aff, Zd, sd == 1, cfg, top)
            take = retry[sd == 1]
            for key, arr in end.items():
                arr[take] = deep[key][sd == 1]
    x, val, jac, resid, conv = end["x"], end["val"], end["jac"], end["resid"], end["conv"]
    reached = status == 1
    diverged = int((reached & end["lost"]).sum())
    failed = int((status == 2).sum() + (reached & ~end["lost"] & ~conv).sum())
    candidates = []
    for k in np.flatnonzero(conv):
        with np.errstate(all="ignore"):
            cond = float(np.linalg.cond(jac[k]))
        candidates.append(Solution(x[k], float(resid[k]), cond, int(k)))
    sols, dups = _deduplicate(candidates, cfg.dedup_radius)
    return SolutionSet(
        variables=names,
        solutions=sols,
        tracked=int(Z0.shape[0]),
        diverged=diverged,
        failed=failed,
        duplicates=dups,
        seed=seed,
        config=cfg,
        borderline=classify_solutions(sols, cfg.real_tol)["borderline"],
        meta={"gamma": [gamma.real, gamma.imag], "degrees": list(degrees)},
    )


def _deduplicate(cands: list[Solution], radius: float) -> tuple[list[Solution], int]:
    # canonical order first so the result does not depend on path order
    cands = sorted(cands, key=lambda s: tuple(np.round(np.concatenate([s.point.real, s.point.imag]), 12)))
    kept: list[Solution] = []
    dups = 0
    for s in cands:
        scale = 1.0 + np.linalg.norm(s.point)
        for other in kept:
            if np.linalg.norm(other.point - s.point) < radius * scale:
                other.multiplicity += 1
                dups += 1
                break
        else:
            kept.append(s)
    return kept, dups
