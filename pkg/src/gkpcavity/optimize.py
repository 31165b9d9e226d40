"""Derivative-free tuning of the cavity working point and input settings.

For each internal cooperativity the escape efficiency (equivalently the
output coupling rate), the input squeezing, and optionally the displacement
scale and the emitter superposition are tuned to maximize min(dB_x, dB_p).
The search is a seeded Latin-hypercube scan over roughly two thirds of the
evaluation budget followed by a bounded Nelder-Mead refinement; everything
is deterministic given the seed. Escape efficiency is searched on a
log(1 - eta) axis, which keeps the near-unity optimum well conditioned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize as sciopt
from scipy.stats import qmc

from gkpcavity.breeding import BreedConfig, breed
from gkpcavity.channel import CavityParams, KrausTruncation
from gkpcavity.protocol import (
    ProtocolConfig,
    run_protocol,
    squeeze_from_vacuum,
    two_level_weighting_config,
)

PROTOCOLS = ("cavity", "breeding", "vacuum")

FAILURE_SCORE = -1e9


@dataclass(frozen=True)
class SearchSpace:
    """Box bounds for the tunable parameters plus activity flags.

    Inactive dimensions are pinned to their defaults: eta 0.99, r 1.0,
    scale 1.0, atom_a 1/sqrt(2) (equal superposition), p_displacement 0.3.
    """

    eta_range: tuple[float, float] = (0.5, 0.9999)
    r_range: tuple[float, float] = (0.0, 2.0)
    scale_range: tuple[float, float] = (0.9, 1.15)
    a_range: tuple[float, float] = (1.0 / math.sqrt(2.0), 0.95)
    p_range: tuple[float, float] = (0.02, 1.2)
    optimize_eta: bool = True
    optimize_r: bool = True
    optimize_scale: bool = False
    optimize_atom: bool = False

    def __post_init__(self):
        for name, (lo, hi), bound in [
            ("eta_range", self.eta_range, (0.0, 1.0)),
            ("r_range", self.r_range, (0.0, 2.0)),
            ("scale_range", self.scale_range, (0.5, 2.0)),
            ("a_range", self.a_range, (0.5, 1.0)),
            ("p_range", self.p_range, (0.0, 4.0)),
        ]:
            if not (bound[0] <= lo <= hi <= bound[1]) or (
                name == "eta_range" and (lo <= 0.0 or hi >= 1.0)
            ):
                raise ValueError(f"{name}=({lo}, {hi}) outside {bound}")

    def defaults(self) -> dict:
        return {
            "eta": 0.99,
            "r": 1.0,
            "scale": 1.0,
            "atom_a": 1.0 / math.sqrt(2.0),
            "p_displacement": 0.3,
        }


@dataclass
class Evaluation:
    params: dict
    db_x: float
    db_p: float
    min_db: float
    success_probability: float
    mean_photons: float
    error: str | None = None

    def key(self) -> tuple:
        """Sort key: objective, then cheaper-state tie breaks."""
        return (self.min_db, self.success_probability, -self.mean_photons)


@dataclass
class PointResult:
    c0: float
    protocol: str
    steps: int
    best: Evaluation
    n_evaluations: int
    evaluations: list[Evaluation] = field(default_factory=list)

    @property
    def eta(self) -> float:
        return self.best.params["eta"]

    @property
    def cooperativity(self) -> float:
        return self.c0 * (1.0 - self.eta)


@dataclass
class SweepResult:
    protocol: str
    points: list[PointResult]

    def best_for(self, c0: float) -> PointResult:
        matches = [p for p in self.points if p.c0 == c0 and p.best.error is None]
        if not matches:
            raise KeyError(f"no successful point at C0={c0}")
        return max(matches, key=lambda p: p.best.key())

    def c0_values(self) -> list[float]:
        return sorted({p.c0 for p in self.points})


def evaluate_candidate(
    c0: float,
    protocol: str,
    steps: int,
    params: dict,
    dim_cap: int = 256,
    trunc: KrausTruncation | None = None,
) -> Evaluation:
    """Run one candidate and score it by min(dB_x, dB_p) (quadrature dB for
    the vacuum-squeezing protocol). Failures score FAILURE_SCORE."""
    if protocol not in PROTOCOLS:
        raise ValueError(f"unknown protocol {protocol!r}")
    trunc = trunc or KrausTruncation()
    full = dict(params)
    try:
        cavity = CavityParams.from_internal(c0, full["eta"])
        if protocol == "cavity":
            atoms = None
            if full["atom_a"] > 1.0 / math.sqrt(2.0) + 1e-12 and steps >= 2:
                atoms = two_level_weighting_config(steps, full["atom_a"])
            cfg = ProtocolConfig(
                n_steps=steps,
                input_squeezing=full["r"],
                cavity=cavity,
                displacement_scale=full["scale"],
                atoms=atoms,
                truncation=trunc,
                dim=_capped_dim(full, steps, dim_cap),
            )
            res = run_protocol(cfg)
            rep = res.squeezing
            return Evaluation(
                full, rep.db_x, rep.db_p, rep.min_db,
                res.success_probability, res.mean_photons,
            )
        if protocol == "breeding":
            cfg = BreedConfig(
                rounds=steps,
                input_squeezing=full["r"],
                cavity=cavity,
                scale=full["scale"],
                truncation=trunc,
                dim=_breeding_dim(full, steps, dim_cap),
            )
            rep = breed(cfg)
            return Evaluation(
                full, rep.db_x, rep.db_p, rep.min_db,
                rep.success_probability,
                rep.diagnostics.get("cat_tail", 0.0),
            )
        if protocol == "vacuum":
            res = squeeze_from_vacuum(
                steps, cavity, full["p_displacement"], trunc,
                dim=_vacuum_dim(full, steps, dim_cap),
            )
            db = res.quadrature_db
            return Evaluation(
                full, db, db, db, res.success_probability, res.mean_photons
            )
        raise AssertionError("unreachable")
    except Exception as exc:  # scored, not raised: the search continues
        return Evaluation(
            full, FAILURE_SCORE, FAILURE_SCORE, FAILURE_SCORE, 0.0,
            math.inf, error=f"{type(exc).__name__}: {exc}",
        )


def _capped_dim(params: dict, steps: int, dim_cap: int) -> int:
    from gkpcavity import fock

    alpha_max = params["scale"] * math.sqrt(math.pi / 2.0) * (2**steps - 1)
    return fock.default_dim(alpha_max, params["r"], cap=dim_cap)


def _breeding_dim(params: dict, rounds: int, dim_cap: int = 256) -> int:
    from gkpcavity import fock
    from gkpcavity.breeding import cat_amplitude

    return fock.default_dim(
        cat_amplitude(rounds, params["scale"]), params["r"], cap=dim_cap
    )


def _vacuum_dim(params: dict, steps: int, dim_cap: int) -> int:
    from gkpcavity import fock

    return fock.default_dim(params["p_displacement"] * (2**steps - 1), 0.0, cap=dim_cap)


# ---------------------------------------------------------------------------
# search machinery


def _active_dims(space: SearchSpace, protocol: str) -> list[tuple[str, float, float]]:
    dims: list[tuple[str, float, float]] = []
    if space.optimize_eta:
        # searched as log(1 - eta): near-unity optima become well-scaled
        lo, hi = space.eta_range
        dims.append(("log1m_eta", math.log(1.0 - hi), math.log(1.0 - lo)))
    if protocol == "vacuum":
        dims.append(("p_displacement", *space.p_range))
        return dims
    if space.optimize_r:
        dims.append(("r", *space.r_range))
    if space.optimize_scale:
        dims.append(("scale", *space.scale_range))
    if space.optimize_atom and protocol == "cavity":
        dims.append(("atom_a", *space.a_range))
    return dims


def _params_from_vector(
    x: np.ndarray, dims: list[tuple[str, float, float]], defaults: dict
) -> dict:
    params = dict(defaults)
    for value, (name, lo, hi) in zip(x, dims):
        value = float(np.clip(value, 0.0, 1.0)) * (hi - lo) + lo
        if name == "log1m_eta":
            params["eta"] = 1.0 - math.exp(value)
        else:
            params[name] = value
    return params


def _vector_from_params(
    params: dict, dims: list[tuple[str, float, float]]
) -> np.ndarray:
    x = np.empty(len(dims))
    for i, (name, lo, hi) in enumerate(dims):
        value = (
            math.log(1.0 - params["eta"]) if name == "log1m_eta" else params[name]
        )
        x[i] = (value - lo) / (hi - lo) if hi > lo else 0.5
    return np.clip(x, 0.0, 1.0)


def optimize_point(
    c0: float,
    protocol: str,
    steps: int,
    space: SearchSpace = SearchSpace(),
    budget: int = 300,
    seed: int = 0,
    dim_cap: int = 256,
    trunc: KrausTruncation | None = None,
    warm_start: dict | None = None,
    keep_log: bool = True,
) -> PointResult:
    """Tune the active parameters at one internal cooperativity.

    Roughly two thirds of the budget goes to a seeded Latin-hypercube scan
    (plus the box center and any warm start), the rest to a Nelder-Mead
    polish started from the scan winner. The returned best is re-verified
    by a fresh evaluation of its parameters.
    """
    if protocol not in PROTOCOLS:
        raise ValueError(f"protocol must be one of {PROTOCOLS}")
    if budget < 50:
        raise ValueError("budget must be >= 50")
    dims = [(n, lo, hi) for (n, lo, hi) in _active_dims(space, protocol) if hi > lo]
    defaults = space.defaults()
    for name, lo, hi in _active_dims(space, protocol):
        if hi <= lo:  # collapsed interval pins the value
            probe = _params_from_vector(np.array([0.0]), [(name, lo, hi)], {})
            defaults.update(probe)
    log: list[Evaluation] = []

    def run(params: dict) -> Evaluation:
        ev = evaluate_candidate(c0, protocol, steps, params, dim_cap, trunc)
        log.append(ev)
        return ev

    if not dims:
        best = run(defaults)
    else:
        n_coarse = max(1, (2 * budget) // 3)
        sampler = qmc.LatinHypercube(d=len(dims), seed=seed)
        xs = [np.full(len(dims), 0.5)]
        if warm_start is not None:
            xs.append(_vector_from_params(warm_start, dims))
        xs.extend(sampler.random(max(1, n_coarse - len(xs))))
        for x in xs[:n_coarse]:
            run(_params_from_vector(np.asarray(x), dims, defaults))
        best = max(log, key=Evaluation.key)
        n_refine = budget - len(log)
        if n_refine > 2 and best.error is None:
            x0 = _vector_from_params(best.params, dims)

            def objective(x: np.ndarray) -> float:
                return -run(_params_from_vector(x, dims, defaults)).min_db

            sciopt.minimize(
                objective,
                x0,
                method="Nelder-Mead",
                bounds=[(0.0, 1.0)] * len(dims),
                options={
                    "maxfev": n_refine,
                    "xatol": 1e-4,
                    "fatol": 1e-4,
                    "initial_simplex": _initial_simplex(x0, len(dims)),
                },
            )
        best = max(log, key=Evaluation.key)
    if best.error is not None:
        raise RuntimeError(
            f"all {len(log)} evaluations failed at C0={c0}; first error: "
            f"{log[0].error}"
        )
    best = evaluate_candidate(c0, protocol, steps, best.params, dim_cap, trunc)
    return PointResult(
        c0=c0,
        protocol=protocol,
        steps=steps,
        best=best,
        n_evaluations=len(log),
        evaluations=log if keep_log else [],
    )


def _initial_simplex(x0: np.ndarray, d: int) -> np.ndarray:
    simplex = np.tile(x0, (d + 1, 1))
    for i in range(d):
        step = 0.08 if x0[i] <= 0.9 else -0.08
        simplex[i + 1, i] = np.clip(x0[i] + step, 0.0, 1.0)
    return simplex


def sweep(
    c0_values: list[float],
    protocol: str,
    steps_values: list[int],
    space: SearchSpace = SearchSpace(),
    budget: int = 300,
    seed: int = 0,
    dim_cap: int = 256,
    trunc: KrausTruncation | None = None,
    jobs: int = 1,
    keep_log: bool = False,
) -> SweepResult:
    """Optimize every (C0, steps) pair.

    Sequential runs warm-start each C0 from its left neighbor's optimum
    (same steps); with jobs > 1 the points run independently in parallel
    and warm starting is skipped.
    """
    tasks = [(c0, steps) for steps in steps_values for c0 in sorted(c0_values)]
    points: list[PointResult] = []
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [
                pool.submit(
                    _sweep_task, c0, protocol, steps, space, budget,
                    seed, dim_cap, trunc, keep_log,
                )
                for c0, steps in tasks
            ]
            points = [f.result() for f in futures]
    else:
        prev_best: dict[int, dict] = {}
        for c0, steps in tasks:
            point = _sweep_task(
                c0, protocol, steps, space, budget, seed, dim_cap, trunc,
                keep_log, warm_start=prev_best.get(steps),
            )
            points.append(point)
            if point.best.error is None:
                prev_best[steps] = point.best.params
    return SweepResult(protocol=protocol, points=points)


def _sweep_task(
    c0, protocol, steps, space, budget, seed, dim_cap, trunc, keep_log,
    warm_start=None,
) -> PointResult:
    try:
        return optimize_point(
            c0, protocol, steps, space, budget,
            seed=seed + int(1e6 * math.log1p(c0)) + 1000 * steps,
            dim_cap=dim_cap, trunc=trunc, warm_start=warm_start,
            keep_log=keep_log,
        )
    except Exception as exc:  # partial failure: keep sweeping
        failed = Evaluation(
            space.defaults(), FAILURE_SCORE, FAILURE_SCORE, FAILURE_SCORE,
            0.0, math.inf, error=f"{type(exc).__name__}: {exc}",
        )
        return PointResult(
            c0=c0, protocol=protocol, steps=steps, best=failed, n_evaluations=0
        )


def point_record(point: PointResult) -> dict:
    """Flat dict for the CSV/JSON emitters."""
    best = point.best
    return {
        "C0": point.c0,
        "N_or_M": point.steps,
        "eta": best.params["eta"],
        "C": point.c0 * (1.0 - best.params["eta"]),
        "r_in": best.params.get("r", 0.0),
        "scale": best.params.get("scale", 1.0),
        "atom_a": best.params.get("atom_a", 1.0 / math.sqrt(2.0)),
        "p_displacement": best.params.get("p_displacement", 0.0),
        "dB_x": best.db_x,
        "dB_p": best.db_p,
        "min_dB": best.min_db,
        "success_prob": best.success_probability,
        "error": best.error,
    }
