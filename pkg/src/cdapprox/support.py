"""Empirical checks of the support-localization guarantees.

Two statements are checked for a kernel built from a graph measure mu at the
threshold gamma_d: the measure of the graph that escapes the sublevel set
{q < gamma_d} is small, and every point of the sublevel set lies close to the
support of mu.  Both the escaping mass and the maximal distance decay at
explicit rates in the degree d; the bounds are evaluated in high-precision
arithmetic because their constants overflow double precision for moderate r.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict

import mpmath
import numpy as np
from scipy.spatial import cKDTree

from .benchmarks import GraphFunction
from .cdkernel import CDKernel, ThresholdParams, gamma_threshold, threshold_params
from .moments import MomentMatrix


def outside_mass_bound(d: int, params: ThresholdParams) -> float:
    """Bound on mu({q >= gamma_d}), decaying like d^(p - r) for r > p."""
    params.validate_rate()
    if d < 1:
        raise ValueError(f"degree must be >= 1, got {d}")
    with mpmath.workdps(40):
        r = mpmath.mpf(params.r)
        p = mpmath.mpf(params.p)
        dd = mpmath.mpf(d)
        val = (
            (1 + params.alpha)
            / (1 - params.alpha)
            * 8
            * (params.m + params.m0)
            * (3 * r) ** (2 * r)
            * mpmath.e ** (p * p / dd)
            / (p**p * mpmath.e ** (2 * r - p) * dd ** (r - p))
        )
        return float(val)


def distance_bound(d: int, delta0: float) -> float:
    """Bound on dist(z, spt mu) over the sublevel set: delta0 / (sqrt(d) - 1)."""
    if d <= 1:
        raise ValueError(f"the distance bound needs degree d > 1, got {d}")
    if delta0 <= 0:
        raise ValueError(f"delta0 must be positive, got {delta0}")
    return float(delta0 / (np.sqrt(d) - 1.0))


def graph_mesh(bench: GraphFunction, n: int = 10_000) -> tuple[np.ndarray, float]:
    """Dense discretization of the graph plus a resolution slack.

    The slack is half the largest gap between neighboring mesh points that do
    not straddle a declared jump; distances measured against the mesh can
    undershoot distances to the true support by at most this much.  For p > 2
    the gap along x is reported instead (jump curves are not parameterized).
    """
    if bench.p == 2:
        X = bench.grid_x(n)
        Z = bench.graph_points(X)
        gaps = np.linalg.norm(np.diff(Z, axis=0), axis=1)
        if bench.jumps:
            xmid = 0.5 * (X[:-1, 0] + X[1:, 0])
            straddle = np.zeros(xmid.shape[0], dtype=bool)
            for t in bench.jumps:
                straddle |= (X[:-1, 0] < t) & (X[1:, 0] >= t)
            gaps = gaps[~straddle]
        slack = 0.5 * float(np.max(gaps)) if gaps.size else 0.0
        return Z, slack
    per_axis = max(2, int(round(n ** (1.0 / (bench.p - 1)))))
    X = bench.grid_x(per_axis)
    Z = bench.graph_points(X)
    box = bench.x_box()
    slack = 0.5 * float(np.max((box[:, 1] - box[:, 0]) / per_axis)) * np.sqrt(bench.p - 1)
    return Z, slack


@dataclass
class SupportReport:
    """Outcome of one empirical support check at a fixed degree."""

    benchmark: str
    d: int
    beta: float
    gamma: float
    r: float
    alpha: float
    m: float
    m0: float
    seed: int
    n_mass_samples: int
    outside_mass: float
    outside_mass_bound: float
    mass_ok: bool
    n_probes: int
    n_members: int
    max_distance: float
    distance_bound: float
    mesh_slack: float
    distance_ok: bool

    def to_dict(self) -> dict:
        return asdict(self)


def support_report(
    bench: GraphFunction,
    matrix: MomentMatrix,
    beta: float,
    r: float | None = None,
    alpha: float = 0.0,
    n_mass_samples: int = 100_000,
    n_probes: int = 100_000,
    mesh_points: int = 10_000,
    seed: int = 0,
) -> SupportReport:
    """Check both guarantees by Monte Carlo and return the full evidence."""
    d = matrix.spec.d
    if d <= 1:
        raise ValueError(f"support checks need degree d > 1, got d={d}")
    kernel = CDKernel(matrix, beta)
    params = threshold_params(matrix, r=r, alpha=alpha)
    gamma = gamma_threshold(d, params)
    rng = np.random.default_rng(seed)

    X = bench.random_x(n_mass_samples, rng)
    q_graph = kernel.eval_q_batch(bench.graph_points(X))
    fraction = float(np.mean(q_graph >= gamma))
    outside = fraction * matrix.mass_m
    mass_bound = outside_mass_bound(d, params)

    box = matrix.spec.domain_array()
    probes = rng.uniform(box[:, 0], box[:, 1], size=(n_probes, matrix.spec.p))
    q_probe = kernel.eval_q_batch(probes)
    members = probes[q_probe < gamma]
    mesh, slack = graph_mesh(bench, mesh_points)
    if members.shape[0]:
        dists, _ = cKDTree(mesh).query(members)
        max_dist = float(np.max(dists))
    else:
        max_dist = 0.0
    dist_bound = distance_bound(d, matrix.spec.domain_diameter())

    return SupportReport(
        benchmark=bench.name,
        d=d,
        beta=beta,
        gamma=gamma,
        r=params.r,
        alpha=params.alpha,
        m=params.m,
        m0=params.m0,
        seed=seed,
        n_mass_samples=n_mass_samples,
        outside_mass=outside,
        outside_mass_bound=mass_bound,
        mass_ok=bool(outside <= mass_bound * (1.0 + 1e-12)),
        n_probes=n_probes,
        n_members=int(members.shape[0]),
        max_distance=max_dist,
        distance_bound=dist_bound,
        mesh_slack=slack,
        distance_ok=bool(max_dist <= dist_bound + slack),
    )
