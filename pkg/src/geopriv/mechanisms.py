"""Private mechanisms over point tuples.

Identity queries (planar-Laplace for GP, Gaussian for CGP, under both the
max-per-point and the flattened l2 tuple metrics), a below-threshold sparse
vector scan for Lipschitz queries, private (k-)nearest-neighbour selection
built on it, and the private convex hull pipeline.

Every mechanism takes an explicit RandomStream and, optionally, a
BudgetLedger to audit its internal splits.  Indices crossing the API are
1-based (see geometry module).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .accounting import BudgetLedger
from .geometry import PointTuple, _validate_indices, center, max_radius
from .noise import (
    RandomStream,
    sample_gaussian_vec,
    sample_laplace,
    sample_planar_laplace,
)


class NonHaltError(RuntimeError):
    """A threshold scan exceeded its step cap without accepting a query."""


@dataclass(frozen=True)
class SvtOutcome:
    """Result of a sparse vector scan.

    When ``halted`` is True the output sequence was ``index - 1`` rejections
    followed by one acceptance, and ``steps == index``; otherwise ``index``
    is None and ``steps`` counts the queries evaluated before giving up.
    """

    halted: bool
    steps: int
    index: int | None = None


@dataclass(frozen=True)
class PnnParams:
    """Knobs for the private nearest-neighbour scan.

    ``threshold_slack`` widens (or, if negative, tightens) the accept
    threshold, trading error against scan length.  ``max_cycles`` caps the
    number of passes over the candidate set; exceeding it raises
    NonHaltError.  The cap is a runtime guard only, privacy is unaffected.
    """

    threshold_slack: float = 0.0
    max_cycles: int = 64

    def __post_init__(self):
        if self.max_cycles < 1:
            raise ValueError(f"max_cycles must be at least 1, got {self.max_cycles}")


# Composite mechanisms scan many times; a longer default cap makes an abort
# astronomically unlikely (the expected number of cycles stays ~4).
_LONG_SCAN = PnnParams(max_cycles=16384)


@dataclass(frozen=True)
class PchParams:
    """Inputs of the private-anchor selection stage of the convex hull pipeline."""

    rho: float
    beta: float
    k: int | str = "auto"
    k_clamp: tuple[int, int] = (16, 128)

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError(f"rho must be positive, got {self.rho}")
        if not 0 < self.beta < 1:
            raise ValueError(f"beta must be in (0, 1), got {self.beta}")
        if self.k != "auto":
            if int(self.k) < 3:
                raise ValueError(f"explicit k must be at least 3, got {self.k}")
        lo, hi = self.k_clamp
        if not (1 <= lo <= hi):
            raise ValueError(f"invalid k_clamp {self.k_clamp}")


@dataclass(frozen=True)
class PchInfo:
    """Diagnostics of an anchor-selection run: the privatized circle centre
    and radius, the anchor count used, and the per-probe budget share
    (a CGP rate for the Gaussian variant, a GP rate for the Laplace one)."""

    center: np.ndarray
    radius: float
    k: int
    probe_budget: float


@dataclass(frozen=True)
class HullResult:
    """Privatized convex hull release: selected anchor indices (1-based),
    their noised locations (k x 2), and the anchor-stage diagnostics."""

    anchors: list[int]
    points: np.ndarray
    info: PchInfo


# ---------------------------------------------------------------------------
# identity queries


def identity_gp_inf(
    x: PointTuple, eps: float, rng: RandomStream, ledger: BudgetLedger | None = None
) -> PointTuple:
    """Release the whole tuple under eps-GP w.r.t. the max per-point metric.

    Each point independently gets planar-Laplace noise at rate eps/n; the
    guarantee follows from basic composition over the n points.
    """
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    n = len(x)
    noise = sample_planar_laplace(x.dim, eps / n, rng, size=n)
    if ledger is not None:
        ledger.charge("points", eps)
    return PointTuple(x.points + noise)


def identity_cgp_inf(
    x: PointTuple, rho: float, rng: RandomStream, ledger: BudgetLedger | None = None
) -> PointTuple:
    """Release the whole tuple under rho-CGP w.r.t. the max per-point metric.

    Each coordinate of each point gets Gaussian noise with standard deviation
    sqrt(n / (2 rho)): each point is released at rho/n and the rates add.
    """
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho}")
    n = len(x)
    sigma = math.sqrt(n / (2.0 * rho))
    noise = sample_gaussian_vec(x.dim, sigma, rng, size=n)
    if ledger is not None:
        ledger.charge("points", rho)
    return PointTuple(x.points + noise)


def identity_gp_l2(
    x: PointTuple, eps: float, rng: RandomStream, ledger: BudgetLedger | None = None
) -> PointTuple:
    """Release the whole tuple under eps-GP w.r.t. the flattened l2 metric:
    a single (n*d)-dimensional planar-Laplace draw at rate eps."""
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    flat = sample_planar_laplace(x.n * x.dim, eps, rng)
    if ledger is not None:
        ledger.charge("tuple", eps)
    return PointTuple(x.points + flat.reshape(x.n, x.dim))


def identity_cgp_l2(
    x: PointTuple, rho: float, rng: RandomStream, ledger: BudgetLedger | None = None
) -> PointTuple:
    """Release the whole tuple under rho-CGP w.r.t. the flattened l2 metric:
    per-coordinate Gaussian noise with standard deviation 1/sqrt(2 rho)."""
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho}")
    sigma = 1.0 / math.sqrt(2.0 * rho)
    noise = sample_gaussian_vec(x.dim, sigma, rng, size=x.n)
    if ledger is not None:
        ledger.charge("tuple", rho)
    return PointTuple(x.points + noise)


# ---------------------------------------------------------------------------
# sparse vector technique


def svt(
    x: PointTuple,
    eps: float,
    threshold: float,
    lipschitz: float,
    queries: Iterable[Callable[[PointTuple], float]],
    max_steps: int,
    rng: RandomStream,
    ledger: BudgetLedger | None = None,
) -> SvtOutcome:
    """Below-threshold sparse vector scan, eps-GP for K-Lipschitz queries.

    The budget is split evenly: the threshold perturbation W is
    Laplace(2K/eps), each per-query perturbation V_j is Laplace(4K/eps), and
    the scan halts at the first j with ``g_j(x) + V_j <= threshold + W``.
    If no query accepts within ``max_steps`` (or the query stream runs out)
    the outcome reports a budget-safe non-halt; privacy is unaffected either
    way, only the caller's utility is.
    """
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if not lipschitz > 0:
        raise ValueError(f"lipschitz must be positive, got {lipschitz}")
    if max_steps < 1:
        raise ValueError(f"max_steps must be at least 1, got {max_steps}")

    gate = threshold + sample_laplace(2.0 * lipschitz / eps, rng)
    if ledger is not None:
        ledger.charge("svt_threshold", eps / 2.0)
        ledger.charge("svt_queries", eps / 2.0)

    noise_scale = 4.0 * lipschitz / eps
    zero = rng.zero_noise
    buf = np.empty(0)
    pos = 0
    steps = 0
    for query in queries:
        if steps == max_steps:
            break
        steps += 1
        if zero:
            v = 0.0
        else:
            if pos == len(buf):
                buf = rng.generator.laplace(
                    0.0, noise_scale, size=min(256, max_steps - steps + 1)
                )
                pos = 0
            v = buf[pos]
            pos += 1
        if query(x) + v <= gate:
            return SvtOutcome(True, steps, steps)
    return SvtOutcome(False, steps, None)


# ---------------------------------------------------------------------------
# private nearest neighbours


def pnn_detailed(
    x: PointTuple,
    query_point,
    indices: Iterable[int],
    eps: float,
    rng: RandomStream,
    params: PnnParams | None = None,
    ledger: BudgetLedger | None = None,
) -> tuple[int, SvtOutcome]:
    """Private nearest neighbour with scan diagnostics.

    Perturbs the minimum distance with Laplace(3/eps) noise (one third of
    the budget) to form the scan threshold, then runs the sparse vector scan
    (remaining two thirds, noise scales 3/eps and 6/eps) cycling through the
    candidate distances until one accepts.  Returns the accepted 1-based
    index and the SvtOutcome; eps-GP overall.
    """
    if params is None:
        params = PnnParams()
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    idx = _validate_indices(indices, x.n)
    q = np.asarray(query_point, dtype=np.float64)
    if q.shape != (x.dim,):
        raise ValueError(f"query point must have shape ({x.dim},), got {q.shape}")
    dists = np.linalg.norm(x.points[np.asarray(idx, dtype=np.intp) - 1] - q, axis=1)
    m = len(idx)

    gate = float(dists.min()) + sample_laplace(3.0 / eps, rng) + params.threshold_slack
    if ledger is not None:
        ledger.charge("pnn_threshold", eps / 3.0)

    def cycling():
        step = 0
        while True:
            yield (lambda _x, i=step % m: float(dists[i]))
            step += 1

    outcome = svt(
        x,
        2.0 * eps / 3.0,
        gate,
        1.0,
        cycling(),
        params.max_cycles * m,
        rng,
        ledger=ledger,
    )
    if not outcome.halted:
        raise NonHaltError(
            f"nearest-neighbour scan did not accept within {params.max_cycles} cycles "
            f"over {m} candidates"
        )
    return idx[(outcome.steps - 1) % m], outcome


def pnn(
    x: PointTuple,
    query_point,
    indices: Iterable[int],
    eps: float,
    rng: RandomStream,
    params: PnnParams | None = None,
    ledger: BudgetLedger | None = None,
) -> int:
    """Private nearest neighbour in the given 1-based index subset; eps-GP."""
    return pnn_detailed(x, query_point, indices, eps, rng, params, ledger)[0]


def _kpnn_rounds(
    x: PointTuple,
    query_point,
    k: int,
    eps_round: float,
    rng: RandomStream,
    params: PnnParams,
) -> list[int]:
    remaining = list(range(1, x.n + 1))
    chosen: list[int] = []
    for _ in range(k):
        t = pnn(x, query_point, remaining, eps_round, rng, params=params)
        chosen.append(t)
        remaining.remove(t)
    return chosen


def kpnn(
    x: PointTuple,
    query_point,
    k: int,
    rho: float,
    rng: RandomStream,
    params: PnnParams | None = None,
    ledger: BudgetLedger | None = None,
) -> list[int]:
    """k private nearest neighbours under rho-CGP.

    Runs k sequential nearest-neighbour selections, each at GP rate
    sqrt(2 rho / k) (hence rho/k as a CGP rate), removing the returned index
    every round; the k rates add to rho.  Returns the 1-based indices in
    discovery order.
    """
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho}")
    if not 1 <= k <= x.n:
        raise ValueError(f"k must be in 1..{x.n}, got {k}")
    eps_round = math.sqrt(2.0 * rho / k)
    out = _kpnn_rounds(x, query_point, k, eps_round, rng, params or _LONG_SCAN)
    if ledger is not None:
        for j in range(1, k + 1):
            ledger.charge(f"round_{j}", rho / k)
    return out


def kpnn_gp(
    x: PointTuple,
    query_point,
    k: int,
    eps: float,
    rng: RandomStream,
    params: PnnParams | None = None,
    ledger: BudgetLedger | None = None,
) -> list[int]:
    """k private nearest neighbours under eps-GP (basic composition, eps/k
    per round)."""
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if not 1 <= k <= x.n:
        raise ValueError(f"k must be in 1..{x.n}, got {k}")
    out = _kpnn_rounds(x, query_point, k, eps / k, rng, params or _LONG_SCAN)
    if ledger is not None:
        for j in range(1, k + 1):
            ledger.charge(f"round_{j}", eps / k)
    return out


# ---------------------------------------------------------------------------
# private convex hull


def _clamp_anchor_count(raw: float, clamp: tuple[int, int]) -> int:
    lo, hi = clamp
    if not math.isfinite(raw):
        return lo
    return min(max(int(round(raw)), lo), hi)


def pch_anchors_detailed(
    x: PointTuple,
    params: PchParams,
    rng: RandomStream,
    ledger: BudgetLedger | None = None,
    pnn_params: PnnParams | None = None,
) -> tuple[list[int], PchInfo]:
    """Anchor selection for the private convex hull, with diagnostics.

    Spends rho/20 on a privatized bounding circle (centre via the Gaussian
    mechanism for the sqrt(2)-Lipschitz bounding-box centre at 2/3 of that,
    radius via the 1-Lipschitz max distance at the remaining 1/3, inflated
    by sqrt(3 log(2/beta) / rho0) so the circle encloses the tuple with
    probability 1 - beta/2).  Then k probes are placed evenly on the circle
    and each probe's nearest neighbour is selected privately with an equal
    share of the remaining budget.  rho-CGP overall.

    With ``k="auto"`` the anchor count balances the probe-selection noise
    against the circle-arc coverage gap:
    ``k = round((radius * sqrt(rho) / log(n/beta)) ** (2/3))`` clamped to
    ``k_clamp``.
    """
    if x.dim != 2:
        raise ValueError(f"the convex hull pipeline is 2-D only, got dim {x.dim}")
    n = len(x)
    rho0 = params.rho / 20.0
    sigma0 = math.sqrt(3.0 / (2.0 * rho0))

    c_priv = center(x) + sample_gaussian_vec(2, sigma0, rng)
    if ledger is not None:
        ledger.charge("centre", 2.0 * rho0 / 3.0)

    slack = math.sqrt(3.0 * math.log(2.0 / params.beta) / rho0)
    r_priv = max_radius(x, c_priv) + slack + float(sample_gaussian_vec(1, sigma0, rng)[0])
    if ledger is not None:
        ledger.charge("radius", rho0 / 3.0)

    if params.k == "auto":
        raw = (max(r_priv, 0.0) * math.sqrt(params.rho) / math.log(n / params.beta)) ** (2.0 / 3.0)
        k = _clamp_anchor_count(raw, params.k_clamp)
    else:
        k = int(params.k)

    rho1 = (params.rho - rho0) / k
    eps_probe = math.sqrt(2.0 * rho1)
    every = list(range(1, n + 1))
    scan = pnn_params or _LONG_SCAN
    anchors: list[int] = []
    for j in range(k):
        theta = 2.0 * math.pi * j / k
        probe = c_priv + r_priv * np.array([math.cos(theta), math.sin(theta)])
        anchors.append(pnn(x, probe, every, eps_probe, rng, params=scan))
        if ledger is not None:
            ledger.charge(f"probe_{j + 1}", rho1)
    return anchors, PchInfo(c_priv, float(r_priv), k, rho1)


def pch_anchors(
    x: PointTuple,
    params: PchParams,
    rng: RandomStream,
    ledger: BudgetLedger | None = None,
    pnn_params: PnnParams | None = None,
) -> list[int]:
    """Anchor indices (1-based, one per circle probe) of the private convex
    hull selection stage; rho-CGP."""
    return pch_anchors_detailed(x, params, rng, ledger, pnn_params)[0]


def private_convex_hull(
    x: PointTuple,
    rho: float,
    beta: float,
    rng: RandomStream,
    k: int | str = "auto",
    k_clamp: tuple[int, int] = (16, 128),
    ledger: BudgetLedger | None = None,
    pnn_params: PnnParams | None = None,
) -> HullResult:
    """Privatized convex hull release under rho-CGP.

    Half the budget selects anchors (see pch_anchors), the other half
    releases each anchor location through the Gaussian mechanism at rho/(2k)
    per anchor, i.e. per-coordinate standard deviation sqrt(k/rho).  The
    hull of the returned points is computed by the caller as
    post-processing.
    """
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho}")
    if not 0 < beta < 1:
        raise ValueError(f"beta must be in (0, 1), got {beta}")
    params = PchParams(rho=rho / 2.0, beta=beta / 2.0, k=k, k_clamp=k_clamp)
    anchors, info = pch_anchors_detailed(x, params, rng, pnn_params=pnn_params)
    if ledger is not None:
        ledger.charge("anchor_selection", rho / 2.0)
    sigma = math.sqrt(info.k / rho)
    released = np.empty((info.k, 2))
    for j, a in enumerate(anchors):
        released[j] = x.points[a - 1] + sample_gaussian_vec(2, sigma, rng)
        if ledger is not None:
            ledger.charge(f"release_{j + 1}", rho / (2.0 * info.k))
    return HullResult(anchors, released, info)


def _pch_anchors_gp_detailed(
    x: PointTuple,
    eps_stage: float,
    beta_stage: float,
    k: int | str,
    k_clamp: tuple[int, int],
    rng: RandomStream,
    ledger: BudgetLedger | None,
    pnn_params: PnnParams | None,
) -> tuple[list[int], PchInfo]:
    """Anchor selection under pure GP with basic composition.

    Mirrors the Gaussian variant: eps_stage/20 buys the bounding circle
    (planar-Laplace centre noise at rate (2/3) eps0 / sqrt(2) for the
    sqrt(2)-Lipschitz centre, Laplace(3/eps0) radius noise inflated by
    (3/eps0) log(2/beta)), and the rest splits evenly over the k probes.
    The auto anchor count balances the linear-in-k selection noise against
    the coverage gap: ``k = round(sqrt(radius * eps / log(n/beta)))``.
    """
    if x.dim != 2:
        raise ValueError(f"the convex hull pipeline is 2-D only, got dim {x.dim}")
    n = len(x)
    eps0 = eps_stage / 20.0

    c_priv = center(x) + sample_planar_laplace(2, (2.0 * eps0 / 3.0) / math.sqrt(2.0), rng)
    if ledger is not None:
        ledger.charge("centre", 2.0 * eps0 / 3.0)

    slack = (3.0 / eps0) * math.log(2.0 / beta_stage)
    r_priv = max_radius(x, c_priv) + slack + sample_laplace(3.0 / eps0, rng)
    if ledger is not None:
        ledger.charge("radius", eps0 / 3.0)

    if k == "auto":
        raw = math.sqrt(max(r_priv, 0.0) * eps_stage / math.log(n / beta_stage))
        kk = _clamp_anchor_count(raw, k_clamp)
    else:
        kk = int(k)
        if kk < 3:
            raise ValueError(f"explicit k must be at least 3, got {k}")

    eps1 = (eps_stage - eps0) / kk
    every = list(range(1, n + 1))
    scan = pnn_params or _LONG_SCAN
    anchors: list[int] = []
    for j in range(kk):
        theta = 2.0 * math.pi * j / kk
        probe = c_priv + r_priv * np.array([math.cos(theta), math.sin(theta)])
        anchors.append(pnn(x, probe, every, eps1, rng, params=scan))
        if ledger is not None:
            ledger.charge(f"probe_{j + 1}", eps1)
    return anchors, PchInfo(c_priv, float(r_priv), kk, eps1)


def private_convex_hull_gp(
    x: PointTuple,
    eps: float,
    beta: float,
    rng: RandomStream,
    k: int | str = "auto",
    k_clamp: tuple[int, int] = (16, 128),
    ledger: BudgetLedger | None = None,
    pnn_params: PnnParams | None = None,
) -> HullResult:
    """Privatized convex hull release under eps-GP (basic composition).

    Half the budget selects anchors with the pure-GP anchor stage, the other
    half releases each anchor with planar-Laplace noise at rate eps/(2k).
    """
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if not 0 < beta < 1:
        raise ValueError(f"beta must be in (0, 1), got {beta}")
    anchors, info = _pch_anchors_gp_detailed(
        x, eps / 2.0, beta / 2.0, k, k_clamp, rng, None, pnn_params
    )
    if ledger is not None:
        ledger.charge("anchor_selection", eps / 2.0)
    rate = (eps / 2.0) / info.k
    released = np.empty((info.k, 2))
    for j, a in enumerate(anchors):
        released[j] = x.points[a - 1] + sample_planar_laplace(2, rate, rng)
        if ledger is not None:
            ledger.charge(f"release_{j + 1}", eps / (2.0 * info.k))
    return HullResult(anchors, released, info)
