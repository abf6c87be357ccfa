"""Desk-scale statistical experiments on random lattices and grids.

Each experiment draws its per-sample randomness from a generator seeded by
``mix_seed(master_seed, sample_index)``, so results are byte-identical for
a fixed master seed regardless of worker count or scheduling.  Results
carry both summary statistics and per-sample records (plain dicts, JSON
serializable, canonically ordered by sample index) for persistence.

Estimators: unweighted runs use the usual sample mean and variance; the
exact invariant-law lattice sampler in dimension >= 3 is importance
weighted, so those runs report self-normalized weighted means with the
matching standard error and effective sample size.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import (
    ApproxFunction,
    DyadicSchedule,
    MaxPower,
    Norm,
    PointClass,
    TargetFunction,
    VectorOf,
    max_norm,
    mix_seed,
    regularity_witness,
)
from .counting import (
    CountQuery,
    NormBall,
    count_solutions,
    lattice_points_in_region,
)
from .haar import (
    CompactWindow,
    UnimodularMap,
    operator_norm,
    sample_grid_exact,
    sample_in_window,
    sample_lattice_exact,
    sample_sl,
)
from .volume import (
    Verdict,
    classify_series,
    monte_carlo_region_volume,
    shell_volume,
    threshold_M,
    zeta_fn,
)

__all__ = [
    "StatSummary",
    "WeightedMean",
    "ExperimentConfig",
    "wilson_interval",
    "siegel_mean_experiment",
    "SiegelResult",
    "rogers_variance_experiment",
    "RogersResult",
    "empty_probability_experiment",
    "EmptyProbResult",
    "counting_ratio_experiment",
    "RatioResult",
    "zero_full_experiment",
    "ZeroFullResult",
    "uniform_approx_experiment",
    "UniformResult",
    "kg_system_experiment",
    "KGSystemResult",
    "norm_independence_check",
    "NormCheckResult",
    "window_constants",
    "WindowConstants",
    "ratio_sandwich_check",
    "SandwichResult",
]


# --------------------------------------------------------------------------
# summaries


@dataclass(frozen=True)
class StatSummary:
    """Plain moments of a sample; stderr = sqrt(variance / sample_count)."""

    mean: float
    variance: float
    stderr: float
    sample_count: int
    min: float
    max: float

    def __post_init__(self) -> None:
        if self.sample_count < 1:
            raise ValueError("summary needs at least one value")
        if self.variance < 0:
            raise ValueError("variance must be nonnegative")
        expected = math.sqrt(self.variance / self.sample_count)
        if not math.isclose(self.stderr, expected, rel_tol=1e-12, abs_tol=1e-300):
            raise ValueError("stderr must equal sqrt(variance/sample_count)")

    @classmethod
    def from_values(cls, values) -> "StatSummary":
        xs = np.asarray(values, dtype=float)
        m = len(xs)
        mean = float(xs.mean())
        var = float(xs.var(ddof=1)) if m > 1 else 0.0
        return cls(mean, var, math.sqrt(var / m), m, float(xs.min()), float(xs.max()))

    def merge(self, other: "StatSummary") -> "StatSummary":
        """Associative combine; equals from_values on the concatenation."""
        m1, m2 = self.sample_count, other.sample_count
        m = m1 + m2
        delta = other.mean - self.mean
        mean = self.mean + delta * m2 / m
        ss1 = self.variance * max(m1 - 1, 0)
        ss2 = other.variance * max(m2 - 1, 0)
        ss = ss1 + ss2 + delta * delta * m1 * m2 / m
        var = ss / (m - 1) if m > 1 else 0.0
        return StatSummary(
            mean,
            var,
            math.sqrt(var / m),
            m,
            min(self.min, other.min),
            max(self.max, other.max),
        )


@dataclass(frozen=True)
class WeightedMean:
    """Self-normalized importance-sampling mean with its standard error.

    With all weights equal this reduces to the plain mean with the
    population-variance standard error; ess is the effective sample size
    (sum w)^2 / sum w^2.
    """

    estimate: float
    stderr: float
    ess: float
    sample_count: int

    @classmethod
    def from_weighted(cls, values, weights) -> "WeightedMean":
        xs = np.asarray(values, dtype=float)
        ws = np.asarray(weights, dtype=float)
        if len(xs) != len(ws) or len(xs) == 0:
            raise ValueError("need equally many values and weights, at least one")
        if np.any(ws < 0) or not np.any(ws > 0):
            raise ValueError("weights must be nonnegative with positive total")
        total = ws.sum()
        mean = float((ws * xs).sum() / total)
        se = float(np.sqrt((ws * ws * (xs - mean) ** 2).sum()) / total)
        ess = float(total * total / (ws * ws).sum())
        return cls(mean, se, ess, len(xs))


def wilson_interval(successes: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score confidence interval for a binomial proportion."""
    if trials < 1 or not 0 <= successes <= trials:
        raise ValueError(f"bad counts ({successes}, {trials})")
    p = successes / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


# --------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved run parameters shared by the CLI subcommands."""

    n: int
    f: TargetFunction | None = None
    psi: ApproxFunction | None = None
    norm: Norm | None = None
    point_class: PointClass = PointClass.ALL_NONZERO
    group: str = "SL"
    shift_bound: float = 0.0
    window: CompactWindow | None = None
    schedule: DyadicSchedule | None = None
    sample_count: int = 1
    master_seed: int = 0

    def __post_init__(self) -> None:
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")
        if self.sample_count < 1:
            raise ValueError(f"sampleCount must be >= 1, got {self.sample_count}")
        if self.group not in ("SL", "ASL"):
            raise ValueError(f"group must be SL or ASL, got {self.group!r}")
        if self.shift_bound < 0:
            raise ValueError(f"shiftBound must be >= 0, got {self.shift_bound}")
        if self.f is not None and self.f.n != self.n:
            raise ValueError(f"target dimension {self.f.n} does not match n={self.n}")
        if self.norm is not None and self.norm.dim != self.n:
            raise ValueError(f"norm dimension {self.norm.dim} does not match n={self.n}")


# --------------------------------------------------------------------------
# worker plumbing


def _run_indexed(worker, payloads, workers: int):
    """Map ``worker`` over payloads, in order, optionally across processes."""
    if workers <= 1 or len(payloads) <= 1:
        return [worker(p) for p in payloads]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(worker, payloads, chunksize=max(1, len(payloads) // (4 * workers))))


def _ball_of_volume(n: int, volume: float) -> NormBall:
    # sup-norm ball: volume (2r)^n
    if volume < 0:
        raise ValueError(f"volume must be >= 0, got {volume}")
    return NormBall(max_norm(n), 0.5 * volume ** (1.0 / n) if volume > 0 else 0.0)


_SIEGEL_CONSTANT = {
    PointClass.ALL_NONZERO: lambda n: 1.0,
    PointClass.ALL_INTEGER: lambda n: 1.0,
    PointClass.PRIMITIVE: lambda n: 1.0 / zeta_fn(float(n)),
}


# --------------------------------------------------------------------------
# Siegel mean


@dataclass(frozen=True)
class SiegelResult:
    volume: float
    ensemble: str
    estimates: dict
    references: dict
    summaries: dict
    records: list


def _siegel_sample(args):
    n, volume, ensemble, seed, index = args
    rng = np.random.default_rng(mix_seed(seed, index))
    ball = _ball_of_volume(n, volume)
    if ensemble == "lattice":
        basis, weight = sample_lattice_exact(n, rng)
        g = UnimodularMap(basis, np.zeros(n))
        vs, _ = lattice_points_in_region(g, ball)
        nonzero = int((vs != 0).any(axis=1).sum())
        primitive = int((np.gcd.reduce(np.abs(vs), axis=1) == 1).sum())
        return {"sample": index, "weight": float(weight), "nonzero": nonzero, "primitive": primitive}
    g, weight = sample_grid_exact(n, rng)
    vs, _ = lattice_points_in_region(g, ball)
    return {"sample": index, "weight": float(weight), "all": int(len(vs))}


def siegel_mean_experiment(
    n: int,
    volume: float,
    samples: int,
    seed: int,
    ensemble: str = "lattice",
    workers: int = 1,
) -> SiegelResult:
    """Empirical mean of the point count in a volume-V ball vs c_P * V.

    The lattice ensemble counts nonzero and primitive points on the same
    samples; the grid ensemble counts all grid points.  References:
    c = 1 for nonzero and grid counts, 1/zeta(n) for primitive ones.
    """
    if ensemble not in ("lattice", "grid"):
        raise ValueError(f"ensemble must be lattice or grid, got {ensemble!r}")
    if samples < 1:
        raise ValueError("need at least one sample")
    payloads = [(n, volume, ensemble, seed, i) for i in range(samples)]
    records = _run_indexed(_siegel_sample, payloads, workers)
    weights = [r["weight"] for r in records]
    classes = ("nonzero", "primitive") if ensemble == "lattice" else ("all",)
    estimates, references, summaries = {}, {}, {}
    for key in classes:
        counts = [r[key] for r in records]
        estimates[key] = WeightedMean.from_weighted(counts, weights)
        summaries[key] = StatSummary.from_values(counts)
        c = 1.0 if key != "primitive" else 1.0 / zeta_fn(float(n))
        references[key] = c * volume
    return SiegelResult(volume, ensemble, estimates, references, summaries, records)


# --------------------------------------------------------------------------
# Rogers variance


@dataclass(frozen=True)
class RogersResult:
    ensemble: str
    rows: list
    records: list


def rogers_variance_experiment(
    n: int,
    volumes,
    samples: int,
    seed: int,
    ensemble: str = "grid",
    ceiling: float | None = None,
    workers: int = 1,
) -> RogersResult:
    """Empirical count variance per region volume over a V grid.

    The affine-grid ensemble at any n is the variance equality case
    (variance/V near 1); lattice rows report the same ratio for stability
    inspection.  A configured ceiling flags rows that exceed it.
    """
    rows, records = [], []
    for vi, volume in enumerate(volumes):
        sub = siegel_mean_experiment(
            n, float(volume), samples, mix_seed(seed, vi), ensemble, workers
        )
        key = "all" if ensemble == "grid" else "nonzero"
        counts = np.asarray([r[key] for r in sub.records], dtype=float)
        weights = np.asarray([r["weight"] for r in sub.records], dtype=float)
        mean = float((weights * counts).sum() / weights.sum())
        var = float((weights * (counts - mean) ** 2).sum() / weights.sum())
        ratio = var / volume if volume > 0 else None
        flagged = bool(ceiling is not None and ratio is not None and ratio > ceiling)
        rows.append(
            {
                "volume": float(volume),
                "mean": mean,
                "variance": var,
                "ratio": ratio,
                "flagged": flagged,
            }
        )
        for r in sub.records:
            records.append({"volume": float(volume), **r})
    return RogersResult(ensemble, rows, records)


# --------------------------------------------------------------------------
# empty probability


@dataclass(frozen=True)
class EmptyProbResult:
    rows: list
    slope: float
    slope_bound: float
    decay_ok: bool
    records: list


def empty_probability_experiment(
    n: int,
    volumes,
    samples: int,
    seed: int,
    r: float = 2.0,
    workers: int = 1,
) -> EmptyProbResult:
    """Empirical P(no nonzero lattice point in the volume-V ball) per V.

    Wilson intervals per row; the log-log slope across the grid is fit
    with zero frequencies clamped to 0.5/samples, and compared against
    the bound shape V^(1-r) with half a unit of slack.
    """
    if len(volumes) < 2:
        raise ValueError("need at least two volumes for the decay fit")
    rows, records = [], []
    for vi, volume in enumerate(volumes):
        sub = siegel_mean_experiment(
            n, float(volume), samples, mix_seed(seed, vi), "lattice", workers
        )
        empties = [1 if rec["nonzero"] == 0 else 0 for rec in sub.records]
        k = int(sum(empties))
        lo, hi = wilson_interval(k, samples)
        rows.append(
            {
                "volume": float(volume),
                "empty_frequency": k / samples,
                "wilson_low": lo,
                "wilson_high": hi,
            }
        )
        for rec, e in zip(sub.records, empties):
            records.append(
                {"volume": float(volume), "sample": rec["sample"], "empty": bool(e)}
            )
    # least-squares slope in log2-log2 coordinates, zero rows clamped
    clamp = 0.5 / samples
    xs = np.log2([row["volume"] for row in rows])
    ys = np.log2([max(row["empty_frequency"], clamp) for row in rows])
    slope = float(np.polyfit(xs, ys, 1)[0])
    decay_ok = rows[-1]["empty_frequency"] <= rows[0]["empty_frequency"]
    return EmptyProbResult(rows, slope, -(r - 1.0) + 0.5, decay_ok, records)


# --------------------------------------------------------------------------
# counting ratio


@dataclass(frozen=True)
class RatioResult:
    threshold: float
    constant: float
    rows: list
    first_ratio: float | None
    final_ratio: float | None


def counting_ratio_experiment(
    g: UnimodularMap,
    f: TargetFunction,
    psi: ApproxFunction,
    norm: Norm,
    point_class: PointClass,
    schedule: DyadicSchedule,
) -> RatioResult:
    """Lattice count over the sublevel shell vs c_P times its volume.

    Counts run in the image space (the region lives there); volumes come
    from the family's closed form over the same shell (M, t_k].  Radii at
    or below the threshold M produce rows with a missing ratio rather
    than 0/0.  Only meaningful in the divergent regime; convergent input
    is rejected.
    """
    if classify_series(f, psi, "asymptotic") is not Verdict.DIVERGES:
        raise ValueError(
            "counting-ratio experiment needs the divergent (infinite measure) regime"
        )
    m_thr = threshold_M(f, psi)
    c = _SIEGEL_CONSTANT[point_class](f.n)
    rows = []
    ratios = []
    for t in schedule.values():
        if t <= m_thr * (1.0 + 1e-9):
            rows.append({"t": float(t), "count": 0, "reference": 0.0, "ratio": None})
            continue
        res = count_solutions(
            CountQuery(
                g=g,
                f=f,
                bound=psi,
                norm=norm,
                point_class=point_class,
                t0=m_thr,
                t=float(t),
                shell_space="w",
            )
        )
        vol = shell_volume(f, psi, norm, m_thr, float(t)).value
        reference = c * vol
        ratio = None if (res.count == 0 and reference == 0.0) else res.count / reference
        rows.append(
            {
                "t": float(t),
                "count": int(res.count),
                "reference": reference,
                "ratio": ratio,
            }
        )
        if ratio is not None:
            ratios.append(ratio)
    return RatioResult(
        m_thr, c, rows, ratios[0] if ratios else None, ratios[-1] if ratios else None
    )


# --------------------------------------------------------------------------
# zero-full dichotomy


@dataclass(frozen=True)
class ZeroFullResult:
    fraction: float
    verdict: Verdict
    records: list


def _zero_full_sample(args):
    f, psi, norm, point_class, t_split, t_max, seed, index = args
    rng = np.random.default_rng(mix_seed(seed, index))
    g = sample_sl(f.n, rng)
    res = count_solutions(
        CountQuery(
            g=g,
            f=f,
            bound=psi,
            norm=norm,
            point_class=point_class,
            t0=t_split,
            t=t_max,
            stop_after_first=True,
        )
    )
    return {
        "sample": index,
        "hit": res.count > 0,
        "witness": list(res.first_witness) if res.first_witness else None,
    }


def zero_full_experiment(
    f: TargetFunction,
    psi: ApproxFunction,
    norm: Norm,
    point_class: PointClass,
    t_split: float,
    t_max: float,
    samples: int,
    seed: int,
    workers: int = 1,
) -> ZeroFullResult:
    """Fraction of sampled g with a solution |f(g v)| <= psi(nu(v)) in the
    shell (T_split, T_max]; near 1 in the divergent regime, near 0 in the
    convergent one as the split grows."""
    if not t_split < t_max:
        raise ValueError(f"need T_split < T_max, got ({t_split}, {t_max})")
    payloads = [
        (f, psi, norm, point_class, float(t_split), float(t_max), seed, i)
        for i in range(samples)
    ]
    records = _run_indexed(_zero_full_sample, payloads, workers)
    fraction = sum(1 for r in records if r["hit"]) / samples
    return ZeroFullResult(fraction, classify_series(f, psi, "asymptotic"), records)


# --------------------------------------------------------------------------
# uniform approximability


@dataclass(frozen=True)
class UniformResult:
    pass_fraction: float
    checkpoints: list
    records: list


def _uniform_sample(args):
    f, psi, norm, point_class, ts, seed, index = args
    rng = np.random.default_rng(mix_seed(seed, index))
    g = sample_sl(f.n, rng)
    successes = []
    for t in ts:
        eps = tuple(float(x) for x in psi(t))
        res = count_solutions(
            CountQuery(
                g=g,
                f=f,
                bound=eps,
                norm=norm,
                point_class=point_class,
                t0=0.0,
                t=float(t),
                stop_after_first=True,
            )
        )
        successes.append(res.count > 0)
    k_star = None
    for k in range(len(ts), 0, -1):
        if not successes[k - 1]:
            break
        k_star = k - 1
    return {"sample": index, "successes": successes, "k_star": k_star}


def uniform_approx_experiment(
    f: TargetFunction,
    psi: ApproxFunction,
    norm: Norm,
    point_class: PointClass,
    schedule: DyadicSchedule,
    samples: int,
    seed: int,
    workers: int = 1,
) -> UniformResult:
    """Per sample and checkpoint t_k, checks whether some point of the class
    has nu(v) <= t_k and |f(g v)| <= psi(t_k) componentwise (a fixed
    tolerance per checkpoint).  k_star is the first index from which every
    later check passes; a sample passes if k_star exists in the schedule.
    """
    ts = tuple(schedule.values())
    payloads = [(f, psi, norm, point_class, ts, seed, i) for i in range(samples)]
    records = _run_indexed(_uniform_sample, payloads, workers)
    passed = sum(1 for r in records if r["k_star"] is not None)
    checkpoints = [
        {
            "t": float(t),
            "success_fraction": sum(1 for r in records if r["successes"][k]) / samples,
        }
        for k, t in enumerate(ts)
    ]
    return UniformResult(passed / samples, checkpoints, records)


# --------------------------------------------------------------------------
# componentwise band systems


@dataclass(frozen=True)
class KGSystemResult:
    verdict: Verdict
    rows: list
    records: list


def _kg_sample(args):
    f, bound, norm, point_class, ts, seed, index = args
    rng = np.random.default_rng(mix_seed(seed, index))
    g = sample_sl(f.n, rng)
    counts = []
    for t in ts:
        res = count_solutions(
            CountQuery(
                g=g,
                f=f,
                bound=bound,
                norm=norm,
                point_class=point_class,
                t0=0.0,
                t=float(t),
            )
        )
        counts.append(int(res.count))
    return {"sample": index, "counts": counts}


def kg_system_experiment(
    psis,
    n: int,
    point_class: PointClass,
    schedule: DyadicSchedule,
    samples: int,
    seed: int,
    workers: int = 1,
) -> KGSystemResult:
    """Componentwise simultaneous system |(g v)_i| <= psi_i(nu(v)) for
    i < len(psis), realized as a vector of single-coordinate bands; counts
    per checkpoint alongside the analytic classification."""
    psis = list(psis)
    l = len(psis)
    if not 1 <= l < n:
        raise ValueError(f"need 1 <= number of components < n, got {l}")
    f = VectorOf(tuple(MaxPower((1.0,), n, (i,)) for i in range(l)))
    bound = ApproxFunction(tuple(p.scalar() for p in psis))
    norm = max_norm(n)
    verdict = classify_series(f, bound, "asymptotic")
    ts = tuple(schedule.values())
    payloads = [(f, bound, norm, point_class, ts, seed, i) for i in range(samples)]
    records = _run_indexed(_kg_sample, payloads, workers)
    rows = []
    for k, t in enumerate(ts):
        summary = StatSummary.from_values([r["counts"][k] for r in records])
        rows.append({"t": float(t), "mean_count": summary.mean, "stderr": summary.stderr})
    return KGSystemResult(verdict, rows, records)


# --------------------------------------------------------------------------
# norm independence


@dataclass(frozen=True)
class NormCheckResult:
    rows: list
    trend_a: str
    trend_b: str
    agree: bool


def _trend_label(first: float, last: float, noise: float) -> str:
    if last > first * 1.15 + noise:
        return "growing"
    if last < first * 0.85 - noise:
        return "shrinking"
    return "flat"


def norm_independence_check(
    f: TargetFunction,
    psi: ApproxFunction,
    norm_a: Norm,
    norm_b: Norm,
    scales,
    samples: int,
    seed: int,
) -> NormCheckResult:
    """Monte Carlo volumes of the sublevel region over dyadic shells
    (S, 2S] under two radius norms; the finiteness dichotomy is norm
    independent, so both volume series should grow together or vanish
    together across the scale grid."""
    scales = [float(s) for s in scales]
    if len(scales) < 2:
        raise ValueError("need at least two scales")
    rows = []
    for si, s in enumerate(scales):
        mc_a = monte_carlo_region_volume(
            f, psi, norm_a, outer=2.0 * s, samples=samples, seed=mix_seed(seed, si), inner=s
        )
        mc_b = monte_carlo_region_volume(
            f, psi, norm_b, outer=2.0 * s, samples=samples, seed=mix_seed(seed, si), inner=s
        )
        rows.append(
            {
                "scale": s,
                "volume_a": mc_a.value,
                "stderr_a": mc_a.stderr,
                "volume_b": mc_b.value,
                "stderr_b": mc_b.stderr,
            }
        )
    noise_a = 3.0 * (rows[0]["stderr_a"] + rows[-1]["stderr_a"])
    noise_b = 3.0 * (rows[0]["stderr_b"] + rows[-1]["stderr_b"])
    trend_a = _trend_label(rows[0]["volume_a"], rows[-1]["volume_a"], noise_a)
    trend_b = _trend_label(rows[0]["volume_b"], rows[-1]["volume_b"], noise_b)
    return NormCheckResult(rows, trend_a, trend_b, trend_a == trend_b)


# --------------------------------------------------------------------------
# windowed sandwich (limsup shape)


@dataclass(frozen=True)
class WindowConstants:
    """Realized constants of a windowed batch: operator-norm bound D, shift
    bound E, and the regularity-transfer factors C, F, J = C * F."""

    op_bound: float
    shift_bound: float
    reg_a: float
    reg_b: float
    reg_steps: int
    transfer_c: float
    plateau_f: float
    inflation_j: float


def window_constants(batch, norm: Norm, psi: ApproxFunction) -> WindowConstants:
    d_k = 1.0
    e_k = 0.0
    for g in batch:
        d_k = max(
            d_k,
            operator_norm(g.h, norm).upper,
            operator_norm(g.inverse_h(), norm).upper,
        )
        e_k = max(e_k, float(norm(g.z)))
    a, b, _ = regularity_witness(psi)
    steps = 0
    while a**steps < d_k:
        steps += 1
    c_k = b ** (-steps)
    if e_k == 0.0:
        f_k = 1.0
    else:
        pivot = a * e_k / (a - 1.0)
        ratios = psi(0.0) / psi(pivot)
        f_k = max(1.0 / b, float(np.max(ratios)))
    return WindowConstants(d_k, e_k, a, b, steps, c_k, f_k, c_k * f_k)


@dataclass(frozen=True)
class SandwichResult:
    constants: WindowConstants
    pass_fraction: float
    records: list


def _sandwich_sample(args):
    f, psi, norm, point_class, t_lo, t_hi, seed, index, window = args
    rng = np.random.default_rng(mix_seed(seed, index))
    g, _ = sample_in_window(f.n, rng, window, norm)
    res = count_solutions(
        CountQuery(
            g=g,
            f=f,
            bound=psi,
            norm=norm,
            point_class=point_class,
            t0=t_lo,
            t=t_hi,
        )
    )
    return {"sample": index, "count": int(res.count)}


def ratio_sandwich_check(
    f: TargetFunction,
    psi: ApproxFunction,
    norm: Norm,
    point_class: PointClass,
    schedule: DyadicSchedule,
    samples: int,
    seed: int,
    op_norm_bound: float = 4.0,
    shift_bound: float = 0.5,
    delta: float = 0.5,
    workers: int = 1,
) -> SandwichResult:
    """Windowed grids: the count over the shell (2 D E, T] should not exceed
    c_P (1+delta) times the closed-form volume with J-inflated tolerance
    over (E, D T + E], with (D, E, J) computed from the realized batch.
    Returns the per-sample comparisons; callers assert the majority."""
    window = CompactWindow(op_norm_bound, shift_bound)
    big_t = schedule.values()[-1]
    # realized constants need the batch first; draw it with the same seeds
    batch = []
    for i in range(samples):
        rng = np.random.default_rng(mix_seed(seed, i))
        g, _ = sample_in_window(f.n, rng, window, norm)
        batch.append(g)
    consts = window_constants(batch, norm, psi)
    t_lo = 2.0 * consts.op_bound * consts.shift_bound
    if t_lo >= big_t:
        raise ValueError("schedule top must exceed twice the window reach")
    inflated = ApproxFunction(
        tuple((c * consts.inflation_j, s, j) for c, s, j in psi.components)
    )
    m_thr = threshold_M(f, inflated)
    lo = max(consts.shift_bound, m_thr)
    hi = consts.op_bound * big_t + consts.shift_bound
    volume = shell_volume(f, inflated, norm, lo, hi).value
    c = _SIEGEL_CONSTANT[point_class](f.n)
    budget = c * (1.0 + delta) * volume
    payloads = [
        (f, psi, norm, point_class, t_lo, float(big_t), seed, i, window)
        for i in range(samples)
    ]
    records = _run_indexed(_sandwich_sample, payloads, workers)
    for r in records:
        r["budget"] = budget
        r["within"] = r["count"] <= budget
    frac = sum(1 for r in records if r["within"]) / samples
    return SandwichResult(consts, frac, records)
