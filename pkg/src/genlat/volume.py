"""Exact volumes of sublevel shells, Monte Carlo cross-checks, classifiers.

For a target form f of one of the power families, a scalar bound function
psi, and the family's canonical block norm nu, the shell volume

    m( { x : |f(x)| <= psi(nu(x)),  S < nu(x) <= T } )

reduces to a one-dimensional integral once S is past the threshold radius
where psi(z) < z^degree:

  * signed power form, f = sum_{i<=p} |x_i|^d - sum_{i>p} |x_i|^d, nu the
    max of the two d-blocks:

        int_S^T z^(n-1) [ v_p v'_q (1 - (1 - psi(z)/z^d)^(p/d))
                        + v_q v'_p (1 - (1 - psi(z)/z^d)^(q/d)) ] dz,

    where v_k = (2 Gamma(1+1/d))^k / Gamma(1+k/d) is the unit-ball volume of
    the l^d norm on R^k and v'_k = k v_k its radial density factor;

  * coordinate product, f = x_1...x_n, nu the sup norm:

        2^n n int_S^T K_{n-2}(z, psi(z)) dz,

    with the kernel K_k(z, c) = integral of min(z, c/(z y_1...y_k)) over
    (0, z]^k, available in closed form (below);

  * max power, f = max |x_{c_i}|^{a_i} over l < n coordinates, nu the sup
    norm:  2^n (n-l) int_S^T psi(z)^a z^(n-l-1) dz with a = sum 1/a_i, and
    the componentwise variant with per-coordinate bounds psi_i replaces
    psi^a by prod_i psi_i(z)^(1/a_i).

Everything here is deterministic; Monte Carlo volumes draw from seeded,
chunked generators with a fixed reduction order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .core import (
    ApproxFunction,
    Bound,
    CoordinateProduct,
    DyadicSchedule,
    MaxPower,
    Norm,
    SignedPowerForm,
    TargetFunction,
    VectorOf,
    bound_values,
    mix_seed,
)

__all__ = [
    "Quadrature",
    "MCVolume",
    "Verdict",
    "adaptive_simpson",
    "gamma_fn",
    "zeta_fn",
    "unit_ball_volume_ld",
    "threshold_M",
    "i_k_closed_form",
    "shell_volume_signed_power",
    "shell_volume_product",
    "shell_volume_max_power",
    "shell_volume_component_bands",
    "shell_volume",
    "region_mask",
    "monte_carlo_region_volume",
    "b_set_volume",
    "classify_series",
    "criterion_terms",
    "partial_sums",
    "verification_matrix",
]


class Quadrature(NamedTuple):
    value: float
    error: float


def adaptive_simpson(
    fn: Callable[[float], float],
    a: float,
    b: float,
    abs_tol: float = 1e-10,
    rel_tol: float = 1e-8,
    max_depth: int = 60,
) -> Quadrature:
    """Adaptive Simpson integral of ``fn`` on [a, b] with an error estimate.

    Bisects until the Richardson error estimate of a panel drops under the
    panel's share of the tolerance (absolute, or relative to the running
    whole-interval magnitude); panels at the depth cap are accepted with
    their current estimate contributing to the reported error.
    """
    if not b >= a:
        raise ValueError(f"integration bounds out of order: [{a}, {b}]")
    if a == b:
        return Quadrature(0.0, 0.0)

    def simpson(x0: float, x2: float, f0: float, f1: float, f2: float) -> float:
        return (x2 - x0) / 6.0 * (f0 + 4.0 * f1 + f2)

    m = 0.5 * (a + b)
    fa, fm, fb = fn(a), fn(m), fn(b)
    whole = simpson(a, b, fa, fm, fb)
    # crude magnitude reference for the relative tolerance
    scale = abs(whole)

    total = 0.0
    err_total = 0.0
    stack = [(a, m, b, fa, fm, fb, whole, abs_tol, 0)]
    while stack:
        x0, x1, x2, f0, f1, f2, s, tol, depth = stack.pop()
        lm = 0.5 * (x0 + x1)
        rm = 0.5 * (x1 + x2)
        flm, frm = fn(lm), fn(rm)
        left = simpson(x0, x1, f0, flm, f1)
        right = simpson(x1, x2, f1, frm, f2)
        delta = left + right - s
        tol_here = max(tol, rel_tol * scale)
        if abs(delta) <= 15.0 * tol_here or depth >= max_depth:
            piece = left + right + delta / 15.0
            total += piece
            err_total += abs(delta) / 15.0
            scale = max(scale, abs(total))
        else:
            stack.append((x0, lm, x1, f0, flm, f1, left, tol / 2.0, depth + 1))
            stack.append((x1, rm, x2, f1, frm, f2, right, tol / 2.0, depth + 1))
    return Quadrature(total, err_total)


# --------------------------------------------------------------------------
# special functions


def gamma_fn(x: float) -> float:
    """Gamma function on (0, inf); rejects the nonpositive axis."""
    if not x > 0:
        raise ValueError(f"gamma_fn requires x > 0, got {x}")
    return math.gamma(x)


# Bernoulli numbers B_2, B_4, ... B_12 for the Euler-Maclaurin tail
_BERNOULLI = (1.0 / 6, -1.0 / 30, 1.0 / 42, -1.0 / 30, 5.0 / 66, -691.0 / 2730)


def zeta_fn(s: float, terms: int = 48) -> float:
    """Riemann zeta for real s > 1 by Euler-Maclaurin summation.

    With the cutoff at N = ``terms`` and six Bernoulli corrections the
    result is accurate to full double precision for s >= 2.
    """
    if not s > 1:
        raise ValueError(f"zeta_fn requires s > 1, got {s}")
    n = terms
    head = sum(k ** (-s) for k in range(1, n))
    tail = n ** (1.0 - s) / (s - 1.0) + 0.5 * n ** (-s)
    rising = s
    power = float(n) ** (-s - 1.0)
    fact = 2.0
    correction = 0.0
    for i, b in enumerate(_BERNOULLI, start=1):
        correction += b / fact * rising * power
        # advance (s)(s+1)...(s+2i) and N^(-s-2i-1), (2i+2)!
        rising *= (s + 2 * i - 1) * (s + 2 * i)
        power /= n * n
        fact *= (2 * i + 1) * (2 * i + 2)
    return head + tail + correction


def unit_ball_volume_ld(k: int, d: float | None) -> tuple[float, float]:
    """(volume, radial density factor) of the unit l^d ball in R^k.

    Returns (v_k, k v_k); d = None is the sup norm, giving (2^k, k 2^k).
    The radial factor is d/dR [ v_k R^k ] / R^(k-1), i.e. the (k-1)-content
    density of the unit sphere in the cone decomposition.
    """
    if int(k) != k or k < 0:
        raise ValueError(f"dimension must be a nonnegative integer, got {k}")
    if k == 0:
        return 1.0, 0.0
    if d is None:
        v = 2.0**k
    else:
        if not d >= 1:
            raise ValueError(f"exponent must be >= 1 or None, got {d}")
        v = (2.0 * gamma_fn(1.0 + 1.0 / d)) ** k / gamma_fn(1.0 + k / d)
    return v, k * v


# --------------------------------------------------------------------------
# threshold radius


def threshold_M(f: TargetFunction, psi: ApproxFunction, z_cap: float = 2.0**200) -> float:
    """Smallest safe shell start: radius past which psi_i(z) < z^(d_i) holds.

    d_i are the componentwise degrees of f.  Found by doubling scan and
    bisection (psi_i nonincreasing and z^d increasing make the crossing
    unique), padded by a 1.01 safety factor and clamped to at least 1.
    """
    if psi.component_count != f.component_count:
        raise ValueError(
            f"bound has {psi.component_count} components, target has {f.component_count}"
        )
    degrees = np.asarray(f.degrees)

    def clear(z: float) -> bool:
        return bool(np.all(psi(z) < z**degrees))

    if clear(1.0):
        return 1.0
    lo, hi = 1.0, 2.0
    while not clear(hi):
        lo, hi = hi, hi * 2.0
        if hi > z_cap:
            raise ValueError("bound function exceeds the power shell at every radius")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if clear(mid):
            hi = mid
        else:
            lo = mid
    return max(1.0, hi * 1.01)


def _require_shell(f: TargetFunction, psi: ApproxFunction, s_lo: float, t_hi: float) -> None:
    if not s_lo <= t_hi:
        raise ValueError(f"shell bounds out of order: ({s_lo}, {t_hi}]")
    m = threshold_M(f, psi)
    if s_lo < m * (1.0 - 1e-12):
        raise ValueError(
            f"closed forms need the shell to start past the threshold radius "
            f"{m:.6g}, got S={s_lo}"
        )


# --------------------------------------------------------------------------
# closed forms


def shell_volume_signed_power(
    f: SignedPowerForm,
    psi: ApproxFunction,
    s_lo: float,
    t_hi: float,
    **quad_opts,
) -> Quadrature:
    """Exact shell volume for the signed power family under its block norm."""
    if psi.component_count != 1:
        raise ValueError("signed power closed form takes a scalar bound")
    _require_shell(f, psi, s_lo, t_hi)
    p, q, d = f.p, f.q, f.d
    n = f.n
    v_p, vr_p = unit_ball_volume_ld(p, d)
    v_q, vr_q = unit_ball_volume_ld(q, d)

    def one_minus_pow(w: float, alpha: float) -> float:
        # 1 - (1-w)^alpha without cancellation for w near 0 (and near 1)
        if w >= 1.0:
            return 1.0
        return -math.expm1(alpha * math.log1p(-w))

    def integrand(z: float) -> float:
        w = float(psi(z)[0]) / z**d  # in (0, 1) past the threshold
        return z ** (n - 1) * (
            v_p * vr_q * one_minus_pow(w, p / d) + v_q * vr_p * one_minus_pow(w, q / d)
        )

    return adaptive_simpson(integrand, s_lo, t_hi, **quad_opts)


def i_k_closed_form(k: int, z: float, bound_value: float) -> float:
    """Closed form of the kernel K_k(z, c) = int_{(0,z]^k} min(z, c/(z prod y)) dy.

    Equals z^(k+1) when c >= z^(k+2) (the min saturates), and otherwise

        (c / z) * sum_{i=0}^{k} log^i( z^(k+2) / c ) / i!

    with the 0^0 = 1 convention at the seam.  k = 0 is the plain min.
    """
    if int(k) != k or k < 0:
        raise ValueError(f"k must be a nonnegative integer, got {k}")
    if not z > 0:
        raise ValueError(f"z must be positive, got {z}")
    if bound_value < 0:
        raise ValueError(f"bound value must be nonnegative, got {bound_value}")
    if bound_value == 0.0:
        return 0.0
    if bound_value >= z ** (k + 2):
        return float(z ** (k + 1))
    ratio = math.log(z ** (k + 2) / bound_value)
    acc = 1.0
    term = 1.0
    for i in range(1, k + 1):
        term *= ratio / i
        acc += term
    return bound_value / z * acc


def shell_volume_product(
    f: CoordinateProduct,
    psi: ApproxFunction,
    s_lo: float,
    t_hi: float,
    **quad_opts,
) -> Quadrature:
    """Exact shell volume for the coordinate product family under the sup norm."""
    if psi.component_count != 1:
        raise ValueError("coordinate product closed form takes a scalar bound")
    _require_shell(f, psi, s_lo, t_hi)
    n = f.n

    def integrand(z: float) -> float:
        return i_k_closed_form(n - 2, z, float(psi(z)[0]))

    q = adaptive_simpson(integrand, s_lo, t_hi, **quad_opts)
    scale = 2.0**n * n
    return Quadrature(scale * q.value, scale * q.error)


def shell_volume_max_power(
    f: MaxPower,
    psi: ApproxFunction,
    s_lo: float,
    t_hi: float,
    **quad_opts,
) -> Quadrature:
    """Exact shell volume for the max power family under the sup norm."""
    if psi.component_count != 1:
        raise ValueError("max power closed form takes a scalar bound")
    _require_shell(f, psi, s_lo, t_hi)
    n = f.n
    ell = len(f.exponents)
    a = sum(1.0 / ai for ai in f.exponents)

    def integrand(z: float) -> float:
        return float(psi(z)[0]) ** a * z ** (n - ell - 1)

    q = adaptive_simpson(integrand, s_lo, t_hi, **quad_opts)
    scale = 2.0**n * (n - ell)
    return Quadrature(scale * q.value, scale * q.error)


def shell_volume_component_bands(
    f: VectorOf,
    psi: ApproxFunction,
    s_lo: float,
    t_hi: float,
    **quad_opts,
) -> Quadrature:
    """Exact shell volume of a simultaneous system |x_{c_i}|^{a_i} <= psi_i.

    ``f`` must be a vector of single-coordinate max power parts with
    pairwise distinct coordinates; the bound is componentwise.
    """
    coords: list[int] = []
    exps: list[float] = []
    for part in f.parts:
        if not isinstance(part, MaxPower) or len(part.exponents) != 1:
            raise ValueError("component bands need single-coordinate max power parts")
        coords.append(part.resolved_coords()[0])
        exps.append(part.exponents[0])
    if len(set(coords)) != len(coords):
        raise ValueError(f"band coordinates must be distinct, got {coords}")
    if psi.component_count != len(f.parts):
        raise ValueError("need one bound component per band")
    _require_shell(f, psi, s_lo, t_hi)
    n = f.n
    ell = len(coords)
    if ell >= n:
        raise ValueError("need at least one unconstrained coordinate")
    inv = np.asarray([1.0 / a for a in exps])

    def integrand(z: float) -> float:
        return float(np.prod(psi(z) ** inv)) * z ** (n - ell - 1)

    q = adaptive_simpson(integrand, s_lo, t_hi, **quad_opts)
    scale = 2.0**n * (n - ell)
    return Quadrature(scale * q.value, scale * q.error)


def shell_volume(
    f: TargetFunction,
    psi: ApproxFunction,
    norm: Norm,
    s_lo: float,
    t_hi: float,
    **quad_opts,
) -> Quadrature:
    """Family dispatcher; requires ``norm`` to be the family's canonical norm."""
    if norm != f.canonical_norm():
        raise ValueError(
            "closed forms hold under the family norm "
            f"({f.canonical_norm()}), got {norm}"
        )
    if isinstance(f, SignedPowerForm):
        return shell_volume_signed_power(f, psi, s_lo, t_hi, **quad_opts)
    if isinstance(f, CoordinateProduct):
        return shell_volume_product(f, psi, s_lo, t_hi, **quad_opts)
    if isinstance(f, MaxPower):
        return shell_volume_max_power(f, psi, s_lo, t_hi, **quad_opts)
    if isinstance(f, VectorOf):
        return shell_volume_component_bands(f, psi, s_lo, t_hi, **quad_opts)
    raise TypeError(f"unsupported target {f!r}")


# --------------------------------------------------------------------------
# Monte Carlo


def region_mask(
    f: TargetFunction,
    bound: Bound,
    norm: Norm,
    xs: np.ndarray,
    inner: float = 0.0,
    outer: float = math.inf,
) -> np.ndarray:
    """Boolean membership of the rows of ``xs`` in the bounded sublevel shell."""
    zs = norm.eval_many(xs)
    mask = (zs > inner) & (zs <= outer)
    if not mask.any():
        return mask
    tol = bound_values(bound, zs[mask], f.component_count)
    vals = np.abs(f.evaluate_many(xs[mask]))
    mask[mask.nonzero()[0]] = np.all(vals <= tol, axis=1)
    return mask


@dataclass(frozen=True)
class MCVolume:
    value: float
    stderr: float
    hits: int
    samples: int
    degenerate: bool  # no information at this sample size (0 or all hits)


def monte_carlo_region_volume(
    f: TargetFunction,
    bound: Bound,
    norm: Norm,
    outer: float,
    samples: int,
    seed: int = 0,
    inner: float = 0.0,
    chunk: int = 1_000_000,
) -> MCVolume:
    """Volume of { inner < nu(x) <= outer, |f(x)| <= bound } by rejection.

    Draws uniformly from the bounding cube [-outer, outer]^n (block norms
    dominate the sup norm, so the cube contains the region).  Work proceeds
    in fixed chunks with per-chunk derived generators and an order-fixed
    reduction, so results are reproducible for a given seed.
    """
    if not samples > 0:
        raise ValueError("need a positive sample count")
    if not 0.0 <= inner < outer:
        raise ValueError(f"need 0 <= inner < outer, got ({inner}, {outer})")
    n = f.n
    if norm.dim != n:
        raise ValueError(f"norm dimension {norm.dim} does not match target n={n}")
    hits = 0
    done = 0
    index = 0
    while done < samples:
        take = min(chunk, samples - done)
        rng = np.random.default_rng(mix_seed(seed, index))
        xs = rng.uniform(-outer, outer, size=(take, n))
        hits += int(region_mask(f, bound, norm, xs, inner, outer).sum())
        done += take
        index += 1
    box = (2.0 * outer) ** n
    p = hits / samples
    return MCVolume(
        value=box * p,
        stderr=box * math.sqrt(max(p * (1.0 - p), 0.0) / samples),
        hits=hits,
        samples=samples,
        degenerate=hits == 0 or hits == samples,
    )


def b_set_volume(
    f: TargetFunction,
    eps: Sequence[float],
    norm: Norm,
    big_t: float,
    samples: int = 200_000,
    seed: int = 0,
) -> tuple[float, float]:
    """Volume of { nu(x) <= T, |f(x)| <= eps }: closed form past the
    threshold radius plus Monte Carlo on the inner core.

    Falls back to pure Monte Carlo when the norm is not the family norm or
    the whole region sits inside the core.  Returns (value, error) where the
    error combines quadrature and Monte Carlo standard error.
    """
    eps = tuple(float(e) for e in eps)
    if len(eps) != f.component_count:
        raise ValueError(f"expected {f.component_count} tolerance components")
    if any(e < 0 for e in eps):
        raise ValueError("tolerances must be nonnegative")
    if not big_t > 0:
        raise ValueError("need T > 0")
    if any(e == 0.0 for e in eps):
        return 0.0, 0.0  # the zero set of each family is Lebesgue-null
    const = ApproxFunction(tuple((e, 0.0, 0) for e in eps))
    closed_ok = norm == f.canonical_norm()
    split = threshold_M(f, const) if closed_ok else big_t
    split = min(split, big_t)
    mc = monte_carlo_region_volume(f, eps, norm, split, samples, seed=seed)
    if split >= big_t:
        return mc.value, 3.0 * mc.stderr
    q = shell_volume(f, const, norm, split, big_t)
    return mc.value + q.value, 3.0 * mc.stderr + q.error


# --------------------------------------------------------------------------
# convergence classification

# Every criterion reduces to one of two elementary facts:
#   * int^inf log^J(z) z^(-P) dz converges iff P > 1 (never at P = 1 for
#     J >= 0);
#   * sum_k (alpha k^beta rho^k)^(1-r) with r > 1 converges iff rho > 1, or
#     rho = 1 and beta (r-1) > 1.
# The parameters (P, J) and (beta, log2 rho) below are exact in the family
# and bound parameters, so the classification is exact whenever those are
# exactly representable.


class Verdict(Enum):
    CONVERGES = "converges"
    DIVERGES = "diverges"


def _scalar_params(psi: ApproxFunction) -> tuple[float, float, int]:
    if psi.component_count != 1:
        raise ValueError("classification takes one bound component per band")
    return psi.scalar()


def _integral_verdict(p_pow: float, j_log: float) -> Verdict:
    if p_pow > 1.0:
        return Verdict.CONVERGES
    # at the critical power the log factor is nonnegative here, so divergence
    return Verdict.DIVERGES


def _series_verdict(gamma: float, beta: float, r: float) -> Verdict:
    # terms (k^beta 2^(gamma k))^(1-r)
    if gamma > 0.0:
        return Verdict.CONVERGES
    if gamma < 0.0:
        return Verdict.DIVERGES
    return Verdict.CONVERGES if beta * (r - 1.0) > 1.0 else Verdict.DIVERGES


def _band_exponents(f: VectorOf, psi: ApproxFunction) -> tuple[float, float, int]:
    """(sum s_i/a_i, sum j_i/a_i, l) for a componentwise band system."""
    if psi.component_count != len(f.parts):
        raise ValueError("need one bound component per band")
    s_eff = 0.0
    j_eff = 0.0
    for part, (_, s, j) in zip(f.parts, psi.components):
        if not isinstance(part, MaxPower) or len(part.exponents) != 1:
            raise ValueError("component bands need single-coordinate max power parts")
        s_eff += s / part.exponents[0]
        j_eff += j / part.exponents[0]
    return s_eff, j_eff, len(f.parts)


def classify_series(
    f: TargetFunction,
    psi: ApproxFunction,
    criterion: str = "asymptotic",
    r: float = 2.0,
) -> Verdict:
    """Exact convergence/divergence of the family's criterion.

    ``criterion`` = "asymptotic" classifies the volume integral governing
    whether the full region has finite measure; "uniform" classifies the
    dyadic series sum_k (term_k)^(1-r) governing the uniform statement along
    t_k = 2^k checkpoints (r > 1 is the variance-bound exponent).
    """
    if criterion not in ("asymptotic", "uniform"):
        raise ValueError(f"unknown criterion {criterion!r}")
    if criterion == "uniform" and not r > 1.0:
        raise ValueError(f"uniform criterion needs r > 1, got {r}")

    if isinstance(f, SignedPowerForm):
        _, s, j = _scalar_params(psi)
        n, d = f.n, f.d
        if criterion == "asymptotic":
            return _integral_verdict(s - (n - d - 1.0), j)
        if d == n:
            return _series_verdict(-s, j + 1.0, r)
        return _series_verdict(n - d - s, float(j), r)

    if isinstance(f, CoordinateProduct):
        _, s, j = _scalar_params(psi)
        n = f.n
        if criterion == "asymptotic":
            return _integral_verdict(s + 1.0, j + n - 2.0)
        if n == 2:
            return _series_verdict(-s, j + 1.0, r)
        return _series_verdict(-s, j + n - 1.0, r)

    if isinstance(f, MaxPower):
        _, s, j = _scalar_params(psi)
        n, ell = f.n, len(f.exponents)
        a = sum(1.0 / ai for ai in f.exponents)
        if criterion == "asymptotic":
            return _integral_verdict(s * a - (n - ell - 1.0), j * a)
        return _series_verdict(n - ell - s * a, j * a, r)

    if isinstance(f, VectorOf):
        s_eff, j_eff, ell = _band_exponents(f, psi)
        n = f.n
        if criterion == "asymptotic":
            return _integral_verdict(s_eff - (n - ell - 1.0), j_eff)
        return _series_verdict(n - ell - s_eff, j_eff, r)

    raise TypeError(f"unsupported target {f!r}")


def criterion_terms(
    f: TargetFunction,
    psi: ApproxFunction,
    schedule: DyadicSchedule,
    r: float = 2.0,
) -> list[float]:
    """Numeric uniform-criterion terms X_k^(1-r) along the schedule.

    X_k is the exact volume-scale factor of the k-th checkpoint shell for
    the family (the quantity whose dyadic series the classifier decides).
    """
    if not r > 1.0:
        raise ValueError(f"need r > 1, got {r}")
    out = []
    for k, t in zip(schedule.indices(), schedule.values()):
        if isinstance(f, SignedPowerForm):
            pv = float(psi(t)[0])
            x = k * pv if f.d == f.n else t ** (f.n - f.d) * pv
        elif isinstance(f, CoordinateProduct):
            pv = float(psi(t)[0])
            if f.n == 2:
                x = k * pv
            else:
                arg = t * pv ** (-1.0 / f.n)
                if arg <= 1.0:
                    raise ValueError(
                        f"checkpoint t={t} too small for the product criterion"
                    )
                x = pv * math.log(arg) ** (f.n - 1)
        elif isinstance(f, MaxPower):
            a = sum(1.0 / ai for ai in f.exponents)
            x = t ** (f.n - len(f.exponents)) * float(psi(t)[0]) ** a
        elif isinstance(f, VectorOf):
            _band_exponents(f, psi)  # validates the shape
            vals = psi(t)
            prod = 1.0
            for part, v in zip(f.parts, vals):
                prod *= float(v) ** (1.0 / part.exponents[0])
            x = t ** (f.n - len(f.parts)) * prod
        else:
            raise TypeError(f"unsupported target {f!r}")
        if not x > 0:
            raise ValueError(f"nonpositive criterion term at k={k}")
        out.append(x ** (1.0 - r))
    return out


def partial_sums(terms: Sequence[float]) -> list[float]:
    """Cumulative sums, for convergence diagnostics."""
    return list(np.cumsum(np.asarray(list(terms), dtype=float)))


def verification_matrix() -> list[tuple[str, TargetFunction, ApproxFunction, float, float]]:
    """The nine-point cross-validation grid: three parameter points per
    closed-form family, each resolvable by rejection Monte Carlo (shell
    measure at least ~1e-4 of the sampling box).  Rows are
    (label, f, psi, s_lo, t_hi); the norm is always the family norm."""
    pl = lambda c, s, j: ApproxFunction(((float(c), float(s), int(j)),))
    return [
        ("spf-flat", SignedPowerForm(1, 1, 2), pl(0.5, 0.0, 0), 2.0, 6.0),
        ("spf-decay", SignedPowerForm(2, 1, 2), pl(1.0, 0.5, 0), 2.0, 5.0),
        ("spf-log", SignedPowerForm(2, 2, 3), pl(0.8, 1.0, 1), 1.5, 4.0),
        ("prod-flat", CoordinateProduct(2), pl(0.5, 0.0, 0), 1.5, 5.0),
        ("prod-log", CoordinateProduct(3), pl(1.0, 1.0, 1), 2.0, 4.0),
        ("prod-decay", CoordinateProduct(3), pl(2.0, 0.5, 0), 1.5, 4.0),
        ("maxpow-pair", MaxPower((2.0, 1.5), 3), pl(1.0, 0.5, 0), 2.0, 5.0),
        ("maxpow-slab", MaxPower((1.0,), 2), pl(0.7, 0.0, 0), 1.0, 4.0),
        ("maxpow-wide", MaxPower((2.0, 1.0), 4), pl(1.0, 1.0, 0), 2.0, 5.0),
    ]
