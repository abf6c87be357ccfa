"""Exact counting of integer points in bounded sublevel regions.

A count query asks for the number of integer vectors v of a point class
(all nonzero, primitive, or all) whose radius sits in a shell and whose
image w = h v + z lands in the tolerance region of a target form:

    T0 < nu(.) <= T   and   |f(w)| <= bound(nu(.)) componentwise,

where the radius argument "." is either v itself (shell_space "v", the
natural space for approximability statements) or w (shell_space "w", the
natural space for lattice-point counting against region volumes).

Strategy: enumerate integer prefixes (all coordinates except one solved
coordinate) over the shell's bounding box; for each prefix the image w is
affine in the solved coordinate t, so an over-approximate constraint
|f(w)| <= eps* cuts out a small union of t-intervals, where eps* bounds
the tolerance over every radius in the shell.
Every integer candidate in those intervals is then re-filtered against the
exact predicate.  Double precision plus the interval expansion margin is
the correctness contract; counts are exact wherever f values at integer
points are not within 1e-9 of the tolerance boundary.

Interval solving: degree-2 signed power forms and linear band systems have
closed-form vectorized solvers (these carry the large-T experiments);
integer-degree forms and coordinate products go through polynomial root
isolation per prefix; anything else (non-integer degree with an indefinite
form) falls back to scanning the solved coordinate, flagged in the result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .core import (
    ApproxFunction,
    Bound,
    CoordinateProduct,
    MaxPower,
    Norm,
    PointClass,
    SignedPowerForm,
    TargetFunction,
    VectorOf,
    bound_values,
)
from .haar import UnimodularMap, lll_reduce

__all__ = [
    "CountQuery",
    "CountResult",
    "count_solutions",
    "brute_force_count",
    "is_primitive",
    "NormBall",
    "IntegerBox",
    "lattice_points_in_region",
]

# endpoint expansion before integer rounding; exactness restored by refilter
_EXPAND = 1e-9


@dataclass(frozen=True)
class CountQuery:
    g: UnimodularMap
    f: TargetFunction
    bound: Bound
    norm: Norm
    point_class: PointClass
    t0: float
    t: float
    shell_space: str = "v"  # radius measured on v, or on w = g(v)
    stop_after_first: bool = False

    def __post_init__(self) -> None:
        if not 0.0 <= self.t0 < self.t:
            raise ValueError(f"need 0 <= T0 < T, got ({self.t0}, {self.t})")
        n = self.f.n
        if self.g.n != n or self.norm.dim != n:
            raise ValueError(
                f"dimension mismatch: f has n={n}, g has {self.g.n}, norm {self.norm.dim}"
            )
        if self.shell_space not in ("v", "w"):
            raise ValueError(f"shell_space must be 'v' or 'w', got {self.shell_space!r}")
        # validates the component count
        bound_values(self.bound, np.asarray([1.0]), self.f.component_count)


@dataclass(frozen=True)
class CountResult:
    count: int
    first_witness: tuple[int, ...] | None
    visited: int  # prefixes examined plus integer candidates tested
    full_scan: bool = False  # true when the interval solver fell back to scanning

    def __post_init__(self) -> None:
        if (self.count == 0) != (self.first_witness is None):
            raise ValueError("count = 0 iff there is no witness")


def is_primitive(v) -> bool:
    """gcd of all coordinates is 1; the zero vector is not primitive."""
    arr = np.abs(np.asarray(v, dtype=np.int64))
    return int(np.gcd.reduce(arr)) == 1


# --------------------------------------------------------------------------
# shared exact refilter


def _exact_mask(q: CountQuery, vs: np.ndarray) -> np.ndarray:
    """Boolean mask of rows of integer matrix ``vs`` satisfying the query."""
    if len(vs) == 0:
        return np.zeros(0, dtype=bool)
    ws = q.g.apply(vs.astype(float))
    radii = q.norm.eval_many(vs.astype(float) if q.shell_space == "v" else ws)
    mask = (radii > q.t0) & (radii <= q.t)
    if q.point_class is PointClass.ALL_NONZERO:
        mask &= (vs != 0).any(axis=1)
    elif q.point_class is PointClass.PRIMITIVE:
        mask &= np.gcd.reduce(np.abs(vs), axis=1) == 1
    if not mask.any():
        return mask
    idx = mask.nonzero()[0]
    tol = bound_values(q.bound, radii[idx], q.f.component_count)
    vals = np.abs(q.f.evaluate_many(ws[idx]))
    mask[idx] = np.all(vals <= tol, axis=1)
    return mask


def _coarse_tolerance(q: CountQuery) -> np.ndarray:
    """Componentwise upper bound of the tolerance over the whole shell.

    Power-log bounds are not pointwise monotone when the log exponent is
    positive, so each factor is maximized separately: the log factor at T,
    the power factor at max(T0, 1) (the plateau covers radii below 1).
    """
    if isinstance(q.bound, ApproxFunction):
        zlo = max(q.t0, 1.0)
        return np.asarray(
            [
                c * math.log(math.e + q.t) ** j * zlo ** (-s)
                for c, s, j in q.bound.components
            ]
        )
    return bound_values(q.bound, np.asarray([q.t0]), q.f.component_count)[0]


# --------------------------------------------------------------------------
# prefix geometry


def _centered(limit: int) -> np.ndarray:
    """0, 1, -1, 2, -2, ... up to |limit|; small vectors come first so
    early-exit witness searches terminate quickly."""
    out = np.empty(2 * limit + 1, dtype=np.int64)
    out[0] = 0
    k = np.arange(1, limit + 1)
    out[1::2] = k
    out[2::2] = -k
    return out


def _prefix_box(q: CountQuery) -> np.ndarray:
    """Per-coordinate integer bounds |v_i| <= b_i covering all solutions."""
    n = q.f.n
    if q.shell_space == "v":
        # block norms dominate the sup norm
        return np.full(n, math.floor(q.t), dtype=np.int64)
    hinv = q.g.inverse_h()
    reach = np.abs(hinv) @ (q.t + np.abs(q.g.z))
    return np.floor(reach + _EXPAND).astype(np.int64)


def _solved_index(h: np.ndarray) -> int:
    """Index of the coordinate solved in closed form: the column of h with
    the largest Euclidean norm, keeping the affine coefficient away from 0."""
    return int(np.argmax((h * h).sum(axis=0)))


# --------------------------------------------------------------------------
# interval machinery (vectorized slots)

# A slot pair (lo, hi) with lo > hi denotes the empty interval.


def _quadratic_slots(
    a: float, b: np.ndarray, c: np.ndarray, eps: float
) -> tuple[np.ndarray, ...]:
    """Solution of |a t^2 + b t + c| <= eps as up to two interval slots.

    a is a per-query scalar (the prefix only shifts the linear/constant
    coefficients); b, c are per-prefix arrays.
    """
    m = len(b)
    inf = np.inf
    if abs(a) < 1e-12:
        # linear per prefix
        lo1 = np.full(m, inf)
        hi1 = np.full(m, -inf)
        nz = np.abs(b) > 1e-12
        lo1[nz] = (-eps - c[nz]) / b[nz]
        hi1[nz] = (eps - c[nz]) / b[nz]
        flip = nz & (lo1 > hi1)
        lo1[flip], hi1[flip] = hi1[flip].copy(), lo1[flip].copy()
        const_ok = ~nz & (np.abs(c) <= eps)
        lo1[const_ok], hi1[const_ok] = -inf, inf
        lo2 = np.full(m, inf)
        hi2 = np.full(m, -inf)
        return lo1, hi1, lo2, hi2
    if a < 0:
        a, b, c = -a, -b, -c
    # outer set {quad <= eps}: between the roots; the closed comparison keeps
    # tangency points so eps = 0 solution sets survive
    disc_out = b * b - 4.0 * a * (c - eps)
    has_out = disc_out >= 0.0
    root = np.sqrt(np.maximum(disc_out, 0.0))
    out_lo = np.where(has_out, (-b - root) / (2.0 * a), np.inf)
    out_hi = np.where(has_out, (-b + root) / (2.0 * a), -np.inf)
    # inner hole {quad < -eps}: strictly between its roots
    disc_in = b * b - 4.0 * a * (c + eps)
    has_in = disc_in > 0.0
    root_in = np.sqrt(np.maximum(disc_in, 0.0))
    in_lo = np.where(has_in, (-b - root_in) / (2.0 * a), np.inf)
    in_hi = np.where(has_in, (-b + root_in) / (2.0 * a), -np.inf)
    # [out_lo, out_hi] minus (in_lo, in_hi)
    lo1 = out_lo
    hi1 = np.where(has_in, np.minimum(out_hi, in_lo), out_hi)
    lo2 = np.where(has_in, np.maximum(out_lo, in_hi), np.inf)
    hi2 = np.where(has_in, out_hi, -np.inf)
    return lo1, hi1, lo2, hi2


def _band_slots(
    alphas: np.ndarray, betas: np.ndarray, radii: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Intersection over bands |alpha_i + beta_i t| <= r_i, as one slot.

    alphas: (m, k) per-prefix affine constants; betas: (k,); radii: (k,).
    """
    m = alphas.shape[0]
    lo = np.full(m, -np.inf)
    hi = np.full(m, np.inf)
    for i in range(alphas.shape[1]):
        a_col = alphas[:, i]
        b_i = betas[i]
        r_i = radii[i]
        if abs(b_i) > 1e-12:
            x = (-r_i - a_col) / b_i
            y = (r_i - a_col) / b_i
            np.maximum(lo, np.minimum(x, y), out=lo)
            np.minimum(hi, np.maximum(x, y), out=hi)
        else:
            dead = np.abs(a_col) > r_i
            lo[dead] = np.inf
            hi[dead] = -np.inf
    return lo, hi


def _poly_abs_leq(poly: np.poly1d, eps: float, window: tuple[float, float]) -> list:
    """{t in window : |poly(t)| <= eps} as a list of disjoint intervals."""
    wlo, whi = window
    if poly.order == 0:
        return [(wlo, whi)] if abs(poly.coeffs[0]) <= eps else []
    cuts = [wlo, whi]
    for shift in (-eps, eps):
        shifted = np.polyadd(poly, np.poly1d([-shift]))
        for r in np.roots(shifted):
            if abs(r.imag) <= 1e-9 * (1.0 + abs(r.real)) and wlo < r.real < whi:
                cuts.append(float(r.real))
    cuts = sorted(set(cuts))
    out = []
    for left, right in zip(cuts[:-1], cuts[1:]):
        mid = 0.5 * (left + right)
        if abs(float(poly(mid))) <= eps:
            if out and out[-1][1] >= left:
                out[-1] = (out[-1][0], right)
            else:
                out.append((left, right))
    # boundary roots satisfy |P| = eps themselves; keep them as degenerate
    # intervals so measure-zero solution sets (eps = 0) are not lost between
    # cells whose midpoints fail the test
    for r in cuts[1:-1]:
        covered = any(lo <= r <= hi for lo, hi in out)
        if not covered:
            out.append((r, r))
    out.sort()
    return out


def _intersect_unions(a: list, b: list) -> list:
    out = []
    for lo1, hi1 in a:
        for lo2, hi2 in b:
            lo, hi = max(lo1, lo2), min(hi1, hi2)
            if lo <= hi:
                out.append((lo, hi))
    return out


# --------------------------------------------------------------------------
# per-prefix interval solving (generic engine)


def _affine_parts(
    q: CountQuery, prefix_cols: list[int], sol: int, prefix: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    h = q.g.h
    alpha = h[:, prefix_cols] @ prefix.astype(float) + q.g.z
    return alpha, h[:, sol]


def _scalar_intervals(
    part: TargetFunction,
    alpha: np.ndarray,
    beta: np.ndarray,
    eps: float,
    window: tuple[float, float],
) -> list | None:
    """t-intervals with |part(alpha + beta t)| <= eps, or None for
    combinations with no closed-form solver (callers scan)."""
    if isinstance(part, MaxPower):
        segs: list = [window]
        for coord, a_i in zip(part.resolved_coords(), part.exponents):
            r = eps ** (1.0 / a_i) if a_i != 1.0 else eps
            b_c = beta[coord]
            a_c = alpha[coord]
            if abs(b_c) > 1e-12:
                x, y = (-r - a_c) / b_c, (r - a_c) / b_c
                segs = _intersect_unions(segs, [(min(x, y), max(x, y))])
            elif abs(a_c) > r:
                return []
        return segs
    if isinstance(part, CoordinateProduct):
        poly = np.poly1d([1.0])
        for a_c, b_c in zip(alpha, beta):
            poly = np.polymul(poly, np.poly1d([b_c, a_c]))
        return _poly_abs_leq(np.poly1d(poly), eps, window)
    if isinstance(part, SignedPowerForm):
        d = part.d
        if d != int(d):
            return None
        d = int(d)
        signs = np.concatenate([np.ones(part.p), -np.ones(part.q)])
        if d % 2 == 0:
            poly = np.poly1d([0.0])
            for sgn, a_c, b_c in zip(signs, alpha, beta):
                poly = np.polyadd(poly, sgn * np.poly1d([b_c, a_c]) ** d)
            return _poly_abs_leq(np.poly1d(poly), eps, window)
        # odd degree: |u|^d flips sign where u does; piece boundaries there
        cuts = [window[0], window[1]]
        for a_c, b_c in zip(alpha, beta):
            if abs(b_c) > 1e-12:
                r = -a_c / b_c
                if window[0] < r < window[1]:
                    cuts.append(float(r))
        cuts = sorted(set(cuts))
        out: list = []
        for left, right in zip(cuts[:-1], cuts[1:]):
            mid = 0.5 * (left + right)
            poly = np.poly1d([0.0])
            for sgn, a_c, b_c in zip(signs, alpha, beta):
                u_sign = 1.0 if a_c + b_c * mid >= 0 else -1.0
                poly = np.polyadd(poly, sgn * (u_sign * np.poly1d([b_c, a_c])) ** d)
            for lo, hi in _poly_abs_leq(np.poly1d(poly), eps, (left, right)):
                if out and out[-1][1] >= lo - 1e-12:
                    out[-1] = (out[-1][0], hi)
                else:
                    out.append((lo, hi))
        return out
    raise TypeError(f"unsupported target part {part!r}")


def _prefix_intervals(
    q: CountQuery,
    alpha: np.ndarray,
    beta: np.ndarray,
    eps_vec: np.ndarray,
    window: tuple[float, float],
) -> tuple[list, bool]:
    """(interval union, fell_back_to_scan) for one prefix."""
    parts = q.f.parts if isinstance(q.f, VectorOf) else (q.f,)
    segs: list = [window]
    pos = 0
    for part in parts:
        width = part.component_count
        eps = float(eps_vec[pos]) if width == 1 else None
        if width != 1:
            raise TypeError("vector parts must be scalar forms")
        pos += width
        got = _scalar_intervals(part, alpha, beta, eps, window)
        if got is None:
            return [window], True
        segs = _intersect_unions(segs, got)
        if not segs:
            return [], False
    return segs, False


# --------------------------------------------------------------------------
# candidate expansion and the main loop


def _expand_candidates(los: np.ndarray, his: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Integer points of per-row intervals, as (row_index, t) flat arrays.

    Endpoints are expanded by 1e-9 * (1 + |endpoint|) before rounding so
    root-finding error cannot drop a boundary candidate; the exact refilter
    discards any extras.
    """
    empty = ~(los <= his)  # also catches the (+inf, -inf) empty sentinel
    los = np.where(empty, 1.0, los)
    his = np.where(empty, 0.0, his)
    start = np.ceil(los - _EXPAND * (1.0 + np.abs(los)))
    stop = np.floor(his + _EXPAND * (1.0 + np.abs(his)))
    counts = np.maximum(stop - start + 1.0, 0.0)
    ok = counts > 0
    counts = counts[ok].astype(np.int64)
    if len(counts) == 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    rows = np.repeat(np.nonzero(ok)[0], counts)
    offsets = np.arange(counts.sum()) - np.repeat(
        np.cumsum(counts) - counts, counts
    )
    ts = np.repeat(start[ok].astype(np.int64), counts) + offsets
    return rows, ts


def _assemble(
    prefix_rows: np.ndarray, ts: np.ndarray, prefix_cols: list[int], sol: int, n: int
) -> np.ndarray:
    vs = np.empty((len(ts), n), dtype=np.int64)
    vs[:, prefix_cols] = prefix_rows
    vs[:, sol] = ts
    return vs


def _window_arrays(
    q: CountQuery, alphas: np.ndarray, beta: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Per-prefix bounds on the solved coordinate from the shell's box."""
    m = alphas.shape[0]
    if q.shell_space == "v":
        lim = math.floor(q.t)
        return np.full(m, -lim, dtype=float), np.full(m, lim, dtype=float)
    # w-cube: every |alpha_j + beta_j t| <= T
    return _band_slots(alphas, beta, np.full(q.f.n, q.t))


def _reduce_for_w(q: CountQuery) -> tuple[CountQuery, np.ndarray | None]:
    """Rewrite a w-space query in a reduced basis of the same w-lattice.

    v-space radii depend on the integer coordinates themselves, but a
    w-space query only sees the image points, so v = change @ v' turns the
    query into one over a shorter basis with a far smaller scan box (the
    point classes are preserved by the unimodular change).  Returns the
    rewritten query and the change matrix, or (q, None) when reduction
    does not certify or does not help.
    """
    basis = lll_reduce(q.g.h)
    u = np.linalg.inv(q.g.h) @ basis
    change = np.round(u).astype(np.int64)
    if np.max(np.abs(u - change)) > 1e-6:
        return q, None
    if np.allclose(basis, q.g.h):
        return q, None
    if np.linalg.det(basis) < 0:
        basis = basis.copy()
        basis[:, 0] = -basis[:, 0]
        change = change.copy()
        change[:, 0] = -change[:, 0]
    g2 = UnimodularMap(basis, q.g.z)
    q2 = CountQuery(
        g=g2,
        f=q.f,
        bound=q.bound,
        norm=q.norm,
        point_class=q.point_class,
        t0=q.t0,
        t=q.t,
        shell_space=q.shell_space,
        stop_after_first=q.stop_after_first,
    )
    return q2, change


def count_solutions(q: CountQuery) -> CountResult:
    """Exact shell count; see the module docstring for the contract."""
    if q.shell_space == "w":
        q2, change = _reduce_for_w(q)
        if change is not None:
            res = _count_core(q2)
            if res.first_witness is None:
                return res
            mapped = tuple(int(x) for x in change @ np.asarray(res.first_witness))
            return CountResult(res.count, mapped, res.visited, res.full_scan)
    return _count_core(q)


def _count_core(q: CountQuery) -> CountResult:
    n = q.f.n
    h = q.g.h
    sol = _solved_index(h)
    prefix_cols = [i for i in range(n) if i != sol]
    box = _prefix_box(q)
    eps_vec = _coarse_tolerance(q)
    beta = h[:, sol]

    fast = None
    if isinstance(q.f, SignedPowerForm) and q.f.d == 2:
        fast = "quadratic"
    elif isinstance(q.f, MaxPower):
        fast = "bands"
    elif isinstance(q.f, VectorOf) and all(
        isinstance(p, MaxPower) and len(p.exponents) == 1 for p in q.f.parts
    ):
        fast = "bands"

    count = 0
    witness: tuple[int, ...] | None = None
    visited = 0
    fell_back = False

    block_target = 256 if q.stop_after_first else 1 << 14
    for prefix_block in _prefix_blocks(box, prefix_cols, block_target):
        visited += len(prefix_block)
        alphas = prefix_block.astype(float) @ h[:, prefix_cols].T + q.g.z
        wlo, whi = _window_arrays(q, alphas, beta)

        if fast == "quadratic":
            signs = np.concatenate([np.ones(q.f.p), -np.ones(q.f.q)])
            a_coef = float(signs @ (beta * beta))
            b_coef = 2.0 * (alphas * beta) @ signs
            c_coef = (alphas * alphas) @ signs
            lo1, hi1, lo2, hi2 = _quadratic_slots(a_coef, b_coef, c_coef, float(eps_vec[0]))
            slot_rows, slot_ts = [], []
            for lo, hi in ((lo1, hi1), (lo2, hi2)):
                r, t = _expand_candidates(np.maximum(lo, wlo), np.minimum(hi, whi))
                slot_rows.append(r)
                slot_ts.append(t)
            rows = np.concatenate(slot_rows)
            ts = np.concatenate(slot_ts)
        elif fast == "bands":
            coords, exps = [], []
            if isinstance(q.f, MaxPower):
                coords = list(q.f.resolved_coords())
                exps = list(q.f.exponents)
            else:
                for p in q.f.parts:
                    coords.append(p.resolved_coords()[0])
                    exps.append(p.exponents[0])
            radii = np.asarray(
                [float(e) ** (1.0 / a) for e, a in zip(eps_vec, exps)]
                if len(eps_vec) == len(exps)
                else [float(eps_vec[0]) ** (1.0 / a) for a in exps]
            )
            lo, hi = _band_slots(alphas[:, coords], beta[coords], radii)
            rows, ts = _expand_candidates(np.maximum(lo, wlo), np.minimum(hi, whi))
        else:
            rows_list, ts_list = [], []
            for i in range(len(prefix_block)):
                if wlo[i] > whi[i]:
                    continue
                segs, scanned = _prefix_intervals(
                    q, alphas[i], beta, eps_vec, (float(wlo[i]), float(whi[i]))
                )
                fell_back = fell_back or scanned
                for lo, hi in segs:
                    t0i = math.ceil(lo - _EXPAND * (1.0 + abs(lo)))
                    t1i = math.floor(hi + _EXPAND * (1.0 + abs(hi)))
                    if t1i >= t0i:
                        ts_block = np.arange(t0i, t1i + 1, dtype=np.int64)
                        rows_list.append(np.full(len(ts_block), i, dtype=np.int64))
                        ts_list.append(ts_block)
            rows = (
                np.concatenate(rows_list) if rows_list else np.empty(0, dtype=np.int64)
            )
            ts = np.concatenate(ts_list) if ts_list else np.empty(0, dtype=np.int64)

        if len(ts) == 0:
            continue
        visited += len(ts)
        vs = _assemble(prefix_block[rows], ts, prefix_cols, sol, n)
        mask = _exact_mask(q, vs)
        hits = int(mask.sum())
        if hits and witness is None:
            witness = tuple(int(x) for x in vs[mask.argmax()])
        count += hits
        if q.stop_after_first and count > 0:
            # truncated search: the count reports the witness, not the total
            return CountResult(1, witness, visited, fell_back)
    return CountResult(count, witness, visited, fell_back)


def _prefix_blocks(
    box: np.ndarray, prefix_cols: list[int], block_target: int = 1 << 14
) -> Iterator[np.ndarray]:
    """Integer prefix assignments in centered order, in contiguous blocks.

    The first prefix coordinate advances slowest (centered 0, 1, -1, ...);
    the remaining coordinates are fully expanded per slab so blocks stay
    vectorizable.
    """
    if not prefix_cols:
        yield np.zeros((1, 0), dtype=np.int64)
        return
    lead = _centered(int(box[prefix_cols[0]]))
    rest = [_centered(int(box[c])) for c in prefix_cols[1:]]
    slab: list[np.ndarray] = []
    slab_rows = 0
    if rest:
        grids = np.meshgrid(*rest, indexing="ij")
        tail = np.stack([g.ravel() for g in grids], axis=1)
    else:
        tail = np.zeros((1, 0), dtype=np.int64)
    for v1 in lead:
        block = np.empty((len(tail), len(prefix_cols)), dtype=np.int64)
        block[:, 0] = v1
        block[:, 1:] = tail
        slab.append(block)
        slab_rows += len(block)
        if slab_rows >= block_target:
            yield np.concatenate(slab, axis=0)
            slab, slab_rows = [], 0
    if slab:
        yield np.concatenate(slab, axis=0)


# --------------------------------------------------------------------------
# brute-force oracle


def brute_force_count(q: CountQuery, box_cap: int = 10**9) -> CountResult:
    """Full integer-box scan with the exact predicate; ground truth."""
    if q.shell_space == "w":
        q2, change = _reduce_for_w(q)
        if change is not None:
            res = _brute_core(q2, box_cap)
            if res.first_witness is None:
                return res
            mapped = tuple(int(x) for x in change @ np.asarray(res.first_witness))
            return CountResult(res.count, mapped, res.visited, res.full_scan)
    return _brute_core(q, box_cap)


def _brute_core(q: CountQuery, box_cap: int) -> CountResult:
    box = _prefix_box_full(q)
    cells = 1
    for b in box:
        cells *= 2 * int(b) + 1
        if cells > box_cap:
            raise ValueError(f"brute-force box exceeds {box_cap} points")
    n = q.f.n
    axes = [np.arange(-int(b), int(b) + 1, dtype=np.int64) for b in box]
    count = 0
    witness = None
    visited = 0
    # slab over the first coordinate to bound memory
    tail_grids = np.meshgrid(*axes[1:], indexing="ij") if n > 1 else []
    tail = (
        np.stack([g.ravel() for g in tail_grids], axis=1)
        if n > 1
        else np.zeros((1, 0), dtype=np.int64)
    )
    for v1 in axes[0]:
        vs = np.empty((len(tail), n), dtype=np.int64)
        vs[:, 0] = v1
        if n > 1:
            vs[:, 1:] = tail
        visited += len(vs)
        mask = _exact_mask(q, vs)
        hits = int(mask.sum())
        if hits and witness is None:
            witness = tuple(int(x) for x in vs[mask.argmax()])
        count += hits
    return CountResult(count, witness, visited)


def _prefix_box_full(q: CountQuery) -> np.ndarray:
    n = q.f.n
    if q.shell_space == "v":
        return np.full(n, math.floor(q.t), dtype=np.int64)
    hinv = q.g.inverse_h()
    reach = np.abs(hinv) @ (q.t + np.abs(q.g.z))
    return np.floor(reach + _EXPAND).astype(np.int64)


# --------------------------------------------------------------------------
# region streaming (w-space), for mean/variance experiments


@dataclass(frozen=True)
class NormBall:
    norm: Norm
    radius: float

    def __post_init__(self) -> None:
        if not self.radius >= 0.0:
            raise ValueError(f"radius must be >= 0, got {self.radius}")

    def cube_halfwidth(self) -> float:
        return self.radius

    def contains(self, ws: np.ndarray) -> np.ndarray:
        return self.norm.eval_many(ws) <= self.radius


@dataclass(frozen=True)
class IntegerBox:
    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.lo) != len(self.hi) or any(
            a > b for a, b in zip(self.lo, self.hi)
        ):
            raise ValueError("box corners out of order")

    def cube_halfwidth(self) -> float:
        return max(max(abs(a), abs(b)) for a, b in zip(self.lo, self.hi))

    def contains(self, ws: np.ndarray) -> np.ndarray:
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        return np.all((ws >= lo) & (ws <= hi), axis=1)


def lattice_points_in_region(
    g: UnimodularMap, region: NormBall | IntegerBox, reduce_basis: bool = True
) -> tuple[np.ndarray, np.ndarray]:
    """All integer v with w = g(v) in the region, as arrays (V, W).

    Enumeration runs in a reduced basis to keep the scan box small for
    skewed maps; the returned v are in the original integer coordinates
    (the reduction is inverted through its unimodular change of basis).
    Includes v = 0 when its image lies in the region; callers filter
    point classes.
    """
    n = g.n
    basis = g.h
    change = np.eye(n, dtype=np.int64)
    if reduce_basis:
        reduced = lll_reduce(basis)
        u = np.linalg.inv(basis) @ reduced
        change = np.round(u).astype(np.int64)
        if np.max(np.abs(u - change)) > 1e-6 or abs(abs(np.linalg.det(u)) - 1.0) > 1e-6:
            # reduction failed to certify; fall back to the raw basis
            reduced = basis
            change = np.eye(n, dtype=np.int64)
        basis = reduced
    half = region.cube_halfwidth()
    hinv = np.linalg.inv(basis)
    reach = np.abs(hinv) @ (half + np.abs(g.z))
    box = np.floor(reach + _EXPAND).astype(np.int64)
    total = 1
    for b in box:
        total *= 2 * int(b) + 1
        if total > 10**8:
            raise ValueError("region enumeration box too large")
    axes = [np.arange(-int(b), int(b) + 1, dtype=np.int64) for b in box]
    grids = np.meshgrid(*axes, indexing="ij")
    coeffs = np.stack([gx.ravel() for gx in grids], axis=1)
    ws = coeffs.astype(float) @ basis.T + g.z
    keep = region.contains(ws)
    vs = coeffs[keep] @ change.T
    return vs, ws[keep]
