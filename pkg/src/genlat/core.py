"""Domain types for lattice problems on sublevel regions of subhomogeneous forms.

A target form f: R^n -> R^l is a vector of scalar forms, each one
subhomogeneous of degree d > 0, meaning |f(t x)| <= t^d |f(x)| componentwise
for t in (0, 1].  A bound function psi assigns to each radius z >= 0 a
componentwise tolerance, and the central regions are

    A(f, psi, nu) = { x in R^n : |f(x)| <= psi(nu(x)) componentwise },

usually intersected with a shell S < nu(x) <= T of the block norm nu.

Conventions fixed here and relied on throughout the package:

  * norms are max-of-blocks: nu(x) = max_b ( sum_{i in b} |x_i|^{d_b} )^{1/d_b},
    with d_b = None denoting the sup norm on that block;
  * bound components are psi_i(z) = C * log(e + z)^j * z^(-s) for z >= 1
    (natural log), extended by the constant psi_i(1) on [0, 1);
  * the componentwise partial order a <= b is meant everywhere a vector
    inequality appears;
  * 0^0 = 1 wherever a power-log expression degenerates.

The compact string specs parsed/rendered here ("max", "ld:2", "block:2:2,1:2",
"pl:C=1,s=1,j=0", "spf:p=2,q=1,d=2", ...) are the command-line surface; parse
and render are exact inverses on canonical forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence, Union

import numpy as np

__all__ = [
    "Norm",
    "max_norm",
    "lp_norm",
    "block_norm",
    "ApproxFunction",
    "power_law",
    "SignedPowerForm",
    "CoordinateProduct",
    "MaxPower",
    "VectorOf",
    "TargetFunction",
    "PointClass",
    "DyadicSchedule",
    "mix_seed",
    "Bound",
    "norm_eval",
    "psi_eval",
    "f_eval",
    "partial_order_leq",
    "bound_values",
    "in_b_set",
    "in_a_set",
    "subhomogeneity_witness",
    "regularity_witness",
    "parse_norm",
    "norm_spec",
    "parse_psi",
    "psi_spec",
    "parse_target",
    "target_spec",
]


# --------------------------------------------------------------------------
# norms


@dataclass(frozen=True)
class Norm:
    """Block norm: max over blocks of the block's l^d norm.

    ``blocks`` is a tuple of (dimension, exponent) pairs partitioning the
    coordinates in order.  The exponent None is the sup-norm sentinel; it is
    kept distinct from float('inf') so serialized specs round-trip exactly.
    """

    blocks: tuple[tuple[int, float | None], ...]

    def __post_init__(self) -> None:
        if not self.blocks:
            raise ValueError("norm needs at least one block")
        for dim, d in self.blocks:
            if int(dim) != dim or dim < 1:
                raise ValueError(f"block dimension must be a positive integer, got {dim}")
            if d is not None and not d >= 1.0:
                raise ValueError(f"block exponent must be >= 1 or None, got {d}")

    @property
    def dim(self) -> int:
        return sum(b[0] for b in self.blocks)

    def __call__(self, x: Sequence[float]) -> float:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError(f"expected vector of dimension {self.dim}, got shape {x.shape}")
        return float(self.eval_many(x[None, :])[0])

    def eval_many(self, xs: np.ndarray) -> np.ndarray:
        """Norms of the rows of ``xs`` (shape (m, dim))."""
        xs = np.asarray(xs, dtype=float)
        if xs.ndim != 2 or xs.shape[1] != self.dim:
            raise ValueError(f"expected array of shape (m, {self.dim}), got {xs.shape}")
        out = np.zeros(xs.shape[0])
        i = 0
        for dim, d in self.blocks:
            seg = np.abs(xs[:, i : i + dim])
            i += dim
            if d is None:
                v = seg.max(axis=1)
            elif d == 1.0:
                v = seg.sum(axis=1)
            elif d == 2.0:
                v = np.sqrt((seg * seg).sum(axis=1))
            else:
                v = (seg**d).sum(axis=1) ** (1.0 / d)
            np.maximum(out, v, out=out)
        return out

    def sup_norm_factor(self) -> float:
        """Smallest c with nu(x) <= c * sup_i |x_i|; nu >= sup norm always."""
        return max(1.0 if d is None else dim ** (1.0 / d) for dim, d in self.blocks)


def max_norm(n: int) -> Norm:
    return Norm(((n, None),))


def lp_norm(n: int, d: float) -> Norm:
    return Norm(((n, float(d)),))


def block_norm(blocks: Iterable[tuple[int, float | None]]) -> Norm:
    return Norm(tuple((int(a), None if b is None else float(b)) for a, b in blocks))


def norm_eval(norm: Norm, x: Sequence[float]) -> float:
    return norm(x)


def partial_order_leq(a: Sequence[float], b: Sequence[float]) -> bool:
    """Componentwise a <= b; requires equal lengths."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    return bool(np.all(a <= b))


# --------------------------------------------------------------------------
# bound functions


@dataclass(frozen=True)
class ApproxFunction:
    """Vector of power-log bound components.

    Component i evaluates to C_i * log(e + z)^j_i * z^(-s_i) for z >= 1 and is
    frozen at its z = 1 value on [0, 1), making it finite at z = 0.  C > 0,
    s >= 0, and j is a nonnegative integer.
    """

    components: tuple[tuple[float, float, int], ...]

    def __post_init__(self) -> None:
        if not self.components:
            raise ValueError("bound function needs at least one component")
        for coeff, s, j in self.components:
            if not coeff > 0:
                raise ValueError(f"coefficient must be positive, got {coeff}")
            if not s >= 0:
                raise ValueError(f"power must be nonnegative, got {s}")
            if int(j) != j or j < 0:
                raise ValueError(f"log exponent must be a nonnegative integer, got {j}")

    @property
    def component_count(self) -> int:
        return len(self.components)

    def __call__(self, z: float) -> np.ndarray:
        return self.eval_many(np.asarray([z], dtype=float))[0]

    def eval_many(self, zs: np.ndarray) -> np.ndarray:
        """Shape (m, l) array of component values at each z; z < 1 plateaus."""
        zs = np.asarray(zs, dtype=float)
        if np.any(zs < 0):
            raise ValueError("bound functions are defined on z >= 0")
        zc = np.maximum(zs, 1.0)
        cols = []
        for coeff, s, j in self.components:
            v = coeff * np.log(math.e + zc) ** j * zc ** (-s)
            cols.append(v)
        return np.stack(cols, axis=1)

    def scalar(self) -> tuple[float, float, int]:
        """The single (C, s, j) triple; raises if the bound is vector-valued."""
        if len(self.components) != 1:
            raise ValueError("expected a scalar bound function")
        return self.components[0]


def power_law(coeff: float = 1.0, s: float = 1.0, j: int = 0) -> ApproxFunction:
    return ApproxFunction(((float(coeff), float(s), int(j)),))


def psi_eval(psi: ApproxFunction, z: float) -> np.ndarray:
    return psi(z)


# fixed componentwise tolerance, as a tuple; or a radius-dependent bound
Bound = Union[ApproxFunction, tuple]


def bound_values(bound: Bound, zs: np.ndarray, component_count: int) -> np.ndarray:
    """Tolerance matrix (m, l) for radii ``zs`` under either bound kind."""
    zs = np.asarray(zs, dtype=float)
    if isinstance(bound, ApproxFunction):
        vals = bound.eval_many(zs)
        if vals.shape[1] != component_count:
            raise ValueError(
                f"bound has {vals.shape[1]} components, target has {component_count}"
            )
        return vals
    eps = np.asarray(bound, dtype=float)
    if eps.shape != (component_count,):
        raise ValueError(f"expected {component_count} tolerance components, got {eps.shape}")
    if np.any(eps < 0):
        raise ValueError("fixed tolerances must be nonnegative")
    return np.broadcast_to(eps, (len(zs), component_count))


# --------------------------------------------------------------------------
# target forms


@dataclass(frozen=True)
class SignedPowerForm:
    """f(x) = sum_{i<=p} |x_i|^d  -  sum_{i>p} |x_i|^d on R^(p+q), degree d."""

    p: int
    q: int
    d: float

    def __post_init__(self) -> None:
        if int(self.p) != self.p or self.p < 1:
            raise ValueError(f"p must be a positive integer, got {self.p}")
        if int(self.q) != self.q or self.q < 0:
            raise ValueError(f"q must be a nonnegative integer, got {self.q}")
        if not self.d >= 1.0:
            raise ValueError(f"d must be >= 1, got {self.d}")

    @property
    def n(self) -> int:
        return self.p + self.q

    @property
    def component_count(self) -> int:
        return 1

    @property
    def degrees(self) -> tuple[float, ...]:
        return (float(self.d),)

    def evaluate_many(self, xs: np.ndarray) -> np.ndarray:
        xs = np.abs(np.asarray(xs, dtype=float))
        powed = xs**self.d
        val = powed[:, : self.p].sum(axis=1) - powed[:, self.p :].sum(axis=1)
        return val[:, None]

    def canonical_norm(self) -> Norm:
        if self.q == 0:
            return lp_norm(self.p, self.d)
        return block_norm(((self.p, self.d), (self.q, self.d)))


@dataclass(frozen=True)
class CoordinateProduct:
    """f(x) = x_1 * ... * x_n, degree n."""

    n: int

    def __post_init__(self) -> None:
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"n must be an integer >= 2, got {self.n}")

    @property
    def component_count(self) -> int:
        return 1

    @property
    def degrees(self) -> tuple[float, ...]:
        return (float(self.n),)

    def evaluate_many(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        return xs.prod(axis=1)[:, None]

    def canonical_norm(self) -> Norm:
        return max_norm(self.n)


@dataclass(frozen=True)
class MaxPower:
    """f(x) = max_i |x_{c_i}|^{a_i} over l < n chosen coordinates, degree min a_i.

    ``coords`` defaults to the first l coordinates; any distinct subset is
    allowed, which is how componentwise simultaneous systems are assembled.
    """

    exponents: tuple[float, ...]
    n: int
    coords: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if not self.exponents:
            raise ValueError("need at least one exponent")
        if any(not a >= 1.0 for a in self.exponents):
            raise ValueError(f"exponents must be >= 1, got {self.exponents}")
        if int(self.n) != self.n or len(self.exponents) >= self.n:
            raise ValueError(
                f"need integer n with len(exponents) < n, got n={self.n}, "
                f"l={len(self.exponents)}"
            )
        c = self.resolved_coords()
        if len(set(c)) != len(c) or any(i < 0 or i >= self.n for i in c):
            raise ValueError(f"coords must be distinct indices below n, got {c}")

    def resolved_coords(self) -> tuple[int, ...]:
        if self.coords is None:
            return tuple(range(len(self.exponents)))
        if len(self.coords) != len(self.exponents):
            raise ValueError("coords and exponents must have equal length")
        return self.coords

    @property
    def component_count(self) -> int:
        return 1

    @property
    def degrees(self) -> tuple[float, ...]:
        return (min(self.exponents),)

    def evaluate_many(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        cols = xs[:, list(self.resolved_coords())]
        val = (np.abs(cols) ** np.asarray(self.exponents)).max(axis=1)
        return val[:, None]

    def canonical_norm(self) -> Norm:
        return max_norm(self.n)


@dataclass(frozen=True)
class VectorOf:
    """Vector target: concatenation of scalar parts sharing one ambient n."""

    parts: tuple["ScalarTarget", ...]

    def __post_init__(self) -> None:
        if not self.parts:
            raise ValueError("vector target needs at least one part")
        dims = {p.n for p in self.parts}
        if len(dims) != 1:
            raise ValueError(f"parts must share one ambient dimension, got {dims}")

    @property
    def n(self) -> int:
        return self.parts[0].n

    @property
    def component_count(self) -> int:
        return len(self.parts)

    @property
    def degrees(self) -> tuple[float, ...]:
        return tuple(p.degrees[0] for p in self.parts)

    def evaluate_many(self, xs: np.ndarray) -> np.ndarray:
        return np.concatenate([p.evaluate_many(xs) for p in self.parts], axis=1)

    def canonical_norm(self) -> Norm:
        return max_norm(self.n)


ScalarTarget = Union[SignedPowerForm, CoordinateProduct, MaxPower]
TargetFunction = Union[SignedPowerForm, CoordinateProduct, MaxPower, VectorOf]


def f_eval(f: TargetFunction, x: Sequence[float]) -> np.ndarray:
    """Component values of f at a single point, shape (l,)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (f.n,):
        raise ValueError(f"expected vector of dimension {f.n}, got shape {x.shape}")
    return f.evaluate_many(x[None, :])[0]


def in_b_set(f: TargetFunction, eps: Sequence[float], norm: Norm, big_t: float, x) -> bool:
    """Membership in { nu(x) <= T, |f(x)| <= eps componentwise }."""
    x = np.asarray(x, dtype=float)
    if norm(x) > big_t:
        return False
    return partial_order_leq(np.abs(f_eval(f, x)), eps)


def in_a_set(
    f: TargetFunction, psi: ApproxFunction, norm: Norm, x, inner: float = 0.0,
    outer: float = math.inf,
) -> bool:
    """Membership in { inner < nu(x) <= outer, |f(x)| <= psi(nu(x)) }."""
    x = np.asarray(x, dtype=float)
    z = norm(x)
    if not (inner < z <= outer):
        return False
    return partial_order_leq(np.abs(f_eval(f, x)), psi(z))


def subhomogeneity_witness(
    f: TargetFunction, samples: int = 200, seed: int = 0, scale: float = 5.0
) -> float:
    """Largest observed ratio |f(t x)|_i / (t^{d_i} |f(x)|_i) over random probes.

    At most 1 (to rounding) certifies subhomogeneity with the declared
    componentwise degrees on the probe set; the two power families are exactly
    homogeneous so the ratio sits at 1 whenever f(x) != 0.
    """
    rng = np.random.default_rng(seed)
    xs = rng.uniform(-scale, scale, size=(samples, f.n))
    ts = rng.uniform(0.05, 1.0, size=samples)
    base = np.abs(f.evaluate_many(xs))
    scaled = np.abs(f.evaluate_many(xs * ts[:, None]))
    degrees = np.asarray(f.degrees)
    denom = ts[:, None] ** degrees[None, :] * base
    ok = denom > 1e-12
    if not ok.any():
        return 0.0
    return float((scaled[ok] / denom[ok]).max())


def regularity_witness(
    psi: ApproxFunction, a: float = 2.0, grid: Sequence[float] | None = None
) -> tuple[float, float, bool]:
    """Constants (a, b) with psi(a z) >= b psi(z), checked on a grid.

    For power-log components the ratio psi_i(a z)/psi_i(z) is at least
    a^(-s_i), so b = a^(-max_i s_i) always works; the returned flag reports
    the grid check of that bound.
    """
    if not a > 1.0:
        raise ValueError(f"need a > 1, got {a}")
    b = min(a ** (-s) for _, s, _ in psi.components)
    if grid is None:
        grid = [0.0, 0.25, 0.5, 0.9, 1.0, 1.5, 2.0, 5.0, 17.0, 100.0, 1e4, 1e8]
    zs = np.asarray(grid, dtype=float)
    ok = bool(np.all(psi.eval_many(a * zs) >= b * psi.eval_many(zs) * (1 - 1e-12)))
    return a, b, ok


# --------------------------------------------------------------------------
# seed derivation


def mix_seed(master: int, index: int) -> int:
    """Derive a decorrelated 64-bit seed from a master seed and an index.

    splitmix64 finalizer.  Every derived RNG in the package (per sample,
    per chunk, per worker) is seeded this way, so results depend only on
    the master seed and the logical index, not on scheduling.
    """
    x = (master + 0x9E3779B97F4A7C15 * (index + 1)) & 0xFFFFFFFFFFFFFFFF
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    return x ^ (x >> 31)


# --------------------------------------------------------------------------
# point classes and schedules


class PointClass(Enum):
    """Which integer vectors a count ranges over."""

    ALL_NONZERO = "nonzero"
    PRIMITIVE = "primitive"
    ALL_INTEGER = "all"


@dataclass(frozen=True)
class DyadicSchedule:
    """Geometric checkpoint radii t_k = t0 * ratio^k for k0 <= k <= kmax."""

    t0: float = 1.0
    ratio: float = 2.0
    k0: int = 0
    kmax: int = 0

    def __post_init__(self) -> None:
        if not self.t0 > 0 or not self.ratio > 1:
            raise ValueError("need t0 > 0 and ratio > 1")
        if self.k0 > self.kmax:
            raise ValueError(f"empty schedule: k0={self.k0} > kmax={self.kmax}")

    def indices(self) -> range:
        return range(self.k0, self.kmax + 1)

    def values(self) -> list[float]:
        return [self.t0 * self.ratio**k for k in self.indices()]


# --------------------------------------------------------------------------
# string specs


def _format_float(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def parse_norm(spec: str, n: int) -> Norm:
    """Parse "max", "ld:<d>", or "block:<dim>:<d>,<dim>:<d>,..." at dimension n."""
    spec = spec.strip()
    if spec == "max":
        return max_norm(n)
    if spec.startswith("ld:"):
        tok = spec[3:]
        if tok == "inf":
            return max_norm(n)
        try:
            d = float(tok)
        except ValueError:
            raise ValueError(f"norm spec: bad exponent {tok!r} in {spec!r}") from None
        return lp_norm(n, d)
    if spec.startswith("block:"):
        blocks = []
        for part in spec[6:].split(","):
            pieces = part.split(":")
            if len(pieces) != 2:
                raise ValueError(f"norm spec: bad block {part!r} in {spec!r}")
            dim = int(pieces[0])
            d = None if pieces[1] == "inf" else float(pieces[1])
            blocks.append((dim, d))
        norm = block_norm(blocks)
        if norm.dim != n:
            raise ValueError(f"norm spec: blocks sum to {norm.dim}, expected n={n}")
        return norm
    raise ValueError(f"norm spec: unrecognized {spec!r}")


def norm_spec(norm: Norm) -> str:
    if len(norm.blocks) == 1:
        d = norm.blocks[0][1]
        return "max" if d is None else f"ld:{_format_float(d)}"
    parts = ",".join(
        f"{dim}:{'inf' if d is None else _format_float(d)}" for dim, d in norm.blocks
    )
    return f"block:{parts}"


def _parse_kv(body: str, spec: str) -> dict[str, str]:
    out = {}
    for item in body.split(","):
        if "=" not in item:
            raise ValueError(f"spec {spec!r}: expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        if k in out:
            raise ValueError(f"spec {spec!r}: duplicate key {k!r}")
        out[k] = v
    return out


def parse_psi(spec: str) -> ApproxFunction:
    """Parse "pl:C=..,s=..,j=.." with ";"-separated components."""
    spec = spec.strip()
    if not spec.startswith("pl:"):
        raise ValueError(f"bound spec: expected 'pl:' prefix in {spec!r}")
    comps = []
    for body in spec[3:].split(";"):
        kv = _parse_kv(body, spec)
        extra = set(kv) - {"C", "s", "j"}
        if extra:
            raise ValueError(f"bound spec: unknown keys {sorted(extra)} in {spec!r}")
        coeff = float(kv.get("C", "1"))
        s = float(kv.get("s", "1"))
        j = int(kv.get("j", "0"))
        comps.append((coeff, s, j))
    return ApproxFunction(tuple(comps))


def psi_spec(psi: ApproxFunction) -> str:
    return "pl:" + ";".join(
        f"C={_format_float(c)},s={_format_float(s)},j={j}" for c, s, j in psi.components
    )


def _need(kv: dict[str, str], key: str, spec: str) -> str:
    if key not in kv:
        raise ValueError(f"spec {spec!r}: missing required key {key!r}")
    return kv[key]


def _parse_scalar_target(spec: str) -> ScalarTarget:
    if spec.startswith("spf:"):
        kv = _parse_kv(spec[4:], spec)
        extra = set(kv) - {"p", "q", "d"}
        if extra:
            raise ValueError(f"target spec: unknown keys {sorted(extra)} in {spec!r}")
        return SignedPowerForm(
            p=int(_need(kv, "p", spec)), q=int(kv.get("q", "0")), d=float(_need(kv, "d", spec))
        )
    if spec.startswith("prod:"):
        kv = _parse_kv(spec[5:], spec)
        extra = set(kv) - {"n"}
        if extra:
            raise ValueError(f"target spec: unknown keys {sorted(extra)} in {spec!r}")
        return CoordinateProduct(n=int(_need(kv, "n", spec)))
    if spec.startswith("maxpow:"):
        kv = _parse_kv(spec[7:], spec)
        extra = set(kv) - {"a", "n", "c"}
        if extra:
            raise ValueError(f"target spec: unknown keys {sorted(extra)} in {spec!r}")
        exps = tuple(float(t) for t in _need(kv, "a", spec).split("|"))
        coords = tuple(int(t) for t in kv["c"].split("|")) if "c" in kv else None
        return MaxPower(exponents=exps, n=int(_need(kv, "n", spec)), coords=coords)
    raise ValueError(f"target spec: unrecognized {spec!r}")


def parse_target(spec: str) -> TargetFunction:
    """Parse "spf:p=..,q=..,d=..", "prod:n=..", "maxpow:a=..|..,n=..[,c=..|..]",
    or "vec:" followed by ";"-separated scalar specs."""
    spec = spec.strip()
    if spec.startswith("vec:"):
        parts = tuple(_parse_scalar_target(p) for p in spec[4:].split(";"))
        return VectorOf(parts)
    return _parse_scalar_target(spec)


def _scalar_target_spec(f: ScalarTarget) -> str:
    if isinstance(f, SignedPowerForm):
        return f"spf:p={f.p},q={f.q},d={_format_float(f.d)}"
    if isinstance(f, CoordinateProduct):
        return f"prod:n={f.n}"
    if isinstance(f, MaxPower):
        a = "|".join(_format_float(x) for x in f.exponents)
        base = f"maxpow:a={a},n={f.n}"
        if f.coords is not None:
            base += ",c=" + "|".join(str(c) for c in f.coords)
        return base
    raise TypeError(f"not a scalar target: {f!r}")


def target_spec(f: TargetFunction) -> str:
    if isinstance(f, VectorOf):
        return "vec:" + ";".join(_scalar_target_spec(p) for p in f.parts)
    return _scalar_target_spec(f)
