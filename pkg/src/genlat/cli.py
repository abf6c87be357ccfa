"""Command line surface: configuration, persistence, and seed management.

Each subcommand resolves an ExperimentConfig (command line flags override
config-file values), runs one experiment, and writes up to three artifacts
under the --out prefix:

  <out>.jsonl          one record per sample or per schedule point; every
                       record carries the master seed and its sample index
  <out>.csv            tidy summary columns (x, y, stderr style) for plotting
  <out>.manifest.json  schema version, the fully resolved config, master
                       seed, worker count, wall-clock timestamps, and a
                       sha256 digest of each data file

Records never contain timestamps, so a rerun with the same master seed and
worker count is byte identical; the wall clock lives in the manifest only.
Validation failures exit with status 2 and a machine readable error record
on stderr naming the offending key.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .core import (
    ApproxFunction,
    CoordinateProduct,
    DyadicSchedule,
    MaxPower,
    PointClass,
    SignedPowerForm,
    mix_seed,
    norm_spec,
    parse_norm,
    parse_psi,
    parse_target,
    psi_spec,
    target_spec,
)
from .counting import CountQuery, brute_force_count, count_solutions
from .experiments import (
    ExperimentConfig,
    StatSummary,
    _run_indexed,
    counting_ratio_experiment,
    empty_probability_experiment,
    kg_system_experiment,
    norm_independence_check,
    rogers_variance_experiment,
    siegel_mean_experiment,
    uniform_approx_experiment,
    zero_full_experiment,
)
from .haar import CompactWindow, identity_map, sample_asl, sample_sl
from .volume import (
    Verdict,
    adaptive_simpson,
    classify_series,
    i_k_closed_form,
    monte_carlo_region_volume,
    shell_volume,
    verification_matrix,
)

SCHEMA_VERSION = 1

_CONFIG_KEYS = {
    "n",
    "f",
    "psi",
    "norm",
    "pointClass",
    "group",
    "shiftBound",
    "window",
    "schedule",
    "sampleCount",
    "masterSeed",
}


class ConfigError(ValueError):
    """Validation failure attributable to one configuration key."""

    def __init__(self, key: str, message: str):
        super().__init__(message)
        self.key = key


# --------------------------------------------------------------------------
# config serialization


def _parse_schedule(value) -> DyadicSchedule:
    if isinstance(value, DyadicSchedule):
        return value
    if isinstance(value, dict):
        kv = dict(value)
    else:
        kv = {}
        for item in str(value).split(","):
            if "=" not in item:
                raise ConfigError("schedule", f"schedule: expected key=value, got {item!r}")
            k, v = item.split("=", 1)
            kv[k] = v
    extra = set(kv) - {"t0", "ratio", "k0", "kmax"}
    if extra:
        raise ConfigError("schedule", f"schedule: unknown keys {sorted(extra)}")
    try:
        return DyadicSchedule(
            t0=float(kv.get("t0", 1.0)),
            ratio=float(kv.get("ratio", 2.0)),
            k0=int(kv.get("k0", 0)),
            kmax=int(kv.get("kmax", 0)),
        )
    except ValueError as exc:
        raise ConfigError("schedule", f"schedule: {exc}") from None


def _schedule_dict(s: DyadicSchedule) -> dict:
    return {"t0": s.t0, "ratio": s.ratio, "k0": s.k0, "kmax": s.kmax}


def _parse_window(value) -> CompactWindow:
    if isinstance(value, CompactWindow):
        return value
    if isinstance(value, dict):
        op = value.get("opNormBound")
        shift = value.get("shiftBound", 0.0)
    else:
        parts = str(value).split(",")
        op = parts[0]
        shift = parts[1] if len(parts) > 1 else 0.0
    try:
        return CompactWindow(float(op), float(shift))
    except (TypeError, ValueError) as exc:
        raise ConfigError("window", f"window: {exc}") from None


def config_from_dict(data: dict) -> ExperimentConfig:
    """Build the resolved config, naming the offending key on any failure."""
    unknown = set(data) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(sorted(unknown)[0], f"unknown config key {sorted(unknown)[0]!r}")
    if "n" not in data or data["n"] is None:
        raise ConfigError("n", "missing required key 'n'")
    try:
        n = int(data["n"])
    except (TypeError, ValueError):
        raise ConfigError("n", f"n: expected an integer, got {data['n']!r}") from None

    def lift(key, fn):
        if key not in data or data[key] is None:
            return None
        try:
            return fn(data[key])
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(key, f"{key}: {exc}") from None

    f = lift("f", lambda v: v if not isinstance(v, str) else parse_target(v))
    psi = lift("psi", lambda v: v if not isinstance(v, str) else parse_psi(v))
    norm = lift("norm", lambda v: v if not isinstance(v, str) else parse_norm(v, n))
    if norm is None and f is not None:
        norm = f.canonical_norm()
    point_class = lift("pointClass", lambda v: v if isinstance(v, PointClass) else PointClass(v))
    window = lift("window", _parse_window)
    schedule = lift("schedule", _parse_schedule)
    try:
        return ExperimentConfig(
            n=n,
            f=f,
            psi=psi,
            norm=norm,
            point_class=point_class or PointClass.ALL_NONZERO,
            group=str(data.get("group", "SL")),
            shift_bound=float(data.get("shiftBound", 0.0)),
            window=window,
            schedule=schedule,
            sample_count=int(data.get("sampleCount", 1)),
            master_seed=int(data.get("masterSeed", 0)),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        # map the dataclass validator message back to its key
        text = str(exc)
        for key, needle in (
            ("sampleCount", "sampleCount"),
            ("group", "group"),
            ("shiftBound", "shiftBound"),
            ("f", "target dimension"),
            ("norm", "norm dimension"),
            ("n", "n must"),
        ):
            if needle in text:
                raise ConfigError(key, text) from None
        raise ConfigError("config", text) from None


def serialize_config(cfg: ExperimentConfig) -> dict:
    """JSON-ready dict using the core spec-string serializations."""
    out = {
        "n": cfg.n,
        "pointClass": cfg.point_class.value,
        "group": cfg.group,
        "shiftBound": cfg.shift_bound,
        "sampleCount": cfg.sample_count,
        "masterSeed": cfg.master_seed,
    }
    if cfg.f is not None:
        out["f"] = target_spec(cfg.f)
    if cfg.psi is not None:
        out["psi"] = psi_spec(cfg.psi)
    if cfg.norm is not None:
        out["norm"] = norm_spec(cfg.norm)
    if cfg.window is not None:
        out["window"] = {
            "opNormBound": cfg.window.op_norm_bound,
            "shiftBound": cfg.window.shift_bound,
        }
    if cfg.schedule is not None:
        out["schedule"] = _schedule_dict(cfg.schedule)
    return out


def parse_config(args: argparse.Namespace) -> ExperimentConfig:
    """Merge the config file (if any) with flags; flags win."""
    data: dict = {}
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.exists():
            raise ConfigError("config", f"config file not found: {path}")
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"config file is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config", "config file must hold a JSON object")
    overrides = {
        "n": getattr(args, "n", None),
        "f": getattr(args, "f", None),
        "psi": getattr(args, "psi", None),
        "norm": getattr(args, "norm", None),
        "pointClass": getattr(args, "point_class", None),
        "group": getattr(args, "group", None),
        "shiftBound": getattr(args, "shift_bound", None),
        "window": getattr(args, "window", None),
        "schedule": getattr(args, "schedule", None),
        "sampleCount": getattr(args, "samples", None),
        "masterSeed": getattr(args, "seed", None),
    }
    for key, value in overrides.items():
        if value is not None:
            data[key] = value
    if data.get("n") is None:
        if data.get("f") is not None:
            spec = data["f"]
            try:
                data["n"] = spec.n if not isinstance(spec, str) else parse_target(spec).n
            except ValueError as exc:
                raise ConfigError("f", f"f: {exc}") from None
        elif getattr(args, "command", None) in ("volume", "selftest"):
            data["n"] = 2  # placeholder; these commands carry their own dimensions
    return config_from_dict(data)


# --------------------------------------------------------------------------
# persistence


def _json_line(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"))


def _write_jsonl(path: Path, records: list[dict]) -> None:
    with open(path, "w") as fh:
        for rec in records:
            fh.write(_json_line(rec) + "\n")


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


def _emit(
    args: argparse.Namespace,
    cfg: ExperimentConfig,
    records: list[dict],
    header: list[str],
    rows: list[list],
    extras: dict | None = None,
    started: str = "",
) -> None:
    """Write the requested data files plus the manifest."""
    seen = set()
    stamped = []
    for rec in records:
        rec = {"masterSeed": cfg.master_seed, **rec}
        rec.setdefault("sample", len(stamped))
        key = (rec["sample"], rec.get("volume"), rec.get("t"), rec.get("case"))
        if key in seen:
            raise RuntimeError(f"duplicate record key {key}")
        seen.add(key)
        stamped.append(rec)
    prefix = Path(args.out)
    if prefix.parent != Path("."):
        prefix.parent.mkdir(parents=True, exist_ok=True)
    outputs = {}
    if args.format in ("jsonl", "both"):
        jpath = prefix.with_suffix(".jsonl")
        _write_jsonl(jpath, stamped)
        outputs[jpath.name] = _sha256(jpath)
    if args.format in ("csv", "both"):
        cpath = prefix.with_suffix(".csv")
        _write_csv(cpath, header, rows)
        outputs[cpath.name] = _sha256(cpath)
    manifest = {
        "schema": SCHEMA_VERSION,
        "version": __version__,
        "command": args.command,
        "config": serialize_config(cfg),
        "masterSeed": cfg.master_seed,
        "workers": args.workers,
        "startedAt": started,
        "finishedAt": datetime.now(timezone.utc).isoformat(),
        "outputs": outputs,
    }
    if extras:
        manifest["result"] = extras
    mpath = prefix.with_suffix(".manifest.json")
    with open(mpath, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


# --------------------------------------------------------------------------
# shared pieces


def _require(value, key: str):
    if value is None:
        raise ConfigError(key, f"missing required key {key!r}")
    return value


def _draw_map(cfg: ExperimentConfig, use_identity: bool):
    if use_identity:
        return identity_map(cfg.n)
    rng = np.random.default_rng(mix_seed(cfg.master_seed, 0))
    if cfg.group == "ASL":
        return sample_asl(cfg.n, rng, cfg.shift_bound, cfg.norm)
    return sample_sl(cfg.n, rng)


def _volume_list(text: str, key: str) -> list[float]:
    try:
        values = [float(tok) for tok in str(text).split(",") if tok.strip()]
    except ValueError:
        raise ConfigError(key, f"{key}: expected comma separated numbers, got {text!r}") from None
    if not values:
        raise ConfigError(key, f"{key}: empty list")
    return values


def _round6(x):
    if x is None:
        return None
    return float(f"{x:.12g}")


# --------------------------------------------------------------------------
# subcommand handlers: each returns (records, csv_header, csv_rows, extras)


def _cmd_volume(cfg: ExperimentConfig, args) -> tuple:
    header = ["case", "f", "psi", "norm", "sLo", "tHi", "value", "quadError"]
    if cfg.f is not None:
        cases = [
            (
                "custom",
                cfg.f,
                _require(cfg.psi, "psi"),
                float(_require(args.t0, "t0")),
                float(_require(args.t, "t")),
            )
        ]
    else:
        cases = [(label, f, psi, lo, hi) for label, f, psi, lo, hi in verification_matrix()]
    records, rows = [], []
    for i, (label, f, psi, lo, hi) in enumerate(cases):
        norm = f.canonical_norm()
        quad = shell_volume(f, psi, norm, lo, hi)
        rec = {
            "sample": i,
            "case": label,
            "f": target_spec(f),
            "psi": psi_spec(psi),
            "norm": norm_spec(norm),
            "sLo": lo,
            "tHi": hi,
            "value": quad.value,
            "quadError": quad.error,
        }
        records.append(rec)
        rows.append([label, rec["f"], rec["psi"], rec["norm"], lo, hi, quad.value, quad.error])
    return records, header, rows, {"rows": len(rows)}


def _cmd_mc_volume(cfg: ExperimentConfig, args) -> tuple:
    f = _require(cfg.f, "f")
    psi = _require(cfg.psi, "psi")
    norm = _require(cfg.norm, "norm")
    outer = float(_require(args.outer, "outer"))
    mc = monte_carlo_region_volume(
        f, psi, norm, outer, cfg.sample_count, seed=cfg.master_seed, inner=args.inner
    )
    rec = {
        "sample": 0,
        "value": mc.value,
        "stderr": mc.stderr,
        "hits": mc.hits,
        "samples": mc.samples,
        "degenerate": mc.degenerate,
    }
    header = ["value", "stderr", "hits", "samples", "degenerate"]
    rows = [[mc.value, mc.stderr, mc.hits, mc.samples, mc.degenerate]]
    return [rec], header, rows, {"value": mc.value, "stderr": mc.stderr}


def _cmd_count(cfg: ExperimentConfig, args) -> tuple:
    f = _require(cfg.f, "f")
    norm = _require(cfg.norm, "norm")
    if args.eps is not None:
        bound = tuple([float(args.eps)] * f.component_count)
    else:
        bound = _require(cfg.psi, "psi")
    g = _draw_map(cfg, args.identity)
    query = CountQuery(
        g=g,
        f=f,
        bound=bound,
        norm=norm,
        point_class=cfg.point_class,
        t0=args.t0,
        t=float(_require(args.t, "t")),
        shell_space=args.space,
        stop_after_first=args.stop_after_first,
    )
    res = count_solutions(query)
    witness = None if res.first_witness is None else [int(x) for x in res.first_witness]
    rec = {
        "sample": 0,
        "count": res.count,
        "visited": res.visited,
        "fullScan": res.full_scan,
        "witness": witness,
        "identity": bool(args.identity),
    }
    header = ["count", "visited", "fullScan", "witness"]
    rows = [[res.count, res.visited, res.full_scan, json.dumps(witness)]]
    return [rec], header, rows, {"count": res.count}


def _cmd_classify(cfg: ExperimentConfig, args) -> tuple:
    f = _require(cfg.f, "f")
    psi = _require(cfg.psi, "psi")
    verdict = classify_series(f, psi, args.criterion, r=args.r)
    rec = {
        "sample": 0,
        "criterion": args.criterion,
        "r": args.r,
        "verdict": verdict.value,
    }
    header = ["criterion", "r", "verdict"]
    return [rec], header, [[args.criterion, args.r, verdict.value]], {"verdict": verdict.value}


def _cmd_siegel(cfg: ExperimentConfig, args) -> tuple:
    res = siegel_mean_experiment(
        cfg.n,
        float(_require(args.volume, "volume")),
        cfg.sample_count,
        cfg.master_seed,
        ensemble=args.ensemble,
        workers=args.workers,
    )
    header = ["pointClass", "mean", "stderr", "reference", "gapInStderr", "ess"]
    rows = []
    summary = {}
    for key, est in res.estimates.items():
        ref = res.references[key]
        gap = abs(est.estimate - ref) / est.stderr if est.stderr > 0 else 0.0
        rows.append([key, est.estimate, est.stderr, ref, gap, est.ess])
        summary[key] = {"mean": est.estimate, "stderr": est.stderr, "reference": ref}
    return res.records, header, rows, {"volume": res.volume, "estimates": summary}


def _cmd_rogers(cfg: ExperimentConfig, args) -> tuple:
    volumes = _volume_list(_require(args.volumes, "volumes"), "volumes")
    res = rogers_variance_experiment(
        cfg.n,
        volumes,
        cfg.sample_count,
        cfg.master_seed,
        ensemble=args.ensemble,
        ceiling=args.ceiling,
        workers=args.workers,
    )
    header = ["volume", "mean", "variance", "ratio", "flagged"]
    rows = [[r["volume"], r["mean"], r["variance"], r["ratio"], r["flagged"]] for r in res.rows]
    extras = {"rows": [{k: _round6(v) if isinstance(v, float) else v for k, v in r.items()} for r in res.rows]}
    return res.records, header, rows, extras


def _cmd_emptyprob(cfg: ExperimentConfig, args) -> tuple:
    volumes = _volume_list(_require(args.volumes, "volumes"), "volumes")
    res = empty_probability_experiment(
        cfg.n, volumes, cfg.sample_count, cfg.master_seed, r=args.r, workers=args.workers
    )
    header = ["volume", "emptyFrequency", "wilsonLow", "wilsonHigh", "slope", "slopeBound"]
    rows = [
        [r["volume"], r["empty_frequency"], r["wilson_low"], r["wilson_high"], res.slope, res.slope_bound]
        for r in res.rows
    ]
    extras = {"slope": res.slope, "slopeBound": res.slope_bound, "decayOk": res.decay_ok}
    return res.records, header, rows, extras


def _ratio_sample(payload):
    cfg, use_identity, index = payload
    if use_identity:
        g = identity_map(cfg.n)
    else:
        rng = np.random.default_rng(mix_seed(cfg.master_seed, index))
        g = sample_asl(cfg.n, rng, cfg.shift_bound, cfg.norm) if cfg.group == "ASL" else sample_sl(cfg.n, rng)
    res = counting_ratio_experiment(g, cfg.f, cfg.psi, cfg.norm, cfg.point_class, cfg.schedule)
    return index, res


def _cmd_ratio(cfg: ExperimentConfig, args) -> tuple:
    """One ratio series per sampled map; sampleCount > 1 repeats the run
    over independent maps (sample i is drawn from mix_seed(seed, i))."""
    _require(cfg.f, "f")
    _require(cfg.psi, "psi")
    _require(cfg.norm, "norm")
    _require(cfg.schedule, "schedule")
    count = 1 if args.identity else cfg.sample_count
    payloads = [(cfg, args.identity, i) for i in range(count)]
    results = _run_indexed(_ratio_sample, payloads, args.workers)
    records, rows = [], []
    per_sample = []
    header = ["sample", "t", "count", "reference", "ratio", "threshold", "constant"]
    for index, res in results:
        for r in res.rows:
            records.append(
                {
                    "sample": index,
                    "t": r["t"],
                    "count": r["count"],
                    "reference": r["reference"],
                    "ratio": r["ratio"],
                }
            )
            rows.append(
                [index, r["t"], r["count"], r["reference"], r["ratio"], res.threshold, res.constant]
            )
        per_sample.append(
            {
                "sample": index,
                "firstRatio": res.first_ratio,
                "finalRatio": res.final_ratio,
                "threshold": res.threshold,
            }
        )
    extras = {
        "constant": results[0][1].constant,
        "identity": bool(args.identity),
        "series": per_sample,
    }
    return records, header, rows, extras


def _cmd_zerofull(cfg: ExperimentConfig, args) -> tuple:
    res = zero_full_experiment(
        _require(cfg.f, "f"),
        _require(cfg.psi, "psi"),
        _require(cfg.norm, "norm"),
        cfg.point_class,
        float(_require(args.t_split, "tSplit")),
        float(_require(args.t_max, "tMax")),
        cfg.sample_count,
        cfg.master_seed,
        workers=args.workers,
    )
    header = ["fraction", "verdict", "samples"]
    rows = [[res.fraction, res.verdict.value, cfg.sample_count]]
    extras = {"fraction": res.fraction, "verdict": res.verdict.value}
    return res.records, header, rows, extras


def _cmd_uniform(cfg: ExperimentConfig, args) -> tuple:
    res = uniform_approx_experiment(
        _require(cfg.f, "f"),
        _require(cfg.psi, "psi"),
        _require(cfg.norm, "norm"),
        cfg.point_class,
        _require(cfg.schedule, "schedule"),
        cfg.sample_count,
        cfg.master_seed,
        workers=args.workers,
    )
    header = ["t", "successFraction", "samples", "passFraction"]
    rows = [
        [c["t"], c["success_fraction"], cfg.sample_count, res.pass_fraction]
        for c in res.checkpoints
    ]
    extras = {"passFraction": res.pass_fraction}
    return res.records, header, rows, extras


def _cmd_kgsystem(cfg: ExperimentConfig, args) -> tuple:
    psi = _require(cfg.psi, "psi")
    psis = [ApproxFunction((comp,)) for comp in psi.components]
    res = kg_system_experiment(
        psis,
        cfg.n,
        cfg.point_class,
        _require(cfg.schedule, "schedule"),
        cfg.sample_count,
        cfg.master_seed,
        workers=args.workers,
    )
    header = ["t", "meanCount", "verdict"]
    rows = [[r["t"], r["mean_count"], res.verdict.value] for r in res.rows]
    extras = {"verdict": res.verdict.value}
    return res.records, header, rows, extras


def _cmd_normcheck(cfg: ExperimentConfig, args) -> tuple:
    norm_b = parse_norm(_require(args.norm_b, "normB"), cfg.n)
    scales = _volume_list(args.scales, "scales")
    res = norm_independence_check(
        _require(cfg.f, "f"),
        _require(cfg.psi, "psi"),
        _require(cfg.norm, "norm"),
        norm_b,
        scales,
        cfg.sample_count,
        cfg.master_seed,
    )
    records = [{"sample": i, **row} for i, row in enumerate(res.rows)]
    header = ["scale", "volumeA", "stderrA", "volumeB", "stderrB", "trendA", "trendB", "agree"]
    rows = [
        [r["scale"], r["volume_a"], r["stderr_a"], r["volume_b"], r["stderr_b"], res.trend_a, res.trend_b, res.agree]
        for r in res.rows
    ]
    extras = {"trendA": res.trend_a, "trendB": res.trend_b, "agree": res.agree}
    return records, header, rows, extras


# --------------------------------------------------------------------------
# selftest


def nested_kernel_quadrature(k: int, z: float, c: float) -> float:
    """High-accuracy oracle for the product-family kernel recursion
    I_k(z, c) = int_0^z I_{k-1}(z, c/y) dy.  The inner closed form goes
    constant (= z^k) below the saturation point y* = c / z^(k+1), so the
    integral is split there; a plain pass over the kink stalls near 1e-7.
    """
    kink = min(c / z ** (k + 1), z)
    total = z**k * kink
    if kink < z:
        def smooth(y):
            return i_k_closed_form(k - 1, z, c / y)

        total += adaptive_simpson(smooth, kink, z, abs_tol=1e-13, rel_tol=1e-12).value
    return total


def _selftest_queries(rng: np.random.Generator):
    """Small randomized oracle queries, cheap enough to brute force."""
    targets = [
        SignedPowerForm(1, 1, 2),
        SignedPowerForm(2, 1, 2),
        SignedPowerForm(1, 1, 1),
        CoordinateProduct(2),
        CoordinateProduct(3),
        MaxPower((2.0,), 2),
        MaxPower((2.0, 1.0), 3),
    ]
    for f in targets:
        n = f.n
        g = sample_sl(n, rng)
        psi = ApproxFunction(((float(rng.uniform(0.4, 1.5)), float(rng.uniform(0.0, 0.8)), 0),))
        t = float(rng.uniform(6.0, 12.0)) if n == 2 else float(rng.uniform(4.0, 7.0))
        pc = [PointClass.ALL_NONZERO, PointClass.PRIMITIVE][int(rng.integers(2))]
        yield CountQuery(g, f, psi, f.canonical_norm(), pc, 0.0, t)


def _cmd_selftest(cfg: ExperimentConfig, args) -> tuple:
    checks: list[tuple[str, bool, str]] = []

    rng = np.random.default_rng(mix_seed(cfg.master_seed, 101))
    mismatches = 0
    total = 0
    for query in _selftest_queries(rng):
        total += 1
        if count_solutions(query).count != brute_force_count(query).count:
            mismatches += 1
    checks.append(("counter-oracle", mismatches == 0, f"{total - mismatches}/{total} queries match"))

    bad = 0
    picked = [0, 4, 7]
    for idx in picked:
        label, f, psi, lo, hi = verification_matrix()[idx]
        closed = shell_volume(f, psi, f.canonical_norm(), lo, hi)
        mc = monte_carlo_region_volume(
            f, psi, f.canonical_norm(), hi, 300_000, seed=mix_seed(cfg.master_seed, 202), inner=lo
        )
        if mc.degenerate or abs(closed.value - mc.value) > 4.0 * mc.stderr + closed.error:
            bad += 1
    checks.append(("volume-vs-mc", bad == 0, f"{len(picked) - bad}/{len(picked)} points within 4 stderr"))

    worst = 0.0
    for k in (1, 2, 3):
        for z, c in ((2.0, 1.0), (3.0, 6.0), (2.5, 0.3)):
            nested = nested_kernel_quadrature(k, z, c)
            closed = i_k_closed_form(k, z, c)
            worst = max(worst, abs(nested - closed) / max(abs(closed), 1e-30))
    checks.append(("kernel-recursion", worst < 1e-8, f"max relative gap {worst:.2e}"))

    wrong = 0
    cells = 0
    for n, d in ((3, 2), (4, 2), (4, 3)):
        for s in (0.0, 0.5, 1.0, 1.5, 2.0):
            for j in (0, 1, 2):
                cells += 1
                verdict = classify_series(
                    SignedPowerForm(n - 1, 1, d),
                    ApproxFunction(((1.0, s, j),)),
                    "asymptotic",
                )
                expected = Verdict.DIVERGES if s <= n - d else Verdict.CONVERGES
                if verdict is not expected:
                    wrong += 1
    checks.append(("classifier-grid", wrong == 0, f"{cells - wrong}/{cells} cells match the analytic rule"))

    sched = DyadicSchedule(1.0, 2.0, 3, 9)
    vals = sched.values()
    ratios = [b / a for a, b in zip(vals, vals[1:])]
    ok = all(r == 2.0 for r in ratios) and vals == sorted(vals)
    checks.append(("schedule-lacunary", ok, f"{len(vals)} checkpoints, ratio 2"))

    data = np.random.default_rng(mix_seed(cfg.master_seed, 303)).normal(3.0, 2.0, size=400)
    merged = StatSummary.from_values(data[:150]).merge(StatSummary.from_values(data[150:]))
    direct = StatSummary.from_values(data)
    ok = math.isclose(merged.mean, direct.mean, rel_tol=1e-12) and math.isclose(
        merged.variance, direct.variance, rel_tol=1e-12
    )
    checks.append(("summary-merge", ok, "parallel merge equals concatenation"))

    records = [
        {"sample": i, "check": name, "passed": passed, "detail": detail}
        for i, (name, passed, detail) in enumerate(checks)
    ]
    header = ["check", "status", "detail"]
    rows = [[name, "pass" if passed else "FAIL", detail] for name, passed, detail in checks]
    failed = sum(1 for _, passed, _ in checks if not passed)
    extras = {"failed": failed, "checks": len(checks)}
    width = max(len(name) for name, _, _ in checks)
    for name, passed, detail in checks:
        print(f"{name:<{width}}  {'pass' if passed else 'FAIL'}  {detail}")
    return records, header, rows, extras


# --------------------------------------------------------------------------
# argument parsing


_HANDLERS = {
    "volume": _cmd_volume,
    "mc-volume": _cmd_mc_volume,
    "count": _cmd_count,
    "classify": _cmd_classify,
    "siegel": _cmd_siegel,
    "rogers": _cmd_rogers,
    "emptyprob": _cmd_emptyprob,
    "ratio": _cmd_ratio,
    "zerofull": _cmd_zerofull,
    "uniform": _cmd_uniform,
    "kgsystem": _cmd_kgsystem,
    "normcheck": _cmd_normcheck,
    "selftest": _cmd_selftest,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file; flags override its values")
    common.add_argument("--seed", type=int, default=None, help="master seed (masterSeed)")
    common.add_argument("--workers", type=int, default=1, help="parallel sample workers")
    common.add_argument("--out", default="run", help="output path prefix")
    common.add_argument("--format", choices=("csv", "jsonl", "both"), default="both")

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("--n", type=int, default=None, help="ambient dimension")
    model.add_argument("--f", default=None, help="target spec, e.g. spf:p=2,q=1,d=2")
    model.add_argument("--psi", default=None, help="bound spec, e.g. pl:C=1,s=1,j=0")
    model.add_argument("--norm", default=None, help="norm spec (max, ld:<d>, block:...); defaults to the family norm")
    model.add_argument("--class", dest="point_class", choices=("nonzero", "primitive", "all"), default=None)
    model.add_argument("--group", choices=("SL", "ASL"), default=None)
    model.add_argument("--shift-bound", type=float, default=None)
    model.add_argument("--window", default=None, help="opNormBound[,shiftBound]")
    model.add_argument("--schedule", default=None, help="t0=..,ratio=..,k0=..,kmax=..")
    model.add_argument("--samples", type=int, default=None, help="sample count (sampleCount)")

    parser = argparse.ArgumentParser(
        prog="genlat",
        description="Lattice point statistics in sublevel regions: exact volumes, "
        "invariant sampling, pruned counting, and the statistical experiment suite.",
    )
    parser.add_argument("--version", action="version", version=f"genlat {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("volume", parents=[common, model], help="closed-form shell volumes (default: the 9-point verification matrix)")
    p.add_argument("--t0", type=float, default=None, help="shell start (custom row)")
    p.add_argument("--t", type=float, default=None, help="shell end (custom row)")

    p = sub.add_parser("mc-volume", parents=[common, model], help="Monte Carlo volume of a sublevel shell")
    p.add_argument("--outer", type=float, required=True)
    p.add_argument("--inner", type=float, default=0.0)

    p = sub.add_parser("count", parents=[common, model], help="count lattice points in one sublevel shell")
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--t", type=float, default=None, help="shell radius (required)")
    p.add_argument("--space", choices=("v", "w"), default="v", help="measure the radius on v or on w = g(v)")
    p.add_argument("--eps", type=float, default=None, help="fixed tolerance instead of --psi")
    p.add_argument("--identity", action="store_true", help="use the identity map (non-generic)")
    p.add_argument("--stop-after-first", action="store_true")

    p = sub.add_parser("classify", parents=[common, model], help="convergence/divergence of the family criterion")
    p.add_argument("--criterion", choices=("asymptotic", "uniform"), default="asymptotic")
    p.add_argument("--r", type=float, default=2.0)

    p = sub.add_parser("siegel", parents=[common, model], help="mean count vs c_P * volume")
    p.add_argument("--volume", type=float, default=None, required=False)
    p.add_argument("--ensemble", choices=("lattice", "grid"), default="lattice")

    p = sub.add_parser("rogers", parents=[common, model], help="count variance per region volume")
    p.add_argument("--volumes", default=None, help="comma separated V grid")
    p.add_argument("--ensemble", choices=("lattice", "grid"), default="grid")
    p.add_argument("--ceiling", type=float, default=None)

    p = sub.add_parser("emptyprob", parents=[common, model], help="P(empty region) decay across a V grid")
    p.add_argument("--volumes", default=None, help="comma separated V grid")
    p.add_argument("--r", type=float, default=2.0)

    p = sub.add_parser("ratio", parents=[common, model], help="count over c_P * volume along a schedule")
    p.add_argument("--identity", action="store_true", help="use the identity map (non-generic)")

    p = sub.add_parser("zerofull", parents=[common, model], help="fraction of sampled maps with a solution in a shell")
    p.add_argument("--t-split", type=float, default=None)
    p.add_argument("--t-max", type=float, default=None)

    sub.add_parser("uniform", parents=[common, model], help="per-checkpoint uniform approximability checks")

    sub.add_parser("kgsystem", parents=[common, model], help="componentwise simultaneous system counts")

    p = sub.add_parser("normcheck", parents=[common, model], help="norm independence of the finiteness dichotomy")
    p.add_argument("--norm-b", default=None, help="second norm spec")
    p.add_argument("--scales", default="2,4,8", help="comma separated shell scales")

    sub.add_parser("selftest", parents=[common, model], help="oracle equivalence and invariant suite")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = datetime.now(timezone.utc).isoformat()
    try:
        cfg = parse_config(args)
        records, header, rows, extras = _HANDLERS[args.command](cfg, args)
        _emit(args, cfg, records, header, rows, extras, started)
    except ConfigError as exc:
        sys.stderr.write(_json_line({"error": "config", "key": exc.key, "message": str(exc)}) + "\n")
        return 2
    except ValueError as exc:
        sys.stderr.write(_json_line({"error": "invalid", "message": str(exc)}) + "\n")
        return 2
    if args.command == "selftest" and extras.get("failed"):
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
