"""Batch front-end: ``stable-sde <subcommand> --config run.yaml``.

Precedence of settings: command-line flag > environment variable > config
file.  Environment variables mirror the flags: ``STABLE_SDE_CONFIG``,
``STABLE_SDE_SEED``, ``STABLE_SDE_THREADS``, ``STABLE_SDE_OUT``.

Exit status: 0 when a run completes (or its report passes), 2 when a report
fails, 1 on any error (including invalid configuration).
"""

import argparse
import copy
import datetime
import hashlib
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np
import yaml

from . import catalog
from .coefficients import Modulus, MollifierFamily
from .driver import ReplicationSeed, StableParams, increment_matrix, sample_increments
from .engine import CauchyBudget, Partition, cauchy_construction, euler_maruyama
from .errors import ConfigError, StableSDEError
from .experiments import (
    _fmt,
    convergence_study,
    default_beta,
    dumps,
    stability_study,
    stability_study_bo,
    tail_check,
)
from .generator import QuadratureSpec, verify_identity

log = logging.getLogger("stable_sde")

SUBCOMMANDS = (
    "sample-stable",
    "simulate",
    "converge",
    "stability",
    "stability-bo",
    "verify-generator",
    "cauchy",
    "tail-check",
)
ENV = {"config": "STABLE_SDE_CONFIG", "seed": "STABLE_SDE_SEED", "threads": "STABLE_SDE_THREADS", "out": "STABLE_SDE_OUT"}
DEFAULT_SEED = 12345


# ---------------------------------------------------------------------------
# configuration


def _get(cfg, key, section=None, default=None, required=False):
    src = cfg.get(section, {}) if section else cfg
    if src is None:
        src = {}
    if not isinstance(src, dict):
        raise ConfigError(section, "must be a mapping")
    if key not in src:
        if required:
            raise ConfigError(f"{section}.{key}" if section else key, "missing required field")
        return default
    return src[key]


def _num(value, field, lo=None, hi=None, integer=False, lo_open=False, hi_open=False):
    try:
        v = int(value) if integer else float(value)
        if integer and v != value:
            raise ValueError
    except (TypeError, ValueError):
        raise ConfigError(field, f"expected {'an integer' if integer else 'a number'}, got {value!r}") from None
    if not integer and not math.isfinite(v):
        raise ConfigError(field, "must be finite")
    if lo is not None and (v <= lo if lo_open else v < lo):
        raise ConfigError(field, f"must be {'>' if lo_open else '>='} {lo}, got {v}")
    if hi is not None and (v >= hi if hi_open else v > hi):
        raise ConfigError(field, f"must be {'<' if hi_open else '<='} {hi}, got {v}")
    return v


def _levels(value, field):
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigError(field, "expected a non-empty list of dyadic levels")
    return [_num(v, f"{field}[{i}]", lo=0, hi=24, integer=True) for i, v in enumerate(value)]


def validate(cfg, subcommand):
    """Check a parsed config against every precondition used by ``subcommand``.

    Returns a normalized copy; raises :class:`ConfigError` naming the field.
    """
    if not isinstance(cfg, dict):
        raise ConfigError("<root>", "config must be a mapping")
    cfg = copy.deepcopy(cfg)
    if cfg.get("subcommand", subcommand) != subcommand:
        raise ConfigError("subcommand", f"config is for {cfg['subcommand']!r}, not {subcommand!r}")
    out = {"subcommand": subcommand}
    out["alpha"] = _num(_get(cfg, "alpha", required=True), "alpha", 1.0, 2.0, lo_open=True, hi_open=True)
    alpha = out["alpha"]
    out["T"] = _num(_get(cfg, "T", default=1.0), "T", 0.0, lo_open=True)
    out["seed"] = _num(_get(cfg, "seed", default=DEFAULT_SEED), "seed", 0, 2**64 - 1, integer=True)
    beta = _get(cfg, "beta")
    out["beta"] = default_beta(alpha) if beta is None else _num(beta, "beta", 1.0, alpha, lo_open=True, hi_open=True)
    out["N"] = _num(_get(cfg, "N", default=500), "N", 30, integer=True)
    est = _get(cfg, "estimator", default="auto")
    if est not in ("auto", "mean", "mom"):
        raise ConfigError("estimator", f"choose auto, mean or mom, got {est!r}")
    out["estimator"] = est
    out["x0"] = _num(_get(cfg, "x0", default=0.0), "x0")
    M0 = _get(cfg, "M0")
    out["M0"] = None if M0 is None else _num(M0, "M0", 0.0)
    if out["M0"] is not None and abs(out["x0"]) > out["M0"]:
        raise ConfigError("x0", f"|x0| exceeds M0={out['M0']}")
    coef = _get(cfg, "coefficient", default={"id": "holder"})
    if isinstance(coef, str):
        coef = {"id": coef}
    if not isinstance(coef, dict) or "id" not in coef:
        raise ConfigError("coefficient.id", "missing required field")
    out["coefficient"] = coef
    out["output"] = {"dir": str(_get(cfg, "dir", "output", default="out"))}

    section = subcommand.replace("-", "_")
    sec = cfg.get(section) or {}
    if not isinstance(sec, dict):
        raise ConfigError(section, "must be a mapping")
    f = lambda k: f"{section}.{k}"
    if subcommand == "sample-stable":
        sec.setdefault("N", 100_000)
        _num(sec["N"], f("N"), 30, integer=True)
        sec["xi"] = [_num(v, f("xi")) for v in sec.get("xi", [0.5, 1.0, 2.0])]
        sec["t"] = [_num(v, f("t"), 0.0, out["T"], lo_open=True) for v in sec.get("t", [0.5, 1.0])]
    elif subcommand == "simulate":
        sec["level"] = _num(sec.get("level", 10), f("level"), 0, 24, integer=True)
        sec["index"] = _num(sec.get("index", 0), f("index"), 0, integer=True)
    elif subcommand == "converge":
        sec["ladder"] = _levels(sec.get("ladder", [4, 5, 6, 7, 8, 9, 10]), f("ladder"))
        sec["fine_level"] = _num(sec.get("fine_level", 14), f("fine_level"), 0, 24, integer=True)
        if max(sec["ladder"]) > sec["fine_level"]:
            raise ConfigError(f("ladder"), "levels must not exceed fine_level")
        if sec.setdefault("interpolation", "em") not in ("em", "step"):
            raise ConfigError(f("interpolation"), "choose em or step")
    elif subcommand in ("stability", "stability-bo"):
        seq = sec.get("sequence", {"id": "shift" if subcommand == "stability" else "cap"})
        sec["sequence"] = {"id": seq} if isinstance(seq, str) else seq
        sec["members"] = [_num(v, f("members"), 1, integer=True) for v in sec.get("members", [1, 2, 4, 8, 16])]
        sec["fine_level"] = _num(sec.get("fine_level", 14), f("fine_level"), 0, 24, integer=True)
        sec["x0_offset"] = _num(sec.get("x0_offset", 0.0), f("x0_offset"))
        if subcommand == "stability-bo":
            sec["M"] = _num(sec.get("M", 10.0), f("M"), 0.0, lo_open=True)
            sec["m_max"] = _num(sec.get("m_max", 8), f("m_max"), 1, 20, integer=True)
    elif subcommand == "verify-generator":
        sec["m"] = _num(sec.get("m", 1), f("m"), 1, 4, integer=True)
        mod = sec.get("modulus", {"scale": 1.0, "power": 1.0})
        sec["modulus"] = {"scale": _num(mod.get("scale", 1.0), f("modulus.scale"), 0.0, lo_open=True),
                          "power": _num(mod.get("power", 1.0), f("modulus.power"), 1.0)}
        sec["tolerance"] = _num(sec.get("tolerance", 1e-3), f("tolerance"), 0.0, lo_open=True)
        sec["inner"] = _num(sec.get("inner", 1e-3), f("inner"), 0.0, lo_open=True)
        sec["quad_tolerance"] = _num(sec.get("quad_tolerance", 1e-6), f("quad_tolerance"), 0.0, 1e-2, lo_open=True)
    elif subcommand == "cauchy":
        sec["levels"] = _levels(sec.get("levels", list(range(4, 13))), f("levels"))
        sec["eps1"] = _num(sec.get("eps1", 0.12), f("eps1"), 0.0, lo_open=True)
        sec["ratio"] = _num(sec.get("ratio", 0.75), f("ratio"), 0.0, 1.0, lo_open=True, hi_open=True)
        if len(sec["levels"]) < 2 or any(b <= a for a, b in zip(sec["levels"], sec["levels"][1:])):
            raise ConfigError(f("levels"), "need at least two strictly increasing levels")
    elif subcommand == "tail-check":
        lam = sec.get("lambdas", {})
        sec["lambdas"] = {"min": _num(lam.get("min", 1.0), f("lambdas.min"), 0.0, lo_open=True),
                          "max": _num(lam.get("max", 60.0), f("lambdas.max"), 0.0, lo_open=True),
                          "num": _num(lam.get("num", 25), f("lambdas.num"), 4, integer=True)}
        if math.log10(sec["lambdas"]["max"] / sec["lambdas"]["min"]) < 1.5:
            raise ConfigError(f("lambdas"), "grid must span at least 1.5 decades")
        sec["steps_level"] = _num(sec.get("steps_level", 8), f("steps_level"), 1, 16, integer=True)
        H = sec.get("H", 1.0)
        if isinstance(H, dict):
            H = {"coarse_level": _num(H.get("coarse_level", 4), f("H.coarse_level"), 0, sec["steps_level"],
                                      integer=True)}
        else:
            H = _num(H, f("H"))
        sec["H"] = H
        if out["N"] < 10_000:
            raise ConfigError("N", "tail-check needs N >= 10000")
    out[section] = sec

    # build once so catalog errors surface as config errors
    try:
        coefficient(out)
        if subcommand in ("stability", "stability-bo"):
            sequence(out)
    except StableSDEError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("coefficient", str(exc)) from None
    return out


def config_hash(cfg):
    """SHA-256 of the canonical JSON of the normalized config (output location excluded)."""
    body = {k: v for k, v in cfg.items() if k != "output"}
    text = json.dumps(body, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(text.encode()).hexdigest()


def coefficient(cfg):
    return catalog.build_coefficient(cfg["coefficient"], cfg["alpha"])


def sequence(cfg):
    sec = cfg[cfg["subcommand"].replace("-", "_")]
    return catalog.build_sequence(sec["sequence"], coefficient(cfg), cfg["alpha"])


def _estimator(cfg):
    return None if cfg["estimator"] == "auto" else cfg["estimator"]


# ---------------------------------------------------------------------------
# subcommands; each returns (status, {suffix: writer}, summary)


def _table_writer(table, h):
    return lambda fh: table.to_csv(fh, h)


def run_sample_stable(cfg, h, threads):
    sec = cfg["sample_stable"]
    rows = []
    ok = True
    for t in sec["t"]:
        dz = increment_matrix(cfg["seed"], range(int(sec["N"])), np.array([0.0, t]), cfg["alpha"])[:, 0]
        for xi in sec["xi"]:
            c = np.cos(xi * dz)
            exact = math.exp(-t * abs(xi) ** cfg["alpha"])
            se = float(c.std(ddof=1) / math.sqrt(c.size))
            z = (float(c.mean()) - exact) / se if se > 0 else 0.0
            ok &= abs(z) <= 3.0
            rows.append((t, xi, float(c.mean()), exact, se, z))

    def write(fh):
        fh.write(f"# config_hash: {h}\n")
        fh.write("t,xi,empirical_cf,exact_cf,std_error,z_score\n")
        for r in rows:
            fh.write(",".join(_fmt(v) for v in r) + "\n")

    return ("PASS" if ok else "FAIL"), {"cf": write}, {"max_abs_z": max(abs(r[-1]) for r in rows)}


def run_simulate(cfg, h, threads):
    sec = cfg["simulate"]
    params = StableParams(cfg["alpha"], cfg["T"])
    part = Partition.dyadic(cfg["T"], sec["level"])
    drv = sample_increments(ReplicationSeed(cfg["seed"], sec["index"]), params, part.times)
    path = euler_maruyama(coefficient(cfg), cfg["x0"], drv, part, M0=cfg["M0"])

    def w_path(fh):
        fh.write(f"# config_hash: {h}\n")
        path.to_csv(fh)

    def w_drv(fh):
        fh.write(f"# config_hash: {h}\n")
        drv.to_csv(fh)

    return "complete", {"path": w_path, "driver": w_drv}, {"X_T": float(path.values[-1]), "steps": len(part)}


def run_converge(cfg, h, threads):
    sec = cfg["converge"]
    T = cfg["T"]
    tab = convergence_study(
        coefficient(cfg), cfg["alpha"], [Partition.dyadic(T, lv) for lv in sec["ladder"]],
        Partition.dyadic(T, sec["fine_level"]), beta=cfg["beta"], N=cfg["N"], seed=cfg["seed"], x0=cfg["x0"],
        T=T, estimator=_estimator(cfg), interpolation=sec["interpolation"], threads=threads, M0=cfg["M0"],
    )
    return "complete", {"table": _table_writer(tab, h)}, tab.summary()


def _x0_n(cfg, sec):
    off = sec["x0_offset"]
    return None if off == 0 else (lambda n: cfg["x0"] + off / n)


def run_stability(cfg, h, threads):
    sec = cfg["stability"]
    tab = stability_study(
        sequence(cfg), cfg["alpha"], x0=cfg["x0"], x0_n=_x0_n(cfg, sec), members=sec["members"],
        fine=Partition.dyadic(cfg["T"], sec["fine_level"]), beta=cfg["beta"], N=cfg["N"], seed=cfg["seed"],
        T=cfg["T"], M0=cfg["M0"], estimator=_estimator(cfg), threads=threads,
    )
    return "complete", {"table": _table_writer(tab, h)}, tab.summary()


def run_stability_bo(cfg, h, threads):
    sec = cfg["stability_bo"]
    tab = stability_study_bo(
        sequence(cfg), cfg["alpha"], x0=cfg["x0"], x0_n=_x0_n(cfg, sec), members=sec["members"],
        fine=Partition.dyadic(cfg["T"], sec["fine_level"]), beta=cfg["beta"], N=cfg["N"], seed=cfg["seed"],
        T=cfg["T"], M=sec["M"], m_max=sec["m_max"], estimator=_estimator(cfg), threads=threads,
    )
    return "complete", {"table": _table_writer(tab, h)}, tab.summary()


def run_verify_generator(cfg, h, threads):
    sec = cfg["verify_generator"]
    mod = Modulus.power(sec["modulus"]["scale"], sec["modulus"]["power"])
    family = MollifierFamily.komatsu(mod, cfg["alpha"], sec["m"] + 1)
    spec = QuadratureSpec(inner=sec["inner"], tolerance=sec["quad_tolerance"])
    rep = verify_identity(family, sec["m"], spec=spec, tolerance=sec["tolerance"])
    summary = rep.summary()
    summary["notes"] = rep.notes
    return ("PASS" if rep.passed else "FAIL"), {"identity": lambda fh: rep.to_csv(fh, h)}, summary


def run_cauchy(cfg, h, threads):
    sec = cfg["cauchy"]
    budget = CauchyBudget.dyadic(sec["eps1"], sec["ratio"], sec["levels"], cfg["T"])
    rep = cauchy_construction(coefficient(cfg), cfg["x0"], budget, cfg["seed"], cfg["N"], cfg["beta"], cfg["alpha"],
                              estimator=_estimator(cfg))

    def write(fh):
        fh.write(f"# config_hash: {h}\n")
        rows = list(rep.rows())
        fh.write(",".join(rows[0]) + "\n")
        for r in rows:
            fh.write(",".join(_fmt(v) for v in r.values()) + "\n")

    summary = {
        "estimates": rep.estimates, "eps": rep.eps, "violations": rep.violations,
        "weighted_sum": rep.weighted_sum, "closed_form_sum": rep.closed_form_sum,
        "summable": rep.summable, "limit_mesh": rep.limit_mesh, "passed": rep.passed,
    }
    return ("PASS" if rep.passed else "FAIL"), {"budget": write}, summary


def run_tail_check(cfg, h, threads):
    sec = cfg["tail_check"]
    lam = sec["lambdas"]
    lambdas = np.logspace(math.log10(lam["min"]), math.log10(lam["max"]), lam["num"])
    H = sec["H"]
    if isinstance(H, dict):
        H = {"coefficient": coefficient(cfg), "coarse": Partition.dyadic(cfg["T"], H["coarse_level"]), "x0": cfg["x0"]}
    rep = tail_check(H, cfg["alpha"], lambdas, N=cfg["N"], seed=cfg["seed"], T=cfg["T"], steps=2 ** sec["steps_level"])
    return "complete", {"tail": lambda fh: rep.to_csv(fh, h)}, rep.summary()


RUNNERS = {
    "sample-stable": run_sample_stable,
    "simulate": run_simulate,
    "converge": run_converge,
    "stability": run_stability,
    "stability-bo": run_stability_bo,
    "verify-generator": run_verify_generator,
    "cauchy": run_cauchy,
    "tail-check": run_tail_check,
}


# ---------------------------------------------------------------------------
# entry point


def _stem(cfg):
    sub = cfg["subcommand"]
    return f"{sub}_{cfg['coefficient']['id']}_a{cfg['alpha']:g}_b{cfg['beta']:g}"


def build_parser():
    p = argparse.ArgumentParser(prog="stable-sde", description=__doc__.splitlines()[0])
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--config", help="YAML run configuration")
    p.add_argument("--seed", type=int, help="master seed (overrides the config)")
    p.add_argument("--threads", type=int, help="worker threads (results do not depend on it)")
    p.add_argument("--out", help="output directory (overrides the config)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def run(subcommand, cfg, out=None, threads=None):
    """Validate, run and write artifacts; return ``(exit_code, paths, summary)``."""
    cfg = validate(cfg, subcommand)
    if out is not None:
        cfg["output"]["dir"] = str(out)
    h = config_hash(cfg)
    threads = threads or os.cpu_count() or 1
    status, writers, summary = RUNNERS[subcommand](cfg, h, threads)
    outdir = Path(cfg["output"]["dir"])
    outdir.mkdir(parents=True, exist_ok=True)
    stem = _stem(cfg)
    paths = []
    for suffix, write in writers.items():
        path = outdir / f"{stem}_{suffix}.csv"
        with open(path, "w", newline="") as fh:
            write(fh)
        paths.append(path)
    meta = {
        "subcommand": subcommand,
        "status": status,
        "config": cfg,
        "config_hash": h,
        "seed": cfg["seed"],
        "threads": threads,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "files": [p.name for p in paths],
        "result": summary,
    }
    path = outdir / f"{stem}.json"
    path.write_text(dumps(meta) + "\n")
    paths.append(path)
    return (2 if status == "FAIL" else 0), paths, meta


def _env_int(name, field):
    v = os.environ.get(name)
    if v is None or v == "":
        return None
    try:
        return int(v)
    except ValueError:
        raise ConfigError(field, f"environment variable {name}={v!r} is not an integer") from None


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg_path = args.config or os.environ.get(ENV["config"])
        cfg = {}
        if cfg_path:
            try:
                with open(cfg_path) as fh:
                    cfg = yaml.safe_load(fh) or {}
            except OSError as exc:
                raise ConfigError("--config", f"cannot read {cfg_path}: {exc.strerror}") from None
            except yaml.YAMLError as exc:
                raise ConfigError("--config", f"invalid YAML: {exc}") from None
        if not isinstance(cfg, dict):
            raise ConfigError("<root>", "config must be a mapping")
        seed = args.seed if args.seed is not None else _env_int(ENV["seed"], "seed")
        if seed is not None:
            cfg["seed"] = seed
        threads = args.threads if args.threads is not None else _env_int(ENV["threads"], "threads")
        if threads is not None and threads < 1:
            raise ConfigError("threads", "must be >= 1")
        out = args.out or os.environ.get(ENV["out"])
        code, paths, meta = run(args.subcommand, cfg, out=out, threads=threads)
    except ConfigError as exc:
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return 1
    except StableSDEError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    print(f"{meta['status']}: {args.subcommand} ({meta['config_hash'][:12]})")
    for p in paths:
        print(f"  wrote {p}")
    return code


if __name__ == "__main__":
    sys.exit(main())
