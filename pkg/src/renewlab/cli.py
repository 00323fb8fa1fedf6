"""Experiment runner: every check in the package as a CLI subcommand.

    lab <kind> [--gamma G] [--p P] [--xi XI] [--n N] [--bins B]
               [--trials T] [--seed S] [--g NAME] [--out DIR]
    lab --config FILE

Each run writes three things into --out: ``config.txt`` (the resolved
flat key-value config, replayable via ``lab --config``), the data CSVs
of the experiment, and ``verdicts.json`` (pass/fail per metric, stable
key order). The exit status is 0 exactly when every verdict passed.

Outputs are deterministic: identical configs give byte-identical files.
Wall times are printed to stdout only, never written to the files, and
independent sub-checks run on a thread pool capped by LAB_THREADS with
results collected in submission order, so the files do not depend on
timing or on the worker count.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import math
import os
import pathlib
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ResourceError
from .maps import (
    MapSpec,
    darling_kac_empirical,
    fit_power_exponent,
    infinite_density_profile,
    map_tied_down_estimate,
    occupation_sample,
    return_time_sample,
)
from .regvar import RegVarying, equidist_average, lemma22_limit, lemma22_sum, u_rate
from .renewal import (
    LatticeLaw,
    build_continuous_law,
    mc_tied_down_continuous,
    nagaev_check,
    periodic_llt_profile,
    renewal_mass_series,
    srt_profile,
    tail_constant,
    tied_down_functional,
)
from .stable import (
    StableFamily,
    ml_density,
    ml_moment,
    sample_stable,
    stable_density,
    tied_down_expect,
)
from .tableio import build_tag, fmt17, write_metadata, write_profile
from .walk import (
    WalkLaw,
    bridge_local_time_exact,
    bridge_local_time_mc,
    bridge_local_time_moments,
)
from .weights import WEIGHTS, resolve_weight

__all__ = [
    "ExperimentConfig",
    "Verdict",
    "KINDS",
    "parse_config",
    "run_experiment",
    "emit_report",
    "main",
]

KINDS = (
    "dist",
    "lemma22",
    "equidist",
    "renewal-srt",
    "renewal-tied",
    "renewal-llt",
    "renewal-nagaev",
    "renewal-continuous",
    "map-tail",
    "map-density",
    "map-dk",
    "map-tied",
    "walk-bridge",
)

# per-kind defaults; everything not named here falls back to the
# dataclass defaults below
_KIND_DEFAULTS: dict = {
    "dist": dict(trials=10**6),
    "lemma22": dict(n=10**6),
    "equidist": dict(xi=math.sqrt(2.0), n=10**5),
    "renewal-srt": dict(gamma=0.7, n=10**4),
    "renewal-tied": dict(gamma=0.7, g="identity", n=10**4),
    "renewal-llt": dict(p=3, n=2000),
    "renewal-nagaev": dict(n=10**5),
    "renewal-continuous": dict(gamma=0.6, n=10**4, trials=10**6),
    "map-tail": dict(trials=10**6),
    "map-density": dict(n=150_000),
    "map-dk": dict(n=10**5, trials=10**4),
    "map-tied": dict(n=10**4, trials=10**5),
    "walk-bridge": dict(n=2000),
}


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: a kind plus every numeric knob it may consume.

    Parameters are validated against the owning operation's preconditions
    at dispatch time (the operations raise ValueError themselves); only
    the kind and the weight name are checked here, because they select
    the dispatch target.
    """

    kind: str
    gamma: float = 0.5
    p: int = 1
    xi: float = 1.0
    n: int = 1000
    bins: int = 48
    trials: int = 0
    seed: int = 0
    g: str = "const"
    out: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(
                f"unknown experiment kind {self.kind!r}; pick one of {', '.join(KINDS)}"
            )
        if self.g not in WEIGHTS:
            raise ValueError(
                f"unknown weight {self.g!r}; the catalogue is {', '.join(sorted(WEIGHTS))}"
            )
        if not self.out:
            object.__setattr__(self, "out", f"runs/{self.kind}")

    @classmethod
    def for_kind(cls, kind: str, **overrides) -> "ExperimentConfig":
        """Config with the kind's own defaults, then explicit overrides."""
        params = dict(_KIND_DEFAULTS.get(kind, ()))
        params.update({k: v for k, v in overrides.items() if v is not None})
        return cls(kind, **params)

    def serialize(self) -> str:
        """Flat key-value document; ``parse_config`` inverts it exactly."""
        lines = []
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            lines.append(f"{f.name} = {v!r}" if isinstance(v, float) else f"{f.name} = {v}")
        return "\n".join(lines) + "\n"

    def experiment_id(self) -> str:
        """Stable id for reports: the kind plus a parameter digest.

        The output directory is not part of the identity, so the same
        experiment written to two places emits identical reports.
        """
        doc = "".join(line for line in self.serialize().splitlines(keepends=True)
                      if not line.startswith("out "))
        digest = hashlib.sha1(doc.encode()).hexdigest()[:10]
        return f"{self.kind}-{digest}"


def parse_config(text: str) -> ExperimentConfig:
    """Parse the flat key-value config document back into a config."""
    fields = {f.name for f in dataclasses.fields(ExperimentConfig)}
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if not sep or key not in fields:
            raise ValueError(f"config line {lineno}: expected 'key = value' with a known key, got {raw!r}")
        if key in ("kind", "g", "out"):
            values[key] = val
        elif key in ("gamma", "xi"):
            values[key] = float(val)
        else:
            values[key] = int(val)
    if "kind" not in values:
        raise ValueError("config document does not set the experiment kind")
    return ExperimentConfig(**values)


@dataclass(frozen=True)
class Verdict:
    """One checked metric: pass means the observed value met its target.

    Two-sided metrics pass when |observed - target| <= tolerance; with
    tolerance None the metric is one-sided and passes when
    observed <= target. ``seed`` is None for exact (seed-free) metrics.
    ``runtime`` is wall seconds; it is printed but kept out of report
    files so identical runs diff clean.
    """

    metric: str
    observed: float
    target: float
    tolerance: Optional[float]
    passed: bool
    runtime: float
    seed: Optional[int]

    @classmethod
    def two_sided(cls, metric, observed, target, tolerance, runtime, seed=None):
        ok = abs(observed - target) <= tolerance
        return cls(metric, float(observed), float(target), float(tolerance),
                   bool(ok), float(runtime), seed)

    @classmethod
    def bound(cls, metric, observed, bound, runtime, seed=None):
        return cls(metric, float(observed), float(bound), None,
                   bool(observed <= bound), float(runtime), seed)

    def describe(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        shape = (
            f"target={self.target:g} tol={self.tolerance:g}"
            if self.tolerance is not None
            else f"bound={self.target:g}"
        )
        tail = f" seed={self.seed}" if self.seed is not None else ""
        return (
            f"{flag} {self.metric} observed={self.observed:.6g} {shape}"
            f"{tail} [{self.runtime:.2f}s]"
        )


def emit_report(experiment_id: str, verdicts: list, path) -> pathlib.Path:
    """One JSON document keyed by experiment id, diffable across runs.

    Keys are sorted and runtimes are omitted, so two runs of the same
    config emit byte-identical bytes; the seed of every stochastic
    verdict is recorded.
    """
    body = {
        experiment_id: {
            "passed": all(v.passed for v in verdicts),
            "verdicts": [
                {
                    "metric": v.metric,
                    "observed": v.observed,
                    "passed": v.passed,
                    "seed": v.seed,
                    "target": v.target,
                    "tolerance": v.tolerance,
                }
                for v in verdicts
            ],
        }
    }
    return write_metadata(path, body)


def _max_workers() -> int:
    env = os.environ.get("LAB_THREADS", "").strip()
    if env:
        return max(1, int(env))
    return min(4, os.cpu_count() or 1)


def _run_ordered(tasks: list) -> list:
    """Run independent callables, results in submission order."""
    workers = min(_max_workers(), len(tasks))
    if workers <= 1:
        return [t() for t in tasks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(t) for t in tasks]
        return [f.result() for f in futures]


def _write_rows(path: pathlib.Path, header: str, rows: list) -> None:
    lines = [header]
    lines.extend(",".join(fmt17(c) if isinstance(c, float) else str(c) for c in row)
                 for row in rows)
    path.write_text("\n".join(lines) + "\n")


def _meta(cfg: ExperimentConfig, **extra) -> dict:
    base = {"gamma": cfg.gamma, "git_describe": build_tag(),
            "kind": cfg.kind, "seed": cfg.seed}
    base.update(extra)
    return base


_RUNNERS: dict = {}


def _kind(name: str):
    def deco(fn: Callable):
        _RUNNERS[name] = fn
        return fn
    return deco


@_kind("dist")
def _run_dist(cfg: ExperimentConfig, outdir: pathlib.Path) -> list:
    fam = StableFamily(cfg.gamma)
    xs = np.linspace(0.05, 20.0, 400)
    ys = np.linspace(1e-3, 5.0, 400)

    def density_curve():
        return stable_density(fam, xs)

    def ml_curve():
        return ml_density(fam, ys)

    def moment_sample():
        z = sample_stable(fam, cfg.seed, cfg.trials)
        return z ** (-fam.gamma)

    t0 = time.perf_counter()
    fz, fy, y1 = _run_ordered([density_curve, ml_curve, moment_sample])
    elapsed = time.perf_counter() - t0

    verdicts = []
    if cfg.gamma == 0.5:
        levy = (1.0 / math.pi) * xs**-1.5 * np.exp(-1.0 / (math.pi * xs))
        half = (2.0 / math.pi) * np.exp(-(ys**2) / math.pi)
        verdicts.append(Verdict.bound(
            "stable-density-anchor-sup", float(np.abs(fz - levy).max()), 1e-6, elapsed))
        verdicts.append(Verdict.bound(
            "ml-density-anchor-sup", float(np.abs(fy - half).max()), 1e-6, elapsed))
    for k in (1, 2, 3):
        t0 = time.perf_counter()
        yk = y1**k
        se = float(yk.std(ddof=1)) / math.sqrt(yk.size)
        dev = abs(float(yk.mean()) - ml_moment(fam, k)) / se
        verdicts.append(Verdict.bound(
            f"ml-moment-k{k}-dev-se", dev, 4.0, time.perf_counter() - t0, cfg.seed))
    write_profile(outdir / "density.csv", xs, fz,
                  _meta(cfg, trials=cfg.trials))
    write_profile(outdir / "ml_density.csv", ys, fy)
    return verdicts


@_kind("lemma22")
def _run_lemma22(cfg: ExperimentConfig, outdir: pathlib.Path) -> list:
    xi = int(cfg.xi)
    fam = StableFamily(cfg.gamma)
    a = LatticeLaw(cfg.gamma, cfg.p, xi).calibrated_rv()
    c, d = 0.05, 40.0
    t0 = time.perf_counter()
    limit = lemma22_limit(fam, cfg.g, c, d, 1.0)
    ns = np.unique(np.geomspace(1000, cfg.n, 7).astype(int))
    sums = [lemma22_sum(a, cfg.p, xi, (0.0, 1.0), cfg.g, c, d, int(n)).value
            for n in ns]
    elapsed = time.perf_counter() - t0
    write_profile(outdir / "window_sums.csv", ns.astype(float), np.array(sums),
                  _meta(cfg, p=cfg.p, xi=xi, n=cfg.n, g=cfg.g, limit=limit))
    tol = 0.02 if cfg.p == 1 else 0.03
    return [Verdict.two_sided("window-sum-over-limit", sums[-1] / limit,
                              1.0, tol, elapsed)]


@_kind("equidist")
def _run_equidist(cfg: ExperimentConfig, outdir: pathlib.Path) -> list:
    a = RegVarying(cfg.gamma, tail_constant(cfg.gamma))
    w = u_rate(a, np.arange(1, cfg.n + 1))
    window = (0.0, 0.5)
    t0 = time.perf_counter()
    ns = np.unique(np.geomspace(100, cfg.n, 9).astype(int))
    ratios = []
    for n in ns:
        res = equidist_average(w[:n], cfg.xi, 1.0, window)
        ratios.append(res.value / res.companion)
    elapsed = time.perf_counter() - t0
    write_profile(outdir / "visit_ratio.csv", ns.astype(float), np.array(ratios),
                  _meta(cfg, xi=cfg.xi, n=cfg.n))
    return [Verdict.two_sided("visit-ratio", ratios[-1], 1.0, 0.02, elapsed)]


@_kind("renewal-srt")
def _run_srt(cfg: ExperimentConfig, outdir: pathlib.Path) -> list:
    law = LatticeLaw(cfg.gamma, cfg.p, int(cfg.xi))
    t0 = time.perf_counter()
    prof = srt_profile(law, None, cfg.n)
    mass = renewal_mass_series(law, cfg.n)
    elapsed = time.perf_counter() - t0
    a = law.calibrated_rv()
    ns = np.unique(np.geomspace(10, cfg.n, 25).astype(int))
    ratios = mass[ns] / u_rate(a, ns)
    write_profile(outdir / "srt_ratio.csv", ns.astype(float), ratios,
                  _meta(cfg, p=cfg.p, xi=law.xi, n=cfg.n))
    return [Verdict.two_sided("srt-ratio", prof.ratio, 1.0, 0.1, elapsed)]


@_kind("renewal-tied")
def _run_tied(cfg: ExperimentConfig, outdir: pathlib.Path) -> list:
    law = LatticeLaw(cfg.gamma, cfg.p, int(cfg.xi))
    fam = StableFamily(cfg.gamma)
    target = tied_down_expect(fam, resolve_weight(cfg.g))
    t0 = time.perf_counter()
    ns = np.unique(np.geomspace(100, cfg.n, 12).astype(int))
    vals = np.array([tied_down_functional(law, None, int(n), cfg.g) for n in ns])
    elapsed = time.perf_counter() - t0
    write_profile(outdir / "tied_functional.csv", ns.astype(float), vals,
                  _meta(cfg, g=cfg.g, n=cfg.n, target=target))
    return [Verdict.two_sided(f"tied-down-{cfg.g}", float(vals[-1]), target,
                              0.1 * target, elapsed)]


@_kind("renewal-llt")
def _run_llt(cfg: ExperimentConfig, outdir: pathlib.Path) -> list:
    law = LatticeLaw(cfg.gamma, cfg.p, int(cfg.xi))
    t0 = time.perf_counter()
    prof = periodic_llt_profile(law, None, cfg.n)
    elapsed = time.perf_counter() - t0
    _write_rows(outdir / "llt_profile.csv", "k,observed,limit",
                [(int(k), float(l), float(r))
                 for k, l, r in zip(prof.k, prof.lhs, prof.rhs)])
    live = prof.rhs > 0.0
    dev = float(np.abs(prof.lhs[live] - prof.rhs[live]).max() / prof.rhs.max())
    verdicts = [Verdict.bound("llt-relative-sup", dev, 0.05, elapsed)]
    if law.p > 1:
        zero_leak = float(np.abs(prof.lhs[~live]).max()) if (~live).any() else 0.0
        verdicts.append(Verdict.bound("llt-off-lattice-mass", zero_leak, 0.0, elapsed))
    return verdicts


@_kind("renewal-nagaev")
def _run_nagaev(cfg: ExperimentConfig, outdir: pathlib.Path) -> list:
    law = LatticeLaw(cfg.gamma, cfg.p, int(cfg.xi))
    ts = (0.5, 1.0)

    def gap_at(t):
        t0 = time.perf_counter()
        pair = nagaev_check(law, t, cfg.n)
        return abs(pair.lhs - pair.rhs), time.perf_counter() - t0

    results = _run_ordered([lambda t=t: gap_at(t) for t in ts])
    write_profile(outdir / "char_gap.csv", np.array(ts),
                  np.array([g for g, _ in results]),
                  _meta(cfg, p=cfg.p, xi=law.xi, n=cfg.n))
    return [Verdict.bound(f"char-gap-t{t:g}", gap, 0.02, rt)
            for t, (gap, rt) in zip(ts, results)]


@_kind("renewal-continuous")
def _run_continuous(cfg: ExperimentConfig, outdir: pathlib.Path) -> list:
    law = build_continuous_law(cfg.gamma)
    fam = StableFamily(cfg.gamma)
    window = (0.0, 0.5)
    target = (window[1] - window[0]) * tied_down_expect(fam, resolve_weight(cfg.g))
    t0 = time.perf_counter()
    est = mc_tied_down_continuous(law, None, cfg.n, window, cfg.g,
                                  cfg.trials, cfg.seed)
    elapsed = time.perf_counter() - t0
    _write_rows(outdir / "window_estimate.csv", "n,estimate,stderr,target",
                [(cfg.n, est.estimate, est.stderr, target)])
    dev_se = abs(est.estimate - target) / est.stderr
    return [Verdict.bound("window-estimate-dev-se", dev_se, 3.0, elapsed, cfg.seed)]


@_kind("map-tail")
def _run_map_tail(cfg: ExperimentConfig, outdir: pathlib.Path) -> list:
    spec = MapSpec("T", cfg.gamma)
    t0 = time.perf_counter()
    phi = return_time_sample(spec, cfg.trials, seed=cfg.seed)
    ms = np.unique(np.logspace(1, 3, 13).astype(int))
    surv = np.array([(phi > m).mean() for m in ms])
    slope = fit_power_exponent(ms.astype(float), surv)
    elapsed = time.perf_counter() - t0
    write_profile(outdir / "return_tail.csv", ms.astype(float), surv,
                  _meta(cfg, trials=cfg.trials))
    return [Verdict.two_sided("return-tail-slope", slope, -cfg.gamma,
                              0.05, elapsed, cfg.seed)]


@_kind("map-density")
def _run_map_density(cfg: ExperimentConfig, outdir: pathlib.Path) -> list:
    spec = MapSpec("T", cfg.gamma)
    t0 = time.perf_counter()
    prof = infinite_density_profile(spec, cfg.bins, cfg.n)
    elapsed = time.perf_counter() - t0
    write_profile(outdir / "density_profile.csv", prof.x, prof.density,
                  _meta(cfg, bins=cfg.bins, iters=cfg.n))
    return [Verdict.two_sided("density-exponent", prof.exponent,
                              -1.0 / cfg.gamma, 0.1, elapsed)]


@_kind("map-dk")
def _run_map_dk(cfg: ExperimentConfig, outdir: pathlib.Path) -> list:
    spec = MapSpec("T", cfg.gamma)
    t0 = time.perf_counter()
    res = darling_kac_empirical(spec, cfg.n, cfg.trials, cfg.seed)
    counts = occupation_sample(spec, cfg.n, cfg.trials, cfg.seed)
    elapsed = time.perf_counter() - t0
    scaled = counts / res.a_hat
    hist, edges = np.histogram(scaled, bins=cfg.bins,
                               range=(0.0, float(np.ceil(scaled.max()))),
                               density=True)
    centers = 0.5 * (edges[1:] + edges[:-1])
    write_profile(outdir / "dk_histogram.csv", centers, hist,
                  _meta(cfg, bins=cfg.bins, iters=cfg.n, trials=cfg.trials,
                        a_hat=res.a_hat))
    return [Verdict.bound("darling-kac-ks", res.ks_distance, 0.05,
                          elapsed, cfg.seed)]


@_kind("map-tied")
def _run_map_tied(cfg: ExperimentConfig, outdir: pathlib.Path) -> list:
    spec = MapSpec("T", cfg.gamma)
    t0 = time.perf_counter()
    rep = map_tied_down_estimate(spec, cfg.n, cfg.trials, cfg.g, cfg.seed)
    elapsed = time.perf_counter() - t0
    write_profile(outdir / "tied_deviation.csv",
                  np.array(rep.checkpoints, dtype=float),
                  np.array(rep.deviations),
                  _meta(cfg, trials=cfg.trials, iters=cfg.n, g=cfg.g,
                        a_hat=rep.a_hat, c_hat=rep.c_hat))
    return [Verdict.bound("tied-down-deviation", rep.deviations[-1], 0.1,
                          elapsed, cfg.seed)]


@_kind("walk-bridge")
def _run_walk_bridge(cfg: ExperimentConfig, outdir: pathlib.Path) -> list:
    law = WalkLaw()
    t0 = time.perf_counter()
    exact = bridge_local_time_exact(law, cfg.n)
    ratio = bridge_local_time_moments(law, cfg.n, 1)
    elapsed = time.perf_counter() - t0
    target = math.pi / 2.0
    verdicts = [Verdict.two_sided("bridge-ratio", ratio, target,
                                  0.05 * target, elapsed)]
    if cfg.trials > 0:
        t0 = time.perf_counter()
        mc = bridge_local_time_mc(law, cfg.n, cfg.trials, cfg.seed)
        tv = 0.5 * float(np.abs(mc.pmf - exact.pmf).sum())
        verdicts.append(Verdict.bound("bridge-mc-tv", tv, 0.01,
                                      time.perf_counter() - t0, cfg.seed))
        _write_rows(outdir / "bridge_pmf.csv", "k,exact,mc",
                    [(k, float(exact.pmf[k]), float(mc.pmf[k]))
                     for k in range(cfg.n + 1)])
    else:
        _write_rows(outdir / "bridge_pmf.csv", "k,exact",
                    [(k, float(exact.pmf[k])) for k in range(cfg.n + 1)])
    return verdicts


def run_experiment(cfg: ExperimentConfig) -> list:
    """Dispatch a config, write its files, return the verdict list."""
    outdir = pathlib.Path(cfg.out)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "config.txt").write_text(cfg.serialize())
    verdicts = _RUNNERS[cfg.kind](cfg, outdir)
    emit_report(cfg.experiment_id(), verdicts, outdir / "verdicts.json")
    return verdicts


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lab",
        description="run one experiment kind and write CSV/JSON reports",
    )
    sub = parser.add_subparsers(dest="kind", required=True, metavar="<kind>")
    for kind in KINDS:
        p = sub.add_parser(kind, help=f"run the {kind} checks")
        p.add_argument("--gamma", type=float, default=None)
        p.add_argument("--p", type=int, default=None)
        p.add_argument("--xi", type=float, default=None)
        p.add_argument("--n", type=int, default=None)
        p.add_argument("--bins", type=int, default=None)
        p.add_argument("--trials", type=int, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--g", choices=sorted(WEIGHTS), default=None)
        p.add_argument("--out", default=None)
    return parser


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    if argv and argv[0] == "--config":
        if len(argv) != 2:
            print("usage: lab --config FILE", file=sys.stderr)
            return 2
        try:
            cfg = parse_config(pathlib.Path(argv[1]).read_text())
        except (OSError, ValueError) as err:
            print(f"error: {err}", file=sys.stderr)
            return 2
    else:
        args = _build_parser().parse_args(argv)
        try:
            cfg = ExperimentConfig.for_kind(
                args.kind, gamma=args.gamma, p=args.p, xi=args.xi, n=args.n,
                bins=args.bins, trials=args.trials, seed=args.seed, g=args.g,
                out=args.out,
            )
        except ValueError as err:
            print(f"error: {err}", file=sys.stderr)
            return 2
    try:
        verdicts = run_experiment(cfg)
    except (ValueError, ResourceError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    for v in verdicts:
        print(v.describe())
    good = sum(v.passed for v in verdicts)
    print(f"experiment {cfg.experiment_id()}: {good}/{len(verdicts)} passed")
    return 0 if good == len(verdicts) else 1


if __name__ == "__main__":
    sys.exit(main())
