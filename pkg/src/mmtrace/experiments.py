"""Configuration-driven equivalence experiments and report emission.

An experiment evaluates a list of functionals over a generator instance
at several resolutions for a corpus of sample functions, then reports
pairwise value ratios and their relative variation across resolutions.
Equivalence claims are operationalized as ratio stability: a genuine
two-sided comparison yields resolution-stable ratios.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InsufficientData, IoError, ParameterError
from .functionals import (
    FunctionalReport,
    SampleFunction,
    bn_functional,
    bsn_functional,
    gluing,
    sharp_mu_s1,
    trace_norm_difficult,
    trace_norm_simple,
)
from .generators import GeneratorSpec, generate, make_sample_function
from .measures import MeasureSequence, build_measure_sequence
from .regularity import PiecewiseSet
from .space import FiniteMetricMeasureSpace

EPSILON = 0.5   # dyadic scale convention used throughout


@dataclass
class ExperimentConfig:
    generator: GeneratorSpec
    resolutions: list
    functionals: list
    functions: list
    p: float = 2.5
    theta: Optional[float] = None
    c: float = 6.0
    sigma: float = 0.01
    seeds: list = field(default_factory=lambda: [0])

    def validate(self):
        if not (1 < self.p < math.inf):
            raise ParameterError(f"p must lie in (1, inf), got {self.p}")
        if self.c < 3.0 / EPSILON:
            raise ParameterError(
                f"c must be >= {3.0 / EPSILON} for the functional comparisons, got {self.c}"
            )
        if not (0 < self.sigma < EPSILON**2 / (4.0 * self.c)):
            raise ParameterError(
                f"sigma must lie in (0, {EPSILON ** 2 / (4.0 * self.c):.5g}), got {self.sigma}"
            )
        thetas = [ps.theta for ps in self.generator.pieces]
        if self.theta is not None and not (max(thetas) <= self.theta < self.p):
            raise ParameterError(f"theta must lie in [{max(thetas)}, {self.p})")
        if max(thetas) >= self.p:
            raise ParameterError(f"theta(S) = {max(thetas)} must be < p = {self.p}")
        if not self.resolutions:
            raise ParameterError("need at least one resolution")
        for name in self.functionals:
            _parse_functional(name)


@dataclass
class Cell:
    instance: str
    resolution: float
    function: str
    seed: int
    functional: str
    report: FunctionalReport


@dataclass
class RatioRow:
    resolution: float
    function: str
    seed: int
    functional_a: str
    functional_b: str
    ratio: Optional[float]
    degenerate: bool


@dataclass
class RatioReport:
    instance: str
    cells: list
    rows: list
    stability: dict   # "function|seed|a/b" -> max relative variation

    def to_json(self) -> dict:
        return {
            "instance": self.instance,
            "cells": [
                {
                    "instance": c.instance,
                    "resolution": c.resolution,
                    "function": c.function,
                    "seed": c.seed,
                    "functional": c.functional,
                    "report": c.report.to_json(),
                }
                for c in self.cells
            ],
            "ratios": [
                {
                    "resolution": r.resolution,
                    "function": r.function,
                    "seed": r.seed,
                    "a": r.functional_a,
                    "b": r.functional_b,
                    "ratio": r.ratio,
                    "degenerate": r.degenerate,
                }
                for r in self.rows
            ],
            "stability": self.stability,
        }


def _parse_functional(name: str):
    base, _, arg = name.partition(":")
    known = {"besov", "besov_alt", "gl1", "gl2", "gl3", "bn", "bsn", "sharp",
             "trace_simple", "trace_difficult"}
    if base not in known:
        raise ParameterError(f"unknown functional {name!r}")
    return base, arg


def evaluate_functional(
    name: str,
    space: FiniteMetricMeasureSpace,
    piecewise: PiecewiseSet,
    seq: MeasureSequence,
    f: SampleFunction,
    cfg: ExperimentConfig,
) -> FunctionalReport:
    """Dispatch a requested functional by name (see _parse_functional)."""
    from .functionals import besov_norm, besov_norm_alt

    base, arg = _parse_functional(name)
    p = cfg.p
    if base in ("besov", "besov_alt"):
        idx = int(arg) - 1 if arg else 0
        pc = piecewise.pieces[idx]
        s = 1.0 - pc.theta / p
        fn = besov_norm if base == "besov" else besov_norm_alt
        return fn(space, pc, f, s, p)
    if base in ("gl1", "gl2", "gl3"):
        return gluing(space, piecewise, f, p, which=int(base[-1]))
    if base == "bn":
        return bn_functional(space, seq, piecewise, f, p, cfg.sigma, c=cfg.c)
    if base == "bsn":
        return bsn_functional(space, seq, f, p, cfg.c)
    if base == "sharp":
        vals = sharp_mu_s1(space, piecewise, f)
        s1 = piecewise.pieces[0]
        on_s1 = np.isin(piecewise.union_ids, s1.ids, assume_unique=True)
        mu1 = space.weights[s1.ids]
        value = float(np.sum(mu1 * vals[on_s1] ** p) ** (1.0 / p))
        return FunctionalReport("sharp", value, {"sharp": value}, {"p": p})
    if base == "trace_simple":
        return trace_norm_simple(space, piecewise, f, p, l=int(arg) if arg else 1)
    if base == "trace_difficult":
        return trace_norm_difficult(space, piecewise, f, p)
    raise ParameterError(f"unknown functional {name!r}")


def run_equivalence(config: ExperimentConfig) -> RatioReport:
    """Evaluate every requested functional per (resolution, function) and
    emit pairwise ratios with their cross-resolution stability."""
    config.validate()
    cells = []
    values = {}   # (function, seed, functional) -> {resolution: value}
    for h in config.resolutions:
        spec = config.generator.with_h(h)
        space, piecewise = generate(spec)
        theta = config.theta if config.theta is not None else piecewise.theta_S
        seq = build_measure_sequence(space, piecewise, theta, p=config.p)
        for fam in config.functions:
            seeds = config.seeds if fam.split(":")[0] == "random" else [0]
            for seed in seeds:
                f = make_sample_function(space, piecewise, fam, seed=seed)
                for name in config.functionals:
                    rep = evaluate_functional(name, space, piecewise, seq, f, config)
                    cells.append(Cell(spec.name or spec.kind, h, fam, seed, name, rep))
                    values.setdefault((fam, seed, name), {})[h] = rep.value

    rows = []
    stability = {}
    names = list(config.functionals)
    for fam in config.functions:
        seeds = config.seeds if fam.split(":")[0] == "random" else [0]
        for seed in seeds:
            for a_pos in range(len(names)):
                for b_pos in range(a_pos + 1, len(names)):
                    a, b = names[a_pos], names[b_pos]
                    ratios = []
                    for h in config.resolutions:
                        va = float(values[(fam, seed, a)][h])
                        vb = float(values[(fam, seed, b)][h])
                        degenerate = vb == 0
                        ratio = None if degenerate else va / vb
                        rows.append(RatioRow(h, fam, seed, a, b, ratio, degenerate))
                        if ratio is not None and math.isfinite(ratio):
                            ratios.append(ratio)
                    key = f"{fam}|{seed}|{a}/{b}"
                    if len(ratios) >= 2 and min(ratios) > 0:
                        stability[key] = float((max(ratios) - min(ratios)) / min(ratios))
                    else:
                        stability[key] = None
    name = config.generator.name or config.generator.kind
    return RatioReport(instance=name, cells=cells, rows=rows, stability=stability)


def dirichlet_upper_bound_probe(
    space: FiniteMetricMeasureSpace,
    F: SampleFunction,
    p: float,
    piecewise: PiecewiseSet,
    l: int = 1,
) -> float:
    """Ratio of the homogeneous trace-norm parts of F restricted to S to a
    discrete Sobolev-type norm of F; probes the upper-bound direction of
    the trace theorem with the generator-supplied extension."""
    vals = F.values if isinstance(F, SampleFunction) else np.asarray(F, dtype=float)
    nbr_r = 1.01 * space.resolution
    lip = np.zeros(space.n)
    for x in range(space.n):
        members = space.members(x, nbr_r)
        members = members[members != x]
        if members.size == 0:
            raise InsufficientData(f"point {x} has no mesh neighbors")
        d = np.array([space.distance(x, int(m)) for m in members])
        lip[x] = float(np.max(np.abs(vals[members] - vals[x]) / d))
    energy = float(np.sum(space.weights * lip**p))
    denom = float(np.sum(space.weights * np.abs(vals) ** p) ** (1.0 / p)) + energy ** (1.0 / p)
    if piecewise.pieces[0].theta > 0:
        rep = trace_norm_simple(space, piecewise, vals, p, l=l)
        hom = sum(v for k, v in rep.parts.items() if k.startswith("gl"))
        from .functionals import besov_norm

        for pc in piecewise.pieces:
            hom += besov_norm(space, pc, vals, 1.0 - pc.theta / p, p).parts["seminorm"]
    else:
        rep = trace_norm_difficult(space, piecewise, vals, p)
        from .functionals import besov_norm

        hom = rep.parts["sharp_s1"] + rep.parts["gl3"]
        hom += besov_norm(
            space, piecewise.pieces[1], vals, 1.0 - piecewise.pieces[1].theta / p, p
        ).parts["seminorm"]
    return hom / denom


# -- emission -------------------------------------------------------------

CSV_HEADER = "instance,resolution,functional,value,part,param_p,param_theta,param_c,param_sigma,seed"


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def report_to_csv(report: RatioReport, cfg: Optional[ExperimentConfig] = None) -> str:
    """Flat per-part CSV with the exact canonical column set; the sample
    function is folded into the instance column."""
    p = cfg.p if cfg else None
    c = cfg.c if cfg else None
    sigma = cfg.sigma if cfg else None
    out = [CSV_HEADER]
    for cell in report.cells:
        inst = f"{cell.instance}/{cell.function}"
        theta = cell.report.params.get("theta")
        base = [
            inst,
            _fmt(float(cell.resolution)),
            cell.functional,
            _fmt(float(cell.report.value)),
            "total",
            _fmt(p),
            _fmt(theta),
            _fmt(c),
            _fmt(sigma),
            str(cell.seed),
        ]
        out.append(",".join(base))
        for part in sorted(cell.report.parts):
            row = list(base)
            row[3] = _fmt(float(cell.report.parts[part]))
            row[4] = part
            out.append(",".join(row))
    return "\n".join(out) + "\n"


def report_emit(report: RatioReport, format: str, path: str, cfg: Optional[ExperimentConfig] = None) -> str:
    """Write a report to disk as CSV or JSON; returns the path written."""
    if format not in ("csv", "json"):
        raise ParameterError(f"format must be csv or json, got {format!r}")
    try:
        if format == "csv":
            payload = report_to_csv(report, cfg)
        else:
            payload = json.dumps(report.to_json(), sort_keys=True, indent=1)
        with open(path, "w") as fh:
            fh.write(payload)
    except OSError as exc:
        raise IoError(f"cannot write report to {path}: {exc}") from exc
    return path
