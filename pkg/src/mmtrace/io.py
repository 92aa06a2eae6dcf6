"""File formats: point clouds, pieces, sample functions, experiment configs.

Point-cloud format (coordinate metric)::

    mmspace v1; n=<int>; dim=<int>; h=<real>
    <id> <x1> ... <xdim> <weight>        # one line per point

Matrix-metric variant::

    mmspace-matrix v1; n=<int>; h=<real>
    <id> <weight>                        # n lines
    <d(1,0)>                             # lower-triangular distance block,
    <d(2,0)> <d(2,1)>                    # one row per point 1..n-1
    ...

Pieces are a JSON sidecar; sample functions are `<id> <value>` lines.
Experiment configs are `key = value` text (see parse_config).
"""

from __future__ import annotations

import json
import re

import numpy as np

from .errors import InvalidParameter, IoError
from .experiments import ExperimentConfig
from .generators import GeneratorSpec, PieceSpec
from .regularity import PiecewiseSet, SubsetPiece, compose_piecewise
from .space import FiniteMetricMeasureSpace


def save_space(space: FiniteMetricMeasureSpace, path: str):
    try:
        with open(path, "w") as fh:
            if space.coords is not None:
                fh.write(f"mmspace v1; n={space.n}; dim={space.dim}; h={space.resolution!r}\n")
                for i in range(space.n):
                    xs = " ".join(repr(float(v)) for v in space.coords[i])
                    fh.write(f"{i} {xs} {float(space.weights[i])!r}\n")
            else:
                fh.write(f"mmspace-matrix v1; n={space.n}; h={space.resolution!r}\n")
                for i in range(space.n):
                    fh.write(f"{i} {float(space.weights[i])!r}\n")
                for i in range(1, space.n):
                    fh.write(" ".join(repr(float(v)) for v in space.dist_matrix[i, :i]) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write space to {path}: {exc}") from exc


def _parse_header(line: str) -> dict:
    fields = {}
    head, *rest = [part.strip() for part in line.strip().split(";")]
    fields["magic"] = head
    for item in rest:
        if not item:
            continue
        key, _, val = item.partition("=")
        fields[key.strip()] = val.strip()
    return fields


def load_space(path: str, c_res: float = 1.0) -> FiniteMetricMeasureSpace:
    try:
        with open(path) as fh:
            lines = [ln for ln in (l.strip() for l in fh) if ln]
    except OSError as exc:
        raise IoError(f"cannot read space from {path}: {exc}") from exc
    if not lines:
        raise IoError(f"{path} is empty")
    head = _parse_header(lines[0])
    try:
        if head["magic"] == "mmspace v1":
            n, dim, h = int(head["n"]), int(head["dim"]), float(head["h"])
            coords = np.empty((n, dim))
            weights = np.empty(n)
            if len(lines) - 1 != n:
                raise IoError(f"expected {n} point lines, got {len(lines) - 1}")
            for ln in lines[1:]:
                toks = ln.split()
                i = int(toks[0])
                coords[i] = [float(t) for t in toks[1 : 1 + dim]]
                weights[i] = float(toks[1 + dim])
            return FiniteMetricMeasureSpace(weights=weights, coords=coords, resolution=h, c_res=c_res)
        if head["magic"] == "mmspace-matrix v1":
            n, h = int(head["n"]), float(head["h"])
            weights = np.empty(n)
            for ln in lines[1 : n + 1]:
                toks = ln.split()
                weights[int(toks[0])] = float(toks[1])
            mat = np.zeros((n, n))
            for i, ln in enumerate(lines[n + 1 :], start=1):
                row = [float(t) for t in ln.split()]
                mat[i, :i] = row
                mat[:i, i] = row
            return FiniteMetricMeasureSpace(weights=weights, dist_matrix=mat, resolution=h, c_res=c_res)
    except (KeyError, ValueError, IndexError) as exc:
        raise IoError(f"malformed space file {path}: {exc}") from exc
    raise IoError(f"unknown space format {head['magic']!r}")


def save_pieces(piecewise: PiecewiseSet, path: str):
    payload = {
        "theta_S": piecewise.theta_S,
        "pieces": [
            {
                "theta": pc.theta,
                "label": pc.label,
                "ids": [int(i) for i in pc.ids],
                "weights": [float(w) for w in pc.weights],
                "adr_constants": list(pc.adr_constants) if pc.adr_constants else None,
            }
            for pc in piecewise.pieces
        ],
    }
    try:
        with open(path, "w") as fh:
            json.dump(payload, fh, sort_keys=True, indent=1)
    except OSError as exc:
        raise IoError(f"cannot write pieces to {path}: {exc}") from exc


def load_pieces(path: str) -> PiecewiseSet:
    try:
        with open(path) as fh:
            payload = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise IoError(f"cannot read pieces from {path}: {exc}") from exc
    pieces = []
    for entry in payload["pieces"]:
        pc = SubsetPiece(
            ids=np.asarray(entry["ids"], dtype=int),
            theta=float(entry["theta"]),
            weights=np.asarray(entry["weights"], dtype=float),
            label=entry.get("label", ""),
        )
        if entry.get("adr_constants"):
            pc.adr_constants = tuple(entry["adr_constants"])
        pieces.append(pc)
    return compose_piecewise(pieces)


def save_function(values: np.ndarray, ids, path: str):
    try:
        with open(path, "w") as fh:
            for i in ids:
                fh.write(f"{int(i)} {float(values[int(i)])!r}\n")
    except OSError as exc:
        raise IoError(f"cannot write function to {path}: {exc}") from exc


def load_function(path: str, n: int) -> np.ndarray:
    """Dense value vector; entries absent from the file are NaN."""
    out = np.full(n, np.nan)
    try:
        with open(path) as fh:
            for ln in fh:
                ln = ln.strip()
                if not ln or ln.startswith("#"):
                    continue
                toks = ln.split()
                out[int(toks[0])] = float(toks[1])
    except (OSError, ValueError, IndexError) as exc:
        raise IoError(f"cannot read function from {path}: {exc}") from exc
    return out


# -- config text ----------------------------------------------------------


def _parse_real(tok: str) -> float:
    tok = tok.strip()
    m = re.fullmatch(r"(-?\d+(?:\.\d+)?)\s*/\s*(\d+(?:\.\d+)?)", tok)
    if m:
        return float(m.group(1)) / float(m.group(2))
    return float(tok)


def _parse_piece(text: str) -> PieceSpec:
    toks = text.split()
    if not toks:
        raise InvalidParameter("empty piece description")
    shape = toks[0]
    theta = None
    placement = {}
    for tok in toks[1:]:
        key, _, val = tok.partition("=")
        if key == "theta":
            theta = _parse_real(val)
        elif key in ("axis",):
            placement[key] = int(val)
        elif key in ("offset", "lo", "hi", "cut"):
            placement[key] = _parse_real(val)
        elif key == "anchor":
            placement["anchor"] = tuple(_parse_real(v) for v in val.split(","))
        elif key == "halfspace":
            axis, cut, side = val.split(",")
            placement["halfspace"] = (int(axis), _parse_real(cut), side)
        else:
            raise InvalidParameter(f"unknown piece key {key!r}")
    if theta is None:
        raise InvalidParameter(f"piece {shape!r} needs theta=<real>")
    return PieceSpec(shape=shape, theta=theta, placement=placement)


def parse_config(text: str) -> ExperimentConfig:
    """Parse the key = value experiment-config format.

    Keys: name, kind, h, c_res, resolutions, pieces (';'-separated),
    functions, functionals, p, theta, c, sigma, seeds.
    """
    kv = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, val = line.partition("=")
        if not eq:
            raise InvalidParameter(f"config line is not key = value: {raw!r}")
        kv[key.strip()] = val.strip()
    required = ["kind", "pieces", "resolutions", "functionals", "functions"]
    missing = [k for k in required if k not in kv]
    if missing:
        raise InvalidParameter(f"config missing keys: {missing}")
    pieces = [_parse_piece(part) for part in kv["pieces"].split(";") if part.strip()]
    resolutions = [_parse_real(t) for t in kv["resolutions"].split()]
    gen = GeneratorSpec(
        kind=kv["kind"],
        h=resolutions[0],
        pieces=pieces,
        c_res=_parse_real(kv.get("c_res", "1")),
        name=kv.get("name", kv["kind"]),
    )
    return ExperimentConfig(
        generator=gen,
        resolutions=resolutions,
        functionals=kv["functionals"].split(),
        functions=kv["functions"].split(),
        p=_parse_real(kv.get("p", "2.5")),
        theta=_parse_real(kv["theta"]) if "theta" in kv else None,
        c=_parse_real(kv.get("c", "6")),
        sigma=_parse_real(kv.get("sigma", "0.01")),
        seeds=[int(t) for t in kv.get("seeds", "0").split()],
    )


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path) as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise IoError(f"cannot read config from {path}: {exc}") from exc
