"""Flat binary instance dumps with a JSON sidecar.

Layout, little-endian: ``P`` and ``N`` as int64, ``gamma`` as float64, ``seed`` as int64, then
``X`` (row-major), ``y`` and ``s_true`` as float64.
"""

from __future__ import annotations

import json
import logging
import os

import numpy as np

from ..errors import ContractViolation
from ..gamp.state import ProblemInstance

logger = logging.getLogger(__name__)

_HEADER = np.dtype([("P", "<i8"), ("N", "<i8"), ("gamma", "<f8"), ("seed", "<i8")])


def sidecar_path(path: str) -> str:
    return os.path.splitext(path)[0] + ".json"


def dump_instance(inst: ProblemInstance, path: str, config: dict | None = None) -> None:
    if inst.s_true is None:
        raise ContractViolation("Only instances with a recorded signal can be dumped")
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    header = np.array([(inst.P, inst.N, inst.gamma, -1 if inst.seed is None else inst.seed)], dtype=_HEADER)
    with open(path, "wb") as f:
        f.write(header.tobytes())
        for block in (inst.X, inst.y, inst.s_true):
            f.write(np.ascontiguousarray(block, dtype="<f8").tobytes())
    with open(sidecar_path(path), "w") as f:
        json.dump(config or {}, f, sort_keys=True, indent=2)
    logger.info(f"Instance dumped to: {path}")


def load_instance(path: str) -> ProblemInstance:
    with open(path, "rb") as f:
        raw = f.read()
    header = np.frombuffer(raw, dtype=_HEADER, count=1)[0]
    P, N = int(header["P"]), int(header["N"])
    body = np.frombuffer(raw, dtype="<f8", offset=_HEADER.itemsize)
    if body.size != N * P + N + P:
        raise ContractViolation(f"{path} holds {body.size} values, expected {N * P + N + P} for N={N}, P={P}")
    X = body[: N * P].reshape(N, P).copy()
    y = body[N * P : N * P + N].copy()
    s_true = body[N * P + N :].copy()
    seed = int(header["seed"])
    return ProblemInstance(X=X, y=y, gamma=float(header["gamma"]), s_true=s_true, seed=None if seed < 0 else seed)
