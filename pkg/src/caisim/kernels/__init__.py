"""Assignment-evaluation kernels.

Placement solvers spend nearly all their time scoring candidate assignments,
so that scoring is isolated behind a tiny two-function contract with two
interchangeable backends:

``_evalcore``    Cython extension, built at install time when a compiler is
                 available (the hot path).
``evalcore_py``  pure-Python twin, always present.

Both implement, over a :class:`Workspace`:

``eval_assignment(ws, impl_sel, node_sel) -> (feasible, latency, energy, accuracy)``
``search_best(ws, w_lat, w_energy, w_acc, lat_budget, energy_budget,
              impl_out, node_out) -> (found, J, latency, energy, accuracy)``

The twins perform the same float operations in the same order (the extension
is compiled with -ffp-contract=off), so results are bit-identical and the
fallback changes nothing but speed. Backend choice: compiled when available,
overridable with CAI_KERNEL=py|c.

A Workspace owns scratch buffers, so one workspace must not be shared by
concurrent evaluations; build one per thread of control.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from types import SimpleNamespace

import numpy as np

from . import evalcore_py

try:
    from . import _evalcore  # type: ignore[attr-defined]

    HAVE_COMPILED = True
except ImportError:  # extension not built
    _evalcore = None
    HAVE_COMPILED = False


def backend(name: str | None = None):
    """Resolve a kernel backend module by name, env var, or availability."""
    name = (name or os.environ.get("CAI_KERNEL", "auto")).strip().lower()
    if name in ("", "auto"):
        return _evalcore if HAVE_COMPILED else evalcore_py
    if name in ("c", "compiled"):
        if not HAVE_COMPILED:
            raise RuntimeError("compiled kernel requested but not built")
        return _evalcore
    if name in ("py", "python", "pure"):
        return evalcore_py
    raise ValueError(f"unknown kernel backend {name!r}")


def backend_name() -> str:
    return "c" if backend() is _evalcore else "py"


@dataclass
class Workspace:
    """Flattened numeric view of one placement problem.

    Modules are indexed 0..M-1 in topological order (ties by id) with the
    exit module last; implementations within a pool and nodes are indexed in
    ascending id order. Incoming edges are stored CSR-style: module i's
    incoming edge sources are in_src[in_off[i]:in_off[i+1]], sorted by source
    id. ``base_lat``/``perbyte`` decompose pairwise shortest-path latency
    into a fixed term and a per-payload-byte term; ``transit`` holds the
    domain bitmask of intermediate nodes on the canonical path. ``enc_order``
    lists module indices in ascending module-id order and fixes the
    lexicographic encoding used for enumeration tie-breaks.

    ``py`` mirrors every array as nested Python lists for the pure backend;
    the f_* members are scratch for the compiled backend.
    """

    M: int
    N: int
    K: int
    n_impls: np.ndarray
    demand: np.ndarray
    mem: np.ndarray
    accf: np.ndarray
    oscale: np.ndarray
    allowed: np.ndarray
    node_cap: np.ndarray
    node_mem: np.ndarray
    node_ecost: np.ndarray
    base_lat: np.ndarray
    perbyte: np.ndarray
    transit: np.ndarray
    in_off: np.ndarray
    in_src: np.ndarray
    coloc_a: np.ndarray
    coloc_b: np.ndarray
    dl_src: np.ndarray
    dl_dst: np.ndarray
    dl_mask: np.ndarray
    enc_order: np.ndarray
    entry_bytes: float
    rate: float
    py: SimpleNamespace = field(repr=False, default=None)
    f_mem_used: np.ndarray = field(repr=False, default=None)
    f_rate_used: np.ndarray = field(repr=False, default=None)
    f_finish: np.ndarray = field(repr=False, default=None)
    f_outb: np.ndarray = field(repr=False, default=None)
    f_acc: np.ndarray = field(repr=False, default=None)


def make_workspace(
    *,
    n_impls: list[int],
    demand: list[list[float]],
    mem: list[list[float]],
    accf: list[list[float]],
    oscale: list[list[float]],
    allowed: list[list[list[int]]],
    node_cap: list[float],
    node_mem: list[float],
    node_ecost: list[float],
    base_lat: list[list[float]],
    perbyte: list[list[float]],
    transit: list[list[int]],
    in_off: list[int],
    in_src: list[int],
    coloc: list[tuple[int, int]],
    dataloc: list[tuple[int, int, int]],
    enc_order: list[int],
    entry_bytes: float,
    rate: float,
) -> Workspace:
    M = len(n_impls)
    N = len(node_cap)
    K = max(n_impls) if n_impls else 0
    ws = Workspace(
        M=M,
        N=N,
        K=K,
        n_impls=np.asarray(n_impls, dtype=np.int32),
        demand=np.asarray(demand, dtype=np.float64).reshape(M, K),
        mem=np.asarray(mem, dtype=np.float64).reshape(M, K),
        accf=np.asarray(accf, dtype=np.float64).reshape(M, K),
        oscale=np.asarray(oscale, dtype=np.float64).reshape(M, K),
        allowed=np.asarray(allowed, dtype=np.uint8).reshape(M, K, N),
        node_cap=np.asarray(node_cap, dtype=np.float64),
        node_mem=np.asarray(node_mem, dtype=np.float64),
        node_ecost=np.asarray(node_ecost, dtype=np.float64),
        base_lat=np.asarray(base_lat, dtype=np.float64).reshape(N, N),
        perbyte=np.asarray(perbyte, dtype=np.float64).reshape(N, N),
        transit=np.asarray(transit, dtype=np.int32).reshape(N, N),
        in_off=np.asarray(in_off, dtype=np.int32),
        in_src=np.asarray(in_src, dtype=np.int32) if in_src else np.zeros(0, np.int32),
        coloc_a=np.asarray([c[0] for c in coloc], dtype=np.int32),
        coloc_b=np.asarray([c[1] for c in coloc], dtype=np.int32),
        dl_src=np.asarray([d[0] for d in dataloc], dtype=np.int32),
        dl_dst=np.asarray([d[1] for d in dataloc], dtype=np.int32),
        dl_mask=np.asarray([d[2] for d in dataloc], dtype=np.int32),
        enc_order=np.asarray(enc_order, dtype=np.int32),
        entry_bytes=float(entry_bytes),
        rate=float(rate),
    )
    ws.py = SimpleNamespace(
        n_impls=[int(x) for x in n_impls],
        demand=[list(map(float, row)) for row in demand],
        mem=[list(map(float, row)) for row in mem],
        accf=[list(map(float, row)) for row in accf],
        oscale=[list(map(float, row)) for row in oscale],
        allowed=[[list(map(int, nn)) for nn in row] for row in allowed],
        node_cap=list(map(float, node_cap)),
        node_mem=list(map(float, node_mem)),
        node_ecost=list(map(float, node_ecost)),
        base_lat=[list(map(float, row)) for row in base_lat],
        perbyte=[list(map(float, row)) for row in perbyte],
        transit=[list(map(int, row)) for row in transit],
        in_off=list(map(int, in_off)),
        in_src=list(map(int, in_src)),
        coloc_a=[int(c[0]) for c in coloc],
        coloc_b=[int(c[1]) for c in coloc],
        dl_src=[int(d[0]) for d in dataloc],
        dl_dst=[int(d[1]) for d in dataloc],
        dl_mask=[int(d[2]) for d in dataloc],
        enc_order=list(map(int, enc_order)),
    )
    ws.f_mem_used = np.zeros(N, dtype=np.float64)
    ws.f_rate_used = np.zeros(N, dtype=np.float64)
    ws.f_finish = np.zeros(M, dtype=np.float64)
    ws.f_outb = np.zeros(M, dtype=np.float64)
    ws.f_acc = np.zeros(M, dtype=np.float64)
    return ws


def search_space_size(ws: Workspace) -> int:
    total = 1
    for k in ws.py.n_impls:
        total *= k * ws.N
    return total
