"""Low-level reachability kernels for 2-d node lattices.

Edges are stored in fixed-offset stacks: a boolean array of shape
(K, H, W) whose k-th slice marks nodes with an outgoing edge along
``OFFSETS[k]``.  Reachability closures run either through a compiled
queue BFS (numba) or a pure-numpy frontier fixpoint; the backend is
resolved once per process from the ISOCAUSAL_NUMBA environment
variable and can be overridden per call.
"""

from __future__ import annotations

import os

import numpy as np

# gcd-reduced integer steps with Chebyshev radius <= 2: the eight unit
# neighbours plus the eight knight moves.  Offsets at even index are
# followed by their negation so reversal is an index flip.
OFFSETS = np.array(
    [
        (1, 0), (-1, 0),
        (0, 1), (0, -1),
        (1, 1), (-1, -1),
        (1, -1), (-1, 1),
        (1, 2), (-1, -2),
        (1, -2), (-1, 2),
        (2, 1), (-2, -1),
        (2, -1), (-2, 1),
    ],
    dtype=np.int64,
)

K = len(OFFSETS)

# NEGATION[k] is the index of -OFFSETS[k].
NEGATION = np.array([k + 1 if k % 2 == 0 else k - 1 for k in range(K)], dtype=np.int64)

_BACKEND = None


def backend() -> str:
    """Resolve the default reachability backend, once per process.

    ISOCAUSAL_NUMBA=0/false/off/no forces the numpy fixpoint; any other
    value (or the variable being unset) selects the compiled BFS when
    numba imports cleanly.  ISOCAUSAL_THREADS caps the numba thread
    pool.
    """
    global _BACKEND
    if _BACKEND is None:
        flag = os.environ.get("ISOCAUSAL_NUMBA", "").strip().lower()
        if flag in ("0", "false", "off", "no"):
            _BACKEND = "numpy"
        else:
            try:
                import numba

                threads = os.environ.get("ISOCAUSAL_THREADS", "").strip()
                if threads:
                    try:
                        numba.set_num_threads(max(1, int(threads)))
                    except (ValueError, RuntimeError):
                        pass
                _BACKEND = "numba"
            except ImportError:
                if flag in ("1", "true", "on", "yes"):
                    raise RuntimeError(
                        "ISOCAUSAL_NUMBA requested the compiled backend "
                        "but numba is not importable"
                    )
                _BACKEND = "numpy"
    return _BACKEND


def shift(mask: np.ndarray, di: int, dj: int, wrap: bool) -> np.ndarray:
    """Translate a boolean field so the value at (i, j) lands at
    (i + di, j + dj).  Rows clip at the boundary; columns wrap only on
    cylinders."""
    H, W = mask.shape
    if abs(dj) >= W or abs(di) >= H:
        return np.zeros_like(mask)
    if dj == 0:
        rolled = mask
    elif wrap:
        rolled = np.roll(mask, dj, axis=1)
    else:
        rolled = np.zeros_like(mask)
        if dj > 0:
            rolled[:, dj:] = mask[:, : W - dj]
        else:
            rolled[:, :dj] = mask[:, -dj:]
    if di == 0:
        return rolled.copy() if rolled is mask else rolled
    out = np.zeros_like(mask)
    if di > 0:
        out[di:, :] = rolled[: H - di, :]
    else:
        out[:di, :] = rolled[-di:, :]
    return out


def dilate(mask: np.ndarray, radius: int, wrap: bool) -> np.ndarray:
    """Chebyshev dilation by ``radius`` cells."""
    out = mask.copy()
    for di in range(-radius, radius + 1):
        for dj in range(-radius, radius + 1):
            if di or dj:
                out |= shift(mask, di, dj, wrap)
    return out


def reverse_edges(edges: np.ndarray, wrap: bool) -> np.ndarray:
    """Edge stack of the reversed graph: p -> q becomes q -> p."""
    rev = np.zeros_like(edges)
    for k in range(K):
        di, dj = OFFSETS[k]
        rev[NEGATION[k]] = shift(edges[k], int(di), int(dj), wrap)
    return rev


def ray_closure(
    carrier: np.ndarray, seeds: np.ndarray, di: int, dj: int, wrap: bool
) -> np.ndarray:
    """Nodes reachable from ``seeds`` along consecutive (di, dj) steps,
    every step carried by ``carrier``.  The seeds themselves are
    included."""
    cur = seeds.copy()
    while True:
        new = shift(cur & carrier, di, dj, wrap) & ~cur
        if not new.any():
            return cur
        cur |= new


def _reach_numpy(edges: np.ndarray, seeds: np.ndarray, wrap: bool) -> np.ndarray:
    reached = seeds.copy()
    frontier = seeds
    while True:
        new = np.zeros_like(reached)
        for k in range(K):
            src = frontier & edges[k]
            if src.any():
                di, dj = OFFSETS[k]
                new |= shift(src, int(di), int(dj), wrap)
        new &= ~reached
        if not new.any():
            return reached
        reached |= new
        frontier = new


_NUMBA_BFS = None


def _get_numba_bfs():
    global _NUMBA_BFS
    if _NUMBA_BFS is None:
        from numba import njit

        @njit(cache=True)
        def _bfs(edges, offsets, seeds, wrap):
            K, H, W = edges.shape
            reached = seeds.copy()
            queue = np.empty(H * W, dtype=np.int32)
            tail = 0
            for i in range(H):
                for j in range(W):
                    if seeds[i, j]:
                        queue[tail] = i * W + j
                        tail += 1
            head = 0
            while head < tail:
                flat = queue[head]
                head += 1
                i = flat // W
                j = flat - i * W
                for k in range(K):
                    if not edges[k, i, j]:
                        continue
                    ni = i + offsets[k, 0]
                    if ni < 0 or ni >= H:
                        continue
                    nj = j + offsets[k, 1]
                    if wrap:
                        if nj < 0:
                            nj += W
                        elif nj >= W:
                            nj -= W
                    elif nj < 0 or nj >= W:
                        continue
                    if not reached[ni, nj]:
                        reached[ni, nj] = True
                        queue[tail] = ni * W + nj
                        tail += 1
            return reached

        _NUMBA_BFS = _bfs
    return _NUMBA_BFS


def reach(
    edges: np.ndarray, seeds: np.ndarray, wrap: bool, backend_name: str | None = None
) -> np.ndarray:
    """Transitive closure of ``seeds`` under the edge stack, seeds
    included."""
    name = backend_name or backend()
    if name == "numba":
        bfs = _get_numba_bfs()
        return bfs(
            np.ascontiguousarray(edges),
            OFFSETS,
            np.ascontiguousarray(seeds),
            wrap,
        )
    return _reach_numpy(edges, seeds, wrap)
