"""Hot numeric kernels: five-number summaries, event binning, similarity matching.

Each kernel has a numba-jitted implementation and a pure-numpy fallback.
The jitted path is used when numba imports cleanly and the environment
variable ``EVTAB_NO_NUMBA`` is unset/falsy; set ``EVTAB_NO_NUMBA=1`` to force
the numpy path. ``benchmarks/bench_kernels.py`` times both paths.
"""

from __future__ import annotations

import math
import os

import numpy as np

# Sentinel for absent timestamps in int64 arrays.
MISSING_TS = np.int64(np.iinfo(np.int64).min)


def _numba_disabled_by_env() -> bool:
    return os.environ.get("EVTAB_NO_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}


try:
    from numba import njit as _njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

USE_NUMBA = _HAVE_NUMBA and not _numba_disabled_by_env()


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# Five-number summary (min, q1, median, q3, max), quantiles by linear
# interpolation between closest ranks at (n-1)*q over the sorted values.


def _five_number_py(values: np.ndarray) -> tuple[float, float, float, float, float]:
    s = np.sort(values)
    n = s.shape[0]
    out = np.empty(3, dtype=np.float64)
    for i, q in enumerate((0.25, 0.5, 0.75)):
        pos = (n - 1) * q
        lo = int(math.floor(pos))
        hi = int(math.ceil(pos))
        out[i] = s[lo] + (s[hi] - s[lo]) * (pos - lo)
    return float(s[0]), float(out[0]), float(out[1]), float(out[2]), float(s[n - 1])


if _HAVE_NUMBA:

    @_njit(cache=True)
    def _five_number_jit(values):  # pragma: no cover - exercised via dispatch
        s = np.sort(values)
        n = s.shape[0]
        qs = (0.25, 0.5, 0.75)
        out = np.empty(3, dtype=np.float64)
        for i in range(3):
            pos = (n - 1) * qs[i]
            lo = int(math.floor(pos))
            hi = int(math.ceil(pos))
            out[i] = s[lo] + (s[hi] - s[lo]) * (pos - lo)
        return s[0], out[0], out[1], out[2], s[n - 1]


def five_number(values: np.ndarray) -> tuple[float, float, float, float, float]:
    """Five-number summary of a non-empty float64 array."""
    values = np.ascontiguousarray(values, dtype=np.float64)
    if values.size == 0:
        raise ValueError("five_number requires a non-empty list")
    if USE_NUMBA:
        mn, q1, med, q3, mx = _five_number_jit(values)
        return float(mn), float(q1), float(med), float(q3), float(mx)
    return _five_number_py(values)


# ---------------------------------------------------------------------------
# Uniform binning over a domain [lo, hi]: bins are half-open [e_i, e_{i+1})
# with the last bin closed at hi. Values outside the domain are counted in
# ``excluded``; callers filter out absent values beforehand.


def _bin_counts_py(values: np.ndarray, edges: np.ndarray) -> tuple[np.ndarray, int]:
    nbins = edges.shape[0] - 1
    lo, hi = edges[0], edges[-1]
    inside = (values >= lo) & (values <= hi)
    excluded = int(values.shape[0] - int(inside.sum()))
    vals = values[inside]
    idx = np.searchsorted(edges, vals, side="right") - 1
    idx[vals == hi] = nbins - 1
    counts = np.bincount(idx, minlength=nbins).astype(np.int64)
    return counts, excluded


if _HAVE_NUMBA:

    @_njit(cache=True)
    def _bin_counts_jit(values, edges):  # pragma: no cover - exercised via dispatch
        nbins = edges.shape[0] - 1
        lo = edges[0]
        hi = edges[nbins]
        counts = np.zeros(nbins, dtype=np.int64)
        excluded = 0
        for i in range(values.shape[0]):
            v = values[i]
            if v < lo or v > hi:
                excluded += 1
            elif v == hi:
                counts[nbins - 1] += 1
            else:
                j = np.searchsorted(edges, v, side="right") - 1
                counts[j] += 1
        return counts, excluded


def bin_counts(values: np.ndarray, edges: np.ndarray) -> tuple[np.ndarray, int]:
    """Count values into uniform bins given their edges; return (counts, excluded)."""
    values = np.ascontiguousarray(values, dtype=np.float64)
    edges = np.ascontiguousarray(edges, dtype=np.float64)
    if USE_NUMBA:
        counts, excluded = _bin_counts_jit(values, edges)
        return counts, int(excluded)
    return _bin_counts_py(values, edges)


# ---------------------------------------------------------------------------
# Similarity matching inner loop. History rows are pre-encoded columnar:
# exact-match columns as int64 codes (-1 = missing), tolerance columns as
# float64 (NaN = missing), recency timestamps as int64 (MISSING_TS = absent).
# A query code < 0 means the query value is missing or outside the history
# vocabulary, which matches nothing. Returns indices of kept history rows in
# no particular order; k < 0 means no recency matcher (keep all matches).


def _match_py(
    eligible: np.ndarray,
    exact_codes: np.ndarray,
    q_exact: np.ndarray,
    tol_values: np.ndarray,
    q_tol: np.ndarray,
    tol_eps: np.ndarray,
    ts_by: np.ndarray,
    id_rank: np.ndarray,
    k: int,
    self_idx: int,
) -> np.ndarray:
    mask = eligible.copy()
    if self_idx >= 0:
        mask[self_idx] = False
    for j in range(q_exact.shape[0]):
        if q_exact[j] < 0:
            mask[:] = False
            break
        col = exact_codes[j]
        mask &= col == q_exact[j]
    for j in range(q_tol.shape[0]):
        col = tol_values[j]
        # NaN on either side compares False and drops the row.
        mask &= np.abs(col - q_tol[j]) <= tol_eps[j]
    if k < 0:
        return np.flatnonzero(mask)
    mask &= ts_by != MISSING_TS
    idxs = np.flatnonzero(mask)
    if idxs.shape[0] > k:
        order = np.lexsort((id_rank[idxs], -ts_by[idxs]))
        idxs = idxs[order[:k]]
    return idxs


if _HAVE_NUMBA:

    @_njit(cache=True)
    def _match_jit(
        eligible,
        exact_codes,
        q_exact,
        tol_values,
        q_tol,
        tol_eps,
        ts_by,
        id_rank,
        k,
        self_idx,
    ):  # pragma: no cover - exercised via dispatch
        n = eligible.shape[0]
        n_exact = q_exact.shape[0]
        n_tol = q_tol.shape[0]
        for j in range(n_exact):
            if q_exact[j] < 0:
                return np.empty(0, dtype=np.int64)

        if k < 0:
            out = np.empty(n, dtype=np.int64)
            count = 0
            for i in range(n):
                if not eligible[i] or i == self_idx:
                    continue
                ok = True
                for j in range(n_exact):
                    c = exact_codes[j, i]
                    if c < 0 or c != q_exact[j]:
                        ok = False
                        break
                if ok:
                    for j in range(n_tol):
                        d = tol_values[j, i] - q_tol[j]
                        if not (-tol_eps[j] <= d <= tol_eps[j]):
                            ok = False
                            break
                if ok:
                    out[count] = i
                    count += 1
            return out[:count].copy()

        # Recency: keep the k matches with the largest ts_by, ties broken by
        # ascending id rank. Rows without the recency event are skipped.
        kept_idx = np.empty(k, dtype=np.int64)
        kept_ts = np.empty(k, dtype=np.int64)
        kept_rank = np.empty(k, dtype=np.int64)
        count = 0
        worst = -1
        for i in range(n):
            if not eligible[i] or i == self_idx or ts_by[i] == MISSING_TS:
                continue
            ok = True
            for j in range(n_exact):
                c = exact_codes[j, i]
                if c < 0 or c != q_exact[j]:
                    ok = False
                    break
            if ok:
                for j in range(n_tol):
                    d = tol_values[j, i] - q_tol[j]
                    if not (-tol_eps[j] <= d <= tol_eps[j]):
                        ok = False
                        break
            if not ok:
                continue
            if count < k:
                kept_idx[count] = i
                kept_ts[count] = ts_by[i]
                kept_rank[count] = id_rank[i]
                count += 1
                if count == k:
                    worst = 0
                    for m in range(1, k):
                        if kept_ts[m] < kept_ts[worst] or (
                            kept_ts[m] == kept_ts[worst] and kept_rank[m] > kept_rank[worst]
                        ):
                            worst = m
            else:
                better = ts_by[i] > kept_ts[worst] or (
                    ts_by[i] == kept_ts[worst] and id_rank[i] < kept_rank[worst]
                )
                if better:
                    kept_idx[worst] = i
                    kept_ts[worst] = ts_by[i]
                    kept_rank[worst] = id_rank[i]
                    worst = 0
                    for m in range(1, k):
                        if kept_ts[m] < kept_ts[worst] or (
                            kept_ts[m] == kept_ts[worst] and kept_rank[m] > kept_rank[worst]
                        ):
                            worst = m
        return kept_idx[:count].copy()


def match_candidates(
    eligible: np.ndarray,
    exact_codes: np.ndarray,
    q_exact: np.ndarray,
    tol_values: np.ndarray,
    q_tol: np.ndarray,
    tol_eps: np.ndarray,
    ts_by: np.ndarray,
    id_rank: np.ndarray,
    k: int,
    self_idx: int,
) -> np.ndarray:
    """Run the matcher pipeline for one query row against encoded history rows."""
    if USE_NUMBA:
        return _match_jit(
            eligible,
            exact_codes,
            q_exact,
            tol_values,
            q_tol,
            tol_eps,
            ts_by,
            id_rank,
            k,
            self_idx,
        )
    return _match_py(
        eligible, exact_codes, q_exact, tol_values, q_tol, tol_eps, ts_by, id_rank, k, self_idx
    )
