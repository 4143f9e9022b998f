"""Hot loops with numba-compiled and pure-numpy twins.

Two stages dominate runtime: stepping the hit-and-run chain and counting
pairwise relations across samples. Each has a numba version and a numpy
version; both consume identical pre-drawn random buffers in the same
order and perform the same elementwise float operations, so a given
backend is bit-reproducible for a seed. Backend selection happens at call
time: numba is used when importable unless SMAA_PROMETHEE_NUMBA=0 or
NUMBA_DISABLE_JIT is set in the environment.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = [
    "numba_available",
    "active_backend",
    "chain_steps",
    "count_relations",
    "CHAIN_OK",
    "CHAIN_STUCK",
    "CHAIN_UNBOUNDED",
]

# status codes shared by both chain implementations
CHAIN_OK = 0
CHAIN_STUCK = 1
CHAIN_UNBOUNDED = 2

# a chord narrower than this is treated as numerically empty
_CHORD_TOL = 1e-12
_DOT_TOL = 1e-14

try:
    if os.environ.get("NUMBA_DISABLE_JIT", "0") not in ("", "0"):
        raise ImportError("NUMBA_DISABLE_JIT is set")
    from numba import njit as _njit

    _HAVE_NUMBA = True
except ImportError:
    _HAVE_NUMBA = False
    _njit = None


def numba_available() -> bool:
    return _HAVE_NUMBA


def active_backend() -> str:
    """Backend the dispatchers will use for the next call."""
    if _HAVE_NUMBA and os.environ.get("SMAA_PROMETHEE_NUMBA", "1") != "0":
        return "numba"
    return "numpy"


def _chain_loop(At, bt, y, dirs, uniforms, burn_in, thinning, retry_budget,
                state, out):
    """Advance the chain while the random buffers last.

    ``state`` holds (steps_done, kept, retries) and is updated in place;
    ``out`` receives thinned post-burn-in points. Every attempted step
    consumes one direction row and one uniform, so random consumption is
    identical across backends. Returns (status, randoms_consumed).
    """
    steps_done = state[0]
    kept = state[1]
    retries = state[2]
    total = burn_in + out.shape[0] * thinning
    n_rows = At.shape[0]
    n_rand = dirs.shape[0]
    consumed = 0
    status = CHAIN_OK
    while steps_done < total and consumed < n_rand:
        d = dirs[consumed]
        u = uniforms[consumed]
        consumed += 1
        norm = np.sqrt(np.dot(d, d))
        if norm <= 0.0:
            retries += 1
            if retries > retry_budget:
                status = CHAIN_STUCK
                break
            continue
        dn = d / norm
        coef = np.dot(At, dn)
        slack = bt - np.dot(At, y)
        t_lo = -np.inf
        t_hi = np.inf
        for r in range(n_rows):
            c = coef[r]
            if c > _DOT_TOL:
                ratio = slack[r] / c
                if ratio < t_hi:
                    t_hi = ratio
            elif c < -_DOT_TOL:
                ratio = slack[r] / c
                if ratio > t_lo:
                    t_lo = ratio
        if not (np.isfinite(t_lo) and np.isfinite(t_hi)):
            status = CHAIN_UNBOUNDED
            break
        if t_hi - t_lo < _CHORD_TOL:
            retries += 1
            if retries > retry_budget:
                status = CHAIN_STUCK
                break
            continue
        retries = 0
        t = t_lo + u * (t_hi - t_lo)
        step = t * dn
        for i in range(y.shape[0]):
            y[i] = y[i] + step[i]
        steps_done += 1
        if steps_done > burn_in and (steps_done - burn_in) % thinning == 0:
            out[kept] = y
            kept += 1
    state[0] = steps_done
    state[1] = kept
    state[2] = retries
    return status, consumed


def _chain_loop_numpy(At, bt, y, dirs, uniforms, burn_in, thinning, retry_budget,
                      state, out):
    """Vectorised twin of the chain loop (chord bounds without the row scan)."""
    steps_done = int(state[0])
    kept = int(state[1])
    retries = int(state[2])
    total = burn_in + out.shape[0] * thinning
    n_rand = dirs.shape[0]
    consumed = 0
    status = CHAIN_OK
    while steps_done < total and consumed < n_rand:
        d = dirs[consumed]
        u = uniforms[consumed]
        consumed += 1
        norm = np.sqrt(np.dot(d, d))
        if norm <= 0.0:
            retries += 1
            if retries > retry_budget:
                status = CHAIN_STUCK
                break
            continue
        dn = d / norm
        coef = np.dot(At, dn)
        slack = bt - np.dot(At, y)
        upper = coef > _DOT_TOL
        lower = coef < -_DOT_TOL
        # min/max are exact, so the bounds match the scalar scan bit for bit
        t_hi = np.min(slack[upper] / coef[upper]) if upper.any() else np.inf
        t_lo = np.max(slack[lower] / coef[lower]) if lower.any() else -np.inf
        if not (np.isfinite(t_lo) and np.isfinite(t_hi)):
            status = CHAIN_UNBOUNDED
            break
        if t_hi - t_lo < _CHORD_TOL:
            retries += 1
            if retries > retry_budget:
                status = CHAIN_STUCK
                break
            continue
        retries = 0
        t = t_lo + u * (t_hi - t_lo)
        y += t * dn
        steps_done += 1
        if steps_done > burn_in and (steps_done - burn_in) % thinning == 0:
            out[kept] = y
            kept += 1
    state[0] = steps_done
    state[1] = kept
    state[2] = retries
    return status, consumed


_chain_numba = _njit(cache=True, nogil=True)(_chain_loop) if _HAVE_NUMBA else None


def chain_steps(At, bt, y, dirs, uniforms, burn_in, thinning, retry_budget,
                state, out, backend: str | None = None):
    """Dispatch one chain burst to the selected backend."""
    if backend is None:
        backend = active_backend()
    if backend == "numba" and _chain_numba is not None:
        return _chain_numba(At, bt, y, dirs, uniforms, burn_in, thinning,
                            retry_budget, state, out)
    return _chain_loop_numpy(At, bt, y, dirs, uniforms, burn_in, thinning,
                             retry_budget, state, out)


def _count_loop(pos, neg, tau, rank_counts, p1_pref, p1_ind, p1_inc,
                p2_pref, p2_ind, first_mask):
    n_samples, m = pos.shape
    for s in range(n_samples):
        for i in range(m):
            net_i = pos[s, i] - neg[s, i]
            rank = 1
            for k in range(m):
                if k != i and (pos[s, k] - neg[s, k]) - net_i > tau:
                    rank += 1
            rank_counts[i, rank - 1] += 1
            if rank == 1:
                first_mask[s, i] = 1
        for i in range(m):
            for j in range(m):
                if i == j:
                    continue
                dnet = (pos[s, i] - neg[s, i]) - (pos[s, j] - neg[s, j])
                if dnet > tau:
                    p2_pref[i, j] += 1
                elif dnet >= -tau:
                    p2_ind[i, j] += 1
                dpos = pos[s, i] - pos[s, j]
                dneg = neg[s, i] - neg[s, j]
                if -tau <= dpos <= tau and -tau <= dneg <= tau:
                    p1_ind[i, j] += 1
                elif dpos >= -tau and dneg <= tau and (dpos > tau or dneg < -tau):
                    p1_pref[i, j] += 1
                elif not (dpos <= tau and dneg >= -tau and (dpos < -tau or dneg > tau)):
                    # neither direction wins and the flows do not tie
                    p1_inc[i, j] += 1


_count_numba = _njit(cache=True, nogil=True)(_count_loop) if _HAVE_NUMBA else None


def _count_vectorised(pos, neg, tau, rank_counts, p1_pref, p1_ind, p1_inc,
                      p2_pref, p2_ind, first_mask):
    m = pos.shape[1]
    net = pos - neg
    dnet = net[:, :, None] - net[:, None, :]
    ranks = 1 + (dnet < -tau).sum(axis=2)
    for i in range(m):
        rank_counts[i] += np.bincount(ranks[:, i] - 1, minlength=m)
    first_mask[:] = ranks == 1
    off = ~np.eye(m, dtype=bool)
    p2_pref += (off & (dnet > tau)).sum(axis=0)
    p2_ind += (off & (dnet <= tau) & (dnet >= -tau)).sum(axis=0)
    dpos = pos[:, :, None] - pos[:, None, :]
    dneg = neg[:, :, None] - neg[:, None, :]
    ind = (np.abs(dpos) <= tau) & (np.abs(dneg) <= tau)
    pref_ij = (dpos >= -tau) & (dneg <= tau) & ((dpos > tau) | (dneg < -tau))
    pref_ji = (dpos <= tau) & (dneg >= -tau) & ((dpos < -tau) | (dneg > tau))
    p1_ind += (off & ind).sum(axis=0)
    p1_pref += (off & ~ind & pref_ij).sum(axis=0)
    p1_inc += (off & ~ind & ~pref_ij & ~pref_ji).sum(axis=0)


def count_relations(pos, neg, tau, rank_counts, p1_pref, p1_ind, p1_inc,
                    p2_pref, p2_ind, first_mask, backend: str | None = None):
    """Accumulate relation counts for one block of per-sample flows.

    ``pos`` and ``neg`` are (samples, m) flow arrays, the count matrices
    are int64 and updated in place, and ``first_mask`` (samples, m, uint8)
    flags rank-1 hits for the central weight accumulation. Counts are
    integer tallies of identical float comparisons, so the two backends
    agree exactly.
    """
    if backend is None:
        backend = active_backend()
    if backend == "numba" and _count_numba is not None:
        _count_numba(pos, neg, tau, rank_counts, p1_pref, p1_ind, p1_inc,
                     p2_pref, p2_ind, first_mask)
    else:
        _count_vectorised(pos, neg, tau, rank_counts, p1_pref, p1_ind, p1_inc,
                          p2_pref, p2_ind, first_mask)
