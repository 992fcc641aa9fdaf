"""Compiled bulk walk samplers.

The samplers draw millions of walks per graph, so they run as numba kernels
that fuse four steps per transition: alias draw, first-occurrence ranking,
vocabulary-trie lookup, and count/id emission. Each walk owns a counter-based
splitmix64 stream keyed by (seed, walk index), which makes results
independent of chunking or worker count and lets a prefix of a larger run
reproduce a smaller run exactly.
"""

from __future__ import annotations

import numpy as np
from numba import njit

U64 = np.uint64
_GOLDEN = U64(0x9E3779B97F4A7C15)
_MIX1 = U64(0xBF58476D1CE4E5B9)
_MIX2 = U64(0x94D049BB133111EB)
_LOW32 = U64(0xFFFFFFFF)
_SH = U64(32)


@njit(cache=True, inline="always")
def _mix(z):
    z = (z ^ (z >> U64(30))) * _MIX1
    z = (z ^ (z >> U64(27))) * _MIX2
    return z ^ (z >> U64(31))


@njit(cache=True, nogil=True)
def _walk_counts(offsets, neighbors, accept_u32, alias_idx, start_nodes,
                 w_lo, w_hi, nsteps, trans, trans_off, trans_width,
                 counts, counts_off, limits, seed):
    """Sample walks w_lo..w_hi-1 and accumulate vocabulary-index counts.

    limits[j] is the number of walks contributing to the length-(j+1)
    counts; walks with index >= limits[j] skip that length. Returns -1 on
    success or the id of a dead-end node.
    """
    n_start = U64(start_nodes.shape[0])
    seen = np.empty(nsteps + 1, dtype=np.int64)
    for i in range(w_lo, w_hi):
        x = _mix(seed + U64(i) * _GOLDEN)
        x += _GOLDEN
        r = _mix(x)
        cur = np.int64(start_nodes[np.int64(((r >> _SH) * n_start) >> _SH)])
        seen[0] = cur
        ns = 1
        wid = np.int64(0)
        for j in range(nsteps):
            lo = offsets[cur]
            deg = offsets[cur + 1] - lo
            if deg == 0:
                return cur
            x += _GOLDEN
            r = _mix(x)
            slot = np.int64(((r >> _SH) * U64(deg)) >> _SH)
            if (r & _LOW32) >= accept_u32[lo + slot]:
                slot = np.int64(alias_idx[lo + slot])
            cur = np.int64(neighbors[lo + slot])
            state = 0
            for t in range(ns):
                if seen[t] == cur:
                    state = t + 1
                    break
            if state == 0:
                seen[ns] = cur
                ns += 1
                state = ns
            wid = np.int64(trans[trans_off[j] + wid * trans_width[j] + (state - 1)])
            if i < limits[j]:
                counts[counts_off[j] + wid] += 1
    return np.int64(-1)


@njit(cache=True, nogil=True)
def _walk_ids(offsets, neighbors, accept_u32, alias_idx, starts,
              nsteps, trans, trans_off, trans_width, out_ids, seed):
    """Sample one walk per entry of ``starts`` and store its final-length
    vocabulary index in ``out_ids``. Returns -1 or a dead-end node id."""
    m = starts.shape[0]
    seen = np.empty(nsteps + 1, dtype=np.int64)
    for i in range(m):
        x = _mix(seed + U64(i) * _GOLDEN)
        cur = np.int64(starts[i])
        seen[0] = cur
        ns = 1
        wid = np.int64(0)
        for j in range(nsteps):
            lo = offsets[cur]
            deg = offsets[cur + 1] - lo
            if deg == 0:
                return cur
            x += _GOLDEN
            r = _mix(x)
            slot = np.int64(((r >> _SH) * U64(deg)) >> _SH)
            if (r & _LOW32) >= accept_u32[lo + slot]:
                slot = np.int64(alias_idx[lo + slot])
            cur = np.int64(neighbors[lo + slot])
            state = 0
            for t in range(ns):
                if seen[t] == cur:
                    state = t + 1
                    break
            if state == 0:
                seen[ns] = cur
                ns += 1
                state = ns
            wid = np.int64(trans[trans_off[j] + wid * trans_width[j] + (state - 1)])
        out_ids[i] = wid
    return np.int64(-1)


def count_sampled_walks(rwg, vocabs, limits, seed, w_lo=0):
    """Draw max(limits) walks and return per-length count vectors.

    ``vocabs`` maps each tracked length to its WalkVocabulary; all must be
    prefix-consistent, so the tables of the longest one serve every length.
    ``limits`` maps length -> number of walks counted at that length.
    """
    from .walks import DeadEndError

    lengths = sorted(vocabs)
    lmax = lengths[-1]
    vmax = vocabs[lmax]
    flat, toff, twidth = vmax.flat_trans()
    sizes = _level_sizes(vmax)
    counts_off = np.zeros(lmax, dtype=np.int64)
    for j in range(1, lmax):
        counts_off[j] = counts_off[j - 1] + sizes[j - 1]
    counts = np.zeros(int(counts_off[-1] + sizes[-1]), dtype=np.int64)
    lim = np.zeros(lmax, dtype=np.int64)
    for l in lengths:
        if vocabs[l].size != sizes[l - 1]:
            raise ValueError(f"vocabulary for length {l} does not match the "
                             f"length-{lmax} enumeration")
        lim[l - 1] = limits[l]
    m = int(max(limits.values()))
    bad = _walk_counts(rwg.offsets, rwg.neighbors, rwg.alias_accept_u32,
                       rwg.alias_idx, rwg.start_nodes,
                       w_lo, w_lo + m, lmax, flat, toff, twidth,
                       counts, counts_off, lim, U64(seed))
    if bad >= 0:
        raise DeadEndError(int(bad))
    return {l: counts[counts_off[l - 1]:counts_off[l - 1] + sizes[l - 1]].copy()
            for l in lengths}


def sample_walk_ids(rwg, vocab, starts, seed):
    """Vocabulary index of one sampled walk per start node given."""
    from .walks import DeadEndError

    flat, toff, twidth = vocab.flat_trans()
    out = np.empty(starts.size, dtype=np.int32)
    bad = _walk_ids(rwg.offsets, rwg.neighbors, rwg.alias_accept_u32,
                    rwg.alias_idx, starts.astype(np.int32), vocab.length,
                    flat, toff, twidth, out, U64(seed))
    if bad >= 0:
        raise DeadEndError(int(bad))
    return out


def _level_sizes(vocab):
    """Number of distinct walks at each step 1..length of the enumeration."""
    return [t.max() + 1 for t in vocab.trans]
