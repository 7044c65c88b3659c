"""Pure-Python trial kernels; reference implementation for the compiled lane.

Both kernel lanes implement the same counter-based random stream so their
outputs are bit-identical:

* ``mix64`` is the SplitMix64 finalizer (shift-xor-multiply with constants
  0xBF58476D1CE4E5B9 and 0x94D049BB133111EB).
* Trial ``t`` of master seed ``s`` uses the key
  ``k_t = mix64((s + (t+1) * PHI) mod 2^64)`` with ``PHI = 0x9E3779B97F4A7C15``.
* Draw ``i`` of a trial is ``unit(mix64((k_t + (i+1) * PHI) mod 2^64))`` where
  ``unit(x) = (x >> 11) * 2^-53`` yields a double in ``[0, 1)``.

Draw order per trial: one uniform per edge in canonical edge order (the edge
is up iff the draw is below its probability), then — only for the
shuffled-order unicast walk — a Fisher-Yates shuffle of the current node's
out-slots consuming one draw per swap (``j = int(u * (i+1))``).  Flooding and
fixed-order walks consume no draws beyond the edge states.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
PHI64 = 0x9E3779B97F4A7C15
_MUL1 = 0xBF58476D1CE4E5B9
_MUL2 = 0x94D049BB133111EB
_UNIT = 2.0**-53


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MUL1) & MASK64
    z = ((z ^ (z >> 27)) * _MUL2) & MASK64
    return z ^ (z >> 31)


def trial_key(seed: int, trial: int) -> int:
    return mix64((seed + (trial + 1) * PHI64) & MASK64)


def draw(key: int, index: int) -> float:
    """Uniform double in [0, 1): draw ``index`` of the trial stream ``key``."""
    return (mix64((key + (index + 1) * PHI64) & MASK64) >> 11) * _UNIT


def flood_counts(node_count, edge_src, edge_dst, edge_p, pass_order, source, trials, seed):
    """Per-node hit counts over flooding trials."""
    src = [int(x) for x in edge_src]
    dst = [int(x) for x in edge_dst]
    probs = [float(x) for x in edge_p]
    order = [int(x) for x in pass_order]
    edge_count = len(probs)
    hits = [0] * node_count
    for t in range(trials):
        key = trial_key(seed, t)
        up = [draw(key, e) < probs[e] for e in range(edge_count)]
        reached = [False] * node_count
        reached[source] = True
        for e in order:
            if up[e] and reached[src[e]]:
                reached[dst[e]] = True
        for v in range(node_count):
            if reached[v]:
                hits[v] += 1
    return np.asarray(hits, dtype=np.int64)


def unicast_counts(
    node_count, out_offset, out_target, out_edge, edge_p, source, trials, seed, shuffle
):
    """Per-node visit counts over unicast walks.

    ``shuffle`` picks the link try order uniformly at random each visit;
    otherwise slots are tried in the order the caller laid them out.
    """
    offsets = [int(x) for x in out_offset]
    targets = [int(x) for x in out_target]
    slot_edge = [int(x) for x in out_edge]
    probs = [float(x) for x in edge_p]
    edge_count = len(probs)
    hits = [0] * node_count
    for t in range(trials):
        key = trial_key(seed, t)
        up = [draw(key, e) < probs[e] for e in range(edge_count)]
        counter = edge_count
        cur = source
        hits[cur] += 1
        while True:
            lo = offsets[cur]
            degree = offsets[cur + 1] - lo
            if degree == 0:
                break
            if shuffle and degree > 1:
                perm = list(range(degree))
                for i in range(degree - 1, 0, -1):
                    j = int(draw(key, counter) * (i + 1))
                    counter += 1
                    perm[i], perm[j] = perm[j], perm[i]
            else:
                perm = range(degree)
            nxt = -1
            for k in perm:
                slot = lo + k
                if up[slot_edge[slot]]:
                    nxt = targets[slot]
                    break
            if nxt < 0:
                break
            cur = nxt
            hits[cur] += 1
    return np.asarray(hits, dtype=np.int64)


def flood_reach(up, src, dst, pass_order, node_count, source):
    """Hit set of one flooding trial given explicit edge states (test hook)."""
    reached = [False] * node_count
    reached[source] = True
    for e in pass_order:
        if up[e] and reached[src[e]]:
            reached[dst[e]] = True
    return reached
