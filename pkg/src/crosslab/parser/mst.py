"""Maximum spanning arborescence decoding (Chu-Liu/Edmonds).

Scores arrive as an (n+1) x n matrix: row = candidate head (0 is the
synthetic root), column = dependent. Decoding returns, for every dependent,
a head such that the arcs form a tree rooted at 0 with exactly one child of
the root. The single-root constraint is enforced by trying each token as
the root's child and keeping the best total (small n makes this cheap).
Ties break deterministically by (head, dependent) index order.
"""

from __future__ import annotations

import numpy as np

from ..errors import NumericsError


def _find_cycle(heads: np.ndarray) -> list[int] | None:
    m = len(heads)
    color = [0] * m  # 0 unseen, 1 on current walk, 2 done
    color[0] = 2
    for start in range(1, m):
        path = []
        v = start
        while color[v] == 0:
            color[v] = 1
            path.append(v)
            v = heads[v]
        if color[v] == 1:
            i = path.index(v)
            cycle = path[i:]
            for p in path:
                color[p] = 2
            return cycle
        for p in path:
            color[p] = 2
    return None


def _chu_liu_edmonds(score: np.ndarray) -> np.ndarray:
    """Greedy-plus-contraction over a square score matrix with node 0 as
    root; returns the head of every node (heads[0] is unused)."""
    m = score.shape[0]
    heads = np.zeros(m, dtype=np.intp)
    for d in range(1, m):
        col = score[:, d].copy()
        col[d] = -np.inf
        heads[d] = int(np.argmax(col))

    cycle = _find_cycle(heads)
    if cycle is None:
        return heads

    in_cycle = set(cycle)
    rest = [v for v in range(m) if v not in in_cycle]
    new_of = {v: i for i, v in enumerate(rest)}
    c_new = len(rest)
    sub = np.full((c_new + 1, c_new + 1), -np.inf)
    for a in rest:
        for b in rest:
            if a != b:
                sub[new_of[a], new_of[b]] = score[a, b]

    enter_choice: dict[int, int] = {}
    for a in rest:
        best_val, best_v = -np.inf, cycle[0]
        for v in cycle:
            val = score[a, v] - score[heads[v], v]
            if val > best_val:
                best_val, best_v = val, v
        sub[new_of[a], c_new] = best_val
        enter_choice[new_of[a]] = best_v

    leave_choice: dict[int, int] = {}
    for b in rest:
        best_val, best_v = -np.inf, cycle[0]
        for v in cycle:
            if score[v, b] > best_val:
                best_val, best_v = score[v, b], v
        sub[c_new, new_of[b]] = best_val
        leave_choice[new_of[b]] = best_v

    sub_heads = _chu_liu_edmonds(sub)

    final = heads.copy()
    for b_new in range(1, c_new + 1):
        h_new = int(sub_heads[b_new])
        if b_new == c_new:
            v = enter_choice[h_new]
            final[v] = rest[h_new]  # break the cycle at v
        else:
            b = rest[b_new]
            final[b] = leave_choice[b_new] if h_new == c_new else rest[h_new]
    return final


def mst_decode(arc_scores: np.ndarray) -> list[int]:
    """Best single-root arborescence for an (n+1, n) score matrix."""
    a = np.asarray(arc_scores, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1] + 1:
        raise NumericsError(f"arc score matrix must be (n+1, n), got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NumericsError("non-finite arc scores")
    n = a.shape[1]
    if n == 1:
        return [0]

    square = np.full((n + 1, n + 1), -np.inf)
    square[:, 1:] = a
    forbidden = -(np.abs(a).max() + 1.0) * (n + 2)

    best_heads: list[int] | None = None
    best_total = -np.inf
    for root_child in range(1, n + 1):
        s = square.copy()
        s[0, :] = forbidden
        s[0, root_child] = square[0, root_child]
        heads = _chu_liu_edmonds(s)
        if (heads[1:] == 0).sum() != 1:
            continue  # forbidden arc chosen: infeasible under this root child
        total = float(square[heads[1:], np.arange(1, n + 1)].sum())
        if total > best_total:
            best_total = total
            best_heads = [int(h) for h in heads[1:]]
    assert best_heads is not None
    return best_heads
