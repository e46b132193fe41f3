"""Integral max-flow (Edmonds-Karp) with minimum-cut extraction."""

from __future__ import annotations

from collections import deque

INF = 1 << 40


class FlowNetwork:
    """Directed network with integer capacities on arcs.

    Nodes are integers ``0..n-1``.  Parallel arcs are merged by adding
    their capacities.
    """

    def __init__(self, n: int):
        self.n = n
        self.cap: list[dict[int, int]] = [dict() for _ in range(n)]

    def add_node(self) -> int:
        self.cap.append({})
        self.n += 1
        return self.n - 1

    def add_edge(self, u: int, v: int, capacity: int = 1) -> None:
        self.cap[u][v] = self.cap[u].get(v, 0) + capacity
        self.cap[v].setdefault(u, 0)

    def max_flow(self, s: int, t: int, limit: int | None = None) -> int:
        """Push flow from ``s`` to ``t``; stops early once ``limit`` is reached.

        Residual capacities are kept in place, so ``source_side`` and
        ``flow_on`` can be queried afterwards.
        """
        self._orig = [dict(c) for c in self.cap]
        total = 0
        while limit is None or total < limit:
            parent = {s: None}
            q = deque([s])
            while q and t not in parent:
                u = q.popleft()
                for v, c in self.cap[u].items():
                    if c > 0 and v not in parent:
                        parent[v] = u
                        q.append(v)
            if t not in parent:
                break
            # bottleneck along the BFS path
            b = INF
            v = t
            while parent[v] is not None:
                u = parent[v]
                b = min(b, self.cap[u][v])
                v = u
            v = t
            while parent[v] is not None:
                u = parent[v]
                self.cap[u][v] -= b
                self.cap[v][u] += b
                v = u
            total += b
        return total

    def source_side(self, s: int) -> set[int]:
        """Nodes reachable from ``s`` in the residual network: the source side
        of the minimum cut closest to the source."""
        seen = {s}
        q = deque([s])
        while q:
            u = q.popleft()
            for v, c in self.cap[u].items():
                if c > 0 and v not in seen:
                    seen.add(v)
                    q.append(v)
        return seen

    def flow_on(self, u: int, v: int) -> int:
        """Net flow pushed along arc (u, v) by the last ``max_flow`` call."""
        return self._orig[u].get(v, 0) - self.cap[u].get(v, 0) if self._orig[u].get(v, 0) else 0
