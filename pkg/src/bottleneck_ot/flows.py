"""Exact network flows on small graphs.

Capacities arrive as rationals; they are scaled by a common denominator so all
flow arithmetic runs on integers and stays exact.  Costs (used only by the
min-cost routine) may be floats — masses never are.
"""
from __future__ import annotations

from fractions import Fraction
from math import lcm


class _FlowNetwork:
    """Adjacency-list residual network with integer capacities."""

    def __init__(self, n_nodes: int):
        self.n = n_nodes
        self.head: list[list[int]] = [[] for _ in range(n_nodes)]
        self.to: list[int] = []
        self.cap: list[int] = []
        self.cost: list[float] = []

    def add_edge(self, u: int, v: int, cap: int, cost: float = 0.0) -> int:
        idx = len(self.to)
        self.head[u].append(idx)
        self.to.append(v)
        self.cap.append(cap)
        self.cost.append(cost)
        self.head[v].append(idx + 1)
        self.to.append(u)
        self.cap.append(0)
        self.cost.append(-cost)
        return idx


def _dinic(net: _FlowNetwork, s: int, t: int) -> int:
    flow = 0
    n = net.n
    while True:
        level = [-1] * n
        level[s] = 0
        queue = [s]
        for u in queue:
            for e in net.head[u]:
                v = net.to[e]
                if net.cap[e] > 0 and level[v] < 0:
                    level[v] = level[u] + 1
                    queue.append(v)
        if level[t] < 0:
            return flow
        it = [0] * n

        def dfs(u: int, pushed: int) -> int:
            if u == t:
                return pushed
            while it[u] < len(net.head[u]):
                e = net.head[u][it[u]]
                v = net.to[e]
                if net.cap[e] > 0 and level[v] == level[u] + 1:
                    got = dfs(v, min(pushed, net.cap[e]))
                    if got:
                        net.cap[e] -= got
                        net.cap[e ^ 1] += got
                        return got
                it[u] += 1
            return 0

        while True:
            pushed = dfs(s, 1 << 62)
            if not pushed:
                break
            flow += pushed


def _common_denominator(values) -> int:
    d = 1
    for v in values:
        d = lcm(d, Fraction(v).denominator)
    return d


def max_flow(n_nodes: int, edges, source: int, sink: int):
    """Exact max flow with rational capacities.

    ``edges`` is an iterable of (u, v, capacity) with Fraction capacities.
    Returns (value, flows) where ``flows`` maps edge position -> Fraction flow.
    """
    edges = list(edges)
    denom = _common_denominator(cap for _, _, cap in edges)
    net = _FlowNetwork(n_nodes)
    ids = []
    for u, v, cap in edges:
        scaled = Fraction(cap) * denom
        assert scaled.denominator == 1
        ids.append(net.add_edge(u, v, int(scaled)))
    value = _dinic(net, source, sink)
    flows = {}
    for pos, ((u, v, cap), e) in enumerate(zip(edges, ids)):
        used = net.cap[e ^ 1]  # reverse capacity equals routed flow
        if used:
            flows[pos] = Fraction(used, denom)
    return Fraction(value, denom), flows


def min_cost_max_flow(n_nodes: int, edges, source: int, sink: int):
    """Successive shortest paths; integer masses, float costs.

    ``edges``: iterable of (u, v, capacity, cost) with rational capacities and
    nonnegative float costs.  Returns (flow value, total cost, flows dict).
    """
    edges = list(edges)
    denom = _common_denominator(cap for _, _, cap, _ in edges)
    net = _FlowNetwork(n_nodes)
    ids = []
    for u, v, cap, cost in edges:
        scaled = Fraction(cap) * denom
        assert scaled.denominator == 1
        ids.append(net.add_edge(u, v, int(scaled), float(cost)))

    inf = float("inf")
    total = 0
    while True:
        # Bellman-Ford: edge costs are nonnegative but reduced residual costs
        # can be negative, and the graphs here are tiny.
        dist = [inf] * n_nodes
        in_queue = [False] * n_nodes
        prev_edge = [-1] * n_nodes
        dist[source] = 0.0
        queue = [source]
        in_queue[source] = True
        while queue:
            u = queue.pop(0)
            in_queue[u] = False
            for e in net.head[u]:
                v = net.to[e]
                if net.cap[e] > 0 and dist[u] + net.cost[e] < dist[v] - 1e-15:
                    dist[v] = dist[u] + net.cost[e]
                    prev_edge[v] = e
                    if not in_queue[v]:
                        queue.append(v)
                        in_queue[v] = True
        if dist[sink] == inf:
            break
        push = None
        v = sink
        while v != source:
            e = prev_edge[v]
            push = net.cap[e] if push is None else min(push, net.cap[e])
            v = net.to[e ^ 1]
        v = sink
        while v != source:
            e = prev_edge[v]
            net.cap[e] -= push
            net.cap[e ^ 1] += push
            v = net.to[e ^ 1]
        total += push

    flows = {}
    cost_terms = []
    for pos, ((u, v, cap, cost), e) in enumerate(zip(edges, ids)):
        used = net.cap[e ^ 1]
        if used:
            flows[pos] = Fraction(used, denom)
            cost_terms.append(float(cost) * used / denom)
    import math

    return Fraction(total, denom), math.fsum(cost_terms), flows
