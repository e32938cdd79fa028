"""Independent reference implementations used only by the tests."""

import itertools
from fractions import Fraction


def spanning_trees(n, edges):
    """All spanning trees of an n-node graph, by subset enumeration + union-find."""
    for subset in itertools.combinations(edges, n - 1):
        parent = list(range(n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        ok = True
        for u, v, _ in subset:
            ru, rv = find(u), find(v)
            if ru == rv:
                ok = False
                break
            parent[ru] = rv
        if ok:
            yield subset


def rooted_tree_delay(n, tree_edges, root):
    """Max root-to-node path weight, by explicit traversal (no shared code)."""
    adj = {v: [] for v in range(n)}
    for u, v, w in tree_edges:
        adj[u].append((v, w))
        adj[v].append((u, w))
    best, stack, seen = 0, [(root, 0)], {root}
    while stack:
        v, dist = stack.pop()
        best = max(best, dist)
        for w_node, w in adj[v]:
            if w_node not in seen:
                seen.add(w_node)
                stack.append((w_node, dist + w))
    return best


def brute_force_min_delay(n, edges, root):
    return min(rooted_tree_delay(n, t, root) for t in spanning_trees(n, edges))


def aggregate_forward_completion(parent, delay, units):
    """Event-free recursion for a single chunk of ``units`` data.

    A node finishes receiving when its slowest child has finished and then
    spent ``units * delay`` on the edge; leaves start at time zero.
    """
    kids = {}
    for c, p in parent.items():
        kids.setdefault(p, []).append(c)

    def ready(v):
        return max((ready(c) + Fraction(units) * delay[c] for c in kids.get(v, ())),
                   default=Fraction(0))

    root = next(p for p in parent.values() if p not in parent)
    return ready(root)
