"""Small explicit-graph helpers shared by the automata and model checker."""
from __future__ import annotations

from typing import Callable, Hashable, Iterable


def tarjan_scc(nodes: Iterable[Hashable], succ: Callable) -> list[list]:
    """Strongly connected components in reverse topological order (iterative)."""
    index: dict = {}
    low: dict = {}
    on_stack: set = set()
    stack: list = []
    out: list[list] = []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(succ(root)))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(succ(w))))
                    advanced = True
                    break
                if w in on_stack and index[w] < low[v]:
                    low[v] = index[w]
            if advanced:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                if low[v] < low[u]:
                    low[u] = low[v]
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                out.append(comp)
    return out


def reachable(start: Iterable[Hashable], succ: Callable) -> set:
    seen = set(start)
    todo = list(seen)
    while todo:
        v = todo.pop()
        for w in succ(v):
            if w not in seen:
                seen.add(w)
                todo.append(w)
    return seen


def nontrivial(comp: list, succ: Callable) -> bool:
    if len(comp) > 1:
        return True
    v = comp[0]
    return any(w == v for w in succ(v))


def nested_dfs(init: Hashable, succ: Callable, accepting: Callable):
    """Search for a reachable accepting cycle.

    ``succ(v)`` yields ``(label, w)`` pairs.  Returns ``None`` or a pair
    ``(stem, cycle)`` of label lists so that ``stem · cycle^ω`` is the label
    sequence of an accepting run.  Blue search in post-order seeds red
    searches; a red search stops at any node on the blue stack.
    """
    blue: set = set()
    red: set = set()
    # blue stack entries: (node, label used to reach node, successor iterator)
    stack = [(init, None, iter(succ(init)))]
    on_stack = {init: 0}
    blue.add(init)
    while stack:
        v, _, it = stack[-1]
        pushed = False
        for label, w in it:
            if w not in blue:
                blue.add(w)
                on_stack[w] = len(stack)
                stack.append((w, label, iter(succ(w))))
                pushed = True
                break
        if pushed:
            continue
        if accepting(v):
            hit = _red_search(v, succ, red, on_stack)
            if hit is not None:
                target, red_labels = hit
                depth = on_stack[target]
                labels = [entry[1] for entry in stack]
                stem = labels[1:depth + 1]
                cycle = labels[depth + 1:] + red_labels
                return stem, cycle
        stack.pop()
        del on_stack[v]
    return None


def _red_search(seed, succ, red: set, on_stack: dict):
    parent: dict = {}
    todo = [seed]
    if seed in red:
        return None
    red.add(seed)
    # BFS keeps the returned cycle short
    head = 0
    order = [seed]
    while head < len(order):
        v = order[head]
        head += 1
        for label, w in succ(v):
            if w in on_stack:
                labels = [label]
                u = v
                while u != seed:
                    u, lab = parent[u]
                    labels.append(lab)
                labels.reverse()
                return w, labels
            if w not in red:
                red.add(w)
                parent[w] = (v, label)
                order.append(w)
    del todo
    return None
