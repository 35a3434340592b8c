"""Shared (DAG) representation of normal forms.

Machine runs and the evaluator both produce terms whose equal subterms are
shared in memory; a TermGraph pins that sharing down as an explicit node
table so sizes and equalities can be measured without unfolding.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import UnfoldCapExceeded
from .syntax import App, Ident, Lam, Term, Var, ident_key


@dataclass(frozen=True)
class VarN:
    ident: Ident


@dataclass(frozen=True)
class AppN:
    fn: int
    arg: int


@dataclass(frozen=True)
class LamN:
    binder: Ident
    body: int


Node = VarN | AppN | LamN


class TermGraph:
    """Append-only node table; children always precede their parents."""

    def __init__(self, nodes: list[Node], root: int):
        if not 0 <= root < len(nodes):
            raise ValueError("root index out of range")
        self.nodes = nodes
        self.root = root
        self._sizes: dict[int, int] = {}

    def __repr__(self) -> str:
        return f"<TermGraph nodes={len(self.nodes)} root=@{self.root}>"

    def reachable(self) -> list[int]:
        """Indices reachable from the root, ascending."""
        seen = set()
        todo = [self.root]
        while todo:
            i = todo.pop()
            if i in seen:
                continue
            seen.add(i)
            match self.nodes[i]:
                case AppN(f, a):
                    todo.append(f)
                    todo.append(a)
                case LamN(_, b):
                    todo.append(b)
        return sorted(seen)

    def node_count(self) -> int:
        return len(self.reachable())

    def unfolded_size(self, index: int | None = None) -> int:
        """Size of the fully unfolded term (arbitrary precision)."""
        root = self.root if index is None else index
        sizes = self._sizes
        todo = [root]
        while todo:
            i = todo[-1]
            if i in sizes:
                todo.pop()
                continue
            match self.nodes[i]:
                case VarN(_):
                    sizes[i] = 1
                    todo.pop()
                case AppN(f, a):
                    missing = [j for j in (f, a) if j not in sizes]
                    if missing:
                        todo.extend(missing)
                    else:
                        sizes[i] = 1 + sizes[f] + sizes[a]
                        todo.pop()
                case LamN(_, b):
                    if b not in sizes:
                        todo.append(b)
                    else:
                        sizes[i] = 1 + sizes[b]
                        todo.pop()
        return sizes[root]

    def unfold(self, cap: int) -> Term:
        """The plain term this graph stands for; refuses above the cap,
        since unfolded sizes can be exponential in the graph size."""
        size = self.unfolded_size()
        if size > cap:
            raise UnfoldCapExceeded(size, cap)
        memo: dict[int, Term] = {}

        def go(i: int) -> Term:
            t = memo.get(i)
            if t is not None:
                return t
            match self.nodes[i]:
                case VarN(x):
                    t = Var(x)
                case AppN(f, a):
                    t = App(go(f), go(a))
                case LamN(x, b):
                    t = Lam(x, go(b))
            memo[i] = t
            return t

        return go(self.root)


class GraphBuilder:
    """Mutable arena that grows a TermGraph bottom-up."""

    def __init__(self):
        self.nodes: list[Node] = []

    def _add(self, node: Node) -> int:
        self.nodes.append(node)
        return len(self.nodes) - 1

    def var(self, x: Ident) -> int:
        return self._add(VarN(x))

    def app(self, fn: int, arg: int) -> int:
        return self._add(AppN(fn, arg))

    def lam(self, x: Ident, body: int) -> int:
        return self._add(LamN(x, body))

    def graph(self, root: int) -> TermGraph:
        return TermGraph(self.nodes, root)


def graph_of_term(t: Term) -> TermGraph:
    """Convert a term to a graph, preserving exactly its in-memory sharing
    (each distinct object becomes one node; no extra hash-consing)."""
    builder = GraphBuilder()
    memo: dict[int, tuple[Term, int]] = {}

    def go(t: Term) -> int:
        hit = memo.get(id(t))
        if hit is not None:
            return hit[1]
        match t:
            case Var(x):
                idx = builder.var(x)
            case App(f, a):
                idx = builder.app(go(f), go(a))
            case Lam(x, b):
                idx = builder.lam(x, go(b))
            case _:
                raise TypeError(f"not a term: {t!r}")
        memo[id(t)] = (t, idx)  # keep t alive so ids stay unique
        return idx

    return builder.graph(go(t))


def dag_text(g: TermGraph) -> str:
    """Textual DAG format: one `@i = ...` line per reachable node, then
    `root @i`."""
    lines = []
    for i in g.reachable():
        match g.nodes[i]:
            case VarN(x):
                lines.append(f"@{i} = var {x}")
            case AppN(f, a):
                lines.append(f"@{i} = app @{f} @{a}")
            case LamN(x, b):
                lines.append(f"@{i} = lam {x} @{b}")
    lines.append(f"root @{g.root}")
    return "\n".join(lines) + "\n"


# --- sharing-aware alpha-equivalence --------------------------------------


def _free_idents(g: TermGraph) -> dict[int, frozenset[Ident]]:
    out: dict[int, frozenset[Ident]] = {}
    for i in g.reachable():
        match g.nodes[i]:
            case VarN(x):
                out[i] = frozenset((x,))
            case AppN(f, a):
                out[i] = out[f] | out[a]
            case LamN(x, b):
                out[i] = out[b] - {x}
    return out


def shared_alpha_eq(g1: TermGraph, g2: TermGraph) -> bool:
    """Alpha-equivalence of the unfoldings, decided on the shared graphs.

    Simultaneous traversal under binder-level environments; results are
    memoized per node pair together with the correspondence of the levels
    their free variables are bound at, so shared nodes are revisited only
    when they appear under genuinely different binder alignments.
    """
    fv1 = _free_idents(g1)
    fv2 = _free_idents(g2)
    memo: dict[tuple, bool] = {}

    def signature(fv, env):
        levels = sorted({env[x] for x in fv if x in env})
        rank = {lvl: r for r, lvl in enumerate(levels)}
        return tuple(sorted((ident_key(x), rank.get(env.get(x), -1)) for x in fv))

    def go(i: int, j: int, env1: dict[Ident, int], env2: dict[Ident, int], depth: int) -> bool:
        key = (i, j, signature(fv1[i], env1), signature(fv2[j], env2))
        hit = memo.get(key)
        if hit is not None:
            return hit
        match g1.nodes[i], g2.nodes[j]:
            case (VarN(x), VarN(y)):
                lx = env1.get(x)
                ly = env2.get(y)
                res = (x == y) if lx is None and ly is None else lx == ly
            case (AppN(f1, a1), AppN(f2, a2)):
                res = go(f1, f2, env1, env2, depth) and go(a1, a2, env1, env2, depth)
            case (LamN(x, b1), LamN(y, b2)):
                res = go(b1, b2, {**env1, x: depth}, {**env2, y: depth}, depth + 1)
            case _:
                res = False
        memo[key] = res
        return res

    return go(g1.root, g2.root, {}, {}, 0)


def convertible(t1: Term, t2: Term, fuel: int | None = None) -> bool:
    """Do t1 and t2 share a normal form? Both are machine-normalized and
    the shared outputs compared for alpha-equivalence."""
    from . import subst_machine

    kwargs = {} if fuel is None else {"fuel": fuel}
    r1 = subst_machine.run(t1, **kwargs)
    r2 = subst_machine.run(t2, **kwargs)
    return shared_alpha_eq(r1.graph, r2.graph)
