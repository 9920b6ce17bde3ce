"""The ordered Bratteli diagram B_d and its Vershik map.

Vertices at level k carry the labels of the towers present at level k:
1 and max(d-k+1, 2)..d.  Since every incidence entry is 0 or 1, a finite
path is stored as its sequence of vertex labels (v_0, v_1, ..., v_k) with
v_0 = 1.
"""
from __future__ import annotations

from dataclasses import dataclass

from .covers import Cover, Floor, build_cover, point_in_floor
from .errors import DepthInsufficient, DomainError
from .kneading import cutting_time
from .tent import TentSystem, orbit_point


def level_labels(d: int, k: int) -> list[int]:
    if k == 0:
        return [1]
    return [1] + list(range(max(d - k + 1, 2), d + 1))


def in_edges(d: int, k: int, label: int) -> list[int]:
    """Sources at level k-1 of the edges into v_k(label), in edge order."""
    prev = set(level_labels(d, k - 1))
    if label == 1:
        return [1, 2] if 2 in prev else [1]
    if label == d:
        return [1]
    return [label + 1]


def out_edges(d: int, k: int, label: int) -> list[int]:
    """Targets at level k+1 of the edges leaving v_k(label)."""
    if label == 1:
        return [1, d] if d != 1 else [1]
    if label == 2:
        return [1]
    return [label - 1]


@dataclass(frozen=True)
class Diagram:
    d: int
    depth: int

    def labels(self, k: int) -> list[int]:
        if not 0 <= k <= self.depth:
            raise DomainError(f"level {k} outside 0..{self.depth}")
        return level_labels(self.d, k)

    def edges(self, k: int) -> list[tuple[int, int, int]]:
        """Edges into level k as (source, target, order) with order 1 or 2."""
        out = []
        for t in self.labels(k):
            for pos, s in enumerate(in_edges(self.d, k, t), 1):
                out.append((s, t, pos))
        return out

    def out_degree(self, k: int, label: int) -> int:
        return len(out_edges(self.d, k, label))


def build_diagram(d: int, depth: int) -> Diagram:
    if d < 2:
        raise DomainError("d must be >= 2")
    if depth < 1:
        raise DomainError("depth must be >= 1")
    return Diagram(d, depth)


# ---------------------------------------------------------------------------
# matrices and counts

def incidence_matrix(d: int, k: int) -> list[list[int]]:
    """Edge counts from level k-1 (rows) to level k (columns)."""
    if k < 1:
        raise DomainError("k must be >= 1")
    kk = min(k, d)
    rows, cols = level_labels(d, kk - 1), level_labels(d, kk)
    col_of = {lab: c for c, lab in enumerate(cols)}
    F = [[0] * len(cols) for _ in rows]
    for r, s in enumerate(rows):
        for t in out_edges(d, kk - 1, s):
            if t in col_of and s in in_edges(d, kk, t):
                F[r][col_of[t]] += 1
    return F


def _stationary_labels(d: int) -> list[int]:
    return level_labels(d, d)


def stationary_matrix(d: int) -> list[list[int]]:
    """F_d with rows and columns in label order 1..d."""
    return incidence_matrix(d, d)


def stationary_power(d: int, j: int) -> list[list[int]]:
    """F_d^j written with extended cutting times."""
    if j < 1:
        raise DomainError("j must be >= 1")
    S = lambda n: cutting_time(d, n)
    out = []
    for r in range(1, d + 1):
        row = [S(j - d + 2 - r)]
        row += [S(j - 2 * d + c - r + 1) for c in range(2, d + 1)]
        out.append(row)
    return out


def matmul(A: list[list[int]], B: list[list[int]]) -> list[list[int]]:
    return [[sum(a * b for a, b in zip(row, col)) for col in zip(*B)] for row in A]


def path_counts(d: int, j: int) -> list[int]:
    """Number of paths from v_0 to each vertex of level j (label order)."""
    if j < 1:
        raise DomainError("j must be >= 1")
    if j < d:
        return [1] * (j + 1)
    q = j - d
    return [cutting_time(d, q + 1)] + [cutting_time(d, q - d + l) for l in range(2, d + 1)]


def path_counts_recursive(d: int, j: int) -> list[int]:
    """Same counts from N_j = N_{j-1} F_j."""
    N = [1]
    for k in range(1, j + 1):
        F = incidence_matrix(d, k)
        N = [sum(N[r] * F[r][c] for r in range(len(N))) for c in range(len(F[0]))]
    return N


def enumerate_paths(d: int, j: int, cap: int = 10 ** 6) -> list[tuple[int, ...]]:
    """All label paths from v_0 to level j (test oracle)."""
    paths = [(1,)]
    for k in range(1, j + 1):
        nxt = []
        for p in paths:
            for t in out_edges(d, k - 1, p[-1]):
                if p[-1] in in_edges(d, k, t):
                    nxt.append(p + (t,))
        paths = nxt
        if len(paths) > cap:
            raise DomainError("path enumeration cap exceeded")
    return paths


# ---------------------------------------------------------------------------
# paths

def _check_path(d: int, path: tuple[int, ...]) -> None:
    if not path or path[0] != 1:
        raise DomainError("paths start at v_0")
    for k in range(1, len(path)):
        if path[k - 1] not in in_edges(d, k, path[k]):
            raise DomainError(f"no edge {path[k - 1]} -> {path[k]} into level {k}")


def theta(d: int, path: tuple[int, ...], m: int) -> int:
    """1 when the m-th edge is the larger edge into v_m(1)."""
    return 1 if m >= d and path[m] == 1 and path[m - 1] == 2 else 0


def eta(d: int, path: tuple[int, ...]) -> int:
    _check_path(d, path)
    k = len(path) - 1
    return sum(cutting_time(d, m - d) for m in range(d, k + 1) if theta(d, path, m))


def edge_is_maximal(d: int, path: tuple[int, ...], m: int) -> bool:
    src = in_edges(d, m, path[m])
    return path[m - 1] == src[-1]


def edge_is_minimal(d: int, path: tuple[int, ...], m: int) -> bool:
    return path[m - 1] == in_edges(d, m, path[m])[0]


def minimal_path_to(d: int, k: int, label: int) -> tuple[int, ...]:
    """The unique path of minimal edges from v_0 to v_k(label)."""
    labels = [label]
    for m in range(k, 0, -1):
        labels.append(in_edges(d, m, labels[-1])[0])
    return tuple(reversed(labels))


def maximal_path(d: int, ell: int, depth: int) -> tuple[int, ...]:
    """Truncation of the maximal path through v_{d-1}(ell)."""
    if ell not in level_labels(d, d - 1):
        raise DomainError(f"no vertex {ell} at level {d - 1}")
    labels = [ell]
    for m in range(d - 1, 0, -1):
        labels.append(in_edges(d, m, labels[-1])[-1])
    path = list(reversed(labels))
    while len(path) <= depth:
        nxt = [t for t in out_edges(d, len(path) - 1, path[-1])
               if edge_is_maximal(d, tuple(path) + (t,), len(path))]
        path.append(nxt[0])
    return tuple(path[:depth + 1])


def maximal_eta_formula(d: int, ell: int, k: int) -> int:
    """eta of the maximal path through ell truncated at level ell+kd-2."""
    return cutting_time(d, ell + (k - 1) * d - 1) - 1


@dataclass(frozen=True)
class InfinitePath:
    """A finite prefix plus what is known about the edges beyond it.

    tail is "min" (all later edges minimal), "max" (all later edges
    maximal) or "undetermined".
    """
    prefix: tuple[int, ...]
    tail: str = "min"

    @property
    def depth(self) -> int:
        return len(self.prefix) - 1


def minimal_infinite_path(depth: int) -> InfinitePath:
    return InfinitePath((1,) * (depth + 1), "min")


def _extend_min(d: int, prefix: tuple[int, ...]) -> tuple[int, ...]:
    k = len(prefix) - 1
    t = out_edges(d, k, prefix[-1])
    # the minimal continuation takes the smallest edge into its target
    for cand in t:
        if edge_is_minimal(d, prefix + (cand,), k + 1):
            return prefix + (cand,)
    raise DomainError("no minimal continuation")


def vershik_successor(diagram: Diagram, path: InfinitePath) -> InfinitePath:
    d = diagram.d
    prefix = path.prefix
    _check_path(d, prefix)
    j0 = next((m for m in range(1, len(prefix))
               if not edge_is_maximal(d, prefix, m)), None)
    if j0 is None:
        if path.tail == "max":
            return minimal_infinite_path(path.depth)
        if path.tail != "min":
            raise DepthInsufficient("all edges maximal up to the truncation depth")
        # a minimal tail soon has a non-maximal edge; pull it into the prefix
        while j0 is None:
            prefix = _extend_min(d, prefix)
            if not edge_is_maximal(d, prefix, len(prefix) - 1):
                j0 = len(prefix) - 1
    src = in_edges(d, j0, prefix[j0])
    nxt_src = src[src.index(prefix[j0 - 1]) + 1]
    head = minimal_path_to(d, j0 - 1, nxt_src)
    return InfinitePath(head + prefix[j0:], path.tail)


# ---------------------------------------------------------------------------
# projection to the interval

class AdicContext:
    """Diagram and cover at one shared level, so they cannot disagree."""

    def __init__(self, sys: TentSystem, depth: int):
        if depth < sys.d:
            raise DomainError("projection needs depth >= d")
        self.sys = sys
        self.depth = depth
        self.diagram = build_diagram(sys.d, depth)
        self.cover = build_cover(sys, depth)

    def project(self, path: tuple[int, ...]) -> Floor:
        return project_cylinder(self.sys, self.cover, path)


def project_cylinder(sys: TentSystem, cover: Cover, path: tuple[int, ...]) -> Floor:
    """The floor J_{i,k}^{eta} of the terminal tower i at level k."""
    k = len(path) - 1
    if cover.k != k:
        raise DomainError(f"cover level {cover.k} does not match path depth {k}")
    e = eta(sys.d, path)
    tower = cover.towers[path[-1]]
    if e >= tower.height:
        raise IndexError(f"eta {e} exceeds height {tower.height}")
    return tower.floors[e]


def verify_semiconjugacy(sys: TentSystem, depth: int, n_max: int) -> dict:
    """c_n lies in the projected floor of V^n(x_min) for 0 <= n <= n_max."""
    d = sys.d
    ctx = AdicContext(sys, depth)
    # run the map deep enough that x_min's first n_max images stay in one fiber
    K = depth
    while cutting_time(d, K - d + 1) <= n_max:
        K += 1
    diag = build_diagram(d, K)
    x = minimal_infinite_path(K)
    failures = []
    eta_steps_ok = True
    for n in range(n_max + 1):
        if n > 0:
            prev = eta(d, x.prefix)
            x = vershik_successor(diag, x)
            eta_steps_ok &= eta(d, x.prefix) == prev + 1
        fl = ctx.project(x.prefix[:depth + 1])
        pt = orbit_point(sys, n)
        if not point_in_floor(n, pt, fl):
            failures.append(n)
    return {"depth": depth, "n_max": n_max, "internal_depth": K,
            "passed": not failures and eta_steps_ok,
            "eta_increments": eta_steps_ok, "failures": failures[:10]}


def to_dot(diagram: Diagram) -> str:
    """DOT text; the ordered pair into each v_k(1) carries labels 1 and 2."""
    d = diagram.d
    lines = [f"digraph B{d} {{", "  rankdir=TB;"]
    for k in range(diagram.depth + 1):
        names = " ".join(f'"v{k}_{i}";' for i in diagram.labels(k))
        lines.append(f"  {{ rank=same; {names} }}")
    for k in range(1, diagram.depth + 1):
        for s, t, pos in diagram.edges(k):
            attr = f' [label="{pos}"]' if len(in_edges(d, k, t)) == 2 else ""
            lines.append(f'  "v{k - 1}_{s}" -> "v{k}_{t}"{attr};')
    lines.append("}")
    return "\n".join(lines) + "\n"
