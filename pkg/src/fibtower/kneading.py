from __future__ import annotations

from typing import Iterable

from .errors import DomainError

# Per-d tables.  _CUT[d] holds S_d(k) for k >= -3d+3 at offset 3d-3.
_CUT: dict[int, list[int]] = {}
_SYM: dict[int, bytearray] = {}


def _check_d(d: int) -> None:
    if not isinstance(d, int) or d < 2:
        raise DomainError(f"d must be an integer >= 2, got {d!r}")


def _cut_table(d: int, k: int) -> list[int]:
    _check_d(d)
    off = 3 * d - 3
    table = _CUT.get(d)
    if table is None:
        # k = -3d+3 .. -2d are zero, then S(-2d+1)=1, S(-2d+2)=0.
        table = [0] * (d - 2) + [1, 0]
        # fill up to k = -1 with the recursion, which holds from -2d+3 on
        while len(table) < off:
            j = len(table)
            table.append(table[j - 1] + table[j - d])
        table.extend(range(1, d + 2))  # S(k) = k+1 for 0 <= k <= d
        _CUT[d] = table
    while len(table) <= k + off:
        j = len(table)
        table.append(table[j - 1] + table[j - d])
    return table


def cutting_time(d: int, k: int) -> int:
    """S_d(k), including the extended negative indices."""
    if k < -3 * d + 3:
        raise DomainError(f"cutting_time needs k >= {-3 * d + 3}, got {k}")
    return _cut_table(d, k)[k + 3 * d - 3]


def cutting_times(d: int, kmax: int) -> list[int]:
    table = _cut_table(d, kmax)
    off = 3 * d - 3
    return table[off:off + kmax + 1]


def kneading_map(d: int, k: int) -> int:
    if k < 1:
        raise DomainError(f"kneading_map needs k >= 1, got {k}")
    return max(0, k - d)


def cutting_index_above(d: int, n: int) -> int:
    """Smallest k >= 0 with S_d(k) >= n."""
    k = 0
    while cutting_time(d, k) < n:
        k += 1
    return k


def _symbols(d: int, n: int) -> bytearray:
    _check_d(d)
    eps = _SYM.get(d)
    if eps is None:
        # index 0 is unused so that eps[n] is the n-th symbol
        eps = bytearray([0, 1])
        _SYM[d] = eps
    k = cutting_index_above(d, len(eps) - 1)
    while len(eps) - 1 < n:
        k += 1
        h = cutting_time(d, kneading_map(d, k))
        # block Delta_k copies eps_1..eps_{h-1} and flips eps_h
        eps += eps[1:h]
        eps.append(1 - eps[h])
    return eps


def kneading_symbols(d: int, n: int) -> bytearray:
    """Raw symbol buffer; entry j (1 <= j <= n) is eps_j.  Do not mutate."""
    if n < 1:
        raise DomainError("n must be >= 1")
    return _symbols(d, n)


def kneading_sequence(d: int, n: int) -> str:
    """The first n kneading symbols as a '0'/'1' string."""
    if n < 1:
        raise DomainError("n must be >= 1")
    eps = _symbols(d, n)
    return bytes(b + 48 for b in eps[1:n + 1]).decode()


def cutting_times_from_itinerary(itinerary: str | Iterable[int]) -> list[int]:
    eps = [int(s) for s in itinerary]
    if len(eps) < 2 or eps[0] != 1 or eps[1] != 0:
        raise DomainError("itinerary must begin with 1, 0")
    eps.insert(0, -1)  # 1-based
    length = len(eps) - 1
    out = [1]
    while True:
        prev = out[-1]
        nxt = next((m for m in range(prev + 1, length + 1)
                    if eps[m] != eps[m - prev]), None)
        if nxt is None:
            return out
        out.append(nxt)


def verify_sum_identity(d: int, j: int) -> bool:
    if j < 0:
        raise DomainError("j must be >= 0")
    lhs = sum(cutting_times(d, j))
    return lhs == cutting_time(d, j + d) - cutting_time(d, d - 1)


class Combinatorics:
    """Read-only view of the tables for one d."""

    def __init__(self, d: int):
        _check_d(d)
        self.d = d

    def S(self, k: int) -> int:
        return cutting_time(self.d, k)

    def Q(self, k: int) -> int:
        return kneading_map(self.d, k)

    def symbols(self, n: int) -> str:
        return kneading_sequence(self.d, n)

    def sigma(self, n: int) -> int:
        """+1 if c_n lies right of the turning point, else -1."""
        return 1 if _symbols(self.d, n)[n] else -1

    def height(self, i: int, k: int) -> int:
        """h_{i,k}."""
        d = self.d
        if i == 1:
            return self.S(self.Q(k + 1))
        return self.S(max(0, k + i - 2 * d))


def orbit_order(d: int, m: int, n: int) -> int:
    """Exact order of c_m and c_n (m, n >= 1) at the parameter a_d.

    The tent map is increasing on symbol 0 and decreasing on symbol 1, and
    c is not preperiodic, so the first disagreement of the two itineraries
    decides the order: -1 when c_m < c_n, 0 when m == n, +1 otherwise.
    """
    if m == n:
        return 0
    if m < 1 or n < 1:
        raise DomainError("orbit indices must be >= 1")
    span = 64
    while True:
        eps = _symbols(d, max(m, n) + span)
        a = bytes(eps[m:m + span])
        b = bytes(eps[n:n + span])
        if a != b:
            break
        span *= 2
    # binary search for the first mismatch inside the window
    lo, hi = 0, span
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if a[:mid] == b[:mid]:
            lo = mid
        else:
            hi = mid
    j = lo
    odd = a[:j].count(1) & 1
    less = (a[j] == 0) != bool(odd)
    return -1 if less else 1
