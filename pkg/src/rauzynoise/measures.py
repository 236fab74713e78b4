"""k-step Markov measures on digit shifts: entropy, noise, dimension.

States are length-k words in temporal order, indexed big-endian.  The
transition matrix is supported on overlapping successors only, so each
row really carries one digit law.  Entries may be floats or exact
Fractions; products, sums and maxima follow the entry type, while
logarithms are always evaluated in floats (natural log).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import log

import numpy as np

from .digitseq import DigitSeq, _digit_dtype
from .generators import ProbVector


class AmbiguousChainError(ValueError):
    """The chain has several closed communicating classes, so the
    stationary distribution is not unique."""

    def __init__(self, classes):
        self.classes = [tuple(c) for c in classes]
        super().__init__(
            "multiple closed communicating classes: "
            + "; ".join(str(list(c)) for c in self.classes)
        )


def _is_exact(values) -> bool:
    return all(isinstance(v, (int, Fraction)) for v in values)


def _as_matrix(values, n):
    arr = np.asarray(values, dtype=object)
    if arr.shape != (n, n):
        raise ValueError(f"expected a {n}x{n} matrix, got shape {arr.shape}")
    return arr


def word_index(base: int, word) -> int:
    code = 0
    for d in word:
        if not 0 <= d < base:
            raise ValueError(f"digit {d} out of range for base {base}")
        code = code * base + int(d)
    return code


def index_word(base: int, k: int, code: int) -> tuple:
    out = []
    for _ in range(k):
        out.append(code % base)
        code //= base
    return tuple(reversed(out))


def successor_index(base: int, k: int, code: int, digit: int) -> int:
    """Index of the word obtained by dropping the first digit and
    appending `digit`."""
    return (code % base ** (k - 1)) * base + digit


@dataclass(frozen=True)
class MarkovSpec:
    """Stationary k-step Markov measure (rho over states, row-stochastic P).

    P may only charge transitions between overlapping words; rho must be
    stationary for P.
    """

    base: int
    k: int
    rho: tuple
    P: tuple

    def __post_init__(self):
        if self.base < 2 or self.k < 1:
            raise ValueError("need base >= 2 and k >= 1")
        n = self.base ** self.k
        rho = tuple(self.rho)
        P = tuple(tuple(row) for row in self.P)
        if len(rho) != n or len(P) != n or any(len(row) != n for row in P):
            raise ValueError(f"rho needs {n} entries and P must be {n}x{n}")
        flat = list(rho) + [v for row in P for v in row]
        if any(v < 0 for v in flat):
            raise ValueError("entries must be nonnegative")
        exact = _is_exact(flat)
        tol = 0 if exact else 1e-9

        def close(a, b):
            return a == b if exact else abs(float(a) - float(b)) <= tol

        if not close(sum(rho), 1):
            raise ValueError(f"rho sums to {float(sum(rho))}, not 1")
        for i, row in enumerate(P):
            if not close(sum(row), 1):
                raise ValueError(f"row {i} of P sums to {float(sum(row))}, not 1")
            allowed = {successor_index(self.base, self.k, i, d)
                       for d in range(self.base)}
            for j, v in enumerate(row):
                if v > 0 and j not in allowed:
                    raise ValueError(
                        f"P[{i},{j}] > 0 but words do not overlap"
                    )
        for j in range(n):
            lhs = sum(rho[i] * P[i][j] for i in range(n))
            if not (lhs == rho[j] if exact
                    else abs(float(lhs) - float(rho[j])) <= 1e-9):
                raise ValueError("rho is not stationary for P")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "P", P)

    @property
    def n_states(self) -> int:
        return self.base ** self.k

    def row_law(self, code: int):
        """Digit law out of one state: entry d is P(state, successor by d)."""
        return tuple(self.P[code][successor_index(self.base, self.k, code, d)]
                     for d in range(self.base))

    @classmethod
    def bernoulli(cls, pv: ProbVector, k: int = 1) -> "MarkovSpec":
        """k-step lift of an i.i.d. digit law."""
        base = pv.base
        n = base ** k
        rho = []
        for code in range(n):
            m = 1
            for d in index_word(base, k, code):
                m = m * pv.p[d]
            rho.append(m)
        P = [[0] * n for _ in range(n)]
        for code in range(n):
            for d in range(base):
                P[code][successor_index(base, k, code, d)] = pv.p[d]
        return cls(base, k, tuple(rho), tuple(tuple(r) for r in P))

    @classmethod
    def from_rows(cls, base: int, k: int, rows) -> "MarkovSpec":
        """Build from per-state digit laws; rho is computed."""
        n = base ** k
        P = [[0] * n for _ in range(n)]
        for code in range(n):
            row = rows[code]
            if len(row) != base:
                raise ValueError(f"row {code} needs {base} entries")
            for d in range(base):
                P[code][successor_index(base, k, code, d)] = row[d]
        rho = stationary(P)
        return cls(base, k, tuple(rho), tuple(tuple(r) for r in P))

    def to_json_obj(self) -> dict:
        def enc(v):
            return f"{v.numerator}/{v.denominator}" if isinstance(v, Fraction) \
                else float(v)
        return {
            "schema_version": 1,
            "base": self.base,
            "k": self.k,
            "rho": [enc(v) for v in self.rho],
            "P": [[enc(v) for v in row] for row in self.P],
        }

    @classmethod
    def from_json_obj(cls, obj) -> "MarkovSpec":
        def dec(v):
            return Fraction(v) if isinstance(v, str) else v
        return cls(obj["base"], obj["k"],
                   tuple(dec(v) for v in obj["rho"]),
                   tuple(tuple(dec(v) for v in row) for row in obj["P"]))


def _closed_classes(P):
    n = len(P)
    adj = np.array([[float(v) > 0 for v in row] for row in P], dtype=bool)
    reach = adj | np.eye(n, dtype=bool)
    while True:
        nxt = reach | (reach @ reach)
        if np.array_equal(nxt, reach):
            break
        reach = nxt
    mutual = reach & reach.T
    seen = set()
    classes = []
    for i in range(n):
        if i in seen:
            continue
        comp = tuple(int(j) for j in np.flatnonzero(mutual[i]))
        seen.update(comp)
        outside = [j for j in range(n) if j not in comp]
        if not outside or not reach[np.ix_(list(comp), outside)].any():
            classes.append(comp)
    return classes


def _solve_exact(A, rhs):
    """Gaussian elimination over Fractions."""
    n = len(rhs)
    M = [[Fraction(A[i][j]) for j in range(n)] + [Fraction(rhs[i])]
         for i in range(n)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if M[r][col] != 0), None)
        if pivot is None:
            raise ValueError("singular system")
        M[col], M[pivot] = M[pivot], M[col]
        inv = 1 / M[col][col]
        M[col] = [v * inv for v in M[col]]
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [a - f * b for a, b in zip(M[r], M[col])]
    return [M[i][n] for i in range(n)]


def stationary(P) -> tuple:
    """Stationary distribution of a row-stochastic matrix.

    Exact when entries are Fractions.  Raises AmbiguousChainError when
    several closed communicating classes exist.
    """
    n = len(P)
    rows = [list(row) for row in P]
    classes = _closed_classes(rows)
    if len(classes) != 1:
        raise AmbiguousChainError(classes)
    keep = list(classes[0])
    m = len(keep)
    exact = _is_exact([v for row in rows for v in row])
    if exact:
        # (P^T - I) x = 0 with the last equation replaced by sum = 1.
        A = [[rows[keep[j]][keep[i]] - (1 if i == j else 0) for j in range(m)]
             for i in range(m)]
        A[m - 1] = [1] * m
        rhs = [0] * (m - 1) + [1]
        x = _solve_exact(A, rhs)
        out = [Fraction(0)] * n
        for idx, v in zip(keep, x):
            out[idx] = v
        return tuple(out)
    sub = np.array([[float(rows[i][j]) for j in keep] for i in keep])
    A = sub.T - np.eye(m)
    A[m - 1] = 1.0
    rhs = np.zeros(m)
    rhs[m - 1] = 1.0
    x = np.linalg.solve(A, rhs)
    # Polish away any conditioning dust; each step is a contraction here.
    for _ in range(100):
        err = np.abs(x @ sub - x).max()
        if err <= 1e-13:
            break
        x = x @ sub
        x /= x.sum()
    out = np.zeros(n)
    out[keep] = np.clip(x, 0.0, None)
    out /= out.sum()
    return tuple(float(v) for v in out)


def _xlogx(v) -> float:
    v = float(v)
    return 0.0 if v <= 0.0 else v * log(v)


def entropy(spec: MarkovSpec) -> float:
    """Entropy rate in nats: sum_B rho(B) * H(row of B)."""
    h = 0.0
    for code in range(spec.n_states):
        r = float(spec.rho[code])
        if r <= 0.0:
            continue
        h -= r * sum(_xlogx(v) for v in spec.row_law(code))
    return h


def block_prob(spec: MarkovSpec, word) -> float | Fraction:
    """Measure of the cylinder [word] for len(word) >= k."""
    word = tuple(int(d) for d in word)
    if len(word) < spec.k:
        raise ValueError(f"word shorter than k={spec.k}")
    code = word_index(spec.base, word[: spec.k])
    m = spec.rho[code]
    for d in word[spec.k:]:
        nxt = successor_index(spec.base, spec.k, code, d)
        m = m * spec.P[code][nxt]
        code = nxt
    return m


def measure_noise(spec: MarkovSpec, ell: int | None = None):
    """Noise of the measure: 1 - sum over length-ell words B of the best
    single-digit mass max_d mu[d + B].  Stabilizes at ell = k, the
    default."""
    ell = spec.k if ell is None else ell
    if ell < spec.k:
        raise ValueError(f"ell must be >= k = {spec.k}")
    covered = 0
    for B in product(range(spec.base), repeat=ell):
        covered = covered + max(block_prob(spec, (d,) + B)
                                for d in range(spec.base))
    return 1 - covered


def binary_entropy(s) -> float:
    """H(s) = -s ln s - (1-s) ln(1-s) in nats, with H(0) = H(1) = 0."""
    s = float(s)
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"s must lie in [0, 1], got {s}")
    return -_xlogx(s) - _xlogx(1.0 - s)


def bernoulli_opt(base: int, s) -> tuple[ProbVector, float]:
    """Entropy-maximal digit law among those with noise exactly s:
    (1-s, s/(b-1), ..., s/(b-1)).  Returns the law and its entropy
    H(s) + s ln(b-1) in nats."""
    cap = Fraction(base - 1, base)
    exact = isinstance(s, (int, Fraction))
    if not 0 <= (Fraction(s) if exact else float(s)) <= (cap if exact else float(cap)):
        raise ValueError(f"need 0 <= s <= (b-1)/b, got {s}")
    if exact:
        s = Fraction(s)
        rest = s / (base - 1)
    else:
        s = float(s)
        rest = s / (base - 1)
    pv = ProbVector(base, (1 - s,) + (rest,) * (base - 1))
    h = binary_entropy(s) + float(s) * log(base - 1)
    return pv, h


@dataclass(frozen=True)
class DimBounds:
    """Hausdorff-dimension data at noise level s.

    lower/upper sandwich the level sets defined through upper noise
    (both the one-sided and the limit variant); the full-measure sets
    A1, A2, A4 and the Liouville complement L all have dimension one.
    """

    s: float
    lower: float
    upper: float
    A1: float = 1.0
    A2: float = 1.0
    A4: float = 1.0
    L: float = 1.0


def dim_bounds(base: int, s) -> DimBounds:
    """Sandwich (H(s) + s ln(b-1)) / ln b <= dim <= H(s)/ln b + s, with
    the upper branch clamped at the ambient dimension 1."""
    s = float(s)
    cap = (base - 1) / base
    if not 0.0 <= s <= cap + 1e-15:
        raise ValueError(f"need 0 <= s <= (b-1)/b, got {s}")
    lb = log(base)
    lower = (binary_entropy(s) + s * log(base - 1)) / lb
    upper = binary_entropy(s) / lb + s
    return DimBounds(s, min(lower, 1.0), min(upper, 1.0))


def dim_curve(base: int, grid_size: int) -> list[DimBounds]:
    """dim_bounds sampled on an even grid of grid_size+1 points over
    [0, (b-1)/b]."""
    if grid_size < 1:
        raise ValueError("grid_size must be >= 1")
    cap = (base - 1) / base
    return [dim_bounds(base, cap * i / grid_size) for i in range(grid_size + 1)]


def _row_entropy(row) -> float:
    return -sum(_xlogx(v) for v in row)


def markov_search(base: int, k: int, s: float, budget: int = 400,
                  seed: int = 0) -> MarkovSpec:
    """Numerically search k-step specs with noise <= s for high entropy.

    Projected coordinate ascent over the per-state digit laws, seeded at
    the k-step lift of the optimal Bernoulli law (always feasible), with
    a shrinking line search that rejects any step breaking the noise
    budget.  Deterministic for fixed arguments.  k is capped at 3.
    """
    if not 1 <= k <= 3:
        raise ValueError(f"k must be in [1, 3], got {k}")
    s = float(s)
    pv, _ = bernoulli_opt(base, s)
    best = MarkovSpec.bernoulli(ProbVector(base, tuple(float(v) for v in pv.p)), k)
    best_h = entropy(best)
    feas = s + 1e-12
    n = base ** k
    rows = [list(map(float, best.row_law(c))) for c in range(n)]
    uniform = [1.0 / base] * base
    rng = np.random.default_rng(seed)
    evals = 0

    def rebuild(rows):
        return MarkovSpec.from_rows(base, k, [tuple(r) for r in rows])

    while evals < budget:
        improved = False
        for code in range(n):
            current = rows[code]
            # Ascent direction: toward the uniform row, plus a small
            # seeded exploration component.
            noise_dir = rng.normal(size=base)
            noise_dir -= noise_dir.mean()
            for direction in (np.array(uniform) - np.array(current), noise_dir):
                step = 1.0
                while step > 1e-4 and evals < budget:
                    cand = np.clip(np.array(current) + step * direction, 0.0, None)
                    tot = cand.sum()
                    if tot <= 0:
                        step /= 2
                        continue
                    cand /= tot
                    trial_rows = [list(r) for r in rows]
                    trial_rows[code] = cand.tolist()
                    evals += 1
                    try:
                        trial = rebuild(trial_rows)
                    except (ValueError, AmbiguousChainError):
                        step /= 2
                        continue
                    h = entropy(trial)
                    if float(measure_noise(trial)) <= feas and h > best_h + 1e-12:
                        best, best_h = trial, h
                        rows = trial_rows
                        current = rows[code]
                        improved = True
                        break
                    step /= 2
        if not improved:
            break
    return best


def sample_markov(spec: MarkovSpec, n: int, seed: int) -> DigitSeq:
    """Sample n digits: the initial state from rho, then row laws."""
    rng = np.random.default_rng(seed)
    base, k = spec.base, spec.k
    out = np.empty(n, dtype=_digit_dtype(base))
    if n == 0:
        return DigitSeq(base, out)
    rho_cdf = np.cumsum([float(v) for v in spec.rho])
    code = int(np.searchsorted(rho_cdf, rng.random() * rho_cdf[-1], side="right"))
    code = min(code, spec.n_states - 1)
    word = index_word(base, k, code)
    head = min(k, n)
    out[:head] = word[:head]
    if n <= k:
        return DigitSeq(base, out[:n])
    cdfs = np.cumsum([[float(v) for v in spec.row_law(c)]
                      for c in range(spec.n_states)], axis=1)
    draws = rng.random(n - k)
    for i in range(n - k):
        d = int(np.searchsorted(cdfs[code], draws[i] * cdfs[code][-1],
                                side="right"))
        d = min(d, base - 1)
        out[k + i] = d
        code = successor_index(base, k, code, d)
    return DigitSeq(base, out)
