"""Bounded-variable primal simplex for the daily continuous subproblem.

Problems are stated as

    min  c.y
    s.t. eq rows:    a.y  = b
         ineq rows:  a.y <= b
         lower <= y <= upper        (infinite bounds allowed)

Rows and columns are equilibrated with power-of-two factors, so scaling is
exact. Every inequality gets a slack column and every equality a fixed
artificial column. The start basis is a triangular crash (free columns on
equality rows, then columns that repair a violated row) completed with those
unit columns. Phase 1 minimises the bound violation of the basic variables;
it is also re-entered whenever a refactorization shows the basis has drifted
outside its bounds.

Pricing is Dantzig's largest reduced cost until too many consecutive
degenerate pivots occur, after which Bland's lowest-index rule takes over for
the rest of the solve. The ratio test is the two-pass Harris test with a
pivot tolerance. The basis is a sparse LU factorization plus product-form
eta updates, refactorized every REFACTOR_EVERY pivots; a singular basis is
repaired by swapping dependent columns for unit columns.
"""

import enum
import math
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as splinalg
from scipy import linalg
from scipy.sparse import csc_matrix, csr_matrix

from lib.errors import LpFormatError
from lib.log import log

FEAS_TOL = 1e-7
PRIMAL_TOL = 1e-9
HARRIS_TOL = 1e-10
OPT_TOL = 1e-9
PIVOT_TOL = 1e-9
SINGULAR_TOL = 1e-11
DEGENERATE_STEP = 1e-12
CRASH_RATIO = 0.1
REFACTOR_EVERY = 100
BLAND_FACTOR = 5
MAX_REENTRY = 25
SQRT_HALF = math.sqrt(0.5)

_AT_LOWER = 0
_AT_UPPER = 1
_FREE = 2


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    ITERATION_LIMIT = "iteration_limit"
    NUMERICAL = "numerical_failure"


class Row(NamedTuple):
    """Sparse constraint row: sum(values * y[indices]) (=|<=) rhs."""

    indices: np.ndarray
    values: np.ndarray
    rhs: float
    name: Optional[str] = None


def make_row(coefficients, rhs, name=None):
    # type: (dict, float, Optional[str]) -> Row
    """Row from a {variable index: coefficient} mapping."""
    items = sorted((int(k), float(v)) for k, v in coefficients.items() if v != 0.0)
    return Row(
        np.array([k for k, _ in items], dtype=np.int64),
        np.array([v for _, v in items], dtype=float),
        float(rhs),
        name,
    )


def dense_row(values, rhs, name=None, drop_below=0.0):
    # type: (np.ndarray, float, Optional[str], float) -> Row
    """Row from a dense coefficient vector, dropping |a| <= drop_below."""
    values = np.asarray(values, dtype=float)
    idx = np.flatnonzero(np.abs(values) > drop_below)
    return Row(idx.astype(np.int64), values[idx].copy(), float(rhs), name)


def _rows_to_csr(rows, n_vars):
    # type: (Sequence[Row], int) -> csr_matrix
    counts = np.array([len(row.indices) for row in rows], dtype=np.int64)
    if counts.sum():
        cols = np.concatenate([np.asarray(row.indices, dtype=np.int64) for row in rows])
        vals = np.concatenate([np.asarray(row.values, dtype=float) for row in rows])
    else:
        cols, vals = np.zeros(0, dtype=np.int64), np.zeros(0)
    row_ids = np.repeat(np.arange(len(rows)), counts)
    mat = csr_matrix((vals, (row_ids, cols)), shape=(len(rows), n_vars))
    mat.eliminate_zeros()
    return mat


@dataclass(frozen=True)
class LinearProgram:
    n_vars: int
    objective: np.ndarray
    eq_rows: Tuple[Row, ...] = ()
    ineq_rows: Tuple[Row, ...] = ()
    lower_bounds: Optional[np.ndarray] = None
    upper_bounds: Optional[np.ndarray] = None
    names: Optional[Tuple[str, ...]] = None
    objective_constant: float = 0.0

    def __post_init__(self):
        n = self.n_vars
        obj = np.asarray(self.objective, dtype=float)
        lb = np.zeros(n) if self.lower_bounds is None else np.asarray(self.lower_bounds, dtype=float)
        ub = np.full(n, np.inf) if self.upper_bounds is None else np.asarray(self.upper_bounds, dtype=float)
        object.__setattr__(self, "objective", obj)
        object.__setattr__(self, "lower_bounds", lb)
        object.__setattr__(self, "upper_bounds", ub)
        object.__setattr__(self, "eq_rows", tuple(self.eq_rows))
        object.__setattr__(self, "ineq_rows", tuple(self.ineq_rows))
        if self.names is not None:
            object.__setattr__(self, "names", tuple(self.names))

    def validate(self):
        # type: () -> LinearProgram
        """Reject structurally invalid programs before any pivoting."""
        n = self.n_vars
        if n < 0:
            raise LpFormatError("n_vars must be >= 0")
        for label, arr in (("objective", self.objective), ("lower_bounds", self.lower_bounds),
                           ("upper_bounds", self.upper_bounds)):
            if arr.shape != (n,):
                raise LpFormatError("%s has shape %s, expected (%d,)" % (label, arr.shape, n))
        if not np.all(np.isfinite(self.objective)):
            raise LpFormatError("objective coefficients must be finite")
        if np.any(np.isnan(self.lower_bounds)) or np.any(np.isnan(self.upper_bounds)):
            raise LpFormatError("bounds must not be NaN")
        if np.any(self.lower_bounds == np.inf) or np.any(self.upper_bounds == -np.inf):
            raise LpFormatError("lower bounds cannot be +inf and upper bounds cannot be -inf")
        bad = np.flatnonzero(self.lower_bounds > self.upper_bounds)
        if bad.size:
            raise LpFormatError("lower bound exceeds upper bound for variable %d" % bad[0])
        if self.names is not None and len(self.names) != n:
            raise LpFormatError("names has %d labels, expected %d" % (len(self.names), n))
        for kind, rows in (("eq", self.eq_rows), ("ineq", self.ineq_rows)):
            for i, row in enumerate(rows):
                if len(row.indices) != len(row.values):
                    raise LpFormatError("%s row %d: indices/values length mismatch" % (kind, i))
                if len(row.indices) and (row.indices.min() < 0 or row.indices.max() >= n):
                    raise LpFormatError("%s row %d references a variable outside [0, %d)" % (kind, i, n))
                if not (np.all(np.isfinite(row.values)) and math.isfinite(row.rhs)):
                    raise LpFormatError("%s row %d holds non-finite coefficients" % (kind, i))
        return self

    def matrix(self, kind):
        # type: (str) -> Tuple[np.ndarray, np.ndarray]
        """Dense (A, b) for the 'eq' or 'ineq' rows."""
        rows = self.eq_rows if kind == "eq" else self.ineq_rows
        a = np.zeros((len(rows), self.n_vars))
        b = np.zeros(len(rows))
        for i, row in enumerate(rows):
            np.add.at(a[i], row.indices, row.values)
            b[i] = row.rhs
        return a, b

    def stacked(self):
        # type: () -> Tuple[csr_matrix, np.ndarray]
        """Sparse (A, b) over every row, equalities first."""
        rows = self.eq_rows + self.ineq_rows
        return _rows_to_csr(rows, self.n_vars), np.array([row.rhs for row in rows], dtype=float)

    def variable_name(self, j):
        # type: (int) -> str
        if self.names is not None:
            return self.names[j]
        return "v%d" % j


@dataclass
class LpSolution:
    status: LpStatus
    objective_value: float
    primal: np.ndarray
    iterations: int
    bland_activated: bool = False

    @property
    def optimal(self):
        # type: () -> bool
        return self.status is LpStatus.OPTIMAL


@dataclass
class VerifyReport:
    """Constraint violations of a candidate point; magnitudes are absolute."""

    objective: float
    max_violation: float
    violations: List[Tuple[str, int, float]] = field(default_factory=list)

    def feasible(self, tol=FEAS_TOL):
        # type: (float) -> bool
        return self.max_violation <= tol


class LpBuilder:
    """Incremental construction of a LinearProgram with named variables."""

    def __init__(self):
        self._names = []  # type: List[str]
        self._lb = []  # type: List[float]
        self._ub = []  # type: List[float]
        self._cost = []  # type: List[float]
        self.eq_rows = []  # type: List[Row]
        self.ineq_rows = []  # type: List[Row]
        self.objective_constant = 0.0

    @property
    def n_vars(self):
        # type: () -> int
        return len(self._names)

    def add_var(self, name, lower=0.0, upper=np.inf, cost=0.0):
        # type: (str, float, float, float) -> int
        self._names.append(name)
        self._lb.append(float(lower))
        self._ub.append(float(upper))
        self._cost.append(float(cost))
        return len(self._names) - 1

    def add_cost(self, j, cost):
        # type: (int, float) -> None
        self._cost[j] += float(cost)

    def add_eq(self, row):
        # type: (Row) -> None
        self.eq_rows.append(row)

    def add_le(self, row):
        # type: (Row) -> None
        self.ineq_rows.append(row)

    def build(self):
        # type: () -> LinearProgram
        return LinearProgram(
            n_vars=self.n_vars,
            objective=np.array(self._cost, dtype=float),
            eq_rows=tuple(self.eq_rows),
            ineq_rows=tuple(self.ineq_rows),
            lower_bounds=np.array(self._lb, dtype=float),
            upper_bounds=np.array(self._ub, dtype=float),
            names=tuple(self._names),
            objective_constant=self.objective_constant,
        ).validate()


def _pow2(x):
    """Nearest power of two (in log scale), so scaling multiplies without rounding."""
    mantissa, exponent = np.frexp(x)
    return np.ldexp(1.0, exponent - (mantissa < SQRT_HALF))


def _extremes(indptr, values):
    """Largest and smallest entry of each compressed row or column (0 and inf when empty)."""
    counts = np.diff(indptr)
    big = np.zeros(len(counts))
    small = np.full(len(counts), np.inf)
    filled = counts > 0
    if values.size:
        starts = indptr[:-1][filled]
        big[filled] = np.maximum.reduceat(values, starts)
        small[filled] = np.minimum.reduceat(values, starts)
    return big, small


def _equilibrate(a, passes=2):
    # type: (csr_matrix, int) -> Tuple[np.ndarray, np.ndarray]
    """Geometric-mean row and column scale factors (powers of two)."""
    m, n = a.shape
    r = np.ones(m)
    s = np.ones(n)
    by_row = a.tocsr()
    by_col = a.tocsc()
    row_of = np.repeat(np.arange(m), np.diff(by_row.indptr))
    col_of = np.repeat(np.arange(n), np.diff(by_col.indptr))
    abs_row = np.abs(by_row.data)
    abs_col = np.abs(by_col.data)
    for _ in range(passes):
        big, small = _extremes(by_row.indptr, abs_row * r[row_of] * s[by_row.indices])
        ok = big > 0
        r[ok] /= _pow2(np.sqrt(big[ok] * small[ok]))
        big, small = _extremes(by_col.indptr, abs_col * r[by_col.indices] * s[col_of])
        ok = big > 0
        s[ok] /= _pow2(np.sqrt(big[ok] * small[ok]))
    return r, s


def _scale(a, row_scale, col_scale):
    # type: (csr_matrix, np.ndarray, np.ndarray) -> csc_matrix
    coo = a.tocoo()
    data = coo.data * row_scale[coo.row] * col_scale[coo.col]
    return csc_matrix((data, (coo.row, coo.col)), shape=a.shape)


class _NumericalFailure(Exception):
    pass


class _Simplex:
    """Working state of one solve over the scaled standard form."""

    def __init__(self, a_struct, b, n_ineq, lo, hi, max_iter):
        # a_struct: m x n csc; the last n_ineq rows are inequalities
        self.m, self.n = a_struct.shape
        m, n = self.m, self.n
        n_eq = m - n_ineq
        self.b = b

        # columns: structurals | one slack per ineq row | one fixed artificial per eq row
        unit_rows = np.concatenate([np.arange(n_eq, m), np.arange(n_eq)]).astype(np.int64)
        self.unit_col = np.empty(m, dtype=np.int64)
        self.unit_col[unit_rows] = n + np.arange(m)
        if m:
            units = csc_matrix((np.ones(m), (unit_rows, np.arange(m))), shape=(m, m))
            self.a = sp.hstack([a_struct, units], format="csc")
        else:
            self.a = csc_matrix(a_struct)
        self.at = self.a.transpose().tocsr()
        self.lo = np.concatenate([lo, np.zeros(m)])
        self.hi = np.concatenate([hi, np.full(n_ineq, np.inf), np.zeros(n_eq)])
        self.movable = self.lo < self.hi
        self.eq_row = np.arange(m) < n_eq

        self.max_iter = max_iter
        self.iterations = 0
        self.bland = False
        self.bland_activated = False
        self._degenerate_run = 0
        self.lu = None
        self.etas = []  # type: List[Tuple[int, np.ndarray]]

    @property
    def n_total(self):
        return len(self.lo)

    def column(self, j):
        col = np.zeros(self.m)
        start, stop = self.a.indptr[j], self.a.indptr[j + 1]
        col[self.a.indices[start:stop]] = self.a.data[start:stop]
        return col

    def _column_rows(self, j):
        return self.a.indices[self.a.indptr[j]:self.a.indptr[j + 1]]

    # -- start basis ---------------------------------------------------------

    def start(self):
        """Nonbasic structurals at a finite bound (free ones at 0), then a crash basis."""
        n = self.n
        self.x = np.zeros(self.n_total)
        self.state = np.full(self.n_total, _AT_LOWER, dtype=np.int64)
        lo, hi = self.lo[:n], self.hi[:n]
        at_lower = np.isfinite(lo)
        at_upper = ~at_lower & np.isfinite(hi)
        free = ~at_lower & ~at_upper
        self.x[:n][at_lower] = lo[at_lower]
        self.x[:n][at_upper] = hi[at_upper]
        self.state[:n][at_upper] = _AT_UPPER
        self.state[:n][free] = _FREE

        self.is_basic = np.zeros(self.n_total, dtype=bool)
        self.basis = self.unit_col.copy()
        taken = np.zeros(self.m, dtype=bool)
        self._crash_free(np.flatnonzero(free), taken)
        self.is_basic[self.basis] = True
        self.refactor()
        if self._crash_violated(taken):
            self.refactor()

    def _crash_free(self, free_cols, taken):
        """Free columns onto equality rows, keeping the crashed block lower triangular."""
        indptr, indices, data = self.a.indptr, self.a.indices, self.a.data
        for j in free_cols:
            rows = indices[indptr[j]:indptr[j + 1]]
            if rows.size == 0 or taken[rows].any():
                continue
            eligible = self.eq_row[rows]
            if not eligible.any():
                continue
            mags = np.abs(data[indptr[j]:indptr[j + 1]])
            ok = eligible & (mags >= CRASH_RATIO * mags[eligible].max())
            i = int(rows[ok].min())
            self.basis[i] = j
            taken[i] = True

    def _crash_violated(self, taken):
        """Swap the unit column of each violated row for a structural that absorbs the violation."""
        n = self.n
        residual = self.x[self.unit_col].copy()
        by_row = self.a[:, :n].tocsr()
        changed = False
        for i in range(self.m):
            if taken[i]:
                continue
            r_i = residual[i]
            if not (abs(r_i) > PRIMAL_TOL if self.eq_row[i] else r_i < -PRIMAL_TOL):
                continue
            best, best_mag, best_step = -1, 0.0, 0.0
            for j, v in zip(by_row.indices[by_row.indptr[i]:by_row.indptr[i + 1]],
                            by_row.data[by_row.indptr[i]:by_row.indptr[i + 1]]):
                if self.is_basic[j] or abs(v) <= best_mag:
                    continue
                step = r_i / v
                state = self.state[j]
                if state == _AT_LOWER and not (step >= 0 and self.x[j] + step <= self.hi[j]):
                    continue
                if state == _AT_UPPER and not (step <= 0 and self.x[j] + step >= self.lo[j]):
                    continue
                if taken[self._column_rows(j)].any():
                    continue
                best, best_mag, best_step = int(j), abs(v), step
            if best < 0:
                continue
            start, stop = self.a.indptr[best], self.a.indptr[best + 1]
            residual[self.a.indices[start:stop]] -= self.a.data[start:stop] * best_step
            residual[i] = 0.0
            unit = self.unit_col[i]
            self.is_basic[unit] = False
            self.x[unit] = 0.0
            self.is_basic[best] = True
            self.basis[i] = best
            taken[i] = True
            changed = True
        return changed

    # -- factorization -------------------------------------------------------

    def refactor(self):
        """Factorize the basis afresh and recompute basic values from the nonbasic ones."""
        self.etas = []
        if self.m == 0:
            self.lu = None
            return
        self.lu = self._try_lu()
        if self.lu is None:
            self._repair_basis()
            self.lu = self._try_lu()
            if self.lu is None:
                raise _NumericalFailure("basis is singular even after repair")
        nonbasic = np.where(self.is_basic, 0.0, self.x)
        self.x[self.basis] = self.lu.solve(self.b - self.a @ nonbasic)

    def _try_lu(self):
        try:
            lu = splinalg.splu(csc_matrix(self.a[:, self.basis]), permc_spec="COLAMD")
        except RuntimeError:
            return None
        diag = np.abs(lu.U.diagonal())
        if diag.min() <= SINGULAR_TOL * max(1.0, diag.max()):
            return None
        return lu

    def _repair_basis(self):
        """Replace linearly dependent basic columns by unit columns of uncovered rows."""
        dense = self.a[:, self.basis].toarray()
        r_mat, perm = linalg.qr(dense, mode="r", pivoting=True)
        diag = np.abs(np.diag(r_mat))
        rank = int(np.sum(diag > SINGULAR_TOL * max(1.0, diag[0])))
        kept = perm[:rank]
        dropped = self.basis[perm[rank:]]
        if rank:
            _, row_perm = linalg.qr(dense[:, kept].T, mode="r", pivoting=True)
            uncovered = np.sort(row_perm[rank:])
        else:
            uncovered = np.arange(self.m)
        basis = np.concatenate([self.basis[kept], self.unit_col[uncovered]])
        if len(np.unique(basis)) != self.m:
            raise _NumericalFailure("could not repair a singular basis")
        for j in dropped:
            self._to_bound(j)
        self.is_basic[:] = False
        self.is_basic[basis] = True
        self.basis = basis
        log("lp: singular basis, replaced %d columns by unit columns" % len(dropped))

    def _to_bound(self, j):
        lo, hi, v = self.lo[j], self.hi[j], self.x[j]
        if np.isfinite(lo) and (not np.isfinite(hi) or v - lo <= hi - v):
            self.x[j], self.state[j] = lo, _AT_LOWER
        elif np.isfinite(hi):
            self.x[j], self.state[j] = hi, _AT_UPPER
        else:
            self.state[j] = _FREE

    def ftran(self, v):
        """B^-1 v through the LU factors and the eta file."""
        if self.m == 0:
            return np.zeros(0)
        w = self.lu.solve(v)
        for r, eta in self.etas:
            wr = w[r] / eta[r]
            if wr != 0.0:
                w -= wr * eta
            w[r] = wr
        return w

    def btran(self, v):
        """Solve y B = v for the row vector y."""
        if self.m == 0:
            return np.zeros(0)
        v = np.array(v, dtype=float)
        for r, eta in reversed(self.etas):
            v[r] = (v[r] * (1.0 + eta[r]) - v @ eta) / eta[r]
        return self.lu.solve(v, trans="T")

    # -- iteration -----------------------------------------------------------

    def infeasible(self):
        xb = self.x[self.basis]
        return xb < self.lo[self.basis] - PRIMAL_TOL, xb > self.hi[self.basis] + PRIMAL_TOL

    def max_infeasibility(self):
        if self.m == 0:
            return 0.0
        xb = self.x[self.basis]
        return float(max(0.0, np.max(self.lo[self.basis] - xb), np.max(xb - self.hi[self.basis])))

    def reduced_costs(self, cost):
        d = cost.copy()
        if self.m:
            d -= self.at @ self.btran(cost[self.basis])
        d[self.is_basic] = 0.0
        return d

    def choose_entering(self, d):
        cand = ~self.is_basic & self.movable & (
            ((self.state == _AT_LOWER) & (d < -OPT_TOL))
            | ((self.state == _AT_UPPER) & (d > OPT_TOL))
            | ((self.state == _FREE) & (np.abs(d) > OPT_TOL))
        )
        idx = np.flatnonzero(cand)
        if idx.size == 0:
            return -1
        if self.bland:
            return int(idx[0])
        return int(idx[np.argmax(np.abs(d[idx]))])

    def ratio_test(self, q, direction, below=None, above=None):
        """Step, leaving position (-1 bound flip, -2 unblocked), column, basic deltas, landing bound.

        below/above mark basic variables outside their bounds in phase 1:
        they block at the bound they approach and never at the far one.
        """
        w = self.ftran(self.column(q))
        delta = -direction * w
        xb = self.x[self.basis]
        lb = self.lo[self.basis]
        ub = self.hi[self.basis]
        rate = np.abs(delta)
        dec = delta < -PIVOT_TOL
        inc = delta > PIVOT_TOL
        gap = np.full(self.m, np.inf)
        target = np.zeros(self.m)
        gap[dec] = xb[dec] - lb[dec]
        target[dec] = lb[dec]
        gap[inc] = ub[inc] - xb[inc]
        target[inc] = ub[inc]
        tolerance = np.full(self.m, HARRIS_TOL)
        if below is not None:
            rising = below & inc
            falling = above & dec
            gap[(below & dec) | (above & inc)] = np.inf
            gap[rising] = lb[rising] - xb[rising]
            target[rising] = lb[rising]
            gap[falling] = xb[falling] - ub[falling]
            target[falling] = ub[falling]
            tolerance[below | above] = 0.0
        moving = dec | inc
        safe_rate = np.where(moving, rate, 1.0)
        exact = np.where(moving, gap / safe_rate, np.inf)
        relaxed = np.where(moving, (gap + tolerance) / safe_rate, np.inf)

        flip = self.hi[q] - self.lo[q]
        if self.m == 0:
            limit = np.inf
        elif self.bland:
            limit = max(float(exact.min()), 0.0)
        else:
            limit = max(float(relaxed.min()), 0.0)
        if not np.isfinite(limit) and not np.isfinite(flip):
            return np.inf, -2, w, delta, 0.0
        if flip <= limit:
            return float(flip), -1, w, delta, 0.0
        if self.bland:
            ties = np.flatnonzero(exact <= limit + 1e-12 * max(1.0, limit))
            r = int(ties[np.argmin(self.basis[ties])])
        else:
            cand = np.flatnonzero(exact <= limit)
            r = int(cand[np.argmax(rate[cand])])
        return max(float(exact[r]), 0.0), r, w, delta, float(target[r])

    def pivot(self, q, r, theta, direction, w, delta, target):
        """Basis exchange; returns True when it triggered a refactorization."""
        self.x[self.basis] += theta * delta
        self.x[q] += direction * theta
        leaving = self.basis[r]
        self.x[leaving] = target
        self.state[leaving] = _AT_LOWER if target == self.lo[leaving] else _AT_UPPER
        self.is_basic[leaving] = False
        self.is_basic[q] = True
        self.basis[r] = q
        self.etas.append((r, w))
        if len(self.etas) >= REFACTOR_EVERY:
            self.refactor()
            return True
        return False

    def run(self, phase, cost=None):
        """Iterate one phase; returns an LpStatus, or None when phase 2 lost feasibility."""
        bland_after = BLAND_FACTOR * max(self.n, 1)
        fresh = False
        while True:
            below = above = None
            if phase == 1:
                below, above = self.infeasible()
                if not (below.any() or above.any()):
                    return LpStatus.OPTIMAL
                cost = np.zeros(self.n_total)
                cost[self.basis[below]] = -1.0
                cost[self.basis[above]] = 1.0
            d = self.reduced_costs(cost)
            q = self.choose_entering(d)
            if q < 0:
                if not fresh:
                    self.refactor()
                    fresh = True
                    if phase == 2 and self.max_infeasibility() > PRIMAL_TOL:
                        return None
                    continue
                return LpStatus.INFEASIBLE if phase == 1 else LpStatus.OPTIMAL
            if self.iterations >= self.max_iter:
                log("lp: iteration cap %d reached" % self.max_iter)
                return LpStatus.ITERATION_LIMIT
            self.iterations += 1
            fresh = False
            if self.state[q] == _FREE:
                direction = -1.0 if d[q] > 0 else 1.0
            else:
                direction = 1.0 if self.state[q] == _AT_LOWER else -1.0
            theta, r, w, delta, target = self.ratio_test(q, direction, below, above)
            if r == -2:
                if phase == 2:
                    return LpStatus.UNBOUNDED
                log("lp: phase 1 found a direction no bound blocks")
                return LpStatus.NUMERICAL
            if r == -1:
                self.x[self.basis] += theta * delta
                if self.state[q] == _AT_LOWER:
                    self.x[q], self.state[q] = self.hi[q], _AT_UPPER
                else:
                    self.x[q], self.state[q] = self.lo[q], _AT_LOWER
            elif self.pivot(q, r, theta, direction, w, delta, target):
                fresh = True
                if phase == 2 and self.max_infeasibility() > PRIMAL_TOL:
                    return None
            if theta <= DEGENERATE_STEP:
                self._degenerate_run += 1
                if not self.bland and self._degenerate_run >= bland_after:
                    self.bland = True
                    self.bland_activated = True
                    log("lp: %d consecutive degenerate pivots, switching to Bland's rule"
                        % self._degenerate_run)
            else:
                self._degenerate_run = 0


def _drive(sx, cost):
    full = np.zeros(sx.n_total)
    full[:sx.n] = cost
    for _ in range(MAX_REENTRY + 1):
        status = sx.run(1)
        if status is LpStatus.OPTIMAL:
            status = sx.run(2, full)
        if status is not None:
            return status
        log("lp: basic variables drifted outside their bounds, re-entering phase 1")
    log("lp: feasibility lost %d times, giving up" % (MAX_REENTRY + 1))
    return LpStatus.NUMERICAL


def solve(lp, max_iter=None):
    # type: (LinearProgram, Optional[int]) -> LpSolution
    """Solve lp to a vertex optimum, or certify it infeasible/unbounded.

    OPTIMAL is only returned for a point that verify() accepts at FEAS_TOL;
    a basis that cannot be made to satisfy that ends as NUMERICAL.
    """
    lp.validate()
    n = lp.n_vars
    a, b = lp.stacked()
    m = a.shape[0]

    row_scale, col_scale = _equilibrate(a) if m and n else (np.ones(m), np.ones(n))
    a_s = _scale(a, row_scale, col_scale)
    b_s = b * row_scale
    lo = lp.lower_bounds / col_scale
    hi = lp.upper_bounds / col_scale
    cmax = np.max(np.abs(lp.objective)) if n else 0.0
    c_norm = _pow2(cmax) if cmax > 0 else 1.0
    c_s = lp.objective * col_scale / c_norm

    if max_iter is None:
        max_iter = 20 * (m + n) + 1000
    sx = _Simplex(a_s, b_s, len(lp.ineq_rows), lo, hi, max_iter)
    try:
        sx.start()
        status = _drive(sx, c_s)
    except _NumericalFailure as exc:
        log("lp: %s" % exc)
        status = LpStatus.NUMERICAL
    return _result(lp, sx, status, col_scale)


def _result(lp, sx, status, col_scale):
    y = sx.x[:lp.n_vars] * col_scale
    if status is LpStatus.OPTIMAL:
        report = verify(lp, y)
        if not report.feasible():
            kind, i, gap = max(report.violations, key=lambda v: v[2])
            log("lp: optimal basis violates %s %d by %.3g after unscaling" % (kind, i, gap))
            status = LpStatus.NUMERICAL
    value = float(lp.objective @ y) if status is LpStatus.OPTIMAL else float("nan")
    return LpSolution(status, value, y, sx.iterations, sx.bland_activated)


def verify(lp, candidate, tol=FEAS_TOL):
    # type: (LinearProgram, Sequence[float], float) -> VerifyReport
    """Report every constraint violated by candidate by more than tol."""
    y = np.asarray(candidate, dtype=float)
    if y.shape != (lp.n_vars,):
        raise LpFormatError("candidate has shape %s, expected (%d,)" % (y.shape, lp.n_vars))
    violations = []
    for kind, rows in (("eq", lp.eq_rows), ("ineq", lp.ineq_rows)):
        if not rows:
            continue
        gap = _rows_to_csr(rows, lp.n_vars) @ y - np.array([row.rhs for row in rows])
        if kind == "eq":
            gap = np.abs(gap)
        violations.extend((kind, int(i), float(gap[i])) for i in np.flatnonzero(gap > tol))
    below = lp.lower_bounds - y
    above = y - lp.upper_bounds
    for j in np.flatnonzero(below > tol):
        violations.append(("lower", int(j), float(below[j])))
    for j in np.flatnonzero(above > tol):
        violations.append(("upper", int(j), float(above[j])))
    worst = max((v[2] for v in violations), default=0.0)
    return VerifyReport(float(lp.objective @ y) + lp.objective_constant, worst, violations)
