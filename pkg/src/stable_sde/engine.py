"""Euler-Maruyama scheme on partitions, pathwise coupling and the Cauchy construction.

For a partition ``0 = t_0 < ... < t_n = T`` the scheme is

    X_D(t) = X_D(t_k) + sigma(t_k, X_D(t_k)) (Z(t) - Z(t_k)),   t_k <= t < t_{k+1},

i.e. the coefficient is frozen at the left knot and the driver enters
through its exact increments.  Paths on several partitions are compared on a
common fine monitoring grid, cut from one realized driver path.  Between
coarse knots the coarse path is evaluated with the formula above (the
scheme's own continuous-time interpolation); plain step extension is
available through ``interpolation="step"``.

Everything operates on batches: ``dZ`` of shape ``(R, n)`` yields paths of
shape ``(R, n + 1)``.  Coefficients are called with a scalar time and an
array of states.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .driver import check_grid, coarse_indices, coarsen, increment_matrix
from .errors import AlignmentError, GridError, ParameterError

__all__ = [
    "Partition",
    "PathGrid",
    "CauchyBudget",
    "CauchyReport",
    "eta",
    "as_sigma",
    "em_batch",
    "monitor_batch",
    "euler_maruyama",
    "coupled_run",
    "coupled_batch",
    "cauchy_construction",
]


class Partition:
    """A time partition ``0 = t_0 < ... < t_n = T``.

    ``mesh`` is recomputed from ``times`` on every access.
    """

    __slots__ = ("times",)

    def __init__(self, times):
        times = check_grid(times).copy()
        times.setflags(write=False)
        self.times = times

    @classmethod
    def uniform(cls, T, n):
        if int(n) < 1:
            raise GridError("a partition needs at least one step")
        return cls(np.linspace(0.0, float(T), int(n) + 1))

    @classmethod
    def dyadic(cls, T, level):
        """Uniform partition with ``2**level`` steps."""
        return cls.uniform(T, 2 ** int(level))

    @classmethod
    def from_mesh(cls, T, mesh):
        """Uniform partition of ``[0, T]`` whose mesh is ``mesh`` (must divide ``T``)."""
        n = round(T / mesh)
        if n < 1 or not math.isclose(n * mesh, T, rel_tol=1e-9):
            raise GridError(f"mesh {mesh!r} does not divide T={T!r}")
        return cls.uniform(T, n)

    @property
    def mesh(self):
        return float(np.max(np.diff(self.times)))

    @property
    def T(self):
        return float(self.times[-1])

    def __len__(self):
        return self.times.size - 1

    def __eq__(self, other):
        return isinstance(other, Partition) and np.array_equal(self.times, other.times)

    def __hash__(self):
        return hash(self.times.tobytes())

    def __repr__(self):
        return f"Partition(n={len(self)}, mesh={self.mesh:.6g}, T={self.T:g})"

    def is_nested_in(self, other):
        try:
            coarse_indices(other.times, self.times)
        except AlignmentError:
            return False
        return True


def _times(partition):
    return partition.times if isinstance(partition, Partition) else check_grid(partition)


def eta(partition, t):
    """Left knot ``eta(t) = t_k`` for ``t_k <= t < t_{k+1}``; ``eta(T) = T``."""
    times = _times(partition)
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0) or np.any(t_arr > times[-1]) or np.any(~np.isfinite(t_arr)):
        raise ParameterError(f"time outside [0, {times[-1]}]")
    k = np.searchsorted(times, t_arr, side="right") - 1
    out = times[np.clip(k, 0, times.size - 1)]
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class PathGrid:
    """An EM path stored at its partition knots.

    ``monitor_values`` (optional) holds the path evaluated on a finer
    monitoring grid ``monitor_times``.
    """

    times: np.ndarray
    values: np.ndarray
    x0: float
    coefficient_id: str = "custom"
    monitor_times: np.ndarray = None
    monitor_values: np.ndarray = None

    def __post_init__(self):
        if np.shape(self.values) != np.shape(self.times):
            raise GridError("values must have one entry per grid time")
        if self.values[0] != self.x0:
            raise GridError("values[0] must equal the initial value")
        for a in (self.times, self.values, self.monitor_times, self.monitor_values):
            if a is not None:
                a.setflags(write=False)

    def on(self, grid, interpolation="auto"):
        """Values on ``grid`` (a superset of ``times``)."""
        grid = np.asarray(grid, dtype=float)
        if np.array_equal(grid, self.times):
            return self.values
        if interpolation != "step" and self.monitor_times is not None and np.array_equal(grid, self.monitor_times):
            return self.monitor_values
        if interpolation == "em":
            raise AlignmentError("no EM interpolation stored for this grid")
        idx = coarse_indices(grid, self.times)
        k = np.searchsorted(idx, np.arange(grid.size), side="right") - 1
        return self.values[k]

    def to_csv(self, fh, monitor=False):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "X"])
        t, x = (self.monitor_times, self.monitor_values) if monitor else (self.times, self.values)
        for a, b in zip(t, x):
            writer.writerow([repr(float(a)), repr(float(b))])


def as_sigma(coeff):
    """Normalize a coefficient to a callable ``(t, x_array) -> array``."""
    if hasattr(coeff, "evaluate"):
        return coeff.evaluate
    if callable(coeff):
        return lambda t, x: np.broadcast_to(coeff(t, x), np.shape(x)).astype(float)
    c = float(coeff)
    return lambda t, x: np.full(np.shape(x), c)


def constant_of(coeff):
    """The declared constant value of a coefficient, or None."""
    if np.ndim(coeff) == 0 and not callable(coeff) and not hasattr(coeff, "evaluate"):
        return float(coeff)
    c = getattr(coeff, "constant", None)
    return None if c is None else float(c)


def _path(dZ):
    return np.concatenate((np.zeros((dZ.shape[0], 1)), np.cumsum(dZ, axis=1)), axis=1)


def _check_x0(x0, M0):
    if M0 is not None and np.any(np.abs(x0) > M0):
        raise ParameterError(f"|X(0)| exceeds the declared bound M0={M0!r}")


def em_batch(coeff, x0, times, dZ, M0=None, Z=None):
    """EM values at the knots of ``times`` for each row of ``dZ``.

    Parameters
    ----------
    coeff : coefficient object, callable ``sigma(t, x)`` or constant
    x0 : float or array of shape (R,)
    times : array of shape (n + 1,)
    dZ : array of shape (R, n)
    Z : array of shape (R, n + 1), optional
        Driver values at the knots, used by the constant-coefficient form
        (defaults to the cumulative sum of ``dZ``).

    Returns
    -------
    X : array of shape (R, n + 1)

    Notes
    -----
    For a coefficient with a declared ``constant`` value ``c`` the scheme
    telescopes to ``x0 + c Z(t_k)``, which is evaluated directly.
    """
    sigma = as_sigma(coeff)
    times = check_grid(times)
    dZ = np.atleast_2d(np.asarray(dZ, dtype=float))
    if dZ.shape[1] != times.size - 1:
        raise AlignmentError(f"driver has {dZ.shape[1]} increments, partition has {times.size - 1} steps")
    R, n = dZ.shape
    _check_x0(x0, M0)
    c = constant_of(coeff)
    if c is not None:
        Z = _path(dZ) if Z is None else np.atleast_2d(Z)
        return np.asarray(x0, dtype=float).reshape(-1, 1) + c * Z
    X = np.empty((R, n + 1))
    X[:, 0] = x0
    for k in range(n):
        X[:, k + 1] = X[:, k] + sigma(times[k], X[:, k]) * dZ[:, k]
    return X


def _knot_map(fine_times, coarse_times):
    fine_times = np.asarray(fine_times, dtype=float)
    idx = coarse_indices(fine_times, coarse_times)
    # position of eta(s) in the coarse grid for every fine knot s (eta(T) = T)
    k = np.searchsorted(idx, np.arange(fine_times.size), side="right") - 1
    return idx, k


def monitor_batch(coeff, X, coarse_times, fine_times, Zfine, interpolation="em"):
    """Evaluate coarse EM paths ``X`` (R, nc + 1) on the fine grid.

    ``Zfine`` holds the driver values at the fine knots, shape (R, nf + 1).
    With ``interpolation="em"`` the value at fine knot ``s`` is
    ``X_k + sigma(t_k, X_k) (Z(s) - Z(t_k))`` with ``t_k = eta(s)``;
    ``"step"`` returns ``X_k``.  Both reproduce ``X`` at shared knots.
    """
    coarse_times = np.asarray(coarse_times, dtype=float)
    idx, k = _knot_map(fine_times, coarse_times)
    if interpolation == "step":
        return X[:, k]
    if interpolation != "em":
        raise ParameterError(f"unknown interpolation {interpolation!r}")
    c = constant_of(coeff)
    if c is not None:
        return X[:, :1] + c * Zfine
    sigma = as_sigma(coeff)
    S = np.empty_like(X)
    for j, t in enumerate(coarse_times):
        S[:, j] = sigma(t, X[:, j])
    return X[:, k] + S[:, k] * (Zfine - Zfine[:, idx[k]])


def euler_maruyama(coeff, x0, driver, partition=None, M0=None, coefficient_id=None):
    """Run the scheme on a single driver path.

    ``driver.times`` must coincide with the partition (when one is given).
    """
    if partition is not None and not np.array_equal(_times(partition), driver.times):
        raise AlignmentError("driver grid does not match the partition")
    X = em_batch(coeff, float(x0), driver.times, driver.dZ[None, :], M0=M0, Z=driver.path[None, :])[0]
    cid = coefficient_id or getattr(coeff, "name", "custom")
    return PathGrid(driver.times.copy(), X, float(x0), cid)


def coupled_run(coeff, x0, fine_driver, coarse_partitions, interpolation="em", M0=None):
    """EM paths on the fine grid and on each coarse partition, one driver path.

    Returns a list whose first element is the fine reference path; the
    remaining entries correspond to ``coarse_partitions`` and carry their
    values on the fine monitoring grid.
    """
    fine = euler_maruyama(coeff, x0, fine_driver, M0=M0)
    out = [fine]
    Zf = fine_driver.path[None, :]
    for part in coarse_partitions:
        times = _times(part)
        drv = coarsen(fine_driver, times)
        path = euler_maruyama(coeff, x0, drv, M0=M0)
        mon = monitor_batch(coeff, path.values[None, :], drv.times, fine_driver.times, Zf, interpolation)[0]
        out.append(
            PathGrid(path.times, path.values, path.x0, path.coefficient_id, fine_driver.times.copy(), mon)
        )
    return out


def coupled_batch(coeff, x0, fine_times, dZ, coarse_list, interpolation="em", reference=None):
    """Sup-distances between coarse EM paths and the fine EM reference.

    Parameters
    ----------
    dZ : array (R, nf)
        Fine driver increments, one row per replication.
    coarse_list : list of partitions nested in ``fine_times``

    Returns
    -------
    sup : array (R, len(coarse_list))
        ``max_s |X_D(s) - X(s)|`` over the fine knots.
    X : array (R, nf + 1)
        The fine reference paths.
    end : array (R, len(coarse_list))
        Coarse values at ``T``.
    """
    fine_times = check_grid(fine_times)
    X = em_batch(coeff, x0, fine_times, dZ) if reference is None else reference
    Zf = _path(dZ)
    sup = np.empty((dZ.shape[0], len(coarse_list)))
    end = np.empty_like(sup)
    for j, part in enumerate(coarse_list):
        times = _times(part)
        idx = coarse_indices(fine_times, times)
        Xc = em_batch(coeff, x0, times, np.diff(Zf[:, idx], axis=1), Z=Zf[:, idx])
        mon = monitor_batch(coeff, Xc, times, fine_times, Zf, interpolation)
        sup[:, j] = np.max(np.abs(mon - X), axis=1)
        end[:, j] = Xc[:, -1]
    return sup, X, end


@dataclass
class CauchyBudget:
    """Geometric tolerance schedule ``eps_i = eps_1 * ratio**(i - 1)`` over nested partitions.

    ``partitions[i - 1]`` is the i-th partition; ``eps_i`` bounds
    ``E[sup |X_{D_i} - X_{D_{i+1}}|^beta]`` for ``i = 1, ..., len(partitions) - 1``.
    """

    eps1: float
    ratio: float
    partitions: list

    def __post_init__(self):
        if not self.eps1 > 0 or not 0 < self.ratio < 1:
            raise ParameterError("need eps1 > 0 and 0 < ratio < 1")
        if len(self.partitions) < 2:
            raise ParameterError("need at least two partitions")
        self.partitions = [p if isinstance(p, Partition) else Partition(p) for p in self.partitions]
        meshes = [p.mesh for p in self.partitions]
        if any(b >= a for a, b in zip(meshes, meshes[1:])):
            raise ParameterError("partition meshes must strictly decrease")
        for a, b in zip(self.partitions, self.partitions[1:]):
            if not a.is_nested_in(b):
                raise AlignmentError("partitions must be nested")

    @classmethod
    def dyadic(cls, eps1, ratio, levels, T=1.0):
        return cls(eps1, ratio, [Partition.dyadic(T, lv) for lv in levels])

    @property
    def eps(self):
        i = np.arange(len(self.partitions) - 1)
        return self.eps1 * self.ratio**i

    def weighted_sum(self):
        """``sum_i 4^i eps_i`` over the declared range, summed term by term."""
        i = np.arange(1, len(self.partitions))
        return float(np.sum(4.0**i * self.eps))

    def closed_form_sum(self):
        """Closed form of :meth:`weighted_sum` for the geometric schedule."""
        n = len(self.partitions) - 1
        q = 4.0 * self.ratio
        if q == 1.0:
            return 4.0 * self.eps1 * n
        return 4.0 * self.eps1 * (1.0 - q**n) / (1.0 - q)

    @property
    def summable(self):
        """Whether the infinite continuation of the schedule has finite weighted sum."""
        return 4.0 * self.ratio < 1.0


@dataclass
class CauchyReport:
    estimates: np.ndarray
    dispersion: np.ndarray
    eps: np.ndarray
    meshes: list
    beta: float
    N: int
    weighted_sum: float
    closed_form_sum: float
    summable: bool
    limit_mesh: float
    extra: dict = field(default_factory=dict)

    @property
    def violations(self):
        return [i + 1 for i, (e, b) in enumerate(zip(self.estimates, self.eps)) if e > b]

    @property
    def passed(self):
        return not self.violations

    def rows(self):
        for i, (m0, m1, e, s, b) in enumerate(
            zip(self.meshes[:-1], self.meshes[1:], self.estimates, self.dispersion, self.eps)
        ):
            yield {"i": i + 1, "mesh_i": m0, "mesh_next": m1, "estimate": e, "dispersion": s, "eps_i": b,
                   "ok": bool(e <= b)}


def cauchy_construction(coeff, x0, budget, master_seed, N, beta, alpha, estimator=None, chunk=200):
    """Monte Carlo check of ``E[sup |X_{D_i} - X_{D_{i+1}}|^beta] <= eps_i``.

    Every replication draws one driver path on the finest partition; all
    coarser paths are monitored on that grid.  The finest EM path serves as
    the limit path.
    """
    from .experiments import mc_estimate

    if not 1.0 < beta < alpha:
        raise ParameterError(f"beta={beta!r} must lie in (1, alpha)")
    fine = budget.partitions[-1].times
    parts = budget.partitions
    L = len(parts) - 1
    vals = np.empty((int(N), L))
    for start in range(0, int(N), chunk):
        rows = range(start, min(int(N), start + chunk))
        dZ = increment_matrix(master_seed, rows, fine, alpha)
        Zf = _path(dZ)
        mon = []
        for p in parts:
            idx = coarse_indices(fine, p.times)
            Xc = em_batch(coeff, x0, p.times, np.diff(Zf[:, idx], axis=1), Z=Zf[:, idx])
            mon.append(monitor_batch(coeff, Xc, p.times, fine, Zf))
        for i in range(L):
            vals[start : start + len(rows), i] = np.max(np.abs(mon[i] - mon[i + 1]), axis=1) ** beta
    est = [mc_estimate(vals[:, i], estimator=estimator, beta=beta, alpha=alpha) for i in range(L)]
    return CauchyReport(
        estimates=np.array([e.estimate for e in est]),
        dispersion=np.array([e.dispersion for e in est]),
        eps=budget.eps,
        meshes=[p.mesh for p in parts],
        beta=beta,
        N=int(N),
        weighted_sum=budget.weighted_sum(),
        closed_form_sum=budget.closed_form_sum(),
        summable=budget.summable,
        limit_mesh=parts[-1].mesh,
    )
