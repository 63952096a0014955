"""Symmetric alpha-stable driver: sampling, coarsening and density utilities.

The driver ``Z`` has independent increments with
``E exp(i xi (Z(t) - Z(s))) = exp(-(t - s) |xi|^alpha)``.  Increments over a
grid are drawn with the Chambers-Mallows-Stuck transform, one independent
random stream per replication.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import AlignmentError, GridError, NumericalError, ParameterError

__all__ = [
    "StableParams",
    "ReplicationSeed",
    "IncrementGrid",
    "check_alpha",
    "check_grid",
    "sample_standard_stable",
    "sample_increments",
    "increment_matrix",
    "coarsen",
    "coarse_indices",
    "transition_density",
    "integrated_density",
    "integrated_density_sup",
]

_U64 = 2**64


def check_alpha(alpha, lo=1.0, hi=2.0, closed_hi=False):
    """Raise ParameterError unless ``lo < alpha < hi`` (or ``<= hi``)."""
    alpha = float(alpha)
    ok = lo < alpha <= hi if closed_hi else lo < alpha < hi
    if not ok or not math.isfinite(alpha):
        bracket = "]" if closed_hi else ")"
        raise ParameterError(f"alpha={alpha!r} outside ({lo}, {hi}{bracket}")
    return alpha


@dataclass(frozen=True)
class StableParams:
    """Index ``alpha`` and horizon ``T`` of the driving process."""

    alpha: float
    T: float = 1.0

    def __post_init__(self):
        check_alpha(self.alpha)
        if not (self.T > 0 and math.isfinite(self.T)):
            raise ParameterError(f"horizon T={self.T!r} must be positive")


@dataclass(frozen=True)
class ReplicationSeed:
    """Deterministic (master seed, replication index) -> random stream map.

    Streams come from ``SeedSequence(master, spawn_key=(index,))``, so each
    replication can be generated independently of every other one and in
    any order.
    """

    master: int
    index: int = 0

    def __post_init__(self):
        if not (0 <= int(self.master) < _U64):
            raise ParameterError(f"master seed {self.master!r} is not a 64-bit unsigned integer")
        if int(self.index) < 0:
            raise ParameterError(f"replication index {self.index!r} must be >= 0")

    def stream(self):
        ss = np.random.SeedSequence(int(self.master), spawn_key=(int(self.index),))
        return np.random.Generator(np.random.PCG64(ss))


def check_grid(times, T=None):
    """Validate a time grid and return it as a float array."""
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 2:
        raise GridError("a grid needs at least two points")
    if times[0] != 0.0:
        raise GridError(f"grid must start at 0, got {times[0]!r}")
    if not np.all(np.diff(times) > 0):
        raise GridError("grid must be strictly increasing")
    if T is not None and not math.isclose(times[-1], T, rel_tol=1e-12, abs_tol=0.0):
        raise GridError(f"grid ends at {times[-1]!r}, expected T={T!r}")
    return times


class IncrementGrid:
    """A realized driver path, stored as one increment per grid interval.

    Parameters
    ----------
    times : array_like
        Strictly increasing grid ``0 = t_0 < ... < t_n = T``.
    dZ : array_like
        ``n`` driver increments.
    seed : ReplicationSeed, optional
        Provenance of the draw.
    path : array_like, optional
        Values ``Z(t_k)``.  Defaults to the cumulative sum of ``dZ``; coarsened
        grids carry the fine path sampled at the shared knots so that values at
        shared times are bitwise equal.
    """

    __slots__ = ("times", "dZ", "seed", "_path")

    def __init__(self, times, dZ, seed=None, path=None):
        times = check_grid(times)
        dZ = np.asarray(dZ, dtype=float)
        if dZ.shape != (times.size - 1,):
            raise GridError(f"need {times.size - 1} increments, got shape {dZ.shape}")
        if path is not None:
            path = np.asarray(path, dtype=float)
            if path.shape != times.shape or path[0] != 0.0:
                raise GridError("path must match the grid and start at 0")
        self.times = times
        self.dZ = dZ
        self.seed = seed
        self._path = path

    @property
    def T(self):
        return float(self.times[-1])

    @property
    def path(self):
        """Driver values ``Z(t_k)`` with ``Z(0) = 0``."""
        if self._path is None:
            return np.concatenate(([0.0], np.cumsum(self.dZ)))
        return self._path

    def __len__(self):
        return self.dZ.size

    def to_csv(self, fh):
        """Write ``t_start,t_end,dZ`` rows to an open text file."""
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t_start", "t_end", "dZ"])
        for a, b, d in zip(self.times[:-1], self.times[1:], self.dZ):
            writer.writerow([repr(float(a)), repr(float(b)), repr(float(d))])


def sample_standard_stable(stream, alpha, size=None):
    """Draw from the symmetric stable law with characteristic function exp(-|xi|^alpha).

    Chambers-Mallows-Stuck transform with zero skewness: ``V`` uniform on
    (-pi/2, pi/2), ``W`` unit exponential,

        X = sin(alpha V) / cos(V)^(1/alpha) * (cos((1 - alpha) V) / W)^((1 - alpha)/alpha)
    """
    alpha = check_alpha(alpha)
    v = stream.uniform(-0.5 * np.pi, 0.5 * np.pi, size)
    w = stream.standard_exponential(size)
    return (
        np.sin(alpha * v)
        / np.cos(v) ** (1.0 / alpha)
        * (np.cos((1.0 - alpha) * v) / w) ** ((1.0 - alpha) / alpha)
    )


def sample_increments(seed, params, times):
    """Independent increments ``(t_{k+1} - t_k)^(1/alpha) * S_k`` on ``times``."""
    times = check_grid(times, params.T)
    scale = np.diff(times) ** (1.0 / params.alpha)
    draws = sample_standard_stable(seed.stream(), params.alpha, scale.size)
    return IncrementGrid(times, scale * draws, seed=seed)


def increment_matrix(master, indices, times, alpha):
    """Stack the increments of several replications as rows.

    Row ``r`` is bitwise equal to
    ``sample_increments(ReplicationSeed(master, indices[r]), ...).dZ``.
    """
    alpha = check_alpha(alpha)
    times = check_grid(times)
    scale = np.diff(times) ** (1.0 / alpha)
    out = np.empty((len(indices), scale.size))
    for r, idx in enumerate(indices):
        out[r] = scale * sample_standard_stable(ReplicationSeed(master, int(idx)).stream(), alpha, scale.size)
    return out


def coarse_indices(fine_times, coarse_times):
    """Positions of ``coarse_times`` inside ``fine_times``.

    Knots are matched to within ``1e-9`` of the smallest fine step.
    """
    fine_times = np.asarray(fine_times, dtype=float)
    coarse_times = np.asarray(coarse_times, dtype=float)
    tol = 1e-9 * float(np.min(np.diff(fine_times)))
    idx = np.clip(np.searchsorted(fine_times, coarse_times), 0, fine_times.size - 1)
    lower = np.clip(idx - 1, 0, fine_times.size - 1)
    pick = np.where(
        np.abs(fine_times[lower] - coarse_times) < np.abs(fine_times[idx] - coarse_times), lower, idx
    )
    if np.any(np.abs(fine_times[pick] - coarse_times) > tol):
        raise AlignmentError("coarse grid is not a subset of the fine grid")
    if pick[0] != 0 or pick[-1] != fine_times.size - 1 or np.any(np.diff(pick) <= 0):
        raise AlignmentError("coarse grid must share both endpoints and be increasing")
    return pick


def coarsen(fine, coarse_times):
    """Aggregate a fine increment grid onto a sub-grid.

    Each coarse increment spans the fine increments between two shared knots.
    The coarse path is the fine path sampled at the shared knots, so values of
    ``Z`` at shared times are identical; increments are its differences.
    """
    idx = coarse_indices(fine.times, coarse_times)
    if idx.size == fine.times.size:
        return IncrementGrid(fine.times, fine.dZ, seed=fine.seed, path=fine._path)
    zc = fine.path[idx]
    return IncrementGrid(fine.times[idx], np.diff(zc), seed=fine.seed, path=zc)


_CUTOFF_EXPONENT = 30.0  # exp(-30) < 1e-12


def transition_density(s, a, alpha, epsrel=1e-10):
    r"""Density of ``Z(s)`` at displacement ``a``.

    .. math:: p_s(a) = \frac{1}{\pi}\int_0^\infty e^{-s\xi^\alpha}\cos(a\xi)\,d\xi

    Accepts ``alpha`` in (0, 2] so that the Cauchy (alpha = 1) and Gaussian
    (alpha = 2) closed forms can serve as checks.  The integral is cut at
    ``Xi`` with ``s Xi^alpha = 30``; the remaining tail is added exactly via
    the incomplete gamma function.
    """
    alpha = check_alpha(alpha, lo=0.0, hi=2.0, closed_hi=True)
    if not s > 0:
        raise ParameterError(f"time s={s!r} must be positive")
    a_arr = np.abs(np.asarray(a, dtype=float))
    cutoff = (_CUTOFF_EXPONENT / s) ** (1.0 / alpha)
    tail_mass = (
        s ** (-1.0 / alpha) / alpha * special.gamma(1.0 / alpha) * special.gammaincc(1.0 / alpha, _CUTOFF_EXPONENT)
    )

    def one(av):
        f = lambda xi: math.exp(-s * xi**alpha)
        if av == 0.0:
            val, err, info = integrate.quad(f, 0.0, cutoff, epsabs=0.0, epsrel=epsrel, limit=400, full_output=1)[:3]
            tail = tail_mass
        else:
            val, err, info = integrate.quad(
                f, 0.0, cutoff, weight="cos", wvar=av, epsabs=1e-15, epsrel=epsrel, limit=400, full_output=1
            )[:3]
            tail = 0.0  # |tail| <= tail_mass, below 1e-12 relative
        ier = info.get("ier", 0) if isinstance(info, dict) else 0
        if ier not in (0, None) and err > 1e3 * epsrel * max(abs(val), 1e-300):
            raise NumericalError(
                f"density quadrature failed at s={s}, a={av}, alpha={alpha}: error {err:.3e}", achieved=err
            )
        return (val + tail) / math.pi

    if a_arr.ndim == 0:
        return one(float(a_arr))
    return np.array([one(float(v)) for v in a_arr.ravel()]).reshape(a_arr.shape)


def integrated_density(a, S, alpha):
    """``int_0^S p_s(a) ds`` by adaptive quadrature over ``s``."""
    if not S > 0:
        raise ParameterError(f"upper limit S={S!r} must be positive")
    val, err, info = integrate.quad(
        lambda s: transition_density(s, a, alpha), 0.0, S, epsabs=1e-12, epsrel=1e-9, limit=200, full_output=1
    )[:3]
    if err > 1e-6 * max(abs(val), 1e-12):
        raise NumericalError(f"time integral of the density did not converge (a={a})", achieved=err)
    return val


def integrated_density_sup(alpha, M, K, T, n_grid=12, full_output=False):
    """Supremum over ``|a| <= M + 1`` of ``int_0^{K^alpha T} p_s(a) ds``.

    The supremum is taken over ``n_grid`` equally spaced points of
    ``[0, M + 1]`` (the integrand is even in ``a``).  With
    ``full_output=True`` a dict with the grid, values and the location of the
    maximum is returned as well.
    """
    alpha = check_alpha(alpha, lo=0.0, hi=2.0, closed_hi=True)
    for name, v in (("M", M), ("K", K), ("T", T)):
        if not v > 0:
            raise ParameterError(f"{name}={v!r} must be positive")
    S = K**alpha * T
    grid = np.linspace(0.0, M + 1.0, int(n_grid))
    values = np.array([integrated_density(a, S, alpha) for a in grid])
    k = int(np.argmax(values))
    sup = float(values[k])
    if full_output:
        return sup, {
            "a": grid,
            "values": values,
            "argmax": float(grid[k]),
            "max_at_zero": k == 0,
            "monotone": bool(np.all(np.diff(values) <= 1e-12 * sup)),
            "S": S,
        }
    return sup
