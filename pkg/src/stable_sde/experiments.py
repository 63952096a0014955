"""Monte Carlo estimators and study drivers.

Replication ``i`` of every study draws its driver from
``ReplicationSeed(master, i)``, so results do not depend on chunking or on
the number of worker threads.
"""

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .coefficients import CoefficientSequence, MollifierFamily, bo_a_sequence, check_certificate
from .driver import StableParams, check_alpha, coarse_indices, increment_matrix, integrated_density_sup
from .engine import Partition, PathGrid, _path, _times, as_sigma, coupled_batch, em_batch, monitor_batch
from .errors import AlignmentError, CertificateError, ParameterError
from .generator import k_alpha

__all__ = [
    "MCEstimate",
    "ErrorTable",
    "TailReport",
    "sup_error_beta",
    "mc_estimate",
    "default_beta",
    "convergence_study",
    "stability_study",
    "stability_study_bo",
    "lemma6_bound",
    "m_schedule",
    "tail_check",
    "moment_diagnostic",
]

MIN_REPLICATIONS = 30


def default_beta(alpha):
    """Midpoint ``(1 + alpha) / 2`` of the admissible exponent range."""
    return 0.5 * (1.0 + check_alpha(alpha))


def _check_beta(beta, alpha):
    if not 1.0 < beta < alpha:
        raise ParameterError(f"beta={beta!r} must lie in (1, alpha={alpha!r})")
    return float(beta)


# ---------------------------------------------------------------------------
# estimators


@dataclass(frozen=True)
class MCEstimate:
    estimate: float
    dispersion: float
    estimator: str
    N: int
    k: int = 1


def mc_estimate(values, N=None, estimator=None, k=None, beta=None, alpha=None, indices=None):
    """Estimate a mean from nonnegative replication values.

    Parameters
    ----------
    values : array_like or callable
        Replication values, or ``study(i)`` returning the value of
        replication ``i`` (then ``N`` is required).
    estimator : {"mean", "mom"}, optional
        ``None`` selects median-of-means when ``beta >= (1 + alpha) / 2``
        and the plain mean otherwise.
    k : int, optional
        Number of median-of-means groups, default ``floor(sqrt(N))``.
    indices : array_like of int, optional
        Replication indices; group membership is ``index % k``, so the
        result is invariant under any reordering of (index, value) pairs.

    Returns
    -------
    MCEstimate
        ``dispersion`` is the standard error of the mean, or
        ``1.4826 * MAD(group means) / sqrt(k)`` for median-of-means.
    """
    if callable(values):
        if N is None:
            raise ParameterError("N is required when values is a callable")
        values = np.array([float(values(i)) for i in range(int(N))])
    values = np.asarray(values, dtype=float).ravel()
    n = values.size
    if n < MIN_REPLICATIONS:
        raise ParameterError(f"need at least {MIN_REPLICATIONS} replications, got {n}")
    if np.any(values < 0) or not np.all(np.isfinite(values)):
        raise ParameterError("replication values must be finite and nonnegative")
    if estimator is None:
        heavy = beta is not None and alpha is not None and beta >= 0.5 * (1.0 + alpha)
        estimator = "mom" if heavy else "mean"
    if estimator == "mean":
        sd = float(np.std(values, ddof=1))
        return MCEstimate(float(np.mean(values)), sd / math.sqrt(n), "mean", n)
    if estimator != "mom":
        raise ParameterError(f"unknown estimator {estimator!r}")
    k = int(math.isqrt(n)) if k is None else int(k)
    if not 1 <= k <= n:
        raise ParameterError("need 1 <= k <= N groups")
    idx = np.arange(n) if indices is None else np.asarray(indices, dtype=np.int64)
    # sum in index order so that reordering (index, value) pairs is exact
    order = np.argsort(idx, kind="stable")
    idx, values = idx[order], values[order]
    groups = idx % k
    sums = np.bincount(groups, weights=values, minlength=k)
    counts = np.bincount(groups, minlength=k)
    means = sums / counts
    med = float(np.median(means))
    mad = float(np.median(np.abs(means - med)))
    return MCEstimate(med, 1.4826 * mad / math.sqrt(k), "mom", n, k)


# ---------------------------------------------------------------------------
# tables


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


@dataclass
class ErrorTable:
    """Monte Carlo estimates of ``E[sup |.|^beta]`` against a mesh or index."""

    index_name: str
    index: list
    beta: float
    alpha: float
    estimates: np.ndarray
    dispersion: np.ndarray
    N: int
    estimator: str
    coefficient_id: str = "custom"
    columns: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.estimates = np.asarray(self.estimates, dtype=float)
        self.dispersion = np.asarray(self.dispersion, dtype=float)
        if np.any(self.estimates < 0):
            raise ParameterError("estimates must be nonnegative")

    def __len__(self):
        return len(self.index)

    def is_decreasing(self, strict=True):
        d = np.diff(self.estimates)
        return bool(np.all(d < 0) if strict else np.all(d <= 0))

    @property
    def reduction(self):
        """Ratio of the last estimate to the first."""
        return float(self.estimates[-1] / self.estimates[0]) if self.estimates[0] > 0 else 0.0

    def rows(self):
        names = [self.index_name, "estimate", "dispersion", *self.columns]
        cols = [self.index, self.estimates, self.dispersion, *self.columns.values()]
        return names, list(zip(*cols))

    def to_csv(self, fh, config_hash=None):
        if config_hash:
            fh.write(f"# config_hash: {config_hash}\n")
        names, rows = self.rows()
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(names)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])

    def summary(self):
        return {
            "index": self.index_name,
            "alpha": self.alpha,
            "beta": self.beta,
            "N": self.N,
            "estimator": self.estimator,
            "coefficient": self.coefficient_id,
            "estimates": self.estimates.tolist(),
            "decreasing": self.is_decreasing(),
            "last_over_first": self.reduction,
            **self.meta,
        }


@dataclass
class TailReport:
    """Empirical exceedance curve ``P(sup_t |int H dZ| > lambda)``."""

    lambdas: np.ndarray
    probabilities: np.ndarray
    exceedances: np.ndarray
    slope: float
    intercept: float
    alpha: float
    N: int
    H_moment: float
    C_fitted: float
    reliable: bool
    advisory: str = ""

    @property
    def rhs(self):
        """``lambda^-alpha * C * int_0^T E|H|^alpha ds`` with the fitted ``C``."""
        return self.lambdas**-self.alpha * self.C_fitted * self.H_moment

    def to_csv(self, fh, config_hash=None):
        if config_hash:
            fh.write(f"# config_hash: {config_hash}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["lambda", "probability", "exceedances", "rhs"])
        for row in zip(self.lambdas, self.probabilities, self.exceedances, self.rhs):
            writer.writerow([_fmt(row[0]), _fmt(row[1]), _fmt(row[2]), _fmt(row[3])])

    def summary(self):
        return {
            "alpha": self.alpha,
            "N": self.N,
            "slope": self.slope,
            "slope_minus_alpha": self.slope + self.alpha,
            "C_fitted": self.C_fitted,
            "H_moment": self.H_moment,
            "reliable": self.reliable,
            "advisory": self.advisory,
        }


# ---------------------------------------------------------------------------
# pathwise quantities


def sup_error_beta(a, b, beta, grid=None, interpolation="auto"):
    """``(max |a - b|)**beta`` over a common monitoring grid.

    ``a`` and ``b`` are :class:`PathGrid` objects (or plain value arrays on
    the same grid).  The grid defaults to the finer of the two; the coarser
    path is evaluated there via its stored interpolation or by step
    extension.
    """
    if not isinstance(a, PathGrid) or not isinstance(b, PathGrid):
        a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
        if a.shape != b.shape:
            raise AlignmentError("value arrays differ in shape")
        return float(np.max(np.abs(a - b))) ** beta
    if grid is None:
        cands = [g for g in (a.monitor_times, b.monitor_times, a.times, b.times) if g is not None]
        grid = max(cands, key=len)
    va = a.on(grid, interpolation)
    vb = b.on(grid, interpolation)
    return float(np.max(np.abs(va - vb))) ** beta


def moment_diagnostic(a, b, t=None, exponent=None, alpha=None):
    """Monte Carlo mean of ``|a(t) - b(t)|**exponent`` (default ``alpha - 1``).

    ``a`` and ``b`` are arrays of shape (R,) holding the values at ``t``, or
    arrays (R, n + 1) together with a knot index ``t``, or lists of
    :class:`PathGrid` with ``t`` a knot time.
    """
    if exponent is None:
        if alpha is None:
            raise ParameterError("give exponent or alpha")
        exponent = check_alpha(alpha) - 1.0
    if isinstance(a, (list, tuple)) and a and isinstance(a[0], PathGrid):
        def at(paths):
            out = []
            for p in paths:
                k = np.flatnonzero(p.times == t)
                if k.size != 1:
                    raise AlignmentError(f"t={t!r} is not a knot")
                out.append(p.values[k[0]])
            return np.array(out)
        va, vb = at(a), at(b)
    else:
        va, vb = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
        if va.ndim == 2:
            va, vb = va[:, t], vb[:, t]
    return float(np.mean(np.abs(va - vb) ** exponent))


# ---------------------------------------------------------------------------
# chunked replication driver


def _chunks(N, chunk):
    return [range(s, min(N, s + chunk)) for s in range(0, N, chunk)]


def _map_chunks(fn, N, chunk, threads):
    parts = _chunks(int(N), int(chunk))
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=int(threads)) as ex:
            results = list(ex.map(fn, parts))
    else:
        results = [fn(p) for p in parts]
    return parts, results


def _ladder(ladder, T):
    out = []
    for item in ladder:
        if isinstance(item, Partition):
            out.append(item)
        elif np.ndim(item) == 0:
            out.append(Partition.from_mesh(T, float(item)))
        else:
            out.append(Partition(item))
    return out


def convergence_study(
    coeff,
    alpha,
    ladder,
    fine,
    beta=None,
    N=1000,
    seed=0,
    x0=0.0,
    T=1.0,
    estimator=None,
    interpolation="em",
    chunk=200,
    threads=1,
    M0=None,
):
    """Estimate ``E[sup_t |X_D(t) - X(t)|^beta]`` down a ladder of partitions.

    The reference ``X`` is the EM path on the fine partition driven by the
    same realized increments.  Rows are sorted by mesh, coarsest first.
    A companion column holds ``E|X_D(T) - X(T)|^(alpha - 1)``.
    """
    params = StableParams(alpha, T)
    beta = _check_beta(default_beta(alpha) if beta is None else beta, params.alpha)
    if M0 is not None and abs(x0) > M0:
        raise ParameterError(f"|x0| exceeds the declared bound M0={M0!r}")
    fine = _ladder([fine], T)[0]
    parts = sorted(_ladder(ladder, T), key=lambda p: -p.mesh)

    def run(rows):
        dZ = increment_matrix(seed, rows, fine.times, params.alpha)
        sup, X, end = coupled_batch(coeff, x0, fine.times, dZ, parts, interpolation)
        return sup, np.abs(end - X[:, -1][:, None]) ** (params.alpha - 1.0)

    _, results = _map_chunks(run, N, chunk, threads)
    sup = np.concatenate([r[0] for r in results])
    mom = np.concatenate([r[1] for r in results])
    vals = sup**beta
    est = [mc_estimate(vals[:, j], estimator=estimator, beta=beta, alpha=alpha) for j in range(len(parts))]
    return ErrorTable(
        "mesh",
        [p.mesh for p in parts],
        beta,
        params.alpha,
        [e.estimate for e in est],
        [e.dispersion for e in est],
        int(N),
        est[0].estimator,
        getattr(coeff, "name", "custom"),
        columns={"steps": [len(p) for p in parts], "moment_T": mom.mean(axis=0)},
        meta={"fine_mesh": fine.mesh, "seed": int(seed), "x0": float(x0), "interpolation": interpolation},
    )


def _refuse(report, what):
    if not report.passed:
        raise CertificateError(f"{what} certificate failed: {report.failures()}")


def _initial(x0_n, n, default):
    if x0_n is None:
        return default
    return float(x0_n(n)) if callable(x0_n) else float(x0_n[n])


def stability_study(
    seq,
    alpha,
    x0=0.0,
    x0_n=None,
    members=(1, 2, 4, 8, 16),
    fine=2.0**-14,
    beta=None,
    N=500,
    seed=0,
    T=1.0,
    M0=None,
    estimator=None,
    plan=None,
    chunk=250,
    threads=1,
):
    """Estimate ``E[sup_t |X_n(t) - X(t)|^beta]`` for a (B) sequence.

    ``X_n`` and ``X`` solve the equations with ``sigma_n, X_n(0)`` and
    ``sigma, X(0)`` on the same driver path, both discretized on the fine
    partition.  The sequence's certificate is checked first.
    """
    params = StableParams(alpha, T)
    beta = _check_beta(default_beta(alpha) if beta is None else beta, params.alpha)
    if not isinstance(seq, CoefficientSequence) or seq.kind != "B":
        raise ParameterError("stability_study needs a (t, x) coefficient sequence")
    _refuse(check_certificate(seq, plan, alpha), "sequence")
    inits = {n: _initial(x0_n, n, x0) for n in members}
    if M0 is not None and any(abs(v) > M0 for v in (x0, *inits.values())):
        raise ParameterError(f"initial values exceed the declared bound M0={M0!r}")
    part = _ladder([fine], T)[0]
    coeffs = {n: seq.member(n) for n in members}

    def run(rows):
        dZ = increment_matrix(seed, rows, part.times, params.alpha)
        X = em_batch(seq.limit, x0, part.times, dZ)
        out = np.empty((len(rows), len(members)))
        for j, n in enumerate(members):
            Xn = em_batch(coeffs[n], inits[n], part.times, dZ)
            out[:, j] = np.max(np.abs(Xn - X), axis=1)
        return out

    _, results = _map_chunks(run, N, chunk, threads)
    vals = np.concatenate(results) ** beta
    est = [mc_estimate(vals[:, j], estimator=estimator, beta=beta, alpha=alpha) for j in range(len(members))]
    return ErrorTable(
        "n",
        list(members),
        beta,
        params.alpha,
        [e.estimate for e in est],
        [e.dispersion for e in est],
        int(N),
        est[0].estimator,
        seq.name,
        columns={"eps_n": [float(seq.eps(n)) for n in members], "x0_n": [inits[n] for n in members]},
        meta={"fine_mesh": part.mesh, "seed": int(seed), "x0": float(x0)},
    )


def m_schedule(eps, a_sequence):
    """Largest ``m >= 1`` with ``a_m >= eps`` (so that ``eps / a_m <= 1``)."""
    a = np.asarray(a_sequence, dtype=float)
    ok = np.flatnonzero(a[1:] >= eps)
    if ok.size and ok[-1] + 1 == a.size - 1:
        raise ParameterError("a-sequence too short for this eps; raise m_max")
    return int(ok[-1] + 1) if ok.size else 1


def lemma6_bound(alpha, M, f_sup, d, K, m, T=1.0, density_sup=None):
    """``2 K_alpha (M + 1) ||f|| / (d^alpha m) * sup_{|a| <= M+1} int_0^{K^alpha T} p_s(a) ds``."""
    if density_sup is None:
        density_sup = integrated_density_sup(alpha, M, K, T)
    return 2.0 * k_alpha(alpha) * (M + 1.0) * f_sup / (d**alpha * m) * density_sup


def _stop(X, Xn, M):
    """Freeze both paths after the first knot where ``|X| v |X_n| > M``."""
    out = np.maximum(np.abs(X), np.abs(Xn)) > M
    hit = out.any(axis=1)
    first = np.where(hit, out.argmax(axis=1), X.shape[1] - 1)
    cols = np.arange(X.shape[1])[None, :]
    take = np.minimum(cols, first[:, None])
    rows = np.arange(X.shape[0])[:, None]
    return X[rows, take], Xn[rows, take], hit, first


def stability_study_bo(
    seq,
    alpha,
    x0=0.0,
    x0_n=None,
    members=(1, 2, 4, 8, 16),
    fine=2.0**-14,
    beta=None,
    N=500,
    seed=0,
    T=1.0,
    M=10.0,
    m_max=8,
    estimator=None,
    plan=None,
    proxy_stride=16,
    chunk=250,
    threads=1,
):
    """Stability study for a (C) sequence, with the a-priori density bound.

    Both paths are stopped at the first knot where either leaves
    ``[-M, M]``; the number of stopped replications is reported.  For each
    ``n``, ``m_n`` is the largest ``m`` with ``a_m >= eps_n`` on the
    ``a_m = exp(-m(m+1)/2)`` sequence, and the table carries the bound next
    to the proxy ``2 K_alpha E int_0^T |sigma_n(X_n) - sigma_n(X)|^alpha
    phi_{m_n}(X_n - X) ds`` (Riemann sum on every ``proxy_stride``-th knot).
    """
    params = StableParams(alpha, T)
    beta = _check_beta(default_beta(alpha) if beta is None else beta, params.alpha)
    if not isinstance(seq, CoefficientSequence) or seq.kind != "C":
        raise ParameterError("stability_study_bo needs a time-homogeneous (C) sequence")
    _refuse(check_certificate(seq, plan, alpha), "sequence")
    lim = seq.limit
    inits = {n: _initial(x0_n, n, x0) for n in members}
    part = _ladder([fine], T)[0]
    family = MollifierFamily.bo(alpha, m_max)
    a_seq = bo_a_sequence(m_max)
    m_n = {n: m_schedule(float(seq.eps(n)), a_seq) for n in members}
    coeffs = {n: seq.member(n) for n in members}
    K_a = k_alpha(alpha)
    sub = np.arange(0, len(part), int(proxy_stride))
    dt = np.diff(np.append(part.times[sub], part.T))

    def run(rows):
        dZ = increment_matrix(seed, rows, part.times, params.alpha)
        X = em_batch(lim, x0, part.times, dZ)
        sup = np.empty((len(rows), len(members)))
        proxy = np.empty_like(sup)
        stopped = np.zeros(len(members), dtype=int)
        for j, n in enumerate(members):
            Xn = em_batch(coeffs[n], inits[n], part.times, dZ)
            Xs, Xns, hit, _ = _stop(X, Xn, M)
            stopped[j] = int(hit.sum())
            sup[:, j] = np.max(np.abs(Xns - Xs), axis=1)
            sig = as_sigma(coeffs[n])
            a, b = Xns[:, sub], Xs[:, sub]
            integrand = np.abs(sig(0.0, a) - sig(0.0, b)) ** alpha * family.phi(m_n[n])(a - b)
            proxy[:, j] = 2.0 * K_a * integrand @ dt
        return sup, proxy, stopped

    _, results = _map_chunks(run, N, chunk, threads)
    vals = np.concatenate([r[0] for r in results]) ** beta
    proxy = np.concatenate([r[1] for r in results]).mean(axis=0)
    stopped = np.sum([r[2] for r in results], axis=0)
    est = [mc_estimate(vals[:, j], estimator=estimator, beta=beta, alpha=alpha) for j in range(len(members))]
    dsup, dinfo = integrated_density_sup(alpha, M, lim.K, T, full_output=True)
    bound_of_m = {m: lemma6_bound(alpha, M, lim.f_sup, lim.d, lim.K, m, T, dsup) for m in range(1, m_max + 1)}
    return ErrorTable(
        "n",
        list(members),
        beta,
        params.alpha,
        [e.estimate for e in est],
        [e.dispersion for e in est],
        int(N),
        est[0].estimator,
        seq.name,
        columns={
            "eps_n": [float(seq.eps(n)) for n in members],
            "m_n": [m_n[n] for n in members],
            "lemma6_bound": [bound_of_m[m_n[n]] for n in members],
            "N1_proxy": proxy,
            "stopped": stopped,
        },
        meta={
            "fine_mesh": part.mesh,
            "seed": int(seed),
            "M": float(M),
            "density_sup": dsup,
            "density_sup_at_zero": bool(dinfo["max_at_zero"]),
            "bound_by_m": {str(m): v for m, v in bound_of_m.items()},
            "d": lim.d,
            "K": lim.K,
            "f_sup": lim.f_sup,
        },
    )


# ---------------------------------------------------------------------------
# tail diagnostic


def _sup_abs_integral(H, alpha, rows, seed, times):
    """``sup_t |int_0^t H dZ|`` on the grid, plus ``int_0^T E|H|^alpha`` contributions."""
    dZ = increment_matrix(seed, rows, times, alpha)
    if not isinstance(H, dict):
        c = float(H)
        Z = np.cumsum(dZ, axis=1)
        sup = np.maximum(np.max(np.abs(c * Z), axis=1), 0.0)
        return sup, np.full(len(rows), abs(c) ** alpha * times[-1])
    coeff, coarse, x0 = H["coefficient"], H["coarse"], H.get("x0", 0.0)
    X = em_batch(coeff, x0, times, dZ)
    Zf = _path(dZ)
    ct = _times(coarse)
    idx = coarse_indices(times, ct)
    Xc = em_batch(coeff, x0, ct, np.diff(Zf[:, idx], axis=1), Z=Zf[:, idx])
    mon = monitor_batch(coeff, Xc, ct, times, Zf)
    sup = np.max(np.abs(mon - X), axis=1)
    # H(s) = sigma(eta(s), X_D(eta(s))) - sigma(s, X(s)) on fine knots
    sigma = as_sigma(coeff)
    k = np.searchsorted(idx, np.arange(times.size - 1), side="right") - 1
    Hs = np.empty((len(rows), times.size - 1))
    for j in range(times.size - 1):
        Hs[:, j] = sigma(ct[k[j]], Xc[:, k[j]]) - sigma(times[j], X[:, j])
    return sup, np.abs(Hs) ** alpha @ np.diff(times)


def tail_check(H=1.0, alpha=1.5, lambdas=None, N=100_000, seed=0, T=1.0, steps=256, chunk=5000, min_exceed=20):
    """Exceedance curve of ``sup_t |int_0^t H dZ|`` and its log-log tail slope.

    ``H`` is a constant, or a dict ``{"coefficient", "coarse", "x0"}`` for
    the EM difference integrand ``sigma(eta(s), X_D(eta(s)-)) - sigma(s, X(s-))``
    (then ``int H dZ = X_D - X`` on the fine grid).  The slope is fitted by
    least squares on the largest-lambda half of the grid.
    """
    params = StableParams(alpha, T)
    if int(N) < 10_000:
        raise ParameterError("tail_check needs N >= 10^4")
    lambdas = np.logspace(0.0, math.log10(60.0), 25) if lambdas is None else np.sort(np.asarray(lambdas, float))
    if lambdas.size < 4 or math.log10(lambdas[-1] / lambdas[0]) < 1.5 - 1e-12:
        raise ParameterError("lambda grid must span at least 1.5 decades with >= 4 points")
    times = Partition.uniform(T, steps).times
    sups, moments = [], []
    for rows in _chunks(int(N), chunk):
        s, m = _sup_abs_integral(H, params.alpha, rows, seed, times)
        sups.append(s)
        moments.append(m)
    sup = np.sort(np.concatenate(sups))
    Hmom = float(np.mean(np.concatenate(moments)))
    exceed = sup.size - np.searchsorted(sup, lambdas, side="right")
    prob = exceed / sup.size
    top = slice(lambdas.size // 2, None)
    good = exceed[top] > 0
    reliable = bool(exceed[-1] >= min_exceed)
    advisory = "" if reliable else f"only {int(exceed[-1])} exceedances at the top lambda; increase N"
    if good.sum() >= 2:
        slope, intercept = np.polyfit(np.log(lambdas[top][good]), np.log(prob[top][good]), 1)
    else:
        slope, intercept, reliable = float("nan"), float("nan"), False
    C = float(np.max(prob * lambdas**params.alpha) / Hmom) if Hmom > 0 else float("nan")
    return TailReport(lambdas, prob, exceed, float(slope), float(intercept), params.alpha, int(N), Hmom, C,
                      reliable, advisory)


def dumps(obj):
    """JSON text for summaries (numpy scalars and arrays converted)."""

    def conv(o):
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, (np.floating, np.integer, np.bool_)):
            return o.item()
        raise TypeError(type(o))

    return json.dumps(obj, default=conv, indent=2, sort_keys=True)
