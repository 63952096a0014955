"""Coefficients with condition certificates, the a_m sequence and mollifiers.

Three coefficient shapes are supported:

* :class:`CoefficientA` -- bounded ``sigma(t, x)`` with a modulus ``rho``
  dominating ``|sigma(t, x) - sigma(t, y)|^alpha`` (Komatsu condition).
* :class:`CoefficientC` -- time-homogeneous ``d <= sigma(x) <= K`` with an
  increasing ``f`` dominating ``|sigma(x) - sigma(y)|^alpha``
  (Belfadli-Ouknine condition).
* :class:`CoefficientSequence` -- a family ``sigma_n`` converging uniformly to
  a limit, with a declared schedule ``eps_n``.

Mollifiers ``phi_m`` live on ``a_m < |x| < a_{m-1}`` under the cap
``1/(m rho(x))`` (or ``1/(m x)``), and ``u_m = |.|^(alpha-1) * phi_m``.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize

from ._quad import gauss_legendre, panel_rule
from .driver import check_alpha
from .errors import CertificateError, FeasibilityError, NumericalError, ParameterError

__all__ = [
    "Modulus",
    "CoefficientA",
    "CoefficientC",
    "CoefficientSequence",
    "solve_a_sequence",
    "bo_a_sequence",
    "Mollifier",
    "MollifierFamily",
    "build_mollifier",
    "convolve_u",
    "SamplePlan",
    "CertificateReport",
    "check_certificate",
]

class Modulus:
    """Increasing ``rho`` on ``[0, inf)`` with ``rho(0) = 0``.

    Optional analytic pieces speed things up and are used when present:
    ``drho``/``d2rho`` (derivatives) and ``inv_antiderivative`` (any ``R``
    with ``R' = 1/rho``).  Missing derivatives fall back to central
    differences.
    """

    def __init__(self, rho, description="", drho=None, d2rho=None, inv_antiderivative=None):
        self.rho = rho
        self.description = description
        self._drho = drho
        self._d2rho = d2rho
        self.inv_antiderivative = inv_antiderivative

    @classmethod
    def power(cls, scale=1.0, power=1.0):
        """``rho(h) = scale * h**power``; admissible iff ``power >= 1``."""
        c, p = float(scale), float(power)
        if c <= 0:
            raise ParameterError("modulus scale must be positive")
        if p == 1.0:
            anti = lambda x: np.log(x) / c
        else:
            anti = lambda x: np.asarray(x, dtype=float) ** (1.0 - p) / (c * (1.0 - p))
        return cls(
            lambda h: c * np.asarray(h, dtype=float) ** p,
            description=f"{c:g}*h^{p:g}",
            drho=lambda h: c * p * np.asarray(h, dtype=float) ** (p - 1.0),
            d2rho=lambda h: c * p * (p - 1.0) * np.asarray(h, dtype=float) ** (p - 2.0),
            inv_antiderivative=anti,
        )

    def __call__(self, h):
        return self.rho(h)

    def __repr__(self):
        return f"Modulus({self.description or self.rho!r})"

    def drho(self, x):
        if self._drho is not None:
            return self._drho(x)
        x = np.asarray(x, dtype=float)
        h = 1e-5 * x
        return (self.rho(x + h) - self.rho(x - h)) / (2 * h)

    def d2rho(self, x):
        if self._d2rho is not None:
            return self._d2rho(x)
        x = np.asarray(x, dtype=float)
        h = 1e-4 * x
        return (self.rho(x + h) - 2 * self.rho(x) + self.rho(x - h)) / h**2

    def inverse_integral(self, lo, hi):
        """``int_lo^hi dx / rho(x)`` for ``0 < lo <= hi`` (arrays broadcast)."""
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        if self.inv_antiderivative is not None:
            return self.inv_antiderivative(hi) - self.inv_antiderivative(lo)
        # substitute x = e^s; the integrand rho(e^s)^-1 e^s is smooth
        t, w = gauss_legendre(64)
        slo, shi = np.log(lo), np.log(hi)
        half = 0.5 * (shi - slo)
        s = slo[..., None] + half[..., None] * (t + 1.0)
        x = np.exp(s)
        return (half[..., None] * w * x / self.rho(x)).sum(axis=-1)


@dataclass
class CoefficientA:
    """Bounded ``sigma(t, x)`` with modulus ``rho`` (Komatsu condition).

    ``sigma`` must accept a scalar ``t`` and an array ``x``.  ``constant``
    marks a coefficient known to be identically equal to that value, which
    lets the engine use the telescoped form of the scheme.
    """

    sigma: object
    M1: float
    modulus: Modulus
    name: str = "custom"
    params: dict = field(default_factory=dict)
    constant: float = None

    kind = "A"

    def evaluate(self, t, x):
        return np.broadcast_to(self.sigma(t, x), np.shape(x)).astype(float)

    def to_config(self):
        return {"id": self.name, **self.params}


@dataclass
class CoefficientC:
    """Time-homogeneous ``sigma(x)`` with ``d <= sigma <= K`` and increasing ``f``."""

    sigma: object
    d: float
    K: float
    f: object
    f_sup: float
    name: str = "custom"
    params: dict = field(default_factory=dict)
    constant: float = None

    kind = "C"

    def evaluate(self, t, x):
        return np.broadcast_to(self.sigma(x), np.shape(x)).astype(float)

    def to_config(self):
        return {"id": self.name, **self.params}


@dataclass
class CoefficientSequence:
    """Members ``sigma_n`` of a stability study plus their limit.

    ``member(n)`` returns a coefficient of the same kind as ``limit``;
    ``eps(n)`` is the declared bound on ``sup |sigma_n - sigma|^p`` where
    ``p = eps_exponent`` (``alpha`` under condition (B), 1 under (C)).
    """

    member: object
    limit: object
    eps: object
    eps_exponent: float = 1.0
    name: str = "custom"

    @property
    def kind(self):
        return "B" if self.limit.kind == "A" else "C"

    def __getitem__(self, n):
        return self.member(n)


def solve_a_sequence(modulus, m_max, floor=1e-300):
    """Decreasing ``1 = a_0 > a_1 > ... > a_{m_max}`` with
    ``int_{a_m}^{a_{m-1}} dx / rho(x) = m``.

    Each ``a_m`` is found by bracketing root-finding on an adaptive
    quadrature of ``1/rho`` (computed in ``log x`` to resolve tiny ``a_m``).

    Raises
    ------
    CertificateError
        If the integral from ``floor`` up to ``a_{m-1}`` stays below ``m``,
        i.e. ``1/rho`` is not integrable-to-infinity at ``0+`` (in floating
        point).
    """
    m_max = int(m_max)
    if m_max < 1:
        raise ParameterError("m_max must be >= 1")
    g = lambda s: math.exp(s) / float(modulus(math.exp(s)))
    a = [1.0]
    s_floor = math.log(floor)
    for m in range(1, m_max + 1):
        s_hi = math.log(a[-1])

        def integral(s):
            val = integrate.quad(g, s, s_hi, epsabs=0.0, epsrel=1e-13, limit=200)[0]
            return val

        # walk the lower limit toward the floor until the integral exceeds m
        step, s_lo = 1.0, s_hi
        while True:
            s_lo = max(s_hi - step, s_floor)
            total = integral(s_lo)
            if total > m:
                break
            if s_lo == s_floor:
                raise CertificateError(
                    f"modulus {modulus!r} inadmissible: int_(floor)^(a_{m - 1}) 1/rho = {total:.6g} < {m}"
                )
            step *= 2.0
        s_m = optimize.brentq(lambda s: integral(s) - m, s_lo, s_hi, xtol=1e-15, rtol=1e-15, maxiter=400)
        resid = abs(integral(s_m) - m)
        if resid > 1e-8 * m:
            raise NumericalError(f"a_{m} residual {resid:.3e} exceeds 1e-8*m", achieved=resid)
        a.append(math.exp(s_m))
    return np.array(a)


def bo_a_sequence(m_max):
    """``a_m = a_{m-1} e^{-m}``: the ``1/(m x)`` cap then carries mass 2 on both sides."""
    m = np.arange(int(m_max) + 1)
    return np.exp(-m * (m + 1) / 2.0)


# ---------------------------------------------------------------- bump shape


def _ramp(s):
    # septic smoothstep, C^3 at both ends, int_0^1 = 1/2
    s = np.clip(s, 0.0, 1.0)
    return s**4 * (35.0 - 84.0 * s + 70.0 * s**2 - 20.0 * s**3)


def _dramp(s):
    s = np.clip(s, 0.0, 1.0)
    return 140.0 * s**3 * (1.0 - s) ** 3


def _d2ramp(s):
    s = np.clip(s, 0.0, 1.0)
    return 420.0 * s**2 * (1.0 - s) ** 2 * (1.0 - 2.0 * s)


def _shape(w, delta, deriv):
    """Flat-top profile on [0, 1] (ramps of width ``delta``) and derivatives."""
    p, q = w / delta, (1.0 - w) / delta
    A, B = _ramp(p), _ramp(q)
    if deriv == 0:
        return A * B
    dA, dB = _dramp(p) / delta, -_dramp(q) / delta
    if deriv == 1:
        return dA * B + A * dB
    d2A, d2B = _d2ramp(p) / delta**2, _d2ramp(q) / delta**2
    return d2A * B + 2.0 * dA * dB + A * d2B


class Mollifier:
    """Even bump ``phi_m`` on ``a_m < |x| < a_{m-1}`` under a decaying cap.

    On the positive half, with ``q = 1/rho`` (Komatsu) or ``q(x) = 1/x``
    (Belfadli-Ouknine), ``w(x) = int_x^{a_{m-1}} q / int_{a_m}^{a_{m-1}} q``
    and a flat-top C^3 profile ``G`` on ``[0, 1]``:

        phi_m(x) = c * G(w(x)) * q(x) / m

    ``c`` is pinned by the unit-mass condition and must not exceed 1 for
    ``phi_m`` to stay under the cap ``q / m``.
    """

    def __init__(self, a_lo, a_hi, m, variant, alpha, modulus=None, delta=0.25):
        if not 0 < a_lo < a_hi:
            raise ParameterError("need 0 < a_m < a_{m-1}")
        self.a_lo, self.a_hi, self.m = float(a_lo), float(a_hi), int(m)
        self.variant = variant
        self.alpha = float(alpha)
        if variant == "komatsu":
            if modulus is None:
                raise ParameterError("the Komatsu cap needs a modulus")
            self.cap_modulus = modulus
        elif variant == "bo":
            self.cap_modulus = Modulus.power(1.0, 1.0)
        else:
            raise ParameterError(f"unknown mollifier variant {variant!r}")
        self.modulus = modulus
        self.cap_mass = float(self.cap_modulus.inverse_integral(self.a_lo, self.a_hi))  # per side, times m
        ratio = self.cap_mass / self.m
        if not ratio > 0.5 * (1 + 1e-9):
            raise FeasibilityError(
                f"cap carries mass {2 * ratio:.6g} < 1 on the support; "
                f"decrease a_m so that (2/m) * int 1/rho over (a_m, a_(m-1)) exceeds 1"
            )
        self.delta = min(float(delta), 0.5 * (1.0 - 0.5 / ratio))
        self.breakpoints_pos = np.array(
            [self.a_lo, self._x_of_w(1.0 - self.delta), self._x_of_w(self.delta), self.a_hi]
        )
        self.c = 1.0
        self.c = 1.0 / self._mass()
        if self.c > 1.0 + 1e-9:
            raise FeasibilityError(f"normalization multiplier {self.c:.6g} exceeds the cap")

    def _w(self, x):
        return self.cap_modulus.inverse_integral(x, np.full_like(x, self.a_hi)) / self.cap_mass

    def _x_of_w(self, target):
        return optimize.brentq(
            lambda x: float(self._w(np.array(x))) - target, self.a_lo, self.a_hi, xtol=1e-15, rtol=1e-15
        )

    @property
    def breakpoints(self):
        """Sorted knots of both halves; ``phi_m`` is analytic between them."""
        b = self.breakpoints_pos
        return np.concatenate((-b[::-1], b))

    @property
    def support(self):
        return (self.a_lo, self.a_hi)

    def _mass(self, n=32):
        nodes, weights = panel_rule(self.breakpoints_pos, n)
        return 2.0 * float(np.sum(weights * self(nodes)))

    def integral(self):
        return self._mass()

    def cap(self, x):
        x = np.abs(np.asarray(x, dtype=float))
        return 1.0 / (self.m * self.cap_modulus(x))

    def __call__(self, x, deriv=0):
        """``phi_m`` (``deriv=0``) or its first/second derivative at ``x``."""
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        out = np.zeros_like(ax)
        inside = (ax > self.a_lo) & (ax < self.a_hi)
        if not np.any(inside):
            return out
        xs = ax[inside]
        rho = self.cap_modulus(xs)
        q = 1.0 / rho
        w = self._w(xs)
        G = _shape(w, self.delta, 0)
        k = self.c / self.m
        if deriv == 0:
            val = k * G * q
        else:
            drho = self.cap_modulus.drho(xs)
            dq = -drho / rho**2
            dw = -q / self.cap_mass
            G1 = _shape(w, self.delta, 1)
            if deriv == 1:
                val = k * (G1 * dw * q + G * dq)
                val = val * np.sign(x[inside])
            elif deriv == 2:
                d2rho = self.cap_modulus.d2rho(xs)
                d2q = (2.0 * drho**2 - rho * d2rho) / rho**3
                d2w = -dq / self.cap_mass
                G2 = _shape(w, self.delta, 2)
                val = k * (G2 * dw**2 * q + G1 * d2w * q + 2.0 * G1 * dw * dq + G * d2q)
            else:
                raise ParameterError("only derivatives 0, 1 and 2 are available")
        out[inside] = val
        return out

    def cap_usage(self, n=2000):
        """Largest ``phi_m / cap`` over a dense support grid (must be <= 1)."""
        x = np.linspace(self.a_lo, self.a_hi, n)[1:-1]
        return float(np.max(self(x) / self.cap(x)))


def build_mollifier(a_sequence, m, variant="komatsu", alpha=1.5, modulus=None, delta=0.25):
    """Build ``phi_m`` on ``(a_m, a_{m-1})`` for the chosen cap variant.

    Raises
    ------
    FeasibilityError
        If the cap cannot carry unit mass (Belfadli-Ouknine variant with
        ``(2/m) ln(a_{m-1}/a_m) <= 1``).
    """
    m = int(m)
    if m < 1 or m >= len(a_sequence):
        raise ParameterError(f"m={m} outside the built sequence (len {len(a_sequence)})")
    return Mollifier(a_sequence[m], a_sequence[m - 1], m, variant, alpha, modulus=modulus, delta=delta)


class MollifierFamily:
    """``a_m`` sequence, bumps ``phi_m`` and convolutions ``u_m`` for one ``alpha``.

    Bumps are built lazily and cached; the family is otherwise immutable.
    """

    def __init__(self, a_sequence, variant, alpha, modulus=None):
        self.a_sequence = np.asarray(a_sequence, dtype=float)
        self.a_sequence.setflags(write=False)
        self.variant = variant
        self.alpha = check_alpha(alpha)
        self.modulus = modulus
        self._phi = {}

    @classmethod
    def komatsu(cls, modulus, alpha, m_max):
        return cls(solve_a_sequence(modulus, m_max), "komatsu", alpha, modulus)

    @classmethod
    def bo(cls, alpha, m_max):
        return cls(bo_a_sequence(m_max), "bo", alpha)

    def phi(self, m):
        if m not in self._phi:
            self._phi[m] = build_mollifier(self.a_sequence, m, self.variant, self.alpha, self.modulus)
        return self._phi[m]

    def u(self, m, x, deriv=0):
        return convolve_u(self.phi(m), self.alpha, x, deriv=deriv)


# ---------------------------------------------------------------- convolution


def convolve_u(phi, alpha, x, deriv=0, n=12, chunk=256):
    """``u_m(x) = int |x - y|^(alpha-1) phi(y) dy`` (or with ``phi''``).

    ``phi`` must expose sorted ``breakpoints`` bracketing its support and be
    analytic between them.  Far from the support a fixed composite
    Gauss-Legendre rule is used; near it the panels are additionally graded
    geometrically toward ``y = x`` where the kernel is singular.  The result
    is accurate to near machine precision, well inside the 1e-8 target.
    """
    x = np.asarray(x, dtype=float)
    flat = x.ravel()
    out = np.empty_like(flat)
    B = np.asarray(phi.breakpoints, dtype=float)
    lo, hi = B[0], B[-1]
    span = hi - lo
    maxlen = float(np.max(np.diff(B)))
    e = alpha - 1.0
    dist = np.maximum(lo - flat, flat - hi)
    far = dist >= maxlen

    if np.any(far):
        nodes, weights = panel_rule(B, 2 * n)
        dens = phi(nodes, deriv) * weights
        keep = dens != 0.0
        nodes, dens = nodes[keep], dens[keep]
        idx = np.flatnonzero(far)
        for s in range(0, idx.size, 4 * chunk):
            sl = idx[s : s + 4 * chunk]
            out[sl] = (np.abs(flat[sl, None] - nodes) ** e * dens).sum(axis=1)

    idx = np.flatnonzero(~far)
    if idx.size:
        levels = int(math.ceil(16.0 / (alpha * math.log10(4.0))))
        offsets = span * 4.0 ** -np.arange(levels + 1)
        for s in range(0, idx.size, chunk):
            z = flat[idx[s : s + chunk]]
            pts = np.concatenate(
                (
                    np.broadcast_to(B, (z.size, B.size)),
                    z[:, None],
                    z[:, None] + offsets,
                    z[:, None] - offsets,
                ),
                axis=1,
            )
            pts = np.sort(np.clip(pts, lo, hi), axis=1)
            nodes, weights = panel_rule(pts, n)
            vals = phi(nodes, deriv)
            out[idx[s : s + chunk]] = (np.abs(z[:, None] - nodes) ** e * vals * weights).sum(axis=1)
    return out.reshape(x.shape) if x.ndim else float(out[0])


# ---------------------------------------------------------------- certificates


@dataclass(frozen=True)
class SamplePlan:
    """Where to probe a coefficient.

    Point samples drive bound checks; pairs ``(x, x +/- h)`` with
    log-uniform separations ``h`` drive modulus/``f`` domination.  Every
    component has its own random stream so that enlarging a count only adds
    samples.
    """

    x_range: tuple = (-5.0, 5.0)
    T: float = 1.0
    n_points: int = 10_000
    n_pairs: int = 10_000
    min_separation: float = 1e-8
    members: tuple = (1, 2, 4, 8, 16)
    seed: int = 0

    def draw(self):
        lo, hi = map(float, self.x_range)
        streams = [np.random.default_rng(s) for s in np.random.SeedSequence(self.seed).spawn(5)]
        anchors = np.unique(np.concatenate(([0.0, lo, hi], np.linspace(lo, hi, 201))))
        xs = np.concatenate((anchors, streams[0].uniform(lo, hi, self.n_points)))
        ts = np.concatenate((np.zeros(anchors.size), streams[1].uniform(0.0, self.T, self.n_points)))
        px = streams[2].uniform(lo, hi, self.n_pairs)
        logh = streams[3].uniform(math.log10(self.min_separation), math.log10(hi - lo), self.n_pairs)
        sign = np.where(streams[4].random(self.n_pairs) < 0.5, -1.0, 1.0)
        py = px + sign * 10.0**logh
        pt = streams[1].uniform(0.0, self.T, self.n_pairs)
        return xs, ts, px, py, pt


@dataclass
class CertificateReport:
    """Worst-case margins of a certificate check (negative = violated)."""

    kind: str
    margins: dict
    details: dict = field(default_factory=dict)
    tolerance: float = 1e-12

    @property
    def passed(self):
        return all(v >= -self.tolerance for v in self.margins.values())

    def failures(self):
        return {k: v for k, v in self.margins.items() if v < -self.tolerance}

    def __str__(self):
        status = "PASS" if self.passed else "FAIL"
        rows = ", ".join(f"{k}={v:.3e}" for k, v in self.margins.items())
        return f"{status} [{self.kind}] {rows}"


def _margins_A(coef, alpha, sample, prefix="", modulus=None, M=None):
    xs, ts, px, py, pt = sample
    modulus = modulus or coef.modulus
    M = coef.M1 if M is None else M
    vals = _eval_tx(coef, ts, xs)
    diff = np.abs(_eval_tx(coef, pt, px) - _eval_tx(coef, pt, py)) ** alpha
    rho = np.asarray(modulus(np.abs(px - py)), dtype=float)
    out = {
        prefix + "bound": M - float(np.max(np.abs(vals))),
        prefix + "modulus": float(np.min(rho - diff)),
    }
    usage = float(np.max(np.where(rho > 0, diff / np.where(rho > 0, rho, 1.0), 0.0)))
    return out, {prefix + "modulus_usage": usage}


def _eval_tx(coef, ts, xs):
    ts = np.asarray(ts, dtype=float)
    xs = np.asarray(xs, dtype=float)
    try:
        vals = np.asarray(coef.sigma(ts, xs), dtype=float)
        if vals.shape in (xs.shape, ()):
            return np.broadcast_to(vals, xs.shape).astype(float)
    except (TypeError, ValueError):
        pass
    out = np.empty_like(xs)
    for i, (t, x) in enumerate(zip(ts, xs)):
        out[i] = coef.evaluate(float(t), np.array([x]))[0]
    return out


def _margins_C(coef, alpha, sample, prefix="", limit=None):
    xs, _, px, py, _ = sample
    ref = limit or coef
    vals = coef.evaluate(0.0, xs)
    diff = np.abs(coef.evaluate(0.0, px) - coef.evaluate(0.0, py)) ** alpha
    fdiff = np.abs(np.asarray(ref.f(px), dtype=float) - np.asarray(ref.f(py), dtype=float))
    order = np.sort(xs)
    fvals = np.asarray(ref.f(order), dtype=float)
    out = {
        prefix + "lower": float(np.min(vals)) - ref.d,
        prefix + "upper": ref.K - float(np.max(vals)),
        prefix + "f_domination": float(np.min(fdiff - diff)),
    }
    if not prefix:
        out["d_positive"] = ref.d
        out["d_le_K"] = ref.K - ref.d
        out["f_increasing"] = float(np.min(np.diff(fvals)))
        out["f_sup"] = ref.f_sup - float(np.max(np.abs(fvals)))
    return out, {}


def check_certificate(coefficient, plan=None, alpha=1.5):
    """Probe a coefficient's structural conditions on a sample plan.

    Returns a :class:`CertificateReport` with one margin per condition;
    the report passes iff every margin is ``>= -1e-12``.  Conditions that
    cannot be sampled (uniform continuity, ``int_0+ 1/rho = infinity``) are
    not probed here; admissibility of ``rho`` is witnessed by
    :func:`solve_a_sequence`.
    """
    plan = plan or SamplePlan()
    alpha = check_alpha(alpha)
    sample = plan.draw()
    if isinstance(coefficient, CoefficientSequence):
        return _check_sequence(coefficient, plan, sample, alpha)
    if coefficient.kind == "A":
        margins, details = _margins_A(coefficient, alpha, sample)
        margins["rho_zero"] = -abs(float(coefficient.modulus(0.0)))
        grid = np.linspace(0.0, plan.x_range[1] - plan.x_range[0], 1001)
        margins["rho_increasing"] = float(np.min(np.diff(np.asarray(coefficient.modulus(grid), dtype=float))))
        return CertificateReport("A", margins, details)
    margins, details = _margins_C(coefficient, alpha, sample)
    return CertificateReport("C", margins, details)


def _check_sequence(seq, plan, sample, alpha):
    limit = seq.limit
    margins = {}
    details = {}
    eps = []
    if limit.kind == "A":
        m, d = _margins_A(limit, alpha, sample)
    else:
        m, d = _margins_C(limit, alpha, sample)
    margins.update({"limit_" + k: v for k, v in m.items()})
    details.update(d)
    xs, ts = sample[0], sample[1]
    if limit.kind == "A":
        ref = _eval_tx(limit, ts, xs)
    else:
        ref = limit.evaluate(0.0, xs)
    for n in plan.members:
        member = seq.member(n)
        tag = f"n{n}_"
        if limit.kind == "A":
            bound = getattr(member, "M1", limit.M1)
            m, d = _margins_A(member, alpha, sample, prefix=tag, modulus=limit.modulus, M=bound)
            vals = _eval_tx(member, ts, xs)
        else:
            m, d = _margins_C(member, alpha, sample, prefix=tag, limit=limit)
            vals = member.evaluate(0.0, xs)
        margins.update(m)
        details.update(d)
        e = float(seq.eps(n))
        eps.append(e)
        dist = float(np.max(np.abs(vals - ref))) ** seq.eps_exponent
        margins[tag + "sup_distance"] = e - dist
        details[tag + "sup_distance"] = dist
    if len(eps) > 1:
        margins["eps_decreasing"] = float(np.min(-np.diff(eps)))
    margins["eps_positive"] = float(min(eps))
    return CertificateReport(seq.kind, margins, details)
