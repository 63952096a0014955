"""Named coefficients and coefficient sequences addressable from run configs.

Every entry is built from a plain dict (``{"id": ..., **params}``) and
serializes back to the same dict through ``to_config()``.
"""

import numpy as np

from .coefficients import CoefficientA, CoefficientC, CoefficientSequence, Modulus
from .driver import check_alpha
from .errors import ConfigError, ParameterError

__all__ = ["build_coefficient", "build_sequence", "COEFFICIENTS", "SEQUENCES"]


def _constant(alpha, value=1.0, form="A", d=None, K=None):
    c = float(value)
    if form == "C":
        d = c if d is None else float(d)
        K = c if K is None else float(K)
        if not 0 < d <= c <= K:
            raise ParameterError("constant (C) coefficient needs 0 < d <= value <= K")
        f = lambda x: 0.5 * (1.0 + np.tanh(x))
        return CoefficientC(lambda x: np.full(np.shape(x), c), d, K, f, 1.0, "constant",
                            {"value": c, "form": "C", "d": d, "K": K}, constant=c)
    return CoefficientA(lambda t, x: np.full(np.shape(x), c), abs(c), Modulus.power(1.0, 1.0), "constant",
                        {"value": c}, constant=c)


def _holder(alpha, base=1.0, scale=0.5, gamma=None, clip=2.0):
    """``sigma(x) = base + scale * min(|x|, clip)**gamma``.

    With ``gamma * alpha >= 1`` the modulus ``rho(h) = |scale|^alpha h^(gamma alpha)``
    dominates ``|sigma(x) - sigma(y)|^alpha`` (subadditivity of ``h -> h^gamma``)
    and ``int_0+ 1/rho = infinity``.  The default ``gamma = 1/alpha`` is the
    least regular admissible choice.
    """
    gamma = 1.0 / alpha if gamma is None else float(gamma)
    if not 0 < gamma <= 1:
        raise ParameterError("gamma must lie in (0, 1]")
    if gamma * alpha < 1 - 1e-12:
        raise ParameterError("gamma * alpha < 1 gives an inadmissible modulus")
    base, scale, clip = float(base), float(scale), float(clip)

    def sigma(t, x):
        return base + scale * np.minimum(np.abs(x), clip) ** gamma

    M1 = abs(base) + abs(scale) * clip**gamma
    mod = Modulus.power(abs(scale) ** alpha, gamma * alpha)
    return CoefficientA(sigma, M1, mod, "holder", {"base": base, "scale": scale, "gamma": gamma, "clip": clip})


def _bo_step(alpha, d=0.5, K=1.5, thresholds=(-1.0, 0.0, 1.0)):
    """Increasing staircase from ``d`` to ``K`` with jumps at ``thresholds``.

    ``f = (K - d)^(alpha - 1) sigma`` is increasing and, since every jump of
    ``sigma`` is at most ``K - d``,
    ``|sigma(x) - sigma(y)|^alpha <= (K - d)^(alpha - 1) |sigma(x) - sigma(y)|``.
    """
    d, K = float(d), float(K)
    if not 0 < d < K:
        raise ParameterError("need 0 < d < K")
    th = np.sort(np.asarray(thresholds, dtype=float))
    levels = np.linspace(d, K, th.size + 1)

    def sigma(x):
        return levels[np.searchsorted(th, np.asarray(x, dtype=float), side="right")]

    w = (K - d) ** (alpha - 1.0)
    f = lambda x: w * sigma(x)
    return CoefficientC(sigma, d, K, f, w * K, "bo-step", {"d": d, "K": K, "thresholds": [float(v) for v in th]})


def _bo_smooth(alpha, d=0.5, K=1.5, width=1.0):
    """``sigma(x) = d + (K - d)(1 + tanh(x / width)) / 2`` with ``f`` as for ``bo-step``."""
    d, K, width = float(d), float(K), float(width)
    if not 0 < d < K or not width > 0:
        raise ParameterError("need 0 < d < K and width > 0")
    sigma = lambda x: d + (K - d) * 0.5 * (1.0 + np.tanh(np.asarray(x, dtype=float) / width))
    w = (K - d) ** (alpha - 1.0)
    return CoefficientC(sigma, d, K, lambda x: w * sigma(x), w * K, "bo-smooth", {"d": d, "K": K, "width": width})


COEFFICIENTS = {
    "constant": _constant,
    "holder": _holder,
    "bo-step": _bo_step,
    "bo-smooth": _bo_smooth,
}


def build_coefficient(spec, alpha):
    """Build a catalog coefficient from ``{"id": name, **params}``."""
    alpha = check_alpha(alpha)
    if isinstance(spec, str):
        spec = {"id": spec}
    spec = dict(spec)
    name = spec.pop("id", None)
    if name not in COEFFICIENTS:
        raise ConfigError("coefficient.id", f"unknown coefficient {name!r}; choose from {sorted(COEFFICIENTS)}")
    try:
        return COEFFICIENTS[name](alpha, **spec)
    except TypeError as exc:
        raise ConfigError("coefficient", str(exc)) from None


def _shift_sequence(limit, alpha, shift=1.0):
    """(B) sequence ``sigma_n = clip(sigma + shift/n, -M1, M1)`` with ``eps_n = (shift/n)^alpha``.

    Clipping is 1-Lipschitz, so members keep the limit's modulus and bound.
    """
    if limit.kind != "A":
        raise ParameterError("shift sequences need a (t, x) coefficient")
    shift = float(shift)
    M = limit.M1

    def member(n):
        h = shift / n
        sig = lambda t, x, h=h: np.clip(limit.sigma(t, x) + h, -M, M)
        return CoefficientA(sig, M, limit.modulus, f"{limit.name}+{h:g}", {"shift": h})

    eps = lambda n: (abs(shift) / n) ** alpha
    return CoefficientSequence(member, limit, eps, alpha, f"{limit.name}-shift")


def _cap_sequence(limit, alpha, height=None):
    """(C) sequence ``sigma_n = min(sigma + h/n, K)`` with ``eps_n = h / n``.

    ``x -> min(x + c, K)`` is increasing and 1-Lipschitz, so members stay in
    ``[d, K]`` and inherit the limit's ``f``.
    """
    if limit.kind != "C":
        raise ParameterError("cap sequences need a time-homogeneous (C) coefficient")
    h = 0.5 * (limit.K - limit.d) if height is None else float(height)
    if not h > 0:
        raise ParameterError("height must be positive")

    def member(n):
        sig = lambda x, c=h / n: np.minimum(limit.sigma(x) + c, limit.K)
        return CoefficientC(sig, limit.d, limit.K, limit.f, limit.f_sup, f"{limit.name}+{h / n:g}", {})

    return CoefficientSequence(member, limit, lambda n: h / n, 1.0, f"{limit.name}-cap")


def _identity_sequence(limit, alpha):
    eps = lambda n: 1.0 / n
    return CoefficientSequence(lambda n: limit, limit, eps, alpha if limit.kind == "A" else 1.0,
                               f"{limit.name}-identity")


SEQUENCES = {"shift": _shift_sequence, "cap": _cap_sequence, "identity": _identity_sequence}


def build_sequence(spec, limit, alpha):
    """Build a coefficient sequence from ``{"id": name, **params}`` around ``limit``."""
    if isinstance(spec, str):
        spec = {"id": spec}
    spec = dict(spec)
    name = spec.pop("id", None)
    if name not in SEQUENCES:
        raise ConfigError("sequence.id", f"unknown sequence {name!r}; choose from {sorted(SEQUENCES)}")
    try:
        return SEQUENCES[name](limit, alpha, **spec)
    except TypeError as exc:
        raise ConfigError("sequence", str(exc)) from None

