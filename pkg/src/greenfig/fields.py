"""Scalar and vector fields used as integrands.

Every evaluator is a pure numpy function that broadcasts over its array
arguments. Smooth entries carry their analytic curl (2D) or divergence (3D);
entries tagged ``continuous-only`` carry neither.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, ValidationError

SMOOTH = "smooth"
CONTINUOUS_ONLY = "continuous-only"


@dataclass(frozen=True)
class ScalarField2:
    fn: Callable
    name: str
    smoothness: str = SMOOTH

    def __call__(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        return np.asarray(self.fn(x, y), dtype=float) + np.zeros_like(x)


@dataclass(frozen=True)
class VectorField2:
    P: ScalarField2
    Q: ScalarField2
    name: str
    curlz: Optional[ScalarField2] = None

    def __post_init__(self):
        if self.curlz is not None and not (self.P.smoothness == self.Q.smoothness == SMOOTH):
            raise ValidationError(f"{self.name}: curl declared for a non-smooth field")

    @property
    def smoothness(self) -> str:
        return SMOOTH if self.P.smoothness == self.Q.smoothness == SMOOTH else CONTINUOUS_ONLY

    def __call__(self, x, y):
        return self.P(x, y), self.Q(x, y)


@dataclass(frozen=True)
class VectorField3:
    u: Callable
    v: Callable
    w: Callable
    name: str
    smoothness: str = SMOOTH
    divergence: Optional[Callable] = None

    def __post_init__(self):
        if self.divergence is not None and self.smoothness != SMOOTH:
            raise ValidationError(f"{self.name}: divergence declared for a non-smooth field")

    def component(self, axis: int) -> Callable:
        fn = (self.u, self.v, self.w)[axis]

        def comp(x, y, z):
            x, y, z = np.broadcast_arrays(*(np.asarray(t, dtype=float) for t in (x, y, z)))
            return np.asarray(fn(x, y, z), dtype=float) + np.zeros_like(x)
        return comp

    def __call__(self, x, y, z):
        return tuple(self.component(k)(x, y, z) for k in range(3))


def check_weierstrass_params(a: float, b: int, K: int) -> None:
    if not 0 < a < 1:
        raise DomainError(f"Weierstrass amplitude ratio must satisfy 0 < a < 1, got {a}")
    if int(b) != b or b < 3 or b % 2 == 0:
        raise DomainError(f"Weierstrass frequency ratio must be an odd integer >= 3, got {b}")
    if int(K) != K or K < 0:
        raise DomainError(f"truncation order must be a nonnegative integer, got {K}")


def weierstrass(a: float, b: int, K: int, t):
    """Partial sum ``sum_{k=0..K} a**k cos(b**k pi t)``.

    The tail beyond ``K`` is bounded by ``a**(K+1) / (1 - a)``. Arguments are
    reduced modulo 2 before the cosine, so integer ``t`` gives exact signs.
    """
    check_weierstrass_params(a, b, K)
    t = np.asarray(t, dtype=float)
    acc = np.zeros_like(t)
    for k in range(int(K) + 1):
        u = np.fmod(float(b) ** k * t, 2.0)
        acc = acc + a ** k * np.cos(np.pi * u)
    return acc if acc.ndim else float(acc)


def weierstrass_tail_bound(a: float, K: int) -> float:
    return a ** (K + 1) / (1.0 - a)


# -- catalog --------------------------------------------------------------

def _zero2(x, y):
    return np.zeros_like(x)


def const2(c1: float = 1.0, c2: float = 2.0) -> VectorField2:
    return VectorField2(ScalarField2(lambda x, y: np.full_like(x, c1), "c1"),
                        ScalarField2(lambda x, y: np.full_like(x, c2), "c2"),
                        f"const2(c1={c1!r},c2={c2!r})",
                        curlz=ScalarField2(_zero2, "0"))


def rot() -> VectorField2:
    """(-y/2, x/2); circulation around any loop is the enclosed area."""
    return VectorField2(ScalarField2(lambda x, y: -0.5 * y, "-y/2"),
                        ScalarField2(lambda x, y: 0.5 * x, "x/2"),
                        "rot", curlz=ScalarField2(lambda x, y: np.ones_like(x), "1"))


def grad() -> VectorField2:
    """Gradient of x^2 y."""
    return VectorField2(ScalarField2(lambda x, y: 2.0 * x * y, "2xy"),
                        ScalarField2(lambda x, y: x * x, "x^2"),
                        "grad", curlz=ScalarField2(_zero2, "0"))


def weier2(a: float = 0.5, b: int = 3, K: int = 30) -> VectorField2:
    """(W(y), W(x)): continuous, nowhere differentiable as K grows."""
    check_weierstrass_params(a, b, K)
    return VectorField2(
        ScalarField2(lambda x, y: weierstrass(a, b, K, y), "W(y)", CONTINUOUS_ONLY),
        ScalarField2(lambda x, y: weierstrass(a, b, K, x), "W(x)", CONTINUOUS_ONLY),
        f"weier(a={a!r},b={b!r},K={K!r})")


def const3(c1: float = 1.0, c2: float = 2.0, c3: float = 3.0) -> VectorField3:
    return VectorField3(lambda x, y, z: np.full_like(x, c1),
                        lambda x, y, z: np.full_like(x, c2),
                        lambda x, y, z: np.full_like(x, c3),
                        f"const3(c1={c1!r},c2={c2!r},c3={c3!r})",
                        divergence=lambda x, y, z: np.zeros_like(x))


def radial() -> VectorField3:
    """(x, y, z)/3, divergence 1."""
    return VectorField3(lambda x, y, z: x / 3.0, lambda x, y, z: y / 3.0,
                        lambda x, y, z: z / 3.0, "radial",
                        divergence=lambda x, y, z: np.ones_like(x))


def weier3(a: float = 0.5, b: int = 3, K: int = 30) -> VectorField3:
    """(0, 0, z (2 + W(x))): nowhere differentiable in x.

    The offset keeps ``2 + W >= 0`` so the flux through nested boxes is
    monotone, which makes inner/outer bracketing a sharp check.
    """
    check_weierstrass_params(a, b, K)
    return VectorField3(lambda x, y, z: np.zeros_like(x), lambda x, y, z: np.zeros_like(x),
                        lambda x, y, z: z * (2.0 + weierstrass(a, b, K, x)),
                        f"weier3(a={a!r},b={b!r},K={K!r})", smoothness=CONTINUOUS_ONLY)


FIELDS_2D = {"const2": const2, "const": const2, "rot": rot, "grad": grad, "weier": weier2}
FIELDS_3D = {"const3": const3, "const": const3, "radial": radial, "weier3": weier3, "weier": weier3}
_INT_PARAMS = {"b", "K"}


def catalog() -> dict:
    """Default instance of every named field."""
    out = {name: fn() for name, fn in FIELDS_2D.items() if name != "const"}
    out.update({name: fn() for name, fn in FIELDS_3D.items() if name not in ("const", "weier")})
    return out


def parse_field_spec(spec: str) -> tuple[str, dict]:
    """``"weier:a=0.5,b=3,K=30"`` -> ``("weier", {"a": 0.5, "b": 3, "K": 30})``."""
    name, _, rest = spec.strip().partition(":")
    params = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, eq, val = item.partition("=")
        if not eq:
            raise ValidationError(f"field parameter {item!r} is not key=value")
        key = key.strip()
        try:
            num = float(val)
        except ValueError:
            raise ValidationError(f"field parameter {key}={val!r} is not a number") from None
        if key in _INT_PARAMS:
            if num != int(num):
                raise ValidationError(f"field parameter {key} must be an integer")
            num = int(num)
        params[key] = num
    return name.strip().lower(), params


def field_from_spec(spec: str, dim: int = 2):
    name, params = parse_field_spec(spec)
    table = FIELDS_2D if dim == 2 else FIELDS_3D
    if name not in table:
        raise ValidationError(f"unknown {dim}D field {name!r}; choose from {sorted(table)}")
    try:
        return table[name](**params)
    except TypeError as exc:
        raise ValidationError(f"bad parameters for field {name!r}: {exc}") from None


def oscillation(values) -> float:
    """sup - inf over sampled values."""
    v = np.asarray(values, dtype=float)
    return float(v.max() - v.min()) if v.size else 0.0

