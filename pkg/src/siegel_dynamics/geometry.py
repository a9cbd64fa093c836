"""Geometry of the unit ball B^N and the Siegel domain H^N.

Coordinates, the Cayley transform between the two models, the
pseudo-hyperbolic metric, horospheres and Koranyi approach regions, and the
group of Siegel automorphisms generated by boundary translations, dilations,
tangential rotations, diagonal linear maps and the 0 <-> infinity inversion.

Conventions: a Siegel point is (z, w) with z complex and w in C^(N-1),
subject to Re z > ||w||^2; its "defect" is t = Re z - ||w||^2.  The Cayley
transform used everywhere is

    ball -> Siegel:   (z, w) |-> ((1+z)/(1-z), w/(1-z))
    Siegel -> ball:   (z, w) |-> ((z-1)/(z+1), 2w/(z+1))

so the ball point (1, 0) corresponds to the Siegel point at infinity and
(-1, 0) to the Siegel point 0.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import DimensionMismatch, InvalidPoint, ModelMismatch
from .policy import DEFAULT_POLICY, NumericPolicy

Complexes = tuple[complex, ...]


def _as_tuple(values) -> Complexes:
    return tuple(complex(v) for v in np.atleast_1d(np.asarray(values, dtype=complex)))


def herm(u, v) -> complex:
    """Hermitian inner product sum_j u_j * conj(v_j)."""
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    if u.shape != v.shape:
        raise DimensionMismatch(f"inner product of shapes {u.shape} and {v.shape}")
    return complex(np.sum(u * np.conj(v)))


def sq_norm(u) -> float:
    u = np.asarray(u, dtype=complex)
    return float(np.sum(np.abs(u) ** 2))


# ---------------------------------------------------------------------------
# point types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CVector:
    """A point of C^N."""

    coords: Complexes

    def __post_init__(self):
        coords = _as_tuple(self.coords)
        if len(coords) < 1:
            raise InvalidPoint("CVector needs at least one coordinate")
        if not all(math.isfinite(c.real) and math.isfinite(c.imag) for c in coords):
            raise InvalidPoint("non-finite coordinate")
        object.__setattr__(self, "coords", coords)

    @property
    def dim(self) -> int:
        return len(self.coords)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.coords, dtype=complex)

    def norm(self) -> float:
        return math.sqrt(sq_norm(self.coords))


@dataclass(frozen=True)
class BallPoint:
    """Interior point of the unit ball, ||v|| < 1 strictly."""

    v: CVector

    def __post_init__(self):
        v = self.v if isinstance(self.v, CVector) else CVector(_as_tuple(self.v))
        if sq_norm(v.coords) >= 1.0:
            raise InvalidPoint(f"ball point with norm {v.norm()} >= 1")
        object.__setattr__(self, "v", v)

    @property
    def dim(self) -> int:
        return self.v.dim

    @property
    def array(self) -> np.ndarray:
        return self.v.array


@dataclass(frozen=True)
class SiegelPoint:
    """Point (z, w) of the Siegel domain, Re z > ||w||^2 strictly."""

    z: complex
    w: Complexes = ()

    def __post_init__(self):
        z = complex(self.z)
        w = tuple(complex(c) for c in np.atleast_1d(np.asarray(self.w, dtype=complex))) if np.size(self.w) else ()
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            raise InvalidPoint("non-finite z")
        if z.real - sq_norm(w) <= 0.0:
            raise InvalidPoint(f"defect {z.real - sq_norm(w)} <= 0: not in the Siegel domain")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "w", w)

    @property
    def dim(self) -> int:
        return 1 + len(self.w)

    @property
    def w_array(self) -> np.ndarray:
        return np.array(self.w, dtype=complex)

    @property
    def coords(self) -> Complexes:
        return (self.z,) + self.w


@dataclass(frozen=True)
class BoundaryPoint:
    """Boundary point of either model; `at_infinity` only in the Siegel model."""

    v: CVector | None = None
    at_infinity: bool = False
    model: str = "siegel"  # "ball" | "siegel"
    policy: NumericPolicy = field(default=DEFAULT_POLICY, compare=False)

    def __post_init__(self):
        if self.model not in ("ball", "siegel"):
            raise InvalidPoint(f"unknown model {self.model!r}")
        if self.at_infinity:
            if self.model != "siegel":
                raise InvalidPoint("at_infinity only exists in the Siegel model")
            return
        if self.v is None:
            raise InvalidPoint("finite boundary point needs coordinates")
        v = self.v if isinstance(self.v, CVector) else CVector(_as_tuple(self.v))
        object.__setattr__(self, "v", v)
        tol = self.policy.boundary_tol
        if self.model == "ball":
            if abs(v.norm() - 1.0) > tol:
                raise InvalidPoint(f"ball boundary point with norm {v.norm()}")
        else:
            z, w = v.coords[0], v.coords[1:]
            if abs(z.real - sq_norm(w)) > tol:
                raise InvalidPoint("Siegel boundary point with nonzero defect")

    @property
    def dim(self) -> int:
        return self.v.dim if self.v is not None else 0


Point = Union[BallPoint, SiegelPoint]


# ---------------------------------------------------------------------------
# regions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Horosphere:
    """Ball-model horosphere H(X, R) or Siegel horosphere at infinity H(t).

    Both are open: membership is a strict inequality.
    """

    model: str  # "ball" | "siegel_at_infinity"
    center: BoundaryPoint | None = None
    radius: float | None = None  # R > 0 (ball)
    level: float | None = None   # t > 0 (siegel)

    def __post_init__(self):
        if self.model == "ball":
            if self.center is None or self.center.model != "ball":
                raise InvalidPoint("ball horosphere needs a ball boundary center")
            if self.radius is None or self.radius <= 0:
                raise InvalidPoint("horosphere radius must be positive")
        elif self.model == "siegel_at_infinity":
            if self.level is None or self.level <= 0:
                raise InvalidPoint("horosphere level must be positive")
        else:
            raise InvalidPoint(f"unknown horosphere model {self.model!r}")


@dataclass(frozen=True)
class KoranyiRegion:
    """Approach region K(q, M) = {Z : |1 - (Z,q)| / (1 - ||Z||) < M}, M > 1."""

    vertex: BoundaryPoint
    amplitude: float

    def __post_init__(self):
        if self.amplitude <= 1.0:
            raise InvalidPoint("Koranyi amplitude must exceed 1")


# ---------------------------------------------------------------------------
# Cayley transform and metrics
# ---------------------------------------------------------------------------

def cayley_to_siegel(p: BallPoint) -> SiegelPoint:
    """Map a ball point through C(z, w) = ((1+z)/(1-z), w/(1-z))."""
    v = p.array
    z, w = v[0], v[1:]
    d = 1.0 - z
    return SiegelPoint((1.0 + z) / d, tuple(w / d))


def siegel_to_ball(p: SiegelPoint) -> BallPoint:
    """Inverse Cayley transform C^{-1}(z, w) = ((z-1)/(z+1), 2w/(z+1))."""
    d = p.z + 1.0
    return BallPoint(CVector(((p.z - 1.0) / d,) + tuple(2.0 * p.w_array / d)))


def siegel_inversion(p: SiegelPoint) -> SiegelPoint:
    """The automorphism (z, w) |-> (1/z, w/z), swapping 0 and infinity.

    Composing the standard Cayley transform with this inversion yields the
    alternative sign convention in which the ball point (1, 0) goes to the
    Siegel origin instead of infinity.
    """
    return SiegelPoint(1.0 / p.z, tuple(p.w_array / p.z))


def cayley_to_siegel_alt(p: BallPoint) -> SiegelPoint:
    """Alternative-convention Cayley transform (ball (1,0) -> Siegel 0)."""
    return siegel_inversion(cayley_to_siegel(p))


def defect(p: SiegelPoint) -> float:
    """t = Re z - ||w||^2 (> 0 on the domain; the horosphere height at infinity)."""
    return p.z.real - sq_norm(p.w)


def _small_dist_ball_sq(za: np.ndarray, zb: np.ndarray) -> float:
    """Cancellation-free d^2 for nearly equal ball points, from the identity

    |1 - (Z,W)|^2 - (1 - ||Z||^2)(1 - ||W||^2)
        = ||Z - W||^2 - sum_{i<j} |z_i w_j - z_j w_i|^2

    with the cross terms rewritten as z_i d_j - z_j d_i, d = W - Z, so every
    term is of order ||d||^2.
    """
    d = zb - za
    num = sq_norm(d)
    n = len(za)
    for i in range(n):
        for j in range(i + 1, n):
            num -= abs(za[i] * d[j] - za[j] * d[i]) ** 2
    den = abs(1.0 - herm(za, zb)) ** 2
    return max(0.0, num) / den


def dist_ball(a: BallPoint, b: BallPoint) -> float:
    """Pseudo-hyperbolic distance in the ball:

    d^2 = 1 - (1 - ||Z||^2)(1 - ||W||^2) / |1 - (Z, W)|^2.
    """
    if a.dim != b.dim:
        raise DimensionMismatch(f"dist_ball: dims {a.dim} != {b.dim}")
    za, zb = a.array, b.array
    num = (1.0 - sq_norm(za)) * (1.0 - sq_norm(zb))
    den = abs(1.0 - herm(za, zb)) ** 2
    d2 = 1.0 - num / den
    if d2 < 1e-12:
        # the subtraction above floors out at sqrt(eps); switch to the
        # difference-based form, accurate for nearly equal points
        d2 = _small_dist_ball_sq(za, zb)
    return math.sqrt(max(0.0, d2))


def dist_siegel(a: SiegelPoint, b: SiegelPoint) -> float:
    """Pseudo-hyperbolic distance in the Siegel domain:

    d^2 = 1 - 4 t_a t_b / |z_a + conj(z_b) - 2 <w_a, w_b>|^2.
    """
    if a.dim != b.dim:
        raise DimensionMismatch(f"dist_siegel: dims {a.dim} != {b.dim}")
    den = abs(a.z + b.z.conjugate() - 2.0 * herm(a.w_array, b.w_array)) ** 2
    d2 = 1.0 - 4.0 * defect(a) * defect(b) / den
    if d2 < 1e-12:
        d2 = _small_dist_ball_sq(siegel_to_ball(a).array, siegel_to_ball(b).array)
    return math.sqrt(max(0.0, d2))


def one_minus_sq_ball_norm(p: SiegelPoint) -> float:
    """1 - ||C^{-1}(p)||^2 = 4 t / |z + 1|^2, computed without cancellation."""
    return 4.0 * defect(p) / abs(p.z + 1.0) ** 2


def _ball_image_array(p: SiegelPoint) -> np.ndarray:
    """Ball coordinates of p without the norm check, so points within rounding
    of the sphere stay usable."""
    d = p.z + 1.0
    return np.concatenate(([(p.z - 1.0) / d], 2.0 * p.w_array / d))


def _ball_image_norm(p: SiegelPoint) -> float:
    """||C^{-1}(p)||, from the cancellation-free gap formula."""
    return math.sqrt(max(0.0, 1.0 - one_minus_sq_ball_norm(p)))


def boundary_gap(p: SiegelPoint) -> float:
    """1 - ||C^{-1}(p)|| computed stably from the defect."""
    return one_minus_sq_ball_norm(p) / (1.0 + _ball_image_norm(p))


def _boundary_ball_vector(q: BoundaryPoint) -> np.ndarray:
    """Ball-model coordinates of a boundary point (infinity -> (1, 0))."""
    if q.model == "ball":
        return q.v.array
    if q.at_infinity:
        # dim is unknowable from the point itself; caller-side helpers pass dim
        raise ModelMismatch("at_infinity has no finite ball coordinates; use helpers")
    z, w = q.v.coords[0], np.array(q.v.coords[1:], dtype=complex)
    d = z + 1.0
    return np.concatenate(([(z - 1.0) / d], 2.0 * w / d))


def julia_quotient(p: SiegelPoint, q: BoundaryPoint) -> float:
    """Horosphere quotient |1 - (Z, q)|^2 / (1 - ||Z||^2) of the ball image of p.

    At the vertex infinity this is 1/defect(p) (the horosphere H(t) at infinity
    is {defect > t}).  Evaluated from Siegel coordinates so it stays accurate
    arbitrarily close to the boundary.
    """
    if q.model == "siegel" and q.at_infinity:
        return 1.0 / defect(p)
    if q.model == "ball":
        qb = q.v.array
        zb = _ball_image_array(p)
        return abs(1.0 - herm(zb, qb)) ** 2 / one_minus_sq_ball_norm(p)
    zq, wq = q.v.coords[0], np.array(q.v.coords[1:], dtype=complex)
    s = p.z + zq.conjugate() - 2.0 * herm(p.w_array, wq)
    return abs(s) ** 2 / (defect(p) * abs(zq + 1.0) ** 2)


def koranyi_ratio(p: SiegelPoint, q: BoundaryPoint) -> float:
    """|1 - (Z, q)| / (1 - ||Z||) for the ball image of p, stable near q."""
    nb = _ball_image_norm(p)
    t = defect(p)
    if q.model == "siegel" and q.at_infinity:
        return abs(p.z + 1.0) * (1.0 + nb) / (2.0 * t)
    if q.model == "ball":
        qb = q.v.array
        zb = _ball_image_array(p)
        return abs(1.0 - herm(zb, qb)) * (1.0 + nb) / one_minus_sq_ball_norm(p)
    zq, wq = q.v.coords[0], np.array(q.v.coords[1:], dtype=complex)
    s = p.z + zq.conjugate() - 2.0 * herm(p.w_array, wq)
    return abs(s) * abs(p.z + 1.0) * (1.0 + nb) / (2.0 * t * abs(zq + 1.0))


def horosphere_contains(h: Horosphere, p: Point) -> bool:
    if h.model == "ball":
        if not isinstance(p, BallPoint):
            raise ModelMismatch("ball horosphere needs a ball point")
        zb, qb = p.array, h.center.v.array
        quot = abs(1.0 - herm(zb, qb)) ** 2 / (1.0 - sq_norm(zb))
        return quot < h.radius
    if not isinstance(p, SiegelPoint):
        raise ModelMismatch("Siegel horosphere needs a Siegel point")
    return defect(p) > h.level


def koranyi_contains(k: KoranyiRegion, p: BallPoint) -> bool:
    zb = p.array
    qb = _boundary_ball_vector(k.vertex) if not (k.vertex.model == "siegel" and k.vertex.at_infinity) else None
    if qb is None:
        qb = np.zeros(p.dim, dtype=complex)
        qb[0] = 1.0
    ratio = abs(1.0 - herm(zb, qb)) / (1.0 - p.v.norm())
    return ratio < k.amplitude


def boundary_projection(p: SiegelPoint) -> CVector:
    """Euclidean projection on the Siegel boundary: pr(z, w) = (i Im z + ||w||^2, w)."""
    return CVector((1j * p.z.imag + sq_norm(p.w),) + p.w)


def hyperbolic_ball_extremes(z: BallPoint, d: float) -> tuple[float, float]:
    """Range of Euclidean norms over the closed pseudo-hyperbolic ball of radius d.

    The ball is a Euclidean ellipsoid; its nearest and farthest points from the
    origin lie on the complex line through Z, at norms
    (||Z|| - d)/(1 - d ||Z||) (clamped at 0) and (||Z|| + d)/(1 + d ||Z||).
    """
    if not 0.0 <= d < 1.0:
        raise ValueError(f"pseudo-hyperbolic radius {d} outside [0, 1)")
    r = z.v.norm()
    lo = max(0.0, (r - d) / (1.0 - d * r))
    hi = (r + d) / (1.0 + d * r)
    return lo, hi


# ---------------------------------------------------------------------------
# Siegel automorphisms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Translation:
    """h(z, w) = (z - i y + ||w0||^2 - 2 <w, w0>, w - w0); maps (iy + ||w0||^2 + t, w0) to (t, 0)."""

    y: float
    w0: Complexes = ()

    def __post_init__(self):
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "w0", _as_tuple(self.w0) if np.size(self.w0) else ())

    def apply(self, z: complex, w: np.ndarray) -> tuple[complex, np.ndarray]:
        w0 = np.array(self.w0, dtype=complex)
        return z - 1j * self.y + sq_norm(w0) - 2.0 * herm(w, w0), w - w0

    def inverse(self) -> "Translation":
        return Translation(-self.y, tuple(-c for c in self.w0))

    def is_identity(self) -> bool:
        return self.y == 0.0 and sq_norm(self.w0) == 0.0


@dataclass(frozen=True)
class Dilation:
    """delta_t(z, w) = (z/t, w/sqrt(t)); scales defects by 1/t."""

    t: float

    def __post_init__(self):
        if self.t <= 0:
            raise InvalidPoint("dilation parameter must be positive")
        object.__setattr__(self, "t", float(self.t))

    def apply(self, z, w):
        return z / self.t, w / math.sqrt(self.t)

    def inverse(self) -> "Dilation":
        return Dilation(1.0 / self.t)

    def is_identity(self) -> bool:
        return self.t == 1.0


@dataclass(frozen=True)
class Rotation:
    """(z, w) |-> (z, Omega w) with Omega unitary diagonal."""

    omega: Complexes

    def __post_init__(self):
        om = _as_tuple(self.omega)
        if any(abs(abs(c) - 1.0) > DEFAULT_POLICY.validity_tol for c in om):
            raise InvalidPoint("rotation entries must have unit modulus")
        object.__setattr__(self, "omega", om)

    def apply(self, z, w):
        return z, np.array(self.omega, dtype=complex) * w

    def inverse(self) -> "Rotation":
        return Rotation(tuple(c.conjugate() for c in self.omega))

    def is_identity(self) -> bool:
        return all(c == 1.0 for c in self.omega)


@dataclass(frozen=True)
class LinearDiag:
    """eta(z, w) = (alpha z, Lambda w) with |Lambda_jj| = sqrt(alpha) (an automorphism)."""

    alpha: float
    lam: Complexes = ()

    def __post_init__(self):
        if self.alpha <= 0:
            raise InvalidPoint("alpha must be positive")
        lam = _as_tuple(self.lam) if np.size(self.lam) else ()
        root = math.sqrt(self.alpha)
        if any(abs(abs(c) - root) > DEFAULT_POLICY.validity_tol * max(1.0, root) for c in lam):
            raise InvalidPoint("LinearDiag automorphism needs |Lambda_jj| = sqrt(alpha)")
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "lam", lam)

    def apply(self, z, w):
        return self.alpha * z, np.array(self.lam, dtype=complex) * w

    def inverse(self) -> "LinearDiag":
        return LinearDiag(1.0 / self.alpha, tuple(1.0 / c for c in self.lam))

    def is_identity(self) -> bool:
        return self.alpha == 1.0 and all(c == 1.0 for c in self.lam)


@dataclass(frozen=True)
class Inversion:
    """sigma(z, w) = (1/z, w/z): the involution swapping 0 and infinity."""

    def apply(self, z, w):
        return 1.0 / z, w / z

    def inverse(self) -> "Inversion":
        return Inversion()

    def is_identity(self) -> bool:
        return False


Primitive = Union[Translation, Dilation, Rotation, LinearDiag, Inversion]


@dataclass(frozen=True)
class SiegelAutomorphism:
    """A composition chain of primitives, applied first-to-last."""

    chain: tuple[Primitive, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "chain", tuple(p for p in self.chain if not p.is_identity()))


IDENTITY = SiegelAutomorphism()


def build_automorphism(kind: str, **params) -> SiegelAutomorphism:
    """Build a single-primitive automorphism: kind in
    {"translation", "dilation", "rotation", "linear_diag", "inversion", "identity"}."""
    kinds = {
        "translation": Translation,
        "dilation": Dilation,
        "rotation": Rotation,
        "linear_diag": LinearDiag,
        "inversion": Inversion,
    }
    if kind == "identity":
        return IDENTITY
    if kind not in kinds:
        raise InvalidPoint(f"unknown automorphism kind {kind!r}")
    return SiegelAutomorphism((kinds[kind](**params),))


def apply_automorphism(a: SiegelAutomorphism, p: SiegelPoint) -> SiegelPoint:
    z, w = p.z, p.w_array
    for prim in a.chain:
        z, w = prim.apply(z, w)
    return SiegelPoint(z, tuple(w))


def compose_automorphisms(a: SiegelAutomorphism, b: SiegelAutomorphism) -> SiegelAutomorphism:
    """Composition a after b: apply(compose(a, b), P) == apply(a, apply(b, P))."""
    return SiegelAutomorphism(b.chain + a.chain)


def invert_automorphism(a: SiegelAutomorphism) -> SiegelAutomorphism:
    return SiegelAutomorphism(tuple(p.inverse() for p in reversed(a.chain)))


def recentering_translation(q: BoundaryPoint) -> SiegelAutomorphism:
    """Translation moving a finite Siegel boundary point q to the origin."""
    if q.model != "siegel" or q.at_infinity:
        raise ModelMismatch("recentering needs a finite Siegel boundary point")
    z, w = q.v.coords[0], q.v.coords[1:]
    return build_automorphism("translation", y=z.imag, w0=w)
