"""Exact linear algebra for G = PSL(2, R).

Conventions used throughout the package:

* ``exp(t X) = diag(e^{t/2}, e^{-t/2})`` so the geodesic flow has unit speed.
* K is parametrized by the *boundary angle* ``beta``: the rotation
  ``[[cos(beta/2), sin(beta/2)], [-sin(beta/2), cos(beta/2)]]``.  The
  corresponding ideal point of the Poincare disk is ``exp(i beta)``.
* Iwasawa coordinates ``(beta, t_A, x_N)`` satisfy
  ``g = k(beta) exp(t_A X) n(x_N)`` with ``n(x) = [[1, x], [0, 1]]``.

Scalar objects (:class:`GroupElement`, :class:`LieVector`, ...) are thin
immutable wrappers.  The ``*_arrays`` functions take stacks of matrices of
shape ``(..., 2, 2)`` and are what the quadrature code uses.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BoundaryProximity, DegeneratePair, DomainError

TWO_PI = 2.0 * np.pi
DET_TOL = 1e-12
DEGENERATE_EPS = 1e-8


# ---------------------------------------------------------------------------
# array layer


def _canonical_sign(m):
    a = m[..., 0, 0]
    c = m[..., 1, 0]
    flip = (a < 0) | ((a == 0) & (c < 0))
    return np.where(flip[..., None, None], -m, m)


def normalize_arrays(m):
    """Rescale to unit determinant and pick the canonical sign of +-Q."""
    m = np.asarray(m, dtype=float)
    det = m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    if np.any(det <= 0):
        raise DomainError("matrix must have positive determinant")
    return _canonical_sign(m / np.sqrt(det)[..., None, None])


def rotation_arrays(beta):
    h = 0.5 * np.asarray(beta, dtype=float)
    c, s = np.cos(h), np.sin(h)
    return np.stack([np.stack([c, s], -1), np.stack([-s, c], -1)], -2)


def exp_x_arrays(t):
    t = np.asarray(t, dtype=float)
    z = np.zeros_like(t)
    return np.stack([np.stack([np.exp(0.5 * t), z], -1),
                     np.stack([z, np.exp(-0.5 * t)], -1)], -2)


def n_plus_arrays(x):
    x = np.asarray(x, dtype=float)
    o, z = np.ones_like(x), np.zeros_like(x)
    return np.stack([np.stack([o, x], -1), np.stack([z, o], -1)], -2)


def kna_arrays(beta, y, t):
    """Matrices ``k(beta) n(y) exp(t X)`` for broadcast arrays.

    This is the chart ``(B_+, y, t)`` used by the Radon transform: for fixed
    ``(beta, y)`` the element runs along one geodesic, with endpoints
    ``beta`` and ``beta + pi + 2 arctan(y)``.
    """
    beta, y, t = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (beta, y, t)))
    h = 0.5 * beta
    c, s = np.cos(h), np.sin(h)
    ep, em = np.exp(0.5 * t), np.exp(-0.5 * t)
    a = c * ep
    b = (c * y + s) * em
    cc = -s * ep
    d = (c - s * y) * em
    return np.stack([np.stack([a, b], -1), np.stack([cc, d], -1)], -2)


def kan_arrays(beta, t, x):
    """Matrices ``k(beta) exp(t X) n(x)`` (Iwasawa chart)."""
    beta, t, x = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (beta, t, x)))
    return kna_arrays(beta, x * np.exp(t), t)


def iwasawa_arrays(m):
    """Return ``(beta, t_A, x_N)`` for a stack of matrices."""
    a, b, c, d = m[..., 0, 0], m[..., 0, 1], m[..., 1, 0], m[..., 1, 1]
    r2 = a * a + c * c
    beta = np.mod(2.0 * np.arctan2(-c, a), TWO_PI)
    return beta, np.log(r2), (a * b + c * d) / r2


def rho_a_arrays(m):
    """rho(A(g)) = log(a^2 + c^2) / 2."""
    return 0.5 * np.log(m[..., 0, 0] ** 2 + m[..., 1, 0] ** 2)


def boundary_plus_arrays(m):
    return np.mod(2.0 * np.arctan2(-m[..., 1, 0], m[..., 0, 0]), TWO_PI)


def boundary_minus_arrays(m):
    # g w0 has first column (-b, -d)
    return np.mod(2.0 * np.arctan2(m[..., 1, 1], -m[..., 0, 1]), TWO_PI)


def rho_a_w0_arrays(m):
    """rho(A(g w0)) = log(b^2 + d^2) / 2."""
    return 0.5 * np.log(m[..., 0, 1] ** 2 + m[..., 1, 1] ** 2)


def halfplane_point_arrays(m):
    """g . i in the upper half-plane."""
    a, b, c, d = m[..., 0, 0], m[..., 0, 1], m[..., 1, 0], m[..., 1, 1]
    return (a * 1j + b) / (c * 1j + d)


def disk_point_arrays(m):
    return cayley(halfplane_point_arrays(m))


def boundary_action(m, beta):
    """Angle of g . exp(i beta) on the boundary circle (g given as matrix)."""
    return boundary_plus_arrays(np.asarray(m) @ rotation_arrays(beta))


def circular_distance(b1, b2):
    d = np.mod(np.asarray(b1) - np.asarray(b2), TWO_PI)
    return np.minimum(d, TWO_PI - d)


def pair_to_y(beta, beta_p):
    """N+-coordinate y with psi(k(beta) n(y) A) = (beta, beta_p)."""
    delta = np.mod(np.asarray(beta_p) - np.asarray(beta), TWO_PI)
    return np.tan(0.5 * (delta - np.pi))


def y_to_delta(y):
    return np.pi + 2.0 * np.arctan(y)


# ---------------------------------------------------------------------------
# Cayley transform and disk formulas


def cayley(z):
    z = np.asarray(z, dtype=complex)
    if np.any(z.imag <= 0):
        raise DomainError("cayley: point must lie in the upper half-plane")
    return (z - 1j) / (z + 1j)


def inverse_cayley(w):
    w = np.asarray(w, dtype=complex)
    if np.any(np.abs(w) >= 1):
        raise DomainError("inverse_cayley: point must lie in the open unit disk")
    return 1j * (1 + w) / (1 - w)


def bracket_disk(w, beta):
    """Horocycle bracket <x, b> from the disk coordinate of x."""
    w = np.asarray(w, dtype=complex)
    return 0.5 * np.log((1 - np.abs(w) ** 2) / np.abs(w - np.exp(1j * np.asarray(beta))) ** 2)


def hyperbolic_distance_disk(w1, w2):
    w1, w2 = np.asarray(w1, dtype=complex), np.asarray(w2, dtype=complex)
    q = np.abs(w1 - w2) / np.abs(1 - np.conj(w1) * w2)
    return 2.0 * np.arctanh(q)


# ---------------------------------------------------------------------------
# scalar API


@dataclass(frozen=True)
class GroupElement:
    """Element of PSL(2, R), stored as its canonical unit-determinant lift."""

    a: float
    b: float
    c: float
    d: float

    @classmethod
    def from_matrix(cls, m) -> "GroupElement":
        m = normalize_arrays(np.asarray(m, dtype=float).reshape(2, 2))
        return cls(*(float(v) for v in m.ravel()))

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return compose(self, other)

    def inverse(self) -> "GroupElement":
        return GroupElement.from_matrix([[self.d, -self.b], [-self.c, self.a]])

    def isclose(self, other: "GroupElement", tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.matrix - other.matrix)) <= tol)

    def point(self) -> complex:
        """The coset gK as a point of the disk."""
        return complex(disk_point_arrays(self.matrix))

    # constructors
    @classmethod
    def identity(cls):
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def exp_x(cls, t):
        return cls.from_matrix(exp_x_arrays(t))

    @classmethod
    def n_plus(cls, x):
        return cls.from_matrix(n_plus_arrays(x))

    @classmethod
    def n_minus(cls, x):
        return cls.from_matrix([[1.0, 0.0], [x, 1.0]])

    @classmethod
    def rotation(cls, beta):
        return cls.from_matrix(rotation_arrays(beta))

    @classmethod
    def w0(cls):
        return cls.from_matrix([[0.0, 1.0], [-1.0, 0.0]])

    @classmethod
    def random(cls, rng, scale=1.0):
        """Entries sampled from N(0, scale^2), then renormalized."""
        while True:
            m = rng.normal(scale=scale, size=(2, 2))
            det = np.linalg.det(m)
            if abs(det) > 1e-3:
                if det < 0:
                    m[:, 0] = -m[:, 0]
                return cls.from_matrix(m)


def compose(g: GroupElement, h: GroupElement) -> GroupElement:
    return GroupElement.from_matrix(g.matrix @ h.matrix)


@dataclass(frozen=True)
class LieVector:
    """Element of sl(2, R) in the orthonormal basis {X, V, X_perp}."""

    x_X: float
    x_V: float
    x_perp: float

    @classmethod
    def from_matrix(cls, m) -> "LieVector":
        m = np.asarray(m, dtype=float)
        return cls(float(m[0, 0] - m[1, 1]), float(m[0, 1] - m[1, 0]), float(m[0, 1] + m[1, 0]))

    @classmethod
    def from_root_coords(cls, x_X, u_plus, u_minus) -> "LieVector":
        """Build from coefficients over {X, U+, U-}."""
        return cls(x_X, u_plus - u_minus, u_plus + u_minus)

    @property
    def matrix(self) -> np.ndarray:
        h = 0.5 * self.x_X
        return np.array([[h, 0.5 * (self.x_V + self.x_perp)],
                         [0.5 * (self.x_perp - self.x_V), -h]])

    @property
    def root_coords(self):
        """Coefficients over {X, U+, U-}."""
        return (self.x_X, 0.5 * (self.x_V + self.x_perp), 0.5 * (self.x_perp - self.x_V))

    def norm2(self) -> float:
        return self.x_X ** 2 + self.x_V ** 2 + self.x_perp ** 2

    def as_array(self):
        return np.array([self.x_X, self.x_V, self.x_perp])


X = LieVector(1.0, 0.0, 0.0)
V = LieVector(0.0, 1.0, 0.0)
X_PERP = LieVector(0.0, 0.0, 1.0)
U_PLUS = LieVector.from_root_coords(0.0, 1.0, 0.0)
U_MINUS = LieVector.from_root_coords(0.0, 0.0, 1.0)


@dataclass(frozen=True)
class IwasawaCoords:
    beta: float  # boundary angle of kappa(g)
    t_A: float
    x_N: float

    def reconstruct(self) -> np.ndarray:
        """Canonical-sign matrix of k(beta) exp(t_A X) n(x_N)."""
        return _canonical_sign(kan_arrays(self.beta, self.t_A, self.x_N))


@dataclass(frozen=True)
class BoundaryPoint:
    angle: float

    def __post_init__(self):
        object.__setattr__(self, "angle", float(np.mod(self.angle, TWO_PI)))

    @property
    def disk(self) -> complex:
        return complex(np.exp(1j * self.angle))

    @property
    def k(self) -> GroupElement:
        return GroupElement.rotation(self.angle)


def iwasawa(g: GroupElement) -> IwasawaCoords:
    beta, t, x = iwasawa_arrays(g.matrix)
    return IwasawaCoords(float(beta), float(t), float(x))


def alpha_A(g: GroupElement) -> float:
    return float(np.log(g.a ** 2 + g.c ** 2))


def rho_A(g: GroupElement) -> float:
    return 0.5 * alpha_A(g)


def adjoint(g: GroupElement, Y: LieVector) -> LieVector:
    q = g.matrix
    qinv = np.array([[q[1, 1], -q[0, 1]], [-q[1, 0], q[0, 0]]])
    return LieVector.from_matrix(q @ Y.matrix @ qinv)


def geodesic_flow(g: GroupElement, t: float) -> GroupElement:
    return compose(g, GroupElement.exp_x(t))


def horocycle_flow(g: GroupElement, t: float, sign: int = +1) -> GroupElement:
    if sign > 0:
        return compose(g, GroupElement.n_plus(t))
    return compose(g, GroupElement.n_minus(t))


def boundary_maps(g: GroupElement):
    m = g.matrix
    return (BoundaryPoint(float(boundary_plus_arrays(m))),
            BoundaryPoint(float(boundary_minus_arrays(m))))


def psi_inverse(b: BoundaryPoint, bp: BoundaryPoint, eps: float = DEGENERATE_EPS) -> GroupElement:
    """Representative ``k(b) n(y)`` of the coset gA with endpoints (b, b')."""
    if circular_distance(b.angle, bp.angle) < eps:
        raise DegeneratePair(f"boundary points {b.angle} and {bp.angle} coincide")
    y = float(pair_to_y(b.angle, bp.angle))
    return GroupElement.from_matrix(kna_arrays(b.angle, y, 0.0))


def horocycle_bracket(x: GroupElement, b: BoundaryPoint) -> float:
    """<x, b> = -rho(A(g^{-1} k)) for x = gK, b = k."""
    return -rho_A(compose(x.inverse(), b.k))


def poisson_kernel(x, b: BoundaryPoint, model: str = "bracket", eps: float = 1e-12) -> float:
    """Poisson kernel at ``x`` (a GroupElement or a disk point)."""
    w = x.point() if isinstance(x, GroupElement) else complex(x)
    if model == "bracket":
        if isinstance(x, GroupElement):
            return float(np.exp(horocycle_bracket(x, b)))
        return float(np.exp(bracket_disk(w, b.angle)))
    if model == "disk":
        dist = abs(w - b.disk)
        if dist < eps:
            raise BoundaryProximity("x is too close to the boundary point")
        return float((1 - abs(w) ** 2) / dist ** 2)
    raise ValueError(f"unknown model {model!r}")


def bracket_arrays(m, beta):
    """Generic-path horocycle bracket -rho(A(g^{-1} k(beta))) for stacks."""
    m = np.asarray(m, dtype=float)
    a, b, c, d = m[..., 0, 0], m[..., 0, 1], m[..., 1, 0], m[..., 1, 1]
    inv = np.stack([np.stack([d, -b], -1), np.stack([-c, a], -1)], -2)
    return -rho_a_arrays(inv @ rotation_arrays(beta))


def group_from_point_arrays(w):
    """Matrices n(X) exp(log(Y) X) mapping i to the half-plane image of disk point w."""
    z = inverse_cayley(w)
    s = np.sqrt(z.imag)
    zero = np.zeros_like(s)
    return np.stack([np.stack([s, z.real / s], -1), np.stack([zero, 1.0 / s], -1)], -2)


def kernel_exponent_relation(rng, samples: int = 200) -> np.ndarray:
    """log(disk kernel) / <x, b> at random interior points.

    The bracket is evaluated through the matrix path, independently of the
    disk formula.  A constant array means the disk kernel is a fixed power of
    the bracket kernel e^{<x,b>}.
    """
    w = np.sqrt(rng.uniform(0.01, 0.8, samples)) * np.exp(1j * rng.uniform(0, TWO_PI, samples))
    beta = rng.uniform(0, TWO_PI, samples)
    disk = np.log((1 - np.abs(w) ** 2) / np.abs(w - np.exp(1j * beta)) ** 2)
    brk = bracket_arrays(group_from_point_arrays(w), beta)
    keep = np.abs(brk) > 1e-3
    return disk[keep] / brk[keep]
