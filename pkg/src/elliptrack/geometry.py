"""Ellipse geometry: direct least-squares fitting and conic conversions.

The fit uses the numerically stable block decomposition of the direct
least-squares method: the 6x6 generalized eigenproblem is reduced to a 3x3
eigenproblem on the quadratic coefficients, with the input points
mean-centered and rescaled first so the scatter matrices stay well
conditioned.  The 3x3 eigen-solve is done in closed form (characteristic
cubic plus cross-product eigenvectors), so the module has no linear-algebra
dependency beyond plain array arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFit, NotAnEllipse, TooFewPoints

__all__ = [
    "Conic",
    "Ellipse",
    "canonical_ellipse",
    "fit_ellipse",
    "conic_to_geometric",
    "geometric_to_conic",
]


@dataclass(frozen=True)
class Ellipse:
    """Geometric ellipse: center, semi-axes and rotation of the major axis.

    ``theta`` is the angle of the major axis against the +x axis in radians,
    normalized to [0, pi).  ``a >= b > 0`` always holds.
    """

    cx: float
    cy: float
    a: float
    b: float
    theta: float

    def __post_init__(self):
        if not (self.a >= self.b > 0.0):
            raise ValueError(f"semi-axes must satisfy a >= b > 0, got a={self.a} b={self.b}")
        if not (0.0 <= self.theta < math.pi):
            raise ValueError(f"theta must lie in [0, pi), got {self.theta}")

    @property
    def major_axis(self) -> float:
        """Full major axis length (2a)."""
        return 2.0 * self.a

    @property
    def minor_axis(self) -> float:
        """Full minor axis length (2b)."""
        return 2.0 * self.b

    @property
    def area(self) -> float:
        return math.pi * self.a * self.b

    def bounding_half_extents(self) -> tuple[float, float]:
        """Half width/height of the axis-aligned bounding box."""
        c, s = math.cos(self.theta), math.sin(self.theta)
        hw = math.sqrt((self.a * c) ** 2 + (self.b * s) ** 2)
        hh = math.sqrt((self.a * s) ** 2 + (self.b * c) ** 2)
        return hw, hh

    def translated(self, dx: float, dy: float) -> "Ellipse":
        return Ellipse(self.cx + dx, self.cy + dy, self.a, self.b, self.theta)

    def scaled(self, factor: float) -> "Ellipse":
        """Scale center and axes by ``factor`` (rotation unchanged)."""
        return Ellipse(self.cx * factor, self.cy * factor,
                       self.a * factor, self.b * factor, self.theta)

    def contains_points(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        """Vectorized interior test (boundary counts as inside)."""
        c, s = math.cos(self.theta), math.sin(self.theta)
        dx = xs - self.cx
        dy = ys - self.cy
        u = dx * c + dy * s
        v = -dx * s + dy * c
        return (u / self.a) ** 2 + (v / self.b) ** 2 <= 1.0


def _normalize_theta(theta: float) -> float:
    theta = math.fmod(theta, math.pi)
    if theta < 0.0:
        theta += math.pi
    if theta >= math.pi:  # fmod edge
        theta -= math.pi
    return theta


def canonical_ellipse(cx: float, cy: float, ax1: float, ax2: float,
                      theta: float) -> Ellipse:
    """Build an Ellipse from unordered semi-axes.

    ``ax1`` lies along direction ``theta``; if it is the shorter one, the
    axes are swapped and theta rotated by 90 degrees, so the two
    parameterizations of the same ellipse map to one canonical object.
    """
    if ax1 < ax2:
        ax1, ax2 = ax2, ax1
        theta += math.pi / 2.0
    return Ellipse(cx, cy, ax1, ax2, _normalize_theta(theta))


@dataclass(frozen=True)
class Conic:
    """Conic coefficients of A x^2 + B xy + C y^2 + D x + E y + F = 0.

    Normalized so that A + C == 1 whenever A + C != 0.
    """

    A: float
    B: float
    C: float
    D: float
    E: float
    F: float

    def normalized(self) -> "Conic":
        trace = self.A + self.C
        if trace == 0.0:
            return self
        return Conic(self.A / trace, self.B / trace, self.C / trace,
                     self.D / trace, self.E / trace, self.F / trace)

    @property
    def discriminant(self) -> float:
        return self.B * self.B - 4.0 * self.A * self.C

    def is_ellipse(self) -> bool:
        return self.discriminant < 0.0

    def residual(self, xs: np.ndarray, ys: np.ndarray) -> float:
        """Mean squared algebraic residual over the given points."""
        v = (self.A * xs * xs + self.B * xs * ys + self.C * ys * ys
             + self.D * xs + self.E * ys + self.F)
        return float(np.mean(v * v))


# -- closed-form 3x3 helpers (kept dependency-free on purpose) --------------

def _solve_sym3(m: list[list[float]], rhs: list[float]) -> list[float]:
    """Solve a symmetric 3x3 system via the adjugate."""
    a, b, c = m[0]
    _, d, e = m[1]
    f = m[2][2]
    # matrix [[a,b,c],[b,d,e],[c,e,f]]
    ca = d * f - e * e
    cb = -(b * f - c * e)
    cc = b * e - c * d
    det = a * ca + b * cb + c * cc
    if det == 0.0 or not math.isfinite(det):
        raise DegenerateFit("singular scatter matrix")
    # adjugate rows
    adj = [
        [ca, cb, cc],
        [cb, a * f - c * c, -(a * e - b * c)],
        [cc, -(a * e - b * c), a * d - b * b],
    ]
    return [sum(adj[i][j] * rhs[j] for j in range(3)) / det for i in range(3)]


def _cubic_real_roots(c2: float, c1: float, c0: float) -> list[float]:
    """Real roots of x^3 + c2 x^2 + c1 x + c0 = 0 (trigonometric method)."""
    p = c1 - c2 * c2 / 3.0
    q = 2.0 * c2 ** 3 / 27.0 - c2 * c1 / 3.0 + c0
    shift = -c2 / 3.0
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    roots: list[float] = []
    if disc > 0.0:
        # one real root
        sq = math.sqrt(disc)
        u = _cbrt(-q / 2.0 + sq)
        v = _cbrt(-q / 2.0 - sq)
        roots.append(u + v + shift)
    elif p == 0.0 and q == 0.0:
        roots.append(shift)
    else:
        # three real roots
        r = math.sqrt(-p * p * p / 27.0)
        phi = math.acos(max(-1.0, min(1.0, -q / (2.0 * r))))
        m = 2.0 * math.sqrt(-p / 3.0)
        for k in range(3):
            roots.append(m * math.cos((phi + 2.0 * math.pi * k) / 3.0) + shift)
    return roots


def _cbrt(x: float) -> float:
    return math.copysign(abs(x) ** (1.0 / 3.0), x)


def _eigvec3(m: list[list[float]], lam: float) -> list[float] | None:
    """Eigenvector of a 3x3 matrix for eigenvalue ``lam`` via row cross products."""
    r = [[m[i][j] - (lam if i == j else 0.0) for j in range(3)] for i in range(3)]

    def cross(u, v):
        return [u[1] * v[2] - u[2] * v[1],
                u[2] * v[0] - u[0] * v[2],
                u[0] * v[1] - u[1] * v[0]]

    best, best_norm = None, 0.0
    for i, j in ((0, 1), (0, 2), (1, 2)):
        c = cross(r[i], r[j])
        n = math.sqrt(sum(x * x for x in c))
        if n > best_norm:
            best, best_norm = c, n
    if best is None or best_norm == 0.0:
        return None
    return [x / best_norm for x in best]


def fit_ellipse(points: np.ndarray) -> Ellipse:
    """Fit an ellipse to a point set by direct least squares.

    Minimizes the algebraic residual subject to the ellipse constraint
    4AC - B^2 = 1, then converts to geometric form.

    Args:
        points: (N, 2) array-like of (x, y) coordinates, N >= 5.

    Raises:
        TooFewPoints: fewer than 5 points.
        DegenerateFit: scatter admits no ellipse (e.g. collinear points).
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be an (N, 2) array")
    if pts.shape[0] < 5:
        raise TooFewPoints(f"need at least 5 points, got {pts.shape[0]}")

    # Normalize for conditioning: center on the mean, scale to RMS radius sqrt(2).
    mean = pts.mean(axis=0)
    centered = pts - mean
    rms = math.sqrt(float(np.mean(np.sum(centered * centered, axis=1))))
    if rms == 0.0:
        raise DegenerateFit("all points coincide")
    scale = math.sqrt(2.0) / rms
    x = centered[:, 0] * scale
    y = centered[:, 1] * scale

    # Scatter blocks: D1 = [x^2, xy, y^2], D2 = [x, y, 1].
    d1 = np.column_stack((x * x, x * y, y * y))
    d2 = np.column_stack((x, y, np.ones_like(x)))
    s1 = d1.T @ d1
    s2 = d1.T @ d2
    s3 = d2.T @ d2

    try:
        t = [_solve_sym3(s3.tolist(), (-s2.T[:, i]).tolist()) for i in range(3)]
    except DegenerateFit:
        raise DegenerateFit("degenerate point scatter") from None
    # T maps quadratic coefficients to linear ones: a2 = T a1 (columns of t).
    tm = np.array(t).T  # 3x3, tm[:, i] = solution for column i
    m = s1 + s2 @ tm
    # Premultiply by inv(C1) for constraint matrix C1 = [[0,0,2],[0,-1,0],[2,0,0]].
    red = [
        [m[2][0] / 2.0, m[2][1] / 2.0, m[2][2] / 2.0],
        [-m[1][0], -m[1][1], -m[1][2]],
        [m[0][0] / 2.0, m[0][1] / 2.0, m[0][2] / 2.0],
    ]

    trace = red[0][0] + red[1][1] + red[2][2]
    c1 = (red[0][0] * red[1][1] - red[0][1] * red[1][0]
          + red[0][0] * red[2][2] - red[0][2] * red[2][0]
          + red[1][1] * red[2][2] - red[1][2] * red[2][1])
    det = (red[0][0] * (red[1][1] * red[2][2] - red[1][2] * red[2][1])
           - red[0][1] * (red[1][0] * red[2][2] - red[1][2] * red[2][0])
           + red[0][2] * (red[1][0] * red[2][1] - red[1][1] * red[2][0]))
    roots = _cubic_real_roots(-trace, c1, -det)

    # The ellipse solution is the eigenvector with 4ac - b^2 > 0 (exactly one).
    best_vec, best_cond = None, 0.0
    for lam in roots:
        vec = _eigvec3(red, lam)
        if vec is None:
            continue
        cond = 4.0 * vec[0] * vec[2] - vec[1] * vec[1]
        if cond > best_cond:
            best_vec, best_cond = vec, cond
    if best_vec is None:
        raise DegenerateFit("no ellipse solution for this point set")

    a1 = np.array(best_vec)
    a2 = tm @ a1
    conic_n = Conic(a1[0], a1[1], a1[2], a2[0], a2[1], a2[2])

    # Undo normalization: x_n = (x - mx) * s, y_n = (y - my) * s.
    A, B, C = conic_n.A, conic_n.B, conic_n.C
    D, E, F = conic_n.D, conic_n.E, conic_n.F
    s = scale
    mx, my = float(mean[0]), float(mean[1])
    Ao = A * s * s
    Bo = B * s * s
    Co = C * s * s
    Do = -2.0 * A * s * s * mx - B * s * s * my + D * s
    Eo = -B * s * s * mx - 2.0 * C * s * s * my + E * s
    Fo = (A * s * s * mx * mx + B * s * s * mx * my + C * s * s * my * my
          - D * s * mx - E * s * my + F)
    return conic_to_geometric(Conic(Ao, Bo, Co, Do, Eo, Fo).normalized())


def conic_to_geometric(c: Conic) -> Ellipse:
    """Convert an ellipse conic to geometric center/axes/rotation form.

    Raises:
        NotAnEllipse: if the discriminant B^2 - 4AC is not negative, or the
            conic has no real elliptical solution.
    """
    if not c.is_ellipse():
        raise NotAnEllipse(f"discriminant {c.discriminant} is not negative")
    A, B, C, D, E, F = c.A, c.B, c.C, c.D, c.E, c.F
    det = 4.0 * A * C - B * B
    cx = (B * E - 2.0 * C * D) / det
    cy = (B * D - 2.0 * A * E) / det
    # Conic value at the center; axes come from -Fc / eigenvalues of the
    # quadratic part [[A, B/2], [B/2, C]].
    fc = A * cx * cx + B * cx * cy + C * cy * cy + D * cx + E * cy + F
    half_tr = (A + C) / 2.0
    delta = math.sqrt(((A - C) / 2.0) ** 2 + (B / 2.0) ** 2)
    lam1 = half_tr - delta  # smaller eigenvalue -> major axis
    lam2 = half_tr + delta
    if fc == 0.0 or lam1 * fc >= 0.0 or lam2 * fc >= 0.0:
        raise NotAnEllipse("conic has no real elliptical solution")
    a = math.sqrt(-fc / lam1)
    b = math.sqrt(-fc / lam2)
    if delta == 0.0:
        theta = 0.0  # circle: rotation arbitrary
    else:
        # Eigenvector of the smaller eigenvalue gives the major axis direction.
        theta = 0.5 * math.atan2(B, A - C)
        # atan2 form gives the axis of lam

        # depending on sign; pick the direction whose quadratic form value is lam1
        ct, st = math.cos(theta), math.sin(theta)
        q = A * ct * ct + B * ct * st + C * st * st
        if abs(q - lam1) > abs(q - lam2):
            theta += math.pi / 2.0
    return Ellipse(cx, cy, a, b, _normalize_theta(theta))


def geometric_to_conic(e: Ellipse) -> Conic:
    """Inverse of :func:`conic_to_geometric` (normalized to A + C = 1)."""
    ct, st = math.cos(e.theta), math.sin(e.theta)
    ia2 = 1.0 / (e.a * e.a)
    ib2 = 1.0 / (e.b * e.b)
    A = ct * ct * ia2 + st * st * ib2
    B = 2.0 * ct * st * (ia2 - ib2)
    C = st * st * ia2 + ct * ct * ib2
    D = -2.0 * A * e.cx - B * e.cy
    E = -B * e.cx - 2.0 * C * e.cy
    F = A * e.cx * e.cx + B * e.cx * e.cy + C * e.cy * e.cy - 1.0
    return Conic(A, B, C, D, E, F).normalized()
