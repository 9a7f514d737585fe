"""Points, lines and conics of the real projective plane over constructible reals."""

from __future__ import annotations

from functools import cmp_to_key

from .numbers import ONE, ZERO, ConstructibleReal, approx, parse_real, real, sqrt

__all__ = [
    "GeometryError",
    "CoincidentPoints",
    "CoincidentLines",
    "LineInConic",
    "DegenerateRadius",
    "InfinitePoint",
    "ConcentricCircles",
    "IdenticalCircles",
    "ParameterOutOfRange",
    "SingularMap",
    "HPoint",
    "HLine",
    "Conic",
    "ProjMap",
    "point",
    "line",
    "unit_circle",
    "LINE_AT_INFINITY",
    "join",
    "meet",
    "incident",
    "line_conic_intersections",
    "circle_from",
    "circle_circle_intersections",
    "apply_map",
    "circle_preserving_map",
    "hyperbolic_map",
    "rotation_map",
    "is_circle",
    "circle_center",
    "circle_radius_sq",
    "is_parallel",
    "parse_object",
    "intersection_order",
]


class GeometryError(ValueError):
    pass


class CoincidentPoints(GeometryError):
    pass


class CoincidentLines(GeometryError):
    pass


class LineInConic(GeometryError):
    pass


class DegenerateRadius(GeometryError):
    pass


class InfinitePoint(GeometryError):
    pass


class ConcentricCircles(GeometryError):
    pass


class IdenticalCircles(GeometryError):
    pass


class ParameterOutOfRange(GeometryError):
    pass


class SingularMap(GeometryError):
    pass


def _canonical(values):
    values = [real(v) for v in values]
    for i, v in enumerate(values):
        if v.sign() != 0:
            if v.is_rational() and v.q == 1:
                return tuple(values)
            inv = ONE / v
            return tuple(ZERO if j < i else (ONE if j == i else w * inv) for j, w in enumerate(values))
    raise GeometryError("all coordinates are zero")


def _bucket(values, bits=24):
    return tuple(int(approx(v, bits + 8).mid * (1 << bits)) for v in values)


class _Homogeneous:
    __slots__ = ("coords", "_key")
    kind = ""

    def __init__(self, *coords):
        self.coords = _canonical(coords)
        self._key = None

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return all((a - b).sign() == 0 for a, b in zip(self.coords, other.coords))

    def __ne__(self, other):
        eq = self.__eq__(other)
        return eq if eq is NotImplemented else not eq

    __hash__ = None

    def bucket(self):
        """Coarse approximate key; equal objects land in the same or an adjacent bucket."""
        if self._key is None:
            self._key = _bucket(self.coords)
        return self._key

    def __iter__(self):
        return iter(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    def to_str(self):
        return f"{self.kind} [{':'.join(c.to_str() for c in self.coords)}]"

    __str__ = to_str

    def __repr__(self):
        return f"<{self.to_str()}>"

    def floats(self):
        return tuple(float(c) for c in self.coords)


class HPoint(_Homogeneous):
    """Projective point [x:y:z]; z = 0 is a point at infinity."""

    __slots__ = ()
    kind = "point"

    @property
    def is_finite(self):
        return self.coords[2].sign() != 0

    def affine(self):
        x, y, z = self.coords
        if z.sign() == 0:
            raise InfinitePoint(f"{self} is at infinity")
        if z.is_rational() and z.q == 1:
            return x, y
        return x / z, y / z


class HLine(_Homogeneous):
    """Projective line a*x + b*y + c*z = 0."""

    __slots__ = ()
    kind = "line"

    @property
    def is_at_infinity(self):
        return self.coords[0].sign() == 0 and self.coords[1].sign() == 0

    def value_at(self, p):
        return _dot(self.coords, p.coords)


class Conic:
    """Point conic x^T M x = 0 stored as (m11, m12, m13, m22, m23, m33)."""

    __slots__ = ("entries", "_key")
    kind = "conic"

    def __init__(self, m11, m12, m13, m22, m23, m33):
        self.entries = _canonical((m11, m12, m13, m22, m23, m33))
        self._key = None

    @classmethod
    def from_matrix(cls, m):
        for i in range(3):
            for j in range(i + 1, 3):
                if (real(m[i][j]) - real(m[j][i])).sign() != 0:
                    raise GeometryError("conic matrix must be symmetric")
        return cls(m[0][0], m[0][1], m[0][2], m[1][1], m[1][2], m[2][2])

    @property
    def matrix(self):
        m11, m12, m13, m22, m23, m33 = self.entries
        return ((m11, m12, m13), (m12, m22, m23), (m13, m23, m33))

    def value_at(self, p):
        m = self.matrix
        return _dot(p.coords, [_dot(row, p.coords) for row in m])

    def __eq__(self, other):
        if not isinstance(other, Conic):
            return NotImplemented
        return all((a - b).sign() == 0 for a, b in zip(self.entries, other.entries))

    def __ne__(self, other):
        eq = self.__eq__(other)
        return eq if eq is NotImplemented else not eq

    __hash__ = None

    def bucket(self):
        if self._key is None:
            self._key = _bucket(self.entries)
        return self._key

    def to_str(self):
        m11, m12, m13, m22, m23, m33 = (e.to_str() for e in self.entries)
        return f"conic [{m11} {m12} {m13}; {m22} {m23}; {m33}]"

    __str__ = to_str

    def __repr__(self):
        return f"<{self.to_str()}>"


class ProjMap:
    """Invertible projective transformation given by a 3x3 matrix."""

    __slots__ = ("m", "_adj")

    def __init__(self, rows):
        self.m = tuple(tuple(real(v) for v in row) for row in rows)
        if len(self.m) != 3 or any(len(r) != 3 for r in self.m):
            raise ValueError("ProjMap needs a 3x3 matrix")
        if self.det().sign() == 0:
            raise SingularMap("matrix is singular")
        self._adj = None

    @classmethod
    def identity(cls):
        return cls(((1, 0, 0), (0, 1, 0), (0, 0, 1)))

    def det(self):
        (a, b, c), (d, e, f), (g, h, i) = self.m
        return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)

    def adjugate(self):
        """Adjugate matrix, a nonzero multiple of the inverse."""
        if self._adj is None:
            (a, b, c), (d, e, f), (g, h, i) = self.m
            self._adj = (
                (e * i - f * h, c * h - b * i, b * f - c * e),
                (f * g - d * i, a * i - c * g, c * d - a * f),
                (d * h - e * g, b * g - a * h, a * e - b * d),
            )
        return self._adj

    def inverse(self):
        return ProjMap(self.adjugate())

    def __matmul__(self, other):
        if not isinstance(other, ProjMap):
            return NotImplemented
        return ProjMap(_matmul(self.m, other.m))

    def __call__(self, obj):
        return apply_map(self, obj)

    def transpose(self):
        return tuple(zip(*self.m))

    def is_rational(self):
        return all(v.is_rational() for row in self.m for v in row)

    def __eq__(self, other):
        """Projective equality of matrices (equal up to a nonzero scale)."""
        if not isinstance(other, ProjMap):
            return NotImplemented
        a = _canonical([v for row in self.m for v in row])
        b = _canonical([v for row in other.m for v in row])
        return all((x - y).sign() == 0 for x, y in zip(a, b))

    __hash__ = None

    def to_str(self):
        return "map [" + "; ".join(" ".join(v.to_str() for v in row) for row in self.m) + "]"

    __str__ = to_str

    def __repr__(self):
        return f"<{self.to_str()}>"


def _dot(u, v):
    total = ZERO
    for a, b in zip(u, v):
        total = total + a * b
    return total


def _matvec(m, v):
    return [_dot(row, v) for row in m]


def _matmul(a, b):
    bt = list(zip(*b))
    return [[_dot(row, col) for col in bt] for row in a]


def _cross(u, v):
    return (
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    )


def _is_zero_vector(v):
    return all(c.sign() == 0 for c in v)


def point(x, y) -> HPoint:
    return HPoint(real(x), real(y), ONE)


def line(a, b, c) -> HLine:
    return HLine(a, b, c)


def unit_circle() -> Conic:
    return Conic(1, 0, 0, 1, 0, -1)


LINE_AT_INFINITY = HLine(0, 0, 1)


# -- incidence --------------------------------------------------------------------


def join(p: HPoint, q: HPoint) -> HLine:
    v = _cross(p.coords, q.coords)
    if _is_zero_vector(v):
        raise CoincidentPoints(f"cannot join equal points {p}")
    return HLine(*v)


def meet(l: HLine, m: HLine) -> HPoint:
    """Common point of two lines; parallel lines meet at infinity."""
    v = _cross(l.coords, m.coords)
    if _is_zero_vector(v):
        raise CoincidentLines(f"cannot meet equal lines {l}")
    return HPoint(*v)


def incident(p: HPoint, carrier) -> bool:
    return carrier.value_at(p).sign() == 0


def is_parallel(l: HLine, m: HLine) -> bool:
    """Distinct affine lines with a common point at infinity."""
    if l.is_at_infinity or m.is_at_infinity:
        return False
    v = _cross(l.coords, m.coords)
    return not _is_zero_vector(v) and v[2].sign() == 0


def _cmp_points(p, q):
    pf, qf = p.is_finite, q.is_finite
    if pf != qf:
        return -1 if pf else 1
    if pf:
        px, py = p.affine()
        qx, qy = q.affine()
        return (px - qx).sign() or (py - qy).sign()
    return (p[0] - q[0]).sign() or (p[1] - q[1]).sign()


def intersection_order(points):
    """Sort by affine (x, y); points at infinity last, ordered by direction (a, b)."""
    return sorted(points, key=cmp_to_key(_cmp_points))


def _points_on_line(l):
    a, b, c = l.coords
    if l.is_at_infinity:
        return (ONE, ZERO, ZERO), (ZERO, ONE, ZERO)
    direction = (b, -a, ZERO)
    if a.sign() != 0:
        return (-c, ZERO, a), direction
    return (ZERO, -c, b), direction


def line_conic_intersections(l: HLine, c: Conic) -> list:
    """Real common points, 0, 1 (tangency) or 2 of them, in intersection_order."""
    A, B = _points_on_line(l)
    m = c.matrix
    MA = _matvec(m, A)
    MB = _matvec(m, B)
    alpha = _dot(A, MA)
    beta = _dot(A, MB)
    gamma = _dot(B, MB)
    if alpha.sign() == 0 and beta.sign() == 0 and gamma.sign() == 0:
        raise LineInConic(f"{l} is a component of {c}")
    # points are lam*A + mu*B with alpha*lam^2 + 2*beta*lam*mu + gamma*mu^2 = 0
    if alpha.sign() == 0:
        out = [HPoint(*A)]
        if beta.sign() != 0:
            out.append(HPoint(*[-gamma * a + 2 * beta * b for a, b in zip(A, B)]))
        return intersection_order(out)
    disc = beta * beta - alpha * gamma
    s = disc.sign()
    if s < 0:
        return []
    if s == 0:
        lam = -beta / alpha
        return [HPoint(*[lam * a + b for a, b in zip(A, B)])]
    root = sqrt(disc)
    inv_alpha = ONE / alpha
    out = []
    for lam in ((-beta + root) * inv_alpha, (-beta - root) * inv_alpha):
        out.append(HPoint(*[lam * a + b for a, b in zip(A, B)]))
    return intersection_order(out)


# -- circles ----------------------------------------------------------------------


def circle_from(center: HPoint, a: HPoint, b: HPoint) -> Conic:
    """Circle about `center` with radius |ab| (compass step)."""
    for p in (center, a, b):
        if not p.is_finite:
            raise InfinitePoint(f"compass needs finite points, got {p}")
    if a == b:
        raise DegenerateRadius("radius points coincide")
    cx, cy = center.affine()
    ax, ay = a.affine()
    bx, by = b.affine()
    r2 = (ax - bx) ** 2 + (ay - by) ** 2
    return Conic(1, 0, -cx, 1, -cy, cx * cx + cy * cy - r2)


def is_circle(c: Conic) -> bool:
    m11, m12, m13, m22, m23, m33 = c.entries
    if m12.sign() != 0 or m11.sign() == 0 or (m11 - m22).sign() != 0:
        return False
    return (m13 * m13 + m23 * m23 - m11 * m33).sign() >= 0


def _circle_parts(c):
    m11, _, m13, _, m23, m33 = c.entries
    inv = ONE / m11
    return m13 * inv, m23 * inv, m33 * inv


def circle_center(c: Conic) -> HPoint:
    if not is_circle(c):
        raise GeometryError(f"{c} is not a circle")
    d, e, _ = _circle_parts(c)
    return point(-d, -e)


def circle_radius_sq(c: Conic) -> ConstructibleReal:
    if not is_circle(c):
        raise GeometryError(f"{c} is not a circle")
    d, e, f = _circle_parts(c)
    return d * d + e * e - f


def circle_circle_intersections(c1: Conic, c2: Conic) -> list:
    """Common real points of two circles via their radical axis."""
    for c in (c1, c2):
        if not is_circle(c):
            raise GeometryError(f"{c} is not a circle")
    d1, e1, f1 = _circle_parts(c1)
    d2, e2, f2 = _circle_parts(c2)
    dd, de, df = d1 - d2, e1 - e2, f1 - f2
    if dd.sign() == 0 and de.sign() == 0:
        if df.sign() == 0:
            raise IdenticalCircles("circles are identical")
        raise ConcentricCircles("circles are concentric")
    axis = HLine(2 * dd, 2 * de, df)
    return line_conic_intersections(axis, c1)


# -- transformations --------------------------------------------------------------


def apply_map(t: ProjMap, obj):
    """Points map by T, lines by adj(T)^T, conics by adj(T)^T M adj(T)."""
    if isinstance(obj, HPoint):
        return HPoint(*_matvec(t.m, obj.coords))
    adj = t.adjugate()
    adj_t = tuple(zip(*adj))
    if isinstance(obj, HLine):
        return HLine(*_matvec(adj_t, obj.coords))
    if isinstance(obj, Conic):
        mm = _matmul(_matmul(adj_t, obj.matrix), adj)
        return Conic.from_matrix(mm)
    raise TypeError(f"cannot map {type(obj).__name__}")


def hyperbolic_map(u) -> ProjMap:
    """Circle-preserving map moving the center (0,0) to (u,0)."""
    u = real(u)
    if (ONE - u * u).sign() <= 0:
        raise ParameterOutOfRange(f"need |u| < 1, got {u}")
    k = sqrt(ONE - u * u)
    return ProjMap(((1, 0, u), (0, k, 0), (u, 0, 1)))


def rotation_map(t) -> ProjMap:
    """Rotation with cos = (1-t^2)/(1+t^2), sin = 2t/(1+t^2)."""
    t = real(t)
    d = ONE / (ONE + t * t)
    c = (ONE - t * t) * d
    s = 2 * t * d
    return ProjMap(((c, -s, 0), (s, c, 0), (0, 0, 1)))


def circle_preserving_map(u, t) -> ProjMap:
    """R(t) . H(u): preserves x^2 + y^2 = z^2 and sends the center to R(t)(u, 0)."""
    return rotation_map(t) @ hyperbolic_map(u)


# -- text -------------------------------------------------------------------------


def _split_top(text, seps):
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if depth == 0 and ch in seps:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return [p.strip() for p in parts if p.strip()]


def parse_object(text: str):
    """Parse ``point [x:y:z]``, ``line [a:b:c]``, ``conic [..]``, ``map [..]`` or ``(x, y)``."""
    text = text.strip()
    if text.startswith("(") and text.endswith(")") and text.count(",") >= 1:
        parts = _split_top(text[1:-1], ",")
        if len(parts) == 2:
            return point(parse_real(parts[0]), parse_real(parts[1]))
    kind, _, rest = text.partition(" ")
    rest = rest.strip()
    if not (rest.startswith("[") and rest.endswith("]")):
        raise ValueError(f"malformed object {text!r}")
    body = rest[1:-1]
    if kind in ("point", "line"):
        parts = _split_top(body, ":")
        if len(parts) != 3:
            raise ValueError(f"{kind} needs three coordinates: {text!r}")
        vals = [parse_real(p) for p in parts]
        return HPoint(*vals) if kind == "point" else HLine(*vals)
    if kind == "conic":
        rows = [_split_top(r, " \t") for r in _split_top(body, ";")]
        if [len(r) for r in rows] != [3, 2, 1]:
            raise ValueError(f"conic needs a 3/2/1 upper triangle: {text!r}")
        vals = [parse_real(p) for row in rows for p in row]
        return Conic(*vals)
    if kind == "map":
        rows = [_split_top(r, " \t") for r in _split_top(body, ";")]
        if [len(r) for r in rows] != [3, 3, 3]:
            raise ValueError(f"map needs 3x3 entries: {text!r}")
        return ProjMap([[parse_real(p) for p in row] for row in rows])
    raise ValueError(f"unknown object kind {kind!r}")

