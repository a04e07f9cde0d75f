"""Short Weierstrass curves over F_{p^2}: points, twists, order oracles.

Two independent order oracles live here: an exhaustive count (enforced
p <= 64) and a baby-step giant-step search over the Hasse interval that
isolates the group order by intersecting the admissible-multiple sets of
random points, with a Weil-pairing divisibility argument to break ties.
The trace engines are tested against both.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Tuple

from .errors import AmbiguousOrderError, FieldTooLargeError
from .field import FieldCtx, Fp2, legendre
from .poly import Poly


class AffinePoint(NamedTuple):
    x: Fp2
    y: Fp2
    infinity: bool = False


INFINITY = AffinePoint(Fp2(0, 0), Fp2(0, 0), True)


class Curve:
    """y^2 = x^3 + A*x + B over F_{p^2}; immutable."""

    __slots__ = ("A", "B", "ctx")

    def __init__(self, A: Fp2, B: Fp2, ctx: FieldCtx, *, check: bool = True):
        self.A = A
        self.B = B
        self.ctx = ctx
        if check and self.discriminant() == (0, 0):
            raise ValueError("singular curve: 4A^3 + 27B^2 = 0")

    def discriminant(self) -> Fp2:
        ctx = self.ctx
        return ctx.add(ctx.smul(4, ctx.mul(ctx.sqr(self.A), self.A)),
                       ctx.smul(27, ctx.sqr(self.B)))

    def j_invariant(self) -> Fp2:
        ctx = self.ctx
        a3 = ctx.mul(ctx.sqr(self.A), self.A)
        num = ctx.smul(6912, a3)  # 1728 * 4A^3
        return ctx.mul(num, ctx.inv(self.discriminant()))

    def cubic(self) -> Poly:
        """f_E = x^3 + A*x + B as a polynomial."""
        ctx = self.ctx
        return Poly([self.B, self.A, ctx.zero, ctx.one], ctx)

    def f_eval(self, x: Fp2) -> Fp2:
        ctx = self.ctx
        return ctx.add(ctx.mul(ctx.add(ctx.sqr(x), self.A), x), self.B)

    def contains(self, P: AffinePoint) -> bool:
        if P.infinity:
            return True
        return self.ctx.sqr(P.y) == self.f_eval(P.x)

    def __eq__(self, other):
        return (isinstance(other, Curve) and self.A == other.A
                and self.B == other.B and self.ctx == other.ctx)

    def __hash__(self):
        return hash((self.A, self.B, self.ctx))

    def __repr__(self):
        ctx = self.ctx
        return f"Curve(y^2 = x^3 + ({ctx.fmt(self.A)})x + ({ctx.fmt(self.B)}) over F_{ctx.p}^2)"

    def serialize(self) -> str:
        ctx = self.ctx
        return (f'{{"p": {ctx.p}, "delta": {ctx.delta}, '
                f'"A": "{ctx.fmt(self.A)}", "B": "{ctx.fmt(self.B)}"}}')


@dataclass
class TraceResult:
    """Outcome of a point count: trace, optional r, residues, cardinalities."""

    t: int
    card: int
    twist_card: int
    r: Optional[int] = None
    eps: Optional[int] = None
    d: Optional[int] = None
    residues: List[Tuple[int, int, str]] = field(default_factory=list)
    stats: Dict = field(default_factory=dict)

    def check_internal(self, p: int) -> bool:
        q = p * p
        ok = abs(self.t) <= 2 * p and self.card == q + 1 - self.t
        ok = ok and self.card + self.twist_card == 2 * (q + 1)
        if self.r is not None and self.d is not None:
            ok = ok and self.d * self.r * self.r == 2 * p + self.eps * self.t
            ok = ok and self.r * self.r * self.d <= 4 * p
        return ok


# -- point arithmetic ---------------------------------------------------------


def neg(P: AffinePoint, E: Curve) -> AffinePoint:
    if P.infinity:
        return P
    return AffinePoint(P.x, E.ctx.neg(P.y))


def add(P: AffinePoint, Q: AffinePoint, E: Curve) -> AffinePoint:
    """Chord-tangent group law."""
    if P.infinity:
        return Q
    if Q.infinity:
        return P
    ctx = E.ctx
    if P.x == Q.x:
        if ctx.add(P.y, Q.y) == (0, 0):
            return INFINITY
        num = ctx.add(ctx.smul(3, ctx.sqr(P.x)), E.A)
        den = ctx.smul(2, P.y)
    else:
        num = ctx.sub(Q.y, P.y)
        den = ctx.sub(Q.x, P.x)
    lam = ctx.mul(num, ctx.inv(den))
    x3 = ctx.sub(ctx.sub(ctx.sqr(lam), P.x), Q.x)
    y3 = ctx.sub(ctx.mul(lam, ctx.sub(P.x, x3)), P.y)
    return AffinePoint(x3, y3)


def double(P: AffinePoint, E: Curve) -> AffinePoint:
    return add(P, P, E)


def scalar_mul(k: int, P: AffinePoint, E: Curve) -> AffinePoint:
    """Signed binary ladder."""
    if k < 0:
        return scalar_mul(-k, neg(P, E), E)
    acc = INFINITY
    base = P
    while k:
        if k & 1:
            acc = add(acc, base, E)
        k >>= 1
        if k:
            base = add(base, base, E)
    return acc


def random_point(E: Curve, rng: random.Random) -> AffinePoint:
    ctx = E.ctx
    while True:
        x = ctx.rand(rng)
        fx = E.f_eval(x)
        y = ctx.sqrt(fx)
        if y is not None:
            if rng.getrandbits(1):
                y = ctx.neg(y)
            return AffinePoint(x, y)


# -- order oracles ------------------------------------------------------------


def curve_order_naive(E: Curve) -> int:
    """Exact order by exhaustive count over F_{p^2}; requires p <= 64."""
    ctx = E.ctx
    p = ctx.p
    if p > 64:
        raise FieldTooLargeError(f"naive oracle limited to p <= 64, got {p}")
    elements = [Fp2(a, b) for a in range(p) for b in range(p)]
    squares = set()
    for z in elements:
        squares.add(ctx.sqr(z))
    count = 1  # infinity
    for x in elements:
        fx = E.f_eval(x)
        if fx == (0, 0):
            count += 1
        elif fx in squares:
            count += 2
    return count


def _raw_add(x1, y1, u1, v1, x2, y2, u2, v2, A0, A1, p, delta):
    """Affine addition on raw int pairs ((x1,y1)+(u... )); hot-loop helper.

    Points are (x, y) with x = (x1, y1), y = (u1, v1); returns raw 4-tuple
    or None for infinity.
    """
    if x1 == x2 and y1 == y2:
        if (u1 + u2) % p == 0 and (v1 + v2) % p == 0:
            return None
        # tangent
        na = (3 * (x1 * x1 + delta * y1 * y1) + A0) % p
        nb = (6 * x1 * y1 + A1) % p
        da, db = 2 * u1 % p, 2 * v1 % p
    else:
        na, nb = (u2 - u1) % p, (v2 - v1) % p
        da, db = (x2 - x1) % p, (y2 - y1) % p
    nrm = (da * da - delta * db * db) % p
    inv = pow(nrm, -1, p)
    la = (na * da - delta * nb * db) * inv % p
    lb = (nb * da - na * db) * inv % p
    x3 = (la * la + delta * lb * lb - x1 - x2) % p
    y3 = (2 * la * lb - y1 - y2) % p
    dxa, dxb = (x1 - x3) % p, (y1 - y3) % p
    u3 = (la * dxa + delta * lb * dxb - u1) % p
    v3 = (la * dxb + lb * dxa - v1) % p
    return x3, y3, u3, v3


def _point_multiples_in_interval(E: Curve, P: AffinePoint, lo: int, width: int):
    """All m in [lo, lo+width) with [m]P = O, by interval BSGS.

    The result is the set of multiples of ord(P) in the window.  Balanced
    form: giants are spaced 2c-1 apart and each is matched against baby
    x-coordinates for both signs, so the total walk is ~sqrt(2*width) adds.
    The fixed-summand chord addition is inlined; rare equal-x steps take
    the generic path.
    """
    ctx = E.ctx
    p, delta = ctx.p, ctx.delta
    A0, A1 = E.A
    if width <= 16:
        return [m for m in range(lo, lo + width)
                if scalar_mul(m, P, E).infinity]
    c = math.isqrt(width // 2) + 1

    def raw(Q):
        return None if Q.infinity else (Q.x[0], Q.x[1], Q.y[0], Q.y[1])

    def walk(start, summand, count, visit):
        """visit(k, point) for point = start + k*summand, k in [0, count)."""
        sx, sy, su, sv = summand
        B = start
        for k in range(count):
            visit(k, B)
            if B is None:
                B = (sx, sy, su, sv)
                continue
            x1, y1, u1, v1 = B
            da, db = sx - x1, sy - y1
            if da % p == 0 and db % p == 0:
                B = _raw_add(x1, y1, u1, v1, sx, sy, su, sv, A0, A1, p, delta)
                continue
            na, nb = su - u1, sv - v1
            inv = pow((da * da - delta * db * db) % p, -1, p)
            la = (na * da - delta * nb * db) * inv % p
            lb = (nb * da - na * db) * inv % p
            x3 = (la * la + delta * lb * lb - x1 - sx) % p
            y3 = (2 * la * lb - y1 - sy) % p
            dxa, dxb = x1 - x3, y1 - y3
            B = (x3, y3,
                 (la * dxa + delta * lb * dxb - u1) % p,
                 (la * dxb + lb * dxa - v1) % p)
        return B

    # Baby table x([j]P) -> [(j, y)] for j in [1, c); [j]P = O reveals ord(P).
    baby: Dict[Tuple[int, int], List[Tuple[int, int, int]]] = {}
    tiny = []

    def record(k, B):
        if B is None:
            tiny.append(k + 1)
        elif not tiny:
            baby.setdefault((B[0], B[1]), []).append((k + 1, B[2], B[3]))

    Pr = raw(P)
    walk(Pr, Pr, c - 1, record)
    if tiny:
        o = tiny[0]
        first = lo + (-lo) % o
        return list(range(first, lo + width, o))

    # Giants at g_i = lo + (c-1) + i*(2c-1); each covers offsets [-(c-1), c-1].
    stride = 2 * c - 1
    nblocks = (width + stride - 1) // stride
    out = []
    get = baby.get

    def match(i, G):
        g = lo + (c - 1) + i * stride
        if G is None:
            if lo <= g < lo + width:
                out.append(g)
            return
        x1, y1, u1, v1 = G
        hits = get((x1, y1))
        if hits is not None:
            nu = p - u1 if u1 else 0
            nv = p - v1 if v1 else 0
            for (j, bu, bv) in hits:
                if bu == nu and bv == nv:
                    m = g + j
                    if lo <= m < lo + width:
                        out.append(m)
                if bu == u1 and bv == v1:
                    m = g - j
                    if lo <= m < lo + width:
                        out.append(m)

    G0 = raw(scalar_mul(lo + c - 1, P, E))
    step = raw(scalar_mul(stride, P, E))
    if step is None:  # ord(P) divides the stride
        o = _order_from_multiple(E, P, stride)
        first = lo + (-lo) % o
        return list(range(first, lo + width, o))
    walk(G0, step, nblocks, match)
    return sorted(set(out))


def _order_from_multiple(E: Curve, P: AffinePoint, m: int) -> int:
    """Exact order of P given [m]P = O."""
    o = m
    for f in _trial_factors(m):
        while o % f == 0 and scalar_mul(o // f, P, E).infinity:
            o //= f
    return o


def _trial_factors(m: int) -> List[int]:
    out = []
    f = 2
    while f * f <= m:
        if m % f == 0:
            out.append(f)
            while m % f == 0:
                m //= f
        f += 1
    if m > 1:
        out.append(m)
    return out


def curve_order_bsgs(E: Curve, rng: Optional[random.Random] = None,
                     max_points: int = 10) -> int:
    """Exact group order by BSGS over the Hasse interval.

    Intersects the admissible-multiple sets of random points; if several
    candidates survive, the Weil-pairing constraint (the order divided by
    the exponent divides gcd(exponent, q-1)) breaks the tie.
    """
    ctx = E.ctx
    p = ctx.p
    if p > 1 << 48:
        raise FieldTooLargeError("BSGS oracle limited to p <= 2^48")
    if rng is None:
        rng = random.Random(0x0BF5)
    q = p * p
    lo = q + 1 - 2 * p
    width = 4 * p + 1
    candidates: Optional[List[int]] = None
    for _ in range(max_points):
        P = random_point(E, rng)
        ms = _point_multiples_in_interval(E, P, lo, width)
        if candidates is None:
            candidates = ms
        else:
            candidates = sorted(set(candidates) & set(ms))
        if len(candidates) == 1:
            return candidates[0]
        if not candidates:
            raise AmbiguousOrderError("no common order candidate; bug?")
    # Tie-break: candidates are {k * e} for the group exponent e; the group
    # is Z/n1 x Z/e with n1 = N/e dividing gcd(e, q - 1).
    diffs = [b - a for a, b in zip(candidates, candidates[1:])]
    e = 0
    for d in diffs:
        e = math.gcd(e, d)
    g = math.gcd(e, q - 1)
    viable = [N for N in candidates if N % e == 0 and g % (N // e) == 0]
    if len(viable) == 1:
        return viable[0]
    if p <= 64:
        return curve_order_naive(E)
    raise AmbiguousOrderError(f"cannot isolate order among {candidates}")


def quadratic_twist(E: Curve) -> Curve:
    """Twist by the canonical nonsquare c: y^2 = x^3 + c^2 A x + c^3 B."""
    c = canonical_nonsquare(E.ctx)
    ctx = E.ctx
    c2 = ctx.sqr(c)
    return Curve(ctx.mul(c2, E.A), ctx.mul(ctx.mul(c2, c), E.B), ctx,
                 check=False)


def canonical_nonsquare(ctx: FieldCtx) -> Fp2:
    """Deterministic nonsquare of F_{p^2}: first a + w with nonsquare norm."""
    p = ctx.p
    a = 0
    while True:
        if legendre(a * a - ctx.delta, p) == -1:
            return Fp2(a, 1)
        a += 1
