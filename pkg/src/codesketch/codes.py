"""Binary linear codes used to seed the samplers: BCH, dual BCH, Hadamard and
random codes with a prescribed dual distance."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .gf2 import (
    BitMatrix,
    DistanceTooExpensive,
    gf2_rank,
    has_dual_distance_above,
    rref,
)

# Conventional primitive polynomials over GF(2), bit i = coefficient of x^i.
PRIMITIVE_POLYNOMIALS = {
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10000011,
    8: 0b100011101,
    9: 0b1000010001,
    10: 0b10000001001,
    11: 0b100000000101,
    12: 0b1000001010011,
    13: 0b10000000011011,
    14: 0b100010001000011,
    15: 0b1000000000000011,
    16: 0b10001000000001011,
}


class CodeFamily(str, enum.Enum):
    DUAL_BCH = "dual-bch"
    BCH = "bch"
    HADAMARD = "hadamard"
    RANDOM = "random"
    CUSTOM = "custom"


@dataclass(frozen=True)
class CodeSpec:
    """Parameters of an ``[ell, r]`` binary linear code.

    ``dual_distance_lb`` and ``min_distance_lb`` are ``None`` when unknown.
    ``params`` holds the family parameters needed to rebuild the generator.
    """

    family: CodeFamily
    length: int
    dim: int
    dual_distance_lb: int | None = None
    min_distance_lb: int | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.dim > self.length:
            raise ValueError("code dimension exceeds length")
        if self.dim < 1:
            raise ValueError("code must have at least two codewords")

    @property
    def size(self) -> int:
        return 1 << self.dim


# -- GF(2)[x] helpers, polynomials as ints ---------------------------------


def poly_mul(a: int, b: int) -> int:
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def poly_divmod(a: int, b: int) -> tuple[int, int]:
    if b == 0:
        raise ZeroDivisionError("polynomial division by zero")
    db = b.bit_length() - 1
    quo = 0
    while a and a.bit_length() - 1 >= db:
        shift = a.bit_length() - 1 - db
        quo |= 1 << shift
        a ^= b << shift
    return quo, a


def poly_reverse(a: int) -> int:
    n = a.bit_length()
    return int(format(a, f"0{n}b")[::-1], 2) if a else 0


class _GF2m:
    """Arithmetic in GF(2^q) via log/antilog tables."""

    def __init__(self, q: int):
        if q not in PRIMITIVE_POLYNOMIALS:
            raise ValueError(f"no primitive polynomial tabulated for q={q} (2..16)")
        self.q = q
        self.order = (1 << q) - 1
        poly = PRIMITIVE_POLYNOMIALS[q]
        exp = [0] * (2 * self.order)
        log = [0] * (1 << q)
        x = 1
        for i in range(self.order):
            exp[i] = x
            log[x] = i
            x <<= 1
            if x >> q:
                x ^= poly
        if x != 1 or len(set(exp[: self.order])) != self.order:
            raise ValueError(f"tabulated polynomial for q={q} is not primitive")
        exp[self.order :] = exp[: self.order]
        self.exp, self.log = exp, log

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return self.exp[self.log[a] + self.log[b]]

    def cyclotomic_coset(self, i: int) -> list[int]:
        coset, j = [], i % self.order
        while j not in coset:
            coset.append(j)
            j = (2 * j) % self.order
        return coset

    def minimal_polynomial(self, i: int) -> int:
        """Minimal polynomial over GF(2) of alpha^i, returned as a bit int."""
        coeffs = [1]  # coefficients in GF(2^q), lowest degree first
        for j in self.cyclotomic_coset(i):
            root = self.exp[j]
            nxt = [0] * (len(coeffs) + 1)
            for d, c in enumerate(coeffs):
                nxt[d + 1] ^= c
                nxt[d] ^= self.mul(c, root)
            coeffs = nxt
        if any(c not in (0, 1) for c in coeffs):
            raise ArithmeticError("minimal polynomial has coefficients outside GF(2)")
        return sum(c << d for d, c in enumerate(coeffs))


def _check_bch_params(q: int, t: int):
    if not 2 <= q <= 16:
        raise ValueError(f"q must lie in 2..16, got {q}")
    if t < 1:
        raise ValueError(f"t must be >= 1, got {t}")
    if (1 << q) - 1 - t * q < 1:
        raise ValueError(f"2^q - 1 - t*q must be >= 1 (q={q}, t={t})")


def bch_generator_polynomial(q: int, t: int) -> int:
    """lcm of the minimal polynomials of alpha, ..., alpha^(2t)."""
    field_ = _GF2m(q)
    g, seen = 1, set()
    for i in range(1, 2 * t + 1):
        rep = min(field_.cyclotomic_coset(i))
        if rep not in seen:
            seen.add(rep)
            g = poly_mul(g, field_.minimal_polynomial(i))
    return g


def _cyclic_generator(poly: int, n: int) -> BitMatrix:
    deg = poly.bit_length() - 1
    return BitMatrix.from_ints((poly << i for i in range(n - deg)), n)


def bch_generator(q: int, t: int) -> tuple[BitMatrix, CodeSpec]:
    """Narrow-sense primitive BCH code of length ``2^q - 1`` and designed distance ``2t+1``.

    The dimension is ``2^q - 1 - deg g``, which equals ``2^q - 1 - t*q`` unless
    some cyclotomic coset is short.
    """
    _check_bch_params(q, t)
    n = (1 << q) - 1
    g = bch_generator_polynomial(q, t)
    G = _cyclic_generator(g, n)
    spec = CodeSpec(
        CodeFamily.BCH, n, G.nrows,
        dual_distance_lb=None,
        min_distance_lb=2 * t + 1,
        params={"q": q, "t": t},
    )
    return G, spec


def dual_bch_generator(q: int, t: int) -> tuple[BitMatrix, CodeSpec]:
    """Dual of the ``bch_generator(q, t)`` code, dimension ``deg g`` (``t*q`` generically).

    Its dual distance is the BCH distance, at least ``2t + 1``.
    """
    _check_bch_params(q, t)
    n = (1 << q) - 1
    g = bch_generator_polynomial(q, t)
    h, rem = poly_divmod((1 << n) | 1, g)
    assert rem == 0
    # Rows: shifts of the reciprocal check polynomial.
    h_rec = poly_reverse(h)
    G = _cyclic_generator(h_rec, n)
    lb = (1 << (q - 1)) - (t - 1) * math.sqrt(1 << q)
    spec = CodeSpec(
        CodeFamily.DUAL_BCH, n, G.nrows,
        dual_distance_lb=2 * t + 1,
        min_distance_lb=max(1, math.ceil(lb)),
        params={"q": q, "t": t},
    )
    return G, spec


def hadamard_code_generator(r: int, simplex: bool = False) -> tuple[BitMatrix, CodeSpec]:
    """``r x 2^r`` generator whose column ``j`` is the binary expansion of ``j``.

    After BPSK the ``2^r`` codewords are the rows of the Sylvester Hadamard
    matrix. Column 0 is identically zero, so this code has dual distance 1;
    ``simplex=True`` drops that column, giving the ``[2^r - 1, r]`` simplex
    code with dual distance 3.
    """
    if not 1 <= r <= 30:
        raise ValueError(f"r must lie in 1..30, got {r}")
    start = 1 if simplex else 0
    j = np.arange(start, 1 << r, dtype=np.int64)
    bits = ((j[None, :] >> np.arange(r)[:, None]) & 1).astype(np.uint8)
    G = BitMatrix.from_array(bits)
    if simplex and r == 1:
        dd = 2  # [1,1] code: the dual is the zero code
    else:
        dd = 3 if simplex else 1
    spec = CodeSpec(
        CodeFamily.HADAMARD, G.ncols, r,
        dual_distance_lb=dd,
        min_distance_lb=1 << (r - 1),
        params={"r": r, "simplex": simplex},
    )
    return G, spec


def random_code_with_dual_distance(
    ell: int, k: int, r: int, seed: int = 0, max_attempts: int = 10_000
) -> tuple[BitMatrix, CodeSpec]:
    """Rejection-sample a full-rank ``r x ell`` generator with dual distance ``> k``.

    Raises:
        ValueError: infeasible parameters (including the Singleton bound,
            which caps the dual distance at ``r + 1`` when ``r < ell``) or an
            exhausted attempt budget.
    """
    if not 0 <= k <= r <= ell:
        hint = ""
        if k > r and r < ell:
            hint = f"; Singleton bound: dual distance <= r + 1 = {r + 1}"
        raise ValueError(f"need 0 <= k <= r <= ell, got k={k}, r={r}, ell={ell}{hint}")
    if r < ell and k >= r + 1:
        raise ValueError(f"Singleton bound: dual distance <= r + 1 = {r + 1} <= k = {k}")
    rng = np.random.default_rng(seed)
    for attempt in range(1, max_attempts + 1):
        G = BitMatrix.from_array(rng.integers(0, 2, size=(r, ell), dtype=np.uint8))
        if gf2_rank(G) == r and has_dual_distance_above(G, k):
            spec = CodeSpec(
                CodeFamily.RANDOM, ell, r,
                dual_distance_lb=k + 1,
                params={"ell": ell, "k": k, "r": r, "seed": seed, "attempts": attempt},
            )
            return G, spec
    gv = sum(math.comb(ell, i) for i in range(k + 1))
    raise ValueError(
        f"no [{ell},{r}] code with dual distance > {k} after {max_attempts} attempts; "
        f"Gilbert-Varshamov sizing suggests about {gv} codewords (r ~ {math.log2(gv):.1f})"
    )


def custom_code(G: BitMatrix) -> tuple[BitMatrix, CodeSpec]:
    R, pivots = rref(G)
    if len(pivots) != G.nrows:
        raise ValueError("generator rows must be linearly independent")
    return G, CodeSpec(CodeFamily.CUSTOM, G.ncols, G.nrows)


def smallest_dual_bch(n: int, required_dual_distance: int = 4, q: int | None = None):
    """Smallest dual-BCH ``(q, t)`` with ``2^(t*q) >= n`` and ``2t + 1 > required``.

    ``q`` may be fixed (length ``2^q - 1``); otherwise the smallest feasible
    ``q`` is used.
    """
    t_dist = max(1, required_dual_distance // 2)
    while 2 * t_dist + 1 <= required_dual_distance:
        t_dist += 1
    for qq in ([q] if q is not None else range(2, 17)):
        t = max(t_dist, math.ceil(math.log2(max(n, 2)) / qq))
        try:
            _check_bch_params(qq, t)
        except ValueError:
            continue
        return qq, t
    raise ValueError(f"no dual-BCH code with 2^(tq) >= {n} and dual distance > "
                     f"{required_dual_distance}")


def build_code(family: str | CodeFamily, **params) -> tuple[BitMatrix, CodeSpec]:
    """Rebuild a code from its family name and parameters."""
    family = CodeFamily(family)
    if family is CodeFamily.DUAL_BCH:
        return dual_bch_generator(params["q"], params["t"])
    if family is CodeFamily.BCH:
        return bch_generator(params["q"], params["t"])
    if family is CodeFamily.HADAMARD:
        return hadamard_code_generator(params["r"], params.get("simplex", False))
    if family is CodeFamily.RANDOM:
        return random_code_with_dual_distance(
            params["ell"], params["k"], params["r"], params.get("seed", 0)
        )
    if "generator" in params:
        G = params["generator"]
        if isinstance(G, str):
            G = BitMatrix.from_text(G)
        return custom_code(G)
    raise ValueError("custom codes need an explicit generator")


__all__ = [
    "PRIMITIVE_POLYNOMIALS",
    "CodeFamily",
    "CodeSpec",
    "bch_generator",
    "bch_generator_polynomial",
    "dual_bch_generator",
    "hadamard_code_generator",
    "random_code_with_dual_distance",
    "custom_code",
    "smallest_dual_bch",
    "build_code",
    "DistanceTooExpensive",
]
