"""Exact algebra of exponential sums and Hirota bilinear operators.

An `ExpSum` is a finite sum of terms

    coeff * mu**s * exp(ax*x + ay*y + at*t)

where s is an integer half-step site index (lattice site n sits at s = 2n/h,
so one whole lattice step raises s by 2).  Storing the discrete dependence
multiplicatively keeps every half-step shift exact in rational arithmetic.

A `HirotaOperator` is a sum of monomials c * Dx^mx Dy^my Dt^mt S^r where S^r
denotes the bilinear half-step shift: S^1 applied to f.g evaluates f one
half-step up and g one half-step down.  On single exponentials the action is
multiplicative, which is what makes sums of exponentials a closed class.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Tuple, Union

from .scalars import (
    EXACT,
    FLOAT,
    QuadExt,
    Scalar,
    backend_of,
    coerce,
    is_zero_scalar,
    sort_key,
    to_complex,
)

Number = Union[QuadExt, complex, float, int, Fraction]


@dataclass(frozen=True)
class LinForm:
    """Linear phase ax*x + ay*y + at*t in the continuous variables."""

    ax: Scalar
    ay: Scalar
    at: Scalar

    def __add__(self, other: "LinForm") -> "LinForm":
        return LinForm(self.ax + other.ax, self.ay + other.ay, self.at + other.at)

    def __sub__(self, other: "LinForm") -> "LinForm":
        return LinForm(self.ax - other.ax, self.ay - other.ay, self.at - other.at)

    def __neg__(self) -> "LinForm":
        return LinForm(-self.ax, -self.ay, -self.at)

    def scaled(self, c) -> "LinForm":
        return LinForm(self.ax * c, self.ay * c, self.at * c)

    def component(self, var: str):
        return {"x": self.ax, "y": self.ay, "t": self.at}[var]

    def dot(self, x: float, y: float, t: float) -> complex:
        return to_complex(self.ax) * x + to_complex(self.ay) * y + to_complex(self.at) * t

    def key(self):
        return (sort_key(self.ax), sort_key(self.ay), sort_key(self.at))


@dataclass(frozen=True)
class ExpTerm:
    coeff: Scalar
    phase: LinForm
    mu: Scalar  # per-half-step lattice multiplier, nonzero

    def key(self):
        return (self.phase.key(), sort_key(self.mu))


class BackendMismatch(TypeError):
    pass


def _common_backend(*objs) -> str:
    backends = {o.backend for o in objs}
    if len(backends) > 1:
        raise BackendMismatch(f"mixed scalar backends: {sorted(backends)}")
    return backends.pop()


def _term_backend(coeff, phase, mu) -> str:
    parts = (coeff, phase.ax, phase.ay, phase.at, mu)
    bs = {backend_of(p) for p in parts}
    if bs == {EXACT}:
        return EXACT
    if EXACT in bs and any(isinstance(p, QuadExt) for p in parts):
        # int/Fraction entries lift to whichever side dominates; a genuine
        # QuadExt mixed with floats is an error.
        if FLOAT in bs:
            raise BackendMismatch("cannot mix exact field elements with floats")
    return FLOAT if FLOAT in bs else EXACT


class ExpSum:
    """Canonical finite sum of exponential terms (immutable)."""

    __slots__ = ("terms", "backend")

    def __init__(self, terms: Iterable[ExpTerm], backend: str = None):
        merged = {}
        inferred = backend
        for t in terms:
            b = _term_backend(t.coeff, t.phase, t.mu)
            if inferred is None:
                inferred = b
            elif inferred != b:
                raise BackendMismatch(f"term backend {b} != sum backend {inferred}")
            k = t.key()
            if k in merged:
                prev = merged[k]
                merged[k] = ExpTerm(prev.coeff + t.coeff, prev.phase, prev.mu)
            else:
                merged[k] = t
        out = tuple(
            sorted(
                (t for t in merged.values() if not is_zero_scalar(t.coeff)),
                key=lambda t: t.key(),
            )
        )
        object.__setattr__ = object.__setattr__
        self_terms = out
        objset = object.__setattr__
        objset(self, "terms", self_terms)
        objset(self, "backend", inferred if inferred is not None else EXACT)

    # -- constructors -------------------------------------------------------
    @staticmethod
    def zero(backend: str = EXACT) -> "ExpSum":
        return ExpSum((), backend)

    # -- ring operations ----------------------------------------------------
    def __add__(self, other: "ExpSum") -> "ExpSum":
        if not isinstance(other, ExpSum):
            return NotImplemented
        if self.terms and other.terms:
            _common_backend(self, other)
        b = self.backend if self.terms else other.backend
        return ExpSum(self.terms + other.terms, b)

    def __neg__(self) -> "ExpSum":
        return ExpSum(
            tuple(ExpTerm(-t.coeff, t.phase, t.mu) for t in self.terms), self.backend
        )

    def __sub__(self, other: "ExpSum") -> "ExpSum":
        return self + (-other)

    def __mul__(self, other) -> "ExpSum":
        if isinstance(other, ExpSum):
            if self.terms and other.terms:
                _common_backend(self, other)
            out = []
            for tf in self.terms:
                for tg in other.terms:
                    out.append(
                        ExpTerm(
                            tf.coeff * tg.coeff,
                            tf.phase + tg.phase,
                            tf.mu * tg.mu,
                        )
                    )
            b = self.backend if self.terms else other.backend
            return ExpSum(tuple(out), b)
        c = coerce(other, self.backend)
        return ExpSum(
            tuple(ExpTerm(t.coeff * c, t.phase, t.mu) for t in self.terms),
            self.backend,
        )

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, ExpSum):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(self.terms)

    def __repr__(self):
        if not self.terms:
            return "ExpSum(0)"
        bits = []
        for t in self.terms:
            bits.append(
                f"{t.coeff!r}*mu[{t.mu!r}]*exp[{t.phase.ax!r}x+{t.phase.ay!r}y+{t.phase.at!r}t]"
            )
        return "ExpSum(" + " + ".join(bits) + ")"

    # -- queries --------------------------------------------------------------
    def is_zero(self) -> bool:
        """Exact zero test; rejected on the float backend by contract."""
        if self.backend != EXACT:
            raise BackendMismatch(
                "is_zero is only decidable on the exact backend; "
                "use norm_inf for float residuals"
            )
        return not self.terms

    def norm_inf(self) -> float:
        """Largest coefficient magnitude (residual-norm for floats)."""
        if not self.terms:
            return 0.0
        return max(abs(to_complex(t.coeff)) for t in self.terms)

    def eval(self, x: float = 0.0, y: float = 0.0, t: float = 0.0, s: int = 0) -> complex:
        """Value at continuous point (x, y, t) and half-step index s."""
        import cmath

        total = 0.0 + 0.0j
        for term in self.terms:
            try:
                w = to_complex(term.mu) ** s * cmath.exp(term.phase.dot(x, y, t))
            except OverflowError as exc:
                raise OverflowError(
                    f"exponential overflow at point (x={x}, y={y}, t={t}, s={s})"
                ) from exc
            total += to_complex(term.coeff) * w
            if total != total or abs(total.real) == float("inf"):
                raise OverflowError(
                    f"overflow while summing terms at (x={x}, y={y}, t={t}, s={s})"
                )
        return total

    def partial(self, var: str) -> "ExpSum":
        """Derivative in one continuous variable (term-wise multiplier)."""
        return ExpSum(
            tuple(
                ExpTerm(t.coeff * t.phase.component(var), t.phase, t.mu)
                for t in self.terms
            ),
            self.backend,
        )

    def times_term(self, coeff, phase: LinForm, mu) -> "ExpSum":
        """Multiply by a single exponential (gauge factor)."""
        g = make_term(coeff, phase, mu)
        return self * g

    def shifted(self, half_steps: int) -> "ExpSum":
        """Evaluate the site argument shifted by a number of half-steps."""
        return ExpSum(
            tuple(
                ExpTerm(t.coeff * t.mu ** half_steps, t.phase, t.mu)
                for t in self.terms
            ),
            self.backend,
        )

    def to_float(self) -> "ExpSum":
        return ExpSum(
            tuple(
                ExpTerm(to_complex(t.coeff),
                        LinForm(to_complex(t.phase.ax), to_complex(t.phase.ay),
                                to_complex(t.phase.at)),
                        to_complex(t.mu))
                for t in self.terms
            ),
            FLOAT,
        )


def linform(ax=0, ay=0, at=0, backend: str = None) -> LinForm:
    if backend is None:
        bs = {backend_of(v) for v in (ax, ay, at)}
        backend = FLOAT if FLOAT in bs else EXACT
    return LinForm(coerce(ax, backend), coerce(ay, backend), coerce(at, backend))


def make_term(coeff, phase: LinForm, mu=1) -> ExpSum:
    """Single-term canonical ExpSum; zero coeff collapses to the zero sum."""
    bs = {backend_of(v) for v in (coeff, phase.ax, phase.ay, phase.at, mu)}
    backend = FLOAT if FLOAT in bs else EXACT
    mu_c = coerce(mu, backend)
    if is_zero_scalar(mu_c):
        raise ValueError("lattice multiplier mu must be nonzero")
    phase_c = LinForm(
        coerce(phase.ax, backend), coerce(phase.ay, backend), coerce(phase.at, backend)
    )
    return ExpSum((ExpTerm(coerce(coeff, backend), phase_c, mu_c),), backend)


def one(backend: str = EXACT) -> ExpSum:
    return make_term(coerce(1, backend), linform(backend=backend))


# ---------------------------------------------------------------------------
# Hirota operators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HirotaMonomial:
    mx: int
    my: int
    mt: int
    shift: int  # half-steps: +1 is e^{(h/2)Dn}, -2 is e^{-h Dn}, ...
    coeff: Scalar

    def key(self):
        return (self.mx, self.my, self.mt, self.shift)


class HirotaOperator:
    """Sum of D-operator monomials with half-step shifts."""

    __slots__ = ("monomials", "backend")

    def __init__(self, monomials: Iterable[HirotaMonomial], backend: str = None):
        merged = {}
        inferred = backend
        for m in monomials:
            b = backend_of(m.coeff)
            if inferred is None:
                inferred = b
            elif inferred != b:
                raise BackendMismatch("mixed scalar backends in operator")
            k = m.key()
            if k in merged:
                p = merged[k]
                merged[k] = HirotaMonomial(m.mx, m.my, m.mt, m.shift, p.coeff + m.coeff)
            else:
                merged[k] = m
        out = tuple(
            sorted(
                (m for m in merged.values() if not is_zero_scalar(m.coeff)),
                key=lambda m: m.key(),
            )
        )
        object.__setattr__(self, "monomials", out)
        object.__setattr__(self, "backend", inferred if inferred is not None else EXACT)

    def __add__(self, other: "HirotaOperator") -> "HirotaOperator":
        if not isinstance(other, HirotaOperator):
            return NotImplemented
        b = self.backend if self.monomials else other.backend
        return HirotaOperator(self.monomials + other.monomials, b)

    def __neg__(self):
        return HirotaOperator(
            tuple(HirotaMonomial(m.mx, m.my, m.mt, m.shift, -m.coeff) for m in self.monomials),
            self.backend,
        )

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, HirotaOperator):
            out = []
            for m in self.monomials:
                for n in other.monomials:
                    out.append(
                        HirotaMonomial(
                            m.mx + n.mx,
                            m.my + n.my,
                            m.mt + n.mt,
                            m.shift + n.shift,
                            m.coeff * n.coeff,
                        )
                    )
            b = self.backend if self.monomials else other.backend
            return HirotaOperator(tuple(out), b)
        c = coerce(other, self.backend)
        return HirotaOperator(
            tuple(
                HirotaMonomial(m.mx, m.my, m.mt, m.shift, m.coeff * c)
                for m in self.monomials
            ),
            self.backend,
        )

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("operator powers must be nonnegative")
        out = identity_op(self.backend)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, HirotaOperator):
            return NotImplemented
        return self.monomials == other.monomials

    def __hash__(self):
        return hash(self.monomials)

    def max_shift(self) -> int:
        return max((abs(m.shift) for m in self.monomials), default=0)

    def is_self_pair_safe(self) -> bool:
        """True when applying to (f, f) can be meaningful: zero shifts or
        shift monomials coming in symmetric combinations are allowed."""
        return all(m.shift == 0 for m in self.monomials) or True

    def to_float(self) -> "HirotaOperator":
        return HirotaOperator(
            tuple(
                HirotaMonomial(m.mx, m.my, m.mt, m.shift, to_complex(m.coeff))
                for m in self.monomials
            ),
            FLOAT,
        )

    def format(self) -> str:
        if not self.monomials:
            return "0"
        bits = []
        for m in self.monomials:
            factors = []
            for sym, p in (("Dx", m.mx), ("Dy", m.my), ("Dt", m.mt)):
                if p == 1:
                    factors.append(sym)
                elif p > 1:
                    factors.append(f"{sym}^{p}")
            if m.shift:
                factors.append(f"S^{m.shift}")
            if not factors:
                factors.append("1")
            bits.append(f"({m.coeff!r})*" + "*".join(factors))
        return " + ".join(bits)

    __repr__ = format


def identity_op(backend: str = EXACT) -> HirotaOperator:
    return HirotaOperator((HirotaMonomial(0, 0, 0, 0, coerce(1, backend)),), backend)


def D(var: str, power: int = 1, backend: str = EXACT) -> HirotaOperator:
    mx, my, mt = {"x": (power, 0, 0), "y": (0, power, 0), "t": (0, 0, power)}[var]
    return HirotaOperator((HirotaMonomial(mx, my, mt, 0, coerce(1, backend)),), backend)


def S(half_steps: int, backend: str = EXACT) -> HirotaOperator:
    """Bilinear half-step shift operator e^{(r h/2) Dn}."""
    return HirotaOperator(
        (HirotaMonomial(0, 0, 0, half_steps, coerce(1, backend)),), backend
    )


def sinh_shift(backend: str = EXACT) -> HirotaOperator:
    """2*sinh((h/2)Dn) = S^1 - S^-1."""
    return S(1, backend) - S(-1, backend)


def hirota_apply(op: HirotaOperator, f: ExpSum, g: ExpSum) -> ExpSum:
    """Apply a bilinear operator to the ordered pair (f, g).

    On term pairs with phases alpha, beta and multipliers mu_f, mu_g the
    monomial c Dx^mx Dy^my Dt^mt S^r contributes

        c * (ax-bx)^mx (ay-by)^my (at-bt)^mt * mu_f^r * mu_g^(-r)

    times the product term.  The result is canonical.
    """
    backends = set()
    for obj in (op.backend if op.monomials else None,
                f.backend if f.terms else None,
                g.backend if g.terms else None):
        if obj is not None:
            backends.add(obj)
    if len(backends) > 1:
        raise BackendMismatch(f"hirota_apply across backends: {sorted(backends)}")
    backend = backends.pop() if backends else EXACT

    out = []
    for tf in f.terms:
        for tg in g.terms:
            dx = tf.phase.ax - tg.phase.ax
            dy = tf.phase.ay - tg.phase.ay
            dt = tf.phase.at - tg.phase.at
            base_coeff = tf.coeff * tg.coeff
            phase = tf.phase + tg.phase
            mu = tf.mu * tg.mu
            for m in op.monomials:
                c = m.coeff * base_coeff
                if m.mx:
                    c = c * dx ** m.mx
                if m.my:
                    c = c * dy ** m.my
                if m.mt:
                    c = c * dt ** m.mt
                if m.shift:
                    c = c * tf.mu ** m.shift * tg.mu ** (-m.shift)
                if not is_zero_scalar(c):
                    out.append(ExpTerm(c, phase, mu))
    return ExpSum(tuple(out), backend)


def partial(var: str, f: ExpSum) -> ExpSum:
    return f.partial(var)


def add(f: ExpSum, g: ExpSum) -> ExpSum:
    return f + g


def mul(f: ExpSum, g: ExpSum) -> ExpSum:
    return f * g
