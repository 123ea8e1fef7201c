"""Generator-contraction calculus.

The contraction F(U) = e^a U e_a (sum over a, index lowered with the metric)
preserves grade and acts on grade k as the scalar lambda_k = (-1)^k (n - 2k).
Powers of F therefore give linear combinations of grade projections with a
Vandermonde coefficient matrix, which this module inverts in exact rational
arithmetic to express projections through contractions:

  even n:  pi_k(U)            = sum_l b_kl F^l(U),       B = A^-1
  odd n:   pi_k(U) + pi_{n-k}(U) = sum_l g_kl F^l(U),    G = D^-1

(odd n has the degeneracy lambda_k = lambda_{n-k}, so only the paired
projections are reachable and the full Vandermonde system is singular).

The same tables produce the connection weights used by the field-equation
solver: mu_k = 1/(n - lambda_k) where defined, and the collapsed weights
r_l = sum_k mu_k b_kl (even n) or s_l = sum_k mu_k g_kl (odd n, k up to
(n-1)/2).

Index convention: k and l are 0-based everywhere in this module, so
A[k][l] = lambda_l ** k. One-based presentations of the same tables write
a_{kl} = (lambda_{l-1})^{k-1}; entries are identical, only labels shift.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .algebra import (
    CliffordError,
    Multivector,
    Signature,
    geometric_product,
    grade_project,
)


class SingularMatrixError(CliffordError):
    """Exact elimination hit a structurally singular matrix."""


def lambdas(n: int) -> tuple[int, ...]:
    """Contraction eigenvalues lambda_k = (-1)^k (n - 2k) for k = 0..n."""
    return tuple((-1) ** k * (n - 2 * k) for k in range(n + 1))


def contract(u: Multivector) -> Multivector:
    """F(U) = sum_a e^a U e_a with e_a = eta_{ab} e^b."""
    sig = u.sig
    metric = sig.metric()
    acc = Multivector.zero(sig)
    for a in range(1, sig.n + 1):
        ea = Multivector.generator(sig, a)
        acc = acc + metric[a - 1] * geometric_product(geometric_product(ea, u), ea)
    return acc


def contract_power(u: Multivector, l: int) -> Multivector:
    """l-fold contraction F^l(U); F^0 is the identity."""
    if l < 0:
        raise CliffordError(f"contraction power must be nonnegative, got {l}")
    out = u
    for _ in range(l):
        out = contract(out)
    return out


def frame_contract(u: Multivector, vectors, metric) -> Multivector:
    """Contraction with an arbitrary vector set: sum_rho eta_rho v^rho U v^rho.

    With vectors = generators and the algebra metric this is contract(u);
    with the values of a Clifford field vector it is the h-contraction F[h].
    """
    acc = Multivector.zero(u.sig)
    for eta, v in zip(metric, vectors):
        acc = acc + eta * geometric_product(geometric_product(v, u), v)
    return acc


def invert_rational_matrix(rows: list[list[Fraction]]) -> list[list[Fraction]]:
    """Exact inverse by Gaussian elimination over Fraction entries.

    Pivots on the first nonzero entry in each column; raises
    SingularMatrixError when no pivot exists.
    """
    m = len(rows)
    aug = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(m)]
           for i, row in enumerate(rows)]
    if any(len(row) != 2 * m for row in aug):
        raise SingularMatrixError("matrix is not square")
    for col in range(m):
        pivot_row = next((r for r in range(col, m) if aug[r][col] != 0), None)
        if pivot_row is None:
            raise SingularMatrixError(f"no pivot in column {col}")
        aug[col], aug[pivot_row] = aug[pivot_row], aug[col]
        inv_pivot = 1 / aug[col][col]
        aug[col] = [x * inv_pivot for x in aug[col]]
        for r in range(m):
            if r != col and aug[r][col] != 0:
                factor = aug[r][col]
                aug[r] = [x - factor * y for x, y in zip(aug[r], aug[col])]
    return [row[m:] for row in aug]


@dataclass(frozen=True)
class ContractionTable:
    """Exact projection and connection coefficients for one dimension n.

    For even n, a and b are the (n+1)x(n+1) power matrix and its inverse;
    for odd n they are None and d/g hold the (n+1)/2-sized paired system.
    mus[k] = 1/(n - lambda_k) or None where n - lambda_k = 0 (k = 0 always;
    also k = n for odd n). weights holds r_l (even) or s_l (odd).
    """

    n: int
    lambdas: tuple[int, ...]
    a: tuple[tuple[int, ...], ...] | None
    b: tuple[tuple[Fraction, ...], ...] | None
    d: tuple[tuple[int, ...], ...] | None
    g: tuple[tuple[Fraction, ...], ...] | None
    mus: tuple[Fraction | None, ...]
    weights: tuple[Fraction, ...]

    @property
    def even(self) -> bool:
        return self.n % 2 == 0

    @property
    def max_k(self) -> int:
        """Largest valid projection label: n for even n, (n-1)/2 paired for odd."""
        return self.n if self.even else (self.n - 1) // 2

    def projector_row(self, k: int) -> tuple[Fraction, ...]:
        """Coefficients of F^0..F^L reproducing pi_k (even) or pi_{k,n-k} (odd)."""
        if not 0 <= k <= self.max_k:
            raise CliffordError(f"projection label {k} out of range 0..{self.max_k}")
        return self.b[k] if self.even else self.g[k]


@lru_cache(maxsize=None)
def build_table(n: int) -> ContractionTable:
    """Construct the exact tables for dimension n."""
    if n < 1:
        raise CliffordError(f"dimension must be >= 1, got {n}")
    lam = lambdas(n)
    mus = tuple(None if n - lk == 0 else Fraction(1, n - lk) for lk in lam)
    if n % 2 == 0:
        a_rows = [[lam[l] ** k for l in range(n + 1)] for k in range(n + 1)]
        b_rows = invert_rational_matrix([[Fraction(x) for x in row] for row in a_rows])
        weights = tuple(
            sum((mus[k] * b_rows[k][l] for k in range(1, n + 1)), Fraction(0))
            for l in range(n + 1)
        )
        return ContractionTable(
            n=n,
            lambdas=lam,
            a=tuple(tuple(row) for row in a_rows),
            b=tuple(tuple(row) for row in b_rows),
            d=None,
            g=None,
            mus=mus,
            weights=weights,
        )
    # Odd n: lambda_k = lambda_{n-k}, so use the distinct values lambda_0..
    # lambda_{(n-1)/2} and solve for the paired projections.
    half = (n + 1) // 2
    d_rows = [[lam[l] ** k for l in range(half)] for k in range(half)]
    g_rows = invert_rational_matrix([[Fraction(x) for x in row] for row in d_rows])
    weights = tuple(
        sum((mus[k] * g_rows[k][l] for k in range(1, half)), Fraction(0))
        for l in range(half)
    )
    return ContractionTable(
        n=n,
        lambdas=lam,
        a=None,
        b=None,
        d=tuple(tuple(row) for row in d_rows),
        g=tuple(tuple(row) for row in g_rows),
        mus=mus,
        weights=weights,
    )


def project_via_contractions(u: Multivector, k: int, table: ContractionTable | None = None) -> Multivector:
    """Grade projection through contraction powers alone.

    Even n: equals grade_project(u, k). Odd n: equals the paired projection
    grade_project(u, k) + grade_project(u, n - k), for k up to (n-1)/2.
    """
    n = u.sig.n
    if table is None:
        table = build_table(n)
    if table.n != n:
        raise CliffordError(f"table is for n={table.n}, element lives in n={n}")
    row = table.projector_row(k)
    acc = Multivector.zero(u.sig)
    power = u
    for l, coeff in enumerate(row):
        if l > 0:
            power = contract(power)
        if coeff != 0:
            acc = acc + float(coeff) * power
    return acc


def grade_project_paired(u: Multivector, k: int) -> Multivector:
    """Direct popcount-filter oracle for the paired projection pi_{k,n-k}."""
    n = u.sig.n
    out = grade_project(u, k)
    if k != n - k:
        out = out + grade_project(u, n - k)
    return out


def table_to_json(table: ContractionTable) -> dict:
    """JSON form with rationals as {"num": str, "den": str} to keep exactness."""
    from .algebra import fraction_to_json

    def fmat(rows):
        return None if rows is None else [[fraction_to_json(Fraction(x)) for x in row] for row in rows]

    return {
        "n": table.n,
        "parity": "even" if table.even else "odd",
        "index_convention": "k and l are 0-based; power matrix entry [k][l] equals lambda_l ** k",
        "lambdas": list(table.lambdas),
        "A": fmat(table.a),
        "B": fmat(table.b),
        "D": fmat(table.d),
        "G": fmat(table.g),
        "mus": [None if m is None else fraction_to_json(m) for m in table.mus],
        "weights_kind": "r" if table.even else "s",
        "weights": [fraction_to_json(w) for w in table.weights],
    }
