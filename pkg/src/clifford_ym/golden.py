"""Frozen reference values for the contraction tables and connection weights.

These rationals are the published small-dimension tables; they depend only
on n, never on the split (p, q). They are kept as literal Fractions so any
drift in the eigenvalue definition, the elimination code, or the weight
sums fails loudly and exactly.
"""

from __future__ import annotations

from fractions import Fraction as Fr

from .contraction import ContractionTable, build_table

F = Fr

A_N2 = (
    (1, 1, 1),
    (2, 0, -2),
    (4, 0, 4),
)

B_N2 = (
    (F(0), F(1, 4), F(1, 8)),
    (F(1), F(0), F(-1, 4)),
    (F(0), F(-1, 4), F(1, 8)),
)

D_N3 = (
    (1, 1),
    (3, -1),
)

G_N3 = (
    (F(1, 4), F(1, 4)),
    (F(3, 4), F(-1, 4)),
)

B_N4 = (
    (F(0), F(-1, 24), F(-1, 96), F(1, 96), F(1, 384)),
    (F(0), F(-1, 3), F(1, 6), F(1, 48), F(-1, 96)),
    (F(1), F(0), F(-5, 16), F(0), F(1, 64)),
    (F(0), F(1, 3), F(1, 6), F(-1, 48), F(-1, 96)),
    (F(0), F(1, 24), F(-1, 96), F(-1, 96), F(1, 384)),
)

# Collapsed connection weights: C_mu = sum_l weight_l F[h]^l((d_mu h^rho) h_rho)
R_N2 = (F(1, 2), F(-1, 16), F(-3, 32))
S_N3 = (F(3, 16), F(-1, 16))
R_N4 = (F(1, 4), F(67, 576), F(73, 2304), F(-19, 2304), F(-25, 9216))

LAMBDAS_N2 = (2, 0, -2)
LAMBDAS_N3 = (3, -1, -1, 3)
LAMBDAS_N4 = (4, -2, 0, 2, -4)


def _as_fractions(rows):
    return tuple(tuple(F(x) for x in row) for row in rows)


def compare_table(table: ContractionTable) -> list[tuple[str, bool, str]]:
    """Checks for one table; returns (check name, ok, detail) triples."""
    checks = []

    def expect(name, got, want):
        ok = got == want
        detail = "exact match" if ok else f"got {got!r}, want {want!r}"
        checks.append((name, ok, detail))

    if table.n == 2:
        expect("n=2 lambdas", table.lambdas, LAMBDAS_N2)
        expect("n=2 A", table.a, A_N2)
        expect("n=2 B", _as_fractions(table.b), B_N2)
        expect("n=2 r weights", tuple(table.weights), R_N2)
    elif table.n == 3:
        expect("n=3 lambdas", table.lambdas, LAMBDAS_N3)
        expect("n=3 D", table.d, D_N3)
        expect("n=3 G", _as_fractions(table.g), G_N3)
        expect("n=3 s weights", tuple(table.weights), S_N3)
    elif table.n == 4:
        expect("n=4 lambdas", table.lambdas, LAMBDAS_N4)
        expect("n=4 B", _as_fractions(table.b), B_N4)
        expect("n=4 r weights", tuple(table.weights), R_N4)
    else:
        checks.append((f"n={table.n}", False, "no frozen reference values for this n"))
    return checks


def run_golden_checks(tables=None) -> list[tuple[str, bool, str]]:
    """Compare freshly built (or injected) tables for n = 2, 3, 4."""
    if tables is None:
        tables = [build_table(n) for n in (2, 3, 4)]
    results = []
    for table in tables:
        results.extend(compare_table(table))
    return results
