"""The primitive field equation and its closed-form solution.

For a Clifford field vector h the equation

    d_mu h_rho - [C_mu, h_rho] = 0

is solved in closed form by weighting the h-grade components of
W_mu = (d_mu h^rho) h_rho:

    C_mu = sum_k mu_k pi[h]_k(W_mu),   mu_k = 1/(n - lambda_k),

summed over k = 1..n for even n and over the paired projections
k = 1..(n-1)/2 for odd n. Expanding the projections through contraction
powers collapses the same sum to C_mu = sum_l w_l F[h]^l(W_mu) with the
table weights w (r for even n, s for odd n). Both evaluation orders are
implemented and serve as mutual cross-checks.

The connection never touches the center (the k = 0 and paired (0, n)
projections are excluded), and a solving C has zero curvature:
d_mu C_nu - d_nu C_mu - [C_mu, C_nu] = 0.
"""

from __future__ import annotations

import numpy as np

from .algebra import (
    CliffordError,
    Multivector,
    Signature,
    center_leak,
    commutator,
    geometric_product,
)
from .contraction import ContractionTable, build_table
from .fields import (
    CliffordFieldVector,
    GaugeElement,
    MultivectorField,
    MvJet,
    _as_point,
    _jet_mul,
    sample_points,
)


def max_norm_grid(grid) -> float:
    """Largest coefficient magnitude across a nested list of multivectors."""
    worst = 0.0
    for row in grid:
        items = row if isinstance(row, (list, tuple)) else [row]
        for mv in items:
            worst = max(worst, mv.max_norm())
    return worst


class CovectorField:
    """n multivector fields with a lower index, evaluable with jets."""

    def __init__(self, sig: Signature):
        self.sig = sig
        self.n = sig.n

    def values(self, x) -> list[Multivector]:
        return [j.value for j in self.jets(x, 0)]

    def jets(self, x, order: int = 1) -> list[MvJet]:
        raise NotImplementedError


class ExplicitCovector(CovectorField):
    """Covector given by explicit component fields."""

    def __init__(self, fields):
        fields = list(fields)
        sig = fields[0].sig
        if len(fields) != sig.n or any(f.sig != sig for f in fields):
            raise CliffordError(f"need exactly {sig.n} covector components over {sig}")
        super().__init__(sig)
        self.fields = fields

    def jets(self, x, order: int = 1) -> list[MvJet]:
        return [f.jet(x, order) for f in self.fields]

    def values(self, x) -> list[Multivector]:
        return [f.value(x) for f in self.fields]


class ZeroCovector(CovectorField):
    def jets(self, x, order: int = 1) -> list[MvJet]:
        zero = Multivector.zero(self.sig)
        return [MvJet.constant(zero, order) for _ in range(self.n)]


class OffsetCovector(CovectorField):
    """Base covector plus per-component offset fields (for perturbation tests)."""

    def __init__(self, base: CovectorField, offsets: dict):
        super().__init__(base.sig)
        self.base = base
        self.offsets = {int(mu): field for mu, field in offsets.items()}
        for mu, field in self.offsets.items():
            if not 0 <= mu < self.n:
                raise CliffordError(f"offset index {mu} out of range")
            if field.sig != base.sig:
                raise CliffordError("offset field signature mismatch")

    def jets(self, x, order: int = 1) -> list[MvJet]:
        out = self.base.jets(x, order)
        for mu, field in self.offsets.items():
            out[mu] = out[mu] + field.jet(x, order)
        return out


def _contract_jet(vjet: MvJet, hjets: list[MvJet], metric) -> MvJet:
    """F[h](V) = sum_rho eta_rho h^rho V h^rho on jets."""
    acc = None
    for eta, hj in zip(metric, hjets):
        term = _jet_mul(_jet_mul(hj, vjet), hj).scale(eta)
        acc = term if acc is None else acc + term
    return acc


def _w_jets(hjets: list[MvJet], metric, order: int) -> list[MvJet]:
    """W_mu = (d_mu h^rho) h_rho as jets of the requested order."""
    n = len(hjets)
    out = []
    for mu in range(n):
        acc = None
        for rho in range(n):
            term = _jet_mul(hjets[rho].partial(mu), hjets[rho].truncate(order)).scale(metric[rho])
            acc = term if acc is None else acc + term
        out.append(acc)
    return out


def compute_C_jets(hjets: list[MvJet], table: ContractionTable,
                   form: str = "projection") -> list[MvJet]:
    """Connection jets from field-vector jets (one order lower than the input).

    form "projection" weights the reconstructed h-grade projections by mu_k;
    form "contraction" applies the collapsed weights w_l to the contraction
    powers directly. Identical mathematically, distinct evaluation orders.
    """
    sig = hjets[0].sig
    n = sig.n
    metric = sig.metric()
    order = hjets[0].order - 1
    if order < 0:
        raise CliffordError("field-vector jets must carry at least first derivatives")
    htrunc = [hj.truncate(order) for hj in hjets]
    wjets = _w_jets(hjets, metric, order)
    depth = len(table.weights) - 1
    out = []
    for mu in range(n):
        chain = [wjets[mu]]
        for _ in range(depth):
            chain.append(_contract_jet(chain[-1], htrunc, metric))
        if form == "contraction":
            c = None
            for l, w in enumerate(table.weights):
                if w == 0:
                    continue
                term = chain[l].scale(float(w))
                c = term if c is None else c + term
        elif form == "projection":
            c = None
            upper = n if table.even else (n - 1) // 2
            for k in range(1, upper + 1):
                row = table.projector_row(k)
                pk = None
                for l, b in enumerate(row):
                    if b == 0:
                        continue
                    term = chain[l].scale(float(b))
                    pk = term if pk is None else pk + term
                if pk is None:
                    continue
                term = pk.scale(float(table.mus[k]))
                c = term if c is None else c + term
        else:
            raise CliffordError(f"unknown form {form!r}; use 'projection' or 'contraction'")
        if c is None:
            c = MvJet.constant(Multivector.zero(sig), order)
        out.append(c)
    return out


def compute_C(h: CliffordFieldVector, table: ContractionTable | None = None, x=None,
              form: str = "projection", validate: bool = True,
              validate_tol: float = 1e-8) -> list[Multivector]:
    """Connection values C_mu(x) solving the primitive equation for h.

    Validates the anticommutation identity of h at x by default, since the
    closed form is meaningless on an invalid field vector.
    """
    if x is None:
        raise CliffordError("compute_C needs an evaluation point")
    if table is None:
        table = build_table(h.sig.n)
    if table.n != h.sig.n:
        raise CliffordError(f"table is for n={table.n}, field vector has n={h.sig.n}")
    x = _as_point(x, h.sig.n)
    if validate:
        h.validate(x[None, :], tol=validate_tol)
    hjets = h.jets(x, 1)
    return [j.value for j in compute_C_jets(hjets, table, form)]


class DerivedConnection(CovectorField):
    """The closed-form connection of a field vector, as a lazy covector field."""

    def __init__(self, h: CliffordFieldVector, table: ContractionTable | None = None,
                 form: str = "projection"):
        super().__init__(h.sig)
        self.h = h
        self.table = table if table is not None else build_table(h.sig.n)
        self.form = form
        self._memo: dict[bytes, tuple[int, list[MvJet]]] = {}

    def jets(self, x, order: int = 1) -> list[MvJet]:
        x = _as_point(x, self.sig.n)
        key = x.tobytes()
        hit = self._memo.get(key)
        if hit is not None and hit[0] >= order:
            return [j.truncate(order) for j in hit[1]]
        # Always derive to first order: curvature checks need it anyway, and
        # one pass at order 1 is cheaper than passes at 0 and then 1.
        eff = max(order, 1)
        hjets = self.h.jets(x, eff + 1)
        cjets = compute_C_jets(hjets, self.table, self.form)
        self._memo[key] = (eff, cjets)
        if len(self._memo) > 128:
            self._memo.pop(next(iter(self._memo)))
        return [j.truncate(order) for j in cjets]


def primitive_residual(h: CliffordFieldVector, c: CovectorField, x) -> list[list[Multivector]]:
    """R_{mu rho}(x) = d_mu h_rho - [C_mu, h_rho], an n x n grid."""
    x = _as_point(x, h.sig.n)
    metric = h.sig.metric()
    # Connection first: derived connections pull deeper h jets, so this
    # order fills the jet memos top-down with no repeated work.
    cvals = c.values(x)
    hjets = h.jets(x, 1)
    grid = []
    for mu in range(h.n):
        row = []
        for rho in range(h.n):
            lowered = metric[rho]
            res = lowered * hjets[rho].grad(mu) - commutator(cvals[mu], lowered * hjets[rho].value)
            row.append(res)
        grid.append(row)
    return grid


def curvature_residual(c: CovectorField, x) -> list[list[Multivector]]:
    """d_mu C_nu - d_nu C_mu - [C_mu, C_nu] as an antisymmetric n x n grid."""
    x = _as_point(x, c.sig.n)
    cjets = c.jets(x, 1)
    vals = [j.value for j in cjets]
    grid = []
    for mu in range(c.n):
        row = []
        for nu in range(c.n):
            res = cjets[nu].grad(mu) - cjets[mu].grad(nu) - commutator(vals[mu], vals[nu])
            row.append(res)
        grid.append(row)
    return grid


def connection_center_leak(c: CovectorField, x) -> float:
    return max(center_leak(v) for v in c.values(x))


class TransformedFieldVector(CliffordFieldVector):
    """Conjugated field vector S^-1 h^mu S."""

    def __init__(self, base: CliffordFieldVector, gauge: GaugeElement):
        if base.sig != gauge.sig:
            raise CliffordError("field vector and gauge element signature mismatch")
        super().__init__(base.sig)
        self.base = base
        self.gauge = gauge

    def values(self, x) -> list[Multivector]:
        s = self.gauge.value(x)
        w = self.gauge.inv_value(x)
        return [geometric_product(geometric_product(w, v), s) for v in self.base.values(x)]

    def _compute_jets(self, x: np.ndarray, order: int) -> list[MvJet]:
        sj = self.gauge.jet(x, order)
        wj = self.gauge.inv_jet(x, order)
        return [_jet_mul(_jet_mul(wj, hj), sj) for hj in self.base.jets(x, order)]


class TransformedConnection(CovectorField):
    """Gauge-transformed connection S^-1 C_mu S - S^-1 d_mu S."""

    def __init__(self, base: CovectorField, gauge: GaugeElement):
        if base.sig != gauge.sig:
            raise CliffordError("covector and gauge element signature mismatch")
        super().__init__(base.sig)
        self.base = base
        self.gauge = gauge

    def jets(self, x, order: int = 1) -> list[MvJet]:
        if order > 1:
            raise CliffordError("transformed connections carry at most first-order jets")
        sfull = self.gauge.jet(x, order + 1)
        sj = sfull.truncate(order)
        wj = self.gauge.inv_jet(x, order)
        cjets = self.base.jets(x, order)
        out = []
        for mu in range(self.n):
            conj = _jet_mul(_jet_mul(wj, cjets[mu]), sj)
            out.append(conj - _jet_mul(wj, sfull.partial(mu)))
        return out


def pure_gauge_connection(gauge: GaugeElement) -> TransformedConnection:
    """The flat connection C_mu = -S^-1 d_mu S (gauge transform of zero)."""
    return TransformedConnection(ZeroCovector(gauge.sig), gauge)


def gauge_transform(h: CliffordFieldVector, c: CovectorField, gauge: GaugeElement,
                    x=None, points=None, membership_tol: float = 1e-9):
    """Transformed pair (S^-1 h S, S^-1 C S - S^-1 dS).

    With x given, returns the two value lists at that point; otherwise
    returns the transformed field objects. Membership of the gauge element
    is validated when points are supplied.
    """
    if points is not None:
        gauge.validate_membership(points, tol=membership_tol)
    ht = TransformedFieldVector(h, gauge)
    ct = TransformedConnection(c, gauge)
    if x is not None:
        return ht.values(x), ct.values(x)
    return ht, ct


class PrimitiveSolution:
    """A field vector with its derived connection and residual reporting."""

    def __init__(self, h: CliffordFieldVector, table: ContractionTable | None = None,
                 form: str = "projection"):
        self.h = h
        self.table = table if table is not None else build_table(h.sig.n)
        self.c = DerivedConnection(h, self.table, form)

    def point_report(self, x) -> dict:
        x = _as_point(x, self.h.sig.n)
        # Curvature first: it needs the deepest jets, and computing it
        # before the others warms every memo along the way.
        curvature = max_norm_grid(curvature_residual(self.c, x))
        return {
            "point": [float(v) for v in x],
            "primitive_max": max_norm_grid(primitive_residual(self.h, self.c, x)),
            "curvature_max": curvature,
            "center_leak": connection_center_leak(self.c, x),
        }

    def campaign(self, points=None) -> dict:
        if points is None:
            points = sample_points(self.h.sig.n)
        entries = [self.point_report(x) for x in np.atleast_2d(points)]
        summary = {}
        for key in ("primitive_max", "curvature_max", "center_leak"):
            vals = [entry[key] for entry in entries]
            summary[key] = {"max": max(vals), "mean": float(np.mean(vals))}
        return {"per_point": entries, "summary": summary}


def solve(h: CliffordFieldVector, table: ContractionTable | None = None,
          form: str = "projection") -> PrimitiveSolution:
    return PrimitiveSolution(h, table, form)
