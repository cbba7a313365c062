"""Second-order weak-coupling expansion of eigenvalues and squared components.

The chain is treated as ``H = diag(a) + eps * T`` with ``T`` the
nearest-neighbour adjacency, so every coefficient below depends only on the
on-site energies.  States are labelled by the site they emerge from at
``eps = 0``.  An adjacent pair of equal on-site energies ``(i, i+1)`` gives two
branches: label ``i`` splits upward (``lam1 = +1``), label ``i+1`` downward.

Eigenvalue coefficients are obtained by expanding the characteristic
polynomial at ``lam0 + eps*lam1 + eps^2*lam2`` as a truncated power series in
``eps`` and requiring each order to vanish.  Squared components come from the
D-terms (order-by-order coefficients of the complementary-minor products).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .chain import Chain
from .errors import DegenerateSite, NotAdjacentDegenerate, UnsupportedDegeneracy

EQUAL_TOL = 1e-12
_INT_SNAP = 1e-12


@dataclass(frozen=True)
class SiteClasses:
    """Partition of sites into nondegenerate sites and adjacent degenerate pairs.

    ``twins`` maps a nondegenerate site to a distant site (three or more bonds
    away) with the same on-site energy.  Such sites mix only beyond second order
    in the eigenvalue but already at order ``eps^2`` in the squared components.
    """

    nondegenerate: tuple
    pairs: tuple
    twins: dict

    def pair_of(self, site: int):
        for p in self.pairs:
            if site in p:
                return p
        return None

    def own_set(self, site: int) -> tuple:
        p = self.pair_of(site)
        return p if p is not None else (site,)


@dataclass(frozen=True)
class EigenvalueSeries:
    state: int
    lam0: float
    lam1: float
    lam2: float
    kind: str = "nondegenerate"

    def __call__(self, eps: float) -> float:
        return self.lam0 + eps * self.lam1 + eps * eps * self.lam2


@dataclass(frozen=True)
class DTerms:
    """Order-0/1/2 D-terms, normalised by ``sign * exp(log_scale)`` (the product of the nonzero gaps)."""

    d0: float
    d1: float
    d2: float
    log_scale: float
    sign: int

    @property
    def raw(self) -> tuple[float, float, float]:
        factor = self.sign * math.exp(self.log_scale)
        return self.d0 * factor, self.d1 * factor, self.d2 * factor


@dataclass(frozen=True, eq=False)
class ComponentSeries:
    """Per-site coefficients of s^2 = c0 + eps c1 + eps^2 c2 for one state.

    ``valid`` flags the sites where the truncated series is meaningful.
    Degenerate-pair series stop at first order; their ``c2`` is NaN.
    """

    state: int
    c0: np.ndarray
    c1: np.ndarray
    c2: np.ndarray
    valid: np.ndarray
    kind: str = "nondegenerate"

    @property
    def order(self) -> int:
        return 1 if self.kind == "pair" else 2

    def __call__(self, eps: float) -> np.ndarray:
        out = self.c0 + eps * self.c1
        if self.order >= 2:
            out = out + eps * eps * self.c2
        return out


def classify_sites(onsite, tol: float = EQUAL_TOL) -> SiteClasses:
    """Split sites into nondegenerate ones and adjacent equal-energy pairs.

    Raises UnsupportedDegeneracy for a value shared by more than two sites or
    by two sites exactly two bonds apart (they mix at second order).
    """
    a = np.asarray(onsite, dtype=float)
    order = np.argsort(a, kind="stable")
    groups: list[list[int]] = []
    for k in order:
        if groups and abs(a[k] - a[groups[-1][-1]]) <= tol:
            groups[-1].append(int(k))
        else:
            groups.append([int(k)])
    nondeg, pairs, twins = [], [], {}
    for g in groups:
        g.sort()
        if len(g) == 1:
            nondeg.append(g[0])
        elif len(g) > 2:
            raise UnsupportedDegeneracy(f"on-site value {a[g[0]]!r} repeats on sites {g}", g)
        elif g[1] - g[0] == 1:
            pairs.append((g[0], g[1]))
        elif g[1] - g[0] == 2:
            raise UnsupportedDegeneracy(
                f"sites {g[0]} and {g[1]} share on-site value {a[g[0]]!r} two bonds apart", g
            )
        else:
            nondeg.extend(g)
            twins[g[0]] = g[1]
            twins[g[1]] = g[0]
    return SiteClasses(tuple(sorted(nondeg)), tuple(sorted(pairs)), twins)


def _gaps(onsite: np.ndarray, site: int, classes: SiteClasses) -> np.ndarray:
    """X_l = a_site - a_l with distant twins replaced by a unit placeholder.

    A twin's gap is a common factor of every surviving term, so any nonzero
    stand-in gives the generic (distinct-energy) coefficients.
    """
    x = onsite[site] - onsite
    own = classes.own_set(site)
    x[list(own)] = 0.0
    twin = classes.twins.get(site)
    if twin is not None:
        x[twin] = 1.0
    return x


def _cp_series(x: np.ndarray, shift, order: int) -> np.ndarray:
    """Coefficients in eps of chi_{1:N}(lam0 + delta(eps)) up to ``order``.

    ``x`` holds lam0 - a_j and ``shift`` the coefficients of delta (constant term 0).
    """
    delta = np.zeros(order + 1)
    delta[: min(len(shift), order + 1)] = shift[: order + 1]
    prev = np.zeros(order + 1)
    cur = np.zeros(order + 1)
    cur[0] = 1.0
    for xj in x:
        diag = delta.copy()
        diag[0] += xj
        nxt = np.convolve(diag, cur)[: order + 1]
        nxt[2:] -= prev[:-2]
        prev, cur = cur, nxt
        top = np.max(np.abs(cur))
        if top > 1e100 or 0 < top < 1e-100:
            prev = prev / top
            cur = cur / top
    return cur


def _snap(value: float) -> float:
    r = round(value)
    return float(r) if abs(value - r) <= _INT_SNAP * max(1.0, abs(value)) else float(value)


def _solve_lambda(x: np.ndarray, m: int) -> list[tuple[float, float]]:
    """Solve the CP coefficient equations for (lam1, lam2) of each branch.

    ``m`` zero gaps make orders below m vanish identically; order m is a
    degree-m polynomial in lam1, order m+1 is linear in lam2.
    """
    order = m + 1
    if m == 1:
        v0 = _cp_series(x, [0.0, 0.0], order)[1]
        v1 = _cp_series(x, [0.0, 1.0], order)[1]
        roots = [-v0 / (v1 - v0)]
    elif m == 2:
        vm, v0, vp = (_cp_series(x, [0.0, t], order)[2] for t in (-1.0, 0.0, 1.0))
        qa = 0.5 * (vp + vm) - v0
        qb = 0.5 * (vp - vm)
        disc = qb * qb - 4 * qa * v0
        root = math.sqrt(max(disc, 0.0))
        roots = sorted([(-qb + root) / (2 * qa), (-qb - root) / (2 * qa)], reverse=True)
    else:
        raise UnsupportedDegeneracy(f"{m}-fold zeroth-order degeneracy")
    out = []
    for lam1 in roots:
        lam1 = _snap(lam1)
        c0 = _cp_series(x, [0.0, lam1, 0.0], order)[order]
        c1 = _cp_series(x, [0.0, lam1, 1.0], order)[order]
        out.append((lam1, -c0 / (c1 - c0)))
    return out


def eigvalue_series_nondegenerate(chain: Chain, i: int, classes: SiteClasses | None = None) -> EigenvalueSeries:
    """lam0 = a_i, lam1 = 0 and lam2 from the order-eps^2 CP coefficient.

    For a nondegenerate site this reproduces lam2 = 1/(a_i - a_{i-1}) + 1/(a_i - a_{i+1}),
    with a missing neighbour dropped at the chain ends.
    """
    classes = classes or classify_sites(chain.onsite)
    if classes.pair_of(i) is not None:
        raise DegenerateSite(f"site {i} belongs to degenerate pair {classes.pair_of(i)}")
    if chain.n == 1:
        return EigenvalueSeries(i, float(chain.onsite[0]), 0.0, 0.0)
    x = _gaps(chain.onsite.copy(), i, classes)
    ((lam1, lam2),) = _solve_lambda(x, 1)
    return EigenvalueSeries(i, float(chain.onsite[i]), lam1, lam2)


def eigvalue_series_degenerate_pair(chain: Chain, pair, classes: SiteClasses | None = None):
    """Both branches of an adjacent degenerate pair: lam1 = +1 (label i) and -1 (label i+1)."""
    i, j = int(pair[0]), int(pair[1])
    if j != i + 1 or not (0 <= i and j < chain.n) or abs(chain.onsite[i] - chain.onsite[j]) > EQUAL_TOL:
        raise NotAdjacentDegenerate(f"sites {pair} are not an adjacent equal-energy pair")
    classes = classes or classify_sites(chain.onsite)
    x = _gaps(chain.onsite.copy(), i, classes)
    (up1, up2), (dn1, dn2) = _solve_lambda(x, 2)
    a = float(chain.onsite[i])
    return (
        EigenvalueSeries(i, a, up1, up2, "pair"),
        EigenvalueSeries(j, a, dn1, dn2, "pair"),
    )


def eigenvalue_series(chain: Chain) -> list[EigenvalueSeries]:
    """Series for every site label, ordered by label."""
    classes = classify_sites(chain.onsite)
    out = [eigvalue_series_nondegenerate(chain, i, classes) for i in classes.nondegenerate]
    for p in classes.pairs:
        out.extend(eigvalue_series_degenerate_pair(chain, p, classes))
    return sorted(out, key=lambda s: s.state)


def _series_for(chain: Chain, i: int, classes: SiteClasses) -> EigenvalueSeries:
    pair = classes.pair_of(i)
    if pair is None:
        return eigvalue_series_nondegenerate(chain, i, classes)
    up, down = eigvalue_series_degenerate_pair(chain, pair, classes)
    return up if i == pair[0] else down


class _Products:
    """Products of gaps with excluded index sets, normalised by the product of nonzero gaps."""

    def __init__(self, x: np.ndarray):
        nz = x != 0.0
        self.zeros = frozenset(np.flatnonzero(~nz).tolist())
        self.inv = np.where(nz, 1.0 / np.where(nz, x, 1.0), 0.0)
        self.log_scale = float(np.sum(np.log(np.abs(x[nz]))))
        self.sign = int(np.prod(np.sign(x[nz])))

    def excl(self, *idx) -> float:
        e = set(idx)
        if not self.zeros <= e:
            return 0.0
        v = 1.0
        for k in e:
            if k not in self.zeros:
                v *= self.inv[k]
        return v


def _d_terms(prod: _Products, n: int, mu: int, lam1: float, lam2: float) -> tuple[float, float, float]:
    d0 = prod.excl(mu)
    single = sum(prod.excl(j, mu) for j in range(n) if j != mu)
    d1 = lam1 * single
    quad = 0.0
    if lam1 != 0.0:
        for j in range(mu):
            for jr in range(mu + 1, n):
                quad += prod.excl(j, mu, jr)
        for k in range(mu):
            for l in range(k + 1, mu):
                quad += prod.excl(mu, k, l)
        for k in range(mu + 1, n):
            for l in range(k + 1, n):
                quad += prod.excl(mu, k, l)
    bonds = sum(prod.excl(mu, j, j + 1) for j in range(n - 1) if j not in (mu - 1, mu))
    d2 = lam1 * lam1 * quad + lam2 * single - bonds
    return d0, d1, d2


def d_terms(chain: Chain, i: int, mu: int, series: EigenvalueSeries | None = None) -> DTerms:
    """D^(i,0..2)_mu for state ``i`` at site ``mu`` using the literal gaps a_i - a_l."""
    classes = classify_sites(chain.onsite)
    series = series or _series_for(chain, i, classes)
    x = chain.onsite[i] - chain.onsite
    x[list(classes.own_set(i))] = 0.0
    prod = _Products(x)
    d0, d1, d2 = _d_terms(prod, chain.n, mu, series.lam1, series.lam2)
    return DTerms(d0, d1, d2, prod.log_scale, prod.sign)


def boundary_mask(n: int) -> np.ndarray:
    """Sites away from the chain ends where no boundary corrections are needed (0-based 3..n-4)."""
    mu = np.arange(n)
    return (mu >= 3) & (mu <= n - 4)


def _all_d_terms(chain: Chain, i: int, classes: SiteClasses, series: EigenvalueSeries):
    prod = _Products(_gaps(chain.onsite.copy(), i, classes))
    return np.array([_d_terms(prod, chain.n, mu, series.lam1, series.lam2) for mu in range(chain.n)])


def component_series_nondegenerate(chain: Chain, i: int, classes: SiteClasses | None = None) -> ComponentSeries:
    """s^2_ii = 1 - eps^2 sum_{nu != i} D2_nu / D0_i and s^2_mu,i = eps^2 D2_mu / D0_i."""
    classes = classes or classify_sites(chain.onsite)
    if classes.pair_of(i) is not None:
        raise DegenerateSite(f"site {i} belongs to degenerate pair {classes.pair_of(i)}")
    series = eigvalue_series_nondegenerate(chain, i, classes)
    n = chain.n
    d = _all_d_terms(chain, i, classes, series)
    d0_i = d[i, 0]
    c2 = d[:, 2] / d0_i
    twin = classes.twins.get(i)
    if twin is not None:
        c2[twin] = 0.0
    c2[i] = 0.0
    c2[i] = -np.sum(c2)
    c0 = np.zeros(n)
    c0[i] = 1.0
    valid = boundary_mask(n)
    if twin is not None:
        valid[[i, twin]] = False
    return ComponentSeries(i, c0, np.zeros(n), c2, valid)


def component_series_degenerate(chain: Chain, pair, classes: SiteClasses | None = None):
    """First-order series of both pair branches (order-0 weight 1/2 on each pair site)."""
    i, j = int(pair[0]), int(pair[1])
    classes = classes or classify_sites(chain.onsite)
    branches = eigvalue_series_degenerate_pair(chain, (i, j), classes)
    out = []
    for series in branches:
        d = _all_d_terms(chain, series.state, classes, series)
        s1 = np.sum(d[:, 1])
        s2 = np.sum(d[:, 2])
        c0 = d[:, 1] / s1
        c1 = (d[:, 2] * s1 - d[:, 1] * s2) / (s1 * s1)
        out.append(
            ComponentSeries(
                series.state, c0, c1, np.full(chain.n, np.nan), boundary_mask(chain.n), "pair"
            )
        )
    return tuple(out)


def component_series(chain: Chain) -> list[ComponentSeries]:
    classes = classify_sites(chain.onsite)
    out = [component_series_nondegenerate(chain, i, classes) for i in classes.nondegenerate]
    for p in classes.pairs:
        out.extend(component_series_degenerate(chain, p, classes))
    return sorted(out, key=lambda s: s.state)


def match_states(series: list[EigenvalueSeries], eigenvalues, eps: float) -> dict[int, int]:
    """Map each site label to the index of the exact eigenvalue nearest its series value."""
    predicted = np.array([s(eps) for s in series])
    cost = np.abs(predicted[:, None] - np.asarray(eigenvalues)[None, :])
    rows, cols = linear_sum_assignment(cost)
    return {series[r].state: int(c) for r, c in zip(rows, cols)}
