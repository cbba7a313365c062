"""Local-symmetry analysis: isospectral subdomains, center-coupling sweeps,
splitting slopes, eigenstate maps and domain-weight localization."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .chain import Chain, LSDomain, as_domain, extract_subdomain, set_bond
from .errors import ChainError, DegenerateSpectrum, TrackingAmbiguity
from .tridiag import Spectrum, degeneracy_tol, degenerate_groups, eigh, eigvalsh

COLLISION_TOL = 1e-12
R2_MIN = 0.999
DEFAULT_THETA = 0.75
_MAX_HALVINGS = 8


class Isospectrality(NamedTuple):
    equal: bool
    max_dev: float


def isospectral(chain_a: Chain, chain_b: Chain, tol: float = 1e-12) -> Isospectrality:
    """Compare the sorted spectra of two chains of equal size."""
    if chain_a.n != chain_b.n:
        raise ChainError(f"size mismatch: {chain_a.n} vs {chain_b.n}")
    dev = float(np.max(np.abs(eigvalsh(chain_a) - eigvalsh(chain_b))))
    return Isospectrality(dev <= tol, dev)


def projected_squares(spectrum: Spectrum) -> np.ndarray:
    """Squared components (site, state) that do not depend on the basis chosen
    inside degenerate levels: every state of a degenerate group gets the group
    projector's diagonal divided by the group size."""
    sq = spectrum.squared()
    out = sq.copy()
    for group in degenerate_groups(spectrum.eigenvalues, degeneracy_tol(spectrum.eigenvalues)):
        if len(group) > 1:
            out[:, group] = (sq[:, group].sum(axis=1) / len(group))[:, None]
    return out


def subdomain_eigvec_relation(chain: Chain, spectrum: Spectrum | None = None, projector: bool = False) -> float:
    """Largest deviation between |s_{j,i}| and |s_{n-1-j,i}| over all sites and states.

    For a reflection-symmetric chain this vanishes.  Degenerate spectra raise
    DegenerateSpectrum unless ``projector`` is set, in which case the
    basis-independent projector diagonals are compared instead.
    """
    spectrum = spectrum or eigh(chain)
    lam = spectrum.eigenvalues
    degenerate = any(len(g) > 1 for g in degenerate_groups(lam, degeneracy_tol(lam)))
    if degenerate and not projector:
        raise DegenerateSpectrum("spectrum has degenerate levels; use projector=True")
    mags = np.sqrt(projected_squares(spectrum)) if projector else np.abs(spectrum.eigenvectors)
    return float(np.max(np.abs(mags - mags[::-1, :])))


@dataclass(frozen=True)
class PairTrack:
    """A pair of eigenvalue tracks born from one subdomain level.

    ``tracks`` are track labels (ascending position at eps_c = 0); ``depth`` is
    the weighted mean distance, in sites, of the subdomain state from the
    center bond (small = inner pair).
    """

    pair: int
    tracks: tuple
    subdomain_energy: float
    depth: float


@dataclass(frozen=True, eq=False)
class SweepResult:
    grid: np.ndarray
    spectra: np.ndarray
    tracks: np.ndarray
    pairs: tuple
    domain: LSDomain

    def gap(self, pair: int) -> np.ndarray:
        p, q = self.pairs[pair].tracks
        return np.abs(self.tracks[:, q] - self.tracks[:, p])

    @property
    def pair_tracks(self) -> list[np.ndarray]:
        """Per pair, the (grid, 2) trajectories of its lower and upper track."""
        return [self.tracks[:, list(p.tracks)] for p in self.pairs]


def _seed_pairs(chain: Chain, domain: LSDomain) -> list[PairTrack]:
    """Pair the left- and right-block levels of the decoupled chain that carry
    the same subdomain eigenstate."""
    c = domain.center_bond
    decoupled = set_bond(chain, c, 0.0)
    left = eigh(extract_subdomain(decoupled, 0, c))
    right = eigh(extract_subdomain(decoupled, c + 1, chain.n - 1))
    sub = eigh(extract_subdomain(chain, domain.start, c))
    phi = sub.eigenvectors
    m = sub.n
    ov_left = (phi.T @ left.eigenvectors[domain.start : c + 1, :]) ** 2
    ov_right = (phi[::-1, :].T @ right.eigenvectors[: m, :]) ** 2
    _, col_left = linear_sum_assignment(-ov_left)
    _, col_right = linear_sum_assignment(-ov_right)

    values = np.concatenate([left.eigenvalues, right.eigenvalues])
    position = np.empty(values.size, dtype=int)
    position[np.argsort(values, kind="stable")] = np.arange(values.size)
    n_left = left.n
    distance = (c - np.arange(domain.start, c + 1)) + 0.5
    pairs = []
    for k in range(m):
        p = int(position[col_left[k]])
        q = int(position[n_left + col_right[k]])
        pairs.append(
            PairTrack(
                k,
                (min(p, q), max(p, q)),
                float(sub.eigenvalues[k]),
                float(np.sum(phi[:, k] ** 2 * distance)),
            )
        )
    return pairs


def _assign(prev: np.ndarray, predicted: np.ndarray, new: np.ndarray) -> np.ndarray:
    cost = np.abs(predicted[:, None] - new[None, :])
    _, cols = linear_sum_assignment(cost)
    return cols


def _spectra(chain: Chain, bond: int, values: Sequence[float], workers: int) -> list[np.ndarray]:
    chains = [set_bond(chain, bond, float(v)) for v in values]
    if workers > 1 and len(chains) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(eigvalsh, chains))
    return [eigvalsh(ch) for ch in chains]


def sweep_center_coupling(
    chain: Chain, domain, grid: Sequence[float], workers: int | None = None
) -> SweepResult:
    """Diagonalise the chain for each center-coupling value in ``grid``.

    Pairs are seeded at eps_c = 0 and every eigenvalue is followed by nearest
    continuation (linear prediction); an assignment that is not the identity is
    re-examined on halved steps before being accepted as a crossing.
    """
    domain = as_domain(domain)
    if not domain.is_symmetric_in(chain):
        raise ChainError(f"domain [{domain.start},{domain.end}] is not reflection symmetric")
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0 or grid[0] != 0.0:
        raise ValueError("grid must start at 0")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    if workers is None:
        workers = int(os.environ.get("LOCSYM_THREADS", "1") or 1)
    bond = domain.center_bond
    spectra = _spectra(chain, bond, grid, max(1, workers))
    pairs = _seed_pairs(chain, domain)

    tracks = np.empty((grid.size, chain.n))
    tracks[0] = spectra[0]
    for t in range(1, grid.size):
        new = spectra[t]
        if new.size > 1 and np.min(np.diff(new)) < COLLISION_TOL:
            raise TrackingAmbiguity(
                f"eigenvalues meet within {COLLISION_TOL:g} at eps_c={grid[t]!r}", grid[t]
            )
        slope = (tracks[t - 1] - tracks[t - 2]) / (grid[t - 1] - grid[t - 2]) if t >= 2 else None
        tracks[t] = _follow(chain, bond, tracks[t - 1], slope, grid[t - 1], grid[t], new, 0)
    return SweepResult(grid, np.array(spectra), tracks, tuple(pairs), domain)


def _follow(chain, bond, prev, slope, x0, x1, new, depth):
    predicted = prev if slope is None else prev + slope * (x1 - x0)
    cols = _assign(prev, predicted, new)
    if np.array_equal(cols, np.arange(cols.size)) or depth >= _MAX_HALVINGS:
        return new[cols]
    mid = 0.5 * (x0 + x1)
    mid_values = eigvalsh(set_bond(chain, bond, mid))
    half = _follow(chain, bond, prev, slope, x0, mid, mid_values, depth + 1)
    mid_slope = (half - prev) / (mid - x0)
    return _follow(chain, bond, half, mid_slope, mid, x1, new, depth + 1)


@dataclass(frozen=True)
class SplittingFit:
    pair: int
    origin_slope: float
    fit_slope: float
    r_squared: float
    residual_gap: float
    fit_end: float


def _r_squared(x: np.ndarray, y: np.ndarray):
    slope, intercept = np.polyfit(x, y, 1)
    ss_res = float(np.sum((y - (slope * x + intercept)) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else max(0.0, 1.0 - ss_res / ss_tot)
    return float(slope), r2


def splitting_fit(sweep: SweepResult, pair: int, r2_min: float = R2_MIN) -> SplittingFit:
    """Origin slope and the linear fit over the longest grid prefix with R^2 >= ``r2_min``."""
    x = sweep.grid
    if x.size < 2:
        raise ValueError("splitting fit needs at least two grid points")
    g = sweep.gap(pair)
    origin = float((g[1] - g[0]) / (x[1] - x[0]))
    best = (origin, 1.0, 1)
    for k in range(2, x.size):
        slope, r2 = _r_squared(x[: k + 1], g[: k + 1])
        if r2 >= r2_min:
            best = (slope, r2, k)
    slope, r2, k = best
    return SplittingFit(pair, origin, slope, r2, float(g[0]), float(x[k]))


def theoretical_slope(subdomain: Chain, k: int, edge: str = "right") -> float:
    """First-order gap slope 2 s_{m,k}^2, with m the subdomain site next to the center bond."""
    spec = eigh(subdomain)
    site = subdomain.n - 1 if edge == "right" else 0
    return float(2.0 * spec.eigenvectors[site, k] ** 2)


@dataclass(frozen=True, eq=False)
class EigenstateMap:
    """|s_{mu,i}| with row i the i-th state in ascending energy and column mu the site."""

    values: np.ndarray
    eigenvalues: np.ndarray


def eigenstate_map(spectrum: Spectrum) -> EigenstateMap:
    return EigenstateMap(np.sqrt(projected_squares(spectrum)).T.copy(), spectrum.eigenvalues)


def domain_weights(spectrum: Spectrum, domains) -> np.ndarray:
    """Captured norm W_D(i), shape (state, domain)."""
    sq = projected_squares(spectrum)
    cols = []
    for dom in domains:
        dom = as_domain(dom)
        if dom.end >= spectrum.n:
            raise ChainError(f"domain [{dom.start},{dom.end}] exceeds {spectrum.n} sites")
        cols.append(sq[dom.start : dom.end + 1, :].sum(axis=0))
    return np.array(cols).T if cols else np.zeros((spectrum.n, 0))


def domain_weight(spectrum: Spectrum, domain, i: int) -> float:
    return float(domain_weights(spectrum, [domain])[i, 0])


@dataclass(frozen=True, eq=False)
class LocalizationReport:
    weights: np.ndarray
    theta: float
    assignment: tuple
    domains: tuple

    @property
    def n_localized(self) -> int:
        return sum(a is not None for a in self.assignment)

    def labels(self) -> list[str]:
        return [
            "unlocalized" if a is None else f"[{self.domains[a].start},{self.domains[a].end}]"
            for a in self.assignment
        ]


def count_localized(spectrum: Spectrum, domains, theta: float = DEFAULT_THETA) -> LocalizationReport:
    """Assign each state to the domain holding at least ``theta`` of its norm.

    With overlapping domains more than one may qualify; the largest weight wins.
    """
    if not 0.5 < theta <= 1.0:
        raise ValueError("theta must lie in (0.5, 1]")
    domains = tuple(as_domain(d) for d in domains)
    w = domain_weights(spectrum, domains)
    assignment = []
    for row in w:
        if row.size and row.max() >= theta:
            assignment.append(int(np.argmax(row)))
        else:
            assignment.append(None)
    return LocalizationReport(w, theta, tuple(assignment), domains)
