"""Symmetric tridiagonal eigensolver (implicit QL with Wilkinson shifts).

This is the reference diagonalisation for every other module.  The
characteristic-polynomial bisection in :mod:`locsym.charpoly` is the
independent cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chain import Chain
from .errors import ConvergenceError

_EPS = np.finfo(float).eps
MAX_SWEEPS = 60


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Ascending eigenvalues and orthonormal eigenvectors (column i <-> eigenvalue i)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def n(self) -> int:
        return int(self.eigenvalues.size)

    def squared(self) -> np.ndarray:
        """Squared components, shape (site, state)."""
        return self.eigenvectors**2


def _ql_implicit(d: list, e: list, z: np.ndarray | None):
    """In-place implicit QL on diagonal ``d`` and couplings ``e`` (``e[i]`` joins i, i+1).

    ``z`` holds eigenvectors as rows and is rotated alongside when given.
    """
    n = len(d)
    e = list(e) + [0.0]
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= _EPS * dd:
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > MAX_SWEEPS:
                raise ConvergenceError(f"QL did not converge for eigenvalue {l}")
            # Wilkinson shift from the leading 2x2 block
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            deflated = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    deflated = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                if z is not None:
                    zi = z[i].copy()
                    z[i] = c * zi - s * z[i + 1]
                    z[i + 1] = s * zi + c * z[i + 1]
                i -= 1
            if deflated:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return d


def eigvalsh(chain: Chain) -> np.ndarray:
    """Ascending eigenvalues only."""
    d = _ql_implicit(chain.onsite.tolist(), chain.couplings.tolist(), None)
    return np.sort(np.asarray(d))


def eigh(chain: Chain) -> Spectrum:
    """Full decomposition of the chain Hamiltonian.

    Eigenvalues are ascending; each eigenvector is signed so that its
    largest-magnitude component (lowest index on ties) is positive.
    """
    n = chain.n
    z = np.eye(n)
    d = _ql_implicit(chain.onsite.tolist(), chain.couplings.tolist(), z)
    order = np.argsort(np.asarray(d), kind="stable")
    values = np.asarray(d)[order]
    vectors = z[order].T.copy()
    for k in range(n):
        col = vectors[:, k]
        col /= np.linalg.norm(col)
        if col[np.argmax(np.abs(col))] < 0:
            col *= -1.0
    values.flags.writeable = False
    vectors.flags.writeable = False
    return Spectrum(values, vectors)


def residuals(chain: Chain, spectrum: Spectrum) -> np.ndarray:
    """Per-state norms ||H v_i - lambda_i v_i||."""
    if spectrum.eigenvectors.shape != (chain.n, chain.n) or spectrum.n != chain.n:
        raise ValueError(
            f"spectrum of size {spectrum.n} does not match chain of {chain.n} sites"
        )
    V = spectrum.eigenvectors
    HV = chain.onsite[:, None] * V
    HV[:-1] += chain.couplings[:, None] * V[1:]
    HV[1:] += chain.couplings[:, None] * V[:-1]
    return np.linalg.norm(HV - V * spectrum.eigenvalues[None, :], axis=0)


def degenerate_groups(eigenvalues, tol: float) -> list[list[int]]:
    """Group consecutive ascending eigenvalues whose spacing is below ``tol``."""
    groups: list[list[int]] = []
    for k, lam in enumerate(eigenvalues):
        if groups and lam - eigenvalues[groups[-1][-1]] < tol:
            groups[-1].append(k)
        else:
            groups.append([k])
    return groups


def degeneracy_tol(eigenvalues) -> float:
    """Gap below which two levels are treated as one degenerate subspace."""
    scale = float(np.max(np.abs(eigenvalues))) if len(eigenvalues) else 0.0
    return 1e-9 * max(1.0, scale)
