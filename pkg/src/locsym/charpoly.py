"""Characteristic-polynomial machinery for tridiagonal chains.

All characteristic polynomials are evaluated through the three-term recursion

    chi_{1:j}(x) = (x - a_j) chi_{1:j-1}(x) - eps_{j-1,j}^2 chi_{1:j-2}(x)

and carried in sign/log-magnitude form so long chains do not overflow.  From
them we get the closed-form squared eigenvector components

    s_{mu,i}^2 = chi_{1:mu-1}(lam_i) chi_{mu+1:N}(lam_i) / chi'_{1:N}(lam_i),

Sturm counts, a bisection eigensolver and sign recovery for eigenvectors.
Polynomials are only ever evaluated, never expanded into coefficients.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .chain import Chain
from .errors import DegenerateEigenvalue, ZeroPivot

_BIG = 2.0**400
_SMALL = 2.0**-400
_TINY = np.finfo(float).tiny
DEGENERACY_REL = 1e-9


@dataclass(frozen=True)
class ScaledValue:
    """A real number stored as ``sign * exp(log_magnitude)``."""

    sign: int
    log_magnitude: float = 0.0

    @classmethod
    def from_float(cls, x: float) -> "ScaledValue":
        if x == 0.0:
            return cls(0, -math.inf)
        return cls(1 if x > 0 else -1, math.log(abs(x)))

    def __float__(self) -> float:
        if self.sign == 0:
            return 0.0
        try:
            return self.sign * math.exp(self.log_magnitude)
        except OverflowError:
            return self.sign * math.inf

    def __mul__(self, other: "ScaledValue") -> "ScaledValue":
        sign = self.sign * other.sign
        if sign == 0:
            return ScaledValue(0, -math.inf)
        return ScaledValue(sign, self.log_magnitude + other.log_magnitude)


def scaled_sum(signs, logs) -> ScaledValue:
    """Sum of ``signs[k] * exp(logs[k])`` without overflow."""
    signs = np.asarray(signs, dtype=float)
    logs = np.asarray(logs, dtype=float)
    live = signs != 0
    if not np.any(live):
        return ScaledValue(0, -math.inf)
    top = float(np.max(logs[live]))
    total = float(np.sum(signs[live] * np.exp(logs[live] - top)))
    if total == 0.0:
        return ScaledValue(0, -math.inf)
    return ScaledValue(1 if total > 0 else -1, top + math.log(abs(total)))


def _recursion(diag: np.ndarray, e2: np.ndarray, x: float):
    """Signs and log-magnitudes of chi_{1:j}(x) for j = 0..n.

    ``e2[j]`` is the squared coupling between sites j and j+1.
    """
    n = diag.size
    signs = np.zeros(n + 1, dtype=int)
    logs = np.full(n + 1, -math.inf)
    signs[0], logs[0] = 1, 0.0
    prev, cur, scale = 0.0, 1.0, 0.0
    for j in range(n):
        nxt = (x - diag[j]) * cur - (e2[j - 1] * prev if j > 0 else 0.0)
        prev, cur = cur, nxt
        mag = abs(cur)
        if mag > _BIG or (0.0 < mag < _SMALL):
            prev /= mag
            cur /= mag
            scale += math.log(mag)
        if cur != 0.0:
            signs[j + 1] = 1 if cur > 0 else -1
            logs[j + 1] = scale + math.log(abs(cur))
    return signs, logs


def _leading_all(chain: Chain, x: float):
    return _recursion(chain.onsite, chain.couplings**2, x)


def _trailing_all(chain: Chain, x: float):
    """Signs/logs of the trailing CP over sites ``start..n-1`` indexed by ``start`` (0..n)."""
    signs, logs = _recursion(chain.onsite[::-1], chain.couplings[::-1] ** 2, x)
    return signs[::-1].copy(), logs[::-1].copy()


def cp_leading(chain: Chain, x: float, j: int) -> ScaledValue:
    """chi_{1:j}(x): characteristic polynomial of the first ``j`` sites (``chi_{1:0} = 1``)."""
    if not 0 <= j <= chain.n:
        raise IndexError(f"j={j} outside 0..{chain.n}")
    signs, logs = _recursion(chain.onsite[:j], chain.couplings[: max(j - 1, 0)] ** 2, x)
    return ScaledValue(int(signs[j]), float(logs[j]))


def cp_trailing(chain: Chain, x: float, start: int) -> ScaledValue:
    """Characteristic polynomial of the trailing block on sites ``start..n-1``.

    ``start`` is the 0-based first site, so ``start = n`` is the empty block
    (value 1) and ``start = n - 1`` gives ``x - a_{n-1}``.
    """
    if not 0 <= start <= chain.n:
        raise IndexError(f"start={start} outside 0..{chain.n}")
    signs, logs = _trailing_all(chain, x)
    return ScaledValue(int(signs[start]), float(logs[start]))


def _minor_products(chain: Chain, x: float):
    """Signs/logs of chi_{1:mu-1}(x) * chi_{mu+1:N}(x) for every site mu."""
    ls, ll = _leading_all(chain, x)
    ts, tl = _trailing_all(chain, x)
    n = chain.n
    signs = ls[:n] * ts[1:]
    logs = np.where(signs != 0, ll[:n] + tl[1:], -math.inf)
    return signs, logs


def cp_derivative(chain: Chain, x: float) -> ScaledValue:
    """chi'_{1:N}(x) as the sum over sites of the products of the two complementary minors."""
    signs, logs = _minor_products(chain, x)
    return scaled_sum(signs, logs)


def _degeneracy_window(chain: Chain, lam: float) -> float:
    lo, hi = chain.gershgorin()
    return DEGENERACY_REL * max(hi - lo, abs(lam), _TINY)


def check_nondegenerate(chain: Chain, lam: float) -> None:
    """Raise DegenerateEigenvalue if two eigenvalues lie within the degeneracy window of ``lam``."""
    if chain.n < 2:
        return
    delta = _degeneracy_window(chain, lam)
    inside = sturm_count(chain, lam + delta) - sturm_count(chain, lam - delta)
    if inside >= 2:
        raise DegenerateEigenvalue(
            f"{inside} eigenvalues within {delta:.3g} of {lam!r}; closed-form components undefined"
        )


def squared_components(chain: Chain, lam: float, check: bool = True) -> np.ndarray:
    """All squared eigenvector components s_{mu}^2 for the eigenvalue ``lam``."""
    if check:
        check_nondegenerate(chain, lam)
    signs, logs = _minor_products(chain, lam)
    denom = scaled_sum(signs, logs)
    if denom.sign == 0:
        raise DegenerateEigenvalue(f"chi' vanishes at {lam!r}")
    ratio = np.where(
        signs != 0, signs * denom.sign * np.exp(logs - denom.log_magnitude), 0.0
    )
    return np.clip(ratio, 0.0, 1.0)


def squared_component(chain: Chain, lam: float, mu: int) -> float:
    """s_{mu}^2 for the eigenvalue ``lam`` at site ``mu``."""
    if not 0 <= mu < chain.n:
        raise IndexError(f"site {mu} outside chain of {chain.n} sites")
    return float(squared_components(chain, lam)[mu])


def sturm_count(chain: Chain, x: float) -> int:
    """Number of eigenvalues strictly below ``x``.

    Counts positive ratios chi_{1:j}(x) / chi_{1:j-1}(x) of the leading-minor
    sequence; a vanishing ratio is replaced by a tiny negative pivot.
    """
    e2 = chain.couplings**2
    pivmin = _TINY * max(1.0, float(np.max(e2)) if e2.size else 1.0)
    count = 0
    q = 1.0
    for j in range(chain.n):
        q = (x - chain.onsite[j]) - (e2[j - 1] / q if j > 0 else 0.0)
        if abs(q) < pivmin:
            q = -pivmin
        if q > 0:
            count += 1
    return count


def eigenvalues_bisection(chain: Chain, tol: float = 1e-12) -> np.ndarray:
    """Ascending eigenvalues, each bracketed to width ``tol`` by Sturm-count bisection."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    lo0, hi0 = chain.gershgorin()
    pad = max(abs(lo0), abs(hi0), 1.0) * 4 * np.finfo(float).eps
    lo0 -= pad
    hi0 += pad
    out = np.empty(chain.n)
    for k in range(chain.n):
        lo, hi = lo0 if k == 0 else max(lo0, out[k - 1] - tol), hi0
        # smallest x with count(x) >= k + 1 lies in (lo, hi]
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            if sturm_count(chain, mid) >= k + 1:
                hi = mid
            else:
                lo = mid
        out[k] = 0.5 * (lo + hi)
    return out


def recover_signs(chain: Chain, lam: float, magnitudes, check: bool = True) -> np.ndarray:
    """Signed eigenvector from component magnitudes via the eigenvector recurrence.

    ``eps_{mu,mu+1} s_{mu+1} = (lam - a_mu) s_mu - eps_{mu-1,mu} s_{mu-1}`` fixes
    the sign of each component from its predecessors.  Where the recurrence is
    broken (zero coupling, or two consecutive exactly vanishing components)
    the sign chain restarts at the next nonzero component with a ZeroPivot
    warning.  The
    first nonzero component of the result is positive.
    """
    if check:
        check_nondegenerate(chain, lam)
    m = np.asarray(magnitudes, dtype=float)
    if m.size != chain.n:
        raise ValueError("magnitudes must have one entry per site")
    m = np.abs(m)
    a, e = chain.onsite, chain.couplings
    v = np.zeros(chain.n)
    started = False
    for mu in range(chain.n):
        if m[mu] == 0.0:
            continue
        if not started:
            v[mu] = m[mu]
            started = True
            continue
        prev = v[mu - 1]
        prev2 = v[mu - 2] if mu >= 2 else 0.0
        bond = e[mu - 1]
        if bond == 0.0 or (prev == 0.0 and prev2 == 0.0):
            warnings.warn(
                f"sign chain broken before site {mu}; restarting with positive sign",
                ZeroPivot,
                stacklevel=2,
            )
            v[mu] = m[mu]
            continue
        left = e[mu - 2] * prev2 if mu >= 2 else 0.0
        predicted = ((lam - a[mu - 1]) * prev - left) / bond
        v[mu] = math.copysign(m[mu], predicted)
    return v
