"""Reference chains used by the tests, the acceptance suite and the bundled configs."""

from __future__ import annotations

import numpy as np

from .chain import Chain, LSDomain, contrast

GENERIC_ONSITE = (0.8, 2.4, 2.9, 5.0, 1.9, 3.0, 2.5, 4.0, 1.8, 0.9, 3.1, 4.9)
PAIRED_ONSITE = (0.8, 2.4, 2.4, 0.8, 1.9, 3.0, 3.0, 1.9, 3.2, 0.9, 0.9, 3.2)
WEAK_EPS = 0.15
CLUSTER_DOMAINS = (LSDomain(0, 3), LSDomain(4, 7), LSDomain(8, 11))
CLUSTER_INTRA = 0.45
CLUSTER_INTER = 0.1
MIRROR_ONSITE = (1.9, 1.4, 1.1, 1.5, 1.5, 1.1, 1.4, 1.9)
MIRROR_EPS = 0.4
EMBEDDED_ONSITE = (6.0, 13.0, 10.0, 5.0, 8.0, 8.0, 5.0, 10.0, 18.0, 9.0)
EMBEDDED_EPS = 0.5
EMBEDDED_DOMAIN = LSDomain(2, 7)


def generic(eps: float = WEAK_EPS) -> Chain:
    """Generic chain without equal neighbours."""
    return Chain.uniform(GENERIC_ONSITE, eps)


def paired(eps: float = WEAK_EPS) -> Chain:
    """Three four-site reflection domains, each with a degenerate center pair."""
    return Chain.uniform(PAIRED_ONSITE, eps)


def clustered() -> Chain:
    bonds = np.full(len(PAIRED_ONSITE) - 1, CLUSTER_INTER)
    for dom in CLUSTER_DOMAINS:
        bonds[dom.start : dom.end] = CLUSTER_INTRA
    return Chain(PAIRED_ONSITE, bonds)


def mirror(eps: float = MIRROR_EPS, eps_c: float | None = None) -> Chain:
    """Fully reflection-symmetric 8-site chain; center bond 3."""
    ch = Chain.uniform(MIRROR_ONSITE, eps)
    if eps_c is None:
        return ch
    bonds = ch.couplings.copy()
    bonds[3] = eps_c
    return Chain(ch.onsite, bonds)


def embedded(eps: float = EMBEDDED_EPS) -> Chain:
    """10-site chain with the embedded domain [2, 7]; center bond 4."""
    return Chain.uniform(EMBEDDED_ONSITE, eps)


def random_domain_chain(
    rng: np.random.Generator,
    n_domains: int = 4,
    half: int = 3,
    eps: float = 0.5,
    low: float = 0.0,
    high: float = 10.0,
    min_contrast: float = 1.0,
    max_tries: int = 10_000,
) -> tuple[Chain, list[LSDomain]]:
    """Concatenated reflection domains with uniform coupling and contrast above ``min_contrast``."""
    size = 2 * half
    for _ in range(max_tries):
        onsite = []
        for _ in range(n_domains):
            left = rng.uniform(low, high, half)
            onsite.extend(left)
            onsite.extend(left[::-1])
        ch = Chain.uniform(onsite, eps)
        if contrast(ch) > min_contrast:
            doms = [LSDomain(k * size, (k + 1) * size - 1) for k in range(n_domains)]
            return ch, doms
    raise RuntimeError("no chain with the requested contrast found")
