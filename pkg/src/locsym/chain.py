"""Tight-binding chains, reflection-symmetric domains and their configuration.

A chain is the real symmetric tridiagonal Hamiltonian

    H = sum_i a_i |i><i| + sum_i eps_i (|i><i+1| + |i+1><i|)

stored as its on-site energies ``a`` (length n) and bond couplings ``eps``
(length n - 1).  Sites are 0-based, bond ``b`` joins sites ``b`` and ``b + 1``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ChainError, ConfigError

DETECT_TOL = 1e-12


def _frozen(values, name: str) -> np.ndarray:
    try:
        arr = np.array(values, dtype=float).reshape(-1)
    except (TypeError, ValueError) as exc:
        raise ChainError(f"{name} must be a sequence of numbers") from exc
    if not np.all(np.isfinite(arr)):
        raise ChainError(f"{name} contains non-finite values")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class Chain:
    """Immutable tight-binding chain (on-site energies plus nearest-neighbour couplings)."""

    onsite: np.ndarray
    couplings: np.ndarray = field(default=())

    def __post_init__(self):
        onsite = _frozen(self.onsite, "onsite")
        couplings = _frozen(self.couplings, "couplings")
        if onsite.size < 1:
            raise ChainError("a chain needs at least one site")
        if couplings.size != onsite.size - 1:
            raise ChainError(
                f"expected {onsite.size - 1} couplings for {onsite.size} sites, got {couplings.size}"
            )
        object.__setattr__(self, "onsite", onsite)
        object.__setattr__(self, "couplings", couplings)

    @classmethod
    def uniform(cls, onsite: Sequence[float], eps: float) -> "Chain":
        n = len(onsite)
        return cls(onsite, np.full(max(n - 1, 0), float(eps)))

    @property
    def n(self) -> int:
        return int(self.onsite.size)

    def matrix(self) -> np.ndarray:
        """Dense n x n Hamiltonian."""
        return np.diag(self.onsite) + np.diag(self.couplings, 1) + np.diag(self.couplings, -1)

    def gershgorin(self) -> tuple[float, float]:
        """Interval containing every eigenvalue."""
        e = np.abs(self.couplings)
        radius = np.zeros(self.n)
        radius[:-1] += e
        radius[1:] += e
        return float(np.min(self.onsite - radius)), float(np.max(self.onsite + radius))

    def is_uniform(self) -> bool:
        return self.couplings.size == 0 or bool(np.all(self.couplings == self.couplings[0]))

    def __eq__(self, other):
        if not isinstance(other, Chain):
            return NotImplemented
        return np.array_equal(self.onsite, other.onsite) and np.array_equal(
            self.couplings, other.couplings
        )

    def __hash__(self):
        return hash((self.onsite.tobytes(), self.couplings.tobytes()))

    def __repr__(self):
        return f"Chain(onsite={self.onsite.tolist()}, couplings={self.couplings.tolist()})"


@dataclass(frozen=True)
class LSDomain:
    """Contiguous reflection-symmetric range ``[start, end]`` (inclusive)."""

    start: int
    end: int
    kind: str = "reflection"

    def __post_init__(self):
        size = self.end - self.start + 1
        if self.start < 0 or size < 2 or size % 2:
            raise ChainError(f"domain [{self.start},{self.end}] must have even size >= 2")
        if self.kind != "reflection":
            raise ChainError(f"unsupported domain kind {self.kind!r}")

    @property
    def size(self) -> int:
        return self.end - self.start + 1

    @property
    def center_bond(self) -> int:
        return self.start + self.size // 2 - 1

    @property
    def sites(self) -> range:
        return range(self.start, self.end + 1)

    def mirror(self, n: int) -> "LSDomain":
        """Same domain seen in the reflected chain of length n."""
        return LSDomain(n - 1 - self.end, n - 1 - self.start, self.kind)

    def is_symmetric_in(self, chain: Chain, tol: float = DETECT_TOL) -> bool:
        if self.end >= chain.n:
            return False
        seg = chain.onsite[self.start : self.end + 1]
        return bool(np.all(np.abs(seg - seg[::-1]) <= tol))


def as_domain(domain) -> LSDomain:
    if isinstance(domain, LSDomain):
        return domain
    start, end = domain
    return LSDomain(int(start), int(end))


@dataclass(frozen=True)
class ChainConfig:
    """Parsed configuration: on-site list, coupling spec and optional explicit domains.

    ``coupling`` is a scalar, a per-bond list, or a mapping ``{"intra": x, "inter": y}``.
    """

    onsite: tuple
    coupling: object
    domains: tuple = ()

    @classmethod
    def from_dict(cls, data) -> "ChainConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(data) - {"onsite", "coupling", "domains"}
        if unknown:
            raise ConfigError(f"unknown keys: {sorted(unknown)}")
        if "onsite" not in data:
            raise ConfigError("missing key 'onsite'")
        onsite = data["onsite"]
        if not isinstance(onsite, list) or not all(_is_number(v) for v in onsite):
            raise ConfigError("'onsite' must be an array of numbers")
        if not onsite:
            raise ConfigError("'onsite' must not be empty")
        coupling = data.get("coupling", 0.0)
        if isinstance(coupling, dict):
            if set(coupling) != {"intra", "inter"} or not all(
                _is_number(v) for v in coupling.values()
            ):
                raise ConfigError("'coupling' object must be exactly {\"intra\": x, \"inter\": y}")
            coupling = {"intra": float(coupling["intra"]), "inter": float(coupling["inter"])}
        elif isinstance(coupling, list):
            if not all(_is_number(v) for v in coupling):
                raise ConfigError("'coupling' array must contain numbers")
            coupling = tuple(float(v) for v in coupling)
        elif _is_number(coupling):
            coupling = float(coupling)
        else:
            raise ConfigError("'coupling' must be a number, an array or an intra/inter object")
        domains = []
        for item in data.get("domains", []) or []:
            if not isinstance(item, dict) or set(item) != {"start", "end"}:
                raise ConfigError("each domain must be an object with 'start' and 'end'")
            if not all(isinstance(item[k], int) and not isinstance(item[k], bool) for k in item):
                raise ConfigError("domain bounds must be integers")
            try:
                domains.append(LSDomain(item["start"], item["end"]))
            except ChainError as exc:
                raise ConfigError(str(exc)) from exc
        return cls(tuple(float(v) for v in onsite), coupling, tuple(domains))

    def to_dict(self) -> dict:
        coupling = self.coupling
        if isinstance(coupling, tuple):
            coupling = list(coupling)
        out = {"onsite": list(self.onsite), "coupling": coupling}
        if self.domains:
            out["domains"] = [{"start": d.start, "end": d.end} for d in self.domains]
        return out


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def load_config(path) -> ChainConfig:
    """Read a JSON config file; syntax errors carry line/column information."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, exc.lineno, exc.colno) from exc
    return ChainConfig.from_dict(data)


def build(config: ChainConfig) -> Chain:
    """Expand a config into a chain with per-bond couplings.

    For an intra/inter coupling spec, bonds lying strictly inside a domain get
    the intra value and all other bonds the inter value.  Domains default to the
    maximal reflection domains found in the on-site sequence.
    """
    onsite = np.asarray(config.onsite, dtype=float)
    if onsite.size == 0:
        raise ChainError("'onsite' must not be empty")
    if not np.all(np.isfinite(onsite)):
        raise ChainError("on-site values must be finite")
    n = onsite.size
    coupling = config.coupling
    if isinstance(coupling, dict):
        domains = config.domains or tuple(
            detect_reflection_domains(Chain(onsite, np.zeros(n - 1)))
        )
        if not domains:
            raise ChainError("intra/inter coupling needs domains and none were detected")
        bonds = np.full(n - 1, coupling["inter"])
        for dom in domains:
            if dom.end >= n:
                raise ChainError(f"domain [{dom.start},{dom.end}] exceeds chain of {n} sites")
            bonds[dom.start : dom.end] = coupling["intra"]
    elif isinstance(coupling, (tuple, list)):
        bonds = np.asarray(coupling, dtype=float)
        if bonds.size != n - 1:
            raise ChainError(f"expected {n - 1} couplings, got {bonds.size}")
    else:
        bonds = np.full(n - 1, float(coupling))
    chain = Chain(onsite, bonds)
    for dom in config.domains:
        if dom.end >= n:
            raise ChainError(f"domain [{dom.start},{dom.end}] exceeds chain of {n} sites")
        if not dom.is_symmetric_in(chain):
            raise ChainError(f"domain [{dom.start},{dom.end}] is not reflection symmetric")
    return chain


def detect_reflection_domains(
    chain: Chain, min_size: int = 2, tol: float = DETECT_TOL, maximal: bool = True
) -> list[LSDomain]:
    """Find even-length ranges whose on-site sequence is a palindrome within ``tol``.

    With ``maximal`` (default) only ranges not contained in another palindromic
    range are returned; otherwise every even palindromic range of size
    ``>= min_size`` is listed.  Overlapping ranges are reported independently.
    """
    if min_size < 2 or min_size % 2:
        raise ValueError("min_size must be even and >= 2")
    if tol < 0:
        raise ValueError("tol must be non-negative")
    a = chain.onsite
    n = chain.n
    found = []
    for c in range(n - 1):
        r = 0
        while c - r >= 0 and c + 1 + r < n and abs(a[c - r] - a[c + 1 + r]) <= tol:
            r += 1
        if maximal:
            if 2 * r >= min_size:
                found.append((c - r + 1, c + r))
        else:
            found.extend((c - k + 1, c + k) for k in range(max(min_size // 2, 1), r + 1))
    if maximal:
        found = [
            (s, e)
            for s, e in found
            if not any((s2 <= s and e <= e2) and (s2, e2) != (s, e) for s2, e2 in found)
        ]
    return [LSDomain(s, e) for s, e in sorted(found)]


def contrast(chain: Chain) -> float:
    """Smallest ratio |a_i - a_{i+1}| / |eps_i| over bonds joining unequal sites."""
    if chain.n < 2:
        raise ChainError("contrast needs at least two sites")
    best = math.inf
    for b in range(chain.n - 1):
        diff = abs(chain.onsite[b] - chain.onsite[b + 1])
        if diff == 0.0:
            continue
        eps = abs(chain.couplings[b])
        ratio = math.inf if eps == 0.0 else diff / eps
        best = min(best, ratio)
    return best


def extract_subdomain(chain: Chain, start: int, end: int) -> Chain:
    """Sub-chain on sites ``start..end`` keeping only its interior bonds."""
    if not (0 <= start <= end < chain.n):
        raise ChainError(f"range [{start},{end}] outside chain of {chain.n} sites")
    return Chain(chain.onsite[start : end + 1], chain.couplings[start:end])


def reflect(chain: Chain) -> Chain:
    return Chain(chain.onsite[::-1], chain.couplings[::-1])


def set_bond(chain: Chain, bond: int, value: float) -> Chain:
    """Copy of ``chain`` with coupling ``bond`` replaced."""
    if not (0 <= bond < chain.n - 1):
        raise ChainError(f"bond {bond} outside 0..{chain.n - 2}")
    bonds = chain.couplings.copy()
    bonds[bond] = value
    return Chain(chain.onsite, bonds)


def domains_for(chain: Chain, config: ChainConfig | None = None, min_size: int = 2) -> list[LSDomain]:
    """Explicit domains from the config if given, else detected maximal ones."""
    if config is not None and config.domains:
        return list(config.domains)
    return detect_reflection_domains(chain, min_size=min_size)

