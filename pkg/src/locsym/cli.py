"""``locsym`` command line: spectra, eigenstate maps, center-coupling sweeps,
weak-coupling series and domain detection written as CSV/PGM files."""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .chain import Chain, ChainConfig, LSDomain, build, contrast, detect_reflection_domains, load_config
from .errors import ChainError, TrackingAmbiguity, UnsupportedDegeneracy
from .symmetry import DEFAULT_THETA, count_localized, eigenstate_map, splitting_fit, sweep_center_coupling
from .tridiag import eigh
from .weak_coupling import classify_sites, component_series, eigenvalue_series, match_states

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_TRACKING, EXIT_DEGENERACY = 0, 2, 3, 4, 5
DEFAULT_GRID = "0:0.5:101"


class UsageError(ChainError):
    """Bad command-line value (reported with the config exit code)."""


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


def manifest(args, overrides: dict) -> str:
    over = ",".join(f"{k}={v}" for k, v in sorted(overrides.items())) or "none"
    return (
        f"# locsym {__version__} | command={args.command} | config={args.config}"
        f" | overrides={over} | out={args.out}"
    )


def render_csv(header_line: str, columns, rows) -> str:
    buf = io.StringIO()
    buf.write(header_line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    return buf.getvalue()


def render_pgm(header_line: str, values: np.ndarray) -> str:
    """Plain P2 image; ``values`` is (state, site) in ascending energy, drawn highest energy on top."""
    top = float(np.max(values))
    pixels = np.floor(255.0 * values / top + 0.5).astype(int) if top > 0 else np.zeros(values.shape, int)
    rows, cols = pixels.shape
    lines = ["P2", header_line, f"{cols} {rows}", "255"]
    lines.extend(" ".join(str(p) for p in row) for row in pixels[::-1])
    return "\n".join(lines) + "\n"


def write_outputs(out_dir: Path, files: dict[str, str]) -> None:
    """Write every file through a temporary sibling and an atomic rename."""
    out_dir.mkdir(parents=True, exist_ok=True)
    for name in sorted(files):
        fd, tmp = tempfile.mkstemp(prefix=f".{name}.", dir=out_dir)
        try:
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(files[name])
            os.replace(tmp, out_dir / name)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise


def parse_grid(text: str) -> np.ndarray:
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"grid {text!r} must be start:stop:count")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise UsageError(f"grid {text!r} must be start:stop:count") from exc
    if count < 1:
        raise UsageError("grid count must be >= 1")
    return np.linspace(start, stop, count)


def parse_domain(text: str) -> LSDomain:
    try:
        start, end = (int(v) for v in text.split(","))
    except ValueError as exc:
        raise UsageError(f"domain {text!r} must be START,END") from exc
    return LSDomain(start, end)


def load_chain(args) -> tuple[ChainConfig, Chain]:
    cfg = load_config(args.config)
    if args.eps is not None:
        cfg = ChainConfig(cfg.onsite, float(args.eps), cfg.domains)
    return cfg, build(cfg)


def overrides_of(args) -> dict:
    keys = ("domain", "grid", "eps", "theta")
    return {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}


def cmd_spectrum(args) -> int:
    _, chain = load_chain(args)
    spec = eigh(chain)
    head = manifest(args, overrides_of(args))
    n = chain.n
    files = {
        "spectrum.csv": render_csv(head, ["index", "eigenvalue"], enumerate(spec.eigenvalues)),
        "eigvecs.csv": render_csv(
            head,
            ["state"] + [f"site_{m}" for m in range(n)],
            ([i, *spec.eigenvectors[:, i]] for i in range(n)),
        ),
    }
    write_outputs(Path(args.out), files)
    print(f"{n} eigenvalues in [{fmt(spec.eigenvalues[0])}, {fmt(spec.eigenvalues[-1])}]")
    return EXIT_OK


def cmd_map(args) -> int:
    cfg, chain = load_chain(args)
    theta = DEFAULT_THETA if args.theta is None else float(args.theta)
    if not 0.5 < theta <= 1.0:
        raise UsageError("theta must lie in (0.5, 1]")
    spec = eigh(chain)
    emap = eigenstate_map(spec)
    head = manifest(args, overrides_of(args))
    n = chain.n
    files = {
        "map.csv": render_csv(
            head,
            ["state", "eigenvalue"] + [f"site_{m}" for m in range(n)],
            ([i, spec.eigenvalues[i], *emap.values[i]] for i in range(n)),
        ),
        "map.pgm": render_pgm(head, emap.values),
    }
    write_outputs(Path(args.out), files)
    domains = list(cfg.domains) or detect_reflection_domains(chain)
    if domains:
        report = count_localized(spec, domains, theta)
        names = ", ".join(f"[{d.start},{d.end}]" for d in domains)
        print(f"{report.n_localized} of {n} states hold >= {theta:g} of their weight on one of {names}")
    else:
        print(f"{n}x{n} eigenstate map written; no reflection domains found")
    return EXIT_OK


def _sweep_domain(args, cfg: ChainConfig, chain: Chain) -> LSDomain:
    if args.domain is not None:
        return parse_domain(args.domain)
    candidates = list(cfg.domains) or detect_reflection_domains(chain)
    if len(candidates) == 1:
        return candidates[0]
    if not candidates:
        raise UsageError("no reflection domain found; pass --domain START,END")
    names = " ".join(f"{d.start},{d.end}" for d in candidates)
    raise UsageError(f"several candidate domains ({names}); choose one with --domain")


def cmd_sweep(args) -> int:
    cfg, chain = load_chain(args)
    domain = _sweep_domain(args, cfg, chain)
    grid = parse_grid(args.grid or DEFAULT_GRID)
    if grid[0] != 0.0:
        raise UsageError("the sweep grid must start at 0")
    if grid.size > 1 and np.any(np.diff(grid) <= 0):
        raise UsageError("the sweep grid must be increasing")
    if domain.end >= chain.n or not domain.is_symmetric_in(chain):
        raise UsageError(f"domain [{domain.start},{domain.end}] is not reflection symmetric in this chain")
    sweep = sweep_center_coupling(chain, domain, grid)
    head = manifest(args, overrides_of(args))
    sweep_rows = ([e, *row] for e, row in zip(sweep.grid, sweep.tracks))
    fits = []
    if grid.size > 1:
        for p in sorted(sweep.pairs, key=lambda p: p.depth):
            f = splitting_fit(sweep, p.pair)
            fits.append([p.pair, f.origin_slope, f.fit_slope, f.r_squared, f.residual_gap, p.depth])
    files = {
        "sweep.csv": render_csv(
            head, ["eps_c"] + [f"lambda_{k + 1}" for k in range(chain.n)], sweep_rows
        ),
        "fits.csv": render_csv(
            head, ["pair", "origin_slope", "fit_slope", "r_squared", "residual_gap", "depth"], fits
        ),
    }
    write_outputs(Path(args.out), files)
    print(
        f"swept bond {domain.center_bond} of domain [{domain.start},{domain.end}] over "
        f"{grid.size} points; {len(sweep.pairs)} pairs"
    )
    return EXIT_OK


def cmd_perturb(args) -> int:
    cfg, chain = load_chain(args)
    classify_sites(chain.onsite)
    if args.eps is not None:
        eps = float(args.eps)
    elif chain.is_uniform() and chain.n > 1:
        eps = float(chain.couplings[0])
    else:
        raise UsageError("non-uniform coupling: pass --eps for the series check")
    uniform = Chain.uniform(chain.onsite, eps)
    series = eigenvalue_series(uniform)
    comps = component_series(uniform)
    head = manifest(args, overrides_of(args))
    n = chain.n

    series_rows = [[s.state, s.kind, s.lam0, s.lam1, s.lam2] for s in series]
    comp_rows = [
        [c.state, mu, c.c0[mu], c.c1[mu], c.c2[mu], int(bool(c.valid[mu]))]
        for c in comps
        for mu in range(n)
    ]
    spec = eigh(uniform)
    match = match_states(series, spec.eigenvalues, eps)
    sq = spec.squared()
    check_rows = []
    for s, c in zip(series, comps):
        k = match[s.state]
        approx, exact = s(eps), spec.eigenvalues[k]
        diff = np.abs(np.clip(c(eps), 0.0, 1.0) - sq[:, k])[c.valid]
        check_rows.append(
            [s.state, k, eps, approx, exact, abs(approx - exact), float(diff.max()) if diff.size else math.nan]
        )
    files = {
        "series.csv": render_csv(head, ["state", "class", "lambda0", "lambda1", "lambda2"], series_rows),
        "components_series.csv": render_csv(head, ["state", "site", "c0", "c1", "c2", "valid"], comp_rows),
        "check.csv": render_csv(
            head,
            ["state", "exact_index", "eps", "series_eigenvalue", "exact_eigenvalue", "abs_error", "max_component_error"],
            check_rows,
        ),
    }
    write_outputs(Path(args.out), files)
    pairs = sum(1 for s in series if s.kind == "pair") // 2
    print(f"{n} states, {pairs} degenerate pairs; series checked at eps={fmt(eps)}")
    return EXIT_OK


def cmd_detect(args) -> int:
    _, chain = load_chain(args)
    found = detect_reflection_domains(chain)
    head = manifest(args, overrides_of(args))
    rows = [[d.start, d.end, d.center_bond] for d in found]
    write_outputs(Path(args.out), {"domains.csv": render_csv(head, ["start", "end", "center_bond"], rows)})
    c = contrast(chain) if chain.n > 1 else math.inf
    print(f"{len(found)} reflection domain(s); contrast {fmt(c)}")
    for d in found:
        print(f"  [{d.start},{d.end}] center bond {d.center_bond}")
    return EXIT_OK


COMMANDS = {
    "spectrum": cmd_spectrum,
    "map": cmd_map,
    "sweep": cmd_sweep,
    "perturb": cmd_perturb,
    "detect": cmd_detect,
}


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="locsym", description=__doc__)
    parser.add_argument("--version", action="version", version=f"locsym {__version__}")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="JSON chain configuration")
    parser.add_argument("--domain", help="reflection domain START,END (0-based, inclusive)")
    parser.add_argument("--grid", help=f"center-coupling grid start:stop:count (default {DEFAULT_GRID})")
    parser.add_argument("--eps", type=float, help="uniform coupling overriding the config")
    parser.add_argument("--theta", type=float, help=f"localization threshold (default {DEFAULT_THETA})")
    parser.add_argument("--out", default=".", help="output directory")
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UnsupportedDegeneracy as exc:
        sites = ",".join(str(s) for s in exc.sites)
        print(f"locsym: unsupported degeneracy on sites {sites}: {exc}", file=sys.stderr)
        return EXIT_DEGENERACY
    except TrackingAmbiguity as exc:
        print(f"locsym: tracking ambiguity at eps_c={exc.eps_c!r}: {exc}", file=sys.stderr)
        return EXIT_TRACKING
    except (ChainError, OSError) as exc:
        print(f"locsym: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ArithmeticError as exc:
        print(f"locsym: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
