"""Spectra and eigenstate localization of tight-binding chains with locally
reflection-symmetric domains."""

from .chain import (
    Chain,
    ChainConfig,
    LSDomain,
    build,
    contrast,
    detect_reflection_domains,
    extract_subdomain,
    load_config,
    reflect,
    set_bond,
)
from .charpoly import (
    cp_derivative,
    cp_leading,
    cp_trailing,
    eigenvalues_bisection,
    recover_signs,
    squared_component,
    squared_components,
    sturm_count,
)
from .symmetry import (
    count_localized,
    domain_weight,
    domain_weights,
    eigenstate_map,
    isospectral,
    splitting_fit,
    subdomain_eigvec_relation,
    sweep_center_coupling,
    theoretical_slope,
)
from .tridiag import Spectrum, eigh, eigvalsh
from .weak_coupling import (
    classify_sites,
    component_series,
    d_terms,
    eigenvalue_series,
    eigvalue_series_degenerate_pair,
    eigvalue_series_nondegenerate,
)

__version__ = "0.1.0"
