import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from locsym.chain import Chain
from locsym.errors import DegenerateSite, NotAdjacentDegenerate, UnsupportedDegeneracy
from locsym.tridiag import eigh, eigvalsh
from locsym.weak_coupling import (
    boundary_mask,
    classify_sites,
    component_series,
    component_series_degenerate,
    component_series_nondegenerate,
    d_terms,
    eigenvalue_series,
    eigvalue_series_degenerate_pair,
    eigvalue_series_nondegenerate,
    match_states,
)
from locsym import fixtures as F

# an asymmetric pair (4, 5): its neighbours sit at unequal distances
ASYM = [0.3, 1.4, 3.7, 0.9, 2.0, 2.0, 3.1, 0.6, 4.2, 1.1, 2.7]


def exact_matched(onsite, eps):
    """Exact eigenvalues/squared components reordered to follow the site labels."""
    ch = Chain.uniform(onsite, eps)
    series = eigenvalue_series(Chain.uniform(onsite, 1.0))
    spec = eigh(ch)
    m = match_states(series, spec.eigenvalues, eps)
    order = [m[s.state] for s in series]
    return spec.eigenvalues[order], spec.squared()[:, order]


def second_order_oracle(a, i):
    """lambda_2 of site i from non-degenerate Rayleigh-Schroedinger theory."""
    return sum(1.0 / (a[i] - a[j]) for j in (i - 1, i + 1) if 0 <= j < len(a))


class TestClassify:
    def test_generic_all_nondegenerate(self):
        cl = classify_sites(F.GENERIC_ONSITE)
        assert cl.nondegenerate == tuple(range(12)) and cl.pairs == () and cl.twins == {}

    def test_paired_pairs_and_twins(self):
        cl = classify_sites(F.PAIRED_ONSITE)
        assert cl.pairs == ((1, 2), (5, 6), (9, 10))
        assert cl.twins[0] == 3 and cl.twins[4] == 7 and cl.twins[8] == 11

    @pytest.mark.parametrize(
        "onsite, sites",
        [([1.0, 2.0, 1.0], (0, 2)), ([1.0, 1.0, 1.0, 3.0], (0, 1, 2)), ([5.0, 2.0, 2.0, 0.0, 2.0], (1, 2, 4))],
    )
    def test_unsupported(self, onsite, sites):
        with pytest.raises(UnsupportedDegeneracy) as info:
            classify_sites(onsite)
        assert info.value.sites == sites


class TestEigenvalueSeries:
    def test_generic_first_order_vanishes(self):
        assert all(s.lam1 == 0.0 for s in eigenvalue_series(F.generic()))

    @pytest.mark.parametrize("name", ["GENERIC_ONSITE", "PAIRED_ONSITE", "MIRROR_ONSITE", "EMBEDDED_ONSITE"])
    def test_lambda2_matches_rayleigh_schroedinger(self, name):
        a = np.array(getattr(F, name))
        ch = Chain.uniform(a, 0.1)
        cl = classify_sites(a)
        for i in cl.nondegenerate:
            ref = second_order_oracle(a, i)
            scale = sum(abs(1.0 / (a[i] - a[j])) for j in (i - 1, i + 1) if 0 <= j < len(a))
            assert abs(eigvalue_series_nondegenerate(ch, i).lam2 - ref) <= 1e-13 * scale

    def test_pair_first_order_is_plus_minus_one(self, paired):
        for p in classify_sites(paired.onsite).pairs:
            up, down = eigvalue_series_degenerate_pair(paired, p)
            assert (up.lam1, down.lam1) == (1.0, -1.0)
            assert (up.state, down.state) == p

    def test_pair_second_order_against_effective_hamiltonian(self):
        # second-order effective 2x2 Hamiltonian on the pair subspace
        a = np.array(ASYM)
        a[6] = 3.6
        up, down = eigvalue_series_degenerate_pair(Chain.uniform(a, 1.0), (4, 5))
        g1, g2 = 1.0 / (a[4] - a[3]), 1.0 / (a[4] - a[6])
        eps = 1e-4
        heff = np.array([[a[4] + eps**2 * g1, eps], [eps, a[4] + eps**2 * g2]])
        lo, hi = np.linalg.eigvalsh(heff)
        # the effective-Hamiltonian gap carries an O(eps) remainder
        assert up.lam2 == pytest.approx((hi - a[4] - eps) / eps**2, abs=1e-4)
        assert down.lam2 == pytest.approx((lo - a[4] + eps) / eps**2, abs=1e-4)
        assert up.lam2 == pytest.approx(0.5 * (g1 + g2))

    def test_errors(self, paired):
        with pytest.raises(DegenerateSite):
            eigvalue_series_nondegenerate(paired, 1)
        with pytest.raises(NotAdjacentDegenerate):
            eigvalue_series_degenerate_pair(paired, (0, 3))

    def test_single_site(self):
        (s,) = eigenvalue_series(Chain([4.0], []))
        assert (s.lam0, s.lam1, s.lam2) == (4.0, 0.0, 0.0)

    def test_nondegenerate_error_is_fourth_order(self):
        # the spectrum is even in eps, so the first omitted term is eps^4
        a = F.GENERIC_ONSITE
        series = eigenvalue_series(Chain.uniform(a, 1.0))
        lam0 = np.array([s(0.02) for s in series])
        lam1 = np.array([s(0.01) for s in series])
        e0 = np.abs(exact_matched(a, 0.02)[0] - lam0)
        e1 = np.abs(exact_matched(a, 0.01)[0] - lam1)
        ratio = e0 / e1
        assert np.all((ratio > 14.5) & (ratio < 17.5))

    def test_pair_error_is_third_order(self):
        a = F.PAIRED_ONSITE
        series = eigenvalue_series(Chain.uniform(a, 1.0))
        errs = []
        for eps in (0.004, 0.002):
            exact = exact_matched(a, eps)[0]
            errs.append(np.array([abs(exact[k] - s(eps)) for k, s in enumerate(series) if s.kind == "pair"]))
        ratio = errs[0] / errs[1]
        assert np.all((ratio > 7.0) & (ratio < 9.0))

    def test_match_states_is_a_permutation(self, paired):
        series = eigenvalue_series(paired)
        m = match_states(series, eigvalsh(paired), 0.15)
        assert sorted(m.values()) == list(range(12))


class TestComponentSeries:
    def test_boundary_mask(self):
        assert np.flatnonzero(boundary_mask(12)).tolist() == [3, 4, 5, 6, 7, 8]
        assert not boundary_mask(6).any()

    def test_nondegenerate_structure(self, generic):
        a = generic.onsite
        c = component_series_nondegenerate(generic, 5)
        assert c.c0.tolist() == [0.0] * 5 + [1.0] + [0.0] * 6
        assert np.all(c.c1 == 0.0)
        assert c.c2[4] == pytest.approx(1.0 / (a[5] - a[4]) ** 2)
        assert c.c2[6] == pytest.approx(1.0 / (a[5] - a[6]) ** 2)
        assert c.c2.sum() == pytest.approx(0.0, abs=1e-14)

    def test_nondegenerate_against_eigh(self):
        a = F.GENERIC_ONSITE
        eps = 1e-3
        s2 = exact_matched(a, eps)[1]
        for c in component_series(Chain.uniform(a, 1.0)):
            off = np.arange(12) != c.state
            lim = s2[:, c.state] / eps**2
            assert np.allclose(lim[off], c.c2[off], rtol=1e-3, atol=5e-5)
            assert (s2[c.state, c.state] - 1.0) / eps**2 == pytest.approx(c.c2[c.state], rel=1e-4)

    def test_pair_zeroth_and_first_order(self):
        a = np.array(ASYM)
        up, down = component_series_degenerate(Chain.uniform(a, 1.0), (4, 5))
        assert up.c0[4] == up.c0[5] == pytest.approx(0.5)
        d1, d2 = 1.0 / (a[4] - a[3]), 1.0 / (a[4] - a[6])
        assert up.c1[4] == pytest.approx((d1 - d2) / 4)
        assert down.c1[4] == pytest.approx(-(d1 - d2) / 4)
        assert up.c1[5] == pytest.approx(-up.c1[4])
        assert np.all(np.isnan(up.c2)) and up.order == 1

    def test_pair_first_order_against_eigh(self):
        a = np.array(ASYM)
        up, _ = component_series_degenerate(Chain.uniform(a, 1.0), (4, 5))
        slopes = []
        for eps in (2e-3, 1e-3):
            s2 = exact_matched(a, eps)[1]
            slopes.append((s2[4, 4] - 0.5) / eps)
        # the slope converges linearly in eps to c1
        extrapolated = 2 * slopes[1] - slopes[0]
        assert extrapolated == pytest.approx(up.c1[4], rel=1e-3)

    def test_off_pair_onset_is_quadratic(self):
        # c1 vanishes away from the pair; the weight grows as eps^2 / (2 X^2)
        a = np.array(ASYM)
        up, _ = component_series_degenerate(Chain.uniform(a, 1.0), (4, 5))
        assert up.c0[3] == 0.0 and up.c1[3] == 0.0
        eps = 1e-4
        s2 = exact_matched(a, eps)[1]
        assert s2[3, 4] / eps**2 == pytest.approx(0.5 / (a[4] - a[3]) ** 2, rel=1e-3)

    def test_twin_sites_are_flagged(self, paired):
        c = component_series_nondegenerate(paired, 4)
        assert not c.valid[4] and not c.valid[7]
        assert c.valid[3] and c.valid[8]

    def test_d_terms_zeroth_order(self, generic):
        a = generic.onsite
        d = d_terms(generic, 5, 5)
        assert d.raw[0] == pytest.approx(np.prod(np.delete(a[5] - a, 5)))
        assert d.d1 == 0.0

    def test_call_clips_nothing(self, generic):
        c = component_series_nondegenerate(generic, 6)
        assert c(0.1) == pytest.approx(c.c0 + 0.01 * c.c2)


@given(st.integers(4, 10), st.integers(0, 2**31))
def test_random_nondegenerate_series(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.permutation(np.arange(n, dtype=float) * 0.7) + rng.uniform(0, 0.1, n)
    assume(np.min(np.abs(np.diff(a))) > 0.3)
    eps = 1e-3
    exact = exact_matched(a, eps)[0]
    series = eigenvalue_series(Chain.uniform(a, 1.0))
    for k, s in enumerate(series):
        assert s.lam2 == pytest.approx(second_order_oracle(a, s.state), abs=1e-12)
        assert abs(exact[k] - s(eps)) < 200 * eps**4
