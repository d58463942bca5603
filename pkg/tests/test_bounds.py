import math
from fractions import Fraction

import pytest

from gateid.bounds import (
    ancilla_bounds,
    ancilla_free_group_min_queries,
    assemble_report,
    copies_for_unambiguous,
    dimensional_min_queries,
    extra_queries_bound,
    linear_upper_bound,
)
from gateid.discriminate import min_queries_unambiguous, span_dimension
from gateid.gatesets import make_named_set
from gateid.optimize import minimax_fidelity


class TestDimensionalMinQueries:
    @pytest.mark.parametrize("card,d,expected", [(4, 2, 1), (5, 2, 2), (2, 7, 1)])
    def test_values(self, card, d, expected):
        assert dimensional_min_queries(card, d).n_queries == expected

    def test_crude_estimate(self):
        result = dimensional_min_queries(100, 2)
        assert result.crude_estimate == pytest.approx(100 ** (1 / 3) - 1)
        assert result.n_queries > result.crude_estimate

    def test_binomial_below_power(self):
        # equality holds exactly at k = 1; strict from k = 2 on
        for n in range(1, 21):
            assert math.comb(n + 1, 1) == (n + 1) ** 1
            for k in range(2, 21):
                assert math.comb(n + k, k) < (n + 1) ** k


class TestLinearUpperBound:
    @pytest.mark.parametrize("card,dim_u,expected", [(5, 2, 4), (4, 4, 1), (3, 3, 1)])
    def test_values(self, card, dim_u, expected):
        assert linear_upper_bound(card, dim_u) == expected

    def test_range_check(self):
        with pytest.raises(ValueError):
            linear_upper_bound(3, 4)


class TestCopiesForUnambiguous:
    def test_qubit_sic(self):
        # the exact tie (1/3)^1 * 3 = ... lands on the insufficient side
        assert copies_for_unambiguous(Fraction(1, 3), 4) == 3
        assert copies_for_unambiguous(1 / 3, 4) == 3  # float input snaps

    def test_dimension_ten_sic(self):
        assert copies_for_unambiguous(Fraction(1, 11), 100) == 4
        assert copies_for_unambiguous(1 / 11, 100) == 4

    @pytest.mark.parametrize("F", [0.0, 0.5, 0.99])
    def test_two_alternatives_need_one_copy(self, F):
        assert copies_for_unambiguous(F, 2) == 1

    def test_zero_fidelity(self):
        assert copies_for_unambiguous(0.0, 50) == 1

    def test_rejects_unit_fidelity(self):
        with pytest.raises(ValueError):
            copies_for_unambiguous(1.0, 3)

    def test_strictness_at_sqrt_boundary(self):
        # F = 1/9, K = 4: F^(1/2) * 3 = 1 exactly, so one copy is not enough
        assert copies_for_unambiguous(Fraction(1, 9), 4) == 2

    def test_matches_float_formula_off_ties(self):
        for F in (0.17, 0.42, 0.73):
            for K in (3, 7, 20):
                expected = math.floor(math.log(K - 1) / math.log(F**-0.5)) + 1
                assert copies_for_unambiguous(F, K) == expected


class TestAncillaBounds:
    def test_binomial(self):
        entries = ancilla_bounds(3, 2)
        assert entries[0].value == 4  # binom(4, 1)

    def test_group_bound(self):
        entries = ancilla_bounds(1, 2, group_order=4)
        by_tag = {e.name: e.value for e in entries}
        assert by_tag["ancilla group-size bound"] == pytest.approx(2.0)
        assert by_tag["ancilla group-size bound (ceiling)"] == 2

    def test_commuting(self):
        entries = ancilla_bounds(2, 3, commuting=True)
        assert any(e.value == 1 and e.eq_tag == "ancilla-commuting" for e in entries)

    def test_young_passthrough(self):
        entries = ancilla_bounds(2, 2, young_bound=3)
        assert any(e.eq_tag == "ancilla-irrep-ratio" and e.value == 3 for e in entries)


class TestExtraQueriesBound:
    @pytest.mark.parametrize(
        "d_A,order,d,expected", [(2, 4, 2, 2), (1, 4, 2, 1), (1, 1, 5, 0)]
    )
    def test_values(self, d_A, order, d, expected):
        assert extra_queries_bound(d_A, order, d) == expected

    def test_monotonicity(self):
        assert extra_queries_bound(4, 9, 3) >= extra_queries_bound(2, 9, 3)
        assert extra_queries_bound(2, 16, 2) >= extra_queries_bound(2, 4, 2)
        assert extra_queries_bound(2, 9, 2) >= extra_queries_bound(2, 9, 3)


class TestAncillaFreeGroupMinQueries:
    def test_shift_multiply(self):
        assert ancilla_free_group_min_queries(3, 9, 0, 0).n_queries == 2

    def test_pauli(self):
        assert ancilla_free_group_min_queries(2, 4, 0, 0).n_queries == 2

    def test_exact_tie_satisfied(self):
        # d = 3, |G| = 2, F = 1/9, C = 1: 3 (1 - 1/3) = 2 >= 2 exactly
        assert ancilla_free_group_min_queries(3, 2, Fraction(1, 9), 1).n_queries == 1
        assert ancilla_free_group_min_queries(3, 2, 1 / 9, 1).n_queries == 1

    def test_infeasible_is_reported_not_raised(self):
        result = ancilla_free_group_min_queries(2, 4, 0.999999, 3, n_cap=8)
        assert result.n_queries is None
        assert "criterion" in result.note

    def test_monotone_in_group_order(self):
        a = ancilla_free_group_min_queries(2, 4, 0, 0).n_queries
        b = ancilla_free_group_min_queries(2, 16, 0, 0).n_queries
        assert b >= a

    def test_bracket_with_alpha(self):
        result = ancilla_free_group_min_queries(2, 16, 0.01, 1, alpha=0.5)
        assert result.bracket is not None
        low, high = result.bracket
        assert low == 4  # ceil(log2 16)
        assert high == pytest.approx(4 + 1.0)  # + log2(1/0.5)


CATALOG_SMALL = [
    ("phase_point", dict(K=5, d=2)),
    ("phase_point", dict(K=3, d=2)),
    ("clock", dict(d=2, K=3)),
    ("clock", dict(d=2, K=5)),
    ("clock", dict(d=3, K=5)),
    ("shift_multiply", dict(d=2)),
    ("shift_multiply", dict(d=3)),
    ("grover", dict(d=3)),
    ("grover", dict(d=4)),
    ("permutation", dict(d=3)),
]


class TestAssembleReport:
    def test_phase_point_summary(self):
        g = make_named_set("phase_point", K=5, d=2)
        report = assemble_report(
            g, dim_u=span_dimension(g, 1), measured_n_min=min_queries_unambiguous(g)
        )
        values = {e.eq_tag: e.value for e in report.entries}
        assert values["dim-lower"] == 2
        assert values["linear-upper"] == 4
        assert report.measured_n_min == 4
        assert report.consistency_flags == []

    def test_pauli_summary(self):
        g = make_named_set("pauli")
        report = assemble_report(g, dim_u=4, measured_n_min=1, group_order=4)
        values = {e.eq_tag: e.value for e in report.entries}
        assert values["dim-lower"] == 1
        assert values["linear-upper"] == 1
        assert report.consistency_flags == []

    def test_permutation_reports_both_upper_bounds(self):
        g = make_named_set("permutation", d=3)
        fid = minimax_fidelity(g, "bipartite", restarts=2, seed=0)
        report = assemble_report(
            g,
            dim_u=span_dimension(g, 1),
            measured_n_min=min_queries_unambiguous(g),
            fidelity=fid.max_entangled_value,
        )
        values = {e.eq_tag: e.value for e in report.entries}
        # at the maximally entangled state F = 1/9 and the bound is 2
        assert values["fidelity-upper"] == 2
        assert values["linear-upper"] == 2
        assert report.consistency_flags == []

    def test_inconsistency_is_flagged(self):
        g = make_named_set("pauli")
        report = assemble_report(g, dim_u=4, measured_n_min=3)
        assert any("exceeds" in f for f in report.consistency_flags)

    @pytest.mark.parametrize("family,params", CATALOG_SMALL)
    def test_bounds_sandwich_catalog(self, family, params):
        g = make_named_set(family, **params)
        measured = min_queries_unambiguous(g)
        fid = minimax_fidelity(g, "bipartite", restarts=2, seed=0)
        report = assemble_report(
            g,
            dim_u=span_dimension(g, 1),
            measured_n_min=measured,
            fidelity=fid.value,
        )
        assert report.consistency_flags == []
        lower = next(e.value for e in report.entries if e.eq_tag == "dim-lower")
        query_uppers = [
            e.value for e in report.entries if e.eq_tag in ("linear-upper", "fidelity-upper")
        ]
        assert lower <= measured <= min(query_uppers)

    def test_markdown_and_csv_rendering(self):
        g = make_named_set("pauli")
        report = assemble_report(g, dim_u=4, measured_n_min=1, group_order=4)
        md = report.to_markdown()
        assert "| name | kind | value | eq_tag |" in md
        assert "dim-lower" in md
        csv_text = report.to_csv()
        lines = csv_text.strip().splitlines()
        assert lines[0] == "name,kind,value,eq_tag"
        assert len(lines) == len(report.entries) + 1
