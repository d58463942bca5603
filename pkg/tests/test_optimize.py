import numpy as np
import pytest

from gateid.discriminate import InfeasibleError
from gateid.gatesets import GateSet, make_named_set
from gateid.groups import closure_table, cyclic_characters, multiplicity_by_characters, young_decomposition
from gateid.optimize import local_span_dimension, min_ancilla_probe, minimax_fidelity


def z_rotation_pair(theta):
    u1 = np.diag([np.exp(1j * theta), np.exp(-1j * theta)])
    return GateSet(("g0", "g1"), np.stack([np.eye(2, dtype=complex), u1]))


class TestMinimaxFidelity:
    def test_pauli_vanishes(self):
        result = minimax_fidelity(make_named_set("pauli"), "bipartite", restarts=2, seed=0)
        assert result.value <= 1e-10
        assert result.max_entangled_value <= 1e-10

    def test_z_rotation_pair(self):
        theta = 0.4
        result = minimax_fidelity(z_rotation_pair(theta), "bipartite", restarts=2, seed=0)
        assert result.value == pytest.approx(np.cos(theta) ** 2, abs=1e-6)

    def test_permutation_max_entangled_evaluation(self):
        result = minimax_fidelity(
            make_named_set("permutation", d=3), "bipartite", restarts=2, seed=0
        )
        assert result.max_entangled_value == pytest.approx(1 / 9, abs=1e-10)
        assert result.value <= result.max_entangled_value + 1e-12

    def test_value_is_achieved_by_argmin_state(self):
        g = make_named_set("clock", d=2, K=3)
        result = minimax_fidelity(g, "bipartite", restarts=2, seed=3)
        psi = result.argmin_state.reshape(2, -1)
        worst = max(
            abs(np.einsum("ij,ik,kj->", psi.conj(), g.matrices[x].conj().T @ g.matrices[y], psi)) ** 2
            for x in range(g.size)
            for y in range(g.size)
            if x != y
        )
        assert worst == pytest.approx(result.value, abs=1e-9)

    @pytest.mark.parametrize(
        "family,params",
        [
            ("pauli", dict()),
            ("clock", dict(d=2, K=3)),
            ("phase_point", dict(K=3, d=2)),
            ("permutation", dict(d=3)),
            ("grover", dict(d=3)),
        ],
    )
    def test_bipartite_never_exceeds_local(self, family, params):
        g = make_named_set(family, **params)
        bi = minimax_fidelity(g, "bipartite", restarts=2, seed=5)
        loc = minimax_fidelity(g, "local", restarts=2, seed=5)
        assert bi.value <= loc.value + 1e-9

    @pytest.mark.parametrize(
        "family,params",
        [("pauli", dict()), ("clock", dict(d=2, K=5)), ("grover", dict(d=3))],
    )
    def test_strictly_below_one_for_valid_sets(self, family, params):
        g = make_named_set(family, **params)
        result = minimax_fidelity(g, "bipartite", restarts=2, seed=1)
        assert result.value < 1.0 - 1e-6

    def test_mode_validation(self):
        with pytest.raises(ValueError):
            minimax_fidelity(make_named_set("pauli"), "global")


class TestLocalSpanDimension:
    def test_permutations_span_everything(self):
        assert local_span_dimension(make_named_set("permutation", d=3), 8, 0).value == 3

    def test_diagonal_gates_span_two(self):
        assert local_span_dimension(make_named_set("clock", d=2, K=3), 4, 0).value == 2

    def test_identity_x_pair(self):
        x = np.array([[0, 1], [1, 0]], dtype=complex)
        g = GateSet(("I", "X"), np.stack([np.eye(2, dtype=complex), x]))
        assert local_span_dimension(g, 4, 0).value == 2

    def test_never_exceeds_dimension(self):
        g = make_named_set("shift_multiply", d=3)
        assert local_span_dimension(g, 8, 0).value <= 3


class TestMinAncillaProbe:
    def test_pauli_needs_one_ancilla_qubit(self):
        assert min_ancilla_probe(make_named_set("pauli"), 1, 4, trials=4, seed=0).value == 2

    def test_commuting_clock_needs_none(self):
        g = make_named_set("clock", d=3, K=5)
        assert min_ancilla_probe(g, 2, 3, trials=4, seed=0).value == 1

    def test_shift_multiply_needs_input_sized_ancilla(self):
        g = make_named_set("shift_multiply", d=3)
        assert min_ancilla_probe(g, 1, 4, trials=4, seed=0).value == 3

    def test_infeasible_when_dependent(self):
        with pytest.raises(InfeasibleError):
            min_ancilla_probe(make_named_set("clock", d=2, K=3), 1, 4)

    def test_exhausted_budget(self):
        g = make_named_set("shift_multiply", d=3)
        with pytest.raises(InfeasibleError):
            min_ancilla_probe(g, 1, 2, trials=2, seed=0)

    @pytest.mark.parametrize(
        "family,params,n",
        [("pauli", dict(), 1), ("clock", dict(d=2, K=3), 2), ("shift_multiply", dict(d=3), 1)],
    )
    def test_respects_analytic_caps(self, family, params, n):
        g = make_named_set(family, **params)
        young_cap = young_decomposition(n, g.dimension).ancilla_bound
        table = closure_table(g)
        group_cap = int(np.ceil(np.sqrt(table.order)))
        probe = min_ancilla_probe(g, n, max(young_cap, group_cap), trials=4, seed=0)
        assert probe.value <= young_cap
        assert probe.value <= group_cap

    @pytest.mark.parametrize("d,K,n", [(2, 3, 2), (2, 5, 4), (3, 5, 2)])
    def test_ancilla_free_iff_all_characters_present(self, d, K, n):
        # abelian groups: a bare strategy exists exactly when every character
        # shows up in the tensor power with multiplicity >= 1
        g = make_named_set("clock", d=d, K=K)
        mults = [
            multiplicity_by_characters(g, chi, n).nearest_integer
            for chi in cyclic_characters(K)
        ]
        all_present = all(m >= 1 for m in mults)
        try:
            value = min_ancilla_probe(g, n, 1, trials=4, seed=0).value
            succeeded = value == 1
        except InfeasibleError:
            succeeded = False
        assert succeeded == all_present
