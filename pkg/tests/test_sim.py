"""Dense density-matrix simulator with cell-level depolarizing noise."""

import numpy as np
import pytest

from pepslab.channels import unitary_channel
from pepslab.circuits import Circuit, Gate, random_circuit
from pepslab.embed import cell_kraus
from pepslab.sim import (
    DensityState,
    apply_noisy_cell,
    apply_unitary,
    basis_state,
    expectation_value,
    extend_with_zeros,
    noisy_projection,
    partial_trace,
    postselected_expectation,
    projection_error_coeffs,
    run_noisy_circuit,
)

Z = np.diag([1.0, -1.0]).astype(complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)


def random_unitary(dim, seed):
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(m)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_state(wires, seed):
    rng = np.random.default_rng(seed)
    d = 2**wires
    m = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = m @ m.conj().T
    return DensityState(wires, rho / np.trace(rho))


def test_basis_state_layout():
    s = basis_state("01")
    assert s.wires == 2
    want = np.zeros((4, 4), dtype=complex)
    want[1, 1] = 1.0  # first character is the most significant wire
    np.testing.assert_allclose(s.rho, want, atol=0)
    assert s.trace == pytest.approx(1.0)


def test_density_state_validation():
    with pytest.raises(ValueError):
        DensityState(1, np.array([[0.0, 1.0], [0.0, 0.0]]))  # not hermitian
    with pytest.raises(ValueError):
        DensityState(2, np.eye(3))  # wrong dimension


def test_expectation_value_oracle():
    s = random_state(3, 1)
    m = random_unitary(2, 2)
    m = m + m.conj().T
    got = expectation_value(s, m, [1])
    full = np.kron(np.kron(np.eye(2), m), np.eye(2))
    assert got == pytest.approx(np.trace(full @ s.rho))


def test_apply_unitary_on_chosen_wires():
    s = basis_state("00")
    s = apply_unitary(s, X, [1])
    np.testing.assert_allclose(s.rho, basis_state("01").rho, atol=1e-14)
    s = apply_unitary(s, CNOT, [1, 0])  # control wire 1, target wire 0
    np.testing.assert_allclose(s.rho, basis_state("11").rho, atol=1e-14)


def test_partial_trace_oracle():
    s = random_state(3, 3)
    got = partial_trace(s, [1])
    r = s.rho.reshape(2, 2, 2, 2, 2, 2)
    want = np.einsum("aibcid->abcd", r).reshape(4, 4)
    np.testing.assert_allclose(got.rho, want, atol=1e-13)
    assert got.wires == 2
    assert got.trace == pytest.approx(s.trace)


def test_extend_with_zeros_appends_fresh_wires():
    s = random_state(2, 4)
    big = extend_with_zeros(s, 1)
    assert big.wires == 3
    m = random_unitary(2, 5)
    m = m + m.conj().T
    assert expectation_value(big, m, [0]) == pytest.approx(expectation_value(s, m, [0]))
    assert expectation_value(big, Z, [2]).real == pytest.approx(big.trace.real)


def test_noiseless_run_of_identity_circuit_is_exact():
    state = run_noisy_circuit(Circuit(2, 3), 0.0, input_bits="10")
    np.testing.assert_allclose(state.rho, basis_state("10").rho, atol=1e-14)


def test_unitary_only_run_preserves_purity_at_zero_eta():
    c = random_circuit(4, 3, seed=2, p_reset=0.0, p_project=0.0)
    state = run_noisy_circuit(c, 0.0)
    assert np.trace(state.rho @ state.rho).real == pytest.approx(1.0, abs=1e-12)


def test_raw_run_preserves_trace_without_projections():
    c = random_circuit(4, 3, seed=5, p_project=0.0)
    state = run_noisy_circuit(c, 0.37)
    assert state.trace == pytest.approx(1.0, abs=1e-12)


def test_projection_shrinks_trace():
    c = Circuit(2, 1, (Gate("unitary", 0, 0, H),))
    c2 = Circuit(2, 2, (Gate("unitary", 0, 0, H), Gate("project0", 1, 0)))
    state = run_noisy_circuit(c2, 0.0)
    assert state.trace == pytest.approx(0.5, abs=1e-12)
    del c


def test_noisy_cell_depolarizing_law():
    eta = 0.23
    u = random_unitary(4, 6)
    s = random_state(3, 7)
    got = apply_noisy_cell(s, [u], (0, 1), eta)
    coherent = apply_unitary(s, u, (0, 1)).rho
    marginal = partial_trace(s, [0, 1]).rho  # remaining wire 2
    mixed = np.kron(np.eye(4) / 4, marginal)
    np.testing.assert_allclose(got.rho, (1 - eta) * coherent + eta * mixed, atol=1e-13)


def test_run_matches_manual_cell_composition():
    c = random_circuit(4, 2, seed=8)
    eta = 0.11
    got = run_noisy_circuit(c, eta)
    state = basis_state("0" * 4)
    for t in range(c.depth):
        for s in range(2):
            cell = c.cell(t, s)
            state = apply_noisy_cell(state, cell_kraus(cell), cell.wires, eta)
    np.testing.assert_allclose(got.rho, state.rho, atol=1e-13)


def test_virtual_convention_trace_scalar():
    # identity cells carry HS-normalized Kraus, so each one scales the
    # trace by (1 + 3 eta) / 4 in the virtual convention
    eta = 0.4
    state = run_noisy_circuit(Circuit(2, 3), eta, convention="virtual")
    assert state.trace == pytest.approx(((1 + 3 * eta) / 4) ** 3, abs=1e-12)


def test_noisy_projection_ignores_the_partner_state():
    eta = 0.3
    psi = H @ np.array([1.0, 0.0])
    rho_w = np.outer(psi, psi.conj())
    for seed in (1, 2):
        partner = random_state(1, seed).rho
        s = DensityState(2, np.kron(rho_w, partner))
        out = noisy_projection(s, 0, eta)
        keep = partial_trace(out, [1])
        if seed == 1:
            first = keep.rho.copy()
        else:
            np.testing.assert_allclose(keep.rho, first, atol=1e-13)


def test_projection_error_coeffs_identity_gate():
    eta = 0.07
    e0, e1, e01 = projection_error_coeffs(None, eta)
    assert e0 == pytest.approx(0.0, abs=1e-14)
    assert e1 == pytest.approx(eta, abs=1e-14)
    assert abs(e01) == pytest.approx(0.0, abs=1e-14)


@pytest.mark.parametrize("seed", [3, 4, 5])
def test_projection_error_coeffs_against_simulator(seed):
    eta = 0.21
    v = random_unitary(2, seed)
    e0, e1, e01 = projection_error_coeffs(unitary_channel(v), eta)

    def kept_weight(psi):
        rho = np.outer(psi, psi.conj())
        s = DensityState(2, np.kron(rho, np.eye(2) / 2))
        return noisy_projection(s, 0, eta).trace.real

    w0 = kept_weight(v @ np.array([1.0, 0.0]))
    w1 = kept_weight(v @ np.array([0.0, 1.0]))
    assert w0 == pytest.approx(1 - e0, abs=1e-12)
    assert w1 == pytest.approx(e1, abs=1e-12)
    wp = kept_weight(v @ (np.array([1.0, 1.0]) / np.sqrt(2)))
    wi = kept_weight(v @ (np.array([1.0, 1.0j]) / np.sqrt(2)))
    mid = (w0 + w1) / 2
    assert abs(wp - mid) == pytest.approx(abs(e01.real), abs=1e-12)
    assert abs(wi - mid) == pytest.approx(abs(e01.imag), abs=1e-12)
    # kept weights form a PSD quadratic form in (alpha, beta)
    assert abs(e01) ** 2 <= (1 - e0) * e1 + 1e-12


def bell_body():
    state = basis_state("000")
    state = apply_unitary(state, H, [0])
    return apply_unitary(state, CNOT, [0, 1])


def test_postselection_keeps_the_zero_branch():
    out = postselected_expectation(bell_body(), 0.0, 1, Z, post_wire=0, out_wire=1)
    assert out["residual_trace"] == pytest.approx(0.5, abs=1e-13)
    assert out["expectation"] == pytest.approx(1.0, abs=1e-12)


def test_postselection_requires_a_copy():
    with pytest.raises(ValueError):
        postselected_expectation(bell_body(), 0.0, 0, Z)


@pytest.mark.parametrize("copies", [1, 2, 4])
def test_postselected_contamination_decays_geometrically(copies):
    eta = 0.05
    out = postselected_expectation(bell_body(), eta, copies, Z, post_wire=0, out_wire=1)
    # the rejected branch survives each noisy copy with weight eta exactly,
    # on top of the fully kept |alpha_0|^2 = 1/2 branch
    assert out["residual_trace"] - 0.5 == pytest.approx(0.5 * eta**copies, rel=1e-9)


def test_noiseless_copies_change_nothing():
    vals = [
        postselected_expectation(bell_body(), 0.0, m, Z, post_wire=0, out_wire=1)[
            "expectation"
        ]
        for m in (1, 2, 3)
    ]
    assert vals[0] == pytest.approx(vals[1], abs=1e-12)
    assert vals[0] == pytest.approx(vals[2], abs=1e-12)


def test_postselected_expectation_accepts_circuits():
    c = Circuit(2, 1, (Gate("unitary", 0, 0, H),))
    out = postselected_expectation(c, 0.02, 2, Z, post_wire=0, out_wire=1)
    assert 0.0 < out["residual_trace"] < 1.0
    assert -1.0 <= out["expectation"] <= 1.0
