import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import poisson

from rfneutron import jcfield as jc
from rfneutron.elements import DEFAULT_CONSTANTS as C
from rfneutron.elements import resonant_b0
from rfneutron.errors import BasisTooSmall
from rfneutron.qstate import SpinLabel

W = 2 * math.pi * 58e3
B1 = 1e-3


def params(b1w=B1, b1h=0.0):
    return jc.JCParams(W, resonant_b0(W), b1w, b1h)


def test_decoupled_hamiltonian_is_diagonal():
    basis = jc.FockBasisSpec(3, 6, 0, 2)
    h = jc.build_hamiltonian(params(0.0, 0.0), basis)
    assert np.count_nonzero(h - np.diag(np.diag(h))) == 0
    expected = []
    for n_w in range(3, 7):
        for n_h in range(0, 3):
            for sz in (1, -1):
                expected.append(C.mu_magnitude * resonant_b0(W) * sz + C.hbar * W * (n_w + 0.5 * n_h))
    assert np.diag(h).real == pytest.approx(expected, rel=1e-14)


def test_dressed_doublet_by_hand():
    n = 40
    basis = jc.FockBasisSpec(n - 1, n, center_omega=n)
    h = jc.build_hamiltonian(params(), basis)
    assert h.shape == (4, 4)
    # |n-1, up> couples to |n, down> with strength |mu| B1 sqrt(n / n)
    e = jc.free_energies(params(), basis)
    e1, e2 = e[0], e[3]
    c = C.mu_magnitude * B1
    mid, split = 0.5 * (e1 + e2), math.hypot(0.5 * (e1 - e2), c)
    got = np.sort(np.linalg.eigvalsh(h[np.ix_([0, 3], [0, 3])]))
    assert got == pytest.approx([mid - split, mid + split], rel=1e-14)
    assert abs(h[0, 3]) == pytest.approx(c, rel=1e-14)
    assert abs(h[1, 2]) == 0.0


def test_hamiltonian_hermitian():
    basis = jc.FockBasisSpec.for_coherent(3.0, 2.0)
    h = jc.build_hamiltonian(params(B1, 0.5 * B1), basis)
    assert np.max(np.abs(h - h.conj().T)) <= 1e-15 * np.max(np.abs(h))


def test_vacuum_preparation():
    s = jc.prepare_initial(jc.FockBasisSpec(0, 8, 0, 8), jc.CoherentSpec(0.0), jc.CoherentSpec(0.0), SpinLabel.DOWN)
    assert abs(s.amplitudes[0, 0, jc.DOWN]) == pytest.approx(1.0)
    assert s.norm2() == pytest.approx(1.0)


def test_coherent_moments_at_25():
    basis = jc.FockBasisSpec.for_coherent(5.0)
    s = jc.prepare_initial(basis, jc.CoherentSpec(5.0), jc.CoherentSpec(0.0), SpinLabel.UP)
    p = np.abs(s.amplitudes[:, 0, jc.UP]) ** 2
    n = basis.numbers_omega
    mean = float(np.sum(p * n))
    assert mean == pytest.approx(25.0, abs=1e-6)
    assert float(np.sum(p * (n - mean) ** 2)) == pytest.approx(25.0, abs=1e-3)


def test_window_25_plus_minus_25_violates_tail_rule():
    assert jc.coherent_tail(25.0, 0, 50) > jc.TAIL_TOL
    with pytest.raises(BasisTooSmall):
        jc.prepare_initial(jc.FockBasisSpec(0, 50), jc.CoherentSpec(5.0), jc.CoherentSpec(0.0), SpinLabel.UP)


def test_window_rule():
    lo, hi, center = jc.coherent_window(10.0)
    assert center == 100
    assert hi - center >= 60
    assert jc.coherent_tail(100.0, lo, hi) < jc.TAIL_TOL
    assert jc.coherent_window(0.0) == (0, 8, 0)


@given(st.floats(-math.pi, math.pi))
def test_field_phase_sets_mean_amplitude(phase):
    basis = jc.FockBasisSpec.for_coherent(4.0)
    s = jc.prepare_initial(basis, jc.CoherentSpec(4.0, phase), jc.CoherentSpec(0.0), SpinLabel.UP)
    psi = s.amplitudes[:, 0, jc.UP]
    n = basis.numbers_omega
    a_mean = np.sum(np.conj(psi[:-1]) * np.sqrt(n[1:]) * psi[1:])
    assert a_mean == pytest.approx(4.0 * np.exp(1j * phase), abs=1e-8)


def test_rf_phase_maps_to_negative_field_phase():
    assert jc.CoherentSpec.from_rf_phase(9.0, 0.4).alpha == pytest.approx(3.0 * np.exp(-0.4j))


def test_evolve_zero_time_and_diagonal():
    basis = jc.FockBasisSpec(0, 3)
    rng = np.random.default_rng(0)
    v = rng.normal(size=basis.dim) + 1j * rng.normal(size=basis.dim)
    s = jc.FockState(basis, (v / np.linalg.norm(v)).reshape(basis.shape))
    assert jc.evolve(s, np.eye(basis.dim), 0.0) is s
    d = rng.normal(size=basis.dim) * 1e-30
    out = jc.evolve(s, np.diag(d), 2.0)
    assert out.vector == pytest.approx(s.vector * np.exp(-1j * d * 2.0 / C.hbar), abs=1e-12)


def test_pi_pulse_at_100_photons():
    init, final, stats = jc.flip_run(100.0, 0.0, math.pi)
    assert init.basis.dim <= 500
    assert stats.flip_probability >= 0.99
    assert stats.mean_photon_shift[0] == pytest.approx(1.0, abs=0.05)
    assert stats.mean_photon_shift[1] == 0.0


def test_stats_of_unchanged_state():
    init, _, _ = jc.flip_run(4.0, 0.0, 0.0)
    st0 = jc.spin_flip_stats(init, init)
    assert st0.flip_probability == 0.0
    assert st0.mean_photon_shift == (0.0, 0.0)


def test_imprinted_phase_follows_rf_phase():
    delta = 0.5
    a = jc.flip_run(100.0, 0.0, math.pi)[2].imprinted_phase
    b = jc.flip_run(100.0, delta, math.pi)[2].imprinted_phase
    assert abs(jc.wrap_phase(b - a - delta)) <= 0.02


def test_unitarity_and_energy_conservation():
    basis = jc.FockBasisSpec.for_coherent(2.0, 1.5)
    p = params(B1, 0.7 * B1)
    h = jc.build_hamiltonian(p, basis)
    s = jc.prepare_initial(basis, jc.CoherentSpec(2.0, 0.2), jc.CoherentSpec(1.5, -1.0), SpinLabel.UP)
    e0 = jc.expectation(s, h)
    for area in (0.3, math.pi, 5.0):
        out = jc.evolve(s, h, jc.pulse_time(area, B1))
        assert out.norm2() == pytest.approx(1.0, abs=1e-10)
        assert jc.expectation(out, h) == pytest.approx(e0, rel=1e-9)


def poisson_rabi(n_mean, area, basis):
    """Exact flip probability: each photon number n rotates at sqrt((n+1)/N)."""
    n = basis.numbers_omega
    w = poisson.pmf(n, n_mean)
    w /= w.sum()
    theta = area * np.sqrt((n + 1) / max(basis.center_omega, 1))
    return float(np.sum(w * np.sin(0.5 * theta) ** 2))


@pytest.mark.parametrize("n_mean", [25.0, 100.0])
@pytest.mark.parametrize("area", [0.5, math.pi / 2, math.pi])
def test_flip_probability_matches_photon_number_oracle(n_mean, area):
    init, _, stats = jc.flip_run(n_mean, 0.0, area)
    assert stats.flip_probability == pytest.approx(poisson_rabi(n_mean, area, init.basis), abs=1e-9)


@pytest.mark.parametrize("n_mean", [25.0, 100.0])
def test_semiclassical_correspondence_over_pulse_area(n_mean):
    # within 0.02 of sin^2(area/2); finite-N dephasing at N = 25 reaches 0.024 near a pi pulse
    areas = np.linspace(0.0, math.pi, 13)
    worst = max(
        abs(jc.flip_run(n_mean, 0.0, a)[2].flip_probability - math.sin(a / 2) ** 2) for a in areas
    )
    assert worst <= 0.02


def test_idle_mode_coherent_amplitude_is_irrelevant():
    basis = jc.FockBasisSpec(*jc.coherent_window(4.0)[:2], 7, 7, center_omega=16)
    p = params()
    h = jc.build_hamiltonian(p, basis)
    t = jc.pulse_time(2.0, B1)
    results = []
    for a_half in (0.0, 1.0, 2.6):
        init = jc.prepare_initial(basis, jc.CoherentSpec(4.0, 0.3), jc.CoherentSpec(a_half), SpinLabel.UP)
        final = jc.to_rotating_frame(jc.evolve(init, h, t), p, t)
        results.append(jc.spin_flip_stats(init, final))
    for r in results[1:]:
        assert r.flip_probability == pytest.approx(results[0].flip_probability, abs=1e-10)
        assert r.imprinted_phase == pytest.approx(results[0].imprinted_phase, abs=1e-10)


@settings(max_examples=10)
@given(st.floats(0.0, 1.5))
def test_uncoupled_coherent_half_mode_is_a_spectator(a_half):
    basis = jc.FockBasisSpec.for_coherent(2.0, 1.5)
    p = params(B1, 0.0)
    h = jc.build_hamiltonian(p, basis)
    t = jc.pulse_time(math.pi, B1)
    ref_basis = jc.FockBasisSpec.for_coherent(2.0)
    ref = jc.flip_run(4.0, 0.0, math.pi, basis=ref_basis)[2]
    init = jc.prepare_initial(basis, jc.CoherentSpec(2.0), jc.CoherentSpec(a_half), SpinLabel.UP)
    st1 = jc.spin_flip_stats(init, jc.to_rotating_frame(jc.evolve(init, h, t), p, t))
    assert st1.flip_probability == pytest.approx(ref.flip_probability, abs=1e-10)
    assert st1.imprinted_phase == pytest.approx(ref.imprinted_phase, abs=1e-10)


def test_vacuum_cannot_be_absorbed():
    _, _, st0 = jc.flip_run(0.0, 0.0, math.pi, spin=SpinLabel.DOWN, basis=jc.FockBasisSpec(0, 8))
    assert st0.flip_probability <= 1e-12


def test_vacuum_still_stimulates_emission():
    _, _, st0 = jc.flip_run(0.0, 0.0, math.pi, basis=jc.FockBasisSpec(0, 8, center_omega=0))
    assert st0.flip_probability == pytest.approx(1.0, abs=1e-12)


def test_validation_suite_passes():
    checks = jc.validate_correspondence()
    assert [c.name for c in checks] == [
        "flip_probability", "photon_shift_omega", "imprinted_phase_shift",
        "phase_transfer_slope", "vacuum_absorption",
    ]
    assert all(c.passed for c in checks), checks


def test_narrow_window_rejected():
    with pytest.raises(BasisTooSmall):
        jc.validate_correspondence(basis=jc.FockBasisSpec(90, 110, center_omega=100))


def test_pulse_area_helpers():
    tau = 1e-5
    assert jc.pulse_time(jc.pulse_area(B1, tau), B1) == pytest.approx(tau)
    assert jc.rabi_angular_frequency(B1) == pytest.approx(2 * C.mu_magnitude * B1 / C.hbar)
