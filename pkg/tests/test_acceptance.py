"""Acceptance criteria, one test each.

Every test prints a single ``ACCEPTANCE <n> PASS|FAIL`` line with the measured
figure and its tolerance; the lines are repeated in the pytest terminal summary.
Run directly with ``python3 tests/test_acceptance.py`` for just those lines.
"""

import dataclasses
import math
import time

import numpy as np

from rfneutron import analysis as an
from rfneutron import beamline as bl
from rfneutron import cli
from rfneutron import elements as el
from rfneutron import experiments as ex
from rfneutron import jcfield as jc

RESULTS = []
OMEGA = bl.DEFAULT_OMEGA
PERIOD = 2 * math.pi / OMEGA


def report(number, title, ok, detail):
    line = f"ACCEPTANCE {number} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def spec_with(phi_w=0.0, phi_h=0.0, **kw):
    f1, f2 = bl.default_flippers(phi_omega=phi_w, phi_half=phi_h)
    return bl.BeamlineSpec(flipper1=f1, flipper2=f2, **kw)


def test_1_fringe_law():
    rng = np.random.default_rng(2024)
    base = bl.BeamlineSpec()
    start = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        chi, phi_w, phi_h, wt = rng.uniform(-2 * math.pi, 2 * math.pi, 4)
        nu = rng.uniform(0.0, 1.0)
        s = dataclasses.replace(
            base,
            flipper1=dataclasses.replace(base.flipper1, phi=phi_w),
            flipper2=dataclasses.replace(base.flipper2, phi=phi_h),
            chi=chi, zero_field_phase=wt, visibility=nu,
        )
        expected = 0.5 * (1 + nu * math.cos(chi + phi_w - 2 * phi_h + wt))
        worst = max(worst, abs(bl.run(s).o_intensity - expected))
    elapsed = time.perf_counter() - start
    report(1, "fringe law", worst <= 1e-9 and elapsed < 1.0,
           f"max |I_O - law| = {worst:.2e} (tol 1e-9) over 1000 points, {elapsed:.2f} s (< 1 s)")


def test_2_phase_slopes():
    start = time.perf_counter()
    settings = np.arange(9) * math.pi / 4
    records = ex.phase_slopes(bl.BeamlineSpec(zero_field_phase=1.3), settings)
    elapsed = time.perf_counter() - start
    devs = {(r.spin.value, r.parameter): r.fit.slope - r.expected for r in records}
    worst = max(abs(d) for d in devs.values())
    slopes = ", ".join(f"{s}/{p}: {r.fit.slope:+.9f}" for r, (s, p) in zip(records, devs))
    report(2, "phase slopes", worst <= 1e-6 and elapsed < 1.0,
           f"{slopes}; max deviation {worst:.1e} (tol 1e-6), {elapsed:.2f} s (< 1 s)")


def test_3_h_flat_and_o_stationary():
    chis = np.linspace(0, 4 * math.pi, 73)
    s1 = bl.BeamlineSpec(flipper2_on=False)
    h = [bl.run(dataclasses.replace(s1, chi=c)).h_intensity for c in chis]
    h_dev = float(np.ptp(h))
    s2 = ex.compensated(spec_with(0.4, 0.25, chi=0.9, zero_field_phase=1.1))
    o = bl.detected_o_intensity(s2, np.linspace(0, PERIOD, 65))
    o_dev = float(np.ptp(o))
    report(3, "H flatness / O stationarity", h_dev <= 1e-12 and o_dev <= 1e-9,
           f"H spread {h_dev:.1e} (tol 1e-12), O spread over one RF period {o_dev:.1e} (tol 1e-9)")


def region4_grid():
    for chi in np.linspace(0, 2 * math.pi, 7, endpoint=False):
        for phi in np.linspace(0, 2 * math.pi, 5, endpoint=False):
            yield chi, phi, spec_with(phi, chi=chi, flipper2_on=False)


def test_4_region4_polarization():
    times = np.arange(32) * PERIOD / 32
    worst = worst_at_zero_chi = worst_avg = 0.0
    for chi, phi, s in region4_grid():
        pol = np.array([p.as_array() for _, p in bl.time_resolved(s, times)])
        arg = chi - OMEGA * times - phi
        target = np.stack([np.cos(arg), np.sin(arg), np.zeros_like(arg)], axis=1)
        dev = float(np.max(np.abs(pol - target)))
        worst = max(worst, dev)
        if chi == 0.0:
            worst_at_zero_chi = max(worst_at_zero_chi, dev)
        worst_avg = max(worst_avg, float(np.max(np.abs(pol.mean(axis=0)))))
    report(4, "region-4 polarization (cos(chi-wt-phi), sin(chi-wt-phi), 0)",
           worst <= 1e-9 and worst_avg <= 1e-9,
           f"max deviation {worst:.2e} (tol 1e-9; {worst_at_zero_chi:.1e} on the chi=0 slice), "
           f"period average {worst_avg:.1e} (tol 1e-9)")


def test_4_informational_chi_sign():
    # same grid against the precession law with chi entering like the RF phase
    times = np.arange(32) * PERIOD / 32
    worst = 0.0
    for chi, phi, s in region4_grid():
        pol = np.array([p.as_array() for _, p in bl.time_resolved(s, times)])
        arg = chi + OMEGA * times + phi
        target = np.stack([np.cos(arg), -np.sin(arg), np.zeros_like(arg)], axis=1)
        worst = max(worst, float(np.max(np.abs(pol - target))))
    line = f"ACCEPTANCE 4 INFO  region-4 polarization vs (cos(chi+wt+phi), -sin(chi+wt+phi), 0): {worst:.1e}"
    RESULTS.append(line)
    print(line)
    assert worst <= 1e-9


def test_5_resonance():
    f = el.resonance_frequency(2e-3) / (2 * math.pi)
    rel = abs(f - 58e3) / 58e3
    halving = abs(el.resonance_frequency(1e-3) / el.resonance_frequency(2e-3) - 0.5) / 0.5
    report(5, "resonance", rel <= 0.01 and halving <= 1e-12,
           f"f(2 mT) = {f / 1e3:.3f} kHz, {100 * rel:.2f}% from 58 kHz (tol 1%), "
           f"halving error {halving:.1e} (tol 1e-12)")


def test_6_quantized_field():
    start = time.perf_counter()
    init, _, stats = jc.flip_run(100.0, 0.0, math.pi)
    grid = np.linspace(0.0, math.pi / 2, 7)
    phases = [jc.flip_run(100.0, p, math.pi)[2].imprinted_phase for p in grid]
    slope = an.phase_slope(grid, phases).slope
    elapsed = time.perf_counter() - start
    ok = (stats.flip_probability >= 0.99 and abs(stats.mean_photon_shift[0] - 1) <= 0.05
          and abs(slope - 1) <= 0.02 and init.basis.dim <= 500 and elapsed < 30)
    report(6, "quantized-field correspondence", ok,
           f"p_flip {stats.flip_probability:.5f} (>= 0.99), photon shift {stats.mean_photon_shift[0]:+.4f} "
           f"(1 +- 0.05), phase slope {slope:.6f} (1 +- 0.02), dim {init.basis.dim} (<= 500), "
           f"{elapsed:.1f} s (< 30 s)")


def test_7_geometric_phase():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(100):
        a, b = rng.uniform(-math.pi, math.pi, 2)
        if abs(abs(an.wrap_phase(a - b)) - math.pi) < 1e-9:
            continue
        lune = an.solid_angle_semi_great_circles(a, b)
        worst = max(worst, abs(an.geometric_phase(a, b) - 0.5 * lune))
    report(7, "geometric phase vs lune", worst <= 1e-6,
           f"max |closed form - lune/2| = {worst:.1e} (tol 1e-6) on 100 pairs")


def test_8_visibility_pass_through():
    nu = ex.fitted_visibility(spec_with(0.3, 0.1, zero_field_phase=0.4, visibility=0.524))
    report(8, "visibility pass-through", abs(nu - 0.524) <= 1e-6,
           f"fitted nu = {nu:.12f} (0.524 +- 1e-6)")


def test_9_determinism_and_robustness(tmp_path, capsys):
    cfg = tmp_path / "noisy.toml"
    cfg.write_text("[noise]\nenabled = true\nseed = 5\n")
    outs = [tmp_path / f"run{i}.csv" for i in range(2)]
    codes = [cli.main(["scan", "--config", str(cfg), "--out", str(o)]) for o in outs]
    identical = codes == [0, 0] and outs[0].read_bytes() == outs[1].read_bytes()

    bad = tmp_path / "bad.toml"
    bad.write_text('[beamline]\nchi = 30\n')
    bad_out = tmp_path / "bad.csv"
    bad_code = cli.main(["scan", "--config", str(bad), "--out", str(bad_out)])
    malformed_ok = bad_code == 2 and not bad_out.exists()

    detuned = tmp_path / "detuned.toml"
    detuned.write_text("[beamline]\nflipper1_b0_t = 1.9e-3\n")
    capsys.readouterr()
    det_out = tmp_path / "detuned.csv"
    det_code = cli.main(["scan", "--config", str(detuned), "--out", str(det_out)])
    err = capsys.readouterr().err
    detuned_ok = det_code == 3 and "flipper1" in err and not det_out.exists()
    report(9, "determinism and robustness", identical and malformed_ok and detuned_ok,
           f"seeded reruns identical={identical}, malformed exit {bad_code} without output="
           f"{not bad_out.exists()}, detuned exit {det_code} naming flipper1={'flipper1' in err}")


if __name__ == "__main__":
    import pathlib
    import sys

    import pytest

    sys.exit(pytest.main([str(pathlib.Path(__file__)), "-q", "-p", "no:cacheprovider"]))
