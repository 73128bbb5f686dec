"""Acceptance criteria, one test each, at the contracted tolerances.

Every test records a one-line verdict through ``report_criterion``; the lines
are repeated in the terminal summary under "acceptance criteria".
"""

import csv
import io
import math
import time
from fractions import Fraction

import numpy as np

from cvtelefid import cli
from cvtelefid.optimize import (
    brute_force_optimal,
    max_bound_gap,
    omega_theta,
    optimal_tgcp,
    upper_bound_achievable,
)
from cvtelefid.state import (
    form_III_residual,
    log_negativity,
    pt_spectrum,
    random_asymmetric_cm,
    random_entangled_cm,
    random_physical_cm,
    random_symmetric_cm,
    two_mode_squeezed,
)
from cvtelefid.symplectic import rotation, squeeze
from cvtelefid.teleport import (
    MinimalNoiseDecomposition,
    apply_local_tgcp,
    attenuation_map,
    decompose_minimal_noise,
    fidelity_coherent,
    isotropize_noise,
    noise_matrix,
)


def cli_csv(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr().out
    rows = list(csv.reader(io.StringIO(out)))
    return code, rows[0], rows[1:]


def test_criterion_01_bound_curves(capsys, report_criterion):
    t0 = time.perf_counter()
    code, header, rows = cli_csv(capsys, "bounds", "--nu-min", "0.001", "--nu-max", "1", "--steps", "1000")
    elapsed = time.perf_counter() - t0
    worst = 0.0
    for nu_s, lo_s, hi_s, _ in rows:
        nu = Fraction(nu_s)
        lower = (1 + nu) / (1 + 3 * nu)
        upper = 1 / (1 + nu)
        worst = max(worst, abs(Fraction(lo_s) - lower), abs(Fraction(hi_s) - upper))
    ok = code == 0 and len(rows) == 1000 and float(rows[-1][0]) == 1.0 and worst < 1e-12 and elapsed < 1.0
    report_criterion(1, ok, f"1000 rows, max deviation from exact rationals {float(worst):.1e}, {elapsed:.3f} s")
    assert ok


def test_criterion_02_gap_curve(report_criterion):
    g = max_bound_gap()
    nu_exact = (math.sqrt(2) - 1) / (3 - math.sqrt(2))
    ok = 0.085 < g.gap < 0.086 and g.iterations < 100 and abs(g.nu_star - nu_exact) < 1e-6
    report_criterion(2, ok, f"max gap {g.gap:.6f} at nu {g.nu_star:.6f} after {g.iterations} iterations")
    assert ok


def test_criterion_03_symmetric_saturation(report_criterion):
    t0 = time.perf_counter()
    worst_f = worst_g = 0.0
    for seed in range(200):
        rep = optimal_tgcp(random_symmetric_cm(seed))
        worst_f = max(worst_f, abs(rep.f_opt - 1 / (1 + rep.nu)))
        worst_g = max(worst_g, float(np.max(np.abs(rep.optimal_map.G))))
    elapsed = time.perf_counter() - t0
    ok = worst_f < 1e-8 and worst_g < 1e-8 and elapsed < 10.0
    report_criterion(3, ok, f"200 states, max |f - 1/(1+nu)| {worst_f:.1e}, max |G| {worst_g:.1e}, {elapsed:.2f} s")
    assert ok


def test_criterion_04_non_symmetric_strictness(report_criterion):
    min_margin = math.inf
    achievable = 0
    for seed in range(200):
        V = random_asymmetric_cm(seed)
        rep = optimal_tgcp(V)
        min_margin = min(min_margin, 1 / (1 + rep.nu) - rep.f_opt)
        achievable += upper_bound_achievable(V)
    ok = min_margin > 1e-6 and achievable == 0
    report_criterion(4, ok, f"200 states, min 1/(1+nu) - f_opt {min_margin:.2e}, achievable flagged {achievable}")
    assert ok


def test_criterion_05_bound_sandwich(report_criterion):
    violations = 0
    for seed in range(1000):
        rep = optimal_tgcp(random_entangled_cm(seed))
        b = rep.bounds
        violations += not (b.lower - 1e-9 <= rep.f_opt <= b.upper + 1e-9)
    report_criterion(5, violations == 0, f"1000 states, {violations} violations")
    assert violations == 0


def test_criterion_06_oracle_agreement(report_criterion):
    t0 = time.perf_counter()
    worst = 0.0
    for seed in range(100):
        V = random_entangled_cm(seed)
        worst = max(worst, abs(brute_force_optimal(V, 32, seed).fidelity - optimal_tgcp(V).f_opt))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-4 and elapsed < 300
    report_criterion(6, ok, f"100 states, 32 starts, max |oracle - f_opt| {worst:.1e}, {elapsed:.1f} s")
    assert ok


def test_criterion_07_omega_identity(report_criterion):
    worst = 0.0
    not_cp = 0
    for seed in range(500):
        V = random_entangled_cm(seed)
        om = omega_theta(V)
        e = abs(om.epsilon)
        formula = (1 + e) / (1 + om.nu + 2 * e)
        not_cp += not om.map.is_cp()
        worst = max(worst, abs(fidelity_coherent(apply_local_tgcp(V, om.map)) - formula))
    ok = worst < 1e-9 and not_cp == 0
    report_criterion(7, ok, f"500 states, max deviation {worst:.1e}, non-CP maps {not_cp}")
    assert ok


def test_criterion_08_isotropization(report_criterion):
    worst_tr = worst_det = 0.0
    drops = 0
    for seed in range(500):
        V = random_physical_cm(seed)
        det0 = float(np.linalg.det(noise_matrix(V)))
        _, Vi = isotropize_noise(V)
        N = noise_matrix(Vi)
        det1 = float(np.linalg.det(N))
        worst_tr = max(worst_tr, abs(np.trace(N) - 2 * math.sqrt(det1)))
        worst_det = max(worst_det, abs(det1 - det0) / det0)
        drops += fidelity_coherent(Vi) < fidelity_coherent(V)
    ok = worst_tr < 1e-9 and worst_det < 1e-9 and drops == 0
    report_criterion(
        8, ok, f"500 states, max |Tr N - 2 sqrt det N| {worst_tr:.1e}, det drift {worst_det:.1e}, drops {drops}"
    )
    assert ok


def test_criterion_09_fixed_point(report_criterion):
    worst_f = worst_s = worst_c = 0.0
    boundary = True
    for seed in range(200):
        rep = optimal_tgcp(random_entangled_cm(seed))
        again = optimal_tgcp(rep.output)
        boundary &= again.tau_star == 1.0
        worst_f = max(worst_f, abs(again.f_opt - rep.f_opt))
        worst_s = max(worst_s, float(np.max(np.abs(again.optimal_map.S - np.eye(4)))))
        worst_c = max(worst_c, form_III_residual(rep.output))
    ok = boundary and worst_f < 1e-8 and worst_s < 1e-8 and worst_c < 1e-8
    report_criterion(
        9, ok, f"200 states, eta = 1 everywhere: {boundary}, df {worst_f:.1e}, |S - I| {worst_s:.1e}, constraints {worst_c:.1e}"
    )
    assert ok


def test_criterion_10_swap_limit(capsys, report_criterion):
    details, ok = [], True
    for n_opt in (0.1, 0.3, 0.7):
        code, _, rows = cli_csv(capsys, "swap-demo", "--n-opt", str(n_opt), "--r-max", "15")
        nus = [float(nu) for _, nu in rows]
        last = nus[-1] - n_opt
        ok &= code == 0 and float(rows[-1][0]) == 15.0 and 0 <= last < 1e-3 and min(nus) >= n_opt
        details.append(f"{n_opt}: +{last:.1e}")
    report_criterion(10, ok, "nu_swap(15) - n_opt " + ", ".join(details))
    assert ok


def test_criterion_11_golden_case(report_criterion):
    V = two_mode_squeezed(math.log(2))
    rep = optimal_tgcp(V)
    errs = (
        abs(pt_spectrum(V).nu - 0.5),
        abs(fidelity_coherent(V) - 2 / 3),
        abs(rep.f_opt - 2 / 3),
        abs(log_negativity(V) - math.log(2)),
    )
    ok = max(errs) < 1e-12
    report_criterion(11, ok, "errors nu, F, F_opt, E_N: " + ", ".join(f"{e:.1e}" for e in errs))
    assert ok


def test_criterion_12_decomposition_round_trip(report_criterion):
    rng = np.random.default_rng(12)
    worst = 0.0
    for _ in range(500):
        T1, T2 = (
            rotation(rng.uniform(0, 2 * math.pi)) @ squeeze(math.exp(rng.uniform(-1, 1))) @ rotation(rng.uniform(0, 2 * math.pi))
            for _ in range(2)
        )
        S, G = MinimalNoiseDecomposition(T1, rng.uniform(0.0, 1.0), T2).recompose()
        S2, G2 = decompose_minimal_noise(S, G).recompose()
        worst = max(worst, float(np.max(np.abs(S2 - S))), float(np.max(np.abs(G2 - G))))
    identity_sigma2 = True
    for tau in np.linspace(0.01, 1.0, 100):
        m = attenuation_map(float(tau), "b")
        identity_sigma2 &= bool(np.array_equal(decompose_minimal_noise(m.S_b, m.G_b).sigma2, np.eye(2)))
    ok = worst < 1e-9 and identity_sigma2
    report_criterion(12, ok, f"500 pairs, max residual {worst:.1e}, attenuations with sigma2 = I: {identity_sigma2}")
    assert ok
