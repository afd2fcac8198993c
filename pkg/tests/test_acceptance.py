"""Gated acceptance criteria, one test per criterion.

The heavy fixtures train desk-profile ensembles and run the desk-profile
true-field sweep through the same code paths as the command line, so this
module takes roughly half an hour on one core. Each test prints a one-line
verdict and the terminal summary lists every criterion.
"""
import csv
import time

import numpy as np
import pytest

from hamlearn.analysis import (
    MORSE_GRID, potential_error, predicted_potential, relative_energy_drift, taylor_fit, true_taylor,
)
from hamlearn.chaos import (
    ChaosClass, GAMMA_THRESHOLD, LAMBDA_THRESHOLD, alignment_index, classify, lyapunov_spectrum,
    sweep_initial_conditions, tangent_dynamics, true_field_factory,
)
from hamlearn.cli import cmd_generate, cmd_sweep, cmd_train, load_ensemble
from hamlearn.config import load_config, profile_config
from hamlearn.network import (
    AnalyticPredictor, SampleBatch, forward, input_gradient, learned_field, loss, loss_and_gradient,
    model_init,
)
from hamlearn.systems import (
    IntegrationDivergedError, SystemKind, SystemSpec, hamiltonian_array, hamiltonian_field,
    integrate, integrate_many, potential_array, rhs_array, sample_state_at_energy,
)

FIG_STATE = np.array([0.0, 0.0, 6 ** -0.5, 6 ** -0.5])


def verdict(number, ok, detail):
    print(f"\nacceptance criterion {number}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, detail


def _desk(tmp_path_factory, system, name):
    cfg = profile_config("desk", system)
    cfg.out = str(tmp_path_factory.mktemp(name))
    cmd_generate(cfg)
    cmd_train(cfg)
    return cfg, load_ensemble(cfg)


@pytest.fixture(scope="module")
def hh_desk(tmp_path_factory):
    return _desk(tmp_path_factory, SystemKind.HENON_HEILES, "hh_desk")


@pytest.fixture(scope="module")
def morse_desk(tmp_path_factory):
    return _desk(tmp_path_factory, SystemKind.MORSE, "morse_desk")


@pytest.fixture(scope="module")
def true_sweep(tmp_path_factory):
    out = tmp_path_factory.mktemp("sweep")
    cfg = load_config(profile="desk", seed=0, out=str(out))
    start = time.time()
    summary = cmd_sweep(cfg, "true", detail=True)
    with open(out / "sweep" / "chaos_true.csv") as fh:
        rows = list(csv.DictReader(fh))
    with open(out / "sweep" / "orbits_true.csv") as fh:
        detail = list(csv.DictReader(fh))
    return summary, rows, detail, time.time() - start


def _rel(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300)


@pytest.mark.acceptance(1, "gradient oracle suite")
def test_criterion_1_gradient_oracles():
    start = time.time()
    rng = np.random.default_rng(2024)
    worst_in = 0.0
    for i in range(100):
        m = model_init([5, 32, 32, 1], 1000 + i)
        x = rng.normal(size=5)
        h = 1e-5
        fd = np.array([(forward(m, x + h * e) - forward(m, x - h * e)) / (2 * h) for e in np.eye(5)])
        worst_in = max(worst_in, _rel(input_gradient(m, x), fd))
    worst_par = 0.0
    for i in range(20):
        m = model_init([5, 6, 5, 1], 2000 + i)
        for b in m.biases:
            b[:] = rng.normal(scale=0.3, size=b.shape)
        batch = SampleBatch(rng.normal(size=(6, 5)), rng.normal(size=(6, 2)), rng.normal(size=(6, 2)))
        _, dW, db = loss_and_gradient(m, batch)
        for arr, ana in zip(m.weights + m.biases, dW + db):
            num = np.empty_like(arr)
            for idx in np.ndindex(arr.shape):
                old = arr[idx]
                arr[idx] = old + 1e-6
                up = loss(m, batch)
                arr[idx] = old - 1e-6
                down = loss(m, batch)
                arr[idx] = old
                num[idx] = (up - down) / 2e-6
            worst_par = max(worst_par, _rel(ana, num))
    elapsed = time.time() - start
    verdict(1, worst_in < 1e-6 and worst_par < 1e-4 and elapsed < 60,
            f"input rel err {worst_in:.1e} < 1e-6 on 100, loss-gradient rel err {worst_par:.1e} < 1e-4 "
            f"on 20, {elapsed:.0f}s")


@pytest.mark.acceptance(2, "true-system energy conservation")
def test_criterion_2_energy_conservation():
    rng = np.random.default_rng(7)
    # one batch of Hénon-Heiles orbits at several alphas plus the figure orbit
    alphas = np.array([1.0, 0.0, 0.3, 0.5, 0.7, 0.9])
    states = [FIG_STATE] + [sample_state_at_energy(SystemSpec.henon_heiles(a), 1 / 6, rng).as_array()
                            for a in alphas[1:]]
    P = alphas[:, None]
    x = integrate_many(lambda s: rhs_array(SystemKind.HENON_HEILES, P, s), np.array(states), 0.01, 1000.0, 0.1)
    H = hamiltonian_array(SystemKind.HENON_HEILES, P, x)
    drift = np.abs(H - H[0]).max()
    morse = SystemSpec.morse(1.5)
    xm = sample_state_at_energy(morse, 0.8, rng).as_array()
    tm = integrate(hamiltonian_field(morse), xm, 0.01, 1000.0, 0.1)
    Hm = hamiltonian_array(SystemKind.MORSE, np.array([1.5]), tm.x)
    drift = max(drift, np.abs(Hm - Hm[0]).max())
    verdict(2, drift < 1e-6, f"max |H(t) - H(0)| = {drift:.1e} < 1e-6 over t = 1000")


@pytest.mark.acceptance(3, "integrable chaos metrics")
def test_criterion_3_integrable_metrics():
    x0 = sweep_initial_conditions(SystemKind.HENON_HEILES, [0.0], 20, 1 / 6, seed=3)[0]
    f = true_field_factory(SystemKind.HENON_HEILES)(np.zeros((20, 1)))
    res = tangent_dynamics(f, x0, 0.01, 100_000)
    lam = np.abs(res["exponents"]).max()
    gam = res["gamma_min"].min()
    verdict(3, lam < 5e-3 and gam > 1e-8 and res["valid"].all(),
            f"max |lambda| = {lam:.1e} < 5e-3, min gamma = {gam:.3f} > 1e-8 over 20 orbits")


@pytest.mark.acceptance(4, "chaotic orbit detection")
def test_criterion_4_chaotic_detection():
    f = hamiltonian_field(SystemSpec.henon_heiles(1.0))
    lyap = lyapunov_spectrum(f, FIG_STATE, 0.01, 100_000)
    align = alignment_index(f, FIG_STATE, 0.01, 100_000)
    cls = classify(lyap, align)
    s = lyap.spectrum
    pairing = max(abs(s[0] + s[3]), abs(s[1] + s[2]))
    verdict(4, cls is ChaosClass.CHAOTIC and pairing < 1e-2 and abs(s.sum()) < 1e-2,
            f"lambda_M = {lyap.max_exponent:.3f} > {LAMBDA_THRESHOLD}, gamma_m = {align.gamma_min:.1e} "
            f"< {GAMMA_THRESHOLD}; pairing {pairing:.1e}, sum {s.sum():.1e}")


@pytest.mark.acceptance(5, "true-system transition sweep")
def test_criterion_5_transition_sweep(true_sweep):
    summary, rows, _, elapsed = true_sweep
    alphas = np.array([float(r["alpha"]) for r in rows])
    fc = np.array([float(r["f_c"]) for r in rows])
    low = fc[alphas <= 0.5 + 1e-9].max()
    top = fc[np.isclose(alphas, 1.0)][0]
    t = summary["transition_alpha"]
    ok = low < 0.05 and top > 0.2 and t is not None and 0.6 - 1e-9 <= t <= 0.8 + 1e-9 and elapsed < 3600
    verdict(5, ok, f"max f_c(alpha <= 0.5) = {low:.2f}, f_c(1) = {top:.2f}, transition at {t}, "
                   f"{elapsed / 60:.0f} min")


def test_sweep_indicators_agree(true_sweep):
    _, _, detail, _ = true_sweep
    valid = [d for d in detail if d["valid"] == "1"]
    by_lambda = np.array([float(d["lambda_max"]) > LAMBDA_THRESHOLD for d in valid])
    by_gamma = np.array([float(d["gamma_min"]) < GAMMA_THRESHOLD for d in valid])
    agreement = np.mean(by_lambda == by_gamma)
    print(f"\nlambda-only and gamma-only verdicts agree on {agreement:.1%} of orbits")
    assert agreement >= 0.95


@pytest.mark.acceptance(6, "adaptability across alpha")
def test_criterion_6_adaptability(hh_desk):
    _, ens = hh_desk
    errs = {a: potential_error(ens, SystemSpec.henon_heiles(a))[0] for a in (0.0, 0.3, 0.5, 0.7, 1.0)}
    inner = max(errs[a] for a in (0.3, 0.5, 0.7))
    outer = max(errs[0.0], errs[1.0])
    text = ", ".join(f"{a}: {e:.3f}" for a, e in errs.items())
    verdict(6, inner < 0.05 and outer < 0.15, f"<dV> {text}; inside < 0.05, extrapolated < 0.15")


def test_learned_field_matches_true_field_at_interpolated_alpha(hh_desk):
    _, ens = hh_desk
    spec = SystemSpec.henon_heiles(0.5)
    rng = np.random.default_rng(11)
    states = np.array([sample_state_at_energy(spec, E, rng).as_array()
                       for E in rng.uniform(0.005, 1 / 6, 2000)])
    pred = learned_field(ens, [0.5])(states)
    true = rhs_array(SystemKind.HENON_HEILES, np.array([0.5]), states)
    rms = np.sqrt(np.mean(np.sum((pred - true) ** 2, axis=-1)))
    print(f"\nlearned vs true field RMS at alpha 0.5: {rms:.4f}")
    assert rms < 0.05


@pytest.mark.acceptance(7, "Taylor oracle")
def test_criterion_7_taylor_oracle():
    worst_main, worst_rest = 0.0, 0.0
    for alpha in (0.0, 0.25, 0.5, 0.75, 1.0):
        coeffs = taylor_fit(AnalyticPredictor(SystemKind.HENON_HEILES), alpha, 2000, seed=5)
        truth = true_taylor(SystemKind.HENON_HEILES, alpha)
        for e, b in coeffs.coeffs.items():
            if e in truth:
                worst_main = max(worst_main, abs(b - truth[e]))
            else:
                worst_rest = max(worst_rest, abs(b))
    verdict(7, worst_main < 1e-8 and worst_rest < 1e-8,
            f"max error on the six nonzero coefficients {worst_main:.1e}, max other |beta| {worst_rest:.1e}")


@pytest.mark.acceptance(8, "learned-field energy conservation")
def test_criterion_8_learned_conservation(hh_desk):
    _, ens = hh_desk
    spec = SystemSpec.henon_heiles(0.7)
    try:
        traj = integrate(learned_field(ens, [0.7]), FIG_STATE, 0.01, 100.0, 0.1)
    except IntegrationDivergedError as exc:
        verdict(8, False, f"predicted orbit diverged: {exc}")
    drift = relative_energy_drift(ens, spec, traj.x)
    verdict(8, drift < 1e-3, f"relative H_pred drift {drift:.1e} < 1e-3 over t = 100")


@pytest.mark.acceptance(9, "Morse adaptability")
def test_criterion_9_morse(morse_desk):
    _, ens = morse_desk
    x = np.linspace(*MORSE_GRID.x_range, MORSE_GRID.resolution)[:, None]
    i2 = int(np.argmin(np.abs(x[:, 0] - 2.0)))
    near = (x[:, 0] >= 0.5 - 1e-12) & (x[:, 0] <= 2.0 + 1e-12)
    V = {a: predicted_potential(ens, SystemSpec.morse(a), x) for a in (1.0, 1.5, 2.0)}
    mean_pair = 0.5 * (V[1.0][i2] + V[2.0][i2])
    non_interp = abs(V[1.5][i2] - mean_pair) / abs(mean_pair)
    v_true = potential_array(SystemKind.MORSE, np.array([1.5]), x)
    # relative to the well depth, which is 1 for every a
    match = np.abs(V[1.5][near] - v_true[near]).max()
    verdict(9, non_interp > 0.05 and match < 0.10,
            f"|V(1.5) - mean(V(1), V(2))| / |mean| at x=2 = {non_interp:.3f} (need > 0.05); "
            f"max |V_pred - V_true| on [0.5, 2] = {match:.3f} (need < 0.10)")
