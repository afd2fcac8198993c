"""``hamlearn`` command line: generate -> train -> analyze / sweep.

Every command reads the same experiment config and writes into one output
tree::

    OUT/data/manifest.json, OUT/data/rNN/*.csv      (generate)
    OUT/models/member_NN.hnn, *_history.csv        (train)
    OUT/analysis/*.csv, summary_<mode>.json        (analyze)
    OUT/sweep/chaos_<source>.csv, sweep_<source>.json

All randomness is derived from the master seed through numpy SeedSequence
spawn keys, which are recorded in the manifest.
"""
from __future__ import annotations

import json
import logging
import os
import sys
import tempfile
from pathlib import Path

import click
import numpy as np

from . import analysis, chaos
from .config import PROFILES, ExperimentConfig, load_config
from .network import (
    HnnEnsemble, TrainingDivergedError, SampleBatch, TrainConfig, analytic_targets, derivative_targets, learned_field,
    load_model, save_model, train, training_orbits, write_history_csv,
)
from .systems import (
    DimensionError, EnergyRangeError, IntegrationDivergedError, SamplingError, SystemKind, SystemSpec, Trajectory, hamiltonian_array,
    hamiltonian_field, integrate, integrate_many, poincare_section, read_trajectory_csv,
    sample_state_at_energy, write_trajectory_csv,
)

SCHEMA_VERSION = 1
log = logging.getLogger("hamlearn")

# spawn-key namespaces for derived seeds
KEY_DATA, KEY_TRAIN, KEY_SWEEP, KEY_TAYLOR, KEY_POINCARE = range(5)


def derived_seed(master: int, *key: int) -> int:
    ss = np.random.SeedSequence(master, spawn_key=key)
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _atomic_json(path: Path, payload: dict) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=".json")
    with os.fdopen(fd, "w") as fh:
        fh.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    os.replace(tmp, path)


def _params(value) -> tuple[float, ...]:
    return tuple(float(v) for v in np.atleast_1d(value))


def _label(params) -> str:
    return "alpha" + "_".join(f"{v:g}" for v in params)


def _ensure_dir(path: Path) -> Path:
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise click.ClickException(f"cannot create {path}: {exc}") from exc
    if not os.access(path, os.W_OK):
        raise click.ClickException(f"{path} is not writable")
    return path


def _portable(cfg: ExperimentConfig) -> dict:
    # the output location is left out so identical runs in different places match byte for byte
    d = cfg.to_dict()
    d.pop("out")
    return d


def cmd_generate(cfg: ExperimentConfig) -> dict:
    """One trajectory CSV per (parameter set, energy, orbit, replica) plus a manifest."""
    out = _ensure_dir(Path(cfg.out) / "data")
    kind = SystemKind(cfg.system)
    d = cfg.data
    files, replicas = [], []
    for r in range(cfg.ensemble_size):
        _ensure_dir(out / f"r{r:02d}")
        seed = derived_seed(cfg.seed, KEY_DATA, r)
        rng = np.random.default_rng(seed)
        orbits = training_orbits(kind, d.train_params, d.n_energies, d.orbits_per_energy,
                                 d.t_end, d.dt_sample, rng, d.dt_internal, d.energy_cap)
        replicas.append({"replica": r, "spawn_key": [KEY_DATA, r], "seed": seed})
        for n, (params, E, traj) in enumerate(orbits):
            i_param = n // (d.orbits_per_energy * d.n_energies)
            i_energy = n // d.orbits_per_energy % d.n_energies
            i_orbit = n % d.orbits_per_energy
            name = f"r{r:02d}/traj_p{i_param:02d}_e{i_energy:02d}_o{i_orbit:02d}.csv"
            P = np.array(params)
            try:
                write_trajectory_csv(out / name, traj, lambda x: hamiltonian_array(kind, P, x))
            except OSError as exc:
                raise click.ClickException(f"cannot write {out / name}: {exc}") from exc
            files.append({"file": name, "replica": r, "params": list(params),
                          "energy_above_min": E, "energy": traj.energy})
    manifest = {"schema_version": SCHEMA_VERSION, "command": "generate", "master_seed": cfg.seed,
                "system": kind.value, "config": _portable(cfg), "replicas": replicas, "files": files}
    _atomic_json(out / "manifest.json", manifest)
    return manifest


def _replica_batch(cfg: ExperimentConfig, data_dir: Path, entries: list[dict]) -> SampleBatch:
    kind = SystemKind(cfg.system)
    parts = []
    for e in entries:
        traj = read_trajectory_csv(data_dir / e["file"])
        if cfg.data.targets == "analytic":
            parts.append(analytic_targets(traj, SystemSpec(kind, e["params"])))
        else:
            parts.append(derivative_targets(traj, e["params"]))
    return SampleBatch.concatenate(parts)


def _train_member(cfg: ExperimentConfig, data_dir: Path, entries: list[dict], r: int):
    batch = _replica_batch(cfg, data_dir, entries)
    init_seed = derived_seed(cfg.seed, KEY_TRAIN, r, 0)
    tcfg = TrainConfig(**{**cfg.train.__dict__, "seed": derived_seed(cfg.seed, KEY_TRAIN, r, 1)})
    log.info("training member %d on %d rows", r, len(batch))
    model = train(batch, tcfg, init_seed)
    model.meta.update(replica=r, init_seed=init_seed, shuffle_seed=tcfg.seed, rows=len(batch),
                      system=SystemKind(cfg.system).value)
    return model


def cmd_train(cfg: ExperimentConfig, jobs: int = 1) -> dict:
    data_dir = Path(cfg.out) / "data"
    manifest_path = data_dir / "manifest.json"
    if not manifest_path.exists():
        raise click.ClickException(f"no training data at {data_dir}; run `hamlearn generate` first")
    manifest = json.loads(manifest_path.read_text())
    out = _ensure_dir(Path(cfg.out) / "models")
    by_replica: dict[int, list[dict]] = {}
    for e in manifest["files"]:
        by_replica.setdefault(e["replica"], []).append(e)
    replicas = sorted(by_replica)[:cfg.ensemble_size]
    if len(replicas) < cfg.ensemble_size:
        raise click.ClickException(f"data holds {len(replicas)} replicas, need {cfg.ensemble_size}")

    if jobs == 1:
        models = [_train_member(cfg, data_dir, by_replica[r], r) for r in replicas]
    else:
        from joblib import Parallel, delayed
        models = Parallel(n_jobs=jobs)(delayed(_train_member)(cfg, data_dir, by_replica[r], r)
                                       for r in replicas)
    members = []
    for r, model in zip(replicas, models):
        save_model(out / f"member_{r:02d}.hnn", model, train_params=cfg.data.train_params)
        write_history_csv(out / f"member_{r:02d}_history.csv", model.loss_history)
        members.append({"file": f"member_{r:02d}.hnn", "replica": r,
                        "initial_loss": model.loss_history[0], "final_loss": model.loss_history[-1],
                        "init_seed": model.meta["init_seed"], "shuffle_seed": model.meta["shuffle_seed"]})
    summary = {"schema_version": SCHEMA_VERSION, "command": "train", "master_seed": cfg.seed,
               "epochs": cfg.train.epochs, "layer_dims": models[0].layer_dims, "members": members}
    _write_json(out / "train_summary.json", summary)
    return summary


def load_ensemble(cfg: ExperimentConfig) -> HnnEnsemble:
    mdir = Path(cfg.out) / "models"
    paths = sorted(mdir.glob("member_*.hnn"))
    if not paths:
        raise click.ClickException(f"no models in {mdir}; run `hamlearn train` first")
    return HnnEnsemble([load_model(p) for p in paths])


def _analyze_potential(cfg, ens, out: Path) -> dict:
    kind = SystemKind(cfg.system)
    a = cfg.analyze
    grid_cfg = None
    if kind is not SystemKind.MORSE:
        grid_cfg = analysis.GridConfig(resolution=a.grid_resolution)
    rows = []
    for value in a.alphas:
        params = _params(value)
        err, _ = analysis.potential_error(ens, SystemSpec(kind, params), grid_cfg)
        rows.append((params, err))
    names = ["alpha"] if kind.n_params == 1 else [f"alpha{i + 1}" for i in range(kind.n_params)]
    with open(out / "potential_error.csv", "w") as fh:
        fh.write(",".join(names) + ",delta_V\n")
        for params, err in rows:
            fh.write(",".join(repr(v) for v in params) + f",{err!r}\n")
    for value in a.grid_alphas:
        params = _params(value)
        _, grid = analysis.potential_error(ens, SystemSpec(kind, params), grid_cfg)
        grid.to_csv(out / f"potential_grid_{_label(params)}.csv")
    return {"delta_V": [{"params": list(p), "delta_V": e} for p, e in rows]}


def _analyze_taylor(cfg, ens, out: Path) -> dict:
    kind = SystemKind(cfg.system)
    if kind is SystemKind.MORSE:
        raise click.ClickException("taylor mode needs a two-degree-of-freedom system")
    rows = []
    with open(out / "taylor_vs_alpha.csv", "w") as fh:
        names = ["alpha"] if kind.n_params == 1 else [f"alpha{i + 1}" for i in range(kind.n_params)]
        fh.write(",".join(names) + ",i1,i2,i3,i4,beta\n")
        for i, value in enumerate(cfg.analyze.alphas):
            params = _params(value)
            coeffs = analysis.taylor_fit(ens, params, cfg.analyze.taylor_samples,
                                         derived_seed(cfg.seed, KEY_TAYLOR, i), kind=kind)
            coeffs.to_csv(out / f"taylor_{_label(params)}.csv")
            for e, b in coeffs.coeffs.items():
                fh.write(",".join(repr(v) for v in params) + "," + ",".join(map(str, e)) + f",{b!r}\n")
            rows.append({"params": list(params), "beta_2100": coeffs.beta(2, 1, 0, 0),
                         "beta_0300": coeffs.beta(0, 3, 0, 0)})
    return {"taylor": rows}


def _analyze_orbit(cfg, ens, out: Path) -> dict:
    kind = SystemKind(cfg.system)
    a = cfg.analyze
    params = _params(a.orbit_alpha)
    spec = SystemSpec(kind, params)
    x0 = np.asarray(a.orbit_state, dtype=float)
    P = np.array(params)
    true = integrate(hamiltonian_field(spec), x0, cfg.data.dt_internal, a.orbit_t_end, cfg.data.dt_sample,
                     energy=lambda x: hamiltonian_array(kind, P, x))
    H_pred = lambda x: ens.hamiltonian(np.concatenate([np.broadcast_to(P, x.shape[:-1] + P.shape), x], -1))
    diverged = False
    try:
        pred = integrate(learned_field(ens, P), x0, cfg.data.dt_internal, a.orbit_t_end, cfg.data.dt_sample)
    except IntegrationDivergedError as exc:
        pred, diverged = exc.trajectory, True
    label = _label(params)
    write_trajectory_csv(out / f"orbit_true_{label}.csv", true, lambda x: hamiltonian_array(kind, P, x))
    result = {"params": list(params), "initial_state": x0.tolist(), "predicted_diverged": diverged}
    if pred is not None:
        write_trajectory_csv(out / f"orbit_pred_{label}.csv", pred, H_pred)
        H = H_pred(pred.x)
        result["predicted_energy_drift"] = float(np.max(np.abs(H - H[0])))
    return result


def _analyze_poincare(cfg, ens, out: Path) -> dict:
    kind = SystemKind(cfg.system)
    if kind is SystemKind.MORSE:
        raise click.ClickException("poincare mode needs a two-degree-of-freedom system")
    a = cfg.analyze
    params = _params(a.poincare_alpha)
    spec = SystemSpec(kind, params)
    P = np.array(params)
    states = np.array([sample_state_at_energy(spec, a.energy,
                                              np.random.default_rng(derived_seed(cfg.seed, KEY_POINCARE, j))
                                              ).as_array() for j in range(a.poincare_orbits)])
    counts = {}
    with open(out / f"poincare_{_label(params)}.csv", "w") as fh:
        fh.write("source,orbit,q2,p2\n")
        for source, fld in (("true", hamiltonian_field(spec)), ("learned", learned_field(ens, P))):
            try:
                samples = integrate_many(fld, states, cfg.data.dt_internal, a.poincare_t_end,
                                         cfg.data.dt_sample)
            except IntegrationDivergedError:
                counts[source] = None
                continue
            n = 0
            for j in range(len(states)):
                traj = Trajectory(samples[:, j], cfg.data.dt_sample)
                for q2, p2 in poincare_section(traj):
                    fh.write(f"{source},{j},{q2!r},{p2!r}\n")
                    n += 1
            counts[source] = n
    return {"params": list(params), "section_points": counts}


ANALYZE_MODES = {"potential": _analyze_potential, "taylor": _analyze_taylor,
                 "orbit": _analyze_orbit, "poincare": _analyze_poincare}


def cmd_analyze(cfg: ExperimentConfig, mode: str) -> dict:
    ens = load_ensemble(cfg)
    out = _ensure_dir(Path(cfg.out) / "analysis")
    modes = list(ANALYZE_MODES) if mode == "all" else [mode]
    if mode == "all" and SystemKind(cfg.system) is SystemKind.MORSE:
        modes = ["potential", "orbit"]
    base = {"schema_version": SCHEMA_VERSION, "command": "analyze", "master_seed": cfg.seed,
            "ensemble_size": len(ens)}
    summary = dict(base)
    for m in modes:
        result = ANALYZE_MODES[m](cfg, ens, out)
        _write_json(out / f"summary_{m}.json", {**base, "mode": m, "result": result})
        summary[m] = result
    return summary


def cmd_sweep(cfg: ExperimentConfig, source: str, detail: bool = False) -> dict:
    kind = SystemKind(cfg.system)
    if kind is not SystemKind.HENON_HEILES:
        raise click.ClickException("sweeps are defined for the one-parameter Hénon-Heiles system")
    s = cfg.sweep
    if source == "true":
        factory = chaos.true_field_factory(kind)
        n_alpha, n_ic, t_end = s.n_alpha, s.n_ic, s.t_end
    elif source == "learned":
        factory = chaos.learned_field_factory(load_ensemble(cfg))
        n_alpha, n_ic, t_end = s.learned_n_alpha, s.learned_n_ic, s.learned_t_end
    else:
        raise click.ClickException(f"unknown source {source!r}")
    out = _ensure_dir(Path(cfg.out) / "sweep")
    alphas = np.linspace(s.alpha_min, s.alpha_max, n_alpha)
    n_steps = int(round(t_end / s.dt))
    report = chaos.chaos_sweep(factory, alphas, n_ic, s.energy, s.dt, n_steps,
                               seed=derived_seed(cfg.seed, KEY_SWEEP), kind=kind, max_norm=s.max_norm)
    report.to_csv(out / f"chaos_{source}.csv")
    if detail:
        report.detail_to_csv(out / f"orbits_{source}.csv")
    total = n_alpha * n_ic
    invalid_fraction = report.n_invalid / total
    summary = {"schema_version": SCHEMA_VERSION, "command": "sweep", "source": source,
               "master_seed": cfg.seed, "n_alpha": n_alpha, "n_ic": n_ic, "energy": s.energy,
               "dt": s.dt, "t_end": t_end, "max_norm": s.max_norm,
               "transition_alpha": report.transition_alpha(s.transition_fraction),
               "transition_fraction": s.transition_fraction,
               "n_invalid": report.n_invalid, "invalid_fraction": invalid_fraction,
               "low_confidence": bool(invalid_fraction > s.low_confidence_invalid_fraction)}
    _write_json(out / f"sweep_{source}.json", summary)
    return summary


def _common(f):
    f = click.option("--out", type=click.Path(file_okay=False), default=None,
                     help="Output directory (overrides the config).")(f)
    f = click.option("--seed", type=click.IntRange(0, 2 ** 64 - 1), default=None, help="Master seed.")(f)
    f = click.option("--profile", type=click.Choice(PROFILES), default=None,
                     help="Named defaults: paper (full scale) or desk (laptop scale).")(f)
    f = click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
                     default=None, help="TOML experiment config.")(f)
    return f


DOMAIN_ERRORS = (EnergyRangeError, DimensionError, SamplingError, TrainingDivergedError,
                 analysis.UndefinedMetricError, analysis.RankDeficientError, OSError)


def _run(fn, *args):
    try:
        return fn(*args)
    except DOMAIN_ERRORS as exc:
        raise click.ClickException(f"{type(exc).__name__}: {exc}") from exc


def _cfg(config_path, profile, seed, out) -> ExperimentConfig:
    try:
        return load_config(config_path, profile, seed, out)
    except (ValueError, TypeError) as exc:
        raise click.ClickException(f"invalid config: {exc}") from exc


@click.group()
@click.option("-v", "--verbose", is_flag=True)
def main(verbose):
    """Learn parameter-cognizant Hamiltonian networks and probe their route to chaos."""
    logging.basicConfig(level=logging.DEBUG if verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


@main.command()
@_common
def generate(config_path, profile, seed, out):
    """Integrate training orbits and write them as CSV."""
    m = _run(cmd_generate, _cfg(config_path, profile, seed, out))
    click.echo(f"wrote {len(m['files'])} trajectories for {len(m['replicas'])} replica(s)")


@main.command("train")
@_common
@click.option("--jobs", type=int, default=1, show_default=True, help="Parallel training workers.")
def train_cmd(config_path, profile, seed, out, jobs):
    """Train one network per data replica."""
    s = _run(cmd_train, _cfg(config_path, profile, seed, out), jobs)
    for m in s["members"]:
        click.echo(f"{m['file']}: loss {m['initial_loss']:.3e} -> {m['final_loss']:.3e}")


@main.command()
@_common
@click.option("--mode", type=click.Choice(["potential", "taylor", "poincare", "orbit", "all"]),
              default="all", show_default=True)
def analyze(config_path, profile, seed, out, mode):
    """Potential error, Taylor coefficients, orbits and sections of the trained ensemble."""
    s = _run(cmd_analyze, _cfg(config_path, profile, seed, out), mode)
    if "potential" in s:
        for row in s["potential"]["delta_V"]:
            click.echo(f"{row['params']}: <dV> = {row['delta_V']:.4f}")


@main.command()
@_common
@click.option("--source", type=click.Choice(["true", "learned"]), default="true", show_default=True)
@click.option("--detail", is_flag=True, help="Also write per-orbit diagnostics.")
def sweep(config_path, profile, seed, out, source, detail):
    """Chaos indicators versus the bifurcation parameter."""
    s = _run(cmd_sweep, _cfg(config_path, profile, seed, out), source, detail)
    click.echo(f"transition alpha: {s['transition_alpha']} (invalid orbits: {s['n_invalid']}"
               f"{', low confidence' if s['low_confidence'] else ''})")


if __name__ == "__main__":
    main()
