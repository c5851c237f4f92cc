"""Command implementations behind the CLI: simulate, estimate, sweeps, tests, link prediction.

Every command is deterministic given (config, seed): replicate streams derive
from (seed, replicate index), results reduce in seed order, and CSV cells are
formatted with a fixed float format so repeated runs produce identical bytes.
Each report command writes its figures next to the CSV that feeds them.
"""

from __future__ import annotations

import csv
import dataclasses
import json
from pathlib import Path

import numpy as np

from .config import ConfigError, ExperimentConfig
from .dynamics import (
    load_graph,
    replicate_rng,
    sample_chain,
    sample_graph,
    save_graph,
    uniform_latitude,
)
from .envelope import estimate_envelope
from .harmonics import envelope_spectrum
from .inference import (
    ORACLE,
    PLUGIN,
    UNIFORM,
    LinkPosterior,
    calibrate_threshold,
    classifier_risk,
    classify,
    estimate_latitude_density,
    link_posterior_profile,
    null_rejection_rate,
    random_classifier,
)
from .latitude import estimate_gram, fit_latitude, superdiagonal_distances
from .pool import parallel_map
from .spectral import VALUE_DESC, rearrangement_distance, scaled_adjacency, sym_eigen
from . import plotting

__all__ = [
    "cmd_simulate",
    "cmd_estimate",
    "cmd_sweep_delta2",
    "cmd_test_power",
    "cmd_linkpred",
    "write_csv",
    "read_csv",
]

TRUTH_RESOLUTION = 20  # degrees kept when tabulating a true or estimated spectrum
_QUAD_NODES = 256


# ---------------------------------------------------------------------------
# CSV helpers (deterministic bytes, schema-stamped)


def _cell(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".12g")


def write_csv(path, schema: str, header, rows) -> None:
    lines = [f"# schema: {schema}", ",".join(header)]
    for row in rows:
        lines.append(",".join(_cell(c) for c in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def read_csv(path) -> tuple[str, list, list]:
    """Returns (schema, header, rows-of-strings); validates the schema stamp."""
    text = Path(path).read_text(encoding="ascii").splitlines()
    if not text or not text[0].startswith("# schema: "):
        raise ValueError(f"{path}: missing schema stamp")
    schema = text[0][len("# schema: ") :]
    reader = csv.reader(text[1:])
    header = next(reader)
    return schema, header, list(reader)


def _out(out_dir) -> Path:
    path = Path(out_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


# ---------------------------------------------------------------------------
# simulate


def cmd_simulate(config: ExperimentConfig, out_dir, jobs: int = 1) -> list[Path]:
    """Write one graph container per seed; byte-identical across repeated runs."""
    out = _out(out_dir)
    if config.n is None:
        raise ConfigError("simulate needs 'n'")
    lat = config.build_latitude()
    env = config.build_envelope()
    zeta = config.resolve_zeta(config.n)
    paths = []
    for seed in config.seeds:
        chain = sample_chain(config.n, config.d, lat, replicate_rng(seed, 0))
        graph = sample_graph(chain, env, zeta=zeta, seed=replicate_rng(seed, 1))
        chain = dataclasses.replace(chain, seed=seed)
        graph = dataclasses.replace(graph, seed=seed)
        path = out / f"graph_seed{seed}.json"
        save_graph(path, graph, config.d, chain)
        paths.append(path)
    return paths


# ---------------------------------------------------------------------------
# estimate


def cmd_estimate(config: ExperimentConfig, out_dir) -> list[Path]:
    """Estimate envelope and latitude from a stored graph; emit JSON, CSV, and figures."""
    if not config.graph_file:
        raise ConfigError("estimate needs 'graph_file'")
    try:
        graph, d_file, _ = load_graph(config.graph_file)
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot load graph {config.graph_file!r}: {exc}") from exc
    if graph is None:
        raise ConfigError(f"{config.graph_file!r} holds no adjacency matrix")
    if d_file != config.d:
        raise ConfigError(f"config d={config.d} but the graph was built with d={d_file}")

    est = estimate_envelope(graph, config.d, zeta=graph.zeta)
    density, _ = estimate_latitude_density(graph, config.d, bandwidth=config.bandwidth)

    grid = np.linspace(-1.0, 1.0, 401)
    env_curve = est.evaluate(grid, clip=True)
    lat_curve = density.pdf(grid)
    has_truth = "envelope" in config.provided or "latitude" in config.provided
    env_truth = config.build_envelope()(grid) if has_truth else None
    lat_truth = config.build_latitude().pdf(grid) if has_truth else None

    out = _out(out_dir)
    paths = []

    path = out / "envelope.json"
    path.write_text(json.dumps(est.to_doc(), sort_keys=True) + "\n", encoding="ascii")
    paths.append(path)
    path = out / "latitude.json"
    path.write_text(json.dumps(density.to_doc(), sort_keys=True) + "\n", encoding="ascii")
    paths.append(path)

    path = out / "p_hat.csv"
    from .harmonics import harmonic_dim

    write_csv(
        path,
        "mrgg.p_hat.v1",
        ["k", "dim", "p_hat"],
        [(k, harmonic_dim(k, config.d), v) for k, v in enumerate(est.p_hat)],
    )
    paths.append(path)

    header = ["t", "estimate"] + (["truth"] if has_truth else [])
    rows = zip(grid, env_curve, env_truth) if has_truth else zip(grid, env_curve)
    path = out / "envelope_curve.csv"
    write_csv(path, "mrgg.curve.v1", header, rows)
    paths.append(path)
    rows = zip(grid, lat_curve, lat_truth) if has_truth else zip(grid, lat_curve)
    path = out / "latitude_pdf.csv"
    write_csv(path, "mrgg.curve.v1", header, rows)
    paths.append(path)

    curves = {"estimate": env_curve}
    if has_truth:
        curves["true envelope"] = env_truth
    path = out / "envelope.svg"
    plotting.save_overlay(path, grid, curves, "inner product", "connection probability")
    paths.append(path)
    curves = {"estimate": lat_curve}
    if has_truth:
        curves["true latitude"] = lat_truth
    path = out / "latitude.svg"
    plotting.save_overlay(path, grid, curves, "jump inner product", "density")
    paths.append(path)
    return paths


# ---------------------------------------------------------------------------
# delta2 sweep


def _sweep_errors(task) -> tuple[float, float]:
    config, n, seed = task
    env = config.build_envelope()
    lat = config.build_latitude()
    zeta = config.resolve_zeta(n)
    chain = sample_chain(n, config.d, lat, replicate_rng(seed, 0))
    graph = sample_graph(chain, env, zeta=zeta, seed=replicate_rng(seed, 1))

    est = estimate_envelope(graph, config.d, zeta=zeta)
    truth = envelope_spectrum(env, config.d, TRUTH_RESOLUTION, _QUAD_NODES)
    env_err = rearrangement_distance(
        truth.with_multiplicity(), est.spectrum().with_multiplicity()
    )

    density, _ = estimate_latitude_density(graph, config.d, bandwidth=config.bandwidth)
    lat_truth = envelope_spectrum(lat.pdf, config.d, TRUTH_RESOLUTION, _QUAD_NODES)
    lat_est = envelope_spectrum(density.pdf, config.d, TRUTH_RESOLUTION, _QUAD_NODES)
    lat_err = rearrangement_distance(
        lat_truth.with_multiplicity(), lat_est.with_multiplicity()
    )
    return float(env_err), float(lat_err)


def cmd_sweep_delta2(config: ExperimentConfig, out_dir, jobs: int = 1) -> list[Path]:
    """Estimation error against graph size, averaged over seeds, with a figure."""
    sizes = config.sizes()
    if len(sizes) < 2:
        raise ConfigError("sweep-delta2 needs at least two graph sizes in 'n_list'")
    tasks = [(config, n, seed) for n in sizes for seed in config.seeds]
    results = parallel_map(_sweep_errors, tasks, jobs)

    rows = []
    env_series, lat_series = [], []
    per_size = len(config.seeds)
    for i, n in enumerate(sizes):
        block = results[i * per_size : (i + 1) * per_size]
        env_errs = np.array([b[0] for b in block])
        lat_errs = np.array([b[1] for b in block])
        rows.append(
            (n, env_errs.mean(), env_errs.std(), lat_errs.mean(), lat_errs.std())
        )
        env_series.append((env_errs.mean(), env_errs.std()))
        lat_series.append((lat_errs.mean(), lat_errs.std()))

    out = _out(out_dir)
    csv_path = out / "sweep_delta2.csv"
    write_csv(
        csv_path,
        "mrgg.sweep_delta2.v1",
        ["n", "envelope_err_mean", "envelope_err_sd", "latitude_err_mean", "latitude_err_sd"],
        rows,
    )
    fig_path = out / "sweep_delta2.svg"
    plotting.save_errorbars(
        fig_path,
        list(sizes),
        {
            "envelope": (
                [m for m, _ in env_series],
                [s for _, s in env_series],
            ),
            "latitude": (
                [m for m, _ in lat_series],
                [s for _, s in lat_series],
            ),
        },
        "graph size",
        "spectrum error",
    )
    return [csv_path, fig_path]


# ---------------------------------------------------------------------------
# dynamics-test power


def cmd_test_power(config: ExperimentConfig, out_dir, jobs: int = 1) -> list[Path]:
    """Calibrated rejection rates under the null and the configured alternative."""
    if config.calibration_trials < 100:
        raise ConfigError("test-power needs at least 100 calibration trials")
    if config.evaluation_trials < 100:
        raise ConfigError("test-power needs at least 100 evaluation trials per condition")
    master = config.seeds[0]
    rows = []
    for n in config.sizes():
        pipeline = config.pipeline(n)
        threshold = calibrate_threshold(
            n, config.d, config.alpha, config.calibration_trials, pipeline, seed=master, jobs=jobs
        )
        null_rate = null_rejection_rate(
            n,
            config.d,
            threshold,
            config.evaluation_trials,
            pipeline,
            seed=master + 1_000_003,
            jobs=jobs,
            null=True,
        )
        alt_rate = null_rejection_rate(
            n,
            config.d,
            threshold,
            config.evaluation_trials,
            pipeline,
            seed=master + 2_000_003,
            jobs=jobs,
            null=False,
        )
        rows.append((n, null_rate, alt_rate, threshold))

    out = _out(out_dir)
    csv_path = out / "test_power.csv"
    write_csv(
        csv_path,
        "mrgg.test_power.v1",
        ["n", "null_rejection_rate", "alt_rejection_rate", "threshold"],
        rows,
    )
    fig_path = out / "test_power.svg"
    sizes = [r[0] for r in rows]
    plotting.save_errorbars(
        fig_path,
        sizes,
        {
            "null": ([r[1] for r in rows], [0.0] * len(rows)),
            "alternative": ([r[2] for r in rows], [0.0] * len(rows)),
        },
        "graph size",
        "rejection rate",
    )
    return [csv_path, fig_path]


# ---------------------------------------------------------------------------
# link prediction


def _linkpred_seed(task):
    config, n, seed = task
    d = config.d
    env = config.build_envelope()
    lat = config.build_latitude()
    zeta = config.resolve_zeta(n)
    chain = sample_chain(n, d, lat, replicate_rng(seed, 0))
    graph = sample_graph(chain, env, zeta=zeta, seed=replicate_rng(seed, 1))

    r_true = np.clip(chain.points @ chain.points[-1], -1.0, 1.0)
    eta_oracle = link_posterior_profile(r_true, env, lat.pdf)
    eta_uniform = link_posterior_profile(r_true, env, uniform_latitude(d).pdf)

    est = estimate_envelope(graph, d, zeta=zeta)
    spec = sym_eigen(scaled_adjacency(graph), want_vectors=True, order=VALUE_DESC)
    gram = estimate_gram(spec, d)
    density = fit_latitude(superdiagonal_distances(gram), bandwidth=config.bandwidth)
    r_plugin = np.clip(n * gram.matrix[:, -1], -1.0, 1.0)
    eta_plugin = link_posterior_profile(r_plugin, est.evaluate, density.pdf)

    oracle_post = LinkPosterior(eta_oracle, ORACLE)
    plugin_post = LinkPosterior(eta_plugin, PLUGIN)
    risk_bayes = classifier_risk(oracle_post, classify(oracle_post))
    risk_mrgg = classifier_risk(oracle_post, classify(plugin_post))
    risk_random = classifier_risk(
        oracle_post, random_classifier(graph, replicate_rng(seed, 2))
    )
    head = config.link_nodes
    return {
        "eta_oracle": eta_oracle[:head],
        "eta_plugin": eta_plugin[:head],
        "eta_uniform": eta_uniform[:head],
        "risk_bayes": risk_bayes,
        "risk_mrgg": risk_mrgg,
        "risk_random": risk_random,
    }


def cmd_linkpred(config: ExperimentConfig, out_dir, jobs: int = 1) -> list[Path]:
    """Posterior table for the leading nodes plus a risk comparison, averaged over seeds."""
    if config.n is None:
        raise ConfigError("linkpred needs 'n'")
    tasks = [(config, config.n, seed) for seed in config.seeds]
    results = parallel_map(_linkpred_seed, tasks, jobs)

    post_rows = []
    for seed, res in zip(config.seeds, results):
        for i in range(len(res["eta_oracle"])):
            post_rows.append(
                (
                    seed,
                    i + 1,
                    res["eta_oracle"][i],
                    res["eta_plugin"][i],
                    res["eta_uniform"][i],
                )
            )
    risk_rows = [
        (str(seed), res["risk_bayes"], res["risk_mrgg"], res["risk_random"])
        for seed, res in zip(config.seeds, results)
    ]
    risk_rows.append(
        (
            "mean",
            float(np.mean([r["risk_bayes"] for r in results])),
            float(np.mean([r["risk_mrgg"] for r in results])),
            float(np.mean([r["risk_random"] for r in results])),
        )
    )

    out = _out(out_dir)
    post_csv = out / "linkpred_posteriors.csv"
    write_csv(
        post_csv,
        "mrgg.linkpred_posteriors.v1",
        ["seed", "node", "eta_oracle", "eta_plugin", "eta_uniform"],
        post_rows,
    )
    risk_csv = out / "linkpred_risks.csv"
    write_csv(
        risk_csv,
        "mrgg.linkpred_risks.v1",
        ["seed", "risk_bayes", "risk_mrgg", "risk_random"],
        risk_rows,
    )

    first = results[0]
    nodes = np.arange(1, len(first["eta_oracle"]) + 1)
    post_fig = out / "linkpred_posteriors.svg"
    plotting.save_posterior_markers(
        post_fig,
        nodes,
        {
            "oracle": first["eta_oracle"],
            "plug-in": first["eta_plugin"],
            "uniform baseline": first["eta_uniform"],
        },
        title=f"seed {config.seeds[0]}",
    )
    risk_fig = out / "linkpred_risks.svg"
    plotting.save_risk_bars(
        risk_fig,
        ["bayes", "mrgg", "random"],
        [risk_rows[-1][1], risk_rows[-1][2], risk_rows[-1][3]],
        "risk",
    )
    return [post_csv, risk_csv, post_fig, risk_fig]
