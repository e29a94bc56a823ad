"""Command-line interface: data tools, model fitting, experiments, service."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from . import belief as bel
from . import harness, synthetic
from .dataset import (SplitMaskConfig, binarize, load_reactions, load_survey_dir,
                      split, write_reactions)
from .latent import IdealFitConfig, fit_ideal, fit_pca, load_model, save_model
from .selectors import SELECTOR_NAMES


@click.group()
def main():
    """Adaptive questionnaire engine for voting-advice surveys."""


@main.group()
def dataset():
    """Inspect, validate, and split survey reaction matrices."""


@dataset.command()
@click.argument("path", type=click.Path(exists=True, path_type=Path))
def validate(path):
    """Check a reactions CSV (or survey directory) against the matrix invariants."""
    try:
        if path.is_dir():
            survey = load_survey_dir(path)
            matrices = {name: m for name, m in
                        (("reactions", survey.reactions), ("train", survey.train),
                         ("test", survey.test)) if m is not None}
        else:
            matrices = {"reactions": load_reactions(path)}
    except (ValueError, FileNotFoundError) as exc:
        click.echo(f"INVALID: {exc}", err=True)
        sys.exit(1)
    for name, matrix in matrices.items():
        missing = 1.0 - matrix.n_present / (matrix.n_users * matrix.n_questions)
        click.echo(f"{name}: {matrix.n_users} users x {matrix.n_questions} questions, "
                   f"{missing:.1%} missing, values ok")
    click.echo("OK")


@dataset.command("split")
@click.argument("input_csv", type=click.Path(exists=True, path_type=Path))
@click.option("--test-fraction", default=0.15, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out-dir", type=click.Path(path_type=Path), default=None,
              help="Defaults to the input file's directory.")
def split_cmd(input_csv, test_fraction, seed, out_dir):
    """Partition users into train.csv and test.csv."""
    matrix = load_reactions(input_csv)
    cfg = SplitMaskConfig(test_fraction=test_fraction, seed=seed)
    train, test = split(matrix, cfg)
    out_dir = out_dir or input_csv.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    write_reactions(train, out_dir / "train.csv")
    write_reactions(test, out_dir / "test.csv")
    click.echo(f"train: {train.n_users} users, test: {test.n_users} users -> {out_dir}")


@main.command()
@click.option("--model", "model_name", type=click.Choice(["ideal", "pca"]), required=True)
@click.option("--input", "input_csv", type=click.Path(exists=True, path_type=Path),
              required=True)
@click.option("--out", type=click.Path(path_type=Path), required=True)
@click.option("--seed", default=0, show_default=True)
def fit(model_name, input_csv, out, seed):
    """Fit a latent model to a reactions CSV and write it as JSON."""
    matrix = load_reactions(input_csv)
    if model_name == "ideal":
        result = fit_ideal(binarize(matrix), IdealFitConfig(seed=seed))
        model = result.model
        click.echo(f"ideal: {result.n_sweeps} sweeps, "
                   f"objective {result.objective_history[-1]:.2f}")
    else:
        model = fit_pca(matrix)
        click.echo("pca: 2 components plus per-question logistic decoders")
    save_model(model, out)
    click.echo(f"wrote {out}")


def _load_train_test(data_dir: Path, seed: int):
    survey = load_survey_dir(data_dir)
    return survey, *survey.train_test(SplitMaskConfig(seed=seed))


@main.command()
@click.option("--scenario", type=click.Choice(list(harness.SCENARIOS)), required=True)
@click.option("--model", "model_name", type=click.Choice(list(harness.MODEL_NAMES)),
              required=True)
@click.option("--data", "data_dir", type=click.Path(exists=True, path_type=Path),
              required=True)
@click.option("--out", type=click.Path(path_type=Path), required=True)
@click.option("--seed", default=0, show_default=True)
def evaluate(scenario, model_name, data_dir, out, seed):
    """Run one fit/imputation scenario over the sparsity grid."""
    _, train, test = _load_train_test(data_dir, seed)
    report = harness.run_scenario(scenario, model_name, train, test, seed=seed)
    harness.write_scenario_json(report, out)
    click.echo(f"{scenario} {model_name}: average {report.metric} = {report.average:.4f}")


def _simulation_inputs(data_dir: Path, model_path: Path | None, seed: int,
                       grid_resolution: int):
    survey, train, test = _load_train_test(data_dir, seed)
    train_b, test_b = binarize(train), binarize(test)
    if model_path is not None:
        model = load_model(model_path)
    else:
        click.echo("no --model given; fitting the probit model on the train set",
                   err=True)
        model = fit_ideal(train_b, IdealFitConfig(seed=seed)).model
    grid = bel.LatentGrid(grid_resolution)
    return survey, train_b, test_b, model, grid


@main.command()
@click.option("--selector", type=click.Choice(list(SELECTOR_NAMES)), required=True)
@click.option("--data", "data_dir", type=click.Path(exists=True, path_type=Path),
              required=True)
@click.option("--model", "model_path", type=click.Path(exists=True, path_type=Path),
              default=None)
@click.option("--rec-type", type=click.Choice(["t1", "t2", "both"]), default="both",
              show_default=True)
@click.option("--out", type=click.Path(path_type=Path), required=True,
              help="Aggregated curve CSV.")
@click.option("--traces-out", type=click.Path(path_type=Path), default=None,
              help="Optional per-user trace CSV (needed for adaptivity).")
@click.option("--m", default=32, show_default=True)
@click.option("--grid-resolution", default=61, show_default=True)
@click.option("--seed", default=0, show_default=True)
def simulate(selector, data_dir, model_path, rec_type, out, traces_out, m,
             grid_resolution, seed):
    """Simulate individual questionnaires for every test user."""
    survey, train_b, test_b, model, grid = _simulation_inputs(
        data_dir, model_path, seed, grid_resolution)
    result = harness.simulate_questionnaires(
        selector, model, train_b, test_b, seed=seed, grid=grid, m=m,
        rapid_order=survey.rapid_order, default_order=survey.default_order)
    harness.write_curves_csv([result], out, rec_type=rec_type)
    if traces_out:
        harness.write_traces_csv(result, traces_out)
    last = result.curve[-1]
    click.echo(f"{selector}: {len(result.traces)} users, final overlap "
               f"t1={last.mean_t1:.3f} t2={last.mean_t2:.3f} -> {out}")


@main.command()
@click.option("--selector", type=click.Choice(list(SELECTOR_NAMES)), required=True)
@click.option("--data", "data_dir", type=click.Path(exists=True, path_type=Path),
              required=True)
@click.option("--model", "model_path", type=click.Path(exists=True, path_type=Path),
              default=None)
@click.option("--out", type=click.Path(path_type=Path), required=True)
@click.option("--grid-resolution", default=61, show_default=True)
@click.option("--seed", default=0, show_default=True)
def populate(selector, data_dir, model_path, out, grid_resolution, seed):
    """Greedy matrix-population acquisition over all (user, question) pairs."""
    survey, train_b, test_b, model, grid = _simulation_inputs(
        data_dir, model_path, seed, grid_resolution)
    result = harness.simulate_matrix_population(
        selector, model, train_b, test_b, seed=seed, grid=grid,
        rapid_order=survey.rapid_order, default_order=survey.default_order)
    harness.write_population_csv(result, out)
    click.echo(f"{selector}: {result.total_queries} queries -> {out}")


@main.command()
@click.option("--in", "traces_dir", type=click.Path(exists=True, path_type=Path),
              required=True, help="Directory of traces_<selector>.csv files.")
@click.option("--out", type=click.Path(path_type=Path), required=True)
def adaptivity(traces_dir, out):
    """Unique-question counts and rank-correlation scores from recorded traces."""
    orders_by_selector = {}
    question_ids: list[str] = []
    for path in sorted(Path(traces_dir).glob("traces_*.csv")):
        name = path.stem.removeprefix("traces_")
        orders = harness.read_traces_csv(path)
        orders_by_selector[name] = orders
        for order in orders:
            for qid in order:
                if qid not in question_ids:
                    question_ids.append(qid)
    if not orders_by_selector:
        click.echo(f"no traces_*.csv files in {traces_dir}", err=True)
        sys.exit(1)
    report = harness.adaptivity_analysis(orders_by_selector, sorted(question_ids))
    harness.write_adaptivity_json(report, out)
    for name, score in report.adaptivity_scores.items():
        click.echo(f"{name}: adaptivity score (mean user-pair SRC) = {score:.3f}")


@main.command()
@click.option("--out", "out_dir", type=click.Path(path_type=Path), required=True)
@click.option("--train", "n_train", default=500, show_default=True)
@click.option("--test", "n_test", default=100, show_default=True)
@click.option("--questions", "n_questions", default=75, show_default=True)
@click.option("--seed", default=0, show_default=True)
def synth(out_dir, n_train, n_test, n_questions, seed):
    """Generate a synthetic demo survey directory from a known probit model."""
    synthetic.write_survey_dir(out_dir, n_train, n_test, n_questions, seed)
    click.echo(f"wrote synthetic survey ({n_train}+{n_test} users, "
               f"{n_questions} questions) to {out_dir}")


@main.command()
@click.option("--data", "data_dir", type=click.Path(exists=True, path_type=Path))
@click.option("--model", "model_path", type=click.Path(exists=True, path_type=Path))
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path),
              default=None)
@click.option("--host", default=None)
@click.option("--port", type=int, default=None)
@click.option("--frontend", type=click.Path(path_type=Path), default=None)
def serve(data_dir, model_path, config_path, host, port, frontend):
    """Run the HTTP session service (config file + env + flags)."""
    import uvicorn

    from .service import create_app, load_config

    config = load_config(config_path, data_dir=data_dir, model_path=model_path,
                         host=host, port=port, frontend_dir=frontend)
    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port)


if __name__ == "__main__":
    main()
