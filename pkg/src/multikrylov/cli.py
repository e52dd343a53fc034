"""Command line interface: run, pair, ensemble, export, presets, verify."""

from __future__ import annotations

import sys
from pathlib import Path

import click
import yaml

from . import __version__
from .io import read_json_record, write_json_record
from .presets import DESK_SIZES, LONG_SIZES, PRESETS, QRS_REALIZATIONS, SEED_FAMILIES
from .runner import FIGURES, RunConfig, export_figure_data, run, run_pair
from .verify import run_battery


def _load_yaml(path: str) -> dict:
    with open(path) as fh:
        return yaml.safe_load(fh)


def _apply_overrides(raw: dict, precision_bits, output_dir, rng_seed, workers) -> dict:
    if precision_bits is not None:
        raw["precision_bits"] = precision_bits
    if output_dir is not None:
        raw["output_dir"] = output_dir
    if workers is not None:
        raw["workers"] = workers
    if rng_seed is not None:
        raw.setdefault("model", {})["rng_seed"] = rng_seed
    return raw


def _fail(output_dir: str, label: str, exc: Exception):
    record = {"schema": "multikrylov-error-v1", "label": label, "error": str(exc)}
    try:
        write_json_record(Path(output_dir) / f"{label}-error.json", record)
    except OSError:
        pass
    click.echo(f"error: {exc}", err=True)
    sys.exit(1)


_shared_options = [
    click.option("--precision-bits", type=int, default=None, help="Override working precision."),
    click.option("--output-dir", type=click.Path(), default=None, help="Override record directory."),
    click.option("--rng-seed", type=int, default=None, help="Override the model RNG seed."),
    click.option("--workers", type=int, default=None, help="Parallel ensemble workers."),
]


def _with_shared(fn):
    for opt in reversed(_shared_options):
        fn = opt(fn)
    return fn


@click.group()
@click.version_option(__version__)
def main():
    """Multiseed Krylov complexity runs for integrable/chaotic comparisons."""


@main.command("run")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@_with_shared
def run_cmd(config_path, precision_bits, output_dir, rng_seed, workers):
    """Execute one configuration file and write its record."""
    raw = _apply_overrides(_load_yaml(config_path), precision_bits, output_dir, rng_seed, workers)
    label = raw.get("label", Path(config_path).stem)
    try:
        config = RunConfig.from_dict(raw)
        record = run(config)
    except (ValueError, KeyError) as exc:
        _fail(raw.get("output_dir", "runs"), label, exc)
    click.echo(f"{record['label']}: value={record['result']['value']:.6f} "
               f"n_levels={record['result']['n_levels']} -> {record.get('path', '-')}")


@main.command("pair")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@_with_shared
def pair_cmd(config_path, precision_bits, output_dir, rng_seed, workers):
    """Run an integrable/chaotic pair with shared normalization.

    The config carries common settings at top level plus `integrable:` and
    `chaotic:` model sections (ensemble settings apply to the chaotic side).
    """
    raw = _apply_overrides(_load_yaml(config_path), precision_bits, output_dir, rng_seed, workers)
    label = raw.get("pair_tag", Path(config_path).stem)
    try:
        sides = {}
        for side in ("integrable", "chaotic"):
            if side not in raw:
                raise ValueError(f"pair config needs an {side!r} model section")
        common = {k: v for k, v in raw.items() if k not in ("integrable", "chaotic", "ensemble")}
        ens = raw.get("ensemble", {})
        for side in ("integrable", "chaotic"):
            d = dict(common)
            d["model"] = raw[side]
            if side == "chaotic":
                d["ensemble"] = ens
            sides[side] = RunConfig.from_dict(d)
        pair = run_pair(sides["integrable"], sides["chaotic"])
    except (ValueError, KeyError) as exc:
        _fail(raw.get("output_dir", "runs"), label, exc)
    n = pair["normalized"]
    click.echo(
        f"pair {pair['pair_tag'] or label}: integrable={n['integrable']:.4f} "
        f"chaotic={n['chaotic_mean']:.4f}+-{n['chaotic_sem']:.4f} "
        f"ordering={'ok' if pair['ordering_integrable_below_chaotic'] else 'VIOLATED'}"
    )


@main.command("ensemble")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--count", type=int, default=None, help="Override realization count.")
@click.option("--long-run", is_flag=True, help="Allow the large published sizes.")
@_with_shared
def ensemble_cmd(config_path, count, long_run, precision_bits, output_dir, rng_seed, workers):
    """Run a chaotic ensemble (mean and standard error over realizations)."""
    raw = _apply_overrides(_load_yaml(config_path), precision_bits, output_dir, rng_seed, workers)
    raw.setdefault("ensemble", {})
    if count is not None:
        raw["ensemble"]["count"] = count
    label = raw.get("label", Path(config_path).stem)
    try:
        config = RunConfig.from_dict(raw)
        size = config.model.size
        size_n = size[0] if isinstance(size, tuple) else size
        if not long_run and size_n in LONG_SIZES.get(config.model.family, ()):
            raise ValueError(
                f"size {size_n} is a long run (hours at high precision); pass --long-run"
            )
        record = run(config)
    except (ValueError, KeyError) as exc:
        _fail(raw.get("output_dir", "runs"), label, exc)
    res = record["result"]
    click.echo(
        f"{record['label']}: mean={res['value']:.6f} sem={res.get('sem', 0.0):.6f} "
        f"n={config.ensemble_count}"
    )


@main.command("export")
@click.option("--figure", "figure_id", required=True, type=click.Choice(sorted(FIGURES)))
@click.option("--records", "records_dir", required=True, type=click.Path(exists=True))
@click.option("--output", "output_path", required=True, type=click.Path())
def export_cmd(figure_id, records_dir, output_path):
    """Collect pair records into a bar-plot table for one figure."""
    records = []
    for path in sorted(Path(records_dir).glob("*.json")):
        try:
            records.append(read_json_record(path))
        except ValueError:
            continue
    try:
        rows = export_figure_data(records, figure_id, Path(output_path))
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    click.echo(f"wrote {len(rows)} rows to {output_path}")


@main.command("presets")
def presets_cmd():
    """List model presets, seed families, figures and size conventions."""
    click.echo("model presets:")
    for name, (family, params) in sorted(PRESETS.items()):
        click.echo(f"  {name:24s} {family:6s} {params}")
    click.echo(f"seed families: {', '.join(SEED_FAMILIES)} (size variant: graded)")
    click.echo(f"figures: {', '.join(sorted(FIGURES))}")
    click.echo(f"desk sizes: {DESK_SIZES}")
    click.echo(f"long-run sizes: {LONG_SIZES} (qrs realizations {QRS_REALIZATIONS})")


@main.command("verify")
@click.option("--precision-bits", type=int, default=256)
def verify_cmd(precision_bits):
    """Run the built-in oracle and property battery."""
    ok = run_battery(precision_bits)
    sys.exit(0 if ok else 1)


if __name__ == "__main__":
    main()
