"""Run orchestration: configs, records, pairs, ensembles and figure exports.

A run is fully described by a :class:`RunConfig`; its record echoes the
config so that re-running from the echo reproduces the value bitwise at
equal precision (everything downstream is deterministic, including the
per-realization RNG seeds ``base + r``).  Records are JSON; figure exports
are delimited tables with one row per system size.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .complexity import (
    MultiseedKrylovComplexity,
    OperatorSizePlateau,
    normalize_pair,
)
from .io import write_figure_table, write_json_record, write_matrix_text
from .models import ModelError, ModelSpec
from .precision import Precision
from .presets import build_graded_basis, build_seed_family, model_from_preset

_OPERATOR_FAMILIES = ("single-site-spins", "zero-body", "number-operators")


@dataclass
class RunConfig:
    model: ModelSpec
    seed_family: str
    variant: str = "operator"
    precision_bits: int = 256
    cluster_tol: float | None = None
    oracle_enabled: bool = True
    oracle_samples: int = 4000
    oracle_time_horizon: float | None = None
    ensemble_count: int = 1
    ensemble_base_seed: int = 0
    workers: int = 1
    output_dir: str = "runs"
    pair_tag: str = ""
    label: str = ""
    dump_basis: bool = False

    def __post_init__(self):
        if self.ensemble_count < 1:
            raise ValueError("ensemble count must be >= 1")
        if self.variant == "operator" and self.seed_family not in _OPERATOR_FAMILIES:
            raise ValueError(
                f"operator variant needs one of {_OPERATOR_FAMILIES}, "
                f"got {self.seed_family!r}"
            )
        if self.variant == "state" and self.seed_family != "product-states":
            raise ValueError("state variant needs the product-states seed family")
        if self.variant == "size" and self.seed_family not in ("graded", ""):
            raise ValueError("size variant uses the graded basis; set seed_family: graded")
        if self.variant not in ("operator", "state", "size"):
            raise ValueError(f"unknown variant {self.variant!r}")

    @property
    def resolved_label(self) -> str:
        if self.label:
            return self.label
        size = self.model.size
        size_tag = f"{size[0]}-{size[1]}" if isinstance(size, tuple) else str(size)
        params = "-".join(f"{k}{v}" for k, v in sorted(self.model.params.items()))
        return f"{self.model.family}-{size_tag}-{self.variant}-{self.seed_family}-{params}"

    def echo(self) -> dict:
        d = asdict(self)
        d["model"]["size"] = (
            list(self.model.size) if isinstance(self.model.size, tuple) else self.model.size
        )
        return d

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        raw = dict(raw)
        model_raw = dict(raw.pop("model"))
        if "preset" in model_raw:
            model = model_from_preset(
                model_raw["preset"],
                model_raw["size"],
                model_raw.get("rng_seed"),
                model_raw.get("convention", "pauli"),
            )
        else:
            size = model_raw["size"]
            model = ModelSpec(
                model_raw["family"],
                tuple(size) if isinstance(size, (list, tuple)) else size,
                dict(model_raw.get("params", {})),
                model_raw.get("rng_seed"),
                model_raw.get("convention", "pauli"),
            )
        oracle = raw.pop("oracle", {})
        ensemble = raw.pop("ensemble", {})
        return cls(
            model=model,
            seed_family=raw.pop("seed_family", "graded"),
            oracle_enabled=oracle.get("enabled", True),
            oracle_samples=oracle.get("samples", 4000),
            oracle_time_horizon=oracle.get("time_horizon"),
            ensemble_count=ensemble.get("count", 1),
            ensemble_base_seed=ensemble.get("base_rng_seed", 0),
            **raw,
        )


def _fit_once(config: RunConfig, model: ModelSpec) -> dict:
    h = model.build()
    if config.variant == "size":
        est = OperatorSizePlateau(cluster_tol=config.cluster_tol)
        est.fit(h, build_graded_basis(model))
        oracle = None
        basis = None
    else:
        precision = Precision(config.precision_bits)
        seeds = build_seed_family(config.seed_family, model, precision)
        est = MultiseedKrylovComplexity(
            variant=config.variant,
            precision_bits=config.precision_bits,
            cluster_tol=config.cluster_tol,
        ).fit(h, seeds)
        basis = est.basis_
        oracle = (
            est.time_average(config.oracle_time_horizon, config.oracle_samples)
            if config.oracle_enabled
            else None
        )
    res = est.result_
    out = {
        "value": res.value,
        "n_levels": res.n_levels,
        "normalized": res.normalized,
        "per_seed": [float(x) for x in res.per_seed],
        "diagnostics": res.diagnostics,
        "rng_seed": model.rng_seed,
    }
    if oracle is not None:
        gap = abs(res.value - oracle) / res.value if res.value else abs(oracle)
        out["oracle"] = {"value": oracle, "relative_gap": gap}
    return out, basis


def _realization(args) -> dict:
    config_echo, r = args
    config = RunConfig.from_dict(config_echo)
    model = config.model.with_rng_seed(config.ensemble_base_seed + r)
    out, _ = _fit_once(config, model)
    return out


def run(config: RunConfig, write: bool = True) -> dict:
    """Execute one configuration (possibly an ensemble); return its record."""
    t0 = time.perf_counter()
    record = {
        "schema": "multikrylov-run-v1",
        "software_version": __version__,
        "config": config.echo(),
        "label": config.resolved_label,
    }
    if config.ensemble_count == 1:
        result, basis = _fit_once(config, config.model)
        record["result"] = result
        if config.dump_basis and basis is not None:
            _dump_basis(config, basis)
    else:
        jobs = [(config.echo(), r) for r in range(config.ensemble_count)]
        if config.workers > 1:
            with ProcessPoolExecutor(max_workers=config.workers) as pool:
                results = list(pool.map(_realization, jobs))
        else:
            results = [_realization(j) for j in jobs]
        values = np.array([r["value"] for r in results])
        record["realizations"] = results
        record["result"] = {
            "value": float(values.mean()),
            "sem": float(values.std(ddof=1) / np.sqrt(len(values)))
            if len(values) > 1
            else 0.0,
            "n_levels": int(max(r["n_levels"] for r in results)),
            "normalized": None,  # meaningful only relative to a pair denominator
        }
    record["timing_seconds"] = time.perf_counter() - t0
    if write:
        out = Path(config.output_dir) / f"{config.resolved_label}.json"
        write_json_record(out, record)
        record["path"] = str(out)
    return record


def _dump_basis(config: RunConfig, basis):
    stem = Path(config.output_dir) / f"{config.resolved_label}-basis"
    write_matrix_text(
        stem.with_suffix(".txt"), basis.all_vectors(), config.precision_bits
    )
    meta = {
        "p": list(basis.p),
        "n_levels": basis.n_levels,
        "a_blocks": [np.asarray(b).tolist() for b in map(_complex_list, basis.a_blocks)],
        "b_blocks": [np.asarray(b).tolist() for b in map(_complex_list, basis.b_blocks)],
        "drift_log": [
            {"step": r.step, "estimate": r.estimate, "reorthogonalized": r.reorthogonalized}
            for r in basis.drift_log
        ],
    }
    write_json_record(stem.with_suffix(".json"), meta)


def _complex_list(block: np.ndarray):
    return np.stack([block.real, block.imag], axis=-1)


def run_pair(config_int: RunConfig, config_cha: RunConfig, write: bool = True) -> dict:
    """Run an integrable/chaotic pair and normalize with a shared denominator."""
    if config_int.model.family != config_cha.model.family:
        raise ValueError("pair runs need the same model family on both sides")
    if config_int.model.size != config_cha.model.size:
        raise ValueError("pair runs need matching sizes")
    rec_int = run(config_int, write=False)
    rec_cha = run(config_cha, write=False)
    m_int = rec_int["result"]["n_levels"]
    m_cha = rec_cha["result"]["n_levels"]
    norm_int, norm_cha = normalize_pair(
        rec_int["result"]["value"], m_int, rec_cha["result"]["value"], m_cha
    )
    denom = max(m_int, m_cha) - 1
    sem = rec_cha["result"].get("sem", 0.0) or 0.0
    pair = {
        "schema": "multikrylov-pair-v1",
        "software_version": __version__,
        "pair_tag": config_int.pair_tag or config_cha.pair_tag,
        "family": config_int.model.family,
        "size": config_int.echo()["model"]["size"],
        "variant": config_int.variant,
        "seed_family": config_int.seed_family,
        "integrable": rec_int,
        "chaotic": rec_cha,
        "normalized": {
            "integrable": norm_int,
            "chaotic_mean": norm_cha,
            "chaotic_sem": sem / denom if denom > 0 else 0.0,
            "denominator_levels": denom + 1,
        },
        "ordering_integrable_below_chaotic": norm_int < norm_cha,
        "metadata": {"integrable_bar": "white", "chaotic_bar": "black"},
    }
    if write:
        tag = pair["pair_tag"] or f"{pair['family']}-{pair['size']}-{pair['variant']}"
        out = Path(config_int.output_dir) / f"pair-{tag}.json"
        write_json_record(out, pair)
        pair["path"] = str(out)
    return pair


FIGURES = {
    "fig1-left": {"family": "ising", "variant": "operator", "seed_family": "single-site-spins"},
    "fig1-right": {"family": "xyz", "variant": "operator", "seed_family": "single-site-spins"},
    "fig2-left": {"family": "qrs", "variant": "operator", "seed_family": "zero-body"},
    "fig2-right": {"family": "qrs", "variant": "operator", "seed_family": "number-operators"},
    "fig3-left": {"family": "ising", "variant": "state", "seed_family": "product-states"},
    "fig3-right": {"family": "xyz", "variant": "state", "seed_family": "product-states"},
    "fig4-left": {"family": "xyz", "variant": "size", "seed_family": None},
    "fig4-right": {"family": "qrs", "variant": "size", "seed_family": None},
}


def _size_key(size) -> int:
    return size[0] if isinstance(size, (list, tuple)) else int(size)


def export_figure_data(pair_records: list, figure_id: str, path: Path) -> list:
    """Write the bar-plot table for one figure from pair records."""
    if figure_id not in FIGURES:
        raise ValueError(f"unknown figure {figure_id!r}; known: {sorted(FIGURES)}")
    crit = FIGURES[figure_id]
    rows = []
    for rec in pair_records:
        if rec.get("schema") != "multikrylov-pair-v1":
            continue
        if rec["family"] != crit["family"] or rec["variant"] != crit["variant"]:
            continue
        if crit["seed_family"] is not None and rec["seed_family"] != crit["seed_family"]:
            continue
        rows.append(
            {
                "size": _size_key(rec["size"]),
                "integrable": rec["normalized"]["integrable"],
                "chaotic_mean": rec["normalized"]["chaotic_mean"],
                "chaotic_sem": rec["normalized"]["chaotic_sem"],
            }
        )
    if not rows:
        raise ValueError(f"no pair records match figure {figure_id}")
    rows.sort(key=lambda r: r["size"])
    write_figure_table(path, rows, figure_id)
    return rows
