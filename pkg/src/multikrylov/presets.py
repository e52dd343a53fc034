"""Named model presets and seed-family construction by name.

Every parameter point used in the benchmark figures is available as a preset.
The XYZ integrable chain appears twice on purpose: the two advertised
parameter sets (J_z = -0.1 vs J_z = -1) disagree between sources, so both are
kept as first-class presets rather than silently picking one; the chaotic
counterpart exists for each.
"""

from __future__ import annotations

from .models import FockBlock, ModelError, ModelSpec, enumerate_fock
from .precision import Precision
from .seeds import (
    GradedBasis,
    SeedFamily,
    graded_fock_basis,
    graded_pauli_basis,
    seeds_number_operators,
    seeds_product_states,
    seeds_single_site_spins,
    seeds_zero_body,
)

PRESETS: dict = {
    "ising-integrable": ("ising", {"h_x": -1.05, "h_z": 0.0}),
    "ising-chaotic": ("ising", {"h_x": -1.05, "h_z": 0.5}),
    "xyz-integrable-text": ("xyz", {"J_x": -0.35, "J_y": 0.5, "J_z": -0.1, "h_z": 0.0}),
    "xyz-integrable-caption": ("xyz", {"J_x": -0.35, "J_y": 0.5, "J_z": -1.0, "h_z": 0.0}),
    "xyz-chaotic": ("xyz", {"J_x": -0.35, "J_y": 0.5, "J_z": -1.0, "h_z": 0.8}),
    "xyz-chaotic-text": ("xyz", {"J_x": -0.35, "J_y": 0.5, "J_z": -0.1, "h_z": 0.8}),
    "qrs-integrable": ("qrs", {"coupling": "integrable"}),
    "qrs-chaotic": ("qrs", {"coupling": "chaotic"}),
}

# Desk-scale sizes run in minutes; the larger ones hide behind --long-run.
DESK_SIZES = {"ising": (4, 5), "xyz": (4, 5), "qrs": (6, 7)}
LONG_SIZES = {"ising": (6,), "xyz": (6,), "qrs": (9, 10, 11)}
QRS_REALIZATIONS = {6: 20, 7: 20, 9: 80, 10: 40, 11: 20}

SEED_FAMILIES = ("single-site-spins", "zero-body", "number-operators", "product-states")


def model_from_preset(
    name: str, size, rng_seed: int | None = None, convention: str = "pauli"
) -> ModelSpec:
    if name not in PRESETS:
        raise ModelError(f"unknown preset {name!r}; known: {sorted(PRESETS)}")
    family, params = PRESETS[name]
    if family == "qrs":
        size = tuple(size) if not isinstance(size, int) else (size, size)
    return ModelSpec(family, size, dict(params), rng_seed, convention)


def build_seed_family(
    name: str, model: ModelSpec, precision: Precision
) -> SeedFamily:
    """Construct the named seed family for a model's space."""
    if name == "single-site-spins":
        if model.family not in ("ising", "xyz"):
            raise ModelError("single-site spin seeds need a chain model")
        return seeds_single_site_spins(int(model.size), model.convention, precision)
    if name == "product-states":
        if model.family not in ("ising", "xyz"):
            raise ModelError("product-state seeds need a chain model")
        return seeds_product_states(int(model.size), precision)
    if name in ("zero-body", "number-operators"):
        if model.family != "qrs":
            raise ModelError(f"{name} seeds need a qrs model")
        n, m = model.size
        block = enumerate_fock(n, m)
        builder = seeds_zero_body if name == "zero-body" else seeds_number_operators
        return builder(block, precision)
    raise ModelError(f"unknown seed family {name!r}; known: {SEED_FAMILIES}")


def build_graded_basis(model: ModelSpec) -> GradedBasis:
    """The graded operator basis matching a model family (size diagnostic)."""
    if model.family in ("ising", "xyz"):
        return graded_pauli_basis(int(model.size))
    n, m = model.size
    return graded_fock_basis(enumerate_fock(n, m))
