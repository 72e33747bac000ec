"""Placement engine for analog/mixed-signal IC layouts."""

from .decoder import DecodeError, chromosome_length, decode, report
from .evaluator import CriterionReport, criterion, hpwl
from .fileio import DataError, parse_gsrc, parse_instance, parse_placement, render_svg
from .fileio import write_instance, write_placement
from .model import (
    Blockage,
    CostWeights,
    DistanceSpec,
    Instance,
    InterfaceEntry,
    Net,
    Placement,
    ProximityPair,
    Rect,
    SymmetryGroup,
    Variant,
    bounding_box,
    check_feasible,
    enumerate_variants,
    validate_instance,
)
from .refine import RefineBudgets, lp_refine, refine_pipeline
from .search import CMAConfig, GAConfig, SearchResult, run_cmaes, run_ga
from .syngen import GenParams, compose_copies, generate

__version__ = "0.1.0"

__all__ = [
    "Blockage", "CMAConfig", "CostWeights", "CriterionReport", "DataError", "DecodeError",
    "DistanceSpec", "GAConfig", "GenParams", "Instance", "InterfaceEntry", "Net", "Placement",
    "ProximityPair", "Rect", "RefineBudgets", "SearchResult", "SymmetryGroup", "Variant",
    "bounding_box", "check_feasible", "chromosome_length", "compose_copies", "criterion",
    "decode", "enumerate_variants", "generate", "hpwl", "lp_refine", "parse_gsrc",
    "parse_instance", "parse_placement", "refine_pipeline", "render_svg", "report", "run_cmaes",
    "run_ga", "validate_instance", "write_instance", "write_placement",
]
