"""Context-aware dynamical decoupling for scheduled quantum circuits."""
from .estimators import GraphDD, NoDD, StandardDD
from .graph import DDGraph, TraversalPlan, bfs_traversal, build_graph, connected_components
from .oracle import (
    NoiseDraw,
    ResidualLedger,
    compute_residuals,
    draw_many,
    draw_noise,
    selectivity,
    simulate_dense,
    success_proxy,
)
from .pipeline import EmbedConfig, EmbedStats, QuantizationError, embed, graphdd_embed, quantize, standard_dd_embed
from .schedule import (
    DD_GATE_NAME,
    DeviceModel,
    IdleWindow,
    Instruction,
    ScheduledCircuit,
    ScheduleError,
    extract_idles,
    insert_gates,
    parse_circuit,
    parse_device,
    serialize_circuit,
    serialize_device,
)
from .solver import SignFunction, closed_form_subinterval, delta_of_offset, sign_product_integral, solve_offset
from .splitter import ContextChangeSet, split_fvs_node, split_long_idles
from .validation import check_circuit, check_device

__all__ = [
    "ContextChangeSet",
    "DDGraph",
    "DD_GATE_NAME",
    "DeviceModel",
    "EmbedConfig",
    "EmbedStats",
    "GraphDD",
    "IdleWindow",
    "Instruction",
    "NoDD",
    "NoiseDraw",
    "QuantizationError",
    "ResidualLedger",
    "ScheduleError",
    "ScheduledCircuit",
    "SignFunction",
    "StandardDD",
    "TraversalPlan",
    "bfs_traversal",
    "build_graph",
    "check_circuit",
    "check_device",
    "closed_form_subinterval",
    "compute_residuals",
    "connected_components",
    "delta_of_offset",
    "draw_many",
    "draw_noise",
    "embed",
    "extract_idles",
    "graphdd_embed",
    "insert_gates",
    "parse_circuit",
    "parse_device",
    "quantize",
    "selectivity",
    "serialize_circuit",
    "serialize_device",
    "sign_product_integral",
    "simulate_dense",
    "solve_offset",
    "split_fvs_node",
    "split_long_idles",
    "standard_dd_embed",
    "success_proxy",
]

__version__ = "0.1.0"
