"""Execution-Cache-Memory performance model for the P2 stencil kernels."""

from .classify import AccessClassification, ArrayClassification, classify_accesses
from .machine import (BandwidthEntry, MachineModel, cycles_per_cacheline, default_machine, load_machine,
                      parse_machine, select_bandwidth)
from .model import (HOMES, EcmPrediction, KernelCoreModel, LcState, Traffic, core_model, dataset_bytes, dataset_home,
                    layer_condition, lc_policy, predict, predict_kernel, theoretical_core_cycles, traffic)
from .replay import replay, replay_counts
from .scaling import predict_scaling, saturation_cores
from .states import LcFixture, reference_states

__all__ = [
    "HOMES", "AccessClassification", "ArrayClassification", "BandwidthEntry", "EcmPrediction", "KernelCoreModel",
    "LcFixture", "LcState", "MachineModel", "Traffic", "classify_accesses", "core_model", "cycles_per_cacheline",
    "dataset_bytes", "dataset_home", "default_machine", "layer_condition", "lc_policy", "load_machine",
    "parse_machine", "predict", "predict_kernel", "predict_scaling", "reference_states", "replay",
    "replay_counts", "saturation_cores", "select_bandwidth", "theoretical_core_cycles", "traffic",
]
