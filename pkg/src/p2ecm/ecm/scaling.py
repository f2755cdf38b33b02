"""Multicore throughput from a single-core ECM prediction."""

from __future__ import annotations

import math

from .machine import MachineModel
from .model import EcmPrediction


def saturation_cores(prediction: EcmPrediction):
    """Cores per socket at which memory bandwidth saturates; None if no memory traffic."""
    if prediction.t_l3mem <= 0 or prediction.state.dataset_home != "MEM":
        return None
    return math.ceil(prediction.predicted_cycles / prediction.t_l3mem)


def predict_scaling(prediction: EcmPrediction, machine: MachineModel, cores: int) -> list[float]:
    """Aggregate GFLOP/s for 1..cores processes, filling one socket first.

    Core-private data scales linearly. Memory-bound kernels grow linearly up
    to the saturation point of each socket and stay flat beyond it; every
    socket is an independent saturation domain.
    """
    if cores < 1:
        raise ValueError("cores must be >= 1")
    if cores > machine.sockets * machine.cores_per_socket:
        raise ValueError(f"{cores} cores exceed {machine.sockets} x {machine.cores_per_socket}")
    single = prediction.predicted_gflops
    n_sat = saturation_cores(prediction)
    curve = []
    for p in range(1, cores + 1):
        if n_sat is None:
            curve.append(single * p)
            continue
        active, left = 0, p
        for _ in range(machine.sockets):
            on_socket = min(left, machine.cores_per_socket)
            active += min(on_socket, n_sat)
            left -= on_socket
        curve.append(single * active)
    return curve
