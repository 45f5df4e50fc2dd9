"""Exact maximum-likelihood recovery of the unknown gains.

On a tree wiring the 2(m-1) directed measurements exactly determine the
2(m-1) unknown gains once the reference antenna's gains and the line gain
are known. Walking outward from the reference and dividing each
measurement by the already-known upstream factors drives every residual
to zero, and a zero-residual point of a Gaussian likelihood is its
maximum.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .crlb import ScenarioParams
from .errors import DivisionHazard
from .simulate import MeasurementSet, RfGains
from .topology import Topology


@dataclass(frozen=True, eq=False)
class GainEstimates:
    """Recovered gains for every ordinary antenna, ascending index order."""

    antennas: tuple[int, ...]
    alpha_hat: np.ndarray
    beta_hat: np.ndarray
    reference: int
    reference_alpha: complex
    reference_beta: complex


@dataclass(frozen=True, eq=False)
class EstimationError:
    """Squared gain errors per ordinary antenna plus their averages."""

    antennas: tuple[int, ...]
    alpha_sq_error: np.ndarray
    beta_sq_error: np.ndarray
    average_alpha: float
    average_beta: float


def collapse_repetitions(ms: MeasurementSet) -> MeasurementSet:
    """Average repeated rounds into a single round per direction.

    The per-direction sample mean carries everything the repetitions say
    about the gains (i.i.d. noise around a common mean), with the noise
    variance shrunk by the repetition count. A single-round set is
    returned unchanged.
    """
    if ms.repetitions == 1:
        return ms
    return MeasurementSet(ms.pairs, ms.values.mean(axis=1, keepdims=True),
                          1, ms.sounding_value)


def ml_estimate(ms: MeasurementSet, t: Topology, s: ScenarioParams,
                ref_alpha: complex, ref_beta: complex,
                hazard_floor: float = 1e-9) -> GainEstimates:
    """Recover all unknown gains from a collapsed measurement set.

    For each line from a known parent p to a child q, the receive gain of
    q comes from the measurement received at q over h * alpha_p, and the
    transmit gain of q from the measurement received at p over beta_p * h.
    Traversal is breadth-first from the reference with children in
    ascending order; the result does not depend on the order, but a fixed
    order keeps failures reproducible.

    Raises DivisionHazard when a divisor estimate falls below
    `hazard_floor` times its nominal amplitude: everything downstream
    would be noise amplification, which signals an SNR too low for the
    chain.
    """
    if ms.repetitions != 1:
        raise ValueError("collapse repetitions before estimating")
    if ref_alpha == 0 or ref_beta == 0:
        raise ValueError("reference gains must be nonzero")
    h = complex(s.line_gain)
    floor_a = hazard_floor * s.tx_amplitude
    floor_b = hazard_floor * s.rx_amplitude
    alpha = np.zeros(t.m + 1, dtype=complex)
    beta = np.zeros(t.m + 1, dtype=complex)
    alpha[t.reference] = ref_alpha
    beta[t.reference] = ref_beta
    values = ms.values[:, 0]
    for parent, child, row_out, row_back in _propagation_plan(t, ms.pairs):
        up_alpha = alpha[parent]
        up_beta = beta[parent]
        if abs(up_alpha) < floor_a or abs(up_beta) < floor_b:
            raise DivisionHazard(
                f"estimate at antenna {parent} fell below {hazard_floor:g} "
                "of its nominal amplitude")
        beta[child] = values[row_out] / (h * up_alpha)
        alpha[child] = values[row_back] / (up_beta * h)
    picks = np.fromiter(t.ordinary, dtype=int)
    return GainEstimates(t.ordinary, alpha[picks], beta[picks],
                         t.reference, complex(ref_alpha), complex(ref_beta))


@lru_cache(maxsize=256)
def _propagation_plan(t: Topology, pairs: tuple[tuple[int, int], ...]):
    # Row indices for both directions of every rooted edge, resolved once
    # per (topology, pair layout).
    index = {pair: i for i, pair in enumerate(pairs)}
    plan = []
    for parent, child in t.rooted_edges:
        try:
            plan.append((parent, child,
                         index[(parent, child)], index[(child, parent)]))
        except KeyError:
            raise ValueError(
                f"measurement set lacks the line {parent}-{child}") from None
    return tuple(plan)


def estimation_error(est: GainEstimates, truth: RfGains) -> EstimationError:
    """Squared error of each recovered gain against the ground truth."""
    idx = np.fromiter(est.antennas, dtype=int) - 1
    alpha_sq = np.abs(est.alpha_hat - truth.alpha[idx]) ** 2
    beta_sq = np.abs(est.beta_hat - truth.beta[idx]) ** 2
    return EstimationError(est.antennas, alpha_sq, beta_sq,
                           float(alpha_sq.mean()), float(beta_sq.mean()))


def estimates_to_dict(est: GainEstimates) -> dict:
    """JSON-ready view, complex values as [real, imag] pairs."""
    return {
        "antennas": list(est.antennas),
        "alpha_hat": [[float(v.real), float(v.imag)] for v in est.alpha_hat],
        "beta_hat": [[float(v.real), float(v.imag)] for v in est.beta_hat],
        "reference": est.reference,
        "reference_alpha": [est.reference_alpha.real, est.reference_alpha.imag],
        "reference_beta": [est.reference_beta.real, est.reference_beta.imag],
    }
