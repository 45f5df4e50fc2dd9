"""Ground-truth gain profiles and noisy sounding-measurement synthesis."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .crlb import ScenarioParams
from .topology import Topology


@dataclass(frozen=True, eq=False)
class RfGains:
    """Complex transmit (alpha) and receive (beta) front-end gains.

    Index k-1 holds antenna k. Amplitudes follow the scenario's nominal
    values; phases are arbitrary.
    """

    alpha: np.ndarray
    beta: np.ndarray

    @property
    def m(self) -> int:
        return len(self.alpha)


def draw_gains(m: int, s: ScenarioParams, seed) -> RfGains:
    """Random gains with fixed amplitudes and phases uniform on [-pi, pi).

    Deterministic for a given seed (int or numpy SeedSequence).
    """
    if m < 2:
        raise ValueError(f"need at least 2 antennas, got m={m}")
    rng = np.random.default_rng(seed)
    phases = rng.uniform(-np.pi, np.pi, size=(2, m))
    return RfGains(alpha=s.tx_amplitude * np.exp(1j * phases[0]),
                   beta=s.rx_amplitude * np.exp(1j * phases[1]))


@dataclass(frozen=True, eq=False)
class MeasurementSet:
    """Directed sounding measurements, one column per repetition.

    `pairs` lists (transmitter, receiver) in lexicographic order and
    covers both directions of every line; `values[i, r]` is the r-th
    repetition of pair i. The sounding signal is the constant 1.
    """

    pairs: tuple[tuple[int, int], ...]
    values: np.ndarray
    repetitions: int
    sounding_value: complex = 1.0 + 0.0j

    @cached_property
    def index(self) -> dict[tuple[int, int], int]:
        """Row lookup by (transmitter, receiver)."""
        return _pair_index(self.pairs)

    def observation(self, tx: int, rx: int, repetition: int = 1) -> complex:
        try:
            row = self.index[(tx, rx)]
        except KeyError:
            raise ValueError(f"no line carries a measurement {tx}->{rx}") from None
        if not 1 <= repetition <= self.repetitions:
            raise ValueError(
                f"repetition {repetition} outside 1..{self.repetitions}")
        return complex(self.values[row, repetition - 1])


@lru_cache(maxsize=256)
def _pair_index(pairs: tuple[tuple[int, int], ...]) -> dict[tuple[int, int], int]:
    return {pair: i for i, pair in enumerate(pairs)}


@lru_cache(maxsize=256)
def _pair_arrays(pairs: tuple[tuple[int, int], ...]) -> tuple[np.ndarray, np.ndarray]:
    tx = np.array([p - 1 for p, _ in pairs])
    rx = np.array([q - 1 for _, q in pairs])
    return tx, rx


def synthesize(t: Topology, gains: RfGains, s: ScenarioParams,
               repetitions: int = 1, seed=None) -> MeasurementSet:
    """Sound both directions of every line, `repetitions` times each.

    Every observation is rx-gain * line-gain * tx-gain plus circularly
    symmetric complex Gaussian noise of the scenario's variance (real and
    imaginary parts independent with half the variance each), independent
    across directions and repetitions. Zero noise variance yields the
    exact noiseless values.

    The full observation table is a pure function of (topology, gains,
    scenario, repetitions, seed): values are drawn in one pass over the
    canonical pair order, so results do not depend on how the set is
    later consumed.
    """
    if repetitions < 1:
        raise ValueError(f"repetitions must be >= 1, got {repetitions}")
    if gains.m != t.m:
        raise ValueError(f"gain vectors cover {gains.m} antennas, wiring has {t.m}")
    pairs = t.directed_pairs
    tx, rx = _pair_arrays(pairs)
    # unit sounding signal, so the noiseless value is just the gain product
    noiseless = gains.beta[rx] * s.line_gain * gains.alpha[tx]
    if s.noise_variance > 0:
        rng = np.random.default_rng(seed)
        parts = rng.standard_normal((len(pairs), repetitions, 2))
        noise = math.sqrt(s.noise_variance / 2) * (parts[..., 0] + 1j * parts[..., 1])
        values = noiseless[:, None] + noise
    else:
        values = np.repeat(noiseless[:, None], repetitions, axis=1)
    return MeasurementSet(pairs, values, repetitions)


def measurements_to_dict(ms: MeasurementSet) -> dict:
    """JSON-ready observation table for replay.

    Rows are [tx, rx, repetition, real, imag] in canonical order.
    """
    observations = []
    for i, (tx, rx) in enumerate(ms.pairs):
        for r in range(ms.repetitions):
            v = ms.values[i, r]
            observations.append([tx, rx, r + 1, float(v.real), float(v.imag)])
    return {"repetitions": ms.repetitions,
            "sounding_value": [float(ms.sounding_value.real),
                               float(ms.sounding_value.imag)],
            "observations": observations}


def measurements_from_dict(data: dict) -> MeasurementSet:
    """Inverse of `measurements_to_dict`; the (pair, repetition) grid must
    be complete."""
    repetitions = int(data["repetitions"])
    sounding = complex(data["sounding_value"][0], data["sounding_value"][1])
    table: dict[tuple[int, int, int], complex] = {}
    for tx, rx, r, re_, im_ in data["observations"]:
        table[(int(tx), int(rx), int(r))] = complex(re_, im_)
    pairs = tuple(sorted({(tx, rx) for tx, rx, _ in table}))
    pair_set = set(pairs)
    for tx, rx in pairs:
        if (rx, tx) not in pair_set:
            raise ValueError(f"direction {rx}->{tx} missing for line {tx}-{rx}")
    if len(table) != len(pairs) * repetitions:
        raise ValueError("observations do not form a full (pair, repetition) grid")
    values = np.empty((len(pairs), repetitions), dtype=complex)
    for i, (tx, rx) in enumerate(pairs):
        for r in range(1, repetitions + 1):
            try:
                values[i, r - 1] = table[(tx, rx, r)]
            except KeyError:
                raise ValueError(
                    f"missing observation {tx}->{rx} repetition {r}") from None
    return MeasurementSet(pairs, values, repetitions, sounding)
