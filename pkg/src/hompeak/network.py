"""Symmetric beam-splitter mode algebra.

Every splitter is 50:50 with transmitted amplitude 1 and reflected amplitude
``i``: inputs ``(x, y)`` map to ``((x + i y)/sqrt2, (i x + y)/sqrt2)``.
Networks are built from source modes and an ordered list of splitters; the
transfer matrix expresses each output field operator in terms of the sources.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "Splitter",
    "ModeNetwork",
    "TransferMatrix",
    "NetworkError",
    "SPLITTER",
    "standard_hom",
    "modified_hom",
    "hbt_network",
    "transfer",
]

SQRT1_2 = 1.0 / np.sqrt(2.0)
SPLITTER = SQRT1_2 * np.array([[1.0, 1.0j], [1.0j, 1.0]])


class NetworkError(ValueError):
    pass


@dataclass(frozen=True)
class Splitter:
    inputs: tuple[str, str]
    outputs: tuple[str, str]


@dataclass(frozen=True)
class ModeNetwork:
    sources: tuple[str, ...]
    splitters: tuple[Splitter, ...] = ()

    def __post_init__(self):
        if len(set(self.sources)) != len(self.sources):
            raise NetworkError(f"duplicate source modes in {self.sources}")
        seen = set(self.sources)
        live = set(self.sources)
        for sp in self.splitters:
            for m in sp.inputs:
                if m not in live:
                    raise NetworkError(f"splitter input {m!r} is neither a source nor a free splitter output")
            if sp.inputs[0] == sp.inputs[1]:
                raise NetworkError(f"splitter inputs must differ, got {sp.inputs}")
            for m in sp.outputs:
                if m in seen:
                    raise NetworkError(f"mode label {m!r} is already in use")
            if sp.outputs[0] == sp.outputs[1]:
                raise NetworkError(f"splitter outputs must differ, got {sp.outputs}")
            live.difference_update(sp.inputs)
            live.update(sp.outputs)
            seen.update(sp.outputs)

    @property
    def modes(self) -> tuple[str, ...]:
        labels = list(self.sources)
        for sp in self.splitters:
            labels.extend(sp.outputs)
        return tuple(labels)

    @property
    def terminal_modes(self) -> tuple[str, ...]:
        consumed = {m for sp in self.splitters for m in sp.inputs}
        return tuple(m for m in self.modes if m not in consumed)

    def then(self, inputs: tuple[str, str], outputs: tuple[str, str], new_sources: Sequence[str] = ()) -> "ModeNetwork":
        """Append a splitter, optionally introducing fresh (vacuum) sources."""
        return ModeNetwork(self.sources + tuple(new_sources), self.splitters + (Splitter(tuple(inputs), tuple(outputs)),))


@dataclass(frozen=True)
class TransferMatrix:
    rows: tuple[str, ...]
    cols: tuple[str, ...]
    entries: np.ndarray = field(repr=False)

    def __getitem__(self, key: tuple[str, str]) -> complex:
        out, inp = key
        try:
            return complex(self.entries[self.rows.index(out), self.cols.index(inp)])
        except ValueError:
            raise KeyError(f"no coefficient {inp!r} -> {out!r}; rows={self.rows}, cols={self.cols}") from None

    def row(self, out: str) -> np.ndarray:
        return self.entries[self.rows.index(out)]

    def unitarity_error(self) -> float:
        m = self.entries
        if m.shape[0] != m.shape[1]:
            raise NetworkError(f"unitarity needs a square matrix, got {m.shape}")
        return float(np.max(np.abs(m @ m.conj().T - np.eye(m.shape[0]))))

    def is_unitary(self, atol: float = 1e-12) -> bool:
        return self.unitarity_error() <= atol


def transfer(network: ModeNetwork, outputs: Sequence[str] | None = None) -> TransferMatrix:
    """Compose the splitters of ``network`` into a matrix over its sources.

    ``outputs`` defaults to the terminal modes. Internal modes (e.g. ``c`` in
    the modified interferometer) may be requested as well.
    """
    n = len(network.sources)
    coeff = {m: np.eye(n, dtype=complex)[j] for j, m in enumerate(network.sources)}
    for sp in network.splitters:
        x, y = coeff[sp.inputs[0]], coeff[sp.inputs[1]]
        coeff[sp.outputs[0]] = SPLITTER[0, 0] * x + SPLITTER[0, 1] * y
        coeff[sp.outputs[1]] = SPLITTER[1, 0] * x + SPLITTER[1, 1] * y
    if outputs is None:
        outputs = network.terminal_modes
    missing = [m for m in outputs if m not in coeff]
    if missing:
        raise NetworkError(f"unknown mode label(s) {missing}; network modes are {list(coeff)}")
    return TransferMatrix(tuple(outputs), network.sources, np.array([coeff[m] for m in outputs]))


def standard_hom() -> ModeNetwork:
    """One splitter, ``(a, b) -> (c, d)``."""
    return ModeNetwork(("a", "b")).then(("a", "b"), ("c", "d"))


def modified_hom() -> ModeNetwork:
    """Second splitter on output ``c`` with vacuum input ``e``.

    With the ``(x, y) -> ((x+iy), (ix+y))/sqrt2`` convention the port fed by
    ``c + i e`` is ``g`` and the port fed by ``i c + e`` is ``f``.
    """
    return ModeNetwork(("a", "b", "e")).then(("a", "b"), ("c", "d")).then(("c", "e"), ("g", "f"))


def hbt_network(kind: str = "peak") -> tuple[ModeNetwork, str]:
    """HBT splitter ``(X, h) -> (A, B)`` behind a heralded arm.

    ``kind='peak'``: modified interferometer, herald ``g``, analysed arm ``f``.
    ``kind='dip'``: standard interferometer, herald ``d``, analysed arm ``c``.
    Returns the network and the herald mode label.
    """
    if kind == "peak":
        return modified_hom().then(("f", "h"), ("A", "B"), new_sources=("h",)), "g"
    if kind == "dip":
        return standard_hom().then(("c", "h"), ("A", "B"), new_sources=("h",)), "d"
    raise NetworkError(f"unknown HBT configuration {kind!r}; expected 'peak' or 'dip'")
