"""Two-photon and weak-coherent-state interference in HOM-type beam-splitter networks."""

from hompeak.wavepacket import Shape, WavePacket, evaluate, overlap
from hompeak.network import ModeNetwork, TransferMatrix, modified_hom, standard_hom, transfer
from hompeak.coincidence import (
    Interferogram,
    Kind,
    integrated_coincidence,
    joint_prob_dip,
    joint_prob_peak,
    scan,
    total_coincidence,
)

__all__ = [
    "Shape",
    "WavePacket",
    "evaluate",
    "overlap",
    "ModeNetwork",
    "TransferMatrix",
    "standard_hom",
    "modified_hom",
    "transfer",
    "Interferogram",
    "Kind",
    "joint_prob_dip",
    "joint_prob_peak",
    "integrated_coincidence",
    "total_coincidence",
    "scan",
]

__version__ = "0.1.0"
