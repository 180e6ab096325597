"""Simulator for CNOT-ancilla teleportation and EPR-pair secure direct communication."""

from .protocols import (
    EprPair,
    Message,
    QsdcResult,
    ResourceCounts,
    TeleportResult,
    correction_for_outcome,
    prepare_bell_phi_plus,
    qsdc_encode_bit,
    qsdc_round,
    qsdc_send_message,
    resource_counts,
    teleport_cnot,
    teleport_standard,
)
from .qsim import (
    Basis,
    Gate,
    MeasurementBranch,
    Outcome,
    PureState,
    UnknownQubit,
    apply_gate,
    branch_decomposition,
    fidelity,
    measure,
    random_unknown_qubit,
    tensor,
)
from .rng import make_rng
from .security import (
    BasisPolicy,
    EveModel,
    VerificationConfig,
    VerificationReport,
    Verdict,
    detection_probability_oracle,
    distribute_epr,
    verify_channel,
)
from .transcript import Transcript

__version__ = "0.1.0"
