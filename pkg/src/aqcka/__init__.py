"""Simulator for anonymous conference key agreement over a shared GHZ state."""

from .adversary import HONEST, AdversarySpec, Behavior, UnitaryAction
from .ame import run_ame
from .anonymity import (
    AnonymityExperiment,
    consistent_partitions,
    exact_view_distribution,
    run_exact_experiment,
    run_experiment,
)
from .net import Eve, EveType, Network, Partition, ProtocolAbort, Transcript, extract_view
from .notification import run_notification
from .orchestrator import AckaConfig, RunOutcome, key_rate, run_acka
from .qsim import Basis, StateVector, measure, prepare_adversarial_state, prepare_ghz
from .rng import BranchStream, Stream, enumerate_branches
from .verification import run_verification

__version__ = "0.1.0"

__all__ = [
    "AckaConfig",
    "AdversarySpec",
    "AnonymityExperiment",
    "Basis",
    "Behavior",
    "BranchStream",
    "Eve",
    "EveType",
    "HONEST",
    "Network",
    "Partition",
    "ProtocolAbort",
    "RunOutcome",
    "StateVector",
    "Stream",
    "Transcript",
    "UnitaryAction",
    "consistent_partitions",
    "enumerate_branches",
    "exact_view_distribution",
    "extract_view",
    "key_rate",
    "measure",
    "prepare_adversarial_state",
    "prepare_ghz",
    "run_acka",
    "run_ame",
    "run_exact_experiment",
    "run_experiment",
    "run_notification",
    "run_verification",
]
