"""Byzantine-resilient fusion for hierarchical human/sensor decision networks."""

__version__ = "0.1.0"

from .baselines import ChairVarshneyFusion, MajorityVote
from .config import ExperimentConfig, parse_config
from .estimator import HierarchicalBeliefFusion
from .harness import run_experiment, sweep
from .model import HumanThresholdDist, OperatingPoint, SignalModel
from .sideinfo import SideInfoCombiner
from .topology import Topology, build_topology

__all__ = [
    "ChairVarshneyFusion",
    "ExperimentConfig",
    "HierarchicalBeliefFusion",
    "HumanThresholdDist",
    "MajorityVote",
    "OperatingPoint",
    "SideInfoCombiner",
    "SignalModel",
    "Topology",
    "build_topology",
    "parse_config",
    "run_experiment",
    "sweep",
]
