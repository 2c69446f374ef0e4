"""Distance-graded differentially private diffusion of data over networks.

One sampled trace of a lazy jump process over privacy levels yields every
recipient's response, so recipients who pool their answers learn no more than
the best-placed among them.
"""

from .distributions import make_stream, split
from .errors import DisconnectedGraphError, DomainError, ParameterError, ParseError
from .graph import Network, PrivacySchedule, distances, fit_schedule, generate_geometric_network
from .mechanism import PrivateDatum, Response, ResponseSet, diffuse
from .process import ProcessTrace, deserialize, evaluate, sample_trace, serialize, trim
from .simulator import ScenarioConfig, run_diffusion, run_gossip

__all__ = [
    "DisconnectedGraphError", "DomainError", "Network", "ParameterError", "ParseError",
    "PrivacySchedule", "PrivateDatum", "ProcessTrace", "Response", "ResponseSet",
    "ScenarioConfig", "deserialize", "diffuse", "distances", "evaluate", "fit_schedule",
    "generate_geometric_network", "make_stream", "run_diffusion", "run_gossip",
    "sample_trace", "serialize", "split", "trim",
]
__version__ = "0.1.0"
