"""Modularity, entropy and conductance community-structure ratios for networks."""

from .conductance import (CommunityBounds, CommunitySet, c_ratio, c_ratio_oracle_small,
                          conductance, discover_communities, is_possible_community)
from .criterion import EvaluateOptions, RatioReport, check_hypothesis, evaluate
from .entropy import (entropy_ratio, exact_entropy_small, maximize_entropy_ratio,
                      module_code_length, uniform_code_length)
from .errors import CommStructError, DomainError, EmptyGraphError, OracleRefusal, ParseError
from .generators import GenSpec, er_graph, generate, pa_graph
from .graph import (Graph, connected_components, cut_size, format_edge_list,
                    is_connected_induced, parse_edge_list, read_edge_list, volume)
from .modularity import exact_modularity_small, maximize_modularity, modularity
from .partition import Partition

__version__ = "0.1.0"
