"""T-private information retrieval at capacity over small fields.

Any T colluding servers out of N learn nothing about which of M replicated
records is retrieved; the download rate equals (1 - T/N) / (1 - (T/N)^M).
"""

from ._backend import NAME as backend
from .array_code import BlockGenerator, build_array_code, check_mds, find_recovery_arrangement
from .field import GF, GaloisField
from .plan import QueryPlan, SchemeParams, build_query_plan, capacity, derive_parameters
from .protocol import RecordSet, UserSecret, generate_queries, reconstruct, sample_secret, server_answer

__version__ = "0.1.0"

__all__ = [
    "BlockGenerator", "GF", "GaloisField", "QueryPlan", "RecordSet", "SchemeParams", "UserSecret",
    "backend", "build_array_code", "build_query_plan", "capacity", "check_mds", "derive_parameters",
    "find_recovery_arrangement", "generate_queries", "reconstruct", "sample_secret", "server_answer",
]
