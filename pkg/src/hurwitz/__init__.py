"""Exact search for exceptional three-point branch data of the Hurwitz problem."""

from .classify import assign_label, compute_genus, is_compatible, splittable
from .partitions import PartitionTable, count_secondary, partitions_of
from .pipeline import RunConfig, resume, run_pipeline
from .verify import BoundCertificate, numerator_bound, select_primes

__version__ = "0.1.0"

__all__ = [
    "BoundCertificate",
    "PartitionTable",
    "RunConfig",
    "assign_label",
    "compute_genus",
    "count_secondary",
    "is_compatible",
    "numerator_bound",
    "partitions_of",
    "resume",
    "run_pipeline",
    "select_primes",
    "splittable",
]
