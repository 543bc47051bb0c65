"""Packed QLF transfer with learned discriminant preferences."""

from .qlf import parse_qlf, print_qlf, pretty_qlf, enumerate_unpackings, count_unpackings
from .transfer import load_rules, transfer
from .preference import PreferenceModel, discriminant, kbest_select, train
from .triples import extract_triples

__all__ = [
    "parse_qlf", "print_qlf", "pretty_qlf", "enumerate_unpackings", "count_unpackings",
    "load_rules", "transfer", "PreferenceModel", "discriminant", "kbest_select", "train",
    "extract_triples",
]
