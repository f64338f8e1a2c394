"""Hierarchical error-bounded lossy compression for 3D scientific fields."""

from .codec import compress, decompress_full, decompress_to_level
from .container import CompressedArchive
from .core import PARITIES, Box, HierarchyLayout, Parity, make_layout
from .estimator import HierarchicalCompressor
from .exceptions import CorruptArchiveError, EntropyError, HierzipError, LayoutError
from .random_access import AccessPlan, decompress_box, decompress_slice, plan_access

__version__ = "0.1.0"

__all__ = [
    "AccessPlan",
    "Box",
    "CompressedArchive",
    "CorruptArchiveError",
    "EntropyError",
    "HierarchicalCompressor",
    "HierarchyLayout",
    "HierzipError",
    "LayoutError",
    "PARITIES",
    "Parity",
    "compress",
    "decompress_box",
    "decompress_full",
    "decompress_slice",
    "decompress_to_level",
    "make_layout",
    "plan_access",
]
