"""Bitmap-scoped execution of per-subgraph programs over packed partitions."""

from .bitmaps import BITMAP_KINDS, Bitmap, GrowableBitmap, SparseBitmap, WordBitmap, make_bitmap
from .executor import MODES, ExecutionResult, ExecutionStats, PartitionRunner, build_runners, execute, slot_width
from .partition import PartitionGraph
from .view import SubgraphView

__all__ = [
    "BITMAP_KINDS", "MODES", "Bitmap", "ExecutionResult", "ExecutionStats", "GrowableBitmap",
    "PartitionGraph", "PartitionRunner", "SparseBitmap", "SubgraphView", "WordBitmap",
    "build_runners", "execute", "make_bitmap", "slot_width",
]
