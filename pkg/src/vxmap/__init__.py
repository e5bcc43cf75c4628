"""Unbounded hash-table voxel mapping with probabilistic occupancy, obstacle
inflation, recency-based voxel retention and compact map sharing."""

from .core import MapConfig, OccState, VoxelKey, key_to_center, logit, pos_to_key, prob, state_of
from .inflate import apply_inflation, build_neighborhood, query_inflated_occupied
from .integrate import (
    FrameRejected,
    SensorFrame,
    UpdateStats,
    ingest_frame,
    ingest_shared_frame,
    raycast_process,
)
from .occupancy import apply_occupancy_check
from .pipeline import VoxelMapper
from .retain import apply_retention, update_params
from .share import (
    DecodeError,
    FrameRing,
    ShareFrame,
    collect_export_frame,
    decode_frame,
    encode_frame,
)
from .store import HistoryBuffer, MapState, VoxelRecord

__version__ = "0.1.0"
