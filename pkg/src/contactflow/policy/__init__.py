from .config import PROFILES, PolicyConfig, TrainConfig, desk_profile, paper_profile
from .normalization import (
    NormalizationStats,
    denormalize_minmax,
    normalize_image,
    normalize_minmax,
)
from .encoders import ConditionBundle, ConditionEncoder, ForceHistoryEncoder, Observation, VisualEncoder
from .network import DiTBlock, VelocityNet
from .data import TrainingSet
from .policy import FlowPolicy, HybridActionChunk, TrainResult
from .executor import ChunkExecutor, RolloutLog

__all__ = [
    "PolicyConfig", "TrainConfig", "PROFILES", "desk_profile", "paper_profile",
    "NormalizationStats", "normalize_minmax", "denormalize_minmax", "normalize_image",
    "Observation", "ConditionBundle", "ConditionEncoder", "ForceHistoryEncoder",
    "VisualEncoder", "DiTBlock", "VelocityNet", "TrainingSet",
    "FlowPolicy", "HybridActionChunk", "TrainResult",
    "ChunkExecutor", "RolloutLog",
]
