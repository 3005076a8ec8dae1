"""Range-view panoptic clustering: synthetic scenes, the oracle-offset
clustering chain, and panoptic quality scoring."""

from ._core import cluster_scan, generate_scene, score

__all__ = ["cluster_scan", "generate_scene", "score"]
