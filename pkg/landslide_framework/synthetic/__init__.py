"""Procedural scenes and datasets with known ground truth"""
from .dataset import DatasetSummary, generate_dataset, read_truth
from .scenes import GroundTruth, ScarSpec, SceneSpec, generate_scene_pair, heuristic_classify, heuristic_score

__all__ = [
    'DatasetSummary', 'generate_dataset', 'read_truth',
    'GroundTruth', 'ScarSpec', 'SceneSpec', 'generate_scene_pair', 'heuristic_classify', 'heuristic_score',
]
