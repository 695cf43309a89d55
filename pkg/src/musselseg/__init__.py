"""Automatic pixel and point clustering with mussels wandering optimization."""

from .core import (FeatureDataset, MwoConfig, Partition, SearchBounds, assign_to_centers,
                   clamp_position, compute_bounds)
from .engine import ClusteringResult, ConvergenceTrace, run
from .errors import ConfigError, DecodeError, InvalidInputError, MusselsegError, ParseError
from .evaluation import DbParams, db_index, kmeans_baseline
from .features import FeatureMode, csv_to_dataset, image_to_dataset, srgb_to_lab
from .fitness import balanced_sums, classic_sums, rf_fitness

__version__ = "0.1.0"
