"""Online multistream classification with a self-evolving single hidden layer.

A labelled source stream and an unlabelled, covariate-shifted target stream
train one network jointly: denoising reconstruction on the target, softmax
classification on the source, and a KL term aligning the two domains' hidden
activations.  Hidden units are added and removed on the fly from bias and
variance estimates taken under two online Gaussian mixtures.
"""

from .agmm import Agmm, RunningGaussian
from .harness import DatasetConfig, RunMetrics, load_csv, prequential, run_prequential, write_metrics
from .network import ElasticNetwork
from .significance import NsTracker
from .trainer import AtlTrainer, ConfigurationError, TrainerConfig

__all__ = [
    "Agmm",
    "AtlTrainer",
    "ConfigurationError",
    "DatasetConfig",
    "ElasticNetwork",
    "NsTracker",
    "RunMetrics",
    "RunningGaussian",
    "TrainerConfig",
    "load_csv",
    "prequential",
    "run_prequential",
    "write_metrics",
]
