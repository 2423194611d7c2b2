"""Terrain pixel classification: features, weighted loss, training, evaluation."""
from .classes import DEFAULT_NAMES, TerrainClassSet, check_labels, class_proportions
from .loss import compute_class_weights, softmax_probabilities, wce_gradient, weighted_cross_entropy
from .features import FeatureMap, box_mean, extract_features, feature_config
from .classifier import (PixelClassifier, TrainParams, predict_labels, predict_logits,
                         predict_probabilities, train_classifier)
from .metrics import confusion, metrics
from .corpus import CorpusSample, generate_corpus, train_test_corpus
from .ratio import annotation_ratio_experiment, mixed_annotations
