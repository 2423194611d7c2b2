"""Semantics-guided property inference: class probabilities to property mean and spread."""
from .mixture import mixture_moments, mixture_pdf, sample_mixture
from .maps import (FLAG_LEGEND, SLIPPERY, SOFT, UNCERTAIN, PropertyMap, check_probability_map,
                   hazard_flags, infer_property_maps, predict_route, sample_map)
from .evaluation import FULL_SCALE, full_scale_error, interval_coverage
