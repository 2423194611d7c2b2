"""Predict terrain bearing and shearing properties from per-pixel terrain classes.

Subpackages:

* ``segmentation`` - texture features, weighted cross-entropy pixel classifier, metrics
* ``terramech``    - wheel-soil forward model, dominant parameter identification, property models
* ``inference``    - mixture moments, dense property maps, route profiles, hazard flags
* ``labeling``     - depth-based label propagation between frames
* ``io``           - file codecs, config and heatmap rendering
"""

__version__ = "0.1.0"

IGNORE = 255
