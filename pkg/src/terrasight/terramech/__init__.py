"""Wheel-soil interaction model, dominant parameter identification and property models."""
from .wheel import (DEFAULT_SOIL, DEFAULT_WHEEL, ContactKernel, SoilNondominantParams, WheelGeometry,
                    entry_angle, forward_wheel, normal_stress, shear_displacement, shear_stress,
                    sinkage_from_entry_angle, slip_ratio)
from .identify import (IdentificationReport, IdentifiedProperties, InteractionSample, SolverConfig,
                       identify_dominant, identify_from_state, identify_log)
from .models import (PARAMETERS, Gaussian, TerrainPropertyModel, fit_property_model,
                     reference_property_model, untraversable_defaults)
from .logs import downsample, smooth_log, synthetic_log
