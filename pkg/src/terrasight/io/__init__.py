"""File formats, configuration and deterministic rendering."""
from .codecs import (DTYPES, atomic_write, read_csv, read_json, read_labels, read_ppm, read_tensor,
                     write_csv, write_json, write_labels, write_ppm, write_tensor)
from .config import EXPECTED_UNITS, PipelineConfig, check_units, config_to_dict, load_config
from .formats import (read_camera, read_class_set, read_classifier, read_identification_report,
                      read_interaction_log, read_poses, read_probability_map, read_property_map,
                      read_property_model, read_route, read_route_prediction, read_route_truth,
                      write_camera, write_class_set, write_classifier, write_flags,
                      write_identification_report, write_interaction_log, write_metrics, write_poses,
                      write_property_map, write_property_model, write_route_prediction)
from .render import load_colormap, overlay, render_classes, render_heatmap
