"""Stereo correspondence toolkit: matching costs, six disparity estimators,
Middlebury ingestion and correlation-based scoring."""

from .cost import CostVolume, DwacParams, build_cost_volume, dwac_cost_volume, gf_cost_volume
from .evaluate import EvalResult, bad_pixel_rate, emit_csv, pearson_correlation, summarize
from .hog import HogParams, dense_hog_descriptors, hog_descriptor_field
from .imaging import gradients, magnitude_orientation, resize, to_grayscale
from .ingest import GroundTruth, RawImage, SceneEntry, discover_dataset, load_pfm, load_pnm, parse_calib
from .match import (
    INVALID,
    BpParams,
    DisparityMap,
    DpParams,
    MatchParams,
    bp_disparity,
    dp_scanline,
    estimate,
    gf_disparity,
    hog_disparity,
    message_update,
    wta_disparity,
)

__version__ = "0.1.0"
