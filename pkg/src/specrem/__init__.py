"""Specular reflection detection and removal for endoscopic frames."""
from .detect_hsv import HsvDetectorParams, ThresholdMode, cost_map, detect_hsv
from .detect_rgb import RgbDetectorParams, detect_rgb
from .errors import ConvergenceError, DataError, TrainingError, UsageError
from .imagecore import ColorSpace, ComponentRegion, RasterImage, hsv_to_rgb, rgb_to_hsv
from .inpaint import SmoothingSchedule, inpaint_all
from .metrics import MetricsReport, compute_metrics
from .pipeline import DetectMode, DetectorParams, evaluate, run_detect, run_pipeline
from .selector import Label, SvmModel, extract_features, load_model, save_model, svm_predict, svm_train

__version__ = "0.1.0"
