"""Desk-scale oral-condition screening toolkit.

Detects three box-localized conditions (periodontal disease, caries, dental
calculus) and two image-level ones (soft deposit, discoloration) in mouth
photos, optionally fusing questionnaire answers and symptom drawings into
the network, and serves the whole self-exam loop over HTTP.
"""

from .core import (
    ALL_CONDITIONS,
    DEFAULT_GUIDE,
    DEFAULT_INPUT_SIZE,
    IMAGE_LEVEL_CONDITIONS,
    LOCALIZED_CONDITIONS,
    BoundingBox,
    ClassScores,
    ConfidenceLevel,
    Condition,
    FracRect,
    GuideGeometry,
    OperatingPointTable,
    OralImage,
    PriorProfile,
    TaskForm,
    crop_to_guide,
    image_score_from_boxes,
    level_for_score,
)
from .config import DEFAULT_QUESTIONNAIRE, QuestionnaireSchema
from .dataset import (
    AugmentConfig,
    Sample,
    SyntheticConfig,
    augment,
    generate,
    load_dataset,
    low_signal_config,
    save_dataset,
    split,
)
from .evaluate import (
    CalibrationPolicy,
    FrocCurve,
    RocCurve,
    calibrate_table,
    froc,
    match_boxes,
    roc,
    select_operating_points,
)
from .explain import Heatmap, grad_cam, pointing_game
from .model import (
    ModelConfig,
    ModelParams,
    RawPrediction,
    TrainConfig,
    dataset_scores,
    decode_boxes,
    encode_priors,
    enhance_params,
    fine_tune_enhanced,
    forward,
    init_params,
    loss,
    sample_truth,
    train,
)
from .service import ExamReport, ExamService, create_app

__version__ = "0.1.0"

__all__ = [
    "ALL_CONDITIONS",
    "AugmentConfig",
    "BoundingBox",
    "CalibrationPolicy",
    "ClassScores",
    "ConfidenceLevel",
    "Condition",
    "DEFAULT_GUIDE",
    "DEFAULT_INPUT_SIZE",
    "DEFAULT_QUESTIONNAIRE",
    "ExamReport",
    "ExamService",
    "FracRect",
    "FrocCurve",
    "GuideGeometry",
    "Heatmap",
    "IMAGE_LEVEL_CONDITIONS",
    "LOCALIZED_CONDITIONS",
    "ModelConfig",
    "ModelParams",
    "OperatingPointTable",
    "OralImage",
    "PriorProfile",
    "QuestionnaireSchema",
    "RawPrediction",
    "RocCurve",
    "Sample",
    "SyntheticConfig",
    "TaskForm",
    "TrainConfig",
    "augment",
    "calibrate_table",
    "create_app",
    "crop_to_guide",
    "dataset_scores",
    "decode_boxes",
    "encode_priors",
    "enhance_params",
    "fine_tune_enhanced",
    "forward",
    "froc",
    "generate",
    "grad_cam",
    "image_score_from_boxes",
    "init_params",
    "level_for_score",
    "load_dataset",
    "loss",
    "low_signal_config",
    "match_boxes",
    "pointing_game",
    "roc",
    "sample_truth",
    "save_dataset",
    "select_operating_points",
    "split",
    "train",
]
