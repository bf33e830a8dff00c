from .estimator import AdapterClassifier, load_checkpoint, save_checkpoint
from .net import (
    adapter_forward,
    batch_cross_entropy,
    classify,
    cross_entropy,
    forward_probs,
    group_by_route,
    loss_and_grads,
    softmax,
)
from .optim import AdamW
from .params import (
    ROUTE_EN_COMMON,
    ROUTE_SHARED,
    VARIANT_NONE,
    VARIANT_PER_LANGUAGE,
    VARIANT_SHARED,
    VARIANTS,
    AdapterParams,
    ClassifierParams,
    ModelParams,
    ShapeError,
    init_params,
    route_for,
    routes_for_variant,
)
from .pipeline import (
    TrainConfig,
    embed_matrix,
    predict_record,
    predict_records,
    save_history,
    train_on_split,
)

__all__ = [
    "AdapterClassifier",
    "load_checkpoint",
    "save_checkpoint",
    "adapter_forward",
    "batch_cross_entropy",
    "classify",
    "cross_entropy",
    "forward_probs",
    "group_by_route",
    "loss_and_grads",
    "softmax",
    "AdamW",
    "ROUTE_EN_COMMON",
    "ROUTE_SHARED",
    "VARIANT_NONE",
    "VARIANT_PER_LANGUAGE",
    "VARIANT_SHARED",
    "VARIANTS",
    "AdapterParams",
    "ClassifierParams",
    "ModelParams",
    "ShapeError",
    "init_params",
    "route_for",
    "routes_for_variant",
    "TrainConfig",
    "embed_matrix",
    "predict_record",
    "predict_records",
    "save_history",
    "train_on_split",
]
