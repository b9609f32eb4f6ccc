"""ecglearn: 12-lead ECG classification built from first principles.

Subpackages:
  tensor   - dense tensors with reverse-mode autodiff and NN primitives
  signal   - bandpass filtering, segmentation, normalization
  augment  - training-time stochastic signal augmentations
  dataio   - WFDB-style records, manifests, splits, synthetic data, batching
  models   - nine 1-d/2-d architectures built on the tensor engine
  learn    - losses, Adam, training loop, multi-label metric suite
  transfer - checkpoints, head adaptation, fine-tuning protocols
  cli      - operator command line (prepare/train/finetune/sweep/...)
"""

from .augment import AugmentConfig, apply_augmentations
from .config import RunConfig
from .dataio import (BatchLoader, DatasetManifest, LabelVector, TaskKind,
                     TaskSpec, generate_imbalanced_binary,
                     generate_synthetic_dataset, load_manifest, load_records,
                     load_wfdb_record, ptbxl_split, save_dataset,
                     split_indices, stratified_kfold, write_wfdb_record)
from .learn import (Adam, MetricsReport, OptimizerConfig, compute_metrics,
                    evaluate, focal_loss, train_model, weighted_bce)
from .models import ModelSpec, build, summarize_parameters
from .signal import (EcgRecord, FilterSpec, NormalizationMethod,
                     butterworth_bandpass, normalize, pad_or_truncate,
                     segment_extract)
from .tensor import Parameter, Tensor, gradcheck, no_grad
from .transfer import (Checkpoint, FineTuneMode, adapt_head, finetune,
                       load_checkpoint, save_checkpoint)

__version__ = "0.1.0"

__all__ = [
    "Tensor", "Parameter", "no_grad", "gradcheck",
    "EcgRecord", "FilterSpec", "NormalizationMethod", "butterworth_bandpass",
    "segment_extract", "pad_or_truncate", "normalize",
    "AugmentConfig", "apply_augmentations",
    "TaskKind", "TaskSpec", "LabelVector", "DatasetManifest", "BatchLoader",
    "load_wfdb_record", "write_wfdb_record", "load_manifest", "load_records",
    "save_dataset", "ptbxl_split", "split_indices", "stratified_kfold",
    "generate_synthetic_dataset", "generate_imbalanced_binary",
    "ModelSpec", "build", "summarize_parameters",
    "focal_loss", "weighted_bce", "Adam", "OptimizerConfig", "train_model",
    "evaluate", "compute_metrics", "MetricsReport",
    "Checkpoint", "save_checkpoint", "load_checkpoint", "adapt_head",
    "finetune", "FineTuneMode",
    "RunConfig",
]
