"""domgen: pseudo-domain labeling and domain-adversarial training toolkit.

Pipeline pieces: style statistics over a fixed filter bank, farthest feature
sampling of base domains, AdaIN stylization, a soft-label domain classifier,
gradient-reversal adversarial training, and low-frequency DCT augmentation,
plus a synthetic-benchmark harness tying them together.
"""

from .adain import adain_transfer, pixel_adain, stylize_corpus
from .classifier import (
    DEFAULT_BASE_DOMAINS,
    MlpClassifier,
    TrainConfig,
    assign_labels,
    check_soft_label,
    cross_entropy,
    els_labels,
    mlp_forward,
    train_domain_classifier,
)
from .dal import (
    DalBatchLoss,
    DalModel,
    GrlConfig,
    dal_loss,
    evaluate,
    grl_backward,
    grl_forward,
    train_dal,
)
from .ffs import BaseDomainSet, FfsState, ffs_select, ffs_select_with_state, maxmin_oracle
from .harness import (
    ExperimentConfig,
    MetricsReport,
    label_entropy_report,
    run_experiment,
    run_single,
)
from .kernels import BACKEND
from .scg import (
    SpectrumBlendConfig,
    dct2,
    idct2,
    low_freq_mask,
    random_reference,
    scg_star_blend,
)
from .style import (
    FilterBank,
    StyleVector,
    build_filter_bank,
    conv_features,
    style_distance,
    style_of,
)
from .synth import SyntheticDomainSpec, gen_dataset

__version__ = "0.1.0"
