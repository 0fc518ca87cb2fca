"""rpmkit: procedural Raven-style matrix puzzles plus an analogical
contrastive reasoner on a from-scratch float64 autodiff core."""

from .episodes import (
    DomainPair,
    Episode,
    SplitSpec,
    cross_attribute_split,
    few_shot_subsample,
    make_domain_pairs,
    make_queries,
    meta_task_batches,
    task_signature,
)
from .losses import (
    LossBundle,
    analogy_generative,
    analogy_inference,
    analogy_loss,
    analogy_variational,
    meta_contrastive_loss,
    nce_loss,
    soft_similarity,
)
from .model import EncoderConfig, Reasoner, context_target, panel_vector
from .optim import ParamStore
from .rpm import (
    AttributeDomain,
    Panel,
    Rule,
    RpmProblem,
    generate_corpus,
    generate_problem,
    load_corpus,
    render_raster,
    save_corpus,
    validate_problem,
)
from .tensor import Tensor
from .training import (
    Corpora,
    RunConfig,
    evaluate,
    load_checkpoint,
    maml_lite_train,
    save_checkpoint,
    split_folds,
    train,
)

__version__ = "0.1.0"
