"""sidr: interactive semantic-interaction engine.

Two drag-to-retrain dimensionality-reduction pipelines over a shared
fine-tunable backbone: "deepsi" refreshes layouts with a from-scratch
MDS solve, "neuralsi" with a single forward pass through a trained
linear projection head. Includes a simulated-analyst evaluation
harness, a timing benchmark, an HTTP session service, and a CLI.
"""

from .corpus import (
    Corpus,
    CorpusError,
    DocRecord,
    bundled_corpus,
    embed_tfidf,
    load_corpus,
    save_corpus,
    synth_clusters,
)
from .mds import MdsConfig, MdsResult, mds_project, procrustes_residual, stress
from .nn import (
    AdamState,
    BackboneParams,
    HeadParams,
    adam_init,
    adam_step,
    backbone_forward,
    backbone_init,
    backprop_through_model,
    finite_diff_check,
    grad_pairwise_stress,
    head_forward,
    model_forward,
    pairwise_stress,
)
from .pipelines import (
    InteractionBatch,
    InteractionError,
    ModelState,
    Move,
    PipelineConfig,
    Projection,
    deepsi_forward,
    deepsi_update,
    forward,
    head_init_mds,
    head_init_random,
    init_state,
    neuralsi_forward,
    neuralsi_update,
    normalize_viewport,
    update,
)
from .simeval import (
    LearningCurve,
    SimConfig,
    TimingRow,
    TimingTable,
    complexity_exponent,
    export_results,
    export_stage_timers,
    knn_accuracy,
    run_learning_curve,
    run_timing_benchmark,
    simulate_batch,
)

__version__ = "0.1.0"
