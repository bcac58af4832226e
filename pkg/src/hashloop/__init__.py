"""Appearance-based loop closure detection over 256-bit binary features.

Pairwise image similarity is approximated by multi-index hashing: each
descriptor is split into disjoint substrings, and only feature pairs that
collide in at least one substring table are scored. A recursive Bayesian
filter turns per-frame score vectors into per-candidate loop posteriors,
supporting several simultaneous loop closures. The analysis module carries
the closed-form retrieval probability and accuracy/cost curves that justify
the substring configuration.
"""

from .analysis import (
    INLIER_MODEL,
    OUTLIER_MODEL,
    DistanceModel,
    distance_pmf,
    expected_inlier_recall,
    expected_outlier_hit_rate,
    recall_curve,
    recall_probability,
    simulate_ball_placement,
    tradeoff_table,
    write_curves,
)
from .bayes import (
    BayesParams,
    belief,
    detect,
    neighborhood_probabilities,
    neighborhood_probability,
    score_likelihoods,
    update_posteriors,
)
from .datasets import (
    DescriptorDataset,
    DatasetFormatError,
    GroundTruth,
    GroundTruthFormatError,
    SyntheticSpec,
    generate_synthetic,
    load_ground_truth,
    matrix_to_pairs,
    read_dataset,
    save_ground_truth,
    write_dataset,
)
from .descriptors import (
    DESCRIPTOR_BITS,
    DESCRIPTOR_BYTES,
    SubstringConfig,
    hamming_distance,
    pack_bytes,
    random_descriptors,
    substring_value,
    substring_values,
    unpack_bytes,
)
from .index import FeatureRef, MultiIndexTables, memory_model_bytes
from .kernels import active_backend, set_backend
from .pipeline import (
    FrameRecord,
    RunConfig,
    RunReport,
    export_matrices,
    precision_recall,
    recall_at_full_precision,
    run_loop_detection,
    write_report,
)
from .similarity import (
    SimilarityParams,
    SimilarityResult,
    approx_similarity,
    exact_image_similarity,
    exact_similarity_vector,
    feature_similarity,
)

__version__ = "0.1.0"
