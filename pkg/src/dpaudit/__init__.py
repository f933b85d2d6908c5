"""Auditing black-box predictions for the most discriminated subgroup.

The search maximizes an expected demographic-parity gap over a logistic
membership model with a top-k sparsity penalty, then distills the group into
a pruned decision tree of readable rules. A brute-force conjunction search is
included as a baseline and test oracle.
"""

__version__ = "0.1.0"

from .dataset import (
    AttributeSpec,
    ColumnInfo,
    Dataset,
    DatasetError,
    FeatureMatrix,
    encode,
    load_csv,
    project_row,
)
from .distill import PrunedTree, Rule, TreeNode, ccp_sequence, extract_rules, fit_tree, translate
from .objective import (
    ObjectiveConfig,
    dscore_hard,
    expected_dscore,
    gradient,
    membership,
    penalized_objective,
    penalty_topk,
    size_ratio,
)
from .oracle import EnumResult, Predicate, enum_search, plant_synthetic
from .report import emit_dot
from .solver import (
    Evidence,
    NonFiniteObjectiveError,
    SolverConfig,
    derive_evidence,
    find_evidence,
    optimize,
    truncate_topk,
)
