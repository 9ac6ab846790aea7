"""B-tree insertion histories, their increasing-tree encoding, and statistics."""

from .btree import (
    BTreeShape,
    History,
    KeyedBTree,
    KNode,
    SplitTrace,
    insert_at_leaf,
    insert_key,
    iter_histories,
    leaf_count,
    leaf_sizes,
    new_keyed_singleton,
    new_singleton,
    replay_history,
    run_permutation,
    shape_of,
    trim,
    validate,
)
from .historic import (
    ExternalSlot,
    HistoricTree,
    ReducedHistoricTree,
    branchings,
    check_correspondence,
    external_slots,
    historic_to_history,
    history_to_historic,
    is_historic,
    iter_historic_trees,
    iter_reduced_trees,
    reduce_tree,
    s_values,
    unreduce_tree,
)
from .permutations import (
    AscentRecord,
    InsertionDag,
    build_dag,
    count_perms,
    enumerate_perms,
    iota,
    lift,
    psi,
    psi_hat,
    rebuild_with_choices,
    topological_labellings,
    underline_pi,
)
from .series import (
    ConjectureReport,
    GrowthEstimate,
    HistoryCountTable,
    brute_force_historic_count,
    conjecture_report,
    estimate_rho,
    history_counts,
)
from .stats import (
    KappaConstant,
    LeafMoments,
    LeafSample,
    WeightedSeriesTable,
    bivariate_counts,
    kappa,
    leaf_moments,
    mean_ratio_trend,
    monte_carlo_leaves,
    tree_weight,
)

__version__ = "0.1.0"
