"""Functional object-oriented networks: build, generalize and search them."""
from .model import (
    FOONGraph,
    FunctionalUnit,
    GraphStats,
    Kitchen,
    Level,
    MotionNode,
    ObjectNode,
    graph_stats,
    node_identity,
    unit_equals,
)
from .parser import (
    CategoryIndex,
    FoonSyntaxError,
    SimilarityMatrix,
    Subgraph,
    Taxonomy,
    parse_category_index,
    parse_kitchen,
    parse_similarity_matrix,
    parse_subgraph,
    parse_taxonomy,
    serialize_subgraph,
)
from .retrieval import (
    SearchBudget,
    Solved,
    TaskTree,
    TimedOut,
    Unsolvable,
    is_solvable,
    retrieve_task_tree,
    verify_tree,
)
from .similarity import NoCommonSubsumer, SimilarityIndex, build_similarity_index, wu_palmer
from .transform import (
    ExpansionConfig,
    GeneralizeMode,
    abstract_to_level,
    categorize_goal,
    categorize_kitchen,
    categorize_query,
    expand,
    expansion_size,
    generalize,
    merge,
)

__version__ = "0.1.0"
