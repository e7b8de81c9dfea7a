"""Simple tabulation hashing with the two-choice paradigm, plus structural diagnostics."""

from .tabulation import (
    CharSpec, DomainError, PositionCharacter, TabulationTables, build_tables, derive_characters,
    hash_key, hash_position_set,
)
from .allocator import AllocationConfig, ConfigError, RunTrace, load_at_time, max_load, place_all
from .hashgraph import (
    build_graph, components, contains_binomial_tree, extract_load_graph, arboricity_lower_bound,
    find_double_cycle, verify_structural_dichotomy,
)
from .adversary import AdversarialSpec, adversary_spec, generate_adversarial_keys, rig_tables, run_adversary
from .harness import ExperimentConfig, run_experiment, summarize

__version__ = "0.1.0"
