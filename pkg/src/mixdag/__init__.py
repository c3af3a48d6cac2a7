"""Causal structure discovery from mixtures of DAGs."""

from .ci import (
    CiOracle,
    ExactDiscreteOracle,
    FisherZOracle,
    PopulationGaussianOracle,
    exact_discrete_ci,
    fisher_z,
    graphical_oracle,
    population_gaussian_ci,
)
from .fci import brute_force_pag, fci, fci_full, fci_stability_selection
from .graph_core import ARROW, CIRCLE, TAIL, CycleError, Dag, GraphError, MixedGraph, Pag, ancestors, descendants
from .marginal import marginalize_root, mixture_mag
from .metrics import TrialResult, kmeans, normalized_shd, v_measure, varying_rates
from .mixture import (
    MixtureSpec,
    bidirected_degree_ranking,
    component_mags,
    mixture_dag,
    poset_compatible,
    union_graph,
    varying_nodes,
    varying_nodes_from_pag,
)
from .separation import d_separated, find_inducing_path, is_ancestral, is_mag, is_maximal, m_separated
from .sem import DiscreteMixture, GaussianMixtureSem, exact_joint, random_discrete_mixture, random_mixture_sem, sample

__version__ = "0.1.0"
