"""Bell inequalities from state-independent contextuality sets.

Exact local bounds, facet tests, Gilbert witnesses, integer tightening and
LP local-model certificates for the KS18 and Yu-Oh ray sets.
"""

from .behavior import Behavior, NoiseModel, apply_efficiency, apply_visibility, ideal_behavior
from .catalog import get_functional
from .certify import (LocalModel, binary_entropy, certify_critical, cond_entropy_A_given_B, critical_efficiency,
                      critical_visibility, local_model_lp)
from .gilbert import GilbertConfig, GilbertResult, gilbert_run, oracle_exact, oracle_heuristic, sweep
from .polytope import (BellFunctional, DeterministicVertex, TightnessCertificate, check_tightness, evaluate,
                       local_bound_exact, saturating_vertices)
from .rays import RaySet, build_rayset, compatibility_graph, ks_colorable
from .symmetry import automorphisms, functional_respects_orbits, orbit_partition
from .tighten import Template, coefficient_search, template_from_orbits, template_from_witness

__version__ = "0.1.0"

__all__ = [
    "Behavior", "NoiseModel", "apply_efficiency", "apply_visibility", "ideal_behavior", "get_functional",
    "LocalModel", "binary_entropy", "certify_critical", "cond_entropy_A_given_B", "critical_efficiency",
    "critical_visibility", "local_model_lp", "GilbertConfig", "GilbertResult", "gilbert_run", "oracle_exact",
    "oracle_heuristic", "sweep", "BellFunctional", "DeterministicVertex", "TightnessCertificate",
    "check_tightness", "evaluate", "local_bound_exact", "saturating_vertices", "RaySet", "build_rayset",
    "compatibility_graph", "ks_colorable", "automorphisms", "functional_respects_orbits", "orbit_partition",
    "Template", "coefficient_search", "template_from_orbits", "template_from_witness",
]
