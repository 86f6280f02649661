"""SU(2) representations of finitely presented groups as unit quaternions."""
from .fox import fox_complex, presentation_ranks, twisted_cohomology
from .local import CassonResult, casson_count, local_chart
from .presentation import GroupPresentation, PresentationError, exponent_matrix, homology_sphere_check, relator_system, word_eval
from .solve import RepOrbit, RepPoint, fingerprint, solve_reps

__all__ = [
    "CassonResult",
    "GroupPresentation",
    "PresentationError",
    "RepOrbit",
    "RepPoint",
    "casson_count",
    "exponent_matrix",
    "fingerprint",
    "fox_complex",
    "homology_sphere_check",
    "local_chart",
    "presentation_ranks",
    "relator_system",
    "solve_reps",
    "twisted_cohomology",
    "word_eval",
]
