"""
Schur and Bogomolov multipliers of finite p-groups from consistent
polycyclic presentations, computed with tails and central extensions.
"""

from .presentation import (Presentation, PresentationError, ValidationReport, make_presentation,
                           parse_presentation, render_presentation, validate_polycyclic)
from .collector import (CollectionBudgetExceeded, center, centralizer, check_consistency, commutator,
                        invert, multiply, normalize, power, prop27_fast_path, structure)
from .extension import (ExtElement, ExtendedPresentation, InconsistentPresentation, RelationMatrix,
                        attach_tails, commuting_pair_relations, ext_normalize, overlap_relations)
from .intlattice import (AbelianType, SmithDecomposition, hermite_normal_form, quotient_invariants,
                         smith_normal_form)
from .multiplier import (CheckReport, MultiplierOptions, MultiplierReport, bogomolov_multiplier,
                         cp_extension, lemma24_property_check, schur_multiplier)

__version__ = "0.1.0"
