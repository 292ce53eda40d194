"""Maslov-type indices of symplectic paths and brake orbits on convex
reversible hypersurfaces."""

from .errors import (DimensionError, DomainError, FrameError, HypothesisError, InstabilityError,
                     IntegrationError, RefinementNeeded, SymmetryError, UnsupportedInputError)
from .sympcore import (Inertia, LagrangianFrame, diamond, diamond_components, diamond_factor,
                       diamond_power, inertia, is_symplectic, lagrangian_l0, lagrangian_l1,
                       matrix_from_json, matrix_to_json, nullity, random_symplectic, rotation,
                       standard_j, standard_n, symplectic_inverse)
from .paths import (GeneratorPath, PiecewiseConstantPath, SampledPath, SymplecticPath,
                    brake_iterate, path_from_json, periodic_iterate, random_generator_path,
                    rotation_path)
from .maslov import (IndexPair, i_lagrangian, i_omega, index_at_ends, m_eps_matrix,
                     m_eps_signature_stable, theorem21_check)
from .normalforms import (NormalFormBlock, SplittingPair, circle_spectrum, classify_unipotent,
                          normal_form_decomposition, splitting_numbers)
from .iteration import (IterationProfile, bott_check, build_profile, decomposition_check,
                        index_jump_search, monotonicity_audit, theorem31_gap)
from .brakeorbit import (BrakeOrbit, EllipsoidSpec, HamiltonianSpec, ellipsoid_analytic_orbits,
                         flow_with_monodromy, gauge_hamiltonian, multiplicity_audit,
                         orbit_index_report, shoot_brake_orbit)

__version__ = "0.1.0"
