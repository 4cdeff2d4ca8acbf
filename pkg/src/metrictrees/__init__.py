"""Tree-ness, hyperbolicity and ball-intersection diagnostics for finite metric spaces."""

__version__ = "0.1.0"

from .errors import *  # noqa: E402,F401,F403
from .gallery import GeneratorSpec, euclidean_lens_diameter, generate, lens_blowup_curve  # noqa: E402
from .hyperbolicity import (certify_tree, four_point_delta, space_thinness,  # noqa: E402
                            triangle_thinness, tripod_lengths)
from .lens import (alt_hypothesis_check, best_inner_ball, best_outer_ball, diamond_scan,  # noqa: E402
                   find_lens_violation, hyp_distortion_witness, intersect_balls,
                   lens_diameter_check, lens_report, rescale_sweep)
from .lipschitz import (SampledLoop, SampledMap, ScalarField, bicombing_check,  # noqa: E402
                        bump_field, cone_extension, degeneracy_field, distance_field,
                        identity_disc_map, loop_integral, loop_through, md_field,
                        seminorm_check, stokes_check)
from .space import (Ball, FiniteMetricSpace, GraphSpec, NormedSampleSpace,  # noqa: E402
                    all_geodesics, ball_members, eval_geodesic, geodesic,
                    geodesicity_defect, metric_from_graph, set_diameter, validate_metric)
