"""Certified intervals inside pinned distance sets of Cantor products."""

__version__ = "0.1.0"

from .errors import *  # noqa: E402,F401,F403
from .interval import (Box2, Interval, IntervalUnion, iv_abs, iv_add, iv_div, iv_max,  # noqa: E402
                       iv_min, iv_mul, iv_pow, iv_root, iv_sqrt_enclose, iv_sub, union_covers)
from .cantor import (AffineIFS, CantorSet, FiniteUnion, GapSchedule, cell,  # noqa: E402
                     measure_lower_bound, member_point, restrict, set_from_json)
from .phi import (DotProduct, Euclidean, PNorm, Sign, SignReport,  # noqa: E402
                  check_derivative_condition, hull_image, parse_phi, robust_image,
                  split_until_definite)
from .trees import (LabeledTree, assemble_vector, kb_order, parse_tree_spec,  # noqa: E402
                    subtree)
from .trees import build_tree as build_labeled_tree  # noqa: E402
from .certify import (CoverageCertificate, SearchBudget, VerifyResult,  # noqa: E402
                      certify_cover, verify_certificate)
from .construct import (ChainCertificate, PartnerResult, TreeCertificate,  # noqa: E402
                        build_chain, build_tree, construct_partner, select_skeleton)
from .metrics import (DimensionReport, ThicknessReport, dimension_report,  # noqa: E402
                      moran_dimension, product_dimension_bounds, thickness)
from .oracle import (epsilon_cover, max_gap, realize_chain, realize_tree,  # noqa: E402
                     sample_points, sampled_pinned_set)
