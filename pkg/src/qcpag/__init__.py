"""Quasi-cyclic partial geometries and the QC-LDPC codes built on them.

Typical use::

    from qcpag import build_prime_base, disperse, verify_definition, count_cycles
    H = disperse(build_prime_base(7))
    G = verify_definition(H)          # PaG(7, 7, 6)
    count_cycles(H, 6)

Hot kernels run under numba when it is importable; set ``QCPAG_BACKEND=numpy``
(or call :func:`set_backend`) to force the vectorized numpy fallback.
"""

from . import errors
from ._accel import HAVE_NUMBA, get_backend, set_backend, use_backend
from ._version import __version__
from .alist import dumps as alist_dumps
from .alist import loads as alist_loads
from .alist import read as read_alist
from .alist import write as write_alist
from .base import (
    BaseMatrix,
    MaskingMatrix,
    Origin,
    build_cyclic_base,
    build_prime_base,
    latin_square_view,
    mask,
    random_indices,
    select_submatrix,
)
from .decoders import DecodeOutcome, decode_batch, decode_msa, decode_spa
from .dispersion import QcBinaryMatrix, disperse, expand_generators, generator_rows, qc_structure_check
from .errors import QcpagError
from .geometry import (
    Bundle,
    BundleKind,
    Certification,
    GeometryDescriptor,
    Protograph,
    extract_subgeometry,
    geometry_params,
    intersecting_bundle,
    parallel_bundles,
    protograph,
    rc_constraint_check,
    tanner_dot,
    verify_definition,
    verify_theorem1,
    verify_theorem2,
)
from .gf2 import LinearCode, gf2_rank
from .graph import (
    CycleReport,
    TannerGraph,
    count_cycles,
    cycle6_count_formula,
    cycle6_count_prime,
    cycle8_count_formula_gq,
    cycle_report,
    girth,
)
from .sim import PointResult, SimConfig, SimResult, awgn_bpsk_llr, csv_text, run_monte_carlo
from .spectral import (
    SpectrumReport,
    eigen_ratio,
    expansion_lower_bound,
    is_ramanujan_biregular,
    numeric_spectrum_check,
    point_adjacency,
    srg_spectrum,
    tanner_spectrum,
    trace_check,
)
from .trapping import (
    Configuration,
    TrappingReport,
    classify_configuration,
    general_bound,
    induced_profile,
    search_trapping_sets,
    theorem3_bound,
    theorem4_bound,
    theorem4_bound_max,
)

__all__ = sorted(
    name for name, obj in globals().items() if not name.startswith("_") and type(obj) is not type(errors)
) + ["errors", "__version__"]
