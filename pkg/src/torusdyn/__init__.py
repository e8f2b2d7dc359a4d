"""torusdyn: entropy-theoretic diagnostics for diffeomorphisms of the d-torus.

The toolkit measures topological entropy through separated sets, unstable
entropy and volume growth through adaptively refined leaf polylines,
center-growth classes, effective density of unstable balls, sampled
uniform-exponential-growth certificates, and empirical mixing decay, and it
drives perturbation sweeps that exhibit how these quantities respond to
C1-small perturbations of toral automorphisms.
"""

__version__ = "0.1.0"

from .dynamics import (
    TorusMap,
    bowen_distance,
    jacobian_cocycle,
    orbit,
    torus_distance,
    torus_point,
    wrap,
)
from .errors import TorusDynError
from .growth import GrowthCurve, fit_growth_curve
from .leaf import LeafCurve, LeafPolyline, grow_leaf, unstable_segment
from .linear import (
    CAT_MAP_ENTRIES,
    SALEM_QUARTIC_ENTRIES,
    IntegerAutomorphism,
    LeafPatch,
    SpectralSplitting,
    ToralClassification,
    characteristic_polynomial,
    classify,
    exact_entropy,
    identity_automorphism,
    linear_unstable_leaf,
    parse_matrix_text,
    spectral_split,
)
from .perturbation import (
    BumpField,
    CenterGrowthResult,
    PerturbedMap,
    c1_distance_estimate,
    center_growth_profile,
    max_safe_amplitude,
    unstable_direction,
)
from .entropy import (
    EntropyEstimate,
    EntropySchedule,
    UnstableEntropySchedule,
    brute_force_separated_count,
    count_separated,
    count_u_separated,
    estimate_topological_entropy,
    estimate_unstable_entropy,
    estimate_unstable_volume_growth,
    ruelle_upper_bound,
)
from .density import (
    CoveringRadius,
    MixingDecay,
    Rectangle,
    RectangleHit,
    SmoothObservable,
    UegCertificate,
    build_rectangle,
    bump_function,
    constant_observable,
    covering_radius,
    effective_density_profile,
    minimal_hitting_time,
    mixing_decay_estimate,
    rectangle_hit,
    ueg_certificate,
)
from .config import (
    CONFIG_SCHEMA,
    DEFAULT_CONFIG,
    canonical_json,
    config_hash,
    load_config,
    resolve_config,
)
from .experiments import (
    ResultRecord,
    emit_report,
    load_records,
    run_sweep,
    write_records,
)
