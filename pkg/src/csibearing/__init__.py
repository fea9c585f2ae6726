"""Relative bearing estimation from paired WiFi channel measurements.

A moving receiver that exchanges packets with a peer acts as a virtual
antenna array: correlating the measured channel sequence against steering
phases for candidate directions yields an angle-of-arrival profile whose
maximum is the relative bearing. The package also ships a synthetic
multipath channel simulator (the test oracle), a bearing-only least-squares
localizer, dataset serialization, and a batch CLI.
"""

from .errors import (
    CsiBearingError,
    DegenerateChannelError,
    DegenerateGeometryError,
    DegenerateProfileError,
    InsufficientObservationsError,
    InvalidArgumentError,
    MalformedLogError,
    RecordParseError,
    RecordValidationError,
    ResourceLimitError,
    SingularGeometryError,
)
from .types import (
    AgentId,
    CsiPacket,
    DEFAULT_WAVELENGTH_M,
    Direction,
    GridConfig,
    PhaseFactor,
    Trajectory,
    check_aperture,
    direction_unit_vector,
    wrap_azimuth,
)
from .pairing import (
    ExchangeLog,
    PairedChannel,
    PairingStats,
    align_to_trajectory,
    cancel_cfo,
    pair_exchange,
    pair_packets,
    round_robin_schedule,
)
from .steering import (
    DirectionGrid,
    SteeringTable,
    build_grid,
    precompute_steering,
    steering_phase_matrix,
)
from .profile import (
    AoaProfile,
    BearingEstimate,
    EstimateOptions,
    Peak,
    compute_profile,
    estimate_bearing,
    find_peaks,
    profile_variance,
    summarize_profile,
)
from .simulate import (
    Reflector,
    Scene,
    arc_trajectory,
    ground_truth_bearing,
    simulate_channel,
)
from .localize import (
    BearingObservation,
    LocalizationResult,
    filter_outliers,
    localize,
)
from .pipeline import (
    estimate_from_record,
    parse_resolution,
    simulate_record,
)
from .dataset import (
    DatasetRecord,
    RecordMeta,
    export_profile,
    load_observations,
    load_profile,
    load_record,
    load_scene,
    load_trajectory,
    register_adapter,
    save_record,
    save_scene,
    save_trajectory,
)

__version__ = "0.1.0"
