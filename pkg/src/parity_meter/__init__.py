"""Distribution-level demographic parity metrics.

Beyond the classical demographic-parity gaps (binarised rate difference and
mean-prediction difference), this package measures the disparity between
whole score distributions: the area between per-group densities (ABPC) and
the area between per-group CDFs (ABCC).  Supporting modules provide density
estimation, 1-d optimal transport diagnostics, synthetic data with known
ground truth, a toy parity-regularised trainer, and a deterministic CLI.
"""

__version__ = "0.1.0"

from .core import (
    GroupView,
    PredictionSet,
    from_arrays,
    group_view,
    ingest,
    read_csv,
    split_groups,
    write_csv,
)
from .density import (
    DensityEstimate,
    EmpiricalCdf,
    KdeConfig,
    cdf_area_between,
    fit_ecdf,
    fit_kde,
    sample_curve,
    scott_bandwidth,
    silverman_bandwidth,
)
from .errors import (
    ConfigError,
    DegenerateError,
    DivergenceError,
    DivisionError,
    GroupError,
    MissingLabelError,
    MissingPositiveError,
    ParityMeterError,
    RangeError,
    SchemaError,
    SizeError,
    UnsupportedSpec,
)
from .metrics import (
    MetricConfig,
    MetricReport,
    PairMetrics,
    ThresholdSweep,
    abcc,
    abpc,
    accuracy_metrics,
    delta_dp_b,
    delta_dp_c,
    multi_group_report,
    mutual_information,
    pair_report,
    threshold_sweep,
)
from .optim import (
    ToyModel,
    TrainConfig,
    TrajectoryPoint,
    loss_and_grad,
    read_training_csv,
    train,
)
from .synth import (
    ConvergenceReport,
    ConvergenceRow,
    GroundTruth,
    MixtureSpec,
    NormalSpec,
    SynthSpec,
    analytic_gaussian_abpc,
    convergence_experiment,
    generate,
    ground_truth,
)
from .transport import (
    BiasDensity,
    TransportPlan,
    bias_density,
    heatmap,
    optimal_plan,
    overlap_identity,
    render_svg,
    wasserstein1,
)

__all__ = [name for name in dir() if not name.startswith("_")]
