from .CalibError import (CalibError, LayoutError, BoundsError, InvalidChannelError, UnknownPlatformError, DivergedSimulationError,
                         DegenerateGeometryError, UnrecoverablePerceptionError, InsufficientOverlapError, MetricMismatchError,
                         RecommenderUnavailableError, ResponseParseError, NoValidIterationError, EmptyInputError,
                         MissingRecordingError, ConfigError)
from .Platforms import Platforms
from .Ablations import Ablations, RequestFlags
from .ParameterSpace import (ParameterBound, ParameterBounds, ParameterVector, NormalizedVector, RelativeErrorReport, clamp,
                             sample_uniform, normalize, denormalize, relative_error, normalized_distance)
from .Control import (ControlChannel, ControlProfile, ControlBounds, evaluate, control_bounds, training_profile, holdout_suite,
                      clamp_control)
from .Trajectory import Trajectory
from .Alignment import AlignedPair, MetricsReport, align, trim_transient, mae_centerline, mae_tip, compare
from .RunDirectory import RunDirectory
from .CalibrationLoop import CalibrationConfig, CalibrationResult, EvaluationOutcome, Objective, run_loop, run_calibration
from .Evaluation import (HoldoutEntry, HoldoutReport, ConfidenceRecord, SeedAggregate, RecoveryReport, AmplitudeReport,
                         evaluate_holdout, aggregate_seeds, average_rank, confidence_precision, confidence_records,
                         recovery_report, amplitude_report, holdout_breakdown)
from .Experiment import ExperimentSpec, load_experiment
