"""Time-multiplexed reservoir computing with a single simulated spin-torque
nano-oscillator: amplitude-dynamics simulator, binary-mask encoding, linear
readout, parameter sweeps and a CLI for reproducible benchmark runs."""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    DimensionMismatch,
    NotOscillating,
    OutOfRange,
    SingularSystem,
    StnoRcError,
)
from .oscillator import (
    AmplitudeTrace,
    OscillatorParams,
    OscillatorState,
    amplitude_noise,
    drift,
    nonlinearity,
    relaxation_time,
    simulate,
    steady_state_amplitude,
    steady_state_power,
    step,
)
from .multiplexing import (
    POINTS_PER_SYMBOL,
    DriveSignal,
    EncodingConfig,
    Mask,
    StateMatrix,
    Waveform,
    encode,
    generate_task,
    make_mask,
    prepend_warmup,
    sample_states,
    shift_for_mode,
    waveform_from_symbols,
)
from .readout import (
    Dataset,
    EvalReport,
    ReadoutWeights,
    default_ridge,
    evaluate,
    make_targets,
    predict,
    split_train_test,
    train,
)
from .pipeline import PipelineResult, TaskConfig, auto_dt, run_pipeline
from .sweep import (
    CurveResult,
    FieldMap,
    GridResult,
    amplitude_curve,
    map_amplitude,
    map_noise,
    map_nonlinearity,
    map_rms,
    theta_curve,
)

__all__ = [name for name in dir() if not name.startswith("_")]
