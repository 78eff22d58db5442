//! Named experiments: declarative specs compiled into pulse programs,
//! executed over a sweep and reduced to signal traces.

mod compile;
mod run;
mod spec;
mod trace;

pub use compile::{compile_point, CompiledPoint, INIT_CLOSING_PHASE};
pub use run::{
    calibration_spec, plateau_normalize, run_experiment, run_hhcp_transfer, run_laser_depolarization, run_rabi_chain,
    run_sedor_esr, run_sedor_ramsey, run_spam_calibration, run_spin_echo, RunOptions, RunOutput, CALIBRATION_POINTS,
    CALIBRATION_SPAN, PLATEAU_FRACTION, SHORT_TIME_MASK,
};
pub use spec::{
    AnalysisSpec, ControlErrors, ExperimentKind, ExperimentSpec, Fixed, Linspace, SpamSetting, Sweep, SweepValues,
};
pub use trace::{Exposure, Quantity, SignalTrace, SweepParameter, ORDINATE_LIMIT};
