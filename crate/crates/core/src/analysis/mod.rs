//! Energy bookkeeping and the numerical certification layer.

mod boundedness;
mod dissipation;
mod lemmas;
mod multipliers;
mod records;
mod sweep;

pub use boundedness::{boundedness_monitor, BoundednessSummary};
pub use dissipation::{check_dissipation, DissipationReport, DissipationWatch, DEFAULT_TOL};
pub use lemmas::{lemma_sampler, LemmaReport};
pub use multipliers::{
    build_multipliers, certify_theta0_uniform, mode_multipliers, verify_recurrence_contraction, MultiplierSpec,
    RecurrenceReport, RecurrenceSpec, Theta0Certificate,
};
pub use records::EnergyRecord;
pub use sweep::{find_tau_c, probe_tau, SweepProbe, SweepResult, SweepSpec};
