mod harness;
mod synthetic;

pub use harness::{
    basel_partial, build_synthetic, demonstrate_divergence, generate_sequence, matched_outer_for_theorem2,
    reconcile_pure_blaschke, verify_theorem_limit, verify_theorem_no_limit, BlaschkeReconciliation,
    DivergenceCase, DivergenceReport, DivergenceVerdict, FamilyDocument, FirstOrderOuter, LimitSemicircle,
    OuterChoice, OuterKeyword, PoleSequenceFamily, SequenceKind, TheoremCase, TheoremReport,
    DIVERGENCE_BOUND_EPS, GROWTH_TOLERANCE,
};
pub use synthetic::{FactorForm, OuterSpec, SyntheticSensitivity};
