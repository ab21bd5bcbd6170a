//! Operators between couples: endpoint norms, the sampled adjoint system
//! and its bounds, covering-number profiles and restriction to a support.

mod adjoint;
mod operator;
mod profile;
mod restrict;

pub use adjoint::{
    build_adjoint_system, build_adjoint_system_with, ercv_check, joint_bound_check, AdjointSystem,
    GBall, ZBall, BOUND_SLACK,
};
pub use operator::{endpoint_norm, EndpointNorm, Matrix, OperatorOnCouple};
pub use profile::{
    compactness_profile, compactness_profile_with, interp_bound_check, truncation_family,
    truncation_family_with, CoveringCurve, CurvePoint, InterpBound,
};
pub use restrict::{restrict_extend, support_equality_check, RestrictExtend};

#[cfg(test)]
mod tests;
