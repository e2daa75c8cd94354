//! Witness finders and audits of the integral identities.

mod ledger;
mod regular;
mod report;
mod witness;

pub use ledger::{
    antisymmetry_pair, check_cylinder_map, cylinder_ledger, no_retraction_audit, odd_winding_certificate, rim_curve,
    LedgerTolerances, WindingCertificate, RETRACTION_TOLERANCE,
};
pub use regular::{
    find_pole, locate_preimages, meridian_separation, random_unit, sample_regular_value, PoleChoice, RegularValue,
    RANK_THRESHOLD,
};
pub use report::{AuditReport, Verdict};
pub use witness::{find_antipodal, find_fixed_point, AntipodalOptions, FixedPointOptions, Witness};
