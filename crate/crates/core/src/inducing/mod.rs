//! Nice sets, canonical inducing schemes, the scheme conditions and the
//! first-return embedding into the tower.

pub mod conditions;
pub mod embed;
pub mod nice;
pub mod scheme;

pub use conditions::{
    check_c, check_c_plus, check_conditions, check_h1, check_h2_disjoint, check_h3_surrogate,
    check_m, check_m_plus, check_nested_or_disjoint, SchemeCheck,
};
pub use embed::{embed_in_tower, tower_base, TowerSet};
pub use nice::{certify_nice, NiceCertificate, NiceVerdict, OrbitClass};
pub use scheme::{
    build_canonical_scheme, collection_q, full_pullbacks, BasicElement, InducingScheme, Pullback,
};
