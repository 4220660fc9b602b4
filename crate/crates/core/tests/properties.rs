mod common;

use common::{all_invariants, expanding_map};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn random_expanding_maps_satisfy_invariants(case in expanding_map()) {
        all_invariants(&case).map_err(TestCaseError::fail)?;
    }
}
