mod common;

use common::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(config())]

    #[test]
    fn graded_koszul_and_associativity(c in graded_case()) {
        check_graded(&c)?;
    }

    #[test]
    fn exactlin_rank_nullity_and_rref(c in matrix_case()) {
        check_matrix(&c)?;
    }

    #[test]
    fn cdga_d_squared_and_leibniz(c in cdga_case()) {
        check_cdga(&c)?;
    }

    #[test]
    fn cdga_euler_characteristic(c in euler_case()) {
        check_euler(&c)?;
    }

    #[test]
    fn localsys_pullback_and_fiber_product(c in pullback_case()) {
        check_pullback(&c)?;
    }
}
