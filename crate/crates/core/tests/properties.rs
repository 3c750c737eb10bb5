use cod_core::grid::{cumulative_integral, dft, idft, Grid, GridFunction};
use cod_core::C64;
use proptest::prelude::*;

fn values(n: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64).prop_map(|(a, b)| C64::new(a, b)), n)
}

proptest! {
    #[test]
    fn integral_is_linear(f in values(33), g in values(33), a in -3.0..3.0f64, b in -3.0..3.0f64, anchor in 0usize..33) {
        let grid = Grid::spanning(-1.0, 2.0, 33).unwrap();
        let f = GridFunction::new(grid, f).unwrap();
        let g = GridFunction::new(grid, g).unwrap();
        let lower = grid.point(anchor);
        let lhs = cumulative_integral(&f.scaled(C64::new(a, 0.0)).add(&g.scaled(C64::new(b, 0.0))).unwrap(), lower).unwrap();
        let rhs = cumulative_integral(&f, lower).unwrap().scaled(C64::new(a, 0.0))
            .add(&cumulative_integral(&g, lower).unwrap().scaled(C64::new(b, 0.0))).unwrap();
        prop_assert!(lhs.sup_distance(&rhs).unwrap() < 1e-11);
        prop_assert_eq!(lhs[anchor], C64::new(0.0, 0.0));
    }

    #[test]
    fn dft_round_trip(v in values(24)) {
        let grid = Grid::periodic(0.0, 3.0, 24).unwrap();
        let f = GridFunction::new(grid, v).unwrap();
        let back = idft(&dft(&f), grid).unwrap();
        prop_assert!(back.sup_distance(&f).unwrap() < 1e-12);
    }

    #[test]
    fn parseval(v in values(32)) {
        let grid = Grid::periodic(0.0, 1.0, 32).unwrap();
        let f = GridFunction::new(grid, v).unwrap();
        let lhs: f64 = f.values().iter().map(|c| c.norm_sqr()).sum::<f64>() / 32.0;
        let rhs: f64 = dft(&f).coeffs.iter().map(|c| c.norm_sqr()).sum();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs));
    }
}
