//! Configuration text round trips.

use proptest::prelude::*;

use frustra_gp::cli::RunConfig;

proptest! {
    #[test]
    fn serialize_then_parse_is_identity(
        omega in 0.0..10.0f64,
        alpha1 in 0.0..5.0f64,
        alpha2 in 0.0..5.0f64,
        n in 1u32..100,
        theta in 0.0..std::f64::consts::PI,
        literal in any::<bool>(),
    ) {
        let mut cfg = RunConfig::defaults();
        cfg.set_flag("omega", &omega.to_string()).unwrap();
        cfg.set_flag("alpha1", &alpha1.to_string()).unwrap();
        cfg.set_flag("alpha2", &alpha2.to_string()).unwrap();
        cfg.set_flag("bath-size", &n.to_string()).unwrap();
        cfg.set_flag("theta", &theta.to_string()).unwrap();
        cfg.set_flag("mode", if literal { "literal" } else { "physical" }).unwrap();
        let back = RunConfig::from_text(&cfg.serialize()).unwrap();
        prop_assert_eq!(back.values(), cfg.values());
        prop_assert_eq!(back.real("omega").unwrap().to_bits(), omega.to_bits());
        prop_assert_eq!(back.real("theta").unwrap().to_bits(), theta.to_bits());
    }
}
