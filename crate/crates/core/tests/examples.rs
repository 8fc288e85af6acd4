//! Runs every example so that they stay working.

macro_rules! example {
    ($name:ident) => {
        #[allow(dead_code)]
        mod $name {
            include!(concat!(
                env!("CARGO_MANIFEST_DIR"),
                "/examples/",
                stringify!($name),
                ".rs"
            ));
        }

        #[test]
        fn $name() {
            $name::run();
        }
    };
}

example!(ten_strata_trace);
example!(naive_counterexample);
example!(fpia_failure_modes);
example!(verify_allocations);
example!(one_sided_bounds);
example!(rounding);
example!(population_benchmark);
