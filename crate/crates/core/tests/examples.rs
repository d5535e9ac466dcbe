// Every example must run to completion.

trait Outcome {
    fn check(self);
}

impl Outcome for () {
    fn check(self) {}
}

impl<E: std::fmt::Debug> Outcome for Result<(), E> {
    fn check(self) {
        self.expect("example failed");
    }
}

macro_rules! example {
    ($name:ident) => {
        mod $name {
            include!(concat!("../examples/", stringify!($name), ".rs"));

            #[test]
            fn runs() {
                super::Outcome::check(main());
            }
        }
    };
}

example!(fee_schedule);
example!(call_auction);
example!(replay_orders);
example!(investor_ledger);
example!(random_timing);
example!(power_law_fits);
example!(synth_orderflow);
example!(one_over_n);
example!(full_pipeline);
