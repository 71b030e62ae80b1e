//! Pins the committed fixtures to the generator: regenerating each spec
//! must reproduce the committed bytes exactly. Guards the noise contract
//! (ChaCha8 seeded stream, one standard-normal draw per point in time
//! order) and the calendar conventions the sample times depend on.

use std::fs;
use std::path::Path;

use lppl::model::LpplParams;
use lppl::series::{serialize_csv, Scale};
use lppl::synth::{generate, Spacing, SynthSpec};
use lppl::timebase::TimePoint;

fn tp(v: f64) -> TimePoint {
    TimePoint::new(v).unwrap()
}

fn committed(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name);
    fs::read_to_string(path).unwrap()
}

fn regenerate(mut spec: SynthSpec) -> String {
    let noiseless = generate(&SynthSpec { noise_sigma: 0.0, ..spec.clone() }).unwrap();
    spec.noise_sigma = 0.01 * noiseless.mean_price();
    serialize_csv(&generate(&spec).unwrap()).unwrap()
}

#[test]
fn short_window_fixture_is_reproducible() {
    let params = LpplParams::from_cos_form(
        10890.6, -854.392, 85.600, 0.950, 14.928, 0.641, tp(2017.80), Scale::Raw,
    )
    .unwrap();
    let spec = SynthSpec {
        params,
        t_start: tp(2009.0 + 61.0 / 365.0),
        t_end: tp(2016.0 + 120.0 / 365.0),
        n_points: 0,
        spacing: Spacing::TradingDays,
        noise_sigma: 0.0,
        seed: 8,
    };
    assert_eq!(regenerate(spec), committed("djia_2009_2016_synthetic.csv"));
}

#[test]
fn long_window_fixture_is_reproducible() {
    let params = LpplParams::from_cos_form(
        31.214, 1.22e7, 4.74e6, -2.047, 24.202, 2.341, tp(2045.853), Scale::Raw,
    )
    .unwrap();
    let spec = SynthSpec {
        params,
        t_start: tp(1933.25),
        t_end: tp(2016.25),
        n_points: 997,
        spacing: Spacing::Uniform,
        noise_sigma: 0.0,
        seed: 9,
    };
    assert_eq!(regenerate(spec), committed("djia_1933_2016_synthetic.csv"));
}
