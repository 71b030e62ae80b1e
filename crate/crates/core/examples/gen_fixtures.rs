//! Regenerates the committed synthetic DJIA-like fixtures under
//! `fixtures/`. Each series is the published fit vector for its window
//! plus seeded Gaussian noise at 1% of the mean model price, so the
//! fixtures are reproducible from this source alone.

use std::fs;
use std::path::Path;

use lppl::model::LpplParams;
use lppl::series::{serialize_csv, Scale};
use lppl::synth::{generate, Spacing, SynthSpec};
use lppl::timebase::TimePoint;

fn tp(v: f64) -> TimePoint {
    TimePoint::new(v).unwrap()
}

fn write_fixture(dir: &Path, name: &str, mut spec: SynthSpec) {
    // noise scale: 1% of the mean noiseless model price over the samples
    let noiseless = generate(&SynthSpec { noise_sigma: 0.0, ..spec.clone() }).unwrap();
    spec.noise_sigma = 0.01 * noiseless.mean_price();
    let series = generate(&spec).unwrap();
    let path = dir.join(name);
    fs::write(&path, serialize_csv(&series).unwrap()).unwrap();
    println!(
        "{}: {} points, sigma = {}",
        path.display(),
        series.len(),
        spec.noise_sigma
    );
}

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    fs::create_dir_all(&dir).unwrap();

    // short window: daily closes, spring 2009 .. spring 2016
    let short = LpplParams::from_cos_form(
        10890.6, -854.392, 85.600, 0.950, 14.928, 0.641, tp(2017.80), Scale::Raw,
    )
    .unwrap();
    write_fixture(
        &dir,
        "djia_2009_2016_synthetic.csv",
        SynthSpec {
            params: short,
            t_start: tp(2009.0 + 61.0 / 365.0), // 2009-03-02
            t_end: tp(2016.0 + 120.0 / 365.0),  // 2016-04-29
            n_points: 0,
            spacing: Spacing::TradingDays,
            noise_sigma: 0.0,
            seed: 8,
        },
    );

    // long window: monthly samples, 1933 .. 2016
    let long = LpplParams::from_cos_form(
        31.214, 1.22e7, 4.74e6, -2.047, 24.202, 2.341, tp(2045.853), Scale::Raw,
    )
    .unwrap();
    write_fixture(
        &dir,
        "djia_1933_2016_synthetic.csv",
        SynthSpec {
            params: long,
            t_start: tp(1933.25),
            t_end: tp(2016.25),
            n_points: 997, // monthly
            spacing: Spacing::Uniform,
            noise_sigma: 0.0,
            seed: 9,
        },
    );
}
