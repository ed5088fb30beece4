//! Moving-window band power of a two-tone signal and its first difference.
use emf_core::dsp::{band_catalog, differentiate, BandPowerExtractor, DspConfig, Trial};
use nalgebra::DMatrix;
use std::f64::consts::PI;

fn main() {
    let fs = 100.0;
    // 10 Hz in the first half, 20 Hz in the second.
    let samples = DMatrix::from_fn(1, 400, |_, n| {
        let t = n as f64 / fs;
        if n < 200 { (2.0 * PI * 10.0 * t).sin() } else { (2.0 * PI * 20.0 * t).sin() }
    });
    let trial = Trial { samples, fs, label: 0 };
    let extractor = BandPowerExtractor::new(DspConfig::default()).unwrap();
    for band in band_catalog() {
        match extractor.band_power(&trial, &band) {
            Ok(series) => {
                let p = series.power.row(0);
                let diff = differentiate(&series).unwrap();
                println!(
                    "{:>5} [{:>4.1}, {:>4.1}] Hz  windows {:>2}  first {:>8.3}  last {:>8.3}  max |diff| {:.3}",
                    band.name.token(),
                    band.lo_hz,
                    band.hi_hz,
                    p.len(),
                    p[0],
                    p[p.len() - 1],
                    diff.values.amax()
                );
            }
            Err(e) => println!("{:>5} skipped: {e}", band.name.token()),
        }
    }
}
