//! CSP on alpha band power of synthetic left/right trials: the first filter
//! favours the side that keeps its rhythm for class 0.
use emf_core::csp::{fit_csp_ovr, LabeledSeries};
use emf_core::data::{generate_synthetic, SynthSpec, CHANNELS};
use emf_core::dsp::{BandName, DspConfig};
use emf_core::pipeline::compute_powers;

fn main() {
    let set = generate_synthetic(&SynthSpec { trials_per_class: 40, seed: 3, ..SynthSpec::default() }).unwrap();
    let powers = compute_powers(&set.trials, DspConfig::default(), &[BandName::Alpha]).unwrap();
    let series: Vec<LabeledSeries> = powers
        .iter()
        .map(|p| LabeledSeries { values: &p.bands[0].power, label: p.label })
        .collect();
    let csp = fit_csp_ovr(&series, BandName::Alpha, 4, 2).unwrap();
    let model = &csp.models[0];
    println!("eigenvalues {:.3?}", model.eigenvalues);
    for r in 0..model.filters.nrows() {
        let row: Vec<String> = CHANNELS
            .iter()
            .enumerate()
            .map(|(c, name)| format!("{name} {:+.3}", model.filters[(r, c)]))
            .collect();
        println!("filter {r}: {}", row.join("  "));
    }
    for class in 0..2 {
        let i = powers.iter().position(|p| p.label == class).unwrap();
        println!("{} features {:.3?}", set.classes[class], csp.transform(&powers[i].bands[0].power).unwrap());
    }
}
