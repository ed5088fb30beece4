//! Information transfer rate and the ensemble Q-statistic.
use emf_core::eval::{itr, q_statistic, ContingencyCounts, ItrInput};

fn main() {
    for (n, p) in [(2, 1.0), (2, 0.9), (4, 0.7), (4, 0.25)] {
        let out = itr(&ItrInput { n_classes: n, accuracy: p, observations: 120.0, minutes: 10.0 }).unwrap();
        println!(
            "N={n} P={p:.2}: {:.4} bits/trial x {:.1} trials/min = {:.4} bits/min",
            out.bits_per_trial, out.trials_per_minute, out.bits_per_minute
        );
    }
    let a = vec![true, true, false, true, false, true];
    let b = vec![true, false, false, true, true, true];
    let c = vec![false, true, true, true, false, false];
    println!("counts a/b {:?}", ContingencyCounts::from_correctness(&a, &b));
    println!("Q(a, b, c) = {:.4}", q_statistic(&[a, b, c]).unwrap());
}
