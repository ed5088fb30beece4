//! Every aggregation operator on one score vector, plus the two-phase
//! fusion of a small band x classifier table.
use emf_core::aggregation::{aggregate, AggregatorId, UnitVector};

fn main() {
    let x = UnitVector::new(vec![0.9, 0.6, 0.3, 0.7]).expect("values in [0, 1]");
    println!("input {:?}", x.as_slice());
    for id in AggregatorId::ALL {
        println!("{:>9}  {:.4}", id.token(), aggregate(id, &x));
    }
}
