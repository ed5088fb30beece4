//! Small shared helpers: seed derivation and row-major matrix serde.

/// Mixes a base seed with a path of indices into an independent stream seed
/// (SplitMix64 finalizer applied per component).
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    let mut state = splitmix(base ^ 0x9E37_79B9_7F4A_7C15);
    for &p in parts {
        state = splitmix(state ^ splitmix(p.wrapping_add(0xD1B5_4A32_D192_ED03)));
    }
    state
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Serializes a `DMatrix<f64>` as `{"rows", "cols", "data"}` with `data`
/// in row-major order.
pub mod row_major {
    use nalgebra::DMatrix;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Repr {
        rows: usize,
        cols: usize,
        data: Vec<f64>,
    }

    pub fn serialize<S: Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
        let data = (0..m.nrows()).flat_map(|r| m.row(r).iter().copied().collect::<Vec<_>>()).collect();
        Repr {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<f64>, D::Error> {
        let r = Repr::deserialize(d)?;
        if r.rows * r.cols != r.data.len() {
            return Err(D::Error::custom(format!(
                "matrix declares {}x{} but carries {} values",
                r.rows,
                r.cols,
                r.data.len()
            )));
        }
        Ok(DMatrix::from_row_slice(r.rows, r.cols, &r.data))
    }

    pub mod vec {
        use super::*;

        pub fn serialize<S: Serializer>(ms: &[DMatrix<f64>], s: S) -> Result<S::Ok, S::Error> {
            #[derive(Serialize)]
            struct W<'a>(#[serde(with = "super")] &'a DMatrix<f64>);
            s.collect_seq(ms.iter().map(W))
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<DMatrix<f64>>, D::Error> {
            #[derive(Deserialize)]
            struct W(#[serde(with = "super")] DMatrix<f64>);
            Ok(Vec::<W>::deserialize(d)?.into_iter().map(|w| w.0).collect())
        }
    }
}
