//! JSON has no encoding for non-finite numbers: serde_json writes them as `null`.
//! Fields that may carry NaN or infinity read `null` back as NaN.

use serde::{Deserialize, Deserializer};

pub(crate) fn f64_or_nan<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}
