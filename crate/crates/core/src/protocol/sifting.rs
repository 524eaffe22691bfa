use super::encoding::Basis;
use super::engine::RoundRecord;
use super::stats::parity;
use crate::{Error, Result};

/// Conclusive same-basis rounds split by basis.
#[derive(Debug, Default)]
pub struct SiftedRounds<'a> {
    pub z: Vec<&'a RoundRecord>,
    pub x: Vec<&'a RoundRecord>,
}

pub fn sift<'a, I>(records: I) -> SiftedRounds<'a>
where
    I: IntoIterator<Item = &'a RoundRecord>,
{
    let mut out = SiftedRounds::default();
    for r in records {
        if !r.sifted {
            continue;
        }
        match r.common_basis() {
            Some(Basis::Z) => out.z.push(r),
            Some(Basis::X) => out.x.push(r),
            None => {}
        }
    }
    out
}

/// Whether a sifted X-basis round satisfies the GHZ parity relation:
/// GHZ⁺ expects `⊕ X_j = 0`, GHZ⁻ expects `⊕ X_j = 1`.
pub fn x_parity_check(record: &RoundRecord) -> Result<bool> {
    if !record.sifted || record.common_basis() != Some(Basis::X) {
        return Err(Error::ContractViolation(format!(
            "round {} is not a sifted X-basis round",
            record.round_id
        )));
    }
    let expected = record
        .outcome
        .parity()
        .expect("sifted rounds are conclusive");
    Ok(parity(&record.bits()) == expected)
}
