use serde::{Deserialize, Serialize};

/// log2(10), rounded up in the last place.
const LOG2_10: f64 = 3.321_928_094_887_362_6;

/// Working precision, stated in significant decimal digits.
///
/// Internally every value carries a binary significand of `bits()` bits, the
/// smallest width whose unit roundoff is below `10^-digits`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Precision(u32);

impl Precision {
    pub const DEFAULT: Precision = Precision(50);

    pub fn digits(digits: u32) -> Self {
        assert!(digits >= 1, "precision must be at least one digit");
        Precision(digits)
    }

    pub fn get(self) -> u32 {
        self.0
    }

    pub fn bits(self) -> u64 {
        (self.0 as f64 * LOG2_10).ceil() as u64 + 1
    }

    pub fn doubled(self) -> Self {
        Precision(self.0 * 2)
    }
}

impl Default for Precision {
    fn default() -> Self {
        Self::DEFAULT
    }
}

impl std::fmt::Display for Precision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} digits", self.0)
    }
}
