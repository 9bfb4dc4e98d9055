//! Extended reals `[-inf, +inf]`.
//!
//! Proper convex functions take values in `]-inf, +inf]`, but conjugating an
//! improper function yields `-inf`, so both infinities are representable.
//! Comparisons are exact; every tolerance lives with the caller.

use std::cmp::Ordering;
use std::fmt;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub enum ExtReal {
    NegInf,
    Finite(f64),
    PosInf,
}

pub use ExtReal::{NegInf, PosInf};

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal::Finite(0.0);

    /// Maps `f64` infinities onto the matching variants.
    ///
    /// Panics on NaN: no operation in this crate produces one and a NaN here
    /// means an upstream bug.
    pub fn new(v: f64) -> Self {
        assert!(!v.is_nan(), "NaN is not an extended real");
        if v == f64::INFINITY {
            PosInf
        } else if v == f64::NEG_INFINITY {
            NegInf
        } else {
            ExtReal::Finite(v)
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn is_pos_inf(self) -> bool {
        matches!(self, PosInf)
    }

    pub fn is_neg_inf(self) -> bool {
        matches!(self, NegInf)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// Lossless view as `f64` (infinities map to `f64` infinities).
    pub fn to_f64(self) -> f64 {
        match self {
            NegInf => f64::NEG_INFINITY,
            ExtReal::Finite(v) => v,
            PosInf => f64::INFINITY,
        }
    }

    /// Extended-real sum; `(+inf) + (-inf)` is an error, never a value.
    pub fn checked_add(self, other: ExtReal) -> Result<ExtReal> {
        match (self, other) {
            (PosInf, NegInf) | (NegInf, PosInf) => Err(Error::IndeterminateSum),
            (PosInf, _) | (_, PosInf) => Ok(PosInf),
            (NegInf, _) | (_, NegInf) => Ok(NegInf),
            (ExtReal::Finite(a), ExtReal::Finite(b)) => Ok(ExtReal::new(a + b)),
        }
    }

    /// Adds a finite real; never indeterminate.
    pub fn plus(self, c: f64) -> ExtReal {
        match self {
            ExtReal::Finite(v) => ExtReal::new(v + c),
            other => other,
        }
    }

    /// `self - other`, erroring on `inf - inf`.
    pub fn checked_sub(self, other: ExtReal) -> Result<ExtReal> {
        self.checked_add(-other)
    }

    /// Scalar multiple. `0 * (+-inf)` is an error; negative scalars flip the sign.
    pub fn scale(self, lambda: f64) -> Result<ExtReal> {
        assert!(!lambda.is_nan(), "NaN scalar");
        match self {
            ExtReal::Finite(v) => Ok(ExtReal::new(lambda * v)),
            _ if lambda == 0.0 => Err(Error::IndeterminateProduct),
            PosInf => Ok(if lambda > 0.0 { PosInf } else { NegInf }),
            NegInf => Ok(if lambda > 0.0 { NegInf } else { PosInf }),
        }
    }

    pub fn max(self, other: ExtReal) -> ExtReal {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: ExtReal) -> ExtReal {
        if other < self {
            other
        } else {
            self
        }
    }

    fn rank(self) -> u8 {
        match self {
            NegInf => 0,
            ExtReal::Finite(_) => 1,
            PosInf => 2,
        }
    }
}

/// Supremum of a finite family. The empty supremum is `-inf`.
pub fn sup_over<I: IntoIterator<Item = ExtReal>>(values: I) -> ExtReal {
    values.into_iter().fold(NegInf, ExtReal::max)
}

/// Infimum of a finite family. The empty infimum is `+inf`.
pub fn inf_over<I: IntoIterator<Item = ExtReal>>(values: I) -> ExtReal {
    values.into_iter().fold(PosInf, ExtReal::min)
}

/// Checked sum of two extended reals.
pub fn add(a: ExtReal, b: ExtReal) -> Result<ExtReal> {
    a.checked_add(b)
}

impl From<f64> for ExtReal {
    fn from(v: f64) -> Self {
        ExtReal::new(v)
    }
}

impl std::ops::Neg for ExtReal {
    type Output = ExtReal;
    fn neg(self) -> ExtReal {
        match self {
            NegInf => PosInf,
            PosInf => NegInf,
            ExtReal::Finite(v) => ExtReal::Finite(-v),
        }
    }
}

impl PartialEq for ExtReal {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for ExtReal {}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtReal {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => {
                a.partial_cmp(b).expect("extended reals never hold NaN")
            }
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl PartialEq<f64> for ExtReal {
    fn eq(&self, other: &f64) -> bool {
        *self == ExtReal::new(*other)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NegInf => f.write_str("-inf"),
            PosInf => f.write_str("inf"),
            ExtReal::Finite(v) => write!(f, "{v}"),
        }
    }
}

impl std::str::FromStr for ExtReal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "+inf" => Ok(PosInf),
            "-inf" => Ok(NegInf),
            other => other
                .parse::<f64>()
                .ok()
                .filter(|v| !v.is_nan())
                .map(ExtReal::new)
                .ok_or_else(|| Error::InvalidArgument(format!("not an extended real: {other:?}"))),
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(v) => serializer.serialize_f64(*v),
            NegInf => serializer.serialize_str("-inf"),
            PosInf => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct ExtRealVisitor;

        impl Visitor<'_> for ExtRealVisitor {
            type Value = ExtReal;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number, \"inf\" or \"-inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<ExtReal, E> {
                if v.is_nan() {
                    Err(E::custom("NaN"))
                } else {
                    Ok(ExtReal::new(v))
                }
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<ExtReal, E> {
                Ok(ExtReal::Finite(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<ExtReal, E> {
                Ok(ExtReal::Finite(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<ExtReal, E> {
                v.parse().map_err(E::custom)
            }
        }

        deserializer.deserialize_any(ExtRealVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn absorption_and_finite_sums() {
        assert_eq!(add(PosInf, 3.0.into()).unwrap(), PosInf);
        assert_eq!(add(2.0.into(), 3.0.into()).unwrap(), ExtReal::Finite(5.0));
        assert_eq!(add(PosInf, NegInf), Err(Error::IndeterminateSum));
        assert_eq!(add(NegInf, PosInf), Err(Error::IndeterminateSum));
        assert_eq!(add(NegInf, 1.0.into()).unwrap(), NegInf);
    }

    #[test]
    fn sup_examples() {
        assert_eq!(sup_over([1.0.into(), PosInf, 0.0.into()]), PosInf);
        assert_eq!(sup_over([(-1.0).into(), (-2.0).into()]), ExtReal::Finite(-1.0));
        assert_eq!(sup_over([]), NegInf);
        assert_eq!(inf_over([]), PosInf);
    }

    #[test]
    fn scaling_rules() {
        assert_eq!(PosInf.scale(2.0).unwrap(), PosInf);
        assert_eq!(PosInf.scale(-2.0).unwrap(), NegInf);
        assert_eq!(NegInf.scale(0.0), Err(Error::IndeterminateProduct));
        assert_eq!(ExtReal::Finite(3.0).scale(0.0).unwrap(), ExtReal::ZERO);
    }

    #[test]
    fn order_is_total() {
        assert!(NegInf < ExtReal::Finite(-1e300));
        assert!(ExtReal::Finite(1e300) < PosInf);
        assert_eq!(ExtReal::Finite(-0.0), ExtReal::Finite(0.0));
    }

    #[test]
    fn serde_round_trip_strings() {
        let v = vec![PosInf, NegInf, ExtReal::Finite(0.25)];
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"["inf","-inf",0.25]"#);
        let back: Vec<ExtReal> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn finite_add_is_exact(a in -1e12f64..1e12, b in -1e12f64..1e12) {
                let s = add(a.into(), b.into()).unwrap();
                prop_assert_eq!(s.finite().unwrap().to_bits(), (a + b).to_bits());
            }

            #[test]
            fn sup_is_permutation_invariant(
                mut xs in proptest::collection::vec(
                    prop_oneof![
                        Just(PosInf), Just(NegInf),
                        (-1e6f64..1e6).prop_map(ExtReal::Finite)
                    ],
                    0..20),
                seed in any::<u64>(),
            ) {
                let before = sup_over(xs.iter().copied());
                // cheap deterministic shuffle
                let n = xs.len();
                let mut s = seed;
                for i in (1..n).rev() {
                    s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    xs.swap(i, (s >> 33) as usize % (i + 1));
                }
                prop_assert_eq!(before, sup_over(xs));
            }
        }
    }
}
