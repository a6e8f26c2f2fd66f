//! Serde adapters writing exact rationals as `"num/den"` strings.

use num_rational::BigRational;
use serde::{de, Deserialize, Deserializer, Serializer};

pub fn to_string(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn parse(s: &str) -> Result<BigRational, String> {
    let (n, d) = s.split_once('/').unwrap_or((s, "1"));
    let n = n.trim().parse().map_err(|_| format!("bad numerator in {s:?}"))?;
    let d: num_bigint::BigInt = d.trim().parse().map_err(|_| format!("bad denominator in {s:?}"))?;
    if d == 0.into() {
        return Err(format!("zero denominator in {s:?}"));
    }
    Ok(BigRational::new(n, d))
}

pub fn serialize<S: Serializer>(x: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&to_string(x))
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
    let s = String::deserialize(d)?;
    parse(&s).map_err(de::Error::custom)
}

pub mod vec {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(xs: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(xs.len()))?;
        for x in xs {
            seq.serialize_element(&super::to_string(x))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigRational>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| parse(s).map_err(de::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let x = BigRational::new((-12).into(), 30.into());
        assert_eq!(to_string(&x), "-2/5");
        assert_eq!(parse("-2/5").unwrap(), x);
        assert_eq!(parse("7").unwrap(), BigRational::from_integer(7.into()));
        assert!(parse("1/0").is_err());
    }
}
