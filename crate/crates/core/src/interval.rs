use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::rational::{render, Rational};

/// Closed interval `[center - radius, center + radius]` with exact endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundedValue {
    pub center: Rational,
    pub radius: Rational,
}

impl BoundedValue {
    pub fn new(center: Rational, radius: Rational) -> Self {
        assert!(!radius.is_negative(), "radius must be non-negative");
        Self { center, radius }
    }

    pub fn exact(center: Rational) -> Self {
        Self { center, radius: Rational::zero() }
    }

    pub fn is_exact(&self) -> bool {
        self.radius.is_zero()
    }

    pub fn lo(&self) -> Rational {
        &self.center - &self.radius
    }

    pub fn hi(&self) -> Rational {
        &self.center + &self.radius
    }

    pub fn contains(&self, x: &Rational) -> bool {
        (x - &self.center).abs() <= self.radius
    }

    pub fn overlaps(&self, other: &Self) -> bool {
        (&self.center - &other.center).abs() <= &self.radius + &other.radius
    }

    /// `other ⊆ self`.
    pub fn encloses(&self, other: &Self) -> bool {
        self.lo() <= other.lo() && other.hi() <= self.hi()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self { center: &self.center * c, radius: &self.radius * c.abs() }
    }

    pub fn shift(&self, c: &Rational) -> Self {
        Self { center: &self.center + c, radius: self.radius.clone() }
    }
}

impl Add for &BoundedValue {
    type Output = BoundedValue;
    fn add(self, o: &BoundedValue) -> BoundedValue {
        BoundedValue { center: &self.center + &o.center, radius: &self.radius + &o.radius }
    }
}

impl Sub for &BoundedValue {
    type Output = BoundedValue;
    fn sub(self, o: &BoundedValue) -> BoundedValue {
        BoundedValue { center: &self.center - &o.center, radius: &self.radius + &o.radius }
    }
}

impl Neg for &BoundedValue {
    type Output = BoundedValue;
    fn neg(self) -> BoundedValue {
        BoundedValue { center: -&self.center, radius: self.radius.clone() }
    }
}

impl fmt::Display for BoundedValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ± {}", render(&self.center), render(&self.radius))
    }
}

impl Serialize for BoundedValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("BoundedValue", 2)?;
        st.serialize_field("center", &render(&self.center))?;
        st.serialize_field("radius", &render(&self.radius))?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;

    #[test]
    fn arithmetic_widens() {
        let a = BoundedValue::new(frac(1, 2), frac(1, 10));
        let b = BoundedValue::new(frac(1, 3), frac(1, 20));
        let d = &a - &b;
        assert_eq!(d.center, frac(1, 6));
        assert_eq!(d.radius, frac(3, 20));
        assert!(d.contains(&frac(1, 6)));
        assert!(d.contains(&d.hi()));
        assert!(!d.contains(&frac(1, 1)));
        assert_eq!((-&a).lo(), frac(-6, 10));
        assert_eq!(a.scale(&frac(-2, 1)).radius, frac(1, 5));
    }

    #[test]
    fn overlap_and_enclosure() {
        let a = BoundedValue::new(frac(0, 1), frac(1, 2));
        let b = BoundedValue::new(frac(1, 1), frac(1, 2));
        assert!(a.overlaps(&b));
        assert!(!a.overlaps(&b.shift(&frac(1, 100))));
        assert!(a.encloses(&BoundedValue::exact(frac(1, 4))));
        assert!(!BoundedValue::exact(frac(1, 4)).encloses(&a));
        let json = serde_json::to_string(&a).unwrap();
        assert_eq!(json, r#"{"center":"0/1","radius":"1/2"}"#);
    }
}
