//! Degrees in the representation ring: integer combinations of real
//! irreducibles, keyed by their table labels.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

/// Label of the trivial one-dimensional representation in every table.
pub const TRIVIAL: &str = "1";

/// Finitely supported integer combination of irreducible labels. Zero
/// coefficients are never stored, so structural equality is equality.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RODegree(BTreeMap<String, i64>);

impl RODegree {
    pub fn zero() -> RODegree {
        RODegree(BTreeMap::new())
    }

    pub fn trivial(n: i64) -> RODegree {
        RODegree::term(TRIVIAL, n)
    }

    pub fn term(label: &str, n: i64) -> RODegree {
        let mut d = RODegree::zero();
        d.add_term(label, n);
        d
    }

    pub fn from_terms<'a>(terms: impl IntoIterator<Item = (&'a str, i64)>) -> RODegree {
        let mut d = RODegree::zero();
        for (l, n) in terms {
            d.add_term(l, n);
        }
        d
    }

    pub fn add_term(&mut self, label: &str, n: i64) {
        if n == 0 {
            return;
        }
        let e = self.0.entry(label.to_string()).or_insert(0);
        *e += n;
        if *e == 0 {
            self.0.remove(label);
        }
    }

    pub fn coeff(&self, label: &str) -> i64 {
        self.0.get(label).copied().unwrap_or(0)
    }

    /// Coefficient of the trivial representation.
    pub fn trivial_part(&self) -> i64 {
        self.coeff(TRIVIAL)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// True when some coefficient is negative.
    pub fn is_virtual(&self) -> bool {
        self.0.values().any(|&c| c < 0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&str, i64)> {
        self.0.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(|k| k.as_str())
    }

    /// Applies a linear map given on labels. Labels missing from `images` are
    /// reported back as the error value.
    pub fn map_labels(&self, images: &BTreeMap<String, RODegree>) -> Result<RODegree, String> {
        let mut out = RODegree::zero();
        for (l, c) in self.terms() {
            let img = images.get(l).ok_or_else(|| l.to_string())?;
            out += &(img * c);
        }
        Ok(out)
    }

    /// Exact quotient by an integer when every coefficient is divisible.
    pub fn div_exact(&self, n: i64) -> Option<RODegree> {
        if n == 0 || self.0.values().any(|c| c % n != 0) {
            return None;
        }
        Some(RODegree(
            self.0.iter().map(|(k, v)| (k.clone(), v / n)).collect(),
        ))
    }
}

impl fmt::Display for RODegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        // Trivial part first, then the rest alphabetically.
        let mut terms: Vec<(&str, i64)> = Vec::new();
        if let Some(&c) = self.0.get(TRIVIAL) {
            terms.push((TRIVIAL, c));
        }
        terms.extend(self.terms().filter(|(l, _)| *l != TRIVIAL));
        for (i, (l, c)) in terms.into_iter().enumerate() {
            let mag = c.unsigned_abs();
            if i == 0 {
                if c < 0 {
                    write!(f, "-")?;
                }
            } else if c < 0 {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if l == TRIVIAL {
                write!(f, "{mag}")?;
            } else if mag == 1 {
                write!(f, "{l}")?;
            } else {
                write!(f, "{mag}*{l}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for RODegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RODegree({self})")
    }
}

impl AddAssign<&RODegree> for RODegree {
    fn add_assign(&mut self, rhs: &RODegree) {
        for (l, c) in rhs.terms() {
            self.add_term(l, c);
        }
    }
}

impl SubAssign<&RODegree> for RODegree {
    fn sub_assign(&mut self, rhs: &RODegree) {
        for (l, c) in rhs.terms() {
            self.add_term(l, -c);
        }
    }
}

impl Add<&RODegree> for &RODegree {
    type Output = RODegree;
    fn add(self, rhs: &RODegree) -> RODegree {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub<&RODegree> for &RODegree {
    type Output = RODegree;
    fn sub(self, rhs: &RODegree) -> RODegree {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Add for RODegree {
    type Output = RODegree;
    fn add(mut self, rhs: RODegree) -> RODegree {
        self += &rhs;
        self
    }
}

impl Sub for RODegree {
    type Output = RODegree;
    fn sub(mut self, rhs: RODegree) -> RODegree {
        self -= &rhs;
        self
    }
}

impl Neg for &RODegree {
    type Output = RODegree;
    fn neg(self) -> RODegree {
        self * -1
    }
}

impl Neg for RODegree {
    type Output = RODegree;
    fn neg(self) -> RODegree {
        &self * -1
    }
}

impl Mul<i64> for &RODegree {
    type Output = RODegree;
    fn mul(self, n: i64) -> RODegree {
        if n == 0 {
            return RODegree::zero();
        }
        RODegree(self.0.iter().map(|(k, v)| (k.clone(), v * n)).collect())
    }
}

impl Mul<i64> for RODegree {
    type Output = RODegree;
    fn mul(self, n: i64) -> RODegree {
        &self * n
    }
}
