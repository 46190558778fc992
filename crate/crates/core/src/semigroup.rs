//! Elements of the commutative semigroup `ℕᵏ` and finite index boxes in it.

use std::fmt;
use std::ops::Add;

use serde::{Deserialize, Serialize};

/// A multi-index of generator exponents; componentwise addition is the semigroup law.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SemigroupElement(pub Vec<u64>);

impl SemigroupElement {
    pub fn identity(k: usize) -> Self {
        SemigroupElement(vec![0; k])
    }

    pub fn uniform(k: usize, value: u64) -> Self {
        SemigroupElement(vec![value; k])
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u64 {
        self.0.iter().sum()
    }

    pub fn exponents(&self) -> &[u64] {
        &self.0
    }
}

impl From<Vec<u64>> for SemigroupElement {
    fn from(v: Vec<u64>) -> Self {
        SemigroupElement(v)
    }
}

impl Add for &SemigroupElement {
    type Output = SemigroupElement;

    fn add(self, rhs: &SemigroupElement) -> SemigroupElement {
        debug_assert_eq!(self.rank(), rhs.rank());
        SemigroupElement(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Add for SemigroupElement {
    type Output = SemigroupElement;

    fn add(self, rhs: SemigroupElement) -> SemigroupElement {
        &self + &rhs
    }
}

impl fmt::Display for SemigroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// The box `offset + {0, …, side−1}ᵏ`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexBox {
    pub offset: SemigroupElement,
    pub side: u64,
}

impl IndexBox {
    pub fn new(offset: SemigroupElement, side: u64) -> Self {
        Self { offset, side }
    }

    /// `{0, …, side−1}ᵏ`
    pub fn origin(k: usize, side: u64) -> Self {
        Self { offset: SemigroupElement::identity(k), side }
    }

    pub fn rank(&self) -> usize {
        self.offset.rank()
    }

    pub fn len(&self) -> usize {
        (self.side as usize).pow(self.rank() as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.side == 0
    }

    pub fn contains(&self, s: &SemigroupElement) -> bool {
        s.rank() == self.rank() && s.0.iter().zip(&self.offset.0).all(|(e, o)| *e >= *o && *e < o + self.side)
    }

    pub fn translate(&self, t: &SemigroupElement) -> IndexBox {
        IndexBox { offset: &self.offset + t, side: self.side }
    }

    /// Row-major position of `s`, generator 0 varying slowest.
    pub fn position(&self, s: &SemigroupElement) -> Option<usize> {
        if !self.contains(s) {
            return None;
        }
        let side = self.side as usize;
        Some(s.0.iter().zip(&self.offset.0).fold(0usize, |acc, (e, o)| acc * side + (e - o) as usize))
    }

    pub fn element_at(&self, mut position: usize) -> SemigroupElement {
        let side = self.side as usize;
        let mut idx = vec![0u64; self.rank()];
        for slot in idx.iter_mut().rev() {
            *slot = (position % side) as u64;
            position /= side;
        }
        SemigroupElement(idx.iter().zip(&self.offset.0).map(|(i, o)| i + o).collect())
    }

    /// Elements in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = SemigroupElement> + '_ {
        (0..self.len()).map(move |p| self.element_at(p))
    }

    /// Elements ordered by total degree, ties broken lexicographically.
    pub fn graded_lex(&self) -> Vec<SemigroupElement> {
        let mut all: Vec<_> = self.iter().collect();
        all.sort_by(|a, b| a.degree().cmp(&b.degree()).then_with(|| a.cmp(b)));
        all
    }
}
