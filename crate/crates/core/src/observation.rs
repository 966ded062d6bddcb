//! Observations in R^d and the strict all-coordinate order.

use crate::error::{Error, Result};

/// A point in R^d with finite coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    coords: Vec<f64>,
}

impl Observation {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        check_coords(&coords)?;
        Ok(Observation { coords })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    #[inline]
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// True iff `other` strictly exceeds `self` in every coordinate.
    pub fn dominated_by(&self, other: &Observation) -> Result<bool> {
        dominates(self, other)
    }
}

impl TryFrom<Vec<f64>> for Observation {
    type Error = Error;

    fn try_from(coords: Vec<f64>) -> Result<Self> {
        Observation::new(coords)
    }
}

pub(crate) fn check_coords(coords: &[f64]) -> Result<()> {
    if coords.is_empty() {
        return Err(Error::EmptyObservation);
    }
    if let Some((index, &value)) = coords.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite { index, value });
    }
    Ok(())
}

/// Strict all-coordinate order: returns true iff `y_i > x_i` for every `i`.
///
/// Any tie or reversal in a single coordinate yields false, so the relation
/// is a strict partial order once `d >= 2`.
pub fn dominates(x: &Observation, y: &Observation) -> Result<bool> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            got: y.dim(),
        });
    }
    Ok(strictly_below(x.coords(), y.coords()))
}

/// Unchecked form of [`dominates`] over raw slices of equal length.
#[inline]
pub(crate) fn strictly_below(x: &[f64], y: &[f64]) -> bool {
    x.iter().zip(y).all(|(a, b)| b > a)
}

/// An ordered sequence of `n >= 1` observations sharing one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    observations: Vec<Observation>,
}

impl Path {
    pub fn new(observations: Vec<Observation>) -> Result<Self> {
        let first = observations.first().ok_or(Error::EmptyPath)?;
        let d = first.dim();
        if let Some(bad) = observations.iter().find(|o| o.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: bad.dim(),
            });
        }
        Ok(Path { observations })
    }

    /// Builds a path from raw rows, validating every coordinate.
    pub fn from_rows<I, R>(rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = R>,
        R: Into<Vec<f64>>,
    {
        let observations = rows
            .into_iter()
            .map(|r| Observation::new(r.into()))
            .collect::<Result<Vec<_>>>()?;
        Path::new(observations)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.observations.len()
    }

    /// Always false; a path holds at least one observation.
    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.observations[0].dim()
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    /// 1-based access, matching the index convention used throughout.
    pub fn get(&self, index: usize) -> Option<&Observation> {
        index.checked_sub(1).and_then(|i| self.observations.get(i))
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Observation> {
        self.observations.iter()
    }
}

impl<'a> IntoIterator for &'a Path {
    type Item = &'a Observation;
    type IntoIter = std::slice::Iter<'a, Observation>;

    fn into_iter(self) -> Self::IntoIter {
        self.observations.iter()
    }
}
