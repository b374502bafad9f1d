use std::fmt;

use crate::error::{Error, Result};

/// A non-empty set of relay antennas that forward information (with power
/// splitting). The remaining antennas harvest energy only.
///
/// Indices are zero-based and kept sorted without duplicates, so two sets
/// with the same members always compare equal. [`fmt::Display`] prints the
/// one-based labels used in reports, e.g. `{1, 3}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AntennaSet {
    indices: Vec<usize>,
}

impl AntennaSet {
    /// Builds a set from zero-based indices. Order of the input does not matter.
    pub fn new(indices: impl IntoIterator<Item = usize>, n_antennas: usize) -> Result<Self> {
        let mut indices: Vec<usize> = indices.into_iter().collect();
        if indices.is_empty() {
            return Err(Error::EmptyAntennaSet);
        }
        indices.sort_unstable();
        for w in indices.windows(2) {
            if w[0] == w[1] {
                return Err(Error::DuplicateAntenna(w[0]));
            }
        }
        if let Some(&last) = indices.last() {
            if last >= n_antennas {
                return Err(Error::AntennaOutOfRange {
                    index: last,
                    n_antennas,
                });
            }
        }
        Ok(Self { indices })
    }

    /// Builds a set from one-based antenna labels.
    pub fn from_labels(labels: &[usize], n_antennas: usize) -> Result<Self> {
        if let Some(&bad) = labels.iter().find(|&&l| l == 0) {
            return Err(Error::AntennaOutOfRange {
                index: bad,
                n_antennas,
            });
        }
        Self::new(labels.iter().map(|l| l - 1), n_antennas)
    }

    pub fn full(n_antennas: usize) -> Result<Self> {
        Self::new(0..n_antennas, n_antennas)
    }

    /// Bit `i` of `mask` selects antenna `i`.
    pub fn from_mask(mask: u64, n_antennas: usize) -> Result<Self> {
        if n_antennas < 64 && mask >> n_antennas != 0 {
            return Err(Error::AntennaOutOfRange {
                index: 63 - mask.leading_zeros() as usize,
                n_antennas,
            });
        }
        Self::new((0..64).filter(|i| mask >> i & 1 == 1), n_antennas)
    }

    pub fn mask(&self) -> u64 {
        self.indices.iter().fold(0, |m, &i| m | 1 << i)
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn labels(&self) -> Vec<usize> {
        self.indices.iter().map(|i| i + 1).collect()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    /// Always false; kept for API symmetry with collections.
    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.binary_search(&index).is_ok()
    }

    /// Returns a new set with `index` added.
    pub fn with(&self, index: usize) -> Self {
        let mut indices = self.indices.clone();
        if let Err(pos) = indices.binary_search(&index) {
            indices.insert(pos, index);
        }
        Self { indices }
    }

    pub(crate) fn max_index(&self) -> usize {
        *self.indices.last().expect("antenna sets are non-empty")
    }
}

impl fmt::Display for AntennaSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, i) in self.indices.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}", i + 1)?;
        }
        f.write_str("}")
    }
}
