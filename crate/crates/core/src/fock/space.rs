use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-mode truncation of a tensor-product Fock space.
///
/// Flat indices are row-major with mode 0 varying slowest, so for dims
/// `[d0, d1, d2]` the occupation `(n0, n1, n2)` lives at `(n0*d1 + n1)*d2 + n2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct SpaceDescriptor {
    dims: Vec<usize>,
}

impl SpaceDescriptor {
    pub fn new(dims: &[usize]) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidSpace("at least one mode is required".into()));
        }
        if let Some((mode, &d)) = dims.iter().enumerate().find(|(_, &d)| d < 2) {
            return Err(Error::InvalidSpace(format!(
                "mode {mode} has dimension {d}; every mode needs at least 2 levels"
            )));
        }
        dims.iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::InvalidSpace("total dimension overflows".into()))?;
        Ok(Self { dims: dims.to_vec() })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn n_modes(&self) -> usize {
        self.dims.len()
    }

    pub fn dim(&self, mode: usize) -> usize {
        self.dims[mode]
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// Distance in the flat index between neighbouring occupations of `mode`.
    pub fn stride(&self, mode: usize) -> usize {
        self.dims[mode + 1..].iter().product()
    }

    pub fn check_mode(&self, mode: usize) -> Result<()> {
        if mode < self.dims.len() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                what: "mode",
                index: mode,
                limit: self.dims.len(),
            })
        }
    }

    pub fn flat_index(&self, occupation: &[usize]) -> Result<usize> {
        if occupation.len() != self.dims.len() {
            return Err(Error::Contract(format!(
                "occupation has {} entries for a {}-mode space",
                occupation.len(),
                self.dims.len()
            )));
        }
        let mut idx = 0;
        for (&n, &d) in occupation.iter().zip(&self.dims) {
            if n >= d {
                return Err(Error::IndexOutOfRange {
                    what: "occupation",
                    index: n,
                    limit: d,
                });
            }
            idx = idx * d + n;
        }
        Ok(idx)
    }

    pub fn occupation(&self, mut flat: usize) -> Vec<usize> {
        let mut occ = vec![0; self.dims.len()];
        for (o, &d) in occ.iter_mut().zip(&self.dims).rev() {
            *o = flat % d;
            flat /= d;
        }
        occ
    }

    /// Occupation of a single mode at a flat index.
    pub fn occupation_of(&self, flat: usize, mode: usize) -> usize {
        (flat / self.stride(mode)) % self.dims[mode]
    }

    /// The space spanned by a subset of modes, in ascending mode order.
    pub fn subspace(&self, modes: &[usize]) -> Result<Self> {
        let dims: Vec<usize> = modes.iter().map(|&m| self.dims[m]).collect();
        Self::new(&dims)
    }
}

impl TryFrom<Vec<usize>> for SpaceDescriptor {
    type Error = Error;

    fn try_from(dims: Vec<usize>) -> Result<Self> {
        Self::new(&dims)
    }
}

impl From<SpaceDescriptor> for Vec<usize> {
    fn from(s: SpaceDescriptor) -> Self {
        s.dims
    }
}

pub fn make_space(dims: &[usize]) -> Result<SpaceDescriptor> {
    SpaceDescriptor::new(dims)
}
