use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Axis, MaskedMatrix};
use crate::error::{Error, Result};

/// A permutation of `0..len`. `forward[i]` is the original index placed at
/// position `i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    forward: Vec<usize>,
    inverse: Vec<usize>,
}

impl Permutation {
    pub fn new(forward: Vec<usize>) -> Result<Self> {
        let n = forward.len();
        let mut inverse = vec![usize::MAX; n];
        for (pos, &src) in forward.iter().enumerate() {
            if src >= n {
                return Err(Error::InvalidPermutation(format!(
                    "index {src} out of range for length {n}"
                )));
            }
            if inverse[src] != usize::MAX {
                return Err(Error::InvalidPermutation(format!("index {src} repeated")));
            }
            inverse[src] = pos;
        }
        Ok(Self { forward, inverse })
    }

    pub fn identity(n: usize) -> Self {
        let forward: Vec<usize> = (0..n).collect();
        Self {
            inverse: forward.clone(),
            forward,
        }
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut forward: Vec<usize> = (0..n).collect();
        forward.shuffle(rng);
        Self::new(forward).expect("shuffle yields a permutation")
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.forward.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    #[inline]
    pub fn forward(&self) -> &[usize] {
        &self.forward
    }

    #[inline]
    pub fn inverse(&self) -> &[usize] {
        &self.inverse
    }

    pub fn inverted(&self) -> Self {
        Self {
            forward: self.inverse.clone(),
            inverse: self.forward.clone(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.forward.iter().enumerate().all(|(i, &p)| i == p)
    }

    pub(crate) fn check_len(&self, expected: usize, what: &str) -> Result<()> {
        if self.len() != expected {
            return Err(Error::InvalidPermutation(format!(
                "permutation of length {} applied to {expected} {what}",
                self.len()
            )));
        }
        Ok(())
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;

    fn try_from(forward: Vec<usize>) -> Result<Self> {
        Self::new(forward)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.forward
    }
}

/// Orders rows (or columns) ascending by their minimum over given entries.
/// Ties keep the original order.
pub fn sort_perm_by_min(m: &MaskedMatrix, axis: Axis) -> Permutation {
    let minima = m.given_minima(axis);
    let mut forward: Vec<usize> = (0..minima.len()).collect();
    // sort_by is stable
    forward.sort_by(|&a, &b| minima[a].total_cmp(&minima[b]));
    Permutation::new(forward).expect("sorted indices form a permutation")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::masked::Matrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn forward_and_inverse_compose_to_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = Permutation::random(17, &mut rng);
        for i in 0..17 {
            assert_eq!(p.forward()[p.inverse()[i]], i);
            assert_eq!(p.inverse()[p.forward()[i]], i);
        }
    }

    #[test]
    fn rejects_invalid_indices() {
        assert!(Permutation::new(vec![0, 0]).is_err());
        assert!(Permutation::new(vec![0, 2]).is_err());
    }

    #[test]
    fn sorts_rows_by_minimum() {
        let m = MaskedMatrix::full(Matrix::from_rows(&[[3.0, 9.0], [1.0, 7.0], [2.0, 5.0]]).unwrap()).unwrap();
        assert_eq!(sort_perm_by_min(&m, Axis::Rows).forward(), &[1, 2, 0]);
    }

    #[test]
    fn equal_minima_keep_original_order() {
        let m = MaskedMatrix::full(Matrix::from_rows(&[[1.0, 4.0], [1.0, 2.0], [0.0, 1.0]]).unwrap()).unwrap();
        assert_eq!(sort_perm_by_min(&m, Axis::Rows).forward(), &[2, 0, 1]);
    }

    #[test]
    fn minima_ignore_masked_entries() {
        // Unmasked minima by column are [0, 1, 2] (identity order). With the
        // zeros hidden the given minima become [5, 1, 2].
        let values = Matrix::from_rows(&[[0.0, 1.0, 2.0], [5.0, 6.0, 7.0], [8.0, 9.0, 9.5]]).unwrap();
        let full = MaskedMatrix::full(values.clone()).unwrap();
        assert_eq!(sort_perm_by_min(&full, Axis::Cols).forward(), &[0, 1, 2]);

        let mut mask = vec![true; 9];
        mask[0] = false;
        let masked = MaskedMatrix::new(values, mask).unwrap();

        // oracle: scan only given entries by hand
        let mut oracle: Vec<(f64, usize)> = (0..3)
            .map(|j| {
                let min = (0..3).filter_map(|i| masked.get(i, j)).fold(f64::INFINITY, f64::min);
                (min, j)
            })
            .collect();
        oracle.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let expected: Vec<usize> = oracle.into_iter().map(|(_, j)| j).collect();
        assert_eq!(expected, vec![1, 2, 0]);
        assert_eq!(sort_perm_by_min(&masked, Axis::Cols).forward(), expected.as_slice());
    }

    #[test]
    fn serde_round_trip_validates() {
        let p = Permutation::new(vec![2, 0, 1]).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, "[2,0,1]");
        let back: Permutation = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_str::<Permutation>("[1,1]").is_err());
    }
}
