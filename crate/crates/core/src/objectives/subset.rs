use std::fmt;

/// A subset of the ground set `{0, .., n-1}` stored as a packed bitset.
///
/// Ground sets up to 64 elements occupy a single word, which is what the exact
/// enumeration paths (capped at 25 elements) rely on.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Subset {
    n: usize,
    words: Vec<u64>,
}

impl Subset {
    pub fn empty(n: usize) -> Self {
        Subset { n, words: vec![0; n.div_ceil(64).max(1)] }
    }

    pub fn full(n: usize) -> Self {
        let mut s = Subset::empty(n);
        for i in 0..n {
            s.insert(i);
        }
        s
    }

    /// Builds a subset of a ground set with `n <= 64` elements from a bitmask.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        assert!(n <= 64, "bitmask subsets hold at most 64 elements");
        let mask = if n == 64 { mask } else { mask & ((1u64 << n) - 1) };
        let mut s = Subset::empty(n);
        s.words[0] = mask;
        s
    }

    pub fn from_indices(n: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Subset::empty(n);
        for i in indices {
            s.insert(i);
        }
        s
    }

    /// Indicator vector of the subset.
    pub fn indicator(&self) -> Vec<f64> {
        (0..self.n).map(|i| if self.contains(i) { 1.0 } else { 0.0 }).collect()
    }

    /// Low word of the bitset; the full set when `n <= 64`.
    pub fn mask(&self) -> u64 {
        self.words[0]
    }

    pub fn ground_size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        i < self.n && self.words[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, i: usize) {
        assert!(i < self.n, "element {i} outside ground set of size {}", self.n);
        self.words[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    pub fn remove(&mut self, i: usize) {
        if i < self.n {
            self.words[i / 64] &= !(1 << (i % 64));
        }
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_subset_of(&self, other: &Subset) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn union(&self, other: &Subset) -> Subset {
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a | b).collect();
        Subset { n: self.n, words }
    }

    pub fn intersection(&self, other: &Subset) -> Subset {
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect();
        Subset { n: self.n, words }
    }

    /// Members in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + b)
            })
        })
    }

    /// Draws `S` with each `i` included independently with probability `x[i]`.
    pub fn sample<R: rand::Rng + ?Sized>(x: &[f64], rng: &mut R) -> Subset {
        let mut s = Subset::empty(x.len());
        s.resample(x, rng);
        s
    }

    /// In-place version of [`Subset::sample`]; reuses the allocation.
    pub fn resample<R: rand::Rng + ?Sized>(&mut self, x: &[f64], rng: &mut R) {
        debug_assert_eq!(x.len(), self.n);
        self.words.iter_mut().for_each(|w| *w = 0);
        for (i, &p) in x.iter().enumerate() {
            if rng.gen::<f64>() < p {
                self.words[i / 64] |= 1 << (i % 64);
            }
        }
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insert_remove_iter() {
        let mut s = Subset::empty(130);
        for i in [0, 63, 64, 129] {
            s.insert(i);
        }
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![0, 63, 64, 129]);
        assert_eq!(s.len(), 4);
        s.remove(64);
        assert!(!s.contains(64));
        assert!(s.contains(129));
        assert!(!s.contains(500));
    }

    #[test]
    fn mask_roundtrip_and_lattice_ops() {
        let a = Subset::from_mask(5, 0b00111);
        let b = Subset::from_mask(5, 0b01100);
        assert_eq!(a.union(&b).mask(), 0b01111);
        assert_eq!(a.intersection(&b).mask(), 0b00100);
        assert!(a.intersection(&b).is_subset_of(&a));
        assert_eq!(Subset::full(5).mask(), 0b11111);
        assert_eq!(Subset::from_mask(3, u64::MAX).len(), 3);
    }
}
