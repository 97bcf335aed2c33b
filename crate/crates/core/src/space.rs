//! Enumeration of total assignments over finite domains, and bitsets indexed
//! by assignment position.

/// The cross product of a list of domain sizes, enumerated in mixed radix
/// order (the first variable is the most significant digit).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssignmentSpace {
    sizes: Vec<u32>,
    len: usize,
}

impl AssignmentSpace {
    pub fn new(sizes: Vec<u32>) -> Self {
        let len = sizes.iter().map(|&s| s as usize).product();
        Self { sizes, len }
    }

    pub fn sizes(&self) -> &[u32] {
        &self.sizes
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn index_of(&self, values: &[u32]) -> usize {
        values
            .iter()
            .zip(&self.sizes)
            .fold(0usize, |acc, (&v, &s)| acc * s as usize + v as usize)
    }

    pub fn decode(&self, mut index: usize) -> Vec<u32> {
        let mut out = vec![0; self.sizes.len()];
        for (slot, &size) in out.iter_mut().zip(&self.sizes).rev() {
            *slot = (index % size as usize) as u32;
            index /= size as usize;
        }
        out
    }

    pub fn iter(&self) -> SpaceIter<'_> {
        SpaceIter {
            sizes: &self.sizes,
            next: if self.len == 0 {
                None
            } else {
                Some(vec![0; self.sizes.len()])
            },
        }
    }
}

pub struct SpaceIter<'a> {
    sizes: &'a [u32],
    next: Option<Vec<u32>>,
}

impl Iterator for SpaceIter<'_> {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut carry = true;
        for (digit, &size) in succ.iter_mut().zip(self.sizes).rev() {
            *digit += 1;
            if *digit < size {
                carry = false;
                break;
            }
            *digit = 0;
        }
        if !carry {
            self.next = Some(succ);
        }
        Some(current)
    }
}

/// Fixed-size bitset over assignment indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitSet {
    words: Vec<u64>,
    len: usize,
}

impl BitSet {
    pub fn empty(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn full(len: usize) -> Self {
        let mut s = Self {
            words: vec![u64::MAX; len.div_ceil(64)],
            len,
        };
        s.trim();
        s
    }

    fn trim(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn none(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn and_with(&mut self, other: &BitSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn or_with(&mut self, other: &BitSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn negate(&mut self) {
        for w in &mut self.words {
            *w = !*w;
        }
        self.trim();
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.get(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerates_in_mixed_radix_order() {
        let space = AssignmentSpace::new(vec![2, 3]);
        let all: Vec<_> = space.iter().collect();
        assert_eq!(all.len(), 6);
        assert_eq!(all[0], vec![0, 0]);
        assert_eq!(all[1], vec![0, 1]);
        assert_eq!(all[5], vec![1, 2]);
        for (i, a) in all.iter().enumerate() {
            assert_eq!(space.index_of(a), i);
            assert_eq!(&space.decode(i), a);
        }
    }

    #[test]
    fn empty_domain_yields_nothing() {
        assert_eq!(AssignmentSpace::new(vec![2, 0]).iter().count(), 0);
    }

    #[test]
    fn bitset_ops() {
        let mut a = BitSet::full(70);
        assert_eq!(a.count(), 70);
        a.negate();
        assert!(a.none());
        a.set(3);
        a.set(69);
        let mut b = BitSet::empty(70);
        b.set(69);
        a.and_with(&b);
        assert_eq!(a.ones().collect::<Vec<_>>(), vec![69]);
    }
}
