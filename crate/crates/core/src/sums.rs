//! Per-node child aggregates with prefix-sum search.
//!
//! Zeros are derived as `size - ones`, so the three views can never drift
//! apart. Search is a linear scan over at most `4a` entries.

/// Which aggregate a descent routes by.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Size,
    Ones,
    Zeros,
}

/// Aggregates consumed by the children to the left of the chosen one.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Prefix {
    pub size: usize,
    pub ones: usize,
}

impl Prefix {
    #[inline]
    pub fn zeros(&self) -> usize {
        self.size - self.ones
    }

    #[inline]
    pub fn get(&self, field: Field) -> usize {
        match field {
            Field::Size => self.size,
            Field::Ones => self.ones,
            Field::Zeros => self.zeros(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PartialSums {
    sizes: Vec<usize>,
    ones: Vec<usize>,
}

impl PartialSums {
    pub fn new() -> PartialSums {
        PartialSums::default()
    }

    pub fn with_capacity(n: usize) -> PartialSums {
        PartialSums {
            sizes: Vec::with_capacity(n),
            ones: Vec::with_capacity(n),
        }
    }

    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    pub fn push(&mut self, size: usize, ones: usize) {
        debug_assert!(ones <= size);
        self.sizes.push(size);
        self.ones.push(ones);
    }

    pub fn insert(&mut self, k: usize, size: usize, ones: usize) {
        debug_assert!(ones <= size);
        self.sizes.insert(k, size);
        self.ones.insert(k, ones);
    }

    pub fn remove(&mut self, k: usize) -> (usize, usize) {
        (self.sizes.remove(k), self.ones.remove(k))
    }

    pub fn set(&mut self, k: usize, size: usize, ones: usize) {
        debug_assert!(ones <= size);
        self.sizes[k] = size;
        self.ones[k] = ones;
    }

    /// Moves entries `at..` into a new set.
    pub fn split_off(&mut self, at: usize) -> PartialSums {
        PartialSums {
            sizes: self.sizes.split_off(at),
            ones: self.ones.split_off(at),
        }
    }

    pub fn append(&mut self, other: &mut PartialSums) {
        self.sizes.append(&mut other.sizes);
        self.ones.append(&mut other.ones);
    }

    #[inline]
    pub fn size(&self, k: usize) -> usize {
        self.sizes[k]
    }

    #[inline]
    pub fn ones(&self, k: usize) -> usize {
        self.ones[k]
    }

    #[inline]
    pub fn zeros(&self, k: usize) -> usize {
        self.sizes[k] - self.ones[k]
    }

    #[inline]
    pub fn get(&self, field: Field, k: usize) -> usize {
        match field {
            Field::Size => self.size(k),
            Field::Ones => self.ones(k),
            Field::Zeros => self.zeros(k),
        }
    }

    pub fn total(&self) -> Prefix {
        Prefix {
            size: self.sizes.iter().sum(),
            ones: self.ones.iter().sum(),
        }
    }

    /// Sum of entries `0..k`.
    pub fn prefix(&self, k: usize) -> Prefix {
        Prefix {
            size: self.sizes[..k].iter().sum(),
            ones: self.ones[..k].iter().sum(),
        }
    }

    /// Finds the minimal `k` whose inclusive prefix of `field` reaches
    /// `target` (≥ 1), together with the aggregates before `k`.
    #[inline]
    pub fn route(&self, field: Field, target: usize) -> Option<(usize, Prefix)> {
        debug_assert!(target >= 1);
        let mut before = Prefix::default();
        for k in 0..self.sizes.len() {
            let s = self.sizes[k];
            let o = self.ones[k];
            let v = match field {
                Field::Size => s,
                Field::Ones => o,
                Field::Zeros => s - o,
            };
            if before.get(field) + v >= target {
                return Some((k, before));
            }
            before.size += s;
            before.ones += o;
        }
        None
    }
}
