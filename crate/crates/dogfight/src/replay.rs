//! FIFO replay memory over stacked-observation transitions.

use rand::Rng;

use crate::env::Transition;

#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    ring: Vec<Transition>,
    next: usize,
    len: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self { capacity, ring: Vec::with_capacity(capacity), next: 0, len: 0 }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Insert one transition, evicting the oldest once full.
    pub fn push(&mut self, t: Transition) {
        if self.ring.len() < self.capacity {
            self.ring.push(t);
        } else {
            self.ring[self.next] = t;
        }
        self.next = (self.next + 1) % self.capacity;
        self.len = self.ring.len();
    }

    /// Uniform sample of `k` distinct transitions (without replacement).
    pub fn sample<'a, R: Rng>(&'a self, k: usize, rng: &mut R) -> Vec<&'a Transition> {
        assert!(k <= self.len, "cannot sample {k} from {}", self.len);
        // Partial Fisher-Yates over an index vector.
        let mut idx: Vec<usize> = (0..self.len).collect();
        for i in 0..k {
            let j = rng.gen_range(i..self.len);
            idx.swap(i, j);
        }
        idx[..k].iter().map(|&i| &self.ring[i]).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.ring.iter()
    }
}
