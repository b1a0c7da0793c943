use rand::Rng;

use crate::graph::{Color, Palette};

/// The current palette Ψ(v): an initial palette with some colors removed.
#[derive(Clone, Debug)]
pub struct LivePalette {
    base: Palette,
    alive: Vec<u64>,
    count: usize,
}

impl LivePalette {
    pub fn new(base: Palette) -> LivePalette {
        let len = base.len();
        let mut alive = vec![u64::MAX; len.div_ceil(64)];
        if !len.is_multiple_of(64) {
            *alive.last_mut().unwrap() = (1u64 << (len % 64)) - 1;
        }
        LivePalette { base, alive, count: len }
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn base(&self) -> &Palette {
        &self.base
    }

    fn is_alive(&self, pos: usize) -> bool {
        self.alive[pos / 64] >> (pos % 64) & 1 == 1
    }

    pub fn contains(&self, c: Color) -> bool {
        self.base.position(c).is_some_and(|p| self.is_alive(p))
    }

    /// Removes `c`; returns whether it was present.
    pub fn remove(&mut self, c: Color) -> bool {
        match self.base.position(c) {
            Some(p) if self.is_alive(p) => {
                self.alive[p / 64] &= !(1 << (p % 64));
                self.count -= 1;
                true
            }
            _ => false,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = Color> + '_ {
        self.alive.iter().enumerate().flat_map(move |(wi, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let p = wi * 64 + bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(p)
            })
            .map(move |p| self.base.color_at(p))
        })
    }

    /// The `k`-th alive color in palette order.
    pub fn nth(&self, mut k: usize) -> Option<Color> {
        for (wi, &w) in self.alive.iter().enumerate() {
            let c = w.count_ones() as usize;
            if k < c {
                let mut bits = w;
                for _ in 0..k {
                    bits &= bits - 1;
                }
                return Some(self.base.color_at(wi * 64 + bits.trailing_zeros() as usize));
            }
            k -= c;
        }
        None
    }

    /// A uniformly random alive color.
    pub fn sample(&self, rng: &mut impl Rng) -> Option<Color> {
        if self.count == 0 {
            return None;
        }
        if self.count * 4 >= self.base.len() {
            loop {
                let p = rng.gen_range(0..self.base.len());
                if self.is_alive(p) {
                    return Some(self.base.color_at(p));
                }
            }
        }
        self.nth(rng.gen_range(0..self.count))
    }
}
