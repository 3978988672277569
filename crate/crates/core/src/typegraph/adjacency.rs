use std::io::{self, Write};

/// Binary entity × descriptor co-occurrence matrix, grown by observing pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Adjacency {
    n_entities: usize,
    n_descriptors: usize,
    words_per_row: usize,
    bits: Vec<u64>,
}

impl Adjacency {
    pub fn new(n_entities: usize, n_descriptors: usize) -> Self {
        let words_per_row = n_descriptors.div_ceil(64);
        Self {
            n_entities,
            n_descriptors,
            words_per_row,
            bits: vec![0; n_entities * words_per_row],
        }
    }

    pub fn n_entities(&self) -> usize {
        self.n_entities
    }

    pub fn n_descriptors(&self) -> usize {
        self.n_descriptors
    }

    pub fn observe(&mut self, e: u32, k: u32) {
        let (w, b) = self.slot(e, k);
        self.bits[w] |= 1 << b;
    }

    pub fn get(&self, e: u32, k: u32) -> bool {
        let (w, b) = self.slot(e, k);
        self.bits[w] >> b & 1 == 1
    }

    fn slot(&self, e: u32, k: u32) -> (usize, u32) {
        assert!(
            (e as usize) < self.n_entities && (k as usize) < self.n_descriptors,
            "pair ({e}, {k}) out of range"
        );
        (e as usize * self.words_per_row + k as usize / 64, k % 64)
    }

    /// Number of observed pairs.
    pub fn count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Observed descriptors of entity `e`, ascending.
    pub fn row(&self, e: u32) -> Vec<u32> {
        let base = e as usize * self.words_per_row;
        let mut out = Vec::new();
        for (wi, &w) in self.bits[base..base + self.words_per_row]
            .iter()
            .enumerate()
        {
            let mut w = w;
            while w != 0 {
                out.push((wi * 64) as u32 + w.trailing_zeros());
                w &= w - 1;
            }
        }
        out
    }

    /// Every pair observed here is also observed in `other`.
    pub fn is_subset_of(&self, other: &Adjacency) -> bool {
        self.n_entities == other.n_entities
            && self.n_descriptors == other.n_descriptors
            && self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }

    /// Merges another matrix of the same shape into this one.
    pub fn union_with(&mut self, other: &Adjacency) {
        assert_eq!(
            (self.n_entities, self.n_descriptors),
            (other.n_entities, other.n_descriptors)
        );
        self.bits
            .iter_mut()
            .zip(&other.bits)
            .for_each(|(a, b)| *a |= b);
    }

    /// Edge-list CSV with header `entity,descriptor`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "entity,descriptor")?;
        for e in 0..self.n_entities as u32 {
            for k in self.row(e) {
                writeln!(w, "{e},{k}")?;
            }
        }
        Ok(())
    }
}
