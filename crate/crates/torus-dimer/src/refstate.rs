//! Reference tilings with one vertical dimer per block, counting entropy.
//!
//! Rows are grouped in pairs and columns in blocks of length `ell`. In every
//! row pair and every block one slot is chosen freely: slot `j` of block `k`
//! places a vertical dimer at column `k ell + 2j + (k mod 2)`, occupying the
//! pair's lower site as `Up` and upper as `Down`. The parity offset
//! alternates block to block so that every gap between consecutive vertical
//! columns has even length, including the seam gap when the number of blocks
//! is even; the gaps are then tiled by horizontal dimers in their unique
//! phase. Choices are independent, so the family has exactly
//! `(ell/2)^((M/2)(N/ell))` members and an entropy density of
//! `ln(ell/2) / (2 ell ln 2)` bits per site for every torus size.

use crate::config::{DimerConfig, Spin};
use crate::error::{capacity, precondition, Result};
use crate::lattice::{Site, TorusLattice};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy)]
pub struct ReferenceStateFamily {
    lattice: TorusLattice,
    ell: usize,
}

impl ReferenceStateFamily {
    pub fn new(lattice: TorusLattice, ell: usize) -> Result<Self> {
        let (n, m) = (lattice.width(), lattice.height());
        if ell < 2 || ell % 2 != 0 {
            return Err(precondition("refstate", format!("block length must be even and >= 2, got {ell}")));
        }
        if n % ell != 0 {
            return Err(precondition("refstate", format!("block length {ell} must divide the width {n}")));
        }
        if (n / ell) % 2 != 0 {
            return Err(precondition(
                "refstate",
                format!("need an even number of blocks for the seam gap to close, got {}", n / ell),
            ));
        }
        if m % 2 != 0 {
            return Err(precondition("refstate", format!("height must be even, got {m}")));
        }
        Ok(ReferenceStateFamily { lattice, ell })
    }

    pub fn lattice(&self) -> TorusLattice {
        self.lattice
    }

    pub fn block_length(&self) -> usize {
        self.ell
    }

    /// Free slots per block.
    pub fn slots(&self) -> usize {
        self.ell / 2
    }

    /// Row pairs.
    pub fn pairs(&self) -> usize {
        self.lattice.height() / 2
    }

    /// Column blocks.
    pub fn blocks(&self) -> usize {
        self.lattice.width() / self.ell
    }

    /// Number of independent choices, `pairs * blocks`.
    pub fn choice_count(&self) -> usize {
        self.pairs() * self.blocks()
    }

    /// Exact member count `slots^(pairs * blocks)`.
    pub fn count(&self) -> Result<u128> {
        let base = self.slots() as u128;
        let mut total: u128 = 1;
        for _ in 0..self.choice_count() {
            total = total
                .checked_mul(base)
                .ok_or_else(|| capacity("refstate", "member count overflows u128"))?;
        }
        Ok(total)
    }

    /// `ln` of the member count, safe at any size.
    pub fn ln_count<T: Scalar>(&self) -> T {
        T::of(self.choice_count() as f64) * T::of(self.slots() as f64).ln()
    }

    /// Entropy in bits per site, `ln(ell/2) / (2 ell ln 2)`; an identity
    /// independent of the torus dimensions.
    pub fn entropy_density_bits<T: Scalar>(&self) -> T {
        T::of(self.slots() as f64).ln() / (T::of(2.0 * self.ell as f64) * T::of(2.0).ln())
    }

    /// Builds the member for one choice vector, indexed `pair * blocks +
    /// block`, each entry below `slots`.
    pub fn member(&self, choices: &[usize]) -> Result<DimerConfig> {
        if choices.len() != self.choice_count() {
            return Err(precondition(
                "refstate",
                format!("expected {} choices, got {}", self.choice_count(), choices.len()),
            ));
        }
        if let Some(&bad) = choices.iter().find(|&&c| c >= self.slots()) {
            return Err(precondition("refstate", format!("choice {bad} out of range 0..{}", self.slots())));
        }
        let (n, blocks, ell) = (self.lattice.width(), self.blocks(), self.ell);
        // Placeholder labels; every site is overwritten below.
        let mut config = DimerConfig::from_labels(self.lattice, vec![Spin::Up; self.lattice.sites()])?;
        for pair in 0..self.pairs() {
            let (lo, hi) = (2 * pair, 2 * pair + 1);
            let vcols: Vec<usize> = (0..blocks)
                .map(|k| k * ell + 2 * choices[pair * blocks + k] + (k % 2))
                .collect();
            for &p in &vcols {
                config.set_label(Site::new(p, lo), Spin::Up);
                config.set_label(Site::new(p, hi), Spin::Down);
            }
            for k in 0..blocks {
                let start = (vcols[k] + 1) % n;
                let gap = (vcols[(k + 1) % blocks] + n - vcols[k] - 1) % n;
                for i in 0..gap {
                    let col = (start + i) % n;
                    let label = if i % 2 == 0 { Spin::Right } else { Spin::Left };
                    config.set_label(Site::new(col, lo), label);
                    config.set_label(Site::new(col, hi), label);
                }
            }
        }
        Ok(config)
    }

    /// Member by lexicographic index, digits little-endian in the choice
    /// vector; `index` must be below [`ReferenceStateFamily::count`].
    pub fn member_by_index(&self, index: u128) -> Result<DimerConfig> {
        let base = self.slots() as u128;
        let mut rest = index;
        let mut choices = vec![0usize; self.choice_count()];
        for c in choices.iter_mut() {
            *c = (rest % base) as usize;
            rest /= base;
        }
        if rest != 0 {
            return Err(precondition("refstate", format!("member index {index} out of range")));
        }
        self.member(&choices)
    }
}
