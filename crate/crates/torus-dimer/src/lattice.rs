//! Discrete torus `Z_N x Z_M` with an even number of columns.
//!
//! Sites are addressed as `(x, y)` with `x` the column and `y` the row; both
//! wrap. Row index increases upward, so "up" from `(x, y)` is `(x, y+1 mod M)`.
//! Reflections act across cell boundaries (half-integer cut lines), which is
//! what the reflection bounds in `events` need: reflecting twice across the
//! same cut is the identity.

use crate::error::{precondition, Result};

/// One torus site, stored with coordinates already reduced mod `(N, M)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Site {
    pub x: usize,
    pub y: usize,
}

impl Site {
    pub fn new(x: usize, y: usize) -> Self {
        Site { x, y }
    }
}

/// Direction a reflection moves sites in. `Horizontal` mirrors columns across
/// a vertical cut line; `Vertical` mirrors rows across a horizontal cut line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReflectionAxis {
    Horizontal,
    Vertical,
}

/// Reflection across the cell boundary just below/left of index `position`:
/// a horizontal map with `position = b` mirrors across the line `x = b - 1/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReflectionMap {
    pub axis: ReflectionAxis,
    pub position: usize,
}

/// The `N x M` torus; `N` must be even (odd `N` admits no dimer cover).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TorusLattice {
    n: usize,
    m: usize,
}

impl TorusLattice {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(precondition("lattice", "N and M must be at least 1"));
        }
        if n % 2 != 0 {
            return Err(precondition(
                "lattice",
                format!("N must be even, got {n}"),
            ));
        }
        Ok(TorusLattice { n, m })
    }

    /// Skips the evenness check; used by oracles that probe impossible geometries.
    pub fn new_unchecked(n: usize, m: usize) -> Self {
        assert!(n > 0 && m > 0, "lattice: N and M must be at least 1");
        TorusLattice { n, m }
    }

    pub fn width(&self) -> usize {
        self.n
    }

    pub fn height(&self) -> usize {
        self.m
    }

    pub fn sites(&self) -> usize {
        self.n * self.m
    }

    /// Reduce arbitrary integer coordinates onto the torus.
    pub fn wrap(&self, x: i64, y: i64) -> Site {
        Site {
            x: x.rem_euclid(self.n as i64) as usize,
            y: y.rem_euclid(self.m as i64) as usize,
        }
    }

    /// Row-major index, row `y = 0` first.
    pub fn index(&self, s: Site) -> usize {
        debug_assert!(s.x < self.n && s.y < self.m);
        s.y * self.n + s.x
    }

    pub fn site(&self, index: usize) -> Site {
        debug_assert!(index < self.sites());
        Site {
            x: index % self.n,
            y: index / self.n,
        }
    }

    /// Neighbors in the fixed order (right, left, up, down). On `N = 2` or
    /// `M = 1` some entries coincide; callers that branch over covers rely on
    /// this order being stable.
    pub fn neighbors(&self, s: Site) -> [Site; 4] {
        let (x, y) = (s.x as i64, s.y as i64);
        [
            self.wrap(x + 1, y),
            self.wrap(x - 1, y),
            self.wrap(x, y + 1),
            self.wrap(x, y - 1),
        ]
    }

    /// Image of `s` under a cell-boundary reflection.
    pub fn reflect_site(&self, map: ReflectionMap, s: Site) -> Result<Site> {
        let bound = match map.axis {
            ReflectionAxis::Horizontal => self.n,
            ReflectionAxis::Vertical => self.m,
        };
        if map.position >= bound {
            return Err(precondition(
                "lattice",
                format!("reflection position {} out of range 0..{bound}", map.position),
            ));
        }
        let b = map.position as i64;
        Ok(match map.axis {
            ReflectionAxis::Horizontal => self.wrap(2 * b - 1 - s.x as i64, s.y as i64),
            ReflectionAxis::Vertical => self.wrap(s.x as i64, 2 * b - 1 - s.y as i64),
        })
    }
}
