//! Dimer configurations as site labelings, plus exhaustive enumeration.
//!
//! A configuration assigns every site one of four labels pointing at its
//! dimer partner: `Up` pairs `(x, y)` with `(x, y+1)`, `Down` with `(x, y-1)`,
//! `Right` with `(x+1, y)`, `Left` with `(x-1, y)`, all mod the torus. A
//! labeling is valid when every site's partner points back, which makes the
//! dimers a perfect matching. The weight of a configuration at fugacity `z`
//! is `z^V` with `V` the number of `Up` sites (one per vertical dimer).
//!
//! Enumeration walks sites in raster order and branches over the (at most
//! four) ways to cover the first uncovered site, so each labeled
//! configuration is produced exactly once, in a deterministic order. On thin
//! tori (`N = 2` or `M = 2`) the two parallel edges between a site pair give
//! two distinct labelings, which is the convention the exact methods match.

use crate::error::{capacity, precondition, Error, Result};
use crate::lattice::{Site, TorusLattice};
use crate::scalar::Scalar;

/// Direction from a site toward its dimer partner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Spin {
    Up = 0,
    Down = 1,
    Left = 2,
    Right = 3,
}

impl Spin {
    pub fn opposite(self) -> Spin {
        match self {
            Spin::Up => Spin::Down,
            Spin::Down => Spin::Up,
            Spin::Left => Spin::Right,
            Spin::Right => Spin::Left,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Spin::Up => 'U',
            Spin::Down => 'D',
            Spin::Left => 'L',
            Spin::Right => 'R',
        }
    }

    pub fn from_char(c: char) -> Result<Spin> {
        match c {
            'U' => Ok(Spin::Up),
            'D' => Ok(Spin::Down),
            'L' => Ok(Spin::Left),
            'R' => Ok(Spin::Right),
            _ => Err(precondition("config", format!("unknown spin character {c:?}"))),
        }
    }

    fn from_u8(v: u8) -> Spin {
        match v {
            0 => Spin::Up,
            1 => Spin::Down,
            2 => Spin::Left,
            3 => Spin::Right,
            _ => unreachable!("spin codes are 0..=3"),
        }
    }
}

/// One dimer configuration on a fixed torus.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DimerConfig {
    lattice: TorusLattice,
    labels: Vec<Spin>,
}

impl DimerConfig {
    /// Wraps a dense label array (row `y = 0` first, row-major).
    pub fn from_labels(lattice: TorusLattice, labels: Vec<Spin>) -> Result<Self> {
        if labels.len() != lattice.sites() {
            return Err(precondition(
                "config",
                format!("expected {} labels, got {}", lattice.sites(), labels.len()),
            ));
        }
        Ok(DimerConfig { lattice, labels })
    }

    pub fn lattice(&self) -> TorusLattice {
        self.lattice
    }

    pub fn labels(&self) -> &[Spin] {
        &self.labels
    }

    pub fn label(&self, s: Site) -> Spin {
        self.labels[self.lattice.index(s)]
    }

    /// Partner site the label points at.
    pub fn partner(&self, s: Site) -> Site {
        let (x, y) = (s.x as i64, s.y as i64);
        match self.label(s) {
            Spin::Up => self.lattice.wrap(x, y + 1),
            Spin::Down => self.lattice.wrap(x, y - 1),
            Spin::Left => self.lattice.wrap(x - 1, y),
            Spin::Right => self.lattice.wrap(x + 1, y),
        }
    }

    /// True when every site's partner points back, i.e. the labels encode a
    /// perfect matching by dimers.
    pub fn validate(&self) -> bool {
        (0..self.lattice.sites()).all(|idx| {
            let s = self.lattice.site(idx);
            let p = self.partner(s);
            p != s && self.label(p) == self.label(s).opposite()
        })
    }

    /// Number of vertical dimers (`Up` sites).
    pub fn vertical_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l == Spin::Up).count()
    }

    /// `z^V`; `z` must be positive.
    pub fn weight<T: Scalar>(&self, z: T) -> Result<T> {
        if z <= T::zero() {
            return Err(precondition("config", "fugacity z must be positive"));
        }
        Ok(z.powi(self.vertical_count() as i32))
    }

    /// Winding class `(w_x, w_y)` counted from seam-crossing dimers with
    /// alternating signs; invariant under plaquette flips.
    pub fn winding_class(&self) -> (i64, i64) {
        let (n, m) = (self.lattice.width(), self.lattice.height());
        let mut wx = 0i64;
        for y in 0..m {
            if self.label(Site::new(n - 1, y)) == Spin::Right {
                wx += if y % 2 == 0 { 1 } else { -1 };
            }
        }
        let mut wy = 0i64;
        for x in 0..n {
            if self.label(Site::new(x, m - 1)) == Spin::Up {
                wy += if x % 2 == 0 { 1 } else { -1 };
            }
        }
        (wx, wy)
    }

    /// One character per site, rows separated by newlines, row `y = 0` first.
    pub fn to_ascii(&self) -> String {
        let (n, m) = (self.lattice.width(), self.lattice.height());
        let mut out = String::with_capacity((n + 1) * m);
        for y in 0..m {
            for x in 0..n {
                out.push(self.label(Site::new(x, y)).to_char());
            }
            if y + 1 < m {
                out.push('\n');
            }
        }
        out
    }

    /// Parses the `to_ascii` format and checks validity.
    pub fn from_ascii(text: &str) -> Result<Self> {
        let rows: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
        let m = rows.len();
        if m == 0 {
            return Err(precondition("config", "empty configuration text"));
        }
        let n = rows[0].chars().count();
        if rows.iter().any(|r| r.chars().count() != n) {
            return Err(precondition("config", "ragged rows in configuration text"));
        }
        let lattice = TorusLattice::new_unchecked(n, m);
        let mut labels = Vec::with_capacity(n * m);
        for row in rows {
            for c in row.chars() {
                labels.push(Spin::from_char(c)?);
            }
        }
        let config = DimerConfig { lattice, labels };
        if !config.validate() {
            return Err(precondition("config", "labels do not form a valid dimer cover"));
        }
        Ok(config)
    }

    /// Every row tiled by horizontal dimers in the phase pairing columns
    /// `(0,1), (2,3), ...`; exists for every even `N`.
    pub fn all_horizontal(lattice: TorusLattice) -> Self {
        let labels = (0..lattice.sites())
            .map(|idx| if lattice.site(idx).x % 2 == 0 { Spin::Right } else { Spin::Left })
            .collect();
        DimerConfig { lattice, labels }
    }

    /// Every column tiled by vertical dimers pairing rows `(0,1), (2,3), ...`;
    /// requires even `M`.
    pub fn all_vertical(lattice: TorusLattice) -> Result<Self> {
        if lattice.height() % 2 != 0 {
            return Err(precondition("config", "all-vertical tiling needs even M"));
        }
        let labels = (0..lattice.sites())
            .map(|idx| if lattice.site(idx).y % 2 == 0 { Spin::Up } else { Spin::Down })
            .collect();
        Ok(DimerConfig { lattice, labels })
    }

    pub(crate) fn set_label(&mut self, s: Site, l: Spin) {
        let idx = self.lattice.index(s);
        self.labels[idx] = l;
    }
}

const EMPTY: u8 = 4;

/// Branch order at the first uncovered site: pair it rightward, leftward,
/// upward, downward. The site's own label for each branch, partner opposite.
const BRANCH_LABEL: [Spin; 4] = [Spin::Right, Spin::Left, Spin::Up, Spin::Down];

struct Frame {
    site: usize,
    next_branch: u8,
    placed: Option<(usize, u8)>,
}

/// Index of the neighbor `branch` steps through; neighbors() order
/// (right, left, up, down) matches BRANCH_LABEL.
fn partner_index(lattice: TorusLattice, site: usize, branch: u8) -> usize {
    let nb = lattice.neighbors(lattice.site(site));
    lattice.index(nb[branch as usize])
}

/// Streaming exhaustive enumeration of all dimer configurations.
///
/// Yields `Err` once if the configured cap is exceeded, then stops. Use
/// [`Enumerate::advance`] + [`Enumerate::current`] to visit configurations
/// without cloning each one.
pub struct Enumerate {
    lattice: TorusLattice,
    cells: Vec<u8>,
    stack: Vec<Frame>,
    current: DimerConfig,
    yielded: u64,
    cap: u64,
    started: bool,
    finished: bool,
}

/// Enumerate every configuration on `lattice`, erroring past `max_configs`.
pub fn enumerate(lattice: TorusLattice, max_configs: u64) -> Enumerate {
    Enumerate {
        lattice,
        cells: vec![EMPTY; lattice.sites()],
        stack: Vec::with_capacity(lattice.sites() / 2 + 1),
        current: DimerConfig {
            lattice,
            labels: vec![Spin::Up; lattice.sites()],
        },
        yielded: 0,
        cap: max_configs,
        started: false,
        finished: false,
    }
}

impl Enumerate {
    /// Number of configurations yielded so far.
    pub fn count(&self) -> u64 {
        self.yielded
    }

    /// The configuration produced by the last successful [`Enumerate::advance`].
    pub fn current(&self) -> &DimerConfig {
        &self.current
    }

    /// Steps to the next configuration; `Some(Ok(()))` means `current()` is
    /// fresh. Returns `Some(Err(_))` once when the cap is exceeded.
    pub fn advance(&mut self) -> Option<Result<()>> {
        if self.finished {
            return None;
        }
        if !self.started {
            self.started = true;
            if self.lattice.sites() == 0 {
                self.finished = true;
                return None;
            }
            self.stack.push(Frame { site: 0, next_branch: 0, placed: None });
        }
        loop {
            let Some(top) = self.stack.last_mut() else {
                self.finished = true;
                return None;
            };
            if let Some((partner, _)) = top.placed.take() {
                self.cells[top.site] = EMPTY;
                self.cells[partner] = EMPTY;
            }
            let site = top.site;
            let lattice = self.lattice;
            let mut chosen = None;
            while top.next_branch < 4 {
                let b = top.next_branch;
                top.next_branch += 1;
                let p = partner_index(lattice, site, b);
                if p != site && self.cells[p] == EMPTY {
                    chosen = Some((b, p));
                    break;
                }
            }
            let Some((branch, partner)) = chosen else {
                self.stack.pop();
                continue;
            };
            self.cells[site] = BRANCH_LABEL[branch as usize] as u8;
            self.cells[partner] = BRANCH_LABEL[branch as usize].opposite() as u8;
            self.stack.last_mut().expect("frame present").placed = Some((partner, branch));
            match (site + 1..self.lattice.sites()).find(|&i| self.cells[i] == EMPTY) {
                Some(next) => {
                    self.stack.push(Frame { site: next, next_branch: 0, placed: None });
                }
                None => {
                    self.yielded += 1;
                    if self.yielded > self.cap {
                        self.finished = true;
                        return Some(Err(capacity(
                            "config",
                            format!("enumeration exceeded the cap of {} configurations", self.cap),
                        )));
                    }
                    for (dst, &src) in self.current.labels.iter_mut().zip(&self.cells) {
                        *dst = Spin::from_u8(src);
                    }
                    return Some(Ok(()));
                }
            }
        }
    }
}

impl Iterator for Enumerate {
    type Item = Result<DimerConfig>;

    fn next(&mut self) -> Option<Self::Item> {
        match self.advance()? {
            Ok(()) => Some(Ok(self.current.clone())),
            Err(e) => Some(Err(e)),
        }
    }
}

/// Collects the full configuration list; errors if the cap is exceeded.
pub fn enumerate_all(lattice: TorusLattice, max_configs: u64) -> Result<Vec<DimerConfig>> {
    enumerate(lattice, max_configs).collect::<Result<Vec<_>>>()
}

/// Sum of `z^V` over all configurations: the enumeration route to the
/// partition function, used as an oracle for the transfer and Pfaffian routes.
pub fn enumerate_partition_function<T: Scalar>(
    lattice: TorusLattice,
    z: T,
    max_configs: u64,
) -> Result<T> {
    if z <= T::zero() {
        return Err(precondition("config", "fugacity z must be positive"));
    }
    let mut total = T::zero();
    let mut it = enumerate(lattice, max_configs);
    while let Some(step) = it.advance() {
        step?;
        total = total + z.powi(it.current().vertical_count() as i32);
    }
    Ok(total)
}

/// Checks that an error is the enumeration cap error (for callers that
/// downgrade it into a skip).
pub fn is_capacity_error(e: &Error) -> bool {
    matches!(e, Error::Capacity(_))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn collect(n: usize, m: usize) -> Vec<DimerConfig> {
        enumerate_all(TorusLattice::new_unchecked(n, m), 1 << 20).unwrap()
    }

    #[test]
    fn two_by_two_has_eight_configs_split_by_vertical_count() {
        let configs = collect(2, 2);
        assert_eq!(configs.len(), 8);
        let v0 = configs.iter().filter(|c| c.vertical_count() == 0).count();
        let v2 = configs.iter().filter(|c| c.vertical_count() == 2).count();
        assert_eq!((v0, v2), (4, 4));
        for c in &configs {
            assert!(c.validate());
        }
    }

    #[test]
    fn two_by_one_has_the_two_horizontal_labelings() {
        let configs = collect(2, 1);
        assert_eq!(configs.len(), 2);
        let texts: HashSet<String> = configs.iter().map(|c| c.to_ascii()).collect();
        assert!(texts.contains("RL"));
        assert!(texts.contains("LR"));
    }

    #[test]
    fn four_by_one_is_a_cycle_with_two_tilings() {
        assert_eq!(collect(4, 1).len(), 2);
    }

    #[test]
    fn odd_width_yields_nothing() {
        assert_eq!(collect(3, 1).len(), 0);
        assert_eq!(collect(3, 3).len(), 0);
    }

    #[test]
    fn no_duplicates_and_balanced_labels_on_four_by_three() {
        let configs = collect(4, 3);
        let distinct: HashSet<&[Spin]> = configs.iter().map(|c| c.labels()).collect();
        assert_eq!(distinct.len(), configs.len());
        for c in &configs {
            assert!(c.validate());
            let count = |s: Spin| c.labels().iter().filter(|&&l| l == s).count();
            assert_eq!(count(Spin::Up), count(Spin::Down));
            assert_eq!(count(Spin::Left), count(Spin::Right));
        }
    }

    #[test]
    fn cap_is_enforced_with_a_capacity_error() {
        let lat = TorusLattice::new(2, 2).unwrap();
        let res: Result<Vec<_>> = enumerate(lat, 3).collect();
        assert!(matches!(res, Err(Error::Capacity(_))));
    }

    #[test]
    fn weight_counts_vertical_dimers() {
        let configs = collect(2, 2);
        for c in &configs {
            let w: f64 = c.weight(2.0).unwrap();
            assert_eq!(w, 2.0f64.powi(c.vertical_count() as i32));
        }
        assert!(configs[0].weight(-1.0f64).is_err());
        assert!(configs[0].weight(0.0f64).is_err());
    }

    #[test]
    fn partition_sum_on_two_by_two_is_four_plus_four_z_squared() {
        let lat = TorusLattice::new(2, 2).unwrap();
        for z in [0.5f64, 1.0, 2.0, 3.0] {
            let got = enumerate_partition_function(lat, z, 100).unwrap();
            assert!((got - (4.0 + 4.0 * z * z)).abs() < 1e-12);
        }
    }

    #[test]
    fn ascii_roundtrip_preserves_every_enumerated_config() {
        for (n, m) in [(2, 2), (4, 2), (4, 3), (2, 4)] {
            for c in collect(n, m) {
                let back = DimerConfig::from_ascii(&c.to_ascii()).unwrap();
                assert_eq!(back, c);
            }
        }
    }

    #[test]
    fn from_ascii_rejects_invalid_labelings() {
        assert!(DimerConfig::from_ascii("RR\nLL").is_err());
        assert!(DimerConfig::from_ascii("RLX\nRLR").is_err());
        assert!(DimerConfig::from_ascii("RL\nRLL").is_err());
        assert!(DimerConfig::from_ascii("").is_err());
    }

    #[test]
    fn canonical_tilings_are_valid() {
        for (n, m) in [(2, 2), (4, 4), (6, 2), (8, 6)] {
            let lat = TorusLattice::new(n, m).unwrap();
            assert!(DimerConfig::all_horizontal(lat).validate());
            let v = DimerConfig::all_vertical(lat).unwrap();
            assert!(v.validate());
            assert_eq!(v.vertical_count(), n * m / 2);
        }
        let lat = TorusLattice::new(4, 3).unwrap();
        assert!(DimerConfig::all_horizontal(lat).validate());
        assert!(DimerConfig::all_vertical(lat).is_err());
    }

    #[test]
    fn canonical_tilings_have_zero_winding() {
        let lat = TorusLattice::new(6, 4).unwrap();
        assert_eq!(DimerConfig::all_horizontal(lat).winding_class(), (0, 0));
        assert_eq!(DimerConfig::all_vertical(lat).unwrap().winding_class(), (0, 0));
    }

    #[test]
    fn two_by_three_counts_match_the_row_case_analysis() {
        // Rows covered horizontally: all three (2^3 phases, V=0) or exactly
        // one (3 choices x 2 phases, the other two rows vertical in both
        // columns, V=2). Other row subsets leave an untileable remainder.
        let configs = collect(2, 3);
        assert_eq!(configs.len(), 14);
        let v0 = configs.iter().filter(|c| c.vertical_count() == 0).count();
        let v2 = configs.iter().filter(|c| c.vertical_count() == 2).count();
        assert_eq!((v0, v2), (8, 6));
    }
}
