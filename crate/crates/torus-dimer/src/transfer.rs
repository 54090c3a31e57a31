//! Row transfer operator and exact partition/probability computations.
//!
//! The state of a row is the bitmask `S` of columns whose site in that row is
//! `Up` (starts a vertical dimer into the next row). A transition `S -> S'`
//! requires `S` and `S'` disjoint; the remaining free columns of the row must
//! be covered by horizontal dimers, so every maximal cyclic run of free
//! columns has even length (one tiling each, two when the whole circle is
//! free). Each transition carries weight `z^|S'|`, one factor of `z` per
//! vertical dimer at the row it starts from, so `Z(N, M, z) = Tr(T^M)`.
//!
//! Probabilities of row events are ratios of constrained traces: pinning
//! columns of row 0 to `Up` or not-`Up` restricts which diagonal entries of
//! `T^M` are summed. The operator commutes with all column rotations and
//! reflections, so `diag(T^M)` is constant on dihedral orbits of bitmasks;
//! the table below sweeps one representative per orbit, which cuts the work
//! by roughly `2N`.
//!
//! Everything is kept in log scale: vectors are renormalized by their maximum
//! after each application and the logs are accumulated, so tori as large as
//! the state cap allows stay far from overflow at any positive fugacity.

use crate::error::{numerical, precondition, Limits, Result};
use crate::lattice::TorusLattice;
use crate::scalar::{ln_sum_exp, Scalar};

/// Cyclic left rotation of an `n`-bit mask by `r` (`0 <= r < n <= 63`).
#[inline]
fn rotate(mask: u64, r: usize, n: usize) -> u64 {
    let full = (1u64 << n) - 1;
    if r == 0 {
        return mask & full;
    }
    ((mask << r) | (mask >> (n - r))) & full
}

/// Bit reversal within the low `n` bits.
#[inline]
fn reverse(mask: u64, n: usize) -> u64 {
    mask.reverse_bits() >> (64 - n)
}

/// Least mask in the dihedral orbit (all rotations of the mask and of its
/// reversal).
fn canonical(mask: u64, n: usize) -> u64 {
    let rev = reverse(mask, n);
    let mut best = mask;
    for r in 0..n {
        best = best.min(rotate(mask, r, n)).min(rotate(rev, r, n));
    }
    best
}

/// Enumerates every transition out of `s_in` with tiling multiplicity: `f`
/// is called once per horizontal tiling per target mask. Column 0 pairing
/// with column `n-1` is the seam case handled by the second pass.
fn for_each_transition<F: FnMut(u64)>(n: usize, s_in: u64, f: &mut F) {
    descend(0, n, s_in, 0, f);
    if n >= 2 && s_in & 1 == 0 && (s_in >> (n - 1)) & 1 == 0 {
        descend(1, n - 1, s_in, 0, f);
    }
}

fn descend<F: FnMut(u64)>(x: usize, end: usize, s_in: u64, s_out: u64, f: &mut F) {
    if x >= end {
        f(s_out);
        return;
    }
    if (s_in >> x) & 1 == 1 {
        return descend(x + 1, end, s_in, s_out, f);
    }
    descend(x + 1, end, s_in, s_out | (1 << x), f);
    if x + 1 < end && (s_in >> (x + 1)) & 1 == 0 {
        descend(x + 2, end, s_in, s_out, f);
    }
}

/// The row transfer operator at a fixed width and fugacity.
#[derive(Debug, Clone)]
pub struct TransferOperator<T> {
    n_cols: usize,
    z: T,
    z_pows: Vec<T>,
    z_half_pows: Vec<T>,
}

impl<T: Scalar> TransferOperator<T> {
    pub fn new(n_cols: usize, z: T) -> Result<Self> {
        if n_cols == 0 || n_cols % 2 != 0 {
            return Err(precondition("transfer", format!("width must be even and positive, got {n_cols}")));
        }
        if z <= T::zero() {
            return Err(precondition("transfer", "fugacity z must be positive"));
        }
        let mut z_pows = Vec::with_capacity(n_cols + 1);
        let mut z_half_pows = Vec::with_capacity(n_cols + 1);
        let (mut p, mut q) = (T::one(), T::one());
        let sqrt_z = z.sqrt();
        for _ in 0..=n_cols {
            z_pows.push(p);
            z_half_pows.push(q);
            p = p * z;
            q = q * sqrt_z;
        }
        Ok(TransferOperator { n_cols, z, z_pows, z_half_pows })
    }

    pub fn width(&self) -> usize {
        self.n_cols
    }

    pub fn fugacity(&self) -> T {
        self.z
    }

    /// Number of row states.
    pub fn dim(&self) -> usize {
        1usize << self.n_cols
    }

    /// Visits each transition `s_in -> target` once per tiling.
    pub fn transitions(&self, s_in: u64, mut f: impl FnMut(u64)) {
        for_each_transition(self.n_cols, s_in, &mut f);
    }

    /// `w = T v`, with `w[S'] = sum_S T(S -> S') v[S]`; `w` is overwritten.
    pub fn apply(&self, v: &[T], w: &mut [T]) {
        debug_assert_eq!(v.len(), self.dim());
        debug_assert_eq!(w.len(), self.dim());
        w.fill(T::zero());
        for (s, &vs) in v.iter().enumerate() {
            if vs == T::zero() {
                continue;
            }
            for_each_transition(self.n_cols, s as u64, &mut |t| {
                w[t as usize] = w[t as usize] + vs * self.z_pows[t.count_ones() as usize];
            });
        }
    }

    /// `w = T^t v`; `w` is overwritten. The transition relation is symmetric
    /// apart from the fugacity power, so the same enumeration serves, with
    /// the power taken from the input mask.
    pub fn apply_transpose(&self, v: &[T], w: &mut [T]) {
        debug_assert_eq!(v.len(), self.dim());
        debug_assert_eq!(w.len(), self.dim());
        w.fill(T::zero());
        for (t, &vt) in v.iter().enumerate() {
            if vt == T::zero() {
                continue;
            }
            let scaled = vt * self.z_pows[(t as u64).count_ones() as usize];
            for_each_transition(self.n_cols, t as u64, &mut |s| {
                w[s as usize] = w[s as usize] + scaled;
            });
        }
    }

    /// One application of the symmetrized operator `D T D^-1` with
    /// `D = diag(z^|S|/2)` to `k` vectors stored row-major as contiguous
    /// blocks of `k` entries per mask. Symmetrization preserves diagonal
    /// entries of powers and lets a single sweep serve both directions;
    /// the panel amortizes transition enumeration across the `k` columns.
    fn apply_symmetrized_panel(&self, k: usize, v: &[T], w: &mut [T]) {
        debug_assert_eq!(v.len(), self.dim() * k);
        debug_assert_eq!(w.len(), self.dim() * k);
        w.fill(T::zero());
        let zh = &self.z_half_pows;
        for s in 0..self.dim() {
            let row = &v[s * k..(s + 1) * k];
            if row.iter().all(|&x| x == T::zero()) {
                continue;
            }
            let zs = zh[(s as u64).count_ones() as usize];
            for_each_transition(self.n_cols, s as u64, &mut |t| {
                let c = zs * zh[t.count_ones() as usize];
                let base = t as usize * k;
                for (wj, &vj) in w[base..base + k].iter_mut().zip(row) {
                    *wj = *wj + c * vj;
                }
            });
        }
    }

    /// Dense matrix `[row s'][col s]`, for small widths and tests.
    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let d = self.dim();
        let mut m = vec![vec![T::zero(); d]; d];
        for s in 0..d {
            for_each_transition(self.n_cols, s as u64, &mut |t| {
                m[t as usize][s] = m[t as usize][s] + self.z_pows[t.count_ones() as usize];
            });
        }
        m
    }
}

/// Pins on the `Up`-set of a single row: some columns required vertical,
/// some forbidden, the rest free.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowConstraint {
    n_cols: usize,
    require: u64,
    forbid: u64,
}

impl RowConstraint {
    pub fn free(n_cols: usize) -> Self {
        RowConstraint { n_cols, require: 0, forbid: 0 }
    }

    /// Pins column `col` of the row to carry a vertical dimer upward.
    pub fn require_vertical(&mut self, col: usize) -> Result<()> {
        self.pin(col, true)
    }

    /// Pins column `col` of the row to not carry one.
    pub fn forbid_vertical(&mut self, col: usize) -> Result<()> {
        self.pin(col, false)
    }

    fn pin(&mut self, col: usize, vertical: bool) -> Result<()> {
        if col >= self.n_cols {
            return Err(precondition("transfer", format!("pin column {col} out of range 0..{}", self.n_cols)));
        }
        let bit = 1u64 << col;
        let (into, other) = if vertical {
            (&mut self.require, self.forbid)
        } else {
            (&mut self.forbid, self.require)
        };
        if other & bit != 0 {
            return Err(precondition("transfer", format!("column {col} pinned both ways")));
        }
        *into |= bit;
        Ok(())
    }

    /// The alternating event of half-width `n`: columns `0, 2, ..., 2n-2`
    /// vertical, columns `1, 3, ..., 2n-1` not; needs `2n <= N`.
    pub fn alternating(n_cols: usize, n: usize) -> Result<Self> {
        if 2 * n > n_cols {
            return Err(precondition(
                "transfer",
                format!("event needs 2n = {} columns but the torus has N = {n_cols}", 2 * n),
            ));
        }
        let mut c = RowConstraint::free(n_cols);
        for x in 0..2 * n {
            if x % 2 == 0 {
                c.require_vertical(x)?;
            } else {
                c.forbid_vertical(x)?;
            }
        }
        Ok(c)
    }

    pub fn width(&self) -> usize {
        self.n_cols
    }

    pub fn required_mask(&self) -> u64 {
        self.require
    }

    pub fn forbidden_mask(&self) -> u64 {
        self.forbid
    }

    pub fn admits(&self, mask: u64) -> bool {
        mask & self.require == self.require && mask & self.forbid == 0
    }
}

/// All diagonal entries of `T^M` in log scale, one sweep per dihedral orbit.
#[derive(Debug, Clone)]
pub struct DiagonalPowerTable<T> {
    n_cols: usize,
    height: usize,
    ln_diag: Vec<T>,
}

impl<T: Scalar> DiagonalPowerTable<T> {
    pub fn build(n_cols: usize, height: usize, z: T, limits: &Limits) -> Result<Self> {
        limits.check_state_bits(n_cols)?;
        if height == 0 {
            return Err(precondition("transfer", "torus height must be at least 1"));
        }
        let op = TransferOperator::new(n_cols, z)?;
        let dim = op.dim();
        let canon: Vec<u32> = (0..dim as u64).map(|s| canonical(s, n_cols) as u32).collect();
        let reps: Vec<usize> = (0..dim).filter(|&s| canon[s] as usize == s).collect();
        let mut ln_diag = vec![T::neg_infinity(); dim];

        // With S the symmetrization of T, (T^M)_RR = (S^M)_RR, which is
        // |S^(M/2) e_R|^2 for even M and <u, S u> with u = S^((M-1)/2) e_R
        // for odd M. Representatives are swept in panels.
        let half = height / 2;
        let odd = height % 2 == 1;
        let panel = reps.len().min(64);
        let mut u: Vec<T> = Vec::new();
        let mut tmp: Vec<T> = Vec::new();
        let mut dots = vec![T::zero(); panel];
        for chunk in reps.chunks(panel) {
            let k = chunk.len();
            u.clear();
            u.resize(dim * k, T::zero());
            tmp.clear();
            tmp.resize(dim * k, T::zero());
            for (j, &rep) in chunk.iter().enumerate() {
                u[rep * k + j] = T::one();
            }
            let mut ln_scale = vec![T::zero(); k];
            for _ in 0..half {
                op.apply_symmetrized_panel(k, &u, &mut tmp);
                std::mem::swap(&mut u, &mut tmp);
                normalize_panel(&mut u, k, &mut ln_scale)?;
            }
            dots[..k].fill(T::zero());
            if odd {
                op.apply_symmetrized_panel(k, &u, &mut tmp);
                for (a, b) in u.chunks_exact(k).zip(tmp.chunks_exact(k)) {
                    for j in 0..k {
                        dots[j] = dots[j] + a[j] * b[j];
                    }
                }
            } else {
                for a in u.chunks_exact(k) {
                    for j in 0..k {
                        dots[j] = dots[j] + a[j] * a[j];
                    }
                }
            }
            for (j, &rep) in chunk.iter().enumerate() {
                ln_diag[rep] = if dots[j] > T::zero() {
                    dots[j].ln() + T::of(2.0) * ln_scale[j]
                } else {
                    T::neg_infinity()
                };
            }
        }
        for s in 0..dim {
            let r = canon[s] as usize;
            if r != s {
                ln_diag[s] = ln_diag[r];
            }
        }
        Ok(DiagonalPowerTable { n_cols, height, ln_diag })
    }

    pub fn width(&self) -> usize {
        self.n_cols
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// `ln (T^M)_SS` for one row state.
    pub fn ln_diagonal(&self, mask: u64) -> T {
        self.ln_diag[mask as usize]
    }

    /// `ln Tr(T^M) = ln Z`.
    pub fn ln_full_trace(&self) -> T {
        ln_sum_exp(self.ln_diag.iter().copied())
    }

    /// `ln` of the trace restricted to row states admitted by the pins.
    pub fn ln_constrained_trace(&self, pin: &RowConstraint) -> Result<T> {
        if pin.width() != self.n_cols {
            return Err(precondition(
                "transfer",
                format!("pin width {} does not match table width {}", pin.width(), self.n_cols),
            ));
        }
        Ok(ln_sum_exp(
            (0..self.ln_diag.len() as u64).filter(|&s| pin.admits(s)).map(|s| self.ln_diag[s as usize]),
        ))
    }
}

/// Rescales each of the `k` interleaved columns by its maximum (entries stay
/// nonnegative throughout the sweeps) and accumulates the logs.
fn normalize_panel<T: Scalar>(v: &mut [T], k: usize, ln_scale: &mut [T]) -> Result<()> {
    let mut maxs = vec![T::zero(); k];
    for row in v.chunks_exact(k) {
        for (m, &x) in maxs.iter_mut().zip(row) {
            if x > *m {
                *m = x;
            }
        }
    }
    for m in &maxs {
        if !(*m > T::zero()) || !m.is_finite() {
            return Err(numerical("transfer", "transfer sweep lost all mass or overflowed"));
        }
    }
    let invs: Vec<T> = maxs.iter().map(|&m| T::one() / m).collect();
    for row in v.chunks_exact_mut(k) {
        for (inv, x) in invs.iter().zip(row) {
            *x = *x * *inv;
        }
    }
    for (acc, m) in ln_scale.iter_mut().zip(&maxs) {
        *acc = *acc + m.ln();
    }
    Ok(())
}

/// `ln Z(N, M, z)` by the transfer route.
pub fn ln_partition_function<T: Scalar>(lattice: TorusLattice, z: T, limits: &Limits) -> Result<T> {
    Ok(DiagonalPowerTable::build(lattice.width(), lattice.height(), z, limits)?.ln_full_trace())
}

/// `Z(N, M, z)`; overflows to infinity for tori too large for direct scale.
pub fn partition_function<T: Scalar>(lattice: TorusLattice, z: T, limits: &Limits) -> Result<T> {
    Ok(ln_partition_function(lattice, z, limits)?.exp())
}

/// Exact probability of the alternating row event of half-width `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfpRecord<T> {
    pub n: usize,
    pub ln_probability: T,
    pub probability: T,
    /// `-ln P / (n min(n, M))`; zero for `n = 0`.
    pub normalized_exponent: T,
}

/// Probabilities of the alternating events for each requested half-width,
/// sharing a single diagonal table.
pub fn efp_profile<T: Scalar>(
    lattice: TorusLattice,
    z: T,
    ns: &[usize],
    limits: &Limits,
) -> Result<Vec<EfpRecord<T>>> {
    let table = DiagonalPowerTable::build(lattice.width(), lattice.height(), z, limits)?;
    let ln_z_full = table.ln_full_trace();
    ns.iter()
        .map(|&n| {
            let pin = RowConstraint::alternating(lattice.width(), n)?;
            let ln_p = table.ln_constrained_trace(&pin)? - ln_z_full;
            let normalized_exponent = if n == 0 {
                T::zero()
            } else {
                let denom = T::of((n * n.min(lattice.height())) as f64);
                -ln_p / denom
            };
            Ok(EfpRecord { n, ln_probability: ln_p, probability: ln_p.exp(), normalized_exponent })
        })
        .collect()
}

/// Single-event convenience wrapper around [`efp_profile`].
pub fn efp_exact<T: Scalar>(lattice: TorusLattice, z: T, n: usize, limits: &Limits) -> Result<EfpRecord<T>> {
    Ok(efp_profile(lattice, z, &[n], limits)?.remove(0))
}

/// Mean vertical-dimer count per site, `<V> / (N M)`, from a centered
/// difference of `ln Z` in `ln z`.
pub fn mean_vertical_density<T: Scalar>(lattice: TorusLattice, z: T, limits: &Limits) -> Result<T> {
    let h = T::of(1e-5);
    let hi = ln_partition_function(lattice, z * h.exp(), limits)?;
    let lo = ln_partition_function(lattice, z * (-h).exp(), limits)?;
    let sites = T::of(lattice.sites() as f64);
    Ok((hi - lo) / (T::of(2.0) * h) / sites)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{enumerate, enumerate_partition_function};
    use crate::lattice::Site;
    use crate::Spin;
    use proptest::prelude::*;

    fn limits() -> Limits {
        Limits::default()
    }

    fn dense_power(op: &TransferOperator<f64>, m: usize) -> Vec<Vec<f64>> {
        let d = op.dim();
        let t = op.to_dense();
        let mut acc: Vec<Vec<f64>> = (0..d).map(|i| (0..d).map(|j| ((i == j) as u8) as f64).collect()).collect();
        for _ in 0..m {
            let mut next = vec![vec![0.0; d]; d];
            for i in 0..d {
                for k in 0..d {
                    let a = t[i][k];
                    if a == 0.0 {
                        continue;
                    }
                    for j in 0..d {
                        next[i][j] += a * acc[k][j];
                    }
                }
            }
            acc = next;
        }
        acc
    }

    #[test]
    fn two_column_matrix_matches_hand_entries() {
        let z = 1.7f64;
        let t = TransferOperator::new(2, z).unwrap().to_dense();
        // states 0b00, 0b01, 0b10, 0b11
        let expect = [
            [2.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, z, 0.0],
            [0.0, z, 0.0, 0.0],
            [z * z, 0.0, 0.0, 0.0],
        ];
        for s in 0..4 {
            for sp in 0..4 {
                assert!((t[sp][s] - expect[sp][s]).abs() < 1e-15, "entry {s}->{sp}");
            }
        }
    }

    #[test]
    fn trace_matches_enumeration_on_a_grid_of_small_tori() {
        for (n, m) in [(2, 1), (2, 2), (2, 3), (2, 4), (4, 1), (4, 2), (4, 3), (6, 2)] {
            let lat = TorusLattice::new(n, m).unwrap();
            for z in [0.5f64, 1.0, 2.0] {
                let by_enum = enumerate_partition_function(lat, z, 10_000_000).unwrap();
                let by_transfer = partition_function(lat, z, &limits()).unwrap();
                let rel = (by_transfer - by_enum).abs() / by_enum;
                assert!(rel < 1e-12, "Z mismatch on {n}x{m} z={z}: {by_transfer} vs {by_enum}");
            }
        }
    }

    #[test]
    fn known_closed_forms() {
        let lim = limits();
        for z in [0.5f64, 1.0, 2.0] {
            let z22 = partition_function(TorusLattice::new(2, 2).unwrap(), z, &lim).unwrap();
            assert!((z22 - (4.0 + 4.0 * z * z)).abs() < 1e-12);
            let z23 = partition_function(TorusLattice::new(2, 3).unwrap(), z, &lim).unwrap();
            assert!((z23 - (8.0 + 6.0 * z * z)).abs() < 1e-12);
            for n in [2, 4, 6, 8] {
                let z_row = partition_function(TorusLattice::new(n, 1).unwrap(), z, &lim).unwrap();
                assert!((z_row - 2.0).abs() < 1e-12, "a single row is a cycle with two tilings");
            }
        }
    }

    #[test]
    fn diagonal_table_matches_dense_powers() {
        for n_cols in [2usize, 4, 6] {
            for m in [1usize, 2, 3, 5] {
                for z in [0.5f64, 2.0] {
                    let op = TransferOperator::new(n_cols, z).unwrap();
                    let pow = dense_power(&op, m);
                    let table = DiagonalPowerTable::build(n_cols, m, z, &limits()).unwrap();
                    for s in 0..op.dim() {
                        let exact = pow[s][s];
                        let got = table.ln_diagonal(s as u64);
                        if exact == 0.0 {
                            assert!(got.is_infinite() && got < 0.0, "state {s}");
                        } else {
                            assert!((got - exact.ln()).abs() < 1e-10, "state {s}: {got} vs {}", exact.ln());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn diagonal_of_dense_power_is_constant_on_dihedral_orbits() {
        let op = TransferOperator::new(6, 1.6f64).unwrap();
        let pow = dense_power(&op, 3);
        for s in 0..op.dim() as u64 {
            let c = canonical(s, 6) as usize;
            let (a, b) = (pow[s as usize][s as usize], pow[c][c]);
            assert!((a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0), "orbit of {s}");
        }
    }

    #[test]
    fn apply_and_transpose_are_adjoint() {
        let op = TransferOperator::new(4, 1.3f64).unwrap();
        let d = op.dim();
        let v: Vec<f64> = (0..d).map(|i| ((i * 37 + 11) % 17) as f64 * 0.25 - 1.0).collect();
        let w: Vec<f64> = (0..d).map(|i| ((i * 53 + 5) % 19) as f64 * 0.125 - 1.0).collect();
        let mut tv = vec![0.0; d];
        let mut ttw = vec![0.0; d];
        op.apply(&v, &mut tv);
        op.apply_transpose(&w, &mut ttw);
        let lhs: f64 = w.iter().zip(&tv).map(|(a, b)| a * b).sum();
        let rhs: f64 = ttw.iter().zip(&v).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0));
    }

    fn efp_by_enumeration(n: usize, m: usize, z: f64, half_width: usize) -> f64 {
        let lat = TorusLattice::new(n, m).unwrap();
        let mut num = 0.0;
        let mut den = 0.0;
        let mut it = enumerate(lat, 10_000_000);
        while let Some(step) = it.advance() {
            step.unwrap();
            let c = it.current();
            let w = z.powi(c.vertical_count() as i32);
            den += w;
            let matches = (0..2 * half_width).all(|x| {
                let is_up = c.label(Site::new(x, 0)) == Spin::Up;
                is_up == (x % 2 == 0)
            });
            if matches {
                num += w;
            }
        }
        num / den
    }

    #[test]
    fn alternating_event_probability_matches_enumeration() {
        for (n, m, half) in [(2, 2, 1), (4, 2, 1), (4, 2, 2), (4, 3, 1), (4, 4, 2), (6, 2, 2)] {
            for z in [0.5f64, 1.0, 2.0] {
                let exact = efp_exact(TorusLattice::new(n, m).unwrap(), z, half, &limits()).unwrap();
                let brute = efp_by_enumeration(n, m, z, half);
                assert!(
                    (exact.probability - brute).abs() < 1e-12,
                    "efp mismatch {n}x{m} z={z} n={half}: {} vs {brute}",
                    exact.probability
                );
            }
        }
    }

    #[test]
    fn smallest_event_has_the_closed_form() {
        for z in [0.5f64, 1.0, 2.0] {
            let rec = efp_exact(TorusLattice::new(2, 2).unwrap(), z, 1, &limits()).unwrap();
            let expect = z * z / (4.0 + 4.0 * z * z);
            assert!((rec.probability - expect).abs() < 1e-14);
            assert!((rec.ln_probability - expect.ln()).abs() < 1e-12);
            // n = 1 on M = 2: the normalizer n min(n, M) is 1.
            assert!((rec.normalized_exponent + expect.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn event_probability_is_monotone_in_event_width() {
        let lat = TorusLattice::new(8, 4).unwrap();
        let recs = efp_profile(lat, 1.0f64, &[0, 1, 2, 3, 4], &limits()).unwrap();
        assert!((recs[0].probability - 1.0).abs() < 1e-12);
        for pair in recs.windows(2) {
            assert!(pair[1].probability < pair[0].probability);
            assert!(pair[1].probability > 0.0);
        }
    }

    #[test]
    fn single_row_makes_vertical_events_impossible() {
        let rec = efp_exact(TorusLattice::new(4, 1).unwrap(), 1.0f64, 1, &limits()).unwrap();
        assert_eq!(rec.probability, 0.0);
        assert!(rec.ln_probability.is_infinite());
    }

    #[test]
    fn event_wider_than_the_torus_is_rejected() {
        assert!(efp_exact(TorusLattice::new(4, 4).unwrap(), 1.0f64, 3, &limits()).is_err());
        assert!(RowConstraint::alternating(4, 2).is_ok());
        assert!(RowConstraint::alternating(4, 3).is_err());
    }

    #[test]
    fn conflicting_pins_are_rejected() {
        let mut pin = RowConstraint::free(4);
        pin.require_vertical(1).unwrap();
        assert!(pin.forbid_vertical(1).is_err());
        assert!(pin.require_vertical(9).is_err());
    }

    #[test]
    fn mean_density_matches_enumeration_average() {
        for (n, m) in [(2, 2), (4, 3), (4, 4)] {
            let lat = TorusLattice::new(n, m).unwrap();
            for z in [0.5f64, 1.0, 2.0] {
                let mut wsum = 0.0;
                let mut vsum = 0.0;
                let mut it = enumerate(lat, 10_000_000);
                while let Some(step) = it.advance() {
                    step.unwrap();
                    let w = z.powi(it.current().vertical_count() as i32);
                    wsum += w;
                    vsum += w * it.current().vertical_count() as f64;
                }
                let exact = vsum / wsum / (n * m) as f64;
                let fd = mean_vertical_density(lat, z, &limits()).unwrap();
                assert!((fd - exact).abs() < 1e-6, "{n}x{m} z={z}: {fd} vs {exact}");
            }
        }
    }

    #[test]
    fn f32_agrees_with_f64_on_a_small_torus() {
        let lat = TorusLattice::new(4, 3).unwrap();
        let a = partition_function::<f32>(lat, 1.5f32, &limits()).unwrap();
        let b = partition_function::<f64>(lat, 1.5f64, &limits()).unwrap();
        assert!((a as f64 - b).abs() / b < 1e-5);
    }

    #[test]
    fn state_cap_is_enforced() {
        let lim = Limits { max_state_bits: 4, ..Limits::default() };
        assert!(DiagonalPowerTable::build(6, 2, 1.0f64, &lim).is_err());
        assert!(DiagonalPowerTable::build(4, 2, 1.0f64, &lim).is_ok());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn transfer_partition_function_matches_enumeration(
            (n, m) in prop::sample::select(vec![(2usize, 1usize), (2, 2), (2, 3), (4, 1), (4, 2), (4, 3)]),
            z in 0.2f64..3.0,
        ) {
            let lat = TorusLattice::new(n, m).unwrap();
            let by_enum = enumerate_partition_function(lat, z, 10_000_000).unwrap();
            let by_transfer = partition_function(lat, z, &Limits::default()).unwrap();
            prop_assert!((by_transfer - by_enum).abs() / by_enum < 1e-11);
        }
    }
}
