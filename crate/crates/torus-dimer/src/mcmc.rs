//! Plaquette-flip Metropolis sampling of the dimer distribution.
//!
//! A proposal picks a uniform face and, when its four sites are two stacked
//! horizontal dimers, flips them to two side-by-side vertical dimers, or the
//! reverse; anything else is rejected. The move changes the vertical count
//! by two, so the acceptance ratios are `min(1, z^2)` and `min(1, z^-2)`.
//! Flips preserve the winding class, so a chain explores one sector; the
//! standard all-horizontal and all-vertical starts both lie in the zero
//! sector. Errors come from batch means over whole sweeps.

use crate::config::{DimerConfig, Spin};
use crate::error::{precondition, Result};
use crate::lattice::Site;
use crate::scalar::Scalar;
use rand::Rng;

/// Metropolis chain over dimer configurations at fixed fugacity.
pub struct PlaquetteSampler<T, R> {
    config: DimerConfig,
    z_sq: T,
    inv_z_sq: T,
    vertical: usize,
    rng: R,
    proposed: u64,
    accepted: u64,
}

impl<T: Scalar, R: Rng> PlaquetteSampler<T, R> {
    pub fn new(initial: DimerConfig, z: T, rng: R) -> Result<Self> {
        if z <= T::zero() {
            return Err(precondition("mcmc", "fugacity z must be positive"));
        }
        if initial.lattice().height() < 2 {
            return Err(precondition("mcmc", "sampling needs M >= 2"));
        }
        if !initial.validate() {
            return Err(precondition("mcmc", "initial configuration is not a valid dimer cover"));
        }
        let vertical = initial.vertical_count();
        Ok(PlaquetteSampler {
            config: initial,
            z_sq: z * z,
            inv_z_sq: T::one() / (z * z),
            vertical,
            rng,
            proposed: 0,
            accepted: 0,
        })
    }

    pub fn config(&self) -> &DimerConfig {
        &self.config
    }

    pub fn vertical_count(&self) -> usize {
        self.vertical
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }

    /// One Metropolis proposal at a uniform face.
    pub fn step(&mut self) {
        let lat = self.config.lattice();
        let (n, m) = (lat.width(), lat.height());
        let x = self.rng.gen_range(0..n);
        let y = self.rng.gen_range(0..m);
        self.proposed += 1;
        let a = Site::new(x, y);
        let b = Site::new((x + 1) % n, y);
        let c = Site::new(x, (y + 1) % m);
        let d = Site::new((x + 1) % n, (y + 1) % m);
        let labels = (
            self.config.label(a),
            self.config.label(b),
            self.config.label(c),
            self.config.label(d),
        );
        match labels {
            (Spin::Right, Spin::Left, Spin::Right, Spin::Left) => {
                if self.accept(self.z_sq) {
                    self.config.set_label(a, Spin::Up);
                    self.config.set_label(c, Spin::Down);
                    self.config.set_label(b, Spin::Up);
                    self.config.set_label(d, Spin::Down);
                    self.vertical += 2;
                    self.accepted += 1;
                }
            }
            (Spin::Up, Spin::Up, Spin::Down, Spin::Down) => {
                if self.accept(self.inv_z_sq) {
                    self.config.set_label(a, Spin::Right);
                    self.config.set_label(b, Spin::Left);
                    self.config.set_label(c, Spin::Right);
                    self.config.set_label(d, Spin::Left);
                    self.vertical -= 2;
                    self.accepted += 1;
                }
            }
            _ => {}
        }
    }

    fn accept(&mut self, ratio: T) -> bool {
        ratio >= T::one() || self.rng.gen::<f64>() < ratio.as_f64()
    }

    /// One sweep of `N * M` proposals.
    pub fn sweep(&mut self) {
        for _ in 0..self.config.lattice().sites() {
            self.step();
        }
    }
}

/// Batch-means estimate of an observable measured once per sweep.
#[derive(Debug, Clone, Copy)]
pub struct RunSummary<T> {
    pub mean: T,
    pub std_error: T,
    pub batches: usize,
    pub sweeps: u64,
    pub acceptance: f64,
}

/// Runs `burn_in` unmeasured sweeps, then `sweeps` measured ones, grouping
/// the per-sweep values of `observable` into `batches` batches.
pub fn estimate<T: Scalar, R: Rng>(
    sampler: &mut PlaquetteSampler<T, R>,
    burn_in: u64,
    sweeps: u64,
    batches: usize,
    mut observable: impl FnMut(&DimerConfig) -> T,
) -> Result<RunSummary<T>> {
    if batches < 2 {
        return Err(precondition("mcmc", "need at least 2 batches"));
    }
    let per_batch = sweeps / batches as u64;
    if per_batch == 0 {
        return Err(precondition("mcmc", format!("{sweeps} sweeps cannot fill {batches} batches")));
    }
    for _ in 0..burn_in {
        sampler.sweep();
    }
    let mut batch_means = Vec::with_capacity(batches);
    for _ in 0..batches {
        let mut acc = T::zero();
        for _ in 0..per_batch {
            sampler.sweep();
            acc = acc + observable(sampler.config());
        }
        batch_means.push(acc / T::of(per_batch as f64));
    }
    let b = T::of(batches as f64);
    let mean = batch_means.iter().copied().sum::<T>() / b;
    let var = batch_means
        .iter()
        .map(|&m| (m - mean) * (m - mean))
        .sum::<T>()
        / (b * (b - T::one()));
    Ok(RunSummary {
        mean,
        std_error: var.sqrt(),
        batches,
        sweeps: per_batch * batches as u64,
        acceptance: sampler.acceptance_rate(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::enumerate;
    use crate::lattice::TorusLattice;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Exact density conditioned on the zero winding sector, the component
    /// the plaquette chain actually explores.
    fn exact_sector_density(n: usize, m: usize, z: f64) -> f64 {
        let lat = TorusLattice::new(n, m).unwrap();
        let mut wsum = 0.0;
        let mut vsum = 0.0;
        let mut it = enumerate(lat, 10_000_000);
        while let Some(step) = it.advance() {
            step.unwrap();
            if it.current().winding_class() != (0, 0) {
                continue;
            }
            let w = z.powi(it.current().vertical_count() as i32);
            wsum += w;
            vsum += w * it.current().vertical_count() as f64;
        }
        vsum / wsum / (n * m) as f64
    }

    fn density(c: &DimerConfig) -> f64 {
        c.vertical_count() as f64 / c.lattice().sites() as f64
    }

    #[test]
    fn sampled_density_matches_sector_enumeration_from_both_starts() {
        let lat = TorusLattice::new(4, 4).unwrap();
        for z in [0.5f64, 1.0, 2.0] {
            let exact = exact_sector_density(4, 4, z);
            for (name, init) in [
                ("horizontal", DimerConfig::all_horizontal(lat)),
                ("vertical", DimerConfig::all_vertical(lat).unwrap()),
            ] {
                let rng = ChaCha8Rng::seed_from_u64(42);
                let mut s = PlaquetteSampler::new(init.clone(), z, rng).unwrap();
                let run = estimate(&mut s, 2_000, 20_000, 20, density).unwrap();
                let dev = (run.mean - exact).abs();
                assert!(
                    dev < 3.5 * run.std_error.max(1e-5),
                    "start {name} z={z}: mean {} vs exact {exact}, err {}",
                    run.mean,
                    run.std_error
                );
            }
        }
    }

    #[test]
    fn large_fugacity_drives_the_density_to_one_half() {
        let lat = TorusLattice::new(4, 4).unwrap();
        let rng = ChaCha8Rng::seed_from_u64(11);
        let mut s = PlaquetteSampler::new(DimerConfig::all_horizontal(lat), 50.0f64, rng).unwrap();
        let run = estimate(&mut s, 2_000, 5_000, 20, density).unwrap();
        assert!(run.mean > 0.45, "mean {} should approach 1/2", run.mean);
    }

    #[test]
    fn winding_class_is_preserved() {
        let lat = TorusLattice::new(6, 4).unwrap();
        for init in [DimerConfig::all_horizontal(lat), DimerConfig::all_vertical(lat).unwrap()] {
            let before = init.winding_class();
            let rng = ChaCha8Rng::seed_from_u64(7);
            let mut s = PlaquetteSampler::new(init, 1.3f64, rng).unwrap();
            for _ in 0..500 {
                s.sweep();
            }
            assert!(s.config().validate());
            assert_eq!(s.config().winding_class(), before);
        }
    }

    #[test]
    fn cached_vertical_count_stays_consistent() {
        let lat = TorusLattice::new(4, 6).unwrap();
        let rng = ChaCha8Rng::seed_from_u64(3);
        let mut s = PlaquetteSampler::new(DimerConfig::all_horizontal(lat), 0.8f64, rng).unwrap();
        for _ in 0..200 {
            s.sweep();
            assert_eq!(s.vertical_count(), s.config().vertical_count());
        }
    }

    #[test]
    fn same_seed_reproduces_the_run() {
        let lat = TorusLattice::new(4, 4).unwrap();
        let mut means = Vec::new();
        for _ in 0..2 {
            let rng = ChaCha8Rng::seed_from_u64(99);
            let mut s = PlaquetteSampler::new(DimerConfig::all_horizontal(lat), 1.7f64, rng).unwrap();
            let run = estimate(&mut s, 100, 1_000, 10, density).unwrap();
            means.push(run.mean);
        }
        assert_eq!(means[0], means[1]);
    }

    #[test]
    fn proposals_move_the_chain_at_unit_fugacity() {
        let lat = TorusLattice::new(4, 4).unwrap();
        let rng = ChaCha8Rng::seed_from_u64(5);
        let mut s = PlaquetteSampler::new(DimerConfig::all_horizontal(lat), 1.0f64, rng).unwrap();
        for _ in 0..50 {
            s.sweep();
        }
        assert!(s.acceptance_rate() > 0.0 && s.acceptance_rate() < 1.0);
        assert!(s.vertical_count() > 0, "verticals appear under flips");
    }

    #[test]
    fn preconditions() {
        let lat = TorusLattice::new(4, 4).unwrap();
        let flat = TorusLattice::new(4, 1).unwrap();
        let rng = ChaCha8Rng::seed_from_u64(0);
        assert!(PlaquetteSampler::new(DimerConfig::all_horizontal(flat), 1.0f64, rng.clone()).is_err());
        assert!(PlaquetteSampler::new(DimerConfig::all_horizontal(lat), -1.0f64, rng.clone()).is_err());
        let mut s = PlaquetteSampler::new(DimerConfig::all_horizontal(lat), 1.0f64, rng).unwrap();
        assert!(estimate(&mut s, 0, 10, 1, density).is_err(), "one batch");
        assert!(estimate(&mut s, 0, 5, 10, density).is_err(), "too few sweeps");
    }
}
