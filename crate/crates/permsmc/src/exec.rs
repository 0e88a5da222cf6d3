use permsmc_core::smc::Executor;
use permsmc_core::Matching;
use rayon::prelude::*;

/// Mutates particles on the current rayon pool.
#[derive(Debug, Clone, Copy, Default)]
pub struct RayonExecutor;

impl Executor for RayonExecutor {
    fn for_each_particle(&self, particles: &mut [Matching], f: &(dyn Fn(usize, &mut Matching) + Sync)) {
        particles.par_iter_mut().enumerate().for_each(|(i, m)| f(i, m));
    }
}
