//! Thread-parallel Monte Carlo. Chunks are fixed by the sample count, so the
//! estimates do not depend on the number of threads.

use hyperbar_core::montecarlo::{self, McConfig, McEstimate, McTask, Moments};
use hyperbar_core::pricing::BarrierContract;
use hyperbar_core::{PiecewiseModel, Result};
use rayon::prelude::*;

pub fn run(task: &McTask<'_>) -> Vec<McEstimate> {
    let chunks: Vec<Moments> = task.chunks().into_par_iter().map(|r| task.run_chunk(r)).collect();
    montecarlo::reduce(&chunks).estimates()
}

/// `(price, delta, gamma)` of a barrier contract.
pub fn barrier(m: &PiecewiseModel, contract: &BarrierContract, cfg: &McConfig) -> Result<[McEstimate; 3]> {
    let e = run(&montecarlo::barrier_task(m, contract, cfg)?);
    Ok([e[0], e[1], e[2]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use hyperbar_core::ModelPeriod;

    #[test]
    fn matches_serial_run_bit_for_bit() {
        let m = PiecewiseModel::risk_neutral(0.02, 0.0, 100.0, vec![ModelPeriod::new(1.0, 0.2, vec![], vec![])]).unwrap();
        let c = BarrierContract::digital(90.0, vec![1.0]);
        let cfg = McConfig { paths: 20_000, dt: 0.01, ..McConfig::default() };
        let task = montecarlo::barrier_task(&m, &c, &cfg).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let par = pool.install(|| run(&task));
        assert_eq!(par, task.run());
    }
}
