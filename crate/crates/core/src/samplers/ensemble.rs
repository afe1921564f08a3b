use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy)]
pub struct EnsembleOptions {
    pub n_replicas: usize,
    pub base_seed: u64,
    /// Worker threads; `None` uses the hardware parallelism.
    pub threads: Option<usize>,
}

/// Runs `n_replicas` independent jobs, replica `i` owning
/// `RngStream::new(base_seed, i)`. Results come back in replica order and do
/// not depend on the number of threads.
pub fn run_ensemble<T, F>(options: EnsembleOptions, job: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &mut RngStream) -> Result<T> + Sync,
{
    if options.n_replicas == 0 {
        return Err(Error::InvalidArgument("at least one replica is required".into()));
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = options.threads {
        builder = builder.num_threads(t.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    pool.install(|| {
        (0..options.n_replicas)
            .into_par_iter()
            .map(|i| {
                let mut rng = RngStream::new(options.base_seed, i as u64);
                job(i, &mut rng)
            })
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn results_independent_of_thread_count() {
        let job = |i: usize, rng: &mut RngStream| -> Result<(usize, f64)> {
            let s: f64 = (0..1000).map(|_| rng.standard_normal()).sum();
            Ok((i, s))
        };
        let one = run_ensemble(
            EnsembleOptions {
                n_replicas: 8,
                base_seed: 5,
                threads: Some(1),
            },
            job,
        )
        .unwrap();
        let four = run_ensemble(
            EnsembleOptions {
                n_replicas: 8,
                base_seed: 5,
                threads: Some(4),
            },
            job,
        )
        .unwrap();
        assert_eq!(one, four);
        assert!(one.iter().enumerate().all(|(i, r)| r.0 == i));
    }

    #[test]
    fn zero_replicas_rejected() {
        let r = run_ensemble(
            EnsembleOptions {
                n_replicas: 0,
                base_seed: 0,
                threads: None,
            },
            |_, _| Ok(()),
        );
        assert!(r.is_err());
    }
}
