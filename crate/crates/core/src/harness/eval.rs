use std::panic::{catch_unwind, AssertUnwindSafe};

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Evaluates candidate batches, optionally across a dedicated worker pool.
/// Results always come back in candidate order.
pub struct Evaluator {
    pool: Option<rayon::ThreadPool>,
}

impl Evaluator {
    pub fn new(threads: usize) -> Result<Self> {
        if threads == 0 {
            return Err(Error::ConfigInvalid("threads must be at least 1".into()));
        }
        let pool = if threads == 1 {
            None
        } else {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::ConfigInvalid(format!("cannot start worker pool: {e}")))?;
            Some(pool)
        };
        Ok(Self { pool })
    }

    pub fn evaluate<T, F>(&self, rows: &[T], objective: &F) -> Result<Vec<f64>>
    where
        T: Sync,
        F: Fn(&T) -> f64 + Sync,
    {
        let eval_one = |(i, row): (usize, &T)| -> Result<f64> {
            catch_unwind(AssertUnwindSafe(|| objective(row))).map_err(|payload| Error::EvaluationFailed {
                row: i,
                message: panic_message(payload.as_ref()),
            })
        };
        let results: Vec<Result<f64>> = match &self.pool {
            None => rows.iter().enumerate().map(eval_one).collect(),
            Some(pool) => pool.install(|| rows.par_iter().enumerate().map(eval_one).collect()),
        };
        results.into_iter().collect()
    }
}

fn panic_message(payload: &(dyn std::any::Any + Send)) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        (*s).to_string()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "objective panicked".to_string()
    }
}

/// Copies matrix rows into owned vectors.
pub fn matrix_rows<T: nalgebra::Scalar + Copy>(x: &DMatrix<T>) -> Vec<Vec<T>> {
    (0..x.nrows()).map(|i| x.row(i).iter().copied().collect()).collect()
}

/// `fitness[i] = objective(row i of x)`, evaluated on `threads` workers.
pub fn batch_evaluate<F>(objective: &F, x: &DMatrix<f64>, threads: usize) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let rows = matrix_rows(x);
    Evaluator::new(threads)?.evaluate(&rows, &|row: &Vec<f64>| objective(row))
}
