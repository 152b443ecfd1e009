//! Iterative de-noising driver.
//!
//! Each step moves every point `p` of the current subset to
//! `p + c * grad F(p) / M`, with all gradients taken against the subset as it
//! was at the start of the step. `M` is the largest gradient norm over the
//! initial subset and stays fixed for the whole run.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{norm, PointCloud};
use crate::kernelfield::{field_gradient_into, FieldParams};

/// Smallest usable normalization constant.
pub const MIN_GRADIENT_NORM: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DenoiseParams {
    pub field: FieldParams,
    /// Largest distance any point may move in one step.
    pub step_c: f64,
    pub iterations: usize,
    /// Snapshot cadence; 0 keeps only the final state.
    pub snapshot_every: usize,
}

impl DenoiseParams {
    pub fn validate(&self) -> Result<()> {
        self.field.validate()?;
        if !(self.step_c > 0.0 && self.step_c.is_finite()) {
            return Err(Error::invalid("step_c", format!("must be positive, got {}", self.step_c)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenoiseState {
    pub iteration: usize,
    pub s: PointCloud,
    pub m_norm: f64,
}

impl DenoiseState {
    /// Iteration-0 state with `M` computed from `s0`.
    pub fn initial(data: &PointCloud, s0: PointCloud, field: &FieldParams) -> Result<Self> {
        let m_norm = compute_m(data, &s0, field)?;
        Ok(Self {
            iteration: 0,
            s: s0,
            m_norm,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenoiseTrace {
    pub params: DenoiseParams,
    pub m_norm: f64,
    /// `(iteration, subset)` pairs in strictly increasing iteration order.
    pub snapshots: Vec<(usize, PointCloud)>,
    pub final_cloud: PointCloud,
}

fn check_clouds(data: &PointCloud, s: &PointCloud) -> Result<()> {
    data.ensure_non_empty()?;
    s.ensure_non_empty()?;
    data.ensure_dim(s.dim())
}

/// `s` reordered lexicographically by coordinates, so that the repulsion sum
/// does not depend on the order in which the caller lists the points.
fn canonical_order(s: &PointCloud) -> PointCloud {
    let mut idx: Vec<usize> = (0..s.len()).collect();
    idx.sort_by(|&a, &b| {
        s.point(a)
            .iter()
            .zip(s.point(b))
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    s.select(&idx)
}

/// Evaluates the field gradient at every point of `s`, against `s` itself.
fn gradients(data: &PointCloud, s: &PointCloud, field: &FieldParams, parallel: bool) -> Vec<f64> {
    let d = s.dim();
    let repulsion = canonical_order(s);
    let mut out = vec![0.0; s.as_flat().len()];
    let eval = |(i, g): (usize, &mut [f64])| {
        let mut scratch = vec![0.0; d];
        field_gradient_into(s.point(i), data, &repulsion, field, &mut scratch, g);
    };
    if parallel {
        out.par_chunks_mut(d).enumerate().for_each(eval);
    } else {
        out.chunks_mut(d).enumerate().for_each(eval);
    }
    out
}

pub fn compute_m(data: &PointCloud, s0: &PointCloud, field: &FieldParams) -> Result<f64> {
    check_clouds(data, s0)?;
    field.validate()?;
    let grads = gradients(data, s0, field, true);
    let mut m: f64 = 0.0;
    for (i, g) in grads.chunks_exact(s0.dim()).enumerate() {
        let n = norm(g);
        if !n.is_finite() {
            return Err(Error::NonFiniteGradient { index: i, iteration: 0 });
        }
        m = m.max(n);
    }
    if m < MIN_GRADIENT_NORM {
        return Err(Error::DegenerateField);
    }
    Ok(m)
}

fn step_impl(data: &PointCloud, state: &DenoiseState, params: &DenoiseParams, parallel: bool) -> Result<DenoiseState> {
    check_clouds(data, &state.s)?;
    if !(state.m_norm > 0.0 && state.m_norm.is_finite()) {
        return Err(Error::invalid("m_norm", format!("must be positive, got {}", state.m_norm)));
    }
    let d = state.s.dim();
    let grads = gradients(data, &state.s, &params.field, parallel);
    let scale = params.step_c / state.m_norm;
    let mut next = state.s.as_flat().to_vec();
    for (i, (p, g)) in next.chunks_exact_mut(d).zip(grads.chunks_exact(d)).enumerate() {
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteGradient {
                index: i,
                iteration: state.iteration,
            });
        }
        for (x, gx) in p.iter_mut().zip(g) {
            *x += scale * gx;
        }
    }
    Ok(DenoiseState {
        iteration: state.iteration + 1,
        s: PointCloud::from_flat(d, next)?,
        m_norm: state.m_norm,
    })
}

/// One simultaneous update of the whole subset. Per-point gradients run in
/// parallel; the result is bit-identical to [`denoise_step_sequential`].
pub fn denoise_step(data: &PointCloud, state: &DenoiseState, params: &DenoiseParams) -> Result<DenoiseState> {
    step_impl(data, state, params, true)
}

pub fn denoise_step_sequential(data: &PointCloud, state: &DenoiseState, params: &DenoiseParams) -> Result<DenoiseState> {
    step_impl(data, state, params, false)
}

/// Runs `iterations` further steps from `state`, keeping its `M`.
pub fn denoise_continue(data: &PointCloud, mut state: DenoiseState, params: &DenoiseParams, iterations: usize) -> Result<DenoiseState> {
    for _ in 0..iterations {
        state = denoise_step(data, &state, params)?;
    }
    Ok(state)
}

pub fn denoise_run(data: &PointCloud, s0: &PointCloud, params: &DenoiseParams) -> Result<DenoiseTrace> {
    params.validate()?;
    let mut state = DenoiseState::initial(data, s0.clone(), &params.field)?;
    log::debug!("normalization constant M = {}", state.m_norm);

    let mut snapshots = Vec::new();
    let every = params.snapshot_every;
    if every > 0 {
        snapshots.push((0, state.s.clone()));
    }
    for _ in 0..params.iterations {
        state = denoise_step(data, &state, params)?;
        if every > 0 && state.iteration % every == 0 {
            snapshots.push((state.iteration, state.s.clone()));
        }
    }
    if snapshots.last().map(|(it, _)| *it) != Some(state.iteration) {
        snapshots.push((state.iteration, state.s.clone()));
    }
    Ok(DenoiseTrace {
        params: *params,
        m_norm: state.m_norm,
        snapshots,
        final_cloud: state.s,
    })
}
