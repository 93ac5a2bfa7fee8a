//! Gated state-space circuits: closed form, decay banks, streaming.

use crate::error::SimError;
use crate::mock_ckks::{Context, CtVector, PtVector};

use super::blocks::{eval_gate_write, hssm_local_write, input_projection, tree_sum};
use super::trace::{seal, st, CircuitRun, Recorder, StageResult};
use super::{GateWritePoly, HssmParams, ProjectionMap};

/// Shared per-position prefix: optional public projection, gate and write
/// candidate from one shared square, then the local write product.
pub(crate) fn write_stage(
    ctx: &Context,
    rec: &mut Recorder<'_>,
    t: usize,
    x: &CtVector,
    projection: Option<&ProjectionMap>,
    poly: &GateWritePoly,
) -> StageResult<CtVector> {
    let mut projected: Option<CtVector> = None;
    if let Some(map) = projection {
        let label = format!("project[{t}]");
        let z = st(input_projection(ctx, x, map), t, &label)?;
        rec.stage(&label, &z);
        projected = Some(z);
    }
    let xin = projected.as_ref().unwrap_or(x);
    let label = format!("gate_write[{t}]");
    let (g, u) = st(eval_gate_write(ctx, xin, poly), t, &label)?;
    if let Some(z) = projected.take() {
        st(ctx.release(&z), t, &label)?;
    }
    rec.stage(&label, &g);
    let label = format!("local_write[{t}]");
    let w = st(hssm_local_write(ctx, &g, &u), t, &label)?;
    st(ctx.release(&g), t, &label)?;
    st(ctx.release(&u), t, &label)?;
    rec.stage(&label, &w);
    Ok(w)
}

fn closed_body(
    ctx: &Context,
    xs: &[CtVector],
    p: &HssmParams,
    rec: &mut Recorder<'_>,
) -> StageResult<CtVector> {
    let t_len = xs.len();
    let k_len = p.decays.len();
    let n = ctx.params().slot_count;
    let last = t_len - 1;
    let mut tracks: Vec<Vec<CtVector>> = (0..k_len).map(|_| Vec::with_capacity(t_len)).collect();
    for (t, x) in xs.iter().enumerate() {
        let w = write_stage(ctx, rec, t, x, p.projection.as_ref(), &p.poly)?;
        // The write feeds one plaintext product per track, so it is
        // normalized exactly once here.
        let label = format!("decay_scale[{t}]");
        let wn = st(ctx.normalize_for_mult(&w), t, &label)?;
        st(ctx.release(&w), t, &label)?;
        for (k, decay) in p.decays.iter().enumerate() {
            let gain = decay.powi((t_len - 1 - t) as i32);
            let scaled = st(ctx.mul_cp(&wn, &PtVector::splat(gain, n)), t, &label)?;
            tracks[k].push(scaled);
        }
        st(ctx.release(&wn), t, &label)?;
        rec.stage(&label, tracks[0].last().expect("track filled this step"));
    }
    let mut track_sums = Vec::with_capacity(k_len);
    for track in tracks {
        track_sums.push(st(tree_sum(ctx, track), last, "aggregate")?);
    }
    rec.stage("aggregate", &track_sums[0]);
    // Readout: bank_combine folds into the plaintext weights, so the whole
    // bank recombines in the same single multiplication stage.
    let label = "readout";
    let mut terms = Vec::with_capacity(k_len);
    for (sum, combine) in track_sums.iter().zip(&p.bank_combine) {
        let weights: Vec<f64> = p.readout.weights.iter().map(|w| w * combine).collect();
        terms.push(st(ctx.mul_cp(sum, &PtVector::new(weights)), last, label)?);
    }
    for sum in &track_sums {
        st(ctx.release(sum), last, label)?;
    }
    let combined = st(tree_sum(ctx, terms), last, label)?;
    let pre = if p.readout.dot {
        let s = st(ctx.slot_sum(&combined), last, label)?;
        st(ctx.release(&combined), last, label)?;
        s
    } else {
        combined
    };
    let out = st(ctx.add_cp(&pre, &PtVector::splat(p.readout.bias, n)), last, label)?;
    st(ctx.release(&pre), last, label)?;
    rec.stage(label, &out);
    Ok(out)
}

fn check_inputs(ctx: &Context, xs: &[CtVector], p: &HssmParams) -> Result<(), SimError> {
    if xs.is_empty() {
        return Err(SimError::InvalidParams(
            "at least one input position is required".into(),
        ));
    }
    p.validate(ctx.params().slot_count)
}

/// Closed-form evaluation with a single public decay.
pub fn hssm_closed_form(
    ctx: &Context,
    xs: &[CtVector],
    params: &HssmParams,
) -> Result<CircuitRun, SimError> {
    if params.decays.len() != 1 {
        return Err(SimError::InvalidParams(format!(
            "closed form takes one decay, got a bank of {}; use multi_decay_hssm",
            params.decays.len()
        )));
    }
    check_inputs(ctx, xs, params)?;
    let mut rec = Recorder::new(ctx);
    let res = closed_body(ctx, xs, params, &mut rec);
    seal(rec, res)
}

/// Closed-form evaluation over a decay bank. With one decay and a combine
/// weight of 1 this is operation-for-operation the single-decay circuit.
pub fn multi_decay_hssm(
    ctx: &Context,
    xs: &[CtVector],
    params: &HssmParams,
) -> Result<CircuitRun, SimError> {
    check_inputs(ctx, xs, params)?;
    let mut rec = Recorder::new(ctx);
    let res = closed_body(ctx, xs, params, &mut rec);
    seal(rec, res)
}

fn streaming_body(
    ctx: &Context,
    xs: &[CtVector],
    p: &HssmParams,
    rec: &mut Recorder<'_>,
) -> StageResult<CtVector> {
    let n = ctx.params().slot_count;
    let a = p.decays[0];
    let mut h = st(ctx.encrypt(&vec![0.0; n]), 0, "state_init")?;
    rec.stage("state_init", &h);
    for (t, x) in xs.iter().enumerate() {
        let w = write_stage(ctx, rec, t, x, p.projection.as_ref(), &p.poly)?;
        // h <- a h + w. The running state is a product output, so the
        // plaintext carry costs one rescale per step; this is the level
        // treadmill that caps how many steps can stream.
        let label = format!("carry[{t}]");
        let ah = st(ctx.mul_cp(&h, &PtVector::splat(a, n)), t, &label)?;
        st(ctx.release(&h), t, &label)?;
        let next = st(ctx.add_cc(&ah, &w), t, &label)?;
        st(ctx.release(&ah), t, &label)?;
        st(ctx.release(&w), t, &label)?;
        h = next;
        rec.stage(&label, &h);
    }
    Ok(h)
}

/// Step-by-step evaluation holding one running encrypted state. Returns the
/// final state; no readout is applied (the readout field of `params` is
/// ignored here).
pub fn hssm_streaming(
    ctx: &Context,
    xs: &[CtVector],
    params: &HssmParams,
) -> Result<CircuitRun, SimError> {
    if params.decays.len() != 1 {
        return Err(SimError::InvalidParams(format!(
            "streaming takes one decay, got a bank of {}",
            params.decays.len()
        )));
    }
    check_inputs(ctx, xs, params)?;
    let mut rec = Recorder::new(ctx);
    let res = streaming_body(ctx, xs, params, &mut rec);
    seal(rec, res)
}
