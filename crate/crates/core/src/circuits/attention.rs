//! Quadratic-kernel attention with a polynomial reciprocal.
//!
//! Per query i the circuit computes slot-summed scores z_it = <q_i, k_t>,
//! maps them through the kernel quadratic, scales each kernel weight by the
//! public 1/denom_center (folding the denominator centering into the terms
//! keeps magnitudes inside the clip bound without changing any level), sums
//! the weights into the centered denominator, approximates its reciprocal
//! with a second quadratic, and multiplies the weighted value sum by that
//! normalizer.
//!
//! In full-sequence mode every query's kernel weights are materialized
//! before any normalizer completes, mirroring a batched evaluation; the
//! retained weight ciphertexts are what make the live-ciphertext peak scale
//! as T^2.

use crate::error::SimError;
use crate::mock_ckks::{Context, CtVector, PtVector};

use super::blocks::{chain_sum, input_projection, poly2_on_powers, readout_apply, tree_sum};
use super::trace::{seal, st, CircuitRun, Recorder, StageResult};
use super::{AttnMode, AttnParams, AttnProjection, Poly2};

/// Kernel quadratic applied to raw scores: 1 + z + z^2/2.
pub const KERNEL_POLY: Poly2 = Poly2::new(1.0, 1.0, 0.5);

/// Reciprocal quadratic applied to the centered denominator r: 1 - r + r^2.
pub const RECIP_POLY: Poly2 = Poly2::new(1.0, -1.0, 1.0);

fn check_lengths(qs: &[CtVector], ks: &[CtVector], vs: &[CtVector]) -> Result<(), SimError> {
    if qs.is_empty() {
        return Err(SimError::InvalidParams(
            "at least one input position is required".into(),
        ));
    }
    if qs.len() != ks.len() || ks.len() != vs.len() {
        return Err(SimError::InvalidParams(format!(
            "q/k/v lengths differ: {}/{}/{}",
            qs.len(),
            ks.len(),
            vs.len()
        )));
    }
    Ok(())
}

fn attention_core(
    ctx: &Context,
    rec: &mut Recorder<'_>,
    qs: &[CtVector],
    ks: &[CtVector],
    vs: &[CtVector],
    params: &AttnParams,
    mode: AttnMode,
) -> StageResult<CtVector> {
    let t_len = qs.len();
    let n = ctx.params().slot_count;
    let last = t_len - 1;
    let queries: Vec<usize> = match mode {
        AttnMode::FinalToken => vec![last],
        AttnMode::FullSequence => (0..t_len).collect(),
    };
    // Normalize working copies once: queried q positions, every k, every v.
    let label = "align_inputs";
    let mut qn: Vec<Option<CtVector>> = (0..t_len).map(|_| None).collect();
    for &i in &queries {
        qn[i] = Some(st(ctx.normalize_for_mult(&qs[i]), i, label)?);
    }
    let mut kn = Vec::with_capacity(t_len);
    for (t, k) in ks.iter().enumerate() {
        kn.push(st(ctx.normalize_for_mult(k), t, label)?);
    }
    let mut vn = Vec::with_capacity(t_len);
    for (t, v) in vs.iter().enumerate() {
        vn.push(st(ctx.normalize_for_mult(v), t, label)?);
    }
    rec.stage(label, &kn[0]);
    // Kernel weights for every (query, position) pair, all live at once.
    let inv_center = 1.0 / params.denom_center;
    let mut kernels: Vec<Vec<CtVector>> = Vec::with_capacity(queries.len());
    for &i in &queries {
        let q_i = qn[i].as_ref().expect("queried position was normalized");
        let mut row = Vec::with_capacity(t_len);
        for (t, k_t) in kn.iter().enumerate() {
            let label = format!("score[{i}][{t}]");
            let prod = st(ctx.mul_cc(q_i, k_t), t, &label)?;
            let z = st(ctx.slot_sum(&prod), t, &label)?;
            st(ctx.release(&prod), t, &label)?;
            rec.stage(&label, &z);
            let label = format!("kernel[{i}][{t}]");
            let zn = st(ctx.normalize_for_mult(&z), t, &label)?;
            let sq = st(ctx.mul_cc(&zn, &zn), t, &label)?;
            let sn = st(ctx.normalize_for_mult(&sq), t, &label)?;
            st(ctx.release(&sq), t, &label)?;
            let kappa = st(poly2_on_powers(ctx, &zn, &sn, &KERNEL_POLY), t, &label)?;
            st(ctx.release(&zn), t, &label)?;
            st(ctx.release(&sn), t, &label)?;
            st(ctx.release(&z), t, &label)?;
            let scaled = st(
                ctx.mul_cp(&kappa, &PtVector::splat(inv_center, n)),
                t,
                &label,
            )?;
            st(ctx.release(&kappa), t, &label)?;
            rec.stage(&label, &scaled);
            row.push(scaled);
        }
        let done = qn[i].take().expect("query copy still live");
        st(ctx.release(&done), i, &format!("kernel[{i}][{last}]"))?;
        kernels.push(row);
    }
    // Normalize, weight, and combine each query's outputs.
    let mut outputs = Vec::with_capacity(queries.len());
    for (row, &i) in kernels.iter().zip(&queries) {
        let label = format!("denominator[{i}]");
        let dsum = st(chain_sum(ctx, row), last, &label)?;
        let dref = dsum.as_ref().unwrap_or(&row[0]);
        rec.stage(&label, dref);
        let label = format!("normalizer[{i}]");
        let r = st(ctx.add_cp(dref, &PtVector::splat(-1.0, n)), last, &label)?;
        if let Some(d) = dsum {
            st(ctx.release(&d), last, &label)?;
        }
        let rn = st(ctx.normalize_for_mult(&r), last, &label)?;
        st(ctx.release(&r), last, &label)?;
        let sq = st(ctx.mul_cc(&rn, &rn), last, &label)?;
        let sn = st(ctx.normalize_for_mult(&sq), last, &label)?;
        st(ctx.release(&sq), last, &label)?;
        let rho = st(poly2_on_powers(ctx, &rn, &sn, &RECIP_POLY), last, &label)?;
        st(ctx.release(&rn), last, &label)?;
        st(ctx.release(&sn), last, &label)?;
        rec.stage(&label, &rho);
        let label = format!("numerator[{i}]");
        let mut terms = Vec::with_capacity(t_len);
        for (t, kw) in row.iter().enumerate() {
            terms.push(st(ctx.mul_cc(kw, &vn[t]), t, &label)?);
        }
        let num = st(tree_sum(ctx, terms), last, &label)?;
        rec.stage(&label, &num);
        let label = format!("output[{i}]");
        let out = st(ctx.mul_cc(&num, &rho), last, &label)?;
        st(ctx.release(&num), last, &label)?;
        st(ctx.release(&rho), last, &label)?;
        for kw in row {
            st(ctx.release(kw), last, &label)?;
        }
        rec.stage(&label, &out);
        outputs.push(out);
    }
    for ct in kn.iter().chain(&vn) {
        st(ctx.release(ct), last, "cleanup")?;
    }
    let pooled = match mode {
        AttnMode::FinalToken => outputs.pop().expect("one query produced one output"),
        AttnMode::FullSequence => {
            let label = "pool";
            let inv_t = 1.0 / t_len as f64;
            let mut scaled = Vec::with_capacity(outputs.len());
            for out in &outputs {
                scaled.push(st(ctx.mul_cp(out, &PtVector::splat(inv_t, n)), last, label)?);
            }
            for out in &outputs {
                st(ctx.release(out), last, label)?;
            }
            let pooled = st(tree_sum(ctx, scaled), last, label)?;
            rec.stage(label, &pooled);
            pooled
        }
    };
    match &params.readout {
        None => Ok(pooled),
        Some(r) => {
            let label = "readout";
            let out = st(readout_apply(ctx, &pooled, r), last, label)?;
            st(ctx.release(&pooled), last, label)?;
            rec.stage(label, &out);
            Ok(out)
        }
    }
}

/// Attention over caller-provided Q/K/V streams. Pass the same slice three
/// times for the cached (client-projected) variant.
pub fn poly_attention(
    ctx: &Context,
    qs: &[CtVector],
    ks: &[CtVector],
    vs: &[CtVector],
    params: &AttnParams,
    mode: AttnMode,
) -> Result<CircuitRun, SimError> {
    check_lengths(qs, ks, vs)?;
    params.validate(ctx.params().slot_count)?;
    let mut rec = Recorder::new(ctx);
    let res = attention_core(ctx, &mut rec, qs, ks, vs, params, mode);
    seal(rec, res)
}

fn qkv_one(
    ctx: &Context,
    x: &CtVector,
    proj: &AttnProjection,
) -> Result<(CtVector, CtVector, CtVector), SimError> {
    let z = input_projection(ctx, x, &proj.input)?;
    let zn = ctx.normalize_for_mult(&z)?;
    ctx.release(&z)?;
    let q = input_projection(ctx, &zn, &proj.wq)?;
    let k = input_projection(ctx, &zn, &proj.wk)?;
    let v = input_projection(ctx, &zn, &proj.wv)?;
    ctx.release(&zn)?;
    Ok((q, k, v))
}

/// Query, key, and value streams, one ciphertext per position each.
pub type QkvStreams = (Vec<CtVector>, Vec<CtVector>, Vec<CtVector>);

/// Homomorphic input and Q/K/V projections for every position. The shared
/// input projection output is rescaled once, so each of the three head maps
/// starts from the same degree-1 value.
pub fn qkv_project(
    ctx: &Context,
    xs: &[CtVector],
    proj: &AttnProjection,
) -> Result<QkvStreams, SimError> {
    let mut qs = Vec::with_capacity(xs.len());
    let mut ks = Vec::with_capacity(xs.len());
    let mut vs = Vec::with_capacity(xs.len());
    for x in xs {
        let (q, k, v) = qkv_one(ctx, x, proj)?;
        qs.push(q);
        ks.push(k);
        vs.push(v);
    }
    Ok((qs, ks, vs))
}

fn projected_body(
    ctx: &Context,
    rec: &mut Recorder<'_>,
    xs: &[CtVector],
    proj: &AttnProjection,
    params: &AttnParams,
    mode: AttnMode,
) -> StageResult<CtVector> {
    let mut qs = Vec::with_capacity(xs.len());
    let mut ks = Vec::with_capacity(xs.len());
    let mut vs = Vec::with_capacity(xs.len());
    for (t, x) in xs.iter().enumerate() {
        let label = format!("qkv_project[{t}]");
        let (q, k, v) = st(qkv_one(ctx, x, proj), t, &label)?;
        rec.stage(&label, &q);
        qs.push(q);
        ks.push(k);
        vs.push(v);
    }
    let out = attention_core(ctx, rec, &qs, &ks, &vs, params, mode)?;
    let last = xs.len() - 1;
    for ct in qs.iter().chain(&ks).chain(&vs) {
        st(ctx.release(ct), last, "cleanup")?;
    }
    Ok(out)
}

/// Entry point used by the runners: cached attention when `params` carries
/// no projection, otherwise the fully homomorphic projected variant.
pub fn attention_block(
    ctx: &Context,
    xs: &[CtVector],
    params: &AttnParams,
    mode: AttnMode,
) -> Result<CircuitRun, SimError> {
    params.validate(ctx.params().slot_count)?;
    match &params.projection {
        None => poly_attention(ctx, xs, xs, xs, params, mode),
        Some(proj) => {
            if xs.is_empty() {
                return Err(SimError::InvalidParams(
                    "at least one input position is required".into(),
                ));
            }
            let proj = proj.clone();
            let mut rec = Recorder::new(ctx);
            let res = projected_body(ctx, &mut rec, xs, &proj, params, mode);
            seal(rec, res)
        }
    }
}
