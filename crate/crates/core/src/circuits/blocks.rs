//! Shared circuit building blocks.
//!
//! Everything here follows the same ownership rule: blocks take operand
//! references, release only the intermediates they create, and hand the
//! caller a single owned result. Counting discipline matters more than
//! arithmetic shortcuts; in particular polynomial evaluation always emits
//! both coefficient products even when a coefficient is zero, so operation
//! schedules do not depend on parameter values.

use crate::error::SimError;
use crate::mock_ckks::{Context, CtVector, PtVector};

use super::{Poly2, ProjectionMap, Readout};

/// Evaluates a quadratic on already-normalized powers: `xn` is the degree-1
/// input, `sn` its rescaled square. Two plaintext products, one
/// ciphertext add (the constant term rides in with add_cp).
pub(crate) fn poly2_on_powers(
    ctx: &Context,
    xn: &CtVector,
    sn: &CtVector,
    p: &Poly2,
) -> Result<CtVector, SimError> {
    let n = ctx.params().slot_count;
    let t1 = ctx.mul_cp(xn, &PtVector::splat(p.c1, n))?;
    let t2 = ctx.mul_cp(sn, &PtVector::splat(p.c2, n))?;
    let sum = ctx.add_cc(&t1, &t2)?;
    ctx.release(&t1)?;
    ctx.release(&t2)?;
    let out = ctx.add_cp(&sum, &PtVector::splat(p.c0, n))?;
    ctx.release(&sum)?;
    Ok(out)
}

/// Gate and write candidate from one shared square: normalizes the input,
/// squares it once, and evaluates both quadratics on the shared powers.
pub fn eval_gate_write(
    ctx: &Context,
    x: &CtVector,
    poly: &super::GateWritePoly,
) -> Result<(CtVector, CtVector), SimError> {
    let xn = ctx.normalize_for_mult(x)?;
    let sq = ctx.mul_cc(&xn, &xn)?;
    let sn = ctx.normalize_for_mult(&sq)?;
    ctx.release(&sq)?;
    let g = poly2_on_powers(ctx, &xn, &sn, &poly.gate)?;
    let u = poly2_on_powers(ctx, &xn, &sn, &poly.write)?;
    ctx.release(&xn)?;
    ctx.release(&sn)?;
    Ok((g, u))
}

/// The write that actually lands in state: elementwise gate times candidate.
pub fn hssm_local_write(ctx: &Context, g: &CtVector, u: &CtVector) -> Result<CtVector, SimError> {
    ctx.mul_cc(g, u)
}

/// Public linear map in diagonal form: `width` rotations, `width` plaintext
/// products, a balanced accumulation, and a bias add. Costs one rescale only
/// when the input arrives at degree 2.
pub fn input_projection(
    ctx: &Context,
    x: &CtVector,
    map: &ProjectionMap,
) -> Result<CtVector, SimError> {
    map.validate(ctx.params().slot_count)?;
    let xn = ctx.normalize_for_mult(x)?;
    let mut acc: Option<CtVector> = None;
    for (k, diag) in map.diagonals.iter().enumerate() {
        let rot = ctx.rotate_slots(&xn, k)?;
        let term = ctx.mul_cp(&rot, &PtVector::new(diag.clone()))?;
        ctx.release(&rot)?;
        acc = Some(match acc.take() {
            None => term,
            Some(prev) => {
                let next = ctx.add_cc(&prev, &term)?;
                ctx.release(&prev)?;
                ctx.release(&term)?;
                next
            }
        });
    }
    let sum = acc.expect("projection maps have at least one diagonal");
    ctx.release(&xn)?;
    let out = ctx.add_cp(&sum, &PtVector::new(map.bias.clone()))?;
    ctx.release(&sum)?;
    Ok(out)
}

/// Linear readout over the final state: elementwise weights, an optional
/// slot-sum fold for dot-product form, then the bias.
pub fn readout_apply(ctx: &Context, h: &CtVector, r: &Readout) -> Result<CtVector, SimError> {
    let n = ctx.params().slot_count;
    let prod = ctx.mul_cp(h, &PtVector::new(r.weights.clone()))?;
    let pre = if r.dot {
        let s = ctx.slot_sum(&prod)?;
        ctx.release(&prod)?;
        s
    } else {
        prod
    };
    let out = ctx.add_cp(&pre, &PtVector::splat(r.bias, n))?;
    ctx.release(&pre)?;
    Ok(out)
}

/// Balanced pairwise sum that consumes its inputs. All inputs must share
/// metadata, so the result metadata does not depend on association order.
pub(crate) fn tree_sum(ctx: &Context, mut items: Vec<CtVector>) -> Result<CtVector, SimError> {
    if items.is_empty() {
        return Err(SimError::InvalidParams("tree_sum over no terms".into()));
    }
    while items.len() > 1 {
        let mut next = Vec::with_capacity(items.len().div_ceil(2));
        let mut iter = items.into_iter();
        while let Some(a) = iter.next() {
            match iter.next() {
                Some(b) => {
                    let s = ctx.add_cc(&a, &b)?;
                    ctx.release(&a)?;
                    ctx.release(&b)?;
                    next.push(s);
                }
                None => next.push(a),
            }
        }
        items = next;
    }
    Ok(items.pop().expect("loop leaves exactly one item"))
}

/// Left-to-right sum over borrowed terms. Returns `None` for a single term
/// so the caller can keep using the term itself without a copy.
pub(crate) fn chain_sum(ctx: &Context, items: &[CtVector]) -> Result<Option<CtVector>, SimError> {
    if items.len() < 2 {
        return Ok(None);
    }
    let mut acc = ctx.add_cc(&items[0], &items[1])?;
    for item in &items[2..] {
        let next = ctx.add_cc(&acc, item)?;
        ctx.release(&acc)?;
        acc = next;
    }
    Ok(Some(acc))
}
