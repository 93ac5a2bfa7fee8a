//! The unoptimized gated recurrence: every gate is a ciphertext, including
//! the carry gate, so the state update is a ct-ct product chain whose depth
//! grows with sequence length.

use crate::error::SimError;
use crate::mock_ckks::{Context, CtVector};

use super::blocks::{eval_gate_write, input_projection, poly2_on_powers};
use super::trace::{seal, st, CircuitRun, Recorder, StageResult};
use super::{GateWritePoly, NaiveParams};

fn naive_body(
    ctx: &Context,
    xs: &[CtVector],
    p: &NaiveParams,
    rec: &mut Recorder<'_>,
) -> StageResult<CtVector> {
    let n = ctx.params().slot_count;
    let mut h = st(ctx.encrypt(&vec![0.0; n]), 0, "state_init")?;
    rec.stage("state_init", &h);
    for (t, x) in xs.iter().enumerate() {
        let mut projected: Option<CtVector> = None;
        if let Some(map) = &p.projection {
            let label = format!("project[{t}]");
            let z = st(input_projection(ctx, x, map), t, &label)?;
            rec.stage(&label, &z);
            projected = Some(z);
        }
        let xin = projected.as_ref().unwrap_or(x);
        // Carry gate from its own square: no sharing with the write path.
        let label = format!("carry_gate[{t}]");
        let xn = st(ctx.normalize_for_mult(xin), t, &label)?;
        let sq = st(ctx.mul_cc(&xn, &xn), t, &label)?;
        let sn = st(ctx.normalize_for_mult(&sq), t, &label)?;
        st(ctx.release(&sq), t, &label)?;
        let ga = st(poly2_on_powers(ctx, &xn, &sn, &p.carry_gate), t, &label)?;
        st(ctx.release(&xn), t, &label)?;
        st(ctx.release(&sn), t, &label)?;
        rec.stage(&label, &ga);
        // Input gate and write candidate share a second square.
        let shared = GateWritePoly {
            gate: p.input_gate,
            write: p.write,
        };
        let label = format!("gate_write[{t}]");
        let (gb, u) = st(eval_gate_write(ctx, xin, &shared), t, &label)?;
        if let Some(z) = projected.take() {
            st(ctx.release(&z), t, &label)?;
        }
        rec.stage(&label, &gb);
        let label = format!("local_write[{t}]");
        let w = st(ctx.mul_cc(&gb, &u), t, &label)?;
        st(ctx.release(&gb), t, &label)?;
        st(ctx.release(&u), t, &label)?;
        rec.stage(&label, &w);
        // h <- g_A h + w with an encrypted carry gate.
        let label = format!("carry[{t}]");
        let c = st(ctx.mul_cc(&ga, &h), t, &label)?;
        st(ctx.release(&ga), t, &label)?;
        st(ctx.release(&h), t, &label)?;
        let next = st(ctx.add_cc(&c, &w), t, &label)?;
        st(ctx.release(&c), t, &label)?;
        st(ctx.release(&w), t, &label)?;
        h = next;
        rec.stage(&label, &h);
    }
    Ok(h)
}

/// Runs the naive recurrence over the inputs and returns the final state.
pub fn naive_recurrence(
    ctx: &Context,
    xs: &[CtVector],
    params: &NaiveParams,
) -> Result<CircuitRun, SimError> {
    if xs.is_empty() {
        return Err(SimError::InvalidParams(
            "at least one input position is required".into(),
        ));
    }
    params.validate(ctx.params().slot_count)?;
    let mut rec = Recorder::new(ctx);
    let res = naive_body(ctx, xs, params, &mut rec);
    seal(rec, res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{seeded_inputs, RunStatus};
    use crate::mock_ckks::SimParams;

    fn test_ctx(depth: u32) -> Context {
        Context::new(SimParams::bench(depth, 11)).unwrap()
    }

    fn encrypt_inputs(ctx: &Context, rows: &[Vec<f64>]) -> Vec<CtVector> {
        rows.iter().map(|r| ctx.encrypt(r).unwrap()).collect()
    }

    #[test]
    fn state_depth_grows_with_length_and_exhausts_at_the_budget() {
        let ctx = test_ctx(8);
        let xs = encrypt_inputs(&ctx, &seeded_inputs(7, 8, 4));
        let run = naive_recurrence(&ctx, &xs, &NaiveParams::default()).unwrap();
        assert_eq!(run.status, RunStatus::Completed { level: 0, degree: 2 });

        let ctx = test_ctx(8);
        let xs = encrypt_inputs(&ctx, &seeded_inputs(8, 8, 4));
        let run = naive_recurrence(&ctx, &xs, &NaiveParams::default()).unwrap();
        assert_eq!(
            run.status,
            RunStatus::LevelExhausted {
                step: 7,
                stage: "carry[7]".into()
            }
        );
    }

    #[test]
    fn four_ct_ct_products_per_step() {
        let ctx = test_ctx(16);
        let xs = encrypt_inputs(&ctx, &seeded_inputs(5, 8, 4));
        naive_recurrence(&ctx, &xs, &NaiveParams::default()).unwrap();
        assert_eq!(
            ctx.ledger().mul_ct_ct,
            20,
            "two squares, one write, one carry per step"
        );
    }

    #[test]
    fn matches_plain_recurrence() {
        let rows = seeded_inputs(3, 8, 29);
        let ctx = test_ctx(16);
        let xs = encrypt_inputs(&ctx, &rows);
        let p = NaiveParams::default();
        let run = naive_recurrence(&ctx, &xs, &p).unwrap();
        let got = ctx.decrypt(run.output.as_ref().unwrap()).slots;
        for slot in 0..8 {
            let mut h = 0.0;
            for row in &rows {
                let x = row[slot];
                h = p.carry_gate.eval(x) * h + p.input_gate.eval(x) * p.write.eval(x);
            }
            assert!(
                (got[slot] - h).abs() < 1e-10,
                "slot {slot}: expected {h}, got {}",
                got[slot]
            );
        }
    }
}
