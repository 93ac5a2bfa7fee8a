//! Cross-circuit equivalences over seeded input sweeps.

use hssmlab_core::circuits::{
    hssm_closed_form, hssm_streaming, multi_decay_hssm, seeded_inputs, GateWritePoly, HssmParams,
    Readout,
};
use hssmlab_core::mock_ckks::{Context, CtVector, SimParams};

fn encrypt_inputs(ctx: &Context, rows: &[Vec<f64>]) -> Vec<CtVector> {
    rows.iter().map(|r| ctx.encrypt(r).unwrap()).collect()
}

fn identity_params() -> HssmParams {
    HssmParams::single(
        0.5,
        GateWritePoly::default(),
        Readout::diagonal(vec![1.0; 8], 0.0),
    )
}

#[test]
fn streaming_matches_closed_form_across_seeds() {
    let tol = (-40f64).exp2();
    for seed in 0..100u64 {
        let rows = seeded_inputs(6, 8, seed);

        let ctx = Context::new(SimParams::bench(12, seed)).unwrap();
        let xs = encrypt_inputs(&ctx, &rows);
        let closed = hssm_closed_form(&ctx, &xs, &identity_params()).unwrap();
        let closed_out = ctx.decrypt(closed.output.as_ref().unwrap()).slots;

        let ctx = Context::new(SimParams::bench(12, seed)).unwrap();
        let xs = encrypt_inputs(&ctx, &rows);
        let streaming = hssm_streaming(&ctx, &xs, &identity_params()).unwrap();
        let streaming_out = ctx.decrypt(streaming.output.as_ref().unwrap()).slots;

        for (slot, (c, s)) in closed_out.iter().zip(&streaming_out).enumerate() {
            assert!(
                (c - s).abs() < tol,
                "seed {seed} slot {slot}: closed {c}, streaming {s}"
            );
        }
    }
}

#[test]
fn single_decay_bank_is_exactly_the_closed_form() {
    for seed in 0..20u64 {
        let rows = seeded_inputs(5, 8, seed);

        let ctx = Context::new(SimParams::bench(10, seed)).unwrap();
        let xs = encrypt_inputs(&ctx, &rows);
        let closed = hssm_closed_form(&ctx, &xs, &identity_params()).unwrap();
        let closed_out = ctx.decrypt(closed.output.as_ref().unwrap()).slots;
        let closed_ledger = ctx.ledger();

        let mut bank = identity_params();
        bank.bank_combine = vec![1.0];
        let ctx = Context::new(SimParams::bench(10, seed)).unwrap();
        let xs = encrypt_inputs(&ctx, &rows);
        let multi = multi_decay_hssm(&ctx, &xs, &bank).unwrap();
        let multi_out = ctx.decrypt(multi.output.as_ref().unwrap()).slots;

        assert_eq!(closed_out, multi_out, "seed {seed}");
        assert_eq!(closed.status, multi.status, "seed {seed}");
        assert_eq!(closed_ledger, ctx.ledger(), "seed {seed}");
    }
}
