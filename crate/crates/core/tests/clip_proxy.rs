//! Saturation-rate proxy for noise growth. Every operation result is
//! clamped at the clip bound, so the count of clamped slots tracks how much
//! probability mass each family's state pushes toward the bound. The two
//! recurrences here share the write branch and the mean carry coefficient;
//! the only structural difference is whether the carry gate is the public
//! scalar 0.55 or the matching data-dependent polynomial.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use hssmlab_core::circuits::{
    hssm_streaming, naive_recurrence, GateWritePoly, HssmParams, NaiveParams, Poly2, Readout,
};
use hssmlab_core::mock_ckks::{Context, SimParams};

const STEPS: usize = 128;
const DEPTH: u32 = 150;
const SEEDS: u64 = 50;

fn proxy_poly() -> GateWritePoly {
    GateWritePoly {
        gate: Poly2::new(0.55, 0.2, 0.0),
        write: Poly2::new(0.4, 0.4, 0.0),
    }
}

fn proxy_inputs(seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..STEPS)
        .map(|_| (0..8).map(|_| rng.random_range(-0.999..=0.999)).collect())
        .collect()
}

/// Runs both recurrences on the same input stream and returns their clip
/// event counts.
fn clip_counts(clip_bound: f64, seed: u64) -> (u64, u64) {
    let rows = proxy_inputs(seed);

    let ctx = Context::new(SimParams::new(DEPTH, 50, 8, clip_bound, seed)).unwrap();
    let xs: Vec<_> = rows.iter().map(|r| ctx.encrypt(r).unwrap()).collect();
    let params = HssmParams::single(0.55, proxy_poly(), Readout::diagonal(vec![1.0; 8], 0.0));
    let run = hssm_streaming(&ctx, &xs, &params).unwrap();
    assert!(run.status.is_completed(), "hssm seed {seed}");
    let hssm_clips = ctx.ledger().clip_events;

    let ctx = Context::new(SimParams::new(DEPTH, 50, 8, clip_bound, seed)).unwrap();
    let xs: Vec<_> = rows.iter().map(|r| ctx.encrypt(r).unwrap()).collect();
    let gw = proxy_poly();
    let params = NaiveParams {
        carry_gate: gw.gate,
        input_gate: gw.gate,
        write: gw.write,
        projection: None,
    };
    let run = naive_recurrence(&ctx, &xs, &params).unwrap();
    assert!(run.status.is_completed(), "naive seed {seed}");
    let naive_clips = ctx.ledger().clip_events;

    (hssm_clips, naive_clips)
}

#[test]
fn nominal_bound_never_clips() {
    let mut hssm_total = 0u64;
    let mut naive_total = 0u64;
    for seed in 0..SEEDS {
        let (h, n) = clip_counts(3.0, seed);
        hssm_total += h;
        naive_total += n;
    }
    assert_eq!(hssm_total, 0, "scalar-carry states stay under 4/3");
    assert_eq!(naive_total, 0, "encrypted-carry states stay under 12/5");
}

#[test]
fn tight_bound_saturates_the_encrypted_carry_family_more() {
    let mut hssm_total = 0u64;
    let mut naive_total = 0u64;
    for seed in 0..SEEDS {
        let (h, n) = clip_counts(1.0, seed);
        hssm_total += h;
        naive_total += n;
    }
    assert!(
        naive_total > 0,
        "a unit bound must bite the wider state distribution"
    );
    assert!(
        hssm_total < naive_total,
        "expected fewer scalar-carry clips, got {hssm_total} vs {naive_total}"
    );
}
