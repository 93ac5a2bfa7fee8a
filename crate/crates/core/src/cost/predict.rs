//! Symbolic level predictor.
//!
//! Walks a circuit's stage schedule on bare (level, degree) metadata and
//! emits the same stage labels the executed circuits record, so traces can
//! be compared row for row. The metadata rules are reimplemented here from
//! scratch: normalization rescales a degree-2 value once and fails at level
//! zero, ciphertext products meet at the lower level, plaintext products
//! and rotations are level-neutral.

use crate::circuits::CircuitKind;

/// One predicted stage: the label the executed trace will use and the
/// metadata of that stage's output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictedStage {
    pub label: String,
    pub level: u32,
    pub degree: u8,
}

/// How the schedule ends.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PredictedOutcome {
    Completes { level: u32, degree: u8 },
    Exhausts { step: usize, stage: String },
}

/// Stage-by-stage prediction for one circuit configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictedTrace {
    pub stages: Vec<PredictedStage>,
    pub outcome: PredictedOutcome,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Meta {
    level: u32,
    degree: u8,
}

impl Meta {
    fn fresh(depth: u32) -> Meta {
        Meta { level: depth, degree: 1 }
    }

    fn norm(self) -> Option<Meta> {
        if self.degree == 1 {
            Some(self)
        } else if self.level == 0 {
            None
        } else {
            Some(Meta {
                level: self.level - 1,
                degree: 1,
            })
        }
    }

    fn mul_cc(self, other: Meta) -> Option<Meta> {
        let a = self.norm()?;
        let b = other.norm()?;
        Some(Meta {
            level: a.level.min(b.level),
            degree: 2,
        })
    }

    fn mul_cp(self) -> Option<Meta> {
        let a = self.norm()?;
        Some(Meta {
            level: a.level,
            degree: 2,
        })
    }

    fn add_cc(self, other: Meta) -> Option<Meta> {
        let (a, b) = if self.degree != other.degree {
            if self.degree == 2 {
                (self.norm()?, other)
            } else {
                (self, other.norm()?)
            }
        } else {
            (self, other)
        };
        Some(Meta {
            level: a.level.min(b.level),
            degree: a.degree,
        })
    }
}

struct Halt {
    step: usize,
    stage: String,
}

type WalkResult<T> = Result<T, Halt>;

fn ok(m: Option<Meta>, step: usize, stage: &str) -> WalkResult<Meta> {
    m.ok_or_else(|| Halt {
        step,
        stage: stage.to_string(),
    })
}

struct Walk {
    depth: u32,
    stages: Vec<PredictedStage>,
}

impl Walk {
    fn push(&mut self, label: &str, m: Meta) {
        self.stages.push(PredictedStage {
            label: label.to_string(),
            level: m.level,
            degree: m.degree,
        });
    }
}

/// Public linear map: rotations and term adds are level-neutral, so the
/// output is the normalized input raised to degree 2.
fn projection_meta(x: Meta, step: usize, stage: &str) -> WalkResult<Meta> {
    ok(x.mul_cp(), step, stage)
}

/// Gate or gate/write evaluation from one shared square. Both outputs land
/// at the square's rescaled level: the quadratic's two coefficient products
/// meet one level apart and the add aligns them down.
fn gate_write_meta(xin: Meta, step: usize, stage: &str) -> WalkResult<Meta> {
    let xn = ok(xin.norm(), step, stage)?;
    let sq = ok(xn.mul_cc(xn), step, stage)?;
    let sn = ok(sq.norm(), step, stage)?;
    let t1 = ok(xn.mul_cp(), step, stage)?;
    let t2 = ok(sn.mul_cp(), step, stage)?;
    ok(t1.add_cc(t2), step, stage)
}

fn write_stage_meta(w: &mut Walk, t: usize, projected: bool) -> WalkResult<Meta> {
    let mut xin = Meta::fresh(w.depth);
    if projected {
        let label = format!("project[{t}]");
        xin = projection_meta(xin, t, &label)?;
        w.push(&label, xin);
    }
    let label = format!("gate_write[{t}]");
    let g = gate_write_meta(xin, t, &label)?;
    w.push(&label, g);
    let label = format!("local_write[{t}]");
    let wr = ok(g.mul_cc(g), t, &label)?;
    w.push(&label, wr);
    Ok(wr)
}

fn walk_closed(w: &mut Walk, t_len: usize, projected: bool) -> WalkResult<Meta> {
    let mut scaled = None;
    for t in 0..t_len {
        let wr = write_stage_meta(w, t, projected)?;
        let label = format!("decay_scale[{t}]");
        let wn = ok(wr.norm(), t, &label)?;
        let s = ok(wn.mul_cp(), t, &label)?;
        w.push(&label, s);
        scaled = Some(s);
    }
    let agg = scaled.expect("at least one position");
    w.push("aggregate", agg);
    let label = "readout";
    let out = ok(agg.mul_cp(), t_len - 1, label)?;
    w.push(label, out);
    Ok(out)
}

fn walk_streaming(w: &mut Walk, t_len: usize, projected: bool) -> WalkResult<Meta> {
    let mut h = Meta::fresh(w.depth);
    w.push("state_init", h);
    for t in 0..t_len {
        let wr = write_stage_meta(w, t, projected)?;
        let label = format!("carry[{t}]");
        let ah = ok(h.mul_cp(), t, &label)?;
        h = ok(ah.add_cc(wr), t, &label)?;
        w.push(&label, h);
    }
    Ok(h)
}

fn walk_naive(w: &mut Walk, t_len: usize, projected: bool) -> WalkResult<Meta> {
    let mut h = Meta::fresh(w.depth);
    w.push("state_init", h);
    for t in 0..t_len {
        let mut xin = Meta::fresh(w.depth);
        if projected {
            let label = format!("project[{t}]");
            xin = projection_meta(xin, t, &label)?;
            w.push(&label, xin);
        }
        let label = format!("carry_gate[{t}]");
        let ga = gate_write_meta(xin, t, &label)?;
        w.push(&label, ga);
        let label = format!("gate_write[{t}]");
        let gb = gate_write_meta(xin, t, &label)?;
        w.push(&label, gb);
        let label = format!("local_write[{t}]");
        let wr = ok(gb.mul_cc(gb), t, &label)?;
        w.push(&label, wr);
        let label = format!("carry[{t}]");
        let c = ok(ga.mul_cc(h), t, &label)?;
        h = ok(c.add_cc(wr), t, &label)?;
        w.push(&label, h);
    }
    Ok(h)
}

fn walk_attention(w: &mut Walk, t_len: usize, projected: bool, full: bool) -> WalkResult<Meta> {
    let depth = w.depth;
    let mut qkv = Meta::fresh(depth);
    if projected {
        for t in 0..t_len {
            let label = format!("qkv_project[{t}]");
            let z = projection_meta(Meta::fresh(depth), t, &label)?;
            let zn = ok(z.norm(), t, &label)?;
            let q = projection_meta(zn, t, &label)?;
            w.push(&label, q);
            qkv = q;
        }
    }
    let last = t_len - 1;
    let queries: Vec<usize> = if full { (0..t_len).collect() } else { vec![last] };
    let label = "align_inputs";
    let qn = ok(qkv.norm(), queries[0], label)?;
    let kn = ok(qkv.norm(), 0, label)?;
    let vn = ok(qkv.norm(), 0, label)?;
    w.push(label, kn);
    // Phase one: every query's kernel weights.
    let mut kernel = None;
    for &i in &queries {
        for t in 0..t_len {
            let label = format!("score[{i}][{t}]");
            let z = ok(qn.mul_cc(kn), t, &label)?;
            w.push(&label, z);
            let label = format!("kernel[{i}][{t}]");
            let zn = ok(z.norm(), t, &label)?;
            let sq = ok(zn.mul_cc(zn), t, &label)?;
            let sn = ok(sq.norm(), t, &label)?;
            let t1 = ok(zn.mul_cp(), t, &label)?;
            let t2 = ok(sn.mul_cp(), t, &label)?;
            let kappa = ok(t1.add_cc(t2), t, &label)?;
            let scaled = ok(kappa.mul_cp(), t, &label)?;
            w.push(&label, scaled);
            kernel = Some(scaled);
        }
    }
    let kw = kernel.expect("at least one kernel weight");
    // Phase two: per-query normalization and output.
    let mut out = None;
    for &i in &queries {
        let label = format!("denominator[{i}]");
        w.push(&label, kw);
        let label = format!("normalizer[{i}]");
        let rn = ok(kw.norm(), last, &label)?;
        let sq = ok(rn.mul_cc(rn), last, &label)?;
        let sn = ok(sq.norm(), last, &label)?;
        let t1 = ok(rn.mul_cp(), last, &label)?;
        let t2 = ok(sn.mul_cp(), last, &label)?;
        let rho = ok(t1.add_cc(t2), last, &label)?;
        w.push(&label, rho);
        let label = format!("numerator[{i}]");
        let mut num = None;
        for t in 0..t_len {
            num = Some(ok(kw.mul_cc(vn), t, &label)?);
        }
        let num = num.expect("at least one numerator term");
        w.push(&label, num);
        let label = format!("output[{i}]");
        let o = ok(num.mul_cc(rho), last, &label)?;
        w.push(&label, o);
        out = Some(o);
    }
    let mut pooled = out.expect("at least one query output");
    if full {
        let label = "pool";
        pooled = ok(pooled.mul_cp(), last, label)?;
        w.push(label, pooled);
    }
    let label = "readout";
    let out = ok(pooled.mul_cp(), last, label)?;
    w.push(label, out);
    Ok(out)
}

/// Predicts the stage schedule for the runner configuration of `kind`:
/// which stages run, each stage output's (level, degree), and whether the
/// run completes or exhausts its budget. Labels match the executed trace
/// exactly; an exhausted prediction names the failing stage, which the
/// executed trace omits.
pub fn predict_level_trace(
    kind: CircuitKind,
    t: usize,
    depth: u32,
    projected: bool,
) -> PredictedTrace {
    assert!(t >= 1, "sequence length must be >= 1");
    let mut w = Walk {
        depth,
        stages: Vec::new(),
    };
    let end = match kind {
        CircuitKind::HssmClosed | CircuitKind::HssmMulti => walk_closed(&mut w, t, projected),
        CircuitKind::HssmStreaming => walk_streaming(&mut w, t, projected),
        CircuitKind::Naive => walk_naive(&mut w, t, projected),
        CircuitKind::AttnFinal => walk_attention(&mut w, t, projected, false),
        CircuitKind::AttnFull | CircuitKind::QuadAttn => walk_attention(&mut w, t, projected, true),
    };
    let outcome = match end {
        Ok(m) => PredictedOutcome::Completes {
            level: m.level,
            degree: m.degree,
        },
        Err(Halt { step, stage }) => PredictedOutcome::Exhausts { step, stage },
    };
    PredictedTrace {
        stages: w.stages,
        outcome,
    }
}
