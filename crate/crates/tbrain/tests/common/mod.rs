//! Shared test oracles, kept independent of the library's computation paths.
//!
//! - A scalar-loop re-implementation of every decoder step, written directly
//!   from the layer formulas with explicit index loops.
//! - A central finite-difference gradient checker that perturbs every
//!   parameter entry one at a time.
//! - A chi-squared goodness-of-fit helper for seeded sampling checks.

#![allow(dead_code)]

use tbrain::decoder::{MemorySource, ModelParams, Segments};
use tbrain::kg::Triple;
use tbrain::linalg::Mat;
use tbrain::sensory::Scene;
use tbrain::training::{cost_perception, cost_prob, grad_perception, grad_prob, FreezeSet, Gradients};

fn sig(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn mat_get(m: &Mat, r: usize, c: usize) -> f64 {
    m.get(r, c)
}

/// Scalar-loop oracle for the whole decoding chain on a drive.
///
/// Everything is computed with explicit element loops; no vector helper of
/// the library is used.
pub struct ScalarChain {
    pub logits_s: Vec<f64>,
    pub h_s: Vec<f64>,
    pub logits_o: Vec<f64>,
    pub h_so: Vec<f64>,
    pub logits_p: Vec<f64>,
    pub h_spo: Vec<f64>,
    pub q_final: Vec<f64>,
}

pub fn scalar_chain(params: &ModelParams, drive: &Segments, triple: Triple) -> ScalarChain {
    let d = params.dims;
    let commit = |col: usize, i: usize| -> f64 {
        match &params.untied_commit {
            Some(u) => mat_get(u, i, col),
            None => mat_get(&params.embeddings, i, col),
        }
    };

    // Subject step: logits_s[j] = sum_i A[i][j] x_sub[i].
    let mut logits_s = vec![0.0; d.n_concepts];
    for (j, l) in logits_s.iter_mut().enumerate() {
        let mut acc = 0.0;
        for i in 0..d.d_q {
            acc += mat_get(&params.embeddings, i, j) * drive.sub[i];
        }
        *l = acc;
    }

    // h_s = sig(V (a_s + x_sub)).
    let mut h_s = vec![0.0; d.d_h];
    for (r, h) in h_s.iter_mut().enumerate() {
        let mut acc = 0.0;
        for c in 0..d.d_q {
            acc += mat_get(&params.wm_in, r, c) * (commit(triple.s, c) + drive.sub[c]);
        }
        *h = sig(acc);
    }

    // Readout W sig(B h).
    let readout = |h: &[f64]| -> Vec<f64> {
        let mut rb = vec![0.0; d.d_h];
        for (r, v) in rb.iter_mut().enumerate() {
            let mut acc = 0.0;
            for c in 0..d.d_h {
                acc += mat_get(&params.wm_recur, r, c) * h[c];
            }
            *v = sig(acc);
        }
        let mut out = vec![0.0; d.d_q];
        for (r, v) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for c in 0..d.d_h {
                acc += mat_get(&params.wm_out, r, c) * rb[c];
            }
            *v = acc;
        }
        out
    };

    // Object step: logits_o[j] = sum_i A[i][j] (x_obj + readout)[i].
    let ro1 = readout(&h_s);
    let mut logits_o = vec![0.0; d.n_concepts];
    for (j, l) in logits_o.iter_mut().enumerate() {
        let mut acc = 0.0;
        for i in 0..d.d_q {
            acc += mat_get(&params.embeddings, i, j) * (drive.obj[i] + ro1[i]);
        }
        *l = acc;
    }

    // h_so = sig(V (a_o + readout + x_obj) [+ B h_s]).
    let mut h_so = vec![0.0; d.d_h];
    for (r, h) in h_so.iter_mut().enumerate() {
        let mut acc = 0.0;
        for c in 0..d.d_q {
            acc += mat_get(&params.wm_in, r, c)
                * (commit(triple.o, c) + ro1[c] + drive.obj[c]);
        }
        if params.use_skip {
            for c in 0..d.d_h {
                acc += mat_get(&params.wm_recur, r, c) * h_s[c];
            }
        }
        *h = sig(acc);
    }

    // Predicate step over the predicate columns.
    let ro2 = readout(&h_so);
    let mut logits_p = vec![0.0; d.n_predicates];
    for (j, l) in logits_p.iter_mut().enumerate() {
        let mut acc = 0.0;
        for i in 0..d.d_q {
            acc += mat_get(&params.embeddings, i, d.n_concepts + j) * (drive.pred[i] + ro2[i]);
        }
        *l = acc;
    }

    // Integrated triple state and its projection.
    let mut h_spo = vec![0.0; d.d_h];
    for (r, h) in h_spo.iter_mut().enumerate() {
        let mut acc = 0.0;
        for c in 0..d.d_q {
            acc += mat_get(&params.wm_in, r, c)
                * (commit(d.n_concepts + triple.p, c) + ro2[c] + drive.pred[c]);
        }
        if params.use_skip {
            for c in 0..d.d_h {
                acc += mat_get(&params.wm_recur, r, c) * h_so[c];
            }
        }
        *h = sig(acc);
    }
    let q_final = readout(&h_spo);

    ScalarChain {
        logits_s,
        h_s,
        logits_o,
        h_so,
        logits_p,
        h_spo,
        q_final,
    }
}

/// Teacher-forced cost recomputed by the scalar oracle.
pub fn scalar_cost(params: &ModelParams, drive: &Segments, triple: Triple) -> f64 {
    let chain = scalar_chain(params, drive, triple);
    let nll = |logits: &[f64], target: usize| -> f64 {
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for l in logits {
            sum += (l - max).exp();
        }
        max + sum.ln() - logits[target]
    };
    nll(&chain.logits_s, triple.s) + nll(&chain.logits_o, triple.o) + nll(&chain.logits_p, triple.p)
}

/// What the cost under check conditions on.
pub enum CostKind<'a> {
    Perception(&'a Scene),
    Semantic,
    Background,
}

pub fn cost_of(params: &ModelParams, kind: &CostKind<'_>, triple: Triple) -> f64 {
    match kind {
        CostKind::Perception(scene) => cost_perception(params, scene, triple).unwrap(),
        CostKind::Semantic => cost_prob(params, triple, MemorySource::Perceptual).unwrap(),
        CostKind::Background => cost_prob(params, triple, MemorySource::Background).unwrap(),
    }
}

pub fn analytic_of(
    params: &ModelParams,
    kind: &CostKind<'_>,
    triple: Triple,
) -> (f64, Gradients) {
    match kind {
        CostKind::Perception(scene) => {
            grad_perception(params, scene, triple, FreezeSet::none()).unwrap()
        }
        CostKind::Semantic => {
            grad_prob(params, triple, MemorySource::Perceptual, FreezeSet::none()).unwrap()
        }
        CostKind::Background => {
            grad_prob(params, triple, MemorySource::Background, FreezeSet::none()).unwrap()
        }
    }
}

fn central_difference(
    params: &ModelParams,
    kind: &CostKind<'_>,
    triple: Triple,
    mutate: &dyn Fn(&mut ModelParams, f64),
    h: f64,
) -> f64 {
    let mut plus = params.clone();
    mutate(&mut plus, h);
    let mut minus = params.clone();
    mutate(&mut minus, -h);
    (cost_of(&plus, kind, triple) - cost_of(&minus, kind, triple)) / (2.0 * h)
}

/// Check every analytic gradient entry against central differences.
///
/// `rel_tol` applies to `|analytic - numeric| / max(|analytic| + |numeric|, 0.001)`.
pub fn check_all_gradients(
    params: &ModelParams,
    kind: &CostKind<'_>,
    triple: Triple,
    rel_tol: f64,
) -> usize {
    let h = 1e-5;
    let (_, grads) = analytic_of(params, kind, triple);
    let mut checked = 0usize;

    let mut verify = |name: &str, idx: usize, analytic: f64, mutate: &dyn Fn(&mut ModelParams, f64)| {
        let numeric = central_difference(params, kind, triple, mutate, h);
        let denom = (analytic.abs() + numeric.abs()).max(1e-3);
        let rel = (analytic - numeric).abs() / denom;
        assert!(
            rel <= rel_tol,
            "{name}[{idx}]: analytic {analytic:.12e} vs numeric {numeric:.12e} (rel {rel:.3e})"
        );
        checked += 1;
    };

    let mat_cases: Vec<(&str, &Mat)> = vec![
        ("embeddings", &grads.embeddings),
        ("sensory_map", &grads.sensory_map),
        ("wm_in", &grads.wm_in),
        ("wm_out", &grads.wm_out),
        ("wm_recur", &grads.wm_recur),
    ];
    for (name, gmat) in mat_cases {
        for idx in 0..gmat.as_slice().len() {
            let analytic = gmat.as_slice()[idx];
            let mutate = move |p: &mut ModelParams, delta: f64| {
                let slot = match name {
                    "embeddings" => &mut p.embeddings,
                    "sensory_map" => &mut p.sensory_map,
                    "wm_in" => &mut p.wm_in,
                    "wm_out" => &mut p.wm_out,
                    _ => &mut p.wm_recur,
                };
                slot.as_mut_slice()[idx] += delta;
            };
            verify(name, idx, analytic, &mutate);
        }
    }

    if let Some(gu) = &grads.untied_commit {
        for idx in 0..gu.as_slice().len() {
            let analytic = gu.as_slice()[idx];
            let mutate = move |p: &mut ModelParams, delta: f64| {
                p.untied_commit.as_mut().unwrap().as_mut_slice()[idx] += delta;
            };
            verify("untied_commit", idx, analytic, &mutate);
        }
    }

    for (role, seg_grad) in [
        (0usize, &grads.semantic.sub),
        (1, &grads.semantic.pred),
        (2, &grads.semantic.obj),
    ] {
        for (idx, analytic) in seg_grad.iter().enumerate() {
            let mutate = move |p: &mut ModelParams, delta: f64| {
                let seg = match role {
                    0 => &mut p.semantic.sub,
                    1 => &mut p.semantic.pred,
                    _ => &mut p.semantic.obj,
                };
                seg[idx] += delta;
            };
            verify("semantic", role * 1000 + idx, *analytic, &mutate);
        }
    }
    for (role, seg_grad) in [
        (0usize, &grads.background.sub),
        (1, &grads.background.pred),
        (2, &grads.background.obj),
    ] {
        for (idx, analytic) in seg_grad.iter().enumerate() {
            let mutate = move |p: &mut ModelParams, delta: f64| {
                let seg = match role {
                    0 => &mut p.background.sub,
                    1 => &mut p.background.pred,
                    _ => &mut p.background.obj,
                };
                seg[idx] += delta;
            };
            verify("background", role * 1000 + idx, *analytic, &mutate);
        }
    }

    checked
}

/// Pearson chi-squared statistic against expected probabilities.
pub fn chi_squared_statistic(counts: &[u64], probs: &[f64]) -> f64 {
    let n: u64 = counts.iter().sum();
    counts
        .iter()
        .zip(probs)
        .map(|(c, p)| {
            let expected = *p * n as f64;
            let diff = *c as f64 - expected;
            diff * diff / expected
        })
        .sum()
}

/// Upper critical value of the chi-squared distribution.
pub fn chi_squared_critical(dof: usize, alpha: f64) -> f64 {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    ChiSquared::new(dof as f64)
        .unwrap()
        .inverse_cdf(1.0 - alpha)
}
