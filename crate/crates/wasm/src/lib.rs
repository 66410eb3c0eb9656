//! Browser bindings. Every function returns a JSON string so the page needs no
//! generated TypeScript types; errors come back as `{"error": "..."}`.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use infodist::bb84::{
    build_conjugate_pair, named_attack_for, theorem3_check, AttackKind, ConjugateDef,
};
use infodist::linalg::{c, ComplexMatrix};
use infodist::quantum::{measure, shannon_entropy, DensityOperator, Ensemble, Povm, PureState};
use infodist::steering::{build_steering_povm, verify_theorem1, SteeringContext};
use infodist::uncertainty::overlap_bound;

fn to_json<T: Serialize>(r: infodist::Result<T>) -> String {
    match r {
        Ok(v) => serde_json::to_string(&v).expect("plain data"),
        Err(e) => serde_json::json!({ "error": e.to_string() }).to_string(),
    }
}

#[derive(Serialize)]
struct CurvePoint {
    theta: f64,
    i_ae_lower: f64,
    i_ae_upper: f64,
    h_error: f64,
}

/// Eve's information against Bob's error entropy for the single-qubit partial
/// entangler, `points` angles evenly spaced over `[0, π/2]`.
#[wasm_bindgen]
pub fn tradeoff_curve(points: u32, budget: u32, seed: u32) -> String {
    to_json((|| {
        let cp = build_conjugate_pair(1, ConjugateDef::Hadamard)?;
        let points = points.clamp(2, 64);
        (0..points)
            .map(|k| {
                let theta = std::f64::consts::FRAC_PI_2 * k as f64 / (points - 1) as f64;
                let attack = named_attack_for(AttackKind::PartialEntangle(theta), &cp)?;
                let r =
                    theorem3_check(&cp, &attack, budget.max(1) as usize, seed as u64 + k as u64)?;
                Ok(CurvePoint {
                    theta,
                    i_ae_lower: r.direct.i_ae_lower,
                    i_ae_upper: r.direct.i_ae_upper,
                    h_error: r.direct.h_error,
                })
            })
            .collect::<infodist::Result<Vec<_>>>()
    })())
}

/// Qubit basis `cos(t/2)|0⟩ + sin(t/2)|1⟩` and its orthogonal partner (Bloch angle `t` in the x–z plane).
fn xz_basis(t: f64) -> ComplexMatrix {
    let (cs, sn) = ((t / 2.0).cos(), (t / 2.0).sin());
    ComplexMatrix::from_real(&[&[cs, -sn], &[sn, cs]])
}

/// `(1 + r·σ)/2`, with `|r|` clipped to 1.
fn bloch_state(x: f64, y: f64, z: f64) -> infodist::Result<DensityOperator> {
    let len = (x * x + y * y + z * z).sqrt();
    let s = if len > 1.0 { 1.0 / len } else { 1.0 };
    let (x, y, z) = (x * s, y * s, z * s);
    let m = ComplexMatrix::from_rows(&[
        vec![c((1.0 + z) / 2.0, 0.0), c(x / 2.0, -y / 2.0)],
        vec![c(x / 2.0, y / 2.0), c((1.0 - z) / 2.0, 0.0)],
    ])?;
    DensityOperator::new(m)
}

#[derive(Serialize)]
struct EurPoint {
    h_a: f64,
    h_b: f64,
    lhs: f64,
    bound: f64,
    overlap: f64,
}

/// Outcome entropies of two qubit measurements in the x–z plane on a Bloch-vector state.
#[wasm_bindgen]
pub fn qubit_uncertainty(angle_a: f64, angle_b: f64, x: f64, y: f64, z: f64) -> String {
    to_json((|| {
        let rho = bloch_state(x, y, z)?;
        let a = Povm::from_basis(&xz_basis(angle_a))?;
        let b = Povm::from_basis(&xz_basis(angle_b))?;
        let h_a = shannon_entropy(&measure(&rho, &a)?)?;
        let h_b = shannon_entropy(&measure(&rho, &b)?)?;
        let ob = overlap_bound(&a, &b)?;
        Ok(EurPoint {
            h_a,
            h_b,
            lhs: h_a + h_b,
            bound: ob.bound_bits,
            overlap: ob.c,
        })
    })())
}

#[derive(Serialize)]
struct SteeringDemo {
    average: Vec<Vec<[f64; 2]>>,
    elements: Vec<Vec<Vec<[f64; 2]>>>,
    completeness_error: f64,
    max_prob_error: f64,
    max_state_error: f64,
}

fn pairs(m: &ComplexMatrix) -> Vec<Vec<[f64; 2]>> {
    m.to_rows()
        .iter()
        .map(|r| r.iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

/// Steering measurement for a two-member ensemble of pure qubit states at Bloch
/// angles `t0`, `t1` (x–z plane), weights `p` and `1 − p`.
#[wasm_bindgen]
pub fn steer_qubit_pair(p: f64, t0: f64, t1: f64) -> String {
    to_json((|| {
        let state = |t: f64| PureState::new(vec![c((t / 2.0).cos(), 0.0), c((t / 2.0).sin(), 0.0)]);
        let ens = Ensemble::from_pure(vec![(p, state(t0)?), (1.0 - p, state(t1)?)])?;
        let ctx = SteeringContext::new(ens.average().clone())?;
        let strict = ctx.rank() == ctx.dim();
        let povm = build_steering_povm(&ctx, &ens, strict)?;
        let r = verify_theorem1(&ctx, &ens, strict)?;
        Ok(SteeringDemo {
            average: pairs(ens.average().matrix()),
            elements: povm.elements().iter().map(|(_, e)| pairs(e)).collect(),
            completeness_error: r.completeness_error,
            max_prob_error: r.max_prob_error(),
            max_state_error: r.max_state_error(),
        })
    })())
}
