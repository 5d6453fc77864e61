//! Smooth maps between an unconstrained vector and κ in natural coordinates.
//!
//! r = e^a, α = 1 + e^b. INGARCH: ω = e^c, φ = σ(d) σ(e), τ = σ(d) (1 − σ(e)),
//! so φ + τ = σ(d) < 1 always. GAS: ω = c, φ = σ(d), τ = e^e.

use crate::dynamics::{DistFamily, DynFamily, Family};

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Keeps logits finite when a natural value sits on its boundary.
const EDGE: f64 = 1e-9;

fn clamp_unit(p: f64) -> f64 {
    p.clamp(EDGE, 1.0 - EDGE)
}

pub(crate) fn to_natural(family: Family, u: &[f64]) -> Vec<f64> {
    let mut k = Vec::with_capacity(u.len());
    k.push(u[0].exp());
    let theta = match family.dist {
        DistFamily::Bnb => {
            k.push(1.0 + u[1].exp());
            &u[2..]
        }
        DistFamily::Nb => &u[1..],
    };
    match family.dynamics {
        DynFamily::Ingarch => {
            let s = sigmoid(theta[1]);
            let v = sigmoid(theta[2]);
            k.extend([theta[0].exp(), s * v, s * (1.0 - v)]);
        }
        DynFamily::Gas => {
            k.extend([theta[0], sigmoid(theta[1]), theta[2].exp()]);
        }
    }
    k
}

pub(crate) fn to_unconstrained(family: Family, kappa: &[f64]) -> Vec<f64> {
    let mut u = Vec::with_capacity(kappa.len());
    u.push(kappa[0].max(EDGE).ln());
    let theta = match family.dist {
        DistFamily::Bnb => {
            u.push((kappa[1] - 1.0).max(EDGE).ln());
            &kappa[2..]
        }
        DistFamily::Nb => &kappa[1..],
    };
    let (omega, phi, tau) = (theta[0], theta[1], theta[2]);
    match family.dynamics {
        DynFamily::Ingarch => {
            let s = clamp_unit(phi + tau);
            let v = clamp_unit(phi / (phi + tau).max(EDGE));
            u.extend([omega.max(EDGE).ln(), logit(s), logit(v)]);
        }
        DynFamily::Gas => {
            u.extend([omega, logit(clamp_unit(phi)), tau.max(EDGE).ln()]);
        }
    }
    u
}
