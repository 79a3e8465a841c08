use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::mixing::{deviation_norm, product_range};

/// Largest windowed deviation bound for which the step-size rule applies.
pub const RHO_PRIME_CAP: f64 = 0.25;

/// `2(1 + τ̂²) max_j ‖Q_{j-1} ⋯ Q_{j-τ̂} - J‖²` over all full windows
/// ending at or before `k`.
pub fn compute_rho_prime<M: AsRef<Matrix>>(q_seq: &[M], k: usize, tau_hat: usize) -> Result<f64> {
    if tau_hat == 0 {
        return Err(Error::InvalidParameter("window must be >= 1".into()));
    }
    if tau_hat > k || k > q_seq.len() {
        return Err(Error::RangeOutOfBounds {
            start: k.saturating_sub(tau_hat),
            end: k,
            len: q_seq.len(),
        });
    }
    let mut worst = 0.0f64;
    for j in tau_hat..=k {
        let p = product_range(q_seq, j - tau_hat, j)?;
        worst = worst.max(deviation_norm(&p));
    }
    Ok(2.0 * (1.0 + (tau_hat * tau_hat) as f64) * worst * worst)
}

pub fn gamma_window(q: f64, tau_bar: usize, d_g: usize) -> f64 {
    q.powf((tau_bar * d_g) as f64)
}

/// Smallest admissible multiplier
/// `⌈max(ln(16 n³ τ̄² d²), 16 ln(4/γ)) / γ⌉` with `γ = q^{τ̄ d}`.
pub fn eta_multiplier(n: usize, q: f64, tau_bar: usize, d_g: usize) -> u64 {
    let g = gamma_window(q, tau_bar, d_g);
    let (n, t, d) = (n as f64, tau_bar as f64, d_g as f64);
    let a = (16.0 * n.powi(3) * t * t * d * d).ln();
    let b = 16.0 * (4.0 / g).ln();
    (a.max(b) / g).ceil() as u64
}

/// `min(1, √ρ' / (58 L τ̂²))`.
pub fn alpha_bound(rho_prime: f64, l: f64, tau_hat: usize) -> f64 {
    let t = tau_hat as f64;
    (rho_prime.sqrt() / (58.0 * l * t * t)).min(1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepSizeInputs {
    pub n: usize,
    pub q: f64,
    pub tau_bar: usize,
    pub d_g: usize,
    pub l: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepSizeReport {
    pub gamma_window: f64,
    pub eta: u64,
    pub tau_eta: u64,
    pub tau_hat: usize,
    /// Deviation bound the step size is computed from.
    pub rho_prime: f64,
    /// ρ' of the supplied sequence at `tau_hat`, when one was supplied and
    /// is long enough.
    pub realized_rho_prime: Option<f64>,
    /// ρ' of the supplied sequence at `tau_eta`.
    pub certified_rho_prime: Option<f64>,
    pub alpha_max: f64,
}

impl StepSizeReport {
    /// Whether the supplied sequence confirms `ρ'(τ_η) < 1/4`.
    pub fn certified(&self) -> Option<bool> {
        self.certified_rho_prime.map(|r| r < RHO_PRIME_CAP)
    }

    pub fn admissible(&self) -> bool {
        self.rho_prime <= RHO_PRIME_CAP && self.alpha_max > 0.0
    }
}

/// Step-size suggestion from the windowed deviation bound. Without a
/// sequence the window is `τ_η`; with one, it is the smallest window whose
/// realized bound stays below 1/4 (falling back to `τ_η`). In both cases
/// the bound itself is taken at its admissible cap.
pub fn suggest_step_size<M: AsRef<Matrix>>(inputs: &StepSizeInputs, q_seq: Option<&[M]>) -> Result<StepSizeReport> {
    if !(inputs.l > 0.0 && inputs.l.is_finite()) {
        return Err(Error::InvalidParameter(format!("smoothness {} must be > 0", inputs.l)));
    }
    if !(inputs.q > 0.0 && inputs.q < 1.0) || inputs.tau_bar == 0 || inputs.d_g == 0 || inputs.n == 0 {
        return Err(Error::InvalidParameter("need 0 < q < 1 and n, tau_bar, d_G >= 1".into()));
    }
    let eta = eta_multiplier(inputs.n, inputs.q, inputs.tau_bar, inputs.d_g);
    let tau_eta = eta * (inputs.tau_bar * inputs.d_g) as u64;
    let mut tau_hat = tau_eta as usize;
    let mut realized = None;
    let mut certified = None;
    if let Some(seq) = q_seq {
        let len = seq.len();
        for t in 1..=len.min(tau_hat) {
            let r = compute_rho_prime(seq, len, t)?;
            if r < RHO_PRIME_CAP {
                tau_hat = t;
                realized = Some(r);
                break;
            }
        }
        if (tau_eta as usize) <= len {
            certified = Some(compute_rho_prime(seq, len, tau_eta as usize)?);
        }
    }
    Ok(StepSizeReport {
        gamma_window: gamma_window(inputs.q, inputs.tau_bar, inputs.d_g),
        eta,
        tau_eta,
        tau_hat,
        rho_prime: RHO_PRIME_CAP,
        realized_rho_prime: realized,
        certified_rho_prime: certified,
        alpha_max: alpha_bound(RHO_PRIME_CAP, inputs.l, tau_hat),
    })
}
