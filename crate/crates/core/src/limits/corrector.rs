use super::{EulerRates, EulerState2D, Field2D, LimitError};
use crate::model::NskState;
use crate::spectral::{Parity, ScalarField, SlabGrid, VectorField};

/// Approximate slab solution `(ε²π, (w, 0), επ)`, vertically constant.
pub fn corrector(state: &EulerState2D, eps: f64, grid: &SlabGrid) -> Result<NskState, LimitError> {
    let pi = state.pi.embed(grid)?;
    let u = VectorField::new(state.w[0].embed(grid)?, state.w[1].embed(grid)?, ScalarField::zeros(*grid, Parity::Odd));
    NskState::new(pi.scale(eps * eps), u, pi.scale(eps), state.time).map_err(|e| match e {
        crate::model::ModelError::Spectral(s) => LimitError::Spectral(s),
        _ => LimitError::GridMismatch,
    })
}

/// Residuals of the corrector in the three equations.
#[derive(Debug, Clone, PartialEq)]
pub struct Residuals {
    pub r1: Field2D,
    pub r2: [Field2D; 2],
    pub r3: Field2D,
}

impl Residuals {
    /// `[‖R₁‖, ‖R₂‖, ‖R₃‖]` in `H^s`.
    pub fn norms(&self, s: u32) -> [f64; 3] {
        let r2 = (self.r2[0].sobolev_norm(s).powi(2) + self.r2[1].sobolev_norm(s).powi(2)).sqrt();
        [self.r1.sobolev_norm(s), r2, self.r3.sobolev_norm(s)]
    }
}

/// Residuals written out term by term:
///
/// ```text
/// R₁ = ε²(π_t + w·∇π)
/// R₂ = ε(1 + ε³π)∇Δπ - (1 + ε⁴π)∇π - εμΔw
/// R₃ = ε(1 + ε³π)(π_t + w·∇π) - ελΔπ
/// ```
pub fn corrector_residuals(state: &EulerState2D, rates: &EulerRates, eps: f64, mu: f64, lambda: f64) -> Residuals {
    let g = *state.grid();
    let pi = &state.pi;
    let [p1, p2] = pi.gradient();
    let transport = &rates.dpi_dt + &Field2D::sum_of_products(g, &[(&state.w[0], &p1), (&state.w[1], &p2)]);
    let lap_pi = pi.laplacian();
    let r1 = transport.scale(eps * eps);

    let one_plus = |c: f64| {
        let mut f = pi.scale(c);
        f.coeffs_mut()[0].re += 1.0;
        f
    };
    let a = one_plus(eps.powi(3));
    let b = one_plus(eps.powi(4));
    let grad_lap = lap_pi.gradient();
    let grad_pi = [p1.clone(), p2.clone()];
    let r2 = [0, 1].map(|i| {
        let mut r = Field2D::sum_of_products(g, &[(&a, &grad_lap[i])]).scale(eps);
        r.axpy(-1.0, &Field2D::sum_of_products(g, &[(&b, &grad_pi[i])]));
        r.axpy(-eps * mu, &state.w[i].laplacian());
        r
    });
    let mut r3 = Field2D::sum_of_products(g, &[(&a, &transport)]).scale(eps);
    r3.axpy(-eps * lambda, &lap_pi);
    Residuals { r1, r2, r3 }
}

/// Fits `‖R₂‖(ε) = a + bε` by least squares and returns
/// `(‖R₂‖(ε_last) - bε_last) / (‖R₂‖(ε_first) - bε_first)`.
pub fn r2_floor_ratio(eps: &[f64], norms: &[f64]) -> Option<f64> {
    if eps.len() < 2 || eps.len() != norms.len() {
        return None;
    }
    let n = eps.len() as f64;
    let mx = eps.iter().sum::<f64>() / n;
    let my = norms.iter().sum::<f64>() / n;
    let sxx: f64 = eps.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = eps.iter().zip(norms).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let b = sxy / sxx;
    let first = norms[0] - b * eps[0];
    let last = norms[norms.len() - 1] - b * eps[eps.len() - 1];
    Some(last / first)
}
