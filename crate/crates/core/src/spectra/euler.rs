use num_complex::Complex64;

use crate::error::Result;
use crate::symbolic::{Character, OrbitCatalog};
use crate::transfer::geometric_tail;

/// Relative size below which the factors `1 - χ e^{-(s+k)ℓ}` are dropped.
const K_TAIL: f64 = 1e-14;

/// Truncated Euler product with its error budget.
#[derive(Debug, Clone, PartialEq)]
pub struct EulerProduct {
    pub value: Complex64,
    /// bound on `|log L - log value|` from word lengths above the cutoff
    pub tail_bound: f64,
    /// bound on `|value - L|` combining the length tail, the dropped `k`
    /// factors and rounding in the product
    pub error_bound: f64,
    pub primitive_classes: usize,
    pub factors: usize,
    /// set when `Re s` is not to the right of the measured abscissa
    pub divergence_warning: bool,
}

/// `∏_{[γ] primitive, |γ| <= L_max} ∏_{k >= 0} (1 - χ_θ(γ) e^{-(s+k)ℓ(γ)})`,
/// with primitive classes taken as Lyndon representatives of cyclically
/// admissible words.
pub fn euler_product_truncated(
    catalog: &OrbitCatalog,
    s: Complex64,
    theta: &Character,
    l_max: usize,
) -> Result<EulerProduct> {
    if l_max > catalog.n_max() {
        return Err(crate::error::Error::InvalidArgument(format!(
            "L_max = {l_max} exceeds the catalog length {}",
            catalog.n_max()
        )));
    }
    let mut log = Complex64::new(0.0, 0.0);
    let mut classes = 0usize;
    let mut factors = 0usize;
    let mut k_tail = 0.0;
    let mut moduli = Vec::with_capacity(l_max);
    for n in 1..=l_max {
        let table = catalog.table(n);
        let mut t_abs = 0.0;
        for i in 0..table.len() {
            let l = table.length(i);
            t_abs += (-s.re * l).exp() / (1.0 - (-l).exp());
            if !table.is_primitive_representative(i) {
                continue;
            }
            classes += 1;
            let chi = theta.eval_i32(table.abelianization(i));
            let q = (-l).exp();
            let mut term = chi * (-s * l).exp();
            loop {
                log += (-term).ln_1p();
                factors += 1;
                term *= q;
                if term.norm() < K_TAIL {
                    // remaining factors multiply to within |term| / (1 - q) of 1
                    k_tail += term.norm() / (1.0 - q);
                    break;
                }
            }
        }
        moduli.push(t_abs);
    }
    let tail_bound = geometric_tail(&moduli);
    let value = log.exp();
    let rounding = 4.0 * f64::EPSILON * factors as f64;
    let error_bound = value.norm() * ((tail_bound + 2.0 * k_tail + rounding).exp() - 1.0);
    let divergence_warning = moduli.len() >= 2 && !tail_bound.is_finite();
    Ok(EulerProduct {
        value,
        tail_bound,
        error_bound,
        primitive_classes: classes,
        factors,
        divergence_warning,
    })
}

trait Ln1p {
    fn ln_1p(self) -> Self;
}

impl Ln1p for Complex64 {
    /// `log(1 + z)` accurate for small `|z|`.
    fn ln_1p(self) -> Complex64 {
        if self.norm() < 1e-4 {
            let z = self;
            z * (1.0 - z * (0.5 - z * (1.0 / 3.0 - z * 0.25)))
        } else {
            (1.0 + self).ln()
        }
    }
}
