use serde::{Deserialize, Serialize};

use super::IntegralSet;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Open,
    Periodic,
}

/// One-dimensional Hubbard chain with a Hückel one-body term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HubbardSpec {
    pub n_sites: usize,
    /// On-site repulsion.
    pub u: f64,
    /// Diagonal one-body term.
    pub alpha: f64,
    /// Nearest-neighbour hopping.
    pub beta: f64,
    pub boundary: Boundary,
}

impl HubbardSpec {
    /// Chain with `alpha = 0`, `beta = -1` and open ends.
    pub fn chain(n_sites: usize, u: f64) -> Self {
        HubbardSpec {
            n_sites,
            u,
            alpha: 0.0,
            beta: -1.0,
            boundary: Boundary::Open,
        }
    }

    pub fn periodic(mut self) -> Self {
        self.boundary = Boundary::Periodic;
        self
    }
}

/// Builds the site-basis integrals of a Hubbard chain.
///
/// `h` is `alpha` on the diagonal and `beta` between bonded sites; the only
/// two-body entries are `(pp|pp) = u`. A periodic chain adds the `(0, n-1)`
/// bond, which for two sites coincides with the open bond and is written once.
pub fn build_hubbard(spec: &HubbardSpec) -> Result<IntegralSet> {
    let n = spec.n_sites;
    if n < 2 {
        return Err(Error::InvalidSpec(format!(
            "Hubbard chain needs at least 2 sites, got {n}"
        )));
    }
    if ![spec.u, spec.alpha, spec.beta].iter().all(|x| x.is_finite()) {
        return Err(Error::InvalidSpec("Hubbard parameters must be finite".into()));
    }
    let mut set = IntegralSet::zeros(n);
    for p in 0..n {
        set.set_h_symmetric(p, p, spec.alpha);
        if p + 1 < n {
            set.set_h_symmetric(p, p + 1, spec.beta);
        }
        set.set_v_symmetric(p, p, p, p, spec.u);
    }
    if spec.boundary == Boundary::Periodic && n > 2 {
        set.set_h_symmetric(0, n - 1, spec.beta);
    }
    Ok(set)
}
