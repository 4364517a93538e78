use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::autodiff::{lie_along_f, lie_along_g, ScalarField};
use crate::dynamics::{AffineSystem, StateBox};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// How relative degrees are probed numerically.
///
/// A coefficient that vanishes at one state need not vanish identically, so
/// detection samples `probes` states from a box and calls a component present
/// once any sample exceeds `tol`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeSettings<T> {
    /// Sampling box; the system's nominal domain when `None`.
    pub domain: Option<StateBox<T>>,
    pub probes: usize,
    pub tol: T,
    pub cap: usize,
    pub seed: u64,
}

impl<T: Real> Default for ProbeSettings<T> {
    fn default() -> Self {
        ProbeSettings {
            domain: None,
            probes: 64,
            tol: T::lit(1e-9),
            cap: 5,
            seed: 0,
        }
    }
}

impl<T: Real> ProbeSettings<T> {
    pub(crate) fn sample_states(&self, sys: &AffineSystem<T>) -> Result<Vec<Vec<T>>> {
        let domain = self.domain.clone().unwrap_or_else(|| sys.domain());
        if domain.dim() != sys.state_dim() {
            return Err(Error::dimension("probe domain", sys.state_dim(), domain.dim()));
        }
        if self.probes == 0 {
            return Err(Error::invalid("probes", "at least one probe state is required"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        Ok((0..self.probes).map(|_| domain.sample(&mut rng)).collect())
    }
}

/// Largest `|L_g L_f^{k-1} b|` seen per component at each probed order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeReport {
    pub probes: usize,
    /// Probe states where some order could not be evaluated (e.g. a barrier
    /// singularity); they are left out of the maxima.
    pub skipped: usize,
    /// `max_magnitude[k-1][j]` for order `k` and component `j`.
    pub max_magnitude: Vec<Vec<f64>>,
    pub tol: f64,
}

/// Per-component relative degrees of a barrier.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelativeDegreeSet {
    /// `None` when the component did not appear up to the cap.
    pub degrees: Vec<Option<usize>>,
    pub control_labels: Vec<String>,
    pub report: ProbeReport,
}

impl RelativeDegreeSet {
    /// Declares degrees without probing.
    pub fn declared(degrees: Vec<usize>, control_labels: Vec<String>) -> Self {
        RelativeDegreeSet {
            degrees: degrees.into_iter().map(Some).collect(),
            control_labels,
            report: ProbeReport {
                probes: 0,
                skipped: 0,
                max_magnitude: Vec::new(),
                tol: 0.0,
            },
        }
    }

    pub fn get(&self, j: usize) -> Option<usize> {
        self.degrees.get(j).copied().flatten()
    }

    pub fn all_detected(&self) -> bool {
        self.degrees.iter().all(Option::is_some)
    }

    pub fn undetected(&self) -> Vec<usize> {
        (0..self.degrees.len()).filter(|&j| self.degrees[j].is_none()).collect()
    }

    /// `m̄`, the largest detected degree.
    pub fn max_degree(&self) -> Option<usize> {
        self.degrees.iter().flatten().copied().max()
    }

    /// Classical relative degree: the first order where any control appears.
    pub fn min_degree(&self) -> Option<usize> {
        self.degrees.iter().flatten().copied().min()
    }

    pub fn is_uniform(&self) -> bool {
        self.all_detected() && self.max_degree() == self.min_degree()
    }
}

/// Smallest `k ≤ cap` per component with `|(L_g L_f^{k-1} b)_j| > tol` at
/// some probe state.
pub fn detect_relative_degree_set<T: Real>(
    b: &ScalarField<T>,
    sys: &AffineSystem<T>,
    settings: &ProbeSettings<T>,
) -> Result<RelativeDegreeSet> {
    if b.arity() != sys.state_dim() {
        return Err(Error::dimension(
            format!("barrier {}", b.label()),
            sys.state_dim(),
            b.arity(),
        ));
    }
    if settings.cap == 0 {
        return Err(Error::invalid("cap", "must be at least 1"));
    }
    let states = settings.sample_states(sys)?;
    let q = sys.control_dim();
    let mut degrees: Vec<Option<usize>> = vec![None; q];
    let mut maxima = Vec::with_capacity(settings.cap);
    let mut bad = vec![false; states.len()];
    let mut field = b.clone();

    for order in 1..=settings.cap {
        let row_field = lie_along_g(&field, sys);
        let mut max_abs = vec![T::zero(); q];
        for (x, bad) in states.iter().zip(bad.iter_mut()) {
            match row_field.eval(x) {
                Ok(row) => {
                    for (m, v) in max_abs.iter_mut().zip(row) {
                        *m = m.max(v.abs());
                    }
                }
                Err(_) => *bad = true,
            }
        }
        for (d, m) in degrees.iter_mut().zip(&max_abs) {
            if d.is_none() && *m > settings.tol {
                *d = Some(order);
            }
        }
        maxima.push(max_abs.iter().map(|v| v.to_f64_lossy()).collect());
        if degrees.iter().all(Option::is_some) {
            break;
        }
        field = lie_along_f(&field, sys);
    }

    let skipped = bad.iter().filter(|b| **b).count();
    if skipped == states.len() {
        return Err(Error::ProbeFailure(format!(
            "{} could not be differentiated at any probe state",
            b.label()
        )));
    }
    Ok(RelativeDegreeSet {
        degrees,
        control_labels: sys.control_labels().to_vec(),
        report: ProbeReport {
            probes: states.len(),
            skipped,
            max_magnitude: maxima,
            tol: settings.tol.to_f64_lossy(),
        },
    })
}
