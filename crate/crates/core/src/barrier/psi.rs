use crate::autodiff::{lie_along_g, lie_with_value, ControlRowField, Jet, ScalarField};
use crate::dynamics::{lift, AffineSystem};
use crate::error::{Error, Result};
use crate::scalar::Real;

use super::{ClassK, ConstraintRow, ProbeSettings};

/// A barrier `b` with declared relative degree `m` and class-K chain `α_1..α_m`.
#[derive(Clone, Debug)]
pub struct HocbfSpec<T> {
    pub barrier: ScalarField<T>,
    pub degree: usize,
    pub alphas: Vec<ClassK<T>>,
    pub system: AffineSystem<T>,
    pub probe: ProbeSettings<T>,
    /// Probe for premature control appearance while building.
    pub verify: bool,
    pub tag: String,
}

impl<T: Real> HocbfSpec<T> {
    pub fn new(
        barrier: ScalarField<T>,
        degree: usize,
        alphas: Vec<ClassK<T>>,
        system: &AffineSystem<T>,
    ) -> Self {
        let tag = format!("hocbf[{}]", barrier.label());
        HocbfSpec {
            barrier,
            degree,
            alphas,
            system: system.clone(),
            probe: ProbeSettings::default(),
            verify: true,
            tag,
        }
    }

    /// All `α_i(s) = k_i s`.
    pub fn linear(barrier: ScalarField<T>, gains: &[T], system: &AffineSystem<T>) -> Self {
        let alphas = gains.iter().map(|&k| ClassK::linear(k)).collect();
        Self::new(barrier, gains.len(), alphas, system)
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Self {
        self.tag = tag.into();
        self
    }

    pub fn with_probe(mut self, probe: ProbeSettings<T>) -> Self {
        self.probe = probe;
        self
    }

    /// Trusts the declared degree and skips probing.
    pub fn unverified(mut self) -> Self {
        self.verify = false;
        self
    }
}

/// `ψ_0 = b`, `ψ_i = ψ̇_{i-1} + α_i(ψ_{i-1})` for `i < m`, plus the pieces of
/// the degree-`m` row.
#[derive(Clone, Debug)]
pub struct PsiSequence<T> {
    psi: Vec<ScalarField<T>>,
    alpha_top: ClassK<T>,
    control_row: ControlRowField<T>,
    system: AffineSystem<T>,
    tag: String,
}

/// Builds ψ_0..ψ_{m-1} as composable fields.
///
/// Fails with [`Error::PrematureControl`] if some control component already
/// multiplies `ψ̇_j` for `j ≤ m - 2` at a probe state.
pub fn build_psi_sequence<T: Real>(spec: &HocbfSpec<T>) -> Result<PsiSequence<T>> {
    let m = spec.degree;
    let sys = &spec.system;
    if m == 0 {
        return Err(Error::invalid("degree", "relative degree must be at least 1"));
    }
    if spec.alphas.len() != m {
        return Err(Error::dimension("class-K functions", m, spec.alphas.len()));
    }
    if spec.barrier.arity() != sys.state_dim() {
        return Err(Error::dimension(
            format!("barrier {}", spec.barrier.label()),
            sys.state_dim(),
            spec.barrier.arity(),
        ));
    }
    for (i, alpha) in spec.alphas.iter().enumerate() {
        alpha.validate()?;
        let required = m - (i + 1);
        if alpha.smoothness() < required {
            return Err(Error::SmoothnessDeficit {
                index: i + 1,
                available: alpha.smoothness(),
                required,
            });
        }
    }

    let mut psi = vec![spec.barrier.clone()];
    for (i, alpha) in spec.alphas.iter().take(m - 1).enumerate() {
        let prev = psi[i].clone();
        let alpha = *alpha;
        let sys = sys.clone();
        let label = format!("psi_{}[{}]", i + 1, spec.barrier.label());
        psi.push(ScalarField::new(prev.arity(), label, move |x: &[Jet<T>]| {
            let (value, lie) = lie_with_value(&prev, &sys, x);
            lie + alpha.apply_jet(&value)
        }));
    }

    if spec.verify && m > 1 {
        check_control_free(&psi[..m - 1], sys, &spec.probe, m)?;
    }

    let control_row = lie_along_g(&psi[m - 1], sys);
    Ok(PsiSequence {
        psi,
        alpha_top: spec.alphas[m - 1],
        control_row,
        system: sys.clone(),
        tag: spec.tag.clone(),
    })
}

fn check_control_free<T: Real>(
    levels: &[ScalarField<T>],
    sys: &AffineSystem<T>,
    probe: &ProbeSettings<T>,
    declared: usize,
) -> Result<()> {
    let states = probe.sample_states(sys)?;
    for (order, level) in levels.iter().enumerate() {
        let row = lie_along_g(level, sys);
        let mut evaluated = 0;
        for x in &states {
            let Ok(coeffs) = row.eval(x) else { continue };
            evaluated += 1;
            if let Some(component) = coeffs.iter().position(|c| c.abs() > probe.tol) {
                return Err(Error::PrematureControl {
                    component,
                    order: order + 1,
                    declared,
                });
            }
        }
        if evaluated == 0 {
            return Err(Error::ProbeFailure(format!(
                "{} could not be evaluated at any probe state",
                level.label()
            )));
        }
    }
    Ok(())
}

impl<T: Real> PsiSequence<T> {
    pub fn degree(&self) -> usize {
        self.psi.len()
    }

    /// `ψ_i` for `i < m`.
    pub fn field(&self, i: usize) -> &ScalarField<T> {
        &self.psi[i]
    }

    pub fn system(&self) -> &AffineSystem<T> {
        &self.system
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    /// `ψ_0(x) .. ψ_{m-1}(x)`.
    pub fn values(&self, x: &[T]) -> Result<Vec<T>> {
        self.psi.iter().map(|p| p.eval(x)).collect()
    }

    /// `x ∈ C_1 ∩ … ∩ C_m`.
    pub fn contains(&self, x: &[T]) -> Result<bool> {
        Ok(self.values(x)?.iter().all(|v| *v >= T::zero()))
    }

    /// The degree-`m` constraint `L_g ψ_{m-1}(x) u + L_f ψ_{m-1}(x) + α_m(ψ_{m-1}(x)) ≥ 0`.
    pub fn row(&self, x: &[T]) -> Result<ConstraintRow<T>> {
        let top = &self.psi[self.psi.len() - 1];
        if x.len() != top.arity() {
            return Err(Error::dimension("state", top.arity(), x.len()));
        }
        let (value, lie) = lie_with_value(top, &self.system, &lift(x));
        let value = top.checked(value)?.value();
        let lie = top.checked(lie)?.value();
        let coeffs = self.control_row.eval(x)?;
        let row = ConstraintRow::new(coeffs, lie + self.alpha_top.apply(value), self.tag.clone());
        if !row.is_finite() {
            return Err(Error::NonFinite {
                primitive: "row",
                context: self.tag.clone(),
            });
        }
        Ok(row)
    }
}

/// Convenience for `build_psi_sequence(spec)?.row(x)`.
pub fn hocbf_row<T: Real>(spec: &HocbfSpec<T>, x: &[T]) -> Result<ConstraintRow<T>> {
    build_psi_sequence(spec)?.row(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::lie_along_f;
    use crate::dynamics::{double_integrator, make_unicycle, obstacle_barrier, ControlBounds, UnicycleParams};

    const M: f64 = 1650.0;

    fn unicycle() -> AffineSystem<f64> {
        let bounds = ControlBounds::symmetric(&[0.3491, 3.0 * M]).unwrap();
        make_unicycle(UnicycleParams { mass: M }, bounds).unwrap()
    }

    fn disc_barrier() -> ScalarField<f64> {
        obstacle_barrier(5, [35.0, 15.0], 5.0, 0.0)
    }

    #[test]
    fn unicycle_degree_two_row() {
        let sys = unicycle();
        let spec = HocbfSpec::linear(disc_barrier(), &[1.0, 1.0], &sys);
        let psi = build_psi_sequence(&spec).unwrap();
        let x = [10.0, 15.0, 5.0, 0.0, 0.0];
        // ψ_1 = L_f b + b
        let lf = lie_along_f(&disc_barrier(), &sys);
        let expected = lf.eval(&x).unwrap() + disc_barrier().eval(&x).unwrap();
        assert!((psi.field(1).eval(&x).unwrap() - expected).abs() < 1e-12);
        let row = psi.row(&x).unwrap();
        assert_eq!(row.coeffs[0], 0.0);
        assert!((row.coeffs[1] + 1.0 / M).abs() < 1e-15);
        assert!((row.rhs - 10.0).abs() < 1e-9);
    }

    #[test]
    fn degree_one_is_classical_cbf() {
        let sys = unicycle();
        let c = ScalarField::constant(5, 2.5);
        let row = hocbf_row(&HocbfSpec::linear(c, &[1.0], &sys), &[0.0; 5]).unwrap();
        assert_eq!(row.coeffs, vec![0.0, 0.0]);
        assert_eq!(row.rhs, 2.5);
    }

    #[test]
    fn double_integrator_psi_and_row() {
        let sys = double_integrator::<f64>();
        let spec = HocbfSpec::linear(ScalarField::coordinate(2, 0), &[2.0, 3.0], &sys);
        let psi = build_psi_sequence(&spec).unwrap();
        for x in [[1.0, 0.0], [0.5, -2.0], [-3.0, 4.0]] {
            // ψ_1 = x2 + 2 x1
            assert!((psi.field(1).eval(&x).unwrap() - (x[1] + 2.0 * x[0])).abs() < 1e-12);
            // row: u + 2 x2 + 3 (x2 + 2 x1) ≥ 0
            let row = psi.row(&x).unwrap();
            assert_eq!(row.coeffs, vec![1.0]);
            assert!((row.rhs - (2.0 * x[1] + 3.0 * (x[1] + 2.0 * x[0]))).abs() < 1e-12);
        }
    }

    #[test]
    fn premature_control_detected() {
        let sys = unicycle();
        let spec = HocbfSpec::linear(disc_barrier(), &[1.0, 1.0, 1.0], &sys);
        let err = build_psi_sequence(&spec).unwrap_err();
        assert_eq!(
            err,
            Error::PrematureControl {
                component: 1,
                order: 2,
                declared: 3
            }
        );
    }

    #[test]
    fn smoothness_deficit_detected() {
        let sys = double_integrator::<f64>();
        let alphas = vec![
            ClassK::Power { gain: 1.0, exponent: 0.5, smoothness: 0 },
            ClassK::linear(1.0),
        ];
        let spec = HocbfSpec::new(ScalarField::coordinate(2, 0), 2, alphas, &sys);
        assert!(matches!(
            build_psi_sequence(&spec),
            Err(Error::SmoothnessDeficit { index: 1, available: 0, required: 1 })
        ));
    }

    #[test]
    fn alpha_count_must_match_degree() {
        let sys = double_integrator::<f64>();
        let spec = HocbfSpec::new(ScalarField::coordinate(2, 0), 2, vec![ClassK::linear(1.0)], &sys);
        assert!(matches!(build_psi_sequence(&spec), Err(Error::Dimension { .. })));
    }
}
