//! Integral HOCBFs: control components that would show up before the highest
//! relative degree are turned into states driven by auxiliary inputs `ν`, so
//! every decision input appears at the same order.

use crate::autodiff::{Jet, ScalarField};
use crate::barrier::{
    build_psi_sequence, detect_relative_degree_set, ClassK, ConstraintRow, HocbfSpec, ProbeSettings,
    PsiSequence, RelativeDegreeSet,
};
use crate::dynamics::{compose_augmented, lift, AffineSystem, AugmentedSystem, AuxiliaryDynamics, ChainDynamics};
use crate::error::{Error, Result};
use crate::integrate::{step, Integrator};
use crate::scalar::Real;

/// Tuning for [`build_ihocbf`] beyond the main class-K chain.
#[derive(Clone, Debug)]
pub struct IntegralOptions<T> {
    /// Class-K function used at every order of the `ν`-bound barriers.
    pub bound_alpha: ClassK<T>,
    pub probe: ProbeSettings<T>,
    /// Initial applied value per base control; entries for undifferentiated
    /// controls are ignored. Defaults per [`default_initial_control`].
    pub initial_controls: Option<Vec<T>>,
    /// Replacement chain dynamics keyed by base control index.
    pub chains: Vec<(usize, ChainDynamics<T>)>,
}

impl<T: Real> Default for IntegralOptions<T> {
    fn default() -> Self {
        IntegralOptions {
            bound_alpha: ClassK::linear(T::lit(5.0)),
            probe: ProbeSettings::default(),
            initial_controls: None,
            chains: Vec::new(),
        }
    }
}

/// `b_{j,min} = u_j - u_{j,min}` and `b_{j,max} = u_{j,max} - u_j` as HOCBFs of
/// degree `m_j` on the augmented system. Infinite bounds have no barrier.
#[derive(Clone, Debug)]
pub struct NuBound<T> {
    pub control: usize,
    pub lower: Option<PsiSequence<T>>,
    pub upper: Option<PsiSequence<T>>,
}

#[derive(Clone, Debug)]
pub struct IntegralHocbf<T> {
    barrier: ScalarField<T>,
    augmented: AugmentedSystem<T>,
    main: PsiSequence<T>,
    bounds: Vec<NuBound<T>>,
    degrees: RelativeDegreeSet,
    augmented_degrees: RelativeDegreeSet,
}

/// `0` when strictly inside the bounds, otherwise the midpoint (or one unit
/// inside a half-infinite box).
pub fn default_initial_control<T: Real>(lower: T, upper: T) -> T {
    let zero = T::zero();
    if lower < zero && zero < upper {
        zero
    } else if lower.is_finite() && upper.is_finite() {
        (lower + upper) * T::lit(0.5)
    } else if lower.is_finite() {
        lower + T::one()
    } else {
        upper - T::one()
    }
}

/// Builds the augmented system, the degree-`m̄` HOCBF on it and the bound
/// barriers.
///
/// Every control `j` with `k_j < m̄` gets a chain of length `m̄ - k_j`.
/// Construction fails with [`Error::ProbeFailure`] unless every entry of
/// `u_y = (u_n, ν)` appears at order exactly `m̄`.
pub fn build_ihocbf<T: Real>(
    b: &ScalarField<T>,
    sys: &AffineSystem<T>,
    degrees: &RelativeDegreeSet,
    alphas: Vec<ClassK<T>>,
    options: &IntegralOptions<T>,
) -> Result<IntegralHocbf<T>> {
    let q = sys.control_dim();
    if degrees.degrees.len() != q {
        return Err(Error::dimension("relative degree set", q, degrees.degrees.len()));
    }
    if let Some(j) = degrees.undetected().first() {
        return Err(Error::ProbeFailure(format!(
            "control {} never appears in the derivatives of {}",
            sys.control_labels()[*j],
            b.label()
        )));
    }
    let m_bar = degrees.max_degree().expect("all degrees detected");
    let bounds = sys.bounds();
    if let Some(init) = &options.initial_controls {
        if init.len() != q {
            return Err(Error::dimension("initial controls", q, init.len()));
        }
    }

    let mut aux = Vec::new();
    for (j, k) in degrees.degrees.iter().enumerate() {
        let k = k.expect("all degrees detected");
        if k >= m_bar {
            continue;
        }
        let len = m_bar - k;
        let (lo, hi) = (bounds.lower[j], bounds.upper[j]);
        let start = match &options.initial_controls {
            Some(init) => init[j],
            None => default_initial_control(lo, hi),
        };
        if !(lo < start && start < hi) {
            return Err(Error::Auxiliary(format!(
                "initial {} = {start} must lie strictly inside [{lo}, {hi}]",
                sys.control_labels()[j]
            )));
        }
        let mut dynamics = AuxiliaryDynamics::integrator(j, len, start);
        if let Some((_, chain)) = options.chains.iter().find(|(c, _)| *c == j) {
            if chain.len() != len {
                return Err(Error::dimension(
                    format!("chain for {}", sys.control_labels()[j]),
                    len,
                    chain.len(),
                ));
            }
            dynamics.chain = chain.clone();
        }
        aux.push(dynamics);
    }
    if let Some((j, _)) = options
        .chains
        .iter()
        .find(|(j, _)| !aux.iter().any(|a| a.control == *j))
    {
        return Err(Error::Auxiliary(format!("control index {j} is not differentiated")));
    }

    let augmented = compose_augmented(sys, &aux)?;
    let aug_sys = augmented.system();
    let lifted = b.lift(aug_sys.state_dim());

    let probe = ProbeSettings {
        domain: None,
        cap: m_bar,
        ..options.probe.clone()
    };
    let augmented_degrees = detect_relative_degree_set(&lifted, aug_sys, &probe)?;
    if let Some(j) = augmented_degrees.degrees.iter().position(|d| *d != Some(m_bar)) {
        return Err(Error::ProbeFailure(format!(
            "{} appears at order {:?} instead of {m_bar} on the augmented system",
            aug_sys.control_labels()[j],
            augmented_degrees.degrees[j]
        )));
    }

    let main = build_psi_sequence(
        &HocbfSpec::new(lifted, m_bar, alphas, aug_sys)
            .with_tag(format!("ihocbf[{}]", b.label()))
            .with_probe(probe),
    )?;

    let mut nu_bounds = Vec::with_capacity(aux.len());
    for (a, &off) in aux.iter().zip(augmented.aux_offsets()) {
        let j = a.control;
        let name = &sys.control_labels()[j];
        let (lo, hi) = (bounds.lower[j], bounds.upper[j]);
        let alphas = vec![options.bound_alpha; a.len()];
        let coord = ScalarField::coordinate(aug_sys.state_dim(), off);
        let lower = if lo.is_finite() {
            let field = coord.map(format!("{name} - {lo}"), move |u: &Jet<T>| u - lo);
            Some(build_psi_sequence(
                &HocbfSpec::new(field, a.len(), alphas.clone(), aug_sys)
                    .with_tag(format!("bound[{name} >= {lo}]"))
                    .unverified(),
            )?)
        } else {
            None
        };
        let upper = if hi.is_finite() {
            let field = coord.map(format!("{hi} - {name}"), move |u: &Jet<T>| -u + hi);
            Some(build_psi_sequence(
                &HocbfSpec::new(field, a.len(), alphas, aug_sys)
                    .with_tag(format!("bound[{name} <= {hi}]"))
                    .unverified(),
            )?)
        } else {
            None
        };
        nu_bounds.push(NuBound { control: j, lower, upper });
    }

    Ok(IntegralHocbf {
        barrier: b.clone(),
        augmented,
        main,
        bounds: nu_bounds,
        degrees: degrees.clone(),
        augmented_degrees,
    })
}

impl<T: Real> IntegralHocbf<T> {
    pub fn barrier(&self) -> &ScalarField<T> {
        &self.barrier
    }

    pub fn augmented(&self) -> &AugmentedSystem<T> {
        &self.augmented
    }

    pub fn main(&self) -> &PsiSequence<T> {
        &self.main
    }

    pub fn bounds(&self) -> &[NuBound<T>] {
        &self.bounds
    }

    /// `m̄`.
    pub fn degree(&self) -> usize {
        self.main.degree()
    }

    pub fn degrees(&self) -> &RelativeDegreeSet {
        &self.degrees
    }

    /// Probe result on the augmented system; uniform `m̄` by construction.
    pub fn augmented_degrees(&self) -> &RelativeDegreeSet {
        &self.augmented_degrees
    }

    /// The main row in `u_y`.
    pub fn main_row(&self, y: &[T]) -> Result<ConstraintRow<T>> {
        self.main.row(y)
    }

    /// Bound rows only, lower before upper per chain.
    pub fn bound_rows(&self, y: &[T]) -> Result<Vec<ConstraintRow<T>>> {
        let mut rows = Vec::with_capacity(2 * self.bounds.len());
        for nb in &self.bounds {
            for psi in nb.lower.iter().chain(nb.upper.iter()) {
                rows.push(psi.row(y)?);
            }
        }
        Ok(rows)
    }

    /// Main row followed by the bound rows, all in `u_y`.
    pub fn rows(&self, y: &[T]) -> Result<Vec<ConstraintRow<T>>> {
        let mut rows = vec![self.main_row(y)?];
        rows.extend(self.bound_rows(y)?);
        Ok(rows)
    }

    /// Advances every chain under `ν` held over `dt`.
    pub fn integrate_aux(
        &self,
        aux_states: &[Vec<T>],
        nu: &[T],
        dt: T,
        method: Integrator,
    ) -> Result<Vec<Vec<T>>> {
        integrate_chains(self.augmented.aux(), aux_states, nu, dt, method)
    }
}

/// See [`IntegralHocbf::rows`].
pub fn ihocbf_rows<T: Real>(spec: &IntegralHocbf<T>, y: &[T]) -> Result<Vec<ConstraintRow<T>>> {
    spec.rows(y)
}

/// See [`IntegralHocbf::integrate_aux`].
pub fn integrate_aux<T: Real>(
    spec: &IntegralHocbf<T>,
    aux_states: &[Vec<T>],
    nu: &[T],
    dt: T,
    method: Integrator,
) -> Result<Vec<Vec<T>>> {
    spec.integrate_aux(aux_states, nu, dt, method)
}

pub(crate) fn integrate_chains<T: Real>(
    aux: &[AuxiliaryDynamics<T>],
    aux_states: &[Vec<T>],
    nu: &[T],
    dt: T,
    method: Integrator,
) -> Result<Vec<Vec<T>>> {
    if aux_states.len() != aux.len() {
        return Err(Error::dimension("auxiliary states", aux.len(), aux_states.len()));
    }
    if nu.len() != aux.len() {
        return Err(Error::dimension("auxiliary inputs", aux.len(), nu.len()));
    }
    aux.iter()
        .zip(aux_states)
        .zip(nu)
        .map(|((a, s), &nu)| {
            if s.len() != a.len() {
                return Err(Error::dimension("auxiliary chain state", a.len(), s.len()));
            }
            let input = a.chain.input();
            step(s, dt, method, |u| {
                Ok(a.chain
                    .drift(&lift(u))
                    .iter()
                    .zip(&input)
                    .map(|(d, &bk)| d.value() + bk * nu)
                    .collect())
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::barrier::hocbf_row;
    use crate::dynamics::{make_unicycle, obstacle_barrier, single_integrator, ControlBounds, UnicycleParams};

    const M: f64 = 1650.0;

    fn unicycle() -> AffineSystem<f64> {
        let bounds = ControlBounds::symmetric(&[0.3491, 3.0 * M]).unwrap();
        make_unicycle(UnicycleParams { mass: M }, bounds).unwrap()
    }

    fn disc_barrier() -> ScalarField<f64> {
        obstacle_barrier(5, [35.0, 15.0], 5.0, 0.0)
    }

    fn unicycle_ihocbf(bound_gain: f64) -> IntegralHocbf<f64> {
        let sys = unicycle();
        let degrees = detect_relative_degree_set(&disc_barrier(), &sys, &ProbeSettings::default()).unwrap();
        let options = IntegralOptions {
            bound_alpha: ClassK::linear(bound_gain),
            ..IntegralOptions::default()
        };
        build_ihocbf(&disc_barrier(), &sys, &degrees, vec![ClassK::linear(1.0); 3], &options).unwrap()
    }

    #[test]
    fn unicycle_layout() {
        let spec = unicycle_ihocbf(1.0);
        assert_eq!(spec.degree(), 3);
        let aug = spec.augmented();
        assert_eq!(aug.state_dim(), 6);
        assert_eq!(aug.system().control_labels(), &["u1".to_string(), "nu_u2".to_string()]);
        assert_eq!(spec.augmented_degrees().degrees, vec![Some(3), Some(3)]);
        let y = [10.0, 14.0, 4.0, 0.3, 0.1, 200.0];
        let rows = spec.rows(&y).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows[0].coeffs.iter().all(|c| *c != 0.0));
    }

    #[test]
    fn bound_rows_for_unit_gain() {
        let spec = unicycle_ihocbf(1.0);
        let u2 = 1234.0;
        let y = [10.0, 14.0, 4.0, 0.3, 0.1, u2];
        let rows = spec.bound_rows(&y).unwrap();
        assert_eq!(rows[0].coeffs, vec![0.0, 1.0]);
        assert!((rows[0].rhs - (u2 + 3.0 * M)).abs() < 1e-9);
        assert_eq!(rows[1].coeffs, vec![0.0, -1.0]);
        assert!((rows[1].rhs - (3.0 * M - u2)).abs() < 1e-9);
    }

    #[test]
    fn upper_bound_row_at_limit_forbids_positive_nu() {
        let spec = unicycle_ihocbf(1.0);
        let y = [10.0, 14.0, 4.0, 0.3, 0.1, 3.0 * M];
        let upper = &spec.bound_rows(&y).unwrap()[1];
        assert!(upper.slack(&[0.0, 1e-6]) < 0.0);
        assert!(upper.slack(&[0.0, 0.0]) >= 0.0);
    }

    #[test]
    fn main_row_far_and_aligned_is_satisfied_at_zero() {
        let spec = unicycle_ihocbf(5.0);
        let y = [-40.0, 40.0, 1.0, 0.0, 0.0, 0.0];
        let row = spec.main_row(&y).unwrap();
        assert!(row.rhs > 0.0);
    }

    #[test]
    fn main_row_matches_plain_hocbf_on_augmented() {
        let spec = unicycle_ihocbf(5.0);
        let aug = spec.augmented().system();
        let plain = HocbfSpec::linear(disc_barrier().lift(6), &[1.0; 3], aug).unverified();
        let y = [12.0, 13.0, 3.0, -0.4, 0.2, -500.0];
        let a = spec.main_row(&y).unwrap();
        let b = hocbf_row(&plain, &y).unwrap();
        for (x, z) in a.coeffs.iter().zip(&b.coeffs) {
            assert!((x - z).abs() <= 1e-10);
        }
        assert!((a.rhs - b.rhs).abs() <= 1e-10);
    }

    #[test]
    fn uniform_degree_degenerates_to_standard() {
        let sys = unicycle();
        let b = obstacle_barrier(5, [35.0, 15.0], 6.0, 0.5);
        let degrees = detect_relative_degree_set(&b, &sys, &ProbeSettings::default()).unwrap();
        let spec = build_ihocbf(&b, &sys, &degrees, vec![ClassK::linear(1.0); 2], &IntegralOptions::default())
            .unwrap();
        assert!(spec.augmented().is_trivial());
        assert!(spec.bounds().is_empty());
        let x = [10.0, 14.0, 4.0, 0.3, 0.1];
        let plain = hocbf_row(&HocbfSpec::linear(b, &[1.0, 1.0], &sys), &x).unwrap();
        assert_eq!(spec.rows(&x).unwrap().len(), 1);
        let row = spec.main_row(&x).unwrap();
        assert_eq!(row.coeffs, plain.coeffs);
        assert_eq!(row.rhs, plain.rhs);
    }

    #[test]
    fn three_input_toy() {
        // ẋ1 = x2 + u2 + u3, ẋ2 = u1: b = x1 has degrees {2, 1, 1}.
        let sys = AffineSystem::new(
            2,
            3,
            |x: &[Jet<f64>]| vec![x[1].clone(), Jet::zero()],
            |_x: &[Jet<f64>]| {
                let (z, o) = (Jet::zero, || Jet::constant(1.0));
                vec![vec![z(), o()], vec![o(), z()], vec![o(), z()]]
            },
            ControlBounds::symmetric(&[1.0, 1.0, 1.0]).unwrap(),
        )
        .unwrap();
        let b = ScalarField::coordinate(2, 0);
        let degrees = detect_relative_degree_set(&b, &sys, &ProbeSettings::default()).unwrap();
        assert_eq!(degrees.degrees, vec![Some(2), Some(1), Some(1)]);
        let spec = build_ihocbf(&b, &sys, &degrees, vec![ClassK::linear(1.0); 2], &IntegralOptions::default())
            .unwrap();
        let labels = spec.augmented().system().control_labels().to_vec();
        assert_eq!(labels, vec!["u1", "nu_u2", "nu_u3"]);
        assert_eq!(spec.augmented().aux().len(), 2);
        assert!(spec.augmented().aux().iter().all(|a| a.len() == 1));
        assert_eq!(spec.bound_rows(&[0.0, 0.0, 0.0, 0.0]).unwrap().len(), 4);
    }

    #[test]
    fn aux_single_integrator_step() {
        let spec = unicycle_ihocbf(5.0);
        for method in [Integrator::Euler, Integrator::Rk4] {
            let next = spec.integrate_aux(&[vec![0.0]], &[1.0], 0.1, method).unwrap();
            assert!((next[0][0] - 0.1).abs() < 1e-15);
            let still = spec.integrate_aux(&[vec![7.0]], &[0.0], 0.1, method).unwrap();
            assert_eq!(still, vec![vec![7.0]]);
        }
    }

    #[test]
    fn aux_double_integrator_chain_rk4() {
        let aux = [AuxiliaryDynamics::integrator(0, 2, 0.0f64)];
        let next: Vec<Vec<f64>> = integrate_chains(&aux, &[vec![0.0, 1.0]], &[0.0], 0.1, Integrator::Rk4).unwrap();
        assert!((next[0][0] - 0.1).abs() < 1e-15);
        assert_eq!(next[0][1], 1.0);
    }

    #[test]
    fn undetected_component_is_probe_failure() {
        let sys = single_integrator::<f64>(2);
        let b = ScalarField::coordinate(2, 0);
        let degrees = RelativeDegreeSet {
            degrees: vec![Some(1), None],
            ..RelativeDegreeSet::declared(vec![1, 1], vec!["u1".into(), "u2".into()])
        };
        let err = build_ihocbf(&b, &sys, &degrees, vec![ClassK::linear(1.0)], &IntegralOptions::default());
        assert!(matches!(err, Err(Error::ProbeFailure(_))));
    }

    #[test]
    fn initial_control_must_be_interior() {
        let sys = unicycle();
        let degrees = RelativeDegreeSet::declared(vec![3, 2], vec!["u1".into(), "u2".into()]);
        let options = IntegralOptions {
            initial_controls: Some(vec![0.0, 3.0 * M]),
            ..IntegralOptions::default()
        };
        let err = build_ihocbf(&disc_barrier(), &sys, &degrees, vec![ClassK::linear(1.0); 3], &options);
        assert!(matches!(err, Err(Error::Auxiliary(_))));
        assert_eq!(default_initial_control(1.0, 3.0), 2.0);
        assert_eq!(default_initial_control(-1.0, 3.0), 0.0);
    }
}
