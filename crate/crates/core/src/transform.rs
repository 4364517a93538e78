//! Barrier transformation: replace `b` with a barrier `b_T` whose control
//! components all appear at the same order, and enforce a single HOCBF on it.

use serde::{Deserialize, Serialize};

use crate::autodiff::ScalarField;
use crate::barrier::{
    build_psi_sequence, detect_relative_degree_set, ClassK, ConstraintRow, HocbfSpec, ProbeSettings,
    PsiSequence, RelativeDegreeSet,
};
use crate::dynamics::{obstacle_barrier, AffineSystem};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Disc robot whose control point sits `offset` behind its geometric center.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CenterTransformParams<T> {
    /// `d`, control point to center.
    pub offset: T,
    /// `r_b`.
    pub body_radius: T,
    pub obstacle: [T; 2],
    pub obstacle_radius: T,
}

impl<T: Real> CenterTransformParams<T> {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: T| {
            if v > T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(name, format!("must be positive and finite, got {v}")))
            }
        };
        positive("offset", self.offset)?;
        positive("body_radius", self.body_radius)?;
        positive("obstacle_radius", self.obstacle_radius)?;
        if !(self.obstacle[0].is_finite() && self.obstacle[1].is_finite()) {
            return Err(Error::invalid("obstacle", "center must be finite"));
        }
        Ok(())
    }

    /// `r_v = r_b + d`, the farthest body point from the control point.
    pub fn vertex_radius(&self) -> T {
        self.body_radius + self.offset
    }

    /// Control-point barrier with margin `r + r_v`.
    pub fn control_point_barrier(&self, arity: usize) -> ScalarField<T> {
        obstacle_barrier(arity, self.obstacle, self.obstacle_radius + self.vertex_radius(), T::zero())
    }

    /// Center barrier with margin `r + r_b`.
    pub fn center_barrier(&self, arity: usize) -> ScalarField<T> {
        obstacle_barrier(arity, self.obstacle, self.obstacle_radius + self.body_radius, self.offset)
    }
}

/// How `b_T ≥ 0` relates to the original barrier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Implication {
    /// `b_T` is the clearance of the disc body itself, so `b_T ≥ 0` is the
    /// collision-free condition; the original barrier is reported alongside.
    CenterClearance,
    /// Asserted by the caller.
    Declared,
}

#[derive(Clone, Debug)]
pub struct TransformSpec<T> {
    original: ScalarField<T>,
    transformed: ScalarField<T>,
    psi: PsiSequence<T>,
    degrees: RelativeDegreeSet,
    implication: Implication,
}

impl<T: Real> TransformSpec<T> {
    /// Probes `transformed` on `sys` and requires every control to appear
    /// at the same order, which must equal `alphas.len()`.
    pub fn new(
        original: ScalarField<T>,
        transformed: ScalarField<T>,
        sys: &AffineSystem<T>,
        alphas: Vec<ClassK<T>>,
        probe: &ProbeSettings<T>,
        implication: Implication,
    ) -> Result<Self> {
        let degrees = detect_relative_degree_set(&transformed, sys, probe)?;
        if !degrees.is_uniform() {
            return Err(Error::ProbeFailure(format!(
                "{} has non-uniform relative degrees {:?}",
                transformed.label(),
                degrees.degrees
            )));
        }
        let m_t = degrees.max_degree().expect("uniform set is fully detected");
        if alphas.len() != m_t {
            return Err(Error::dimension("class-K functions", m_t, alphas.len()));
        }
        let psi = build_psi_sequence(
            &HocbfSpec::new(transformed.clone(), m_t, alphas, sys)
                .with_tag(format!("transform[{}]", transformed.label()))
                .with_probe(probe.clone()),
        )?;
        Ok(TransformSpec {
            original,
            transformed,
            psi,
            degrees,
            implication,
        })
    }

    pub fn original(&self) -> &ScalarField<T> {
        &self.original
    }

    pub fn transformed(&self) -> &ScalarField<T> {
        &self.transformed
    }

    /// `m_t`.
    pub fn degree(&self) -> usize {
        self.psi.degree()
    }

    pub fn degrees(&self) -> &RelativeDegreeSet {
        &self.degrees
    }

    pub fn psi(&self) -> &PsiSequence<T> {
        &self.psi
    }

    pub fn implication(&self) -> Implication {
        self.implication
    }

    pub fn row(&self, x: &[T]) -> Result<ConstraintRow<T>> {
        self.psi.row(x)
    }
}

/// Unicycle transform from the control point to the geometric center.
///
/// `b_T = ‖(x + d cosθ, y + d sinθ) − (x_0, y_0)‖ − (r + r_b)`; the original
/// barrier keeps the control point at `r + r_b + d`.
pub fn make_center_transform<T: Real>(
    params: &CenterTransformParams<T>,
    sys: &AffineSystem<T>,
    alphas: Vec<ClassK<T>>,
) -> Result<TransformSpec<T>> {
    if params.offset == T::zero() {
        return Err(Error::ProbeFailure(
            "offset d = 0 leaves the steering input out of the second derivative".into(),
        ));
    }
    params.validate()?;
    let n = sys.state_dim();
    TransformSpec::new(
        params.control_point_barrier(n),
        params.center_barrier(n),
        sys,
        alphas,
        &ProbeSettings::default(),
        Implication::CenterClearance,
    )
}

/// See [`TransformSpec::row`].
pub fn transform_row<T: Real>(spec: &TransformSpec<T>, x: &[T]) -> Result<ConstraintRow<T>> {
    spec.row(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::lie_along_f;
    use crate::dynamics::{make_unicycle, ControlBounds, UnicycleParams};

    const M: f64 = 1650.0;

    fn unicycle() -> AffineSystem<f64> {
        let bounds = ControlBounds::symmetric(&[0.3491, 3.0 * M]).unwrap();
        make_unicycle(UnicycleParams { mass: M }, bounds).unwrap()
    }

    fn params(d: f64) -> CenterTransformParams<f64> {
        CenterTransformParams {
            offset: d,
            body_radius: 1.0,
            obstacle: [35.0, 15.0],
            obstacle_radius: 5.0,
        }
    }

    fn linear2() -> Vec<ClassK<f64>> {
        vec![ClassK::linear(1.0); 2]
    }

    #[test]
    fn center_value_and_degrees() {
        let spec = make_center_transform(&params(0.5), &unicycle(), linear2()).unwrap();
        let x = [10.0, 15.0, 5.0, 0.0, 0.0];
        assert!((spec.transformed().eval(&x).unwrap() - 18.5).abs() < 1e-12);
        assert!((spec.original().eval(&x).unwrap() - (25.0 - 6.5)).abs() < 1e-12);
        assert_eq!(spec.degrees().degrees, vec![Some(2), Some(2)]);
        assert_eq!(spec.degree(), 2);
    }

    #[test]
    fn zero_offset_is_rejected() {
        assert!(matches!(
            make_center_transform(&params(0.0), &unicycle(), linear2()),
            Err(Error::ProbeFailure(_))
        ));
    }

    #[test]
    fn row_layout_with_unit_gains() {
        let sys = unicycle();
        let spec = make_center_transform(&params(0.5), &sys, linear2()).unwrap();
        let x = [12.0, 13.0, 3.0, 0.3, -0.1];
        let bt = spec.transformed().clone();
        let lf = lie_along_f(&bt, &sys);
        let lf2 = lie_along_f(&lf, &sys);
        let expected = lf2.eval(&x).unwrap() + 2.0 * lf.eval(&x).unwrap() + bt.eval(&x).unwrap();
        let row = transform_row(&spec, &x).unwrap();
        assert!((row.rhs - expected).abs() < 1e-10);
        assert!(row.coeffs.iter().all(|c| c.abs() > 1e-9));
    }

    #[test]
    fn stationary_robot_rhs_is_barrier() {
        let spec = make_center_transform(&params(0.5), &unicycle(), linear2()).unwrap();
        let x = [12.0, 13.0, 0.0, 0.7, 0.0];
        let row = spec.row(&x).unwrap();
        assert!((row.rhs - spec.transformed().eval(&x).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn head_on_coefficients() {
        let spec = make_center_transform(&params(0.5), &unicycle(), linear2()).unwrap();
        let x = [10.0, 15.0, 5.0, 0.0, 0.0];
        let row = spec.row(&x).unwrap();
        // the center is straight behind the obstacle: steering has no first-order effect
        assert!(row.coeffs[0].abs() < 1e-12);
        assert!((row.coeffs[1] + 1.0 / M).abs() < 1e-15);
    }

    #[test]
    fn steering_coefficient_scales_with_offset() {
        let sys = unicycle();
        let x = [12.0, 13.0, 3.0, 0.3, -0.1];
        let c = |d: f64| make_center_transform(&params(d), &sys, linear2()).unwrap().row(&x).unwrap().coeffs[0];
        let ratio = c(2e-3) / c(1e-3);
        assert!((ratio - 2.0).abs() < 1e-2, "ratio {ratio}");
    }
}
