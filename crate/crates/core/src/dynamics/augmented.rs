use std::sync::Arc;

use crate::autodiff::Jet;
use crate::error::{Error, Result};
use crate::scalar::Real;

use super::{AffineSystem, ControlBounds, StateBox};

/// Linear chain `u̇_j = A u_j + b ν_j` attached to one control component.
#[derive(Clone, Debug, PartialEq)]
pub enum ChainDynamics<T> {
    /// `u̇_{j,k} = u_{j,k+1}`, `u̇_{j,m} = ν_j`.
    Integrator(usize),
    Linear { a: Vec<Vec<T>>, b: Vec<T> },
}

impl<T: Real> ChainDynamics<T> {
    pub fn len(&self) -> usize {
        match self {
            ChainDynamics::Integrator(m) => *m,
            ChainDynamics::Linear { b, .. } => b.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn validate(&self) -> Result<()> {
        match self {
            ChainDynamics::Integrator(0) => Err(Error::Auxiliary("chain length must be >= 1".into())),
            ChainDynamics::Integrator(_) => Ok(()),
            ChainDynamics::Linear { a, b } => {
                if b.is_empty() || a.len() != b.len() || a.iter().any(|row| row.len() != b.len()) {
                    return Err(Error::Auxiliary(format!(
                        "linear chain needs a {m}x{m} matrix and a length-{m} input vector",
                        m = b.len()
                    )));
                }
                Ok(())
            }
        }
    }

    /// `A u` evaluated on jets.
    pub fn drift(&self, u: &[Jet<T>]) -> Vec<Jet<T>> {
        match self {
            ChainDynamics::Integrator(m) => {
                let mut out: Vec<Jet<T>> = u[1..*m].to_vec();
                out.push(Jet::zero());
                out
            }
            ChainDynamics::Linear { a, .. } => a
                .iter()
                .map(|row| {
                    row.iter()
                        .zip(u)
                        .fold(Jet::zero(), |acc, (&c, uk)| acc + uk * c)
                })
                .collect(),
        }
    }

    /// Input vector `b`.
    pub fn input(&self) -> Vec<T> {
        match self {
            ChainDynamics::Integrator(m) => {
                let mut b = vec![T::zero(); *m];
                b[m - 1] = T::one();
                b
            }
            ChainDynamics::Linear { b, .. } => b.clone(),
        }
    }
}

/// Auxiliary dynamics turning control component `control` into a state.
#[derive(Clone, Debug, PartialEq)]
pub struct AuxiliaryDynamics<T> {
    /// Zero-based index of the differentiated control component.
    pub control: usize,
    pub chain: ChainDynamics<T>,
    /// Initial chain state; the first entry is the applied control.
    pub initial: Vec<T>,
}

impl<T: Real> AuxiliaryDynamics<T> {
    /// Pure integrator chain of length `len`, starting at `u_j = start` with
    /// all higher derivatives zero.
    pub fn integrator(control: usize, len: usize, start: T) -> Self {
        let mut initial = vec![T::zero(); len.max(1)];
        initial[0] = start;
        AuxiliaryDynamics {
            control,
            chain: ChainDynamics::Integrator(len),
            initial,
        }
    }

    pub fn len(&self) -> usize {
        self.chain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chain.is_empty()
    }
}

/// Where an augmented control `u_y` entry comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ControlSlot {
    /// Undifferentiated base control `u_j`.
    Base(usize),
    /// Auxiliary input `ν` of the chain at this position in the aux list.
    Aux(usize),
}

/// Base system plus integrator chains, itself an affine system in
/// `y = (x, u_a)` and `u_y = (u_n, ν)`.
#[derive(Clone, Debug)]
pub struct AugmentedSystem<T> {
    base: AffineSystem<T>,
    aux: Vec<AuxiliaryDynamics<T>>,
    system: AffineSystem<T>,
    offsets: Vec<usize>,
    slots: Vec<ControlSlot>,
}

/// Stacks the base dynamics with the auxiliary chains.
///
/// Base rows of `F` are `f(x) + Σ_j g_j(x) u_{j,1}` over the differentiated
/// components; chain rows are `A_j u_j`. `G` keeps the base columns of the
/// undifferentiated controls and adds one column `b_j` per chain.
pub fn compose_augmented<T: Real>(
    base: &AffineSystem<T>,
    aux: &[AuxiliaryDynamics<T>],
) -> Result<AugmentedSystem<T>> {
    let n = base.state_dim();
    let q = base.control_dim();
    let mut seen = vec![false; q];
    for a in aux {
        if a.control >= q {
            return Err(Error::Auxiliary(format!(
                "control index {} out of range for q = {q}",
                a.control
            )));
        }
        if std::mem::replace(&mut seen[a.control], true) {
            return Err(Error::Auxiliary(format!("duplicate control index {}", a.control)));
        }
        a.chain.validate()?;
        if a.initial.len() != a.len() {
            return Err(Error::dimension("auxiliary initial state", a.len(), a.initial.len()));
        }
    }
    if aux.is_empty() {
        return Ok(AugmentedSystem {
            base: base.clone(),
            aux: Vec::new(),
            system: base.clone(),
            offsets: Vec::new(),
            slots: (0..q).map(ControlSlot::Base).collect(),
        });
    }

    let mut offsets = Vec::with_capacity(aux.len());
    let mut dim = n;
    for a in aux {
        offsets.push(dim);
        dim += a.len();
    }
    let undifferentiated: Vec<usize> = (0..q).filter(|j| !seen[*j]).collect();
    let mut slots: Vec<ControlSlot> = undifferentiated.iter().map(|&j| ControlSlot::Base(j)).collect();
    slots.extend((0..aux.len()).map(ControlSlot::Aux));

    let chains: Arc<Vec<(usize, usize, ChainDynamics<T>)>> = Arc::new(
        aux.iter()
            .zip(&offsets)
            .map(|(a, &off)| (a.control, off, a.chain.clone()))
            .collect(),
    );

    let drift = {
        let base = base.clone();
        let chains = chains.clone();
        move |y: &[Jet<T>]| {
            let x = &y[..n];
            let mut out = base.drift_jets(x);
            let cols = base.input_jets(x);
            for (j, off, chain) in chains.iter() {
                let uj = &y[*off];
                for (o, c) in out.iter_mut().zip(&cols[*j]) {
                    *o = &*o + c * uj;
                }
                let len = chain.len();
                out.extend(chain.drift(&y[*off..*off + len]));
            }
            out
        }
    };

    let input = {
        let base = base.clone();
        let chains = chains.clone();
        let undifferentiated = undifferentiated.clone();
        move |y: &[Jet<T>]| {
            let x = &y[..n];
            let cols = base.input_jets(x);
            let mut out = Vec::with_capacity(undifferentiated.len() + chains.len());
            for &j in &undifferentiated {
                let mut col = cols[j].clone();
                col.resize(dim, Jet::zero());
                out.push(col);
            }
            for (_, off, chain) in chains.iter() {
                let mut col = vec![Jet::zero(); dim];
                for (k, bk) in chain.input().into_iter().enumerate() {
                    col[off + k] = Jet::constant(bk);
                }
                out.push(col);
            }
            out
        }
    };

    let base_bounds = base.bounds();
    let mut lower = Vec::with_capacity(q);
    let mut upper = Vec::with_capacity(q);
    for slot in &slots {
        match slot {
            ControlSlot::Base(j) => {
                lower.push(base_bounds.lower[*j]);
                upper.push(base_bounds.upper[*j]);
            }
            ControlSlot::Aux(_) => {
                lower.push(T::neg_infinity());
                upper.push(T::infinity());
            }
        }
    }

    let mut state_labels: Vec<String> = base.state_labels().to_vec();
    for a in aux {
        let name = &base.control_labels()[a.control];
        for k in 0..a.len() {
            state_labels.push(if k == 0 {
                name.clone()
            } else {
                format!("{name}^({k})")
            });
        }
    }
    let control_labels: Vec<String> = slots
        .iter()
        .map(|s| match s {
            ControlSlot::Base(j) => base.control_labels()[*j].clone(),
            ControlSlot::Aux(i) => format!("nu_{}", base.control_labels()[aux[*i].control]),
        })
        .collect();

    let base_domain = base.domain();
    let mut dlo = base_domain.lower.clone();
    let mut dhi = base_domain.upper.clone();
    for a in aux {
        let (lo, hi) = (base_bounds.lower[a.control], base_bounds.upper[a.control]);
        let (lo, hi) = if lo.is_finite() && hi.is_finite() {
            (lo, hi)
        } else {
            (-T::one(), T::one())
        };
        dlo.push(lo);
        dhi.push(hi);
        let width = hi - lo;
        for _ in 1..a.len() {
            dlo.push(-width);
            dhi.push(width);
        }
    }

    let states: Vec<&str> = state_labels.iter().map(String::as_str).collect();
    let controls: Vec<&str> = control_labels.iter().map(String::as_str).collect();
    let system = AffineSystem::new(dim, q, drift, input, ControlBounds { lower, upper })?
        .with_labels(&states, &controls)
        .with_domain(StateBox::new(dlo, dhi)?)?;

    Ok(AugmentedSystem {
        base: base.clone(),
        aux: aux.to_vec(),
        system,
        offsets,
        slots,
    })
}

impl<T: Real> AugmentedSystem<T> {
    pub fn system(&self) -> &AffineSystem<T> {
        &self.system
    }

    pub fn base(&self) -> &AffineSystem<T> {
        &self.base
    }

    pub fn aux(&self) -> &[AuxiliaryDynamics<T>] {
        &self.aux
    }

    pub fn control_slots(&self) -> &[ControlSlot] {
        &self.slots
    }

    /// Offset of each chain inside the augmented state.
    pub fn aux_offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn state_dim(&self) -> usize {
        self.system.state_dim()
    }

    pub fn is_trivial(&self) -> bool {
        self.aux.is_empty()
    }

    /// `y = (x, u_a)` from base state and chain states (in aux order).
    pub fn join_state(&self, x: &[T], aux_states: &[Vec<T>]) -> Result<Vec<T>> {
        if x.len() != self.base.state_dim() {
            return Err(Error::dimension("base state", self.base.state_dim(), x.len()));
        }
        if aux_states.len() != self.aux.len() {
            return Err(Error::dimension("auxiliary states", self.aux.len(), aux_states.len()));
        }
        let mut y = x.to_vec();
        for (a, s) in self.aux.iter().zip(aux_states) {
            if s.len() != a.len() {
                return Err(Error::dimension("auxiliary chain state", a.len(), s.len()));
            }
            y.extend_from_slice(s);
        }
        Ok(y)
    }

    /// Initial augmented state from a base state and the chains' initial values.
    pub fn initial_state(&self, x: &[T]) -> Result<Vec<T>> {
        let aux: Vec<Vec<T>> = self.aux.iter().map(|a| a.initial.clone()).collect();
        self.join_state(x, &aux)
    }

    pub fn base_state<'a>(&self, y: &'a [T]) -> &'a [T] {
        &y[..self.base.state_dim()]
    }

    /// Chain states in aux order.
    pub fn aux_states(&self, y: &[T]) -> Vec<Vec<T>> {
        self.aux
            .iter()
            .zip(&self.offsets)
            .map(|(a, &off)| y[off..off + a.len()].to_vec())
            .collect()
    }

    /// Control applied to the base system: `u_n` from `u_y`, integral
    /// controls from the first coordinate of each chain.
    pub fn base_control(&self, y: &[T], u_y: &[T]) -> Vec<T> {
        let mut u = vec![T::zero(); self.base.control_dim()];
        for (slot, &val) in self.slots.iter().zip(u_y) {
            if let ControlSlot::Base(j) = slot {
                u[*j] = val;
            }
        }
        for (a, &off) in self.aux.iter().zip(&self.offsets) {
            u[a.control] = y[off];
        }
        u
    }

    /// Position of chain `aux_index`'s input `ν` in `u_y`.
    pub fn nu_slot(&self, aux_index: usize) -> Option<usize> {
        self.slots.iter().position(|s| *s == ControlSlot::Aux(aux_index))
    }
}
