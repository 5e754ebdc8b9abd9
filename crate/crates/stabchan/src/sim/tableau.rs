//! Symbolic stabilizer tableau with affine outcome tracking.
//!
//! The state of a channel run is tracked for *all* outcome branches and *all*
//! encoded inputs at once. Every stabilizer generator and every tracked input
//! logical carries an affine form over two symbol families:
//!
//! - `r_k`: genuinely random bits (anticommuting measurements, RAND),
//! - `λ_j`: values of input-logical measurements, indexed by the symplectic
//!   coordinates of the measured combination in the input logical basis.
//!
//! A measurement outcome is a `Form`; a channel check is a slot parity whose
//! form is constant.

use crate::circuit::{Gate1, Gate2, InstrKind};
use crate::f2::{BitVec, F2Matrix};
use crate::pauli::PauliOp;
use crate::ChannelSpec;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("instruction {0}: {1}")]
    Instr(usize, String),
    #[error("input code is underdetermined: measurement of {0} is not resolvable")]
    Underdetermined(String),
    #[error("non-integral phase when matching decomposition (internal)")]
    PhaseMismatch,
}

/// Affine F2 form over random symbols and input-logical symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Form {
    pub constant: bool,
    randoms: BitVec,
    lambdas: BitVec,
}

impl Form {
    pub fn zero(lambda_dim: usize) -> Self {
        Form {
            constant: false,
            randoms: BitVec::zeros(0),
            lambdas: BitVec::zeros(lambda_dim),
        }
    }

    pub fn constant_bit(lambda_dim: usize, value: bool) -> Self {
        let mut f = Form::zero(lambda_dim);
        f.constant = value;
        f
    }

    pub fn random(lambda_dim: usize, idx: usize) -> Self {
        let mut f = Form::zero(lambda_dim);
        f.set_random(idx);
        f
    }

    pub fn set_random(&mut self, idx: usize) {
        if idx >= self.randoms.len() {
            let mut grown = BitVec::zeros(idx + 1);
            for i in self.randoms.support() {
                grown.set(i, true);
            }
            self.randoms = grown;
        }
        self.randoms.flip(idx);
    }

    pub fn xor_assign(&mut self, other: &Form) {
        self.constant ^= other.constant;
        if other.randoms.len() > self.randoms.len() {
            let mut grown = BitVec::zeros(other.randoms.len());
            for i in self.randoms.support() {
                grown.set(i, true);
            }
            self.randoms = grown;
        }
        for i in other.randoms.support() {
            self.randoms.flip(i);
        }
        debug_assert_eq!(self.lambdas.len(), other.lambdas.len());
        self.lambdas.xor_assign(&other.lambdas);
    }

    pub fn xor(&self, other: &Form) -> Form {
        let mut f = self.clone();
        f.xor_assign(other);
        f
    }

    pub fn flip_constant(&mut self) {
        self.constant = !self.constant;
    }

    pub fn is_constant(&self) -> bool {
        self.randoms.is_zero() && self.lambdas.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        !self.constant && self.is_constant()
    }

    pub fn random_deps(&self) -> &BitVec {
        &self.randoms
    }

    pub fn lambda_deps(&self) -> &BitVec {
        &self.lambdas
    }

    pub fn lambda_xor(&mut self, coords: &BitVec) {
        debug_assert_eq!(self.lambdas.len(), coords.len());
        self.lambdas.xor_assign(coords);
    }

    /// Dependency vector padded to a uniform width: randoms[0..nr] ++ lambdas.
    pub fn dep_vec(&self, n_rand: usize) -> BitVec {
        let mut v = BitVec::zeros(n_rand + self.lambdas.len());
        for i in self.randoms.support() {
            v.set(i, true);
        }
        for i in self.lambdas.support() {
            v.set(n_rand + i, true);
        }
        v
    }

    /// Evaluate for a concrete assignment of all symbols.
    pub fn eval(&self, randoms: &BitVec, lambdas: &BitVec) -> bool {
        let mut acc = self.constant;
        for i in self.randoms.support() {
            acc ^= randoms.get(i);
        }
        for i in self.lambdas.support() {
            acc ^= lambdas.get(i);
        }
        acc
    }
}

/// A Pauli fact with an affine sign: (-1)^form · pauli.
#[derive(Clone, Debug)]
pub struct TrackedOp {
    pub pauli: PauliOp,
    pub form: Form,
}

impl TrackedOp {
    fn mul_assign(&mut self, other: &TrackedOp) {
        self.pauli.mul_assign(&other.pauli);
        self.form.xor_assign(&other.form);
    }
}

/// Symbolic stabilizer state.
#[derive(Clone, Debug)]
pub struct Tableau {
    pub n: usize,
    pub live: Vec<bool>,
    pub stabs: Vec<TrackedOp>,
    /// Images of the input logical basis, flattened [X0, Z0, X1, Z1, ...].
    pub trackers: Vec<TrackedOp>,
    pub n_rand: usize,
    lambda_dim: usize,
    /// Original input logical basis (for λ phase normalization).
    input_basis: Vec<PauliOp>,
}

impl Tableau {
    pub fn for_channel(spec: &ChannelSpec) -> Self {
        let n = spec.n_qubits();
        let mut live = vec![false; n];
        for g in spec.s_in.generators() {
            for q in g.support() {
                live[q] = true;
            }
        }
        for (x, z) in &spec.basis_in {
            for q in x.support().into_iter().chain(z.support()) {
                live[q] = true;
            }
        }
        let lambda_dim = 2 * spec.basis_in.len();
        let stabs = spec
            .s_in
            .generators()
            .iter()
            .map(|g| TrackedOp { pauli: g.clone(), form: Form::zero(lambda_dim) })
            .collect();
        let mut trackers = Vec::with_capacity(lambda_dim);
        let mut input_basis = Vec::with_capacity(lambda_dim);
        for (x, z) in &spec.basis_in {
            for op in [x, z] {
                trackers.push(TrackedOp { pauli: op.clone(), form: Form::zero(lambda_dim) });
                input_basis.push(op.clone());
            }
        }
        Tableau { n, live, stabs, trackers, n_rand: 0, lambda_dim, input_basis }
    }

    pub fn lambda_dim(&self) -> usize {
        self.lambda_dim
    }

    fn fresh_random(&mut self) -> Form {
        let f = Form::random(self.lambda_dim, self.n_rand);
        self.n_rand += 1;
        f
    }

    fn all_ops_mut(&mut self) -> impl Iterator<Item = &mut TrackedOp> {
        self.stabs.iter_mut().chain(self.trackers.iter_mut())
    }

    pub fn apply_gate1(&mut self, g: Gate1, q: usize) {
        match g {
            Gate1::H => self.all_ops_mut().for_each(|o| o.pauli.apply_h(q)),
            Gate1::S => self.all_ops_mut().for_each(|o| o.pauli.apply_s(q)),
            Gate1::Idle => {}
        }
    }

    pub fn apply_gate2(&mut self, g: Gate2, a: usize, b: usize) {
        match g {
            Gate2::Cx => self.all_ops_mut().for_each(|o| o.pauli.apply_cx(a, b)),
            Gate2::Cz => self.all_ops_mut().for_each(|o| o.pauli.apply_cz(a, b)),
            Gate2::Swap => self.all_ops_mut().for_each(|o| o.pauli.apply_swap(a, b)),
        }
    }

    pub fn apply_conditional(&mut self, pauli: &PauliOp, control: &Form) {
        for op in self.stabs.iter_mut().chain(self.trackers.iter_mut()) {
            if !op.pauli.commutes(pauli) {
                op.form.xor_assign(control);
            }
        }
    }

    /// Non-destructive measurement; returns the outcome form.
    pub fn measure(&mut self, op: &PauliOp) -> Result<Form, SimError> {
        if let Some(i0) = self.stabs.iter().position(|s| !s.pauli.commutes(op)) {
            // Random outcome: the anticommuting generator is consumed.
            let pivot = self.stabs[i0].clone();
            for (i, s) in self.stabs.iter_mut().enumerate() {
                if i != i0 && !s.pauli.commutes(op) {
                    s.mul_assign(&pivot);
                }
            }
            for t in self.trackers.iter_mut() {
                if !t.pauli.commutes(op) {
                    t.mul_assign(&pivot);
                }
            }
            let form = self.fresh_random();
            self.stabs[i0] = TrackedOp { pauli: op.clone(), form: form.clone() };
            return Ok(form);
        }
        // Deterministic or logical-collapse outcome.
        let (form, used_trackers) = self.decompose(op)?;
        if !used_trackers.is_zero() {
            self.stabs.push(TrackedOp { pauli: op.clone(), form: form.clone() });
        }
        Ok(form)
    }

    /// Express op over stabs (and trackers if needed); returns the outcome form
    /// and the tracker coefficient vector (zero when stabs suffice).
    pub fn decompose(&self, op: &PauliOp) -> Result<(Form, BitVec), SimError> {
        let target = op.sym_vec();
        let stab_mat = F2Matrix::from_rows(
            self.stabs.iter().map(|s| s.pauli.sym_vec()).collect(),
            2 * self.n,
        );
        if let Some(coeffs) = stab_mat.transpose().solve(&target) {
            let form = self.finish_decomposition(op, &coeffs, &BitVec::zeros(self.trackers.len()))?;
            return Ok((form, BitVec::zeros(self.trackers.len())));
        }
        let mut rows: Vec<BitVec> = self.stabs.iter().map(|s| s.pauli.sym_vec()).collect();
        rows.extend(self.trackers.iter().map(|t| t.pauli.sym_vec()));
        let combined = F2Matrix::from_rows(rows, 2 * self.n);
        let coeffs = combined
            .transpose()
            .solve(&target)
            .ok_or_else(|| SimError::Underdetermined(op.to_string()))?;
        let stab_coeffs = coeffs.slice(0, self.stabs.len());
        let tracker_coeffs = coeffs.slice(self.stabs.len(), coeffs.len());
        let form = self.finish_decomposition(op, &stab_coeffs, &tracker_coeffs)?;
        Ok((form, tracker_coeffs))
    }

    /// Compute the outcome form for op = (∏ stabs)·(∏ trackers) with exact
    /// phase accounting; λ symbols are referenced against the canonical
    /// Hermitian product of the original input basis elements.
    fn finish_decomposition(
        &self,
        op: &PauliOp,
        stab_coeffs: &BitVec,
        tracker_coeffs: &BitVec,
    ) -> Result<Form, SimError> {
        let mut form = Form::zero(self.lambda_dim);
        let mut prod = PauliOp::identity(self.n);
        for i in stab_coeffs.support() {
            prod.mul_assign(&self.stabs[i].pauli);
            form.xor_assign(&self.stabs[i].form);
        }
        for i in tracker_coeffs.support() {
            prod.mul_assign(&self.trackers[i].pauli);
            form.xor_assign(&self.trackers[i].form);
        }
        // prod = i^m · op for some m; λ referent is the +1 Hermitian canonical
        // of the matching input-basis product.
        let mut k_l = 0u8;
        if !tracker_coeffs.is_zero() {
            let mut prod_l = PauliOp::identity(self.input_basis[0].n_qubits());
            for i in tracker_coeffs.support() {
                prod_l.mul_assign(&self.input_basis[i]);
            }
            let mut lam = BitVec::zeros(self.lambda_dim);
            for i in tracker_coeffs.support() {
                lam.flip(i);
            }
            form.lambda_xor(&lam);
            k_l = prod_l.phase_exp();
        }
        let m = (prod.phase_exp() + 4 - op.phase_exp()) % 4;
        let net = (k_l + 4 - m) % 4;
        if net % 2 != 0 {
            return Err(SimError::PhaseMismatch);
        }
        if net == 2 {
            form.flip_constant();
        }
        Ok(form)
    }

    /// Destructive single-qubit measurement: measure, then detach the qubit.
    pub fn measure_destructive(&mut self, q: usize, basis_x: bool) -> Result<Form, SimError> {
        let sq = PauliOp::single(self.n, q, if basis_x { 'X' } else { 'Z' });
        let outcome = self.measure(&sq)?;
        // An entry with sq's vector exists after measure() unless the outcome
        // was deterministic over the stabilizers; build a virtual one then.
        let entry_idx = self.stabs.iter().position(|s| s.pauli.sym_vec() == sq.sym_vec());
        let entry = match entry_idx {
            Some(i) => self.stabs[i].clone(),
            None => {
                let (form, _) = self.decompose(&sq)?;
                TrackedOp { pauli: sq.clone(), form }
            }
        };
        for (i, op) in self.stabs.iter_mut().enumerate() {
            if Some(i) == entry_idx {
                continue;
            }
            let touches = if basis_x { op.pauli.x_bit(q) } else { op.pauli.z_bit(q) };
            if touches {
                op.mul_assign(&entry);
            }
        }
        for op in self.trackers.iter_mut() {
            let touches = if basis_x { op.pauli.x_bit(q) } else { op.pauli.z_bit(q) };
            if touches {
                op.mul_assign(&entry);
            }
        }
        if let Some(i) = entry_idx {
            self.stabs.remove(i);
        }
        self.sift_stabs();
        self.live[q] = false;
        debug_assert!(self
            .stabs
            .iter()
            .chain(self.trackers.iter())
            .all(|o| !o.pauli.x_bit(q) && !o.pauli.z_bit(q)));
        Ok(outcome)
    }

    /// Returns false if the qubit is already live.
    pub fn prep(&mut self, q: usize, basis_x: bool) -> bool {
        if self.live[q] {
            return false;
        }
        self.live[q] = true;
        self.stabs.push(TrackedOp {
            pauli: PauliOp::single(self.n, q, if basis_x { 'X' } else { 'Z' }),
            form: Form::zero(self.lambda_dim),
        });
        true
    }

    /// Row-reduce the stabilizer list, dropping dependent entries. Dependent
    /// entries must reduce to a consistent constant fact.
    fn sift_stabs(&mut self) {
        let mut basis: Vec<TrackedOp> = Vec::new();
        for s in &self.stabs {
            let mut cur = s.clone();
            loop {
                let Some(pivot) = cur.pauli.sym_vec().lowest_set() else {
                    debug_assert!(
                        cur.form.is_constant() && cur.form.constant == cur.pauli.sign(),
                        "inconsistent dependent stabilizer fact"
                    );
                    break;
                };
                if let Some(row) = basis
                    .iter()
                    .find(|b| b.pauli.sym_vec().lowest_set() == Some(pivot))
                {
                    let row = row.clone();
                    cur.mul_assign(&row);
                } else {
                    basis.push(cur);
                    basis.sort_by_key(|b| b.pauli.sym_vec().lowest_set());
                    break;
                }
            }
        }
        self.stabs = basis;
    }
}

/// Result of running a channel symbolically: per-slot outcome forms plus the
/// final (and pre-conditional) tableaux.
#[derive(Clone, Debug)]
pub struct SymbolicRun {
    pub outcome_forms: Vec<Form>,
    pub final_state: Tableau,
    /// State snapshot just before the trailing conditional-Pauli block.
    pub pre_fix_state: Tableau,
    /// Timestep of each outcome slot.
    pub slot_timestep: Vec<usize>,
    /// Measured operator of each slot (single-qubit op for MZ/MX, the Pauli
    /// for MPP, None for RAND).
    pub slot_op: Vec<Option<PauliOp>>,
}

impl SymbolicRun {
    pub fn lambda_dim(&self) -> usize {
        self.final_state.lambda_dim()
    }

    pub fn n_rand(&self) -> usize {
        self.final_state.n_rand
    }

    /// Form of a slot-parity expression.
    pub fn parity_form(&self, slots: &[usize], constant: bool) -> Form {
        let mut f = Form::constant_bit(self.lambda_dim(), constant);
        for &s in slots {
            f.xor_assign(&self.outcome_forms[s]);
        }
        f
    }
}

/// Execute the channel symbolically over all branches.
pub fn run_symbolic(spec: &ChannelSpec) -> Result<SymbolicRun, SimError> {
    let mut tab = Tableau::for_channel(spec);
    let mut outcome_forms = Vec::with_capacity(spec.circuit.n_outcomes());
    let mut slot_timestep = Vec::new();
    let mut slot_op = Vec::new();
    let mut pre_fix: Option<Tableau> = None;
    let mut timestep = 0usize;

    for (idx, instr) in spec.circuit.instructions.iter().enumerate() {
        let check_live = |tab: &Tableau, qs: &[usize]| -> Result<(), SimError> {
            for &q in qs {
                if !tab.live[q] {
                    return Err(SimError::Instr(idx, format!("qubit {q} is not live")));
                }
            }
            Ok(())
        };
        match &instr.kind {
            InstrKind::Tick => timestep += 1,
            InstrKind::Gate1(g, q) => {
                check_live(&tab, &[*q])?;
                tab.apply_gate1(*g, *q);
            }
            InstrKind::Gate2(g, a, b) => {
                check_live(&tab, &[*a, *b])?;
                tab.apply_gate2(*g, *a, *b);
            }
            InstrKind::PrepZ(q) => {
                tab.prep(*q, false).map_err(|_| {
                    SimError::Instr(idx, format!("prep on live qubit {q}"))
                })?;
            }
            InstrKind::PrepX(q) => {
                tab.prep(*q, true).map_err(|_| {
                    SimError::Instr(idx, format!("prep on live qubit {q}"))
                })?;
            }
            InstrKind::MeasureZ(q) | InstrKind::MeasureX(q) => {
                check_live(&tab, &[*q])?;
                let basis_x = matches!(instr.kind, InstrKind::MeasureX(_));
                let form = tab.measure_destructive(*q, basis_x)?;
                outcome_forms.push(form);
                slot_timestep.push(timestep);
                slot_op.push(Some(PauliOp::single(tab.n, *q, if basis_x { 'X' } else { 'Z' })));
            }
            InstrKind::MeasurePauli(p) => {
                check_live(&tab, &p.support())?;
                let form = tab.measure(p)?;
                outcome_forms.push(form);
                slot_timestep.push(timestep);
                slot_op.push(Some(p.clone()));
            }
            InstrKind::RandomBit => {
                let form = tab.fresh_random();
                outcome_forms.push(form);
                slot_timestep.push(timestep);
                slot_op.push(None);
            }
            InstrKind::ConditionalPauli(p, parity) => {
                check_live(&tab, &p.support())?;
                if pre_fix.is_none() {
                    pre_fix = Some(tab.clone());
                }
                let mut control = Form::constant_bit(tab.lambda_dim(), parity.constant);
                for &s in &parity.slots {
                    control.xor_assign(&outcome_forms[s]);
                }
                tab.apply_conditional(p, &control);
            }
        }
    }
    let pre_fix_state = pre_fix.unwrap_or_else(|| tab.clone());
    Ok(SymbolicRun {
        outcome_forms,
        final_state: tab,
        pre_fix_state,
        slot_timestep,
        slot_op,
    })
}
