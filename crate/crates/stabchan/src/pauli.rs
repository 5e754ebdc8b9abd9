//! Pauli operators, stabilizer groups, symplectic bases and syndromes.
//!
//! A Pauli is stored as a pair of F2 bit vectors (X part, Z part) plus a phase
//! exponent k with the meaning `i^k · W_1 ⊗ … ⊗ W_n`, where each letter W_j is
//! the Hermitian Pauli selected by (x_j, z_j). Hermitian operators have k in
//! {0, 2}; products of anticommuting operators pass through odd k internally.

use crate::f2::{BitVec, F2Matrix};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PauliError {
    #[error("qubit count mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("operator is not Hermitian (phase i^{0})")]
    NotHermitian(u8),
    #[error("pauli parse error: {0}")]
    Parse(String),
    #[error("generators do not commute: #{0} and #{1}")]
    NonCommuting(usize, usize),
    #[error("group contains -identity")]
    MinusIdentity,
    #[error("basis does not respect the stabilizer group")]
    BasisMismatch,
}

/// n-qubit Pauli operator with phase tracking.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliOp {
    x: BitVec,
    z: BitVec,
    /// exponent of i in `i^phase · ∏ W_j`
    phase: u8,
}

impl PauliOp {
    pub fn identity(n: usize) -> Self {
        PauliOp {
            x: BitVec::zeros(n),
            z: BitVec::zeros(n),
            phase: 0,
        }
    }

    pub fn from_xz(x: BitVec, z: BitVec, negative: bool) -> Self {
        assert_eq!(x.len(), z.len());
        PauliOp {
            x,
            z,
            phase: if negative { 2 } else { 0 },
        }
    }

    /// Single-qubit letter ('X', 'Y' or 'Z') at position q.
    pub fn single(n: usize, q: usize, letter: char) -> Self {
        let mut p = PauliOp::identity(n);
        let (xb, zb) = match letter {
            'X' => (true, false),
            'Y' => (true, true),
            'Z' => (false, true),
            _ => panic!("bad pauli letter {letter}"),
        };
        p.x.set(q, xb);
        p.z.set(q, zb);
        p
    }

    pub fn n_qubits(&self) -> usize {
        self.x.len()
    }

    pub fn x_part(&self) -> &BitVec {
        &self.x
    }

    pub fn z_part(&self) -> &BitVec {
        &self.z
    }

    pub fn x_bit(&self, q: usize) -> bool {
        self.x.get(q)
    }

    pub fn z_bit(&self, q: usize) -> bool {
        self.z.get(q)
    }

    pub fn set_xz(&mut self, q: usize, xb: bool, zb: bool) {
        self.x.set(q, xb);
        self.z.set(q, zb);
    }

    pub fn is_identity(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    /// Number of qubits acted on non-trivially.
    pub fn weight(&self) -> usize {
        self.x.support().len() + self.z.support().len()
            - self.x.and(&self.z).support().len()
    }

    pub fn support(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.x.support();
        for q in self.z.support() {
            if !self.x.get(q) {
                s.push(q);
            }
        }
        s.sort_unstable();
        s
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase % 2 == 0
    }

    /// Raw phase exponent k in `i^k · ∏ W_j`; odd values occur only for
    /// intermediate products of anticommuting operators.
    pub fn phase_exp(&self) -> u8 {
        self.phase
    }

    /// Sign of a Hermitian operator: false = +1, true = -1.
    pub fn sign(&self) -> bool {
        assert!(self.is_hermitian(), "sign of non-Hermitian Pauli");
        self.phase == 2
    }

    pub fn set_sign(&mut self, negative: bool) {
        self.phase = if negative { 2 } else { 0 };
    }

    pub fn negated(&self) -> PauliOp {
        let mut p = self.clone();
        p.phase = (p.phase + 2) % 4;
        p
    }

    /// Symplectic vector (x ++ z) of length 2n.
    pub fn sym_vec(&self) -> BitVec {
        self.x.concat(&self.z)
    }

    pub fn from_sym_vec(v: &BitVec, negative: bool) -> PauliOp {
        let n = v.len() / 2;
        PauliOp::from_xz(v.slice(0, n), v.slice(n, 2 * n), negative)
    }

    /// Symplectic product ⟦P,Q⟧: 0 if the operators commute, 1 otherwise.
    pub fn commutator(&self, other: &PauliOp) -> bool {
        assert_eq!(self.n_qubits(), other.n_qubits(), "commutator length mismatch");
        self.x.dot(&other.z) ^ self.z.dot(&other.x)
    }

    pub fn commutes(&self, other: &PauliOp) -> bool {
        !self.commutator(other)
    }

    /// In-place product self ← self · other, with exact phase tracking.
    pub fn mul_assign(&mut self, other: &PauliOp) {
        assert_eq!(self.n_qubits(), other.n_qubits(), "product length mismatch");
        // Letter products contribute i^{+1} for cyclic pairs (X,Y),(Y,Z),(Z,X)
        // and i^{-1} for the reversed ones.
        let mut plus = 0usize;
        let mut minus = 0usize;
        let n = self.n_qubits();
        for q in 0..n {
            let (x1, z1) = (self.x.get(q), self.z.get(q));
            let (x2, z2) = (other.x.get(q), other.z.get(q));
            if (x1 || z1) && (x2 || z2) && (x1 != x2 || z1 != z2) {
                let cyc = (x1 && !z1 && x2 && z2)
                    || (x1 && z1 && !x2 && z2)
                    || (!x1 && z1 && x2 && !z2);
                if cyc {
                    plus += 1;
                } else {
                    minus += 1;
                }
            }
        }
        self.phase = ((self.phase as usize + other.phase as usize + plus + 3 * minus) % 4) as u8;
        self.x.xor_assign(&other.x);
        self.z.xor_assign(&other.z);
    }

    pub fn mul(&self, other: &PauliOp) -> PauliOp {
        let mut p = self.clone();
        p.mul_assign(other);
        p
    }

    // Clifford conjugation, O ← U O U†, acting on stored bits and phase.

    pub fn apply_h(&mut self, q: usize) {
        let (xb, zb) = (self.x.get(q), self.z.get(q));
        if xb && zb {
            self.phase = (self.phase + 2) % 4;
        }
        self.x.set(q, zb);
        self.z.set(q, xb);
    }

    pub fn apply_s(&mut self, q: usize) {
        let (xb, zb) = (self.x.get(q), self.z.get(q));
        if xb && zb {
            self.phase = (self.phase + 2) % 4;
        }
        self.z.set(q, zb ^ xb);
    }

    pub fn apply_cx(&mut self, c: usize, t: usize) {
        let (xc, zc) = (self.x.get(c), self.z.get(c));
        let (xt, zt) = (self.x.get(t), self.z.get(t));
        if xc && zt && (xt == zc) {
            self.phase = (self.phase + 2) % 4;
        }
        self.x.set(t, xt ^ xc);
        self.z.set(c, zc ^ zt);
    }

    pub fn apply_cz(&mut self, a: usize, b: usize) {
        let (xa, za) = (self.x.get(a), self.z.get(a));
        let (xb, zb) = (self.x.get(b), self.z.get(b));
        if xa && xb && (za != zb) {
            self.phase = (self.phase + 2) % 4;
        }
        self.z.set(a, za ^ xb);
        self.z.set(b, zb ^ xa);
    }

    pub fn apply_swap(&mut self, a: usize, b: usize) {
        let (xa, za) = (self.x.get(a), self.z.get(a));
        let (xb, zb) = (self.x.get(b), self.z.get(b));
        self.x.set(a, xb);
        self.z.set(a, zb);
        self.x.set(b, xa);
        self.z.set(b, za);
    }

    /// Zero out the action on qubit q (used when a qubit is discarded).
    pub fn clear_qubit(&mut self, q: usize) {
        self.x.set(q, false);
        self.z.set(q, false);
    }

    /// Parse the text form, e.g. `+X0*X1*Z4`, `-Y2`, `+I`.
    pub fn parse(text: &str, n: usize) -> Result<PauliOp, PauliError> {
        let text = text.trim();
        let (negative, body) = match text.chars().next() {
            Some('+') => (false, &text[1..]),
            Some('-') => (true, &text[1..]),
            Some(_) => (false, text),
            None => return Err(PauliError::Parse("empty pauli".into())),
        };
        let mut p = PauliOp::identity(n);
        p.set_sign(negative);
        if body == "I" {
            return Ok(p);
        }
        for factor in body.split('*') {
            let mut chars = factor.chars();
            let letter = chars
                .next()
                .ok_or_else(|| PauliError::Parse(format!("empty factor in '{text}'")))?;
            if !matches!(letter, 'X' | 'Y' | 'Z') {
                return Err(PauliError::Parse(format!("bad letter '{letter}' in '{text}'")));
            }
            let idx: usize = chars
                .as_str()
                .parse()
                .map_err(|_| PauliError::Parse(format!("bad qubit index in '{factor}'")))?;
            if idx >= n {
                return Err(PauliError::Parse(format!("qubit {idx} out of range (n={n})")));
            }
            if p.x.get(idx) || p.z.get(idx) {
                return Err(PauliError::Parse(format!("qubit {idx} repeated in '{text}'")));
            }
            let single = PauliOp::single(n, idx, letter);
            p.x.xor_assign(&single.x);
            p.z.xor_assign(&single.z);
        }
        Ok(p)
    }
}

impl fmt::Display for PauliOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", if self.is_hermitian() && self.sign() { '-' } else { '+' })?;
        let support = self.support();
        if support.is_empty() {
            return write!(f, "I");
        }
        let mut first = true;
        for q in support {
            if !first {
                write!(f, "*")?;
            }
            first = false;
            let letter = match (self.x.get(q), self.z.get(q)) {
                (true, false) => 'X',
                (true, true) => 'Y',
                (false, true) => 'Z',
                (false, false) => unreachable!(),
            };
            write!(f, "{letter}{q}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.phase % 2 == 1 {
            write!(f, "i^{} ", self.phase)?;
        }
        write!(f, "{self}")
    }
}

/// Abelian Pauli group given by a list of signed generators.
#[derive(Clone, Debug)]
pub struct StabilizerGroup {
    gens: Vec<PauliOp>,
    n: usize,
}

impl StabilizerGroup {
    /// Build and validate: generators must pairwise commute and must not
    /// generate -identity.
    pub fn new(n: usize, gens: Vec<PauliOp>) -> Result<Self, PauliError> {
        for g in &gens {
            if g.n_qubits() != n {
                return Err(PauliError::LengthMismatch(g.n_qubits(), n));
            }
            if !g.is_hermitian() {
                return Err(PauliError::NotHermitian(3));
            }
        }
        for i in 0..gens.len() {
            for j in (i + 1)..gens.len() {
                if !gens[i].commutes(&gens[j]) {
                    return Err(PauliError::NonCommuting(i, j));
                }
            }
        }
        let group = StabilizerGroup { gens, n };
        group.check_no_minus_identity()?;
        Ok(group)
    }

    pub fn trivial(n: usize) -> Self {
        StabilizerGroup { gens: Vec::new(), n }
    }

    fn check_no_minus_identity(&self) -> Result<(), PauliError> {
        // Sign-tracked reduction: any dependent combination must multiply to +I.
        let mut basis: Vec<PauliOp> = Vec::new();
        for g in &self.gens {
            let mut cur = g.clone();
            loop {
                let Some(pivot) = cur.sym_vec().lowest_set() else {
                    if cur.sign() {
                        return Err(PauliError::MinusIdentity);
                    }
                    break;
                };
                if let Some(row) = basis
                    .iter()
                    .find(|b| b.sym_vec().lowest_set() == Some(pivot))
                {
                    cur = cur.mul(row);
                } else {
                    basis.push(cur);
                    break;
                }
            }
            // keep basis sorted by pivot so the lookup above stays valid
            basis.sort_by_key(|b| b.sym_vec().lowest_set());
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[PauliOp] {
        &self.gens
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    /// Matrix of generator symplectic vectors, one row per generator.
    pub fn sym_matrix(&self) -> F2Matrix {
        F2Matrix::from_rows(self.gens.iter().map(|g| g.sym_vec()).collect(), 2 * self.n)
    }

    pub fn rank(&self) -> usize {
        self.sym_matrix().rank()
    }

    /// Membership modulo phase.
    pub fn contains_mod_phase(&self, p: &PauliOp) -> bool {
        self.sym_matrix().rowspace_contains(&p.sym_vec())
    }

    /// If p (mod phase) is in the group, return the signed group element with
    /// p's symplectic vector: the product of generators expressing it.
    pub fn lift(&self, v: &BitVec) -> Option<PauliOp> {
        let coeffs = self.sym_matrix().express_in_rows(v)?;
        let mut out = PauliOp::identity(self.n);
        for i in coeffs.support() {
            out.mul_assign(&self.gens[i]);
        }
        Some(out)
    }

    /// Does p commute with every generator?
    pub fn centralizes(&self, p: &PauliOp) -> bool {
        self.gens.iter().all(|g| g.commutes(p))
    }

    /// Syndrome of p with respect to the generator list.
    pub fn syndrome(&self, p: &PauliOp) -> BitVec {
        BitVec::from_bits(self.gens.iter().map(|g| g.commutator(p)))
    }

    /// Conjugate every generator by a unitary layer, in place.
    pub fn map_gens(&mut self, f: impl Fn(&mut PauliOp)) {
        for g in &mut self.gens {
            f(g);
        }
    }
}

/// Class of a pair in a common symplectic basis for (S_in, M).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairClass {
    /// Generator of S_in ∩ M (Z-like element in both groups).
    Intersection,
    /// Z-like element in S_in ∩ M^⊥ but not in M.
    SInOnly,
    /// X-like element in M anticommuting with its Z-like partner in S_in.
    Delta,
    /// Z-like element in M, commuting with S_in, not in S_in.
    MOnly,
    /// Neither group constrains the pair.
    Outside,
}

/// Full symplectic basis: n pairs (x_like, z_like) with class labels.
#[derive(Clone, Debug)]
pub struct SymplecticBasis {
    pub pairs: Vec<(PauliOp, PauliOp)>,
    pub labels: Vec<PairClass>,
}

impl SymplecticBasis {
    pub fn n_pairs(&self) -> usize {
        self.pairs.len()
    }

    /// Verify the symplectic contract: within a pair the elements anticommute,
    /// across pairs everything commutes.
    pub fn check_form(&self) -> bool {
        for (i, (xi, zi)) in self.pairs.iter().enumerate() {
            if xi.commutes(zi) {
                return false;
            }
            for (xj, zj) in self.pairs.iter().skip(i + 1) {
                if !xi.commutes(xj) || !xi.commutes(zj) || !zi.commutes(xj) || !zi.commutes(zj) {
                    return false;
                }
            }
        }
        true
    }

    /// Pairs labeled by the classes that generate M: Δ (X-like), ∩ and ⊂ (Z-like).
    pub fn m_generators(&self) -> Vec<PauliOp> {
        let mut out = Vec::new();
        for (i, label) in self.labels.iter().enumerate() {
            match label {
                PairClass::Delta => out.push(self.pairs[i].0.clone()),
                PairClass::Intersection | PairClass::MOnly => out.push(self.pairs[i].1.clone()),
                _ => {}
            }
        }
        out
    }

    /// Pairs labeled by the classes that generate S_in: Δ, ∩, S-only (Z-like).
    pub fn s_in_generators(&self) -> Vec<PauliOp> {
        let mut out = Vec::new();
        for (i, label) in self.labels.iter().enumerate() {
            match label {
                PairClass::Delta | PairClass::Intersection | PairClass::SInOnly => {
                    out.push(self.pairs[i].1.clone())
                }
                _ => {}
            }
        }
        out
    }
}

/// Quotient basis [B]_S: drop pairs with an element in S; the rest represent
/// the logical operators of S.
pub fn logical_quotient_basis(
    basis: &SymplecticBasis,
    s: &StabilizerGroup,
) -> Result<SymplecticBasis, PauliError> {
    let sym = s.sym_matrix();
    let mut kept_pairs = Vec::new();
    let mut kept_labels = Vec::new();
    let mut in_s = 0usize;
    for (i, (x, z)) in basis.pairs.iter().enumerate() {
        let x_in = sym.rowspace_contains(&x.sym_vec());
        let z_in = sym.rowspace_contains(&z.sym_vec());
        if x_in || z_in {
            in_s += 1;
        } else {
            kept_pairs.push((x.clone(), z.clone()));
            kept_labels.push(basis.labels[i]);
        }
    }
    if in_s != s.rank() {
        return Err(PauliError::BasisMismatch);
    }
    Ok(SymplecticBasis {
        pairs: kept_pairs,
        labels: kept_labels,
    })
}

/// Iterative symplectic Gram-Schmidt used by `common_symplectic_basis`.
struct BasisBuilder {
    n: usize,
    placed: Vec<(PauliOp, PauliOp)>,
    labels: Vec<PairClass>,
    pool: Vec<PauliOp>,
    pending_sin: Vec<PauliOp>,
    pending_m: Vec<PauliOp>,
}

impl BasisBuilder {
    fn new(s_in: &StabilizerGroup, m: &StabilizerGroup) -> Self {
        let n = s_in.n_qubits();
        let mut pool = Vec::with_capacity(2 * n);
        for q in 0..n {
            pool.push(PauliOp::single(n, q, 'X'));
        }
        for q in 0..n {
            pool.push(PauliOp::single(n, q, 'Z'));
        }
        let mut b = BasisBuilder {
            n,
            placed: Vec::new(),
            labels: Vec::new(),
            pool,
            pending_sin: s_in.generators().to_vec(),
            pending_m: m.generators().to_vec(),
        };
        b.sift(true);
        b.sift(false);
        b
    }

    /// Reduce c so it commutes with the pair (a, b); ⟦a,b⟧ = 1 required.
    fn gs_reduce(c: &mut PauliOp, a: &PauliOp, b: &PauliOp) {
        let alpha = c.commutator(a);
        let beta = c.commutator(b);
        if alpha {
            c.mul_assign(b);
        }
        if beta {
            c.mul_assign(a);
        }
    }

    fn place(&mut self, x_like: PauliOp, z_like: PauliOp, label: PairClass) {
        debug_assert!(!x_like.commutes(&z_like));
        for c in self
            .pool
            .iter_mut()
            .chain(self.pending_sin.iter_mut())
            .chain(self.pending_m.iter_mut())
        {
            Self::gs_reduce(c, &x_like, &z_like);
        }
        self.placed.push((x_like, z_like));
        self.labels.push(label);
        self.sift(true);
        self.sift(false);
        self.sift_pool();
    }

    /// Row-reduce a pending list in place, dropping elements that become identity.
    fn sift(&mut self, sin: bool) {
        let list = if sin { &mut self.pending_sin } else { &mut self.pending_m };
        let mut basis: Vec<PauliOp> = Vec::new();
        for g in list.iter() {
            let mut cur = g.clone();
            loop {
                let Some(pivot) = cur.sym_vec().lowest_set() else { break };
                if let Some(row) = basis.iter().find(|b| b.sym_vec().lowest_set() == Some(pivot)) {
                    cur = cur.mul(row);
                } else {
                    basis.push(cur);
                    basis.sort_by_key(|b| b.sym_vec().lowest_set());
                    break;
                }
            }
        }
        *list = basis;
    }

    fn sift_pool(&mut self) {
        let mut basis: Vec<PauliOp> = Vec::new();
        for g in &self.pool {
            let mut cur = g.clone();
            loop {
                let Some(pivot) = cur.sym_vec().lowest_set() else { break };
                if let Some(row) = basis.iter().find(|b| b.sym_vec().lowest_set() == Some(pivot)) {
                    cur = cur.mul(row);
                } else {
                    basis.push(cur);
                    basis.sort_by_key(|b| b.sym_vec().lowest_set());
                    break;
                }
            }
        }
        self.pool = basis;
    }

    fn span_matrix(list: &[PauliOp], n: usize) -> F2Matrix {
        F2Matrix::from_rows(list.iter().map(|g| g.sym_vec()).collect(), 2 * n)
    }

    /// Find a product over `candidates` whose symplectic pairings with
    /// `constraints.0` equal `constraints.1`.
    fn solve_partner(
        candidates: &[PauliOp],
        constraints: &[(&PauliOp, bool)],
    ) -> Option<PauliOp> {
        if candidates.is_empty() {
            return None;
        }
        let rows: Vec<BitVec> = constraints
            .iter()
            .map(|(w, _)| BitVec::from_bits(candidates.iter().map(|c| c.commutator(w))))
            .collect();
        let a = F2Matrix::from_rows(rows, candidates.len());
        let target = BitVec::from_bits(constraints.iter().map(|(_, t)| *t));
        let coeffs = a.solve(&target)?;
        let n = candidates[0].n_qubits();
        let mut p = PauliOp::identity(n);
        for i in coeffs.support() {
            p.mul_assign(&candidates[i]);
        }
        if p.is_identity() {
            None
        } else {
            Some(p)
        }
    }

    fn partner_from_pool(&self, g: &PauliOp, commute_with_pending_m: bool) -> Option<PauliOp> {
        let mut constraints: Vec<(&PauliOp, bool)> = vec![(g, true)];
        if commute_with_pending_m {
            for m in &self.pending_m {
                constraints.push((m, false));
            }
        }
        Self::solve_partner(&self.pool, &constraints)
    }

    fn run(mut self) -> SymplecticBasis {
        // 1. Intersection pairs.
        loop {
            let a = Self::span_matrix(&self.pending_sin, self.n);
            let b = Self::span_matrix(&self.pending_m, self.n);
            let inter = a.rowspace_intersection(&b);
            if inter.n_rows() == 0 {
                break;
            }
            let coeffs = a.express_in_rows(inter.row(0)).expect("intersection lift");
            let mut g = PauliOp::identity(self.n);
            for i in coeffs.support() {
                g.mul_assign(&self.pending_sin[i]);
            }
            let partner = self
                .partner_from_pool(&g, false)
                .expect("anticommuting partner exists");
            self.place(partner, g, PairClass::Intersection);
        }
        // 2. S_in-only: elements of span(pending_sin) commuting with all of M.
        loop {
            let sin = &self.pending_sin;
            if sin.is_empty() {
                break;
            }
            let pairing = F2Matrix::from_rows(
                sin.iter()
                    .map(|s| BitVec::from_bits(self.pending_m.iter().map(|m| s.commutator(m))))
                    .collect(),
                self.pending_m.len(),
            );
            let kernel = pairing.transpose().kernel_basis();
            if kernel.n_rows() == 0 {
                break;
            }
            let mut g = PauliOp::identity(self.n);
            for i in kernel.row(0).support() {
                g.mul_assign(&sin[i]);
            }
            let partner = self
                .partner_from_pool(&g, true)
                .expect("pool partner for S_in-only element");
            self.place(partner, g, PairClass::SInOnly);
        }
        // 3. Delta pairs: each remaining S_in element anticommutes with some M element.
        while let Some(g) = self.pending_sin.first().cloned() {
            let h = Self::solve_partner(&self.pending_m, &[(&g, true)])
                .expect("delta partner in M");
            self.place(h, g, PairClass::Delta);
        }
        // 4. M-only pairs.
        while let Some(g) = self.pending_m.first().cloned() {
            let partner = self
                .partner_from_pool(&g, false)
                .expect("pool partner for M-only element");
            self.place(partner, g, PairClass::MOnly);
        }
        // 5. Complete with unconstrained pairs from the pool.
        while let Some(a) = self.pool.first().cloned() {
            let b = Self::solve_partner(&self.pool[1..], &[(&a, true)])
                .expect("symplectic completion partner");
            self.place(b, a, PairClass::Outside);
        }
        debug_assert_eq!(self.placed.len(), self.n);
        SymplecticBasis {
            pairs: self.placed,
            labels: self.labels,
        }
    }
}

/// Common symplectic basis B(S_in, M) respecting both groups.
///
/// M is generated by the {Δ-X, ∩-Z, ⊂-Z} elements and S_in by the
/// {Δ-Z, ∩-Z, S-only-Z} elements of the result.
pub fn common_symplectic_basis(
    s_in: &StabilizerGroup,
    m: &StabilizerGroup,
) -> Result<SymplecticBasis, PauliError> {
    if s_in.n_qubits() != m.n_qubits() {
        return Err(PauliError::LengthMismatch(s_in.n_qubits(), m.n_qubits()));
    }
    Ok(BasisBuilder::new(s_in, m).run())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn p(text: &str, n: usize) -> PauliOp {
        PauliOp::parse(text, n).unwrap()
    }

    #[test]
    fn commutation_basics() {
        assert!(!p("X0", 2).commutes(&p("Z0", 2)));
        assert!(p("X0*X1", 2).commutes(&p("Z0*Z1", 2)));
        assert!(!p("X0*X1", 2).commutes(&p("Z0", 2)));
    }

    #[test]
    fn product_signs() {
        let x = p("X0", 1);
        let z = p("Z0", 1);
        let y = p("Y0", 1);
        // X·Z = -iY: phase odd
        let xz = x.mul(&z);
        assert!(!xz.is_hermitian());
        // XYXY = -XXYY = -I
        assert_eq!(x.mul(&y).mul(&x).mul(&y), PauliOp::identity(1).negated());
        // (XY)(YX) = X Y Y X = I
        let xy = x.mul(&y);
        let yx = y.mul(&x);
        let prod = xy.mul(&yx);
        assert!(prod.is_identity() && prod.is_hermitian() && !prod.sign());
        // Y·Y = I
        let yy = y.mul(&y);
        assert!(yy.is_identity() && !yy.sign());
        // X·Z·X = -Z? X Z X: (XZ)(X) = -iY·X = -i(iZ) = Z... conjugation is different
        // from product: here (X·Z)·X = -i Y X = -i (-iZ) = -Z.
        let xzx = x.mul(&z).mul(&x);
        assert!(xzx.is_hermitian());
        assert!(xzx.sign());
        assert_eq!(xzx.negated(), z);
    }

    #[test]
    fn conjugation_rules() {
        let mut op = p("X0", 1);
        op.apply_h(0);
        assert_eq!(op, p("Z0", 1));
        let mut op = p("Y0", 1);
        op.apply_h(0);
        assert_eq!(op, p("-Y0", 1));
        let mut op = p("X0", 1);
        op.apply_s(0);
        assert_eq!(op, p("Y0", 1));
        let mut op = p("Y0", 1);
        op.apply_s(0);
        assert_eq!(op, p("-X0", 1));
        let mut op = p("X0", 2);
        op.apply_cx(0, 1);
        assert_eq!(op, p("X0*X1", 2));
        let mut op = p("Z1", 2);
        op.apply_cx(0, 1);
        assert_eq!(op, p("Z0*Z1", 2));
        let mut op = p("Y0*Y1", 2);
        op.apply_cx(0, 1);
        assert_eq!(op, p("-X0*Z1", 2));
        let mut op = p("X0", 2);
        op.apply_cz(0, 1);
        assert_eq!(op, p("X0*Z1", 2));
    }

    #[test]
    fn parse_print_roundtrip() {
        for text in ["+X0*X1*Z4", "-Y2", "+I", "+Z0"] {
            let op = p(text, 5);
            assert_eq!(op.to_string(), text);
        }
        assert!(PauliOp::parse("Q3", 5).is_err());
        assert!(PauliOp::parse("X9", 5).is_err());
        assert!(PauliOp::parse("X1*Z1", 5).is_err());
    }

    #[test]
    fn group_rejects_minus_identity() {
        // Z0 and -Z0 generate -I
        let gens = vec![p("Z0", 1), p("-Z0", 1)];
        assert_eq!(
            StabilizerGroup::new(1, gens).unwrap_err(),
            PauliError::MinusIdentity
        );
    }

    #[test]
    fn group_rejects_anticommuting() {
        let gens = vec![p("Z0", 1), p("X0", 1)];
        assert!(matches!(
            StabilizerGroup::new(1, gens),
            Err(PauliError::NonCommuting(0, 1))
        ));
    }

    #[test]
    fn syndrome_of_stabilizer_is_zero() {
        let g = StabilizerGroup::new(3, vec![p("Z0*Z1", 3), p("Z1*Z2", 3)]).unwrap();
        assert!(g.syndrome(&p("Z0*Z1", 3)).is_zero());
        assert!(g.syndrome(&PauliOp::identity(3)).is_zero());
        let s = g.syndrome(&p("X1", 3));
        assert_eq!(s.support(), vec![0, 1]);
    }

    #[test]
    fn syndrome_additivity() {
        let g = StabilizerGroup::new(3, vec![p("Z0*Z1", 3), p("Z1*Z2", 3)]).unwrap();
        let a = p("X0*Y1", 3);
        let b = p("Z1*X2", 3);
        assert_eq!(g.syndrome(&a.mul(&b)), g.syndrome(&a).xor(&g.syndrome(&b)));
    }

    fn random_stabilizer_group(rng: &mut StdRng, n: usize, k: usize) -> StabilizerGroup {
        // Random commuting generators built by conjugating Z_0..Z_{k-1} with a
        // random Clifford circuit.
        let mut gens: Vec<PauliOp> = (0..k).map(|i| PauliOp::single(n, i, 'Z')).collect();
        for _ in 0..(6 * n) {
            match rng.gen_range(0..4) {
                0 => {
                    let q = rng.gen_range(0..n);
                    gens.iter_mut().for_each(|g| g.apply_h(q));
                }
                1 => {
                    let q = rng.gen_range(0..n);
                    gens.iter_mut().for_each(|g| g.apply_s(q));
                }
                2 => {
                    let a = rng.gen_range(0..n);
                    let mut b = rng.gen_range(0..n);
                    if a == b {
                        b = (b + 1) % n;
                    }
                    gens.iter_mut().for_each(|g| g.apply_cx(a, b));
                }
                _ => {
                    let a = rng.gen_range(0..n);
                    let mut b = rng.gen_range(0..n);
                    if a == b {
                        b = (b + 1) % n;
                    }
                    gens.iter_mut().for_each(|g| g.apply_cz(a, b));
                }
            }
        }
        StabilizerGroup::new(n, gens).unwrap()
    }

    #[test]
    fn common_basis_identical_groups() {
        let g = StabilizerGroup::new(2, vec![p("Z0*Z1", 2)]).unwrap();
        let basis = common_symplectic_basis(&g, &g).unwrap();
        assert!(basis.check_form());
        let inter: Vec<_> = basis
            .labels
            .iter()
            .filter(|l| **l == PairClass::Intersection)
            .collect();
        assert_eq!(inter.len(), 1);
    }

    #[test]
    fn common_basis_delta() {
        // s_in = <Z0 Z1>, m = <X0>: X0 anticommutes with Z0Z1
        let s_in = StabilizerGroup::new(2, vec![p("Z0*Z1", 2)]).unwrap();
        let m = StabilizerGroup::new(2, vec![p("X0", 2)]).unwrap();
        let basis = common_symplectic_basis(&s_in, &m).unwrap();
        assert!(basis.check_form());
        let delta_idx = basis
            .labels
            .iter()
            .position(|l| *l == PairClass::Delta)
            .expect("delta pair");
        let (x_like, z_like) = &basis.pairs[delta_idx];
        assert!(m.contains_mod_phase(x_like));
        assert!(s_in.contains_mod_phase(z_like));
    }

    #[test]
    fn common_basis_m_only() {
        // s_in = <Z0> on 2 qubits, m = <X1>: X1 commutes with s_in, not in it
        let s_in = StabilizerGroup::new(2, vec![p("Z0", 2)]).unwrap();
        let m = StabilizerGroup::new(2, vec![p("X1", 2)]).unwrap();
        let basis = common_symplectic_basis(&s_in, &m).unwrap();
        assert!(basis.check_form());
        let monly = basis
            .labels
            .iter()
            .position(|l| *l == PairClass::MOnly)
            .expect("m-only pair");
        assert!(m.contains_mod_phase(&basis.pairs[monly].1));
        let sonly = basis
            .labels
            .iter()
            .position(|l| *l == PairClass::SInOnly)
            .expect("s-only pair");
        assert!(s_in.contains_mod_phase(&basis.pairs[sonly].1));
    }

    #[test]
    fn common_basis_randomized_contract() {
        let mut rng = StdRng::seed_from_u64(23);
        for trial in 0..40 {
            let n = 2 + (trial % 7);
            let k1 = rng.gen_range(0..=n);
            let k2 = rng.gen_range(0..=n);
            let s_in = random_stabilizer_group(&mut rng, n, k1);
            let m = random_stabilizer_group(&mut rng, n, k2);
            let basis = common_symplectic_basis(&s_in, &m).unwrap();
            assert_eq!(basis.n_pairs(), n);
            assert!(basis.check_form(), "gram matrix violated (trial {trial})");
            // The labeled elements generate exactly the two groups.
            let m_gens = basis.m_generators();
            let m_span = F2Matrix::from_rows(m_gens.iter().map(|g| g.sym_vec()).collect(), 2 * n);
            assert_eq!(m_span.rank(), m.rank(), "m rank (trial {trial})");
            for g in &m_gens {
                assert!(m.contains_mod_phase(g), "m membership (trial {trial})");
            }
            let s_gens = basis.s_in_generators();
            let s_span = F2Matrix::from_rows(s_gens.iter().map(|g| g.sym_vec()).collect(), 2 * n);
            assert_eq!(s_span.rank(), s_in.rank(), "s rank (trial {trial})");
            for g in &s_gens {
                assert!(s_in.contains_mod_phase(g), "s membership (trial {trial})");
            }
        }
    }

    #[test]
    fn quotient_basis_trivial_group() {
        let g = StabilizerGroup::new(1, vec![p("Z0", 1)]).unwrap();
        let basis = common_symplectic_basis(&g, &g).unwrap();
        let trivial = StabilizerGroup::trivial(1);
        let q = logical_quotient_basis(&basis, &trivial).unwrap();
        assert_eq!(q.n_pairs(), 1);
        let q2 = logical_quotient_basis(&basis, &g).unwrap();
        assert_eq!(q2.n_pairs(), 0);
    }
}
