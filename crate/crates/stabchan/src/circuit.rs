//! Stabilizer-circuit IR and the line-oriented `.schan` text format.
//!
//! One instruction per line, `#` comments, upper-case keywords, `TICK`
//! separates timesteps. Multi-target gate lines are normalized to one
//! instruction per target (or target pair), so printing is a canonical form:
//! `print ∘ parse ∘ print = print`.

use crate::f2::BitVec;
use crate::pauli::{PauliError, PauliOp, StabilizerGroup};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CircuitError {
    #[error("line {line}, col {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("line {line}: {msg}")]
    Semantic { line: usize, msg: String },
    #[error(transparent)]
    Pauli(#[from] PauliError),
}

/// Parity of earlier outcome slots, plus an optional constant 1.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ParityExpr {
    pub slots: Vec<usize>,
    pub constant: bool,
}

impl ParityExpr {
    pub fn constant(value: bool) -> Self {
        ParityExpr { slots: Vec::new(), constant: value }
    }

    pub fn of_slots(mut slots: Vec<usize>, constant: bool) -> Self {
        slots.sort_unstable();
        slots.dedup();
        ParityExpr { slots, constant }
    }

    /// Evaluate against a flip vector delta: which way does this parity move?
    pub fn flipped_by(&self, delta: &BitVec) -> bool {
        self.slots.iter().fold(false, |acc, &s| acc ^ delta.get(s))
    }

    pub fn selector(&self, n_slots: usize) -> BitVec {
        let mut v = BitVec::zeros(n_slots);
        for &s in &self.slots {
            v.set(s, true);
        }
        v
    }
}

impl fmt::Display for ParityExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.slots.is_empty() {
            return write!(f, "{}", if self.constant { "1" } else { "0" });
        }
        let mut first = true;
        for s in &self.slots {
            if !first {
                write!(f, "+")?;
            }
            first = false;
            write!(f, "m{s}")?;
        }
        if self.constant {
            write!(f, "+1")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gate1 {
    H,
    S,
    Idle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gate2 {
    Cx,
    Cz,
    Swap,
}

/// One normalized circuit instruction.
#[derive(Clone, Debug, PartialEq)]
pub enum InstrKind {
    PrepZ(usize),
    PrepX(usize),
    /// Destructive single-qubit Z measurement; produces one outcome slot.
    MeasureZ(usize),
    /// Destructive single-qubit X measurement; produces one outcome slot.
    MeasureX(usize),
    /// Non-destructive Pauli-product measurement; produces one outcome slot.
    MeasurePauli(PauliOp),
    Gate1(Gate1, usize),
    Gate2(Gate2, usize, usize),
    /// Fresh classical random bit; produces one outcome slot.
    RandomBit,
    /// Pauli applied when the parity of earlier outcomes (plus constant) is 1.
    ConditionalPauli(PauliOp, ParityExpr),
    Tick,
}

impl InstrKind {
    pub fn targets(&self) -> Vec<usize> {
        match self {
            InstrKind::PrepZ(q)
            | InstrKind::PrepX(q)
            | InstrKind::MeasureZ(q)
            | InstrKind::MeasureX(q)
            | InstrKind::Gate1(_, q) => vec![*q],
            InstrKind::MeasurePauli(p) | InstrKind::ConditionalPauli(p, _) => p.support(),
            InstrKind::Gate2(_, a, b) => vec![*a, *b],
            InstrKind::RandomBit | InstrKind::Tick => vec![],
        }
    }

    pub fn n_outcomes(&self) -> usize {
        match self {
            InstrKind::MeasureZ(_)
            | InstrKind::MeasureX(_)
            | InstrKind::MeasurePauli(_)
            | InstrKind::RandomBit => 1,
            _ => 0,
        }
    }

    pub fn is_measurement(&self) -> bool {
        matches!(
            self,
            InstrKind::MeasureZ(_) | InstrKind::MeasureX(_) | InstrKind::MeasurePauli(_)
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Instruction {
    pub kind: InstrKind,
    /// Free-form site tag used by noise restriction predicates.
    pub tag: Option<String>,
}

impl Instruction {
    pub fn new(kind: InstrKind) -> Self {
        Instruction { kind, tag: None }
    }

    pub fn tagged(kind: InstrKind, tag: &str) -> Self {
        Instruction { kind, tag: Some(tag.to_string()) }
    }
}

/// Ordered instruction sequence; `Tick` marks timestep boundaries.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Circuit {
    pub n_qubits: usize,
    pub instructions: Vec<Instruction>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Circuit { n_qubits, instructions: Vec::new() }
    }

    pub fn push(&mut self, kind: InstrKind) {
        self.instructions.push(Instruction::new(kind));
    }

    pub fn push_tagged(&mut self, kind: InstrKind, tag: &str) {
        self.instructions.push(Instruction::tagged(kind, tag));
    }

    pub fn n_outcomes(&self) -> usize {
        self.instructions.iter().map(|i| i.kind.n_outcomes()).sum()
    }

    /// Outcome slot index of each outcome-producing instruction, in order.
    pub fn slot_of_instr(&self) -> Vec<Option<usize>> {
        let mut next = 0;
        self.instructions
            .iter()
            .map(|i| {
                if i.kind.n_outcomes() > 0 {
                    let s = next;
                    next += 1;
                    Some(s)
                } else {
                    None
                }
            })
            .collect()
    }

    /// Instruction index that produces each outcome slot.
    pub fn instr_of_slot(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (idx, i) in self.instructions.iter().enumerate() {
            for _ in 0..i.kind.n_outcomes() {
                out.push(idx);
            }
        }
        out
    }

    /// Timestep index of each instruction (ticks advance the counter).
    pub fn timestep_of_instr(&self) -> Vec<usize> {
        let mut t = 0;
        self.instructions
            .iter()
            .map(|i| {
                if matches!(i.kind, InstrKind::Tick) {
                    t += 1;
                }
                t
            })
            .collect()
    }

    pub fn n_timesteps(&self) -> usize {
        1 + self
            .instructions
            .iter()
            .filter(|i| matches!(i.kind, InstrKind::Tick))
            .count()
    }
}

/// Declared noise model from a `NOISE` line.
#[derive(Clone, Debug, PartialEq)]
pub enum NoiseDecl {
    Circuit { p: f64 },
    Phenom { p: f64 },
}

/// One `RESTRICT` line: conjunction of clauses; several lines apply in sequence.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct RestrictDecl {
    /// keep only Pauli faults ("pauli") or only flips ("flip")
    pub effect: Option<String>,
    /// keep only Pauli faults of this type, e.g. 'Z'
    pub pauli_type: Option<char>,
    /// keep only faults on these qubits
    pub qubits: Option<Vec<usize>>,
    /// keep only faults on instructions with this tag
    pub tag: Option<String>,
}

/// Deformation step description from a `DEFORM` block.
#[derive(Clone, Debug, PartialEq)]
pub struct DeformStepDecl {
    pub layer: LayerDecl,
    pub measure: Vec<PauliOp>,
    pub rounds: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LayerDecl {
    Identity,
    TransverseH(Vec<usize>),
    SwapPairs(Vec<(usize, usize)>),
}

/// A stabilizer channel: circuit plus input/output codes, logical bases and
/// declared logical observables.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelSpec {
    pub name: Option<String>,
    pub circuit: Circuit,
    pub s_in: StabilizerGroup,
    pub s_out: StabilizerGroup,
    /// Input logical representative pairs (X-like, Z-like).
    pub basis_in: Vec<(PauliOp, PauliOp)>,
    pub basis_out: Vec<(PauliOp, PauliOp)>,
    /// (outcome parity, output constraint Pauli) for each measured logical.
    pub declared_observables: Vec<(ParityExpr, PauliOp)>,
    pub noise: Option<NoiseDecl>,
    pub restricts: Vec<RestrictDecl>,
    /// Unlowered DEFORM block, if the file used one.
    pub deform: Option<Vec<DeformStepDecl>>,
}

impl PartialEq for StabilizerGroup {
    fn eq(&self, other: &Self) -> bool {
        self.n_qubits() == other.n_qubits() && self.generators() == other.generators()
    }
}

impl ChannelSpec {
    pub fn new(n_qubits: usize) -> Self {
        ChannelSpec {
            name: None,
            circuit: Circuit::new(n_qubits),
            s_in: StabilizerGroup::trivial(n_qubits),
            s_out: StabilizerGroup::trivial(n_qubits),
            basis_in: Vec::new(),
            basis_out: Vec::new(),
            declared_observables: Vec::new(),
            noise: None,
            restricts: Vec::new(),
            deform: None,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.circuit.n_qubits
    }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

struct LineCtx<'a> {
    line_no: usize,
    text: &'a str,
}

impl LineCtx<'_> {
    fn syntax(&self, col: usize, msg: impl Into<String>) -> CircuitError {
        CircuitError::Syntax { line: self.line_no, col, msg: msg.into() }
    }
    fn semantic(&self, msg: impl Into<String>) -> CircuitError {
        CircuitError::Semantic { line: self.line_no, msg: msg.into() }
    }
}

fn parse_usize(ctx: &LineCtx, tok: &str) -> Result<usize, CircuitError> {
    tok.parse()
        .map_err(|_| ctx.syntax(offset_of(ctx.text, tok), format!("expected integer, got '{tok}'")))
}

fn offset_of(line: &str, tok: &str) -> usize {
    // Column of a token within its line (best effort for error reporting).
    match line.find(tok) {
        Some(i) => i + 1,
        None => 1,
    }
}

fn parse_parity(
    ctx: &LineCtx,
    tok: &str,
    slots_so_far: usize,
    allow_future: bool,
) -> Result<ParityExpr, CircuitError> {
    let mut expr = ParityExpr::default();
    for part in tok.split('+') {
        let part = part.trim();
        if part == "1" {
            expr.constant ^= true;
        } else if part == "0" {
            // no-op
        } else if let Some(rest) = part.strip_prefix('m') {
            let idx: usize = rest
                .parse()
                .map_err(|_| ctx.syntax(offset_of(ctx.text, part), format!("bad outcome ref '{part}'")))?;
            if !allow_future && idx >= slots_so_far {
                return Err(ctx.semantic(format!(
                    "outcome m{idx} referenced before it is produced (only {slots_so_far} slots so far)"
                )));
            }
            expr.slots.push(idx);
        } else {
            return Err(ctx.syntax(offset_of(ctx.text, part), format!("bad parity term '{part}'")));
        }
    }
    expr.slots.sort_unstable();
    expr.slots.dedup();
    Ok(expr)
}

fn parse_pauli_tok(ctx: &LineCtx, tok: &str, n: usize) -> Result<PauliOp, CircuitError> {
    PauliOp::parse(tok, n).map_err(|e| ctx.syntax(offset_of(ctx.text, tok), e.to_string()))
}

/// Parse `.schan` text into a ChannelSpec. DEFORM blocks are stored unlowered;
/// use the deform module to turn them into instructions.
pub fn parse(text: &str) -> Result<ChannelSpec, CircuitError> {
    let mut name = None;
    let mut n_qubits: Option<usize> = None;
    let mut input_gens: Vec<PauliOp> = Vec::new();
    let mut output_gens: Vec<PauliOp> = Vec::new();
    let mut login: Vec<(usize, char, PauliOp, usize)> = Vec::new();
    let mut logout: Vec<(usize, char, PauliOp, usize)> = Vec::new();
    let mut observes: Vec<(ParityExpr, PauliOp)> = Vec::new();
    let mut noise = None;
    let mut restricts = Vec::new();
    let mut instructions: Vec<Instruction> = Vec::new();
    let mut deform_steps: Vec<DeformStepDecl> = Vec::new();
    let mut in_deform = false;
    let mut slots = 0usize;

    for (line_idx, raw_line) in text.lines().enumerate() {
        let ctx = LineCtx { line_no: line_idx + 1, text: raw_line };
        let line = match raw_line.find('#') {
            Some(i) => &raw_line[..i],
            None => raw_line,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        // Optional trailing tag: "@tag"
        let (line, tag) = match line.rfind(" @") {
            Some(i) => (line[..i].trim_end(), Some(line[i + 2..].trim().to_string())),
            None => (line, None),
        };
        let mut toks = line.split_whitespace();
        let kw = toks.next().unwrap();
        let rest: Vec<&str> = toks.collect();

        let n = || -> Result<usize, CircuitError> {
            n_qubits.ok_or_else(|| ctx.semantic("QUBITS must come before this line"))
        };

        if in_deform {
            match kw {
                "STEP" => {
                    let nq = n()?;
                    let mut layer = LayerDecl::Identity;
                    let mut measure = Vec::new();
                    let mut rounds = 1usize;
                    let mut i = 0;
                    while i < rest.len() {
                        let tok = rest[i];
                        if let Some(val) = tok.strip_prefix("U=") {
                            layer = parse_layer(&ctx, val)?;
                        } else if tok == "MEASURE" {
                            i += 1;
                            if i >= rest.len() {
                                return Err(ctx.syntax(1, "MEASURE needs a pauli list"));
                            }
                            for ptok in rest[i].split(';') {
                                if !ptok.is_empty() {
                                    measure.push(parse_pauli_tok(&ctx, ptok, nq)?);
                                }
                            }
                        } else if tok == "ROUNDS" {
                            i += 1;
                            if i >= rest.len() {
                                return Err(ctx.syntax(1, "ROUNDS needs a count"));
                            }
                            rounds = parse_usize(&ctx, rest[i])?;
                        } else {
                            return Err(ctx.syntax(
                                offset_of(raw_line, tok),
                                format!("unexpected token '{tok}' in STEP"),
                            ));
                        }
                        i += 1;
                    }
                    if rounds == 0 {
                        return Err(ctx.semantic("ROUNDS must be positive"));
                    }
                    deform_steps.push(DeformStepDecl { layer, measure, rounds });
                }
                "ENDDEFORM" => in_deform = false,
                _ => return Err(ctx.syntax(1, format!("unexpected '{kw}' inside DEFORM block"))),
            }
            continue;
        }

        match kw {
            "NAME" => name = Some(rest.join(" ")),
            "QUBITS" => {
                if rest.len() != 1 {
                    return Err(ctx.syntax(1, "QUBITS takes one integer"));
                }
                n_qubits = Some(parse_usize(&ctx, rest[0])?);
            }
            "INPUT" | "OUTPUT" => {
                if rest.len() != 1 {
                    return Err(ctx.syntax(1, format!("{kw} takes one pauli")));
                }
                let p = parse_pauli_tok(&ctx, rest[0], n()?)?;
                if kw == "INPUT" {
                    input_gens.push(p);
                } else {
                    output_gens.push(p);
                }
            }
            "LOGIN" | "LOGOUT" => {
                if rest.len() != 2 {
                    return Err(ctx.syntax(1, format!("{kw} takes 'X<i>|Z<i> <pauli>'")));
                }
                let which = rest[0];
                let kind = which.chars().next().unwrap_or(' ');
                if kind != 'X' && kind != 'Z' {
                    return Err(ctx.syntax(offset_of(raw_line, which), "expected X<i> or Z<i>"));
                }
                let idx: usize = which[1..]
                    .parse()
                    .map_err(|_| ctx.syntax(offset_of(raw_line, which), "bad pair index"))?;
                let p = parse_pauli_tok(&ctx, rest[1], n()?)?;
                if kw == "LOGIN" {
                    login.push((idx, kind, p, ctx.line_no));
                } else {
                    logout.push((idx, kind, p, ctx.line_no));
                }
            }
            "OBSERVE" => {
                let arrow = rest
                    .iter()
                    .position(|t| *t == "->")
                    .ok_or_else(|| ctx.syntax(1, "OBSERVE needs '->'"))?;
                if arrow != 1 || rest.len() != 3 {
                    return Err(ctx.syntax(1, "OBSERVE syntax: OBSERVE <parity> -> <pauli>"));
                }
                let parity = parse_parity(&ctx, rest[0], usize::MAX, true)?;
                let p = parse_pauli_tok(&ctx, rest[2], n()?)?;
                observes.push((parity, p));
            }
            "NOISE" => {
                if rest.len() != 2 || !rest[1].starts_with("p=") {
                    return Err(ctx.syntax(1, "NOISE syntax: NOISE circuit|phenom p=<float>"));
                }
                let p: f64 = rest[1][2..]
                    .parse()
                    .map_err(|_| ctx.syntax(offset_of(raw_line, rest[1]), "bad probability"))?;
                noise = Some(match rest[0] {
                    "circuit" => NoiseDecl::Circuit { p },
                    "phenom" => NoiseDecl::Phenom { p },
                    other => {
                        return Err(ctx.syntax(
                            offset_of(raw_line, other),
                            format!("unknown noise model '{other}'"),
                        ))
                    }
                });
            }
            "RESTRICT" => {
                let mut decl = RestrictDecl::default();
                for tok in &rest {
                    let Some((k, v)) = tok.split_once('=') else {
                        return Err(ctx.syntax(offset_of(raw_line, tok), "RESTRICT clauses are key=value"));
                    };
                    match k {
                        "effect" => decl.effect = Some(v.to_string()),
                        "paulitype" => {
                            let c = v.chars().next().unwrap_or(' ');
                            if !matches!(c, 'X' | 'Y' | 'Z') {
                                return Err(ctx.syntax(offset_of(raw_line, tok), "paulitype must be X, Y or Z"));
                            }
                            decl.pauli_type = Some(c);
                        }
                        "qubits" => {
                            let mut qs = Vec::new();
                            for part in v.split(',') {
                                qs.push(part.parse().map_err(|_| {
                                    ctx.syntax(offset_of(raw_line, tok), "qubits must be a comma list of integers")
                                })?);
                            }
                            decl.qubits = Some(qs);
                        }
                        "tag" => decl.tag = Some(v.to_string()),
                        other => {
                            return Err(ctx.syntax(
                                offset_of(raw_line, tok),
                                format!("unknown RESTRICT key '{other}'"),
                            ))
                        }
                    }
                }
                restricts.push(decl);
            }
            "DEFORM" => in_deform = true,
            "TICK" => instructions.push(Instruction { kind: InstrKind::Tick, tag }),
            "RAND" => {
                slots += 1;
                instructions.push(Instruction { kind: InstrKind::RandomBit, tag });
            }
            "PZ" | "PX" | "MZ" | "MX" | "H" | "S" | "I" => {
                let nq = n()?;
                if rest.is_empty() {
                    return Err(ctx.syntax(1, format!("{kw} needs at least one qubit")));
                }
                for tok in &rest {
                    let q = parse_usize(&ctx, tok)?;
                    if q >= nq {
                        return Err(ctx.semantic(format!("qubit {q} out of range (n={nq})")));
                    }
                    let kind = match kw {
                        "PZ" => InstrKind::PrepZ(q),
                        "PX" => InstrKind::PrepX(q),
                        "MZ" => {
                            slots += 1;
                            InstrKind::MeasureZ(q)
                        }
                        "MX" => {
                            slots += 1;
                            InstrKind::MeasureX(q)
                        }
                        "H" => InstrKind::Gate1(Gate1::H, q),
                        "S" => InstrKind::Gate1(Gate1::S, q),
                        "I" => InstrKind::Gate1(Gate1::Idle, q),
                        _ => unreachable!(),
                    };
                    instructions.push(Instruction { kind, tag: tag.clone() });
                }
            }
            "CX" | "CZ" | "SWAP" => {
                let nq = n()?;
                if rest.is_empty() || rest.len() % 2 != 0 {
                    return Err(ctx.syntax(1, format!("{kw} needs an even number of qubits")));
                }
                for pair in rest.chunks(2) {
                    let a = parse_usize(&ctx, pair[0])?;
                    let b = parse_usize(&ctx, pair[1])?;
                    if a >= nq || b >= nq {
                        return Err(ctx.semantic(format!("qubit out of range (n={nq})")));
                    }
                    if a == b {
                        return Err(ctx.semantic(format!("{kw} targets must differ")));
                    }
                    let g = match kw {
                        "CX" => Gate2::Cx,
                        "CZ" => Gate2::Cz,
                        _ => Gate2::Swap,
                    };
                    instructions.push(Instruction { kind: InstrKind::Gate2(g, a, b), tag: tag.clone() });
                }
            }
            "MPP" => {
                if rest.len() != 1 {
                    return Err(ctx.syntax(1, "MPP takes one pauli"));
                }
                let p = parse_pauli_tok(&ctx, rest[0], n()?)?;
                if p.is_identity() {
                    return Err(ctx.semantic("MPP of identity"));
                }
                slots += 1;
                instructions.push(Instruction { kind: InstrKind::MeasurePauli(p), tag });
            }
            "CPAULI" => {
                let arrow = rest
                    .iter()
                    .position(|t| *t == "<-")
                    .ok_or_else(|| ctx.syntax(1, "CPAULI needs '<-'"))?;
                if arrow != 1 || rest.len() != 3 {
                    return Err(ctx.syntax(1, "CPAULI syntax: CPAULI <pauli> <- <parity>"));
                }
                let p = parse_pauli_tok(&ctx, rest[0], n()?)?;
                let parity = parse_parity(&ctx, rest[2], slots, false)?;
                instructions.push(Instruction { kind: InstrKind::ConditionalPauli(p, parity), tag });
            }
            other => return Err(ctx.syntax(1, format!("unknown keyword '{other}'"))),
        }
    }

    let n = n_qubits.ok_or(CircuitError::Semantic { line: 0, msg: "missing QUBITS line".into() })?;
    let s_in = StabilizerGroup::new(n, input_gens)
        .map_err(|e| CircuitError::Semantic { line: 0, msg: format!("INPUT group: {e}") })?;
    let s_out = StabilizerGroup::new(n, output_gens)
        .map_err(|e| CircuitError::Semantic { line: 0, msg: format!("OUTPUT group: {e}") })?;

    let collect_pairs = |entries: &[(usize, char, PauliOp, usize)],
                         what: &str|
     -> Result<Vec<(PauliOp, PauliOp)>, CircuitError> {
        let max_idx = entries.iter().map(|e| e.0).max();
        let Some(max_idx) = max_idx else { return Ok(Vec::new()) };
        let mut xs: Vec<Option<PauliOp>> = vec![None; max_idx + 1];
        let mut zs: Vec<Option<PauliOp>> = vec![None; max_idx + 1];
        for (idx, kind, p, line) in entries {
            let slot = if *kind == 'X' { &mut xs[*idx] } else { &mut zs[*idx] };
            if slot.is_some() {
                return Err(CircuitError::Semantic {
                    line: *line,
                    msg: format!("{what} {kind}{idx} given twice"),
                });
            }
            *slot = Some(p.clone());
        }
        let mut pairs = Vec::new();
        for i in 0..=max_idx {
            match (xs[i].take(), zs[i].take()) {
                (Some(x), Some(z)) => pairs.push((x, z)),
                _ => {
                    return Err(CircuitError::Semantic {
                        line: 0,
                        msg: format!("{what} pair {i} is incomplete"),
                    })
                }
            }
        }
        Ok(pairs)
    };

    let basis_in = collect_pairs(&login, "LOGIN")?;
    let basis_out = collect_pairs(&logout, "LOGOUT")?;

    Ok(ChannelSpec {
        name,
        circuit: Circuit { n_qubits: n, instructions },
        s_in,
        s_out,
        basis_in,
        basis_out,
        declared_observables: observes,
        noise,
        restricts,
        deform: if deform_steps.is_empty() { None } else { Some(deform_steps) },
    })
}

fn parse_layer(ctx: &LineCtx, val: &str) -> Result<LayerDecl, CircuitError> {
    if val == "id" {
        return Ok(LayerDecl::Identity);
    }
    if let Some(body) = val.strip_prefix("H(").and_then(|v| v.strip_suffix(')')) {
        let mut qs = Vec::new();
        for part in body.split(',') {
            if part.is_empty() {
                continue;
            }
            qs.push(part.parse().map_err(|_| ctx.syntax(1, "bad qubit in H(...)"))?);
        }
        return Ok(LayerDecl::TransverseH(qs));
    }
    if let Some(body) = val.strip_prefix("SWAP(").and_then(|v| v.strip_suffix(')')) {
        let mut pairs = Vec::new();
        for part in body.split(',') {
            if part.is_empty() {
                continue;
            }
            let Some((a, b)) = part.split_once(':') else {
                return Err(ctx.syntax(1, "SWAP pairs are a:b"));
            };
            pairs.push((
                a.parse().map_err(|_| ctx.syntax(1, "bad qubit in SWAP(...)"))?,
                b.parse().map_err(|_| ctx.syntax(1, "bad qubit in SWAP(...)"))?,
            ));
        }
        return Ok(LayerDecl::SwapPairs(pairs));
    }
    Err(ctx.syntax(1, format!("unknown layer '{val}'")))
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

/// Canonical text form. Parsing the output reproduces the spec exactly.
pub fn print(spec: &ChannelSpec) -> String {
    let mut out = String::new();
    use fmt::Write;
    if let Some(name) = &spec.name {
        writeln!(out, "NAME {name}").unwrap();
    }
    writeln!(out, "QUBITS {}", spec.n_qubits()).unwrap();
    for g in spec.s_in.generators() {
        writeln!(out, "INPUT {g}").unwrap();
    }
    for g in spec.s_out.generators() {
        writeln!(out, "OUTPUT {g}").unwrap();
    }
    for (i, (x, z)) in spec.basis_in.iter().enumerate() {
        writeln!(out, "LOGIN X{i} {x}").unwrap();
        writeln!(out, "LOGIN Z{i} {z}").unwrap();
    }
    for (i, (x, z)) in spec.basis_out.iter().enumerate() {
        writeln!(out, "LOGOUT X{i} {x}").unwrap();
        writeln!(out, "LOGOUT Z{i} {z}").unwrap();
    }
    for (parity, p) in &spec.declared_observables {
        writeln!(out, "OBSERVE {parity} -> {p}").unwrap();
    }
    if let Some(noise) = &spec.noise {
        match noise {
            NoiseDecl::Circuit { p } => writeln!(out, "NOISE circuit p={p}").unwrap(),
            NoiseDecl::Phenom { p } => writeln!(out, "NOISE phenom p={p}").unwrap(),
        }
    }
    for r in &spec.restricts {
        let mut parts = vec!["RESTRICT".to_string()];
        if let Some(e) = &r.effect {
            parts.push(format!("effect={e}"));
        }
        if let Some(t) = r.pauli_type {
            parts.push(format!("paulitype={t}"));
        }
        if let Some(qs) = &r.qubits {
            let list: Vec<String> = qs.iter().map(|q| q.to_string()).collect();
            parts.push(format!("qubits={}", list.join(",")));
        }
        if let Some(t) = &r.tag {
            parts.push(format!("tag={t}"));
        }
        writeln!(out, "{}", parts.join(" ")).unwrap();
    }
    if let Some(steps) = &spec.deform {
        writeln!(out, "DEFORM").unwrap();
        for s in steps {
            let layer = match &s.layer {
                LayerDecl::Identity => "id".to_string(),
                LayerDecl::TransverseH(qs) => {
                    let list: Vec<String> = qs.iter().map(|q| q.to_string()).collect();
                    format!("H({})", list.join(","))
                }
                LayerDecl::SwapPairs(ps) => {
                    let list: Vec<String> = ps.iter().map(|(a, b)| format!("{a}:{b}")).collect();
                    format!("SWAP({})", list.join(","))
                }
            };
            let paulis: Vec<String> = s.measure.iter().map(|p| p.to_string()).collect();
            writeln!(out, "STEP U={layer} MEASURE {} ROUNDS {}", paulis.join(";"), s.rounds).unwrap();
        }
        writeln!(out, "ENDDEFORM").unwrap();
    }
    for instr in &spec.circuit.instructions {
        let body = match &instr.kind {
            InstrKind::PrepZ(q) => format!("PZ {q}"),
            InstrKind::PrepX(q) => format!("PX {q}"),
            InstrKind::MeasureZ(q) => format!("MZ {q}"),
            InstrKind::MeasureX(q) => format!("MX {q}"),
            InstrKind::MeasurePauli(p) => format!("MPP {p}"),
            InstrKind::Gate1(Gate1::H, q) => format!("H {q}"),
            InstrKind::Gate1(Gate1::S, q) => format!("S {q}"),
            InstrKind::Gate1(Gate1::Idle, q) => format!("I {q}"),
            InstrKind::Gate2(Gate2::Cx, a, b) => format!("CX {a} {b}"),
            InstrKind::Gate2(Gate2::Cz, a, b) => format!("CZ {a} {b}"),
            InstrKind::Gate2(Gate2::Swap, a, b) => format!("SWAP {a} {b}"),
            InstrKind::RandomBit => "RAND".to_string(),
            InstrKind::ConditionalPauli(p, parity) => format!("CPAULI {p} <- {parity}"),
            InstrKind::Tick => "TICK".to_string(),
        };
        match &instr.tag {
            Some(tag) => writeln!(out, "{body} @{tag}").unwrap(),
            None => writeln!(out, "{body}").unwrap(),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn minimal_channel_parses() {
        let text = "QUBITS 1\nINPUT +Z0\nOUTPUT +Z0\nTICK\nMPP +Z0\n";
        let spec = parse(text).unwrap();
        assert_eq!(spec.n_qubits(), 1);
        assert_eq!(spec.s_in.len(), 1);
        assert_eq!(spec.circuit.n_outcomes(), 1);
        assert_eq!(print(&spec), text);
    }

    #[test]
    fn conditional_pauli_syntax() {
        let text = "QUBITS 1\nMPP +Z0\nMPP +Z0\nMPP +Z0\nMPP +Z0\nMPP +Z0\nMPP +Z0\nCPAULI +X0 <- m3+m5+1\n";
        let spec = parse(text).unwrap();
        let last = spec.circuit.instructions.last().unwrap();
        match &last.kind {
            InstrKind::ConditionalPauli(p, parity) => {
                assert_eq!(p.to_string(), "+X0");
                assert_eq!(parity.slots, vec![3, 5]);
                assert!(parity.constant);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn forward_reference_rejected() {
        let text = "QUBITS 1\nMPP +Z0\nCPAULI +X0 <- m1\n";
        assert!(matches!(parse(text), Err(CircuitError::Semantic { .. })));
    }

    #[test]
    fn qubit_out_of_range_rejected() {
        assert!(parse("QUBITS 2\nH 2\n").is_err());
        assert!(parse("QUBITS 2\nMPP +Z5\n").is_err());
    }

    #[test]
    fn non_commuting_input_rejected() {
        let text = "QUBITS 1\nINPUT +Z0\nINPUT +X0\n";
        assert!(matches!(parse(text), Err(CircuitError::Semantic { .. })));
    }

    #[test]
    fn multi_target_lines_normalize() {
        let spec = parse("QUBITS 4\nH 0 1\nCX 0 1 2 3\n").unwrap();
        assert_eq!(spec.circuit.instructions.len(), 4);
        let printed = print(&spec);
        let spec2 = parse(&printed).unwrap();
        assert_eq!(spec, spec2);
        assert_eq!(print(&spec2), printed);
    }

    #[test]
    fn tags_roundtrip() {
        let text = "QUBITS 2\nI 0 @boundary\nTICK\nMPP +Z0*Z1 @round0\n";
        let spec = parse(text).unwrap();
        assert_eq!(spec.circuit.instructions[0].tag.as_deref(), Some("boundary"));
        assert_eq!(print(&spec), text);
    }

    #[test]
    fn deform_block_roundtrip() {
        let text = "QUBITS 2\nINPUT +Z0*Z1\nDEFORM\nSTEP U=id MEASURE +X0*X1 ROUNDS 2\nENDDEFORM\n";
        let spec = parse(text).unwrap();
        let steps = spec.deform.as_ref().unwrap();
        assert_eq!(steps.len(), 1);
        assert_eq!(steps[0].rounds, 2);
        assert_eq!(print(&spec), text);
    }

    #[test]
    fn outcome_slots_are_sequential() {
        let spec = parse("QUBITS 3\nMPP +Z0\nRAND\nMZ 1 2\n").unwrap();
        assert_eq!(spec.circuit.n_outcomes(), 4);
        assert_eq!(spec.circuit.instr_of_slot(), vec![0, 1, 2, 3]);
    }

    proptest! {
        #[test]
        fn parser_total_on_arbitrary_bytes(data in proptest::collection::vec(any::<u8>(), 0..400)) {
            let text = String::from_utf8_lossy(&data).into_owned();
            let _ = parse(&text); // must not panic
        }

        #[test]
        fn print_parse_print_idempotent(seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
            let n = rng.gen_range(1..5usize);
            let mut spec = ChannelSpec::new(n);
            let mut slots = 0;
            for _ in 0..rng.gen_range(0..20) {
                let kind = match rng.gen_range(0..8) {
                    0 => InstrKind::PrepZ(rng.gen_range(0..n)),
                    1 => InstrKind::Gate1(Gate1::H, rng.gen_range(0..n)),
                    2 => { slots += 1; InstrKind::MeasureZ(rng.gen_range(0..n)) }
                    3 => InstrKind::Tick,
                    4 => { slots += 1; InstrKind::RandomBit }
                    5 if n >= 2 => {
                        let a = rng.gen_range(0..n);
                        let b = (a + 1 + rng.gen_range(0..n - 1)) % n;
                        if a == b { InstrKind::Tick } else { InstrKind::Gate2(Gate2::Cx, a, b) }
                    }
                    6 => { slots += 1; InstrKind::MeasurePauli(PauliOp::single(n, rng.gen_range(0..n), 'Z')) }
                    _ if slots > 0 => InstrKind::ConditionalPauli(
                        PauliOp::single(n, rng.gen_range(0..n), 'X'),
                        ParityExpr::of_slots(vec![rng.gen_range(0..slots)], rng.gen_bool(0.5)),
                    ),
                    _ => InstrKind::Tick,
                };
                spec.circuit.push(kind);
            }
            let once = print(&spec);
            let reparsed = parse(&once).unwrap();
            prop_assert_eq!(&spec, &reparsed);
            prop_assert_eq!(print(&reparsed), once);
        }
    }
}
