//! Domains `dom(a)`, the response `a[z]`, bounded term enumeration,
//! well-behavedness, and the battle loop.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::cmp::{self, cmp_value, compare, hull_member, pair_value, value, Value};
use crate::error::ChopError;
use crate::term::{
    classify, coll, double, exp, exp_or_one, g_set, m_set, mult, one, size, sum, F0Registry,
    HydraTerm, Level, Zero,
};

/// The shape of `dom(a)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum DomainKind {
    Empty,
    One,
    Omega,
    /// All hydras of class `H_i`.
    HClass(Level),
    /// All terms below the head `t`.
    MultiAll(HydraTerm),
    /// Terms below `t` that live in the level-1 hull over `c1`.
    MultiHull(HydraTerm, Vec<HydraTerm>),
}

/// A choice from a domain: a number for `One`/`Omega`, a hydra for
/// `HClass`, a term for the multi kinds.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Choice {
    Nat(u64),
    Hydra(HydraTerm),
    Term(HydraTerm),
}

/// Enumeration regime for the level-0 multi selection.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Mode {
    /// Enumerate up to the exact size bound `2^(2^n)`; errors when that
    /// exceeds the feasibility cap.
    SpecExact,
    /// Cap the candidate size at `min(2^(2^n), k)`.
    Capped(u64),
}

impl Default for Mode {
    fn default() -> Self {
        Mode::Capped(DEFAULT_CAP)
    }
}

pub const DEFAULT_CAP: u64 = 7;

/// Largest size bound the exact mode will enumerate.
pub const SPEC_EXACT_FEASIBLE_MAX: u64 = 8;

/// `2^(2^n)`, saturating.
pub fn double_exp(n: u64) -> u64 {
    if n >= 6 {
        u64::MAX
    } else {
        1u64 << (1u64 << n)
    }
}

/// `dom(a)` per the case table, plus two documented gap-fills: the
/// exponential passes multi domains through, and a collapse over a zero
/// body with a non-empty stack gets the `Omega` domain.
pub fn domain(a: &HydraTerm, reg: &F0Registry) -> Result<DomainKind, ChopError> {
    match a {
        Zero => Ok(DomainKind::Empty),
        HydraTerm::Sum { parts } => domain(parts.last().expect("sums are non-empty"), reg),
        HydraTerm::Mult { head, .. } => Ok(DomainKind::MultiAll((**head).clone())),
        HydraTerm::Coll { level, stack, body } => {
            if stack.is_empty() && body.is_zero() {
                return Ok(match level {
                    0 => DomainKind::One,
                    _ => DomainKind::HClass(0),
                });
            }
            collapse_domain(*level, stack, body, reg)
        }
        HydraTerm::Exp { body } => {
            if body.is_zero() {
                return Ok(DomainKind::HClass(1));
            }
            collapse_domain(2, &[], body, reg)
        }
        HydraTerm::FColl { .. } | HydraTerm::Mu { .. } => Err(ChopError::NotAHydra),
    }
}

fn collapse_domain(
    level: Level,
    _stack: &[HydraTerm],
    body: &HydraTerm,
    reg: &F0Registry,
) -> Result<DomainKind, ChopError> {
    if body.is_zero() {
        // D_i(c ⊕ 0) with a non-empty stack: successor-argument collapse
        return Ok(DomainKind::Omega);
    }
    if body.strip_one().is_some() {
        return Ok(DomainKind::Omega);
    }
    match domain(body, reg)? {
        DomainKind::Empty | DomainKind::One => Err(ChopError::NoCase(format!(
            "collapse body {body:?} has an unexpected domain"
        ))),
        DomainKind::Omega => Ok(DomainKind::Omega),
        DomainKind::HClass(j) => {
            if j < level {
                Ok(DomainKind::HClass(j))
            } else {
                Ok(DomainKind::Omega)
            }
        }
        DomainKind::MultiAll(t) => match level {
            1 => Ok(DomainKind::MultiHull(t, _stack.to_vec())),
            0 => Ok(DomainKind::Omega),
            _ => Ok(DomainKind::MultiAll(t)),
        },
        DomainKind::MultiHull(t, c1) => match level {
            0 => Ok(DomainKind::Omega),
            _ => Ok(DomainKind::MultiHull(t, c1)),
        },
    }
}

/// Result of a chop with the term selected at a multi site, when any.
#[derive(Clone, Debug)]
pub struct ChopOutcome {
    pub result: HydraTerm,
    pub multi_choice: Option<HydraTerm>,
}

/// Validates `z` against `dom(a)` and computes `a[z]`.
pub fn chop(
    a: &HydraTerm,
    z: &Choice,
    mode: Mode,
    reg: &F0Registry,
) -> Result<HydraTerm, ChopError> {
    Ok(chop_full(a, z, mode, reg)?.result)
}

pub fn chop_full(
    a: &HydraTerm,
    z: &Choice,
    mode: Mode,
    reg: &F0Registry,
) -> Result<ChopOutcome, ChopError> {
    let dom = domain(a, reg)?;
    validate_choice(&dom, z, reg)?;
    let mut picked = None;
    let result = chop_rec(a, z, mode, reg, &mut picked)?;
    Ok(ChopOutcome { result, multi_choice: picked })
}

fn validate_choice(dom: &DomainKind, z: &Choice, reg: &F0Registry) -> Result<(), ChopError> {
    match (dom, z) {
        (DomainKind::Empty, _) => Err(ChopError::EmptyDomain),
        (DomainKind::One, Choice::Nat(_)) | (DomainKind::Omega, Choice::Nat(_)) => Ok(()),
        (DomainKind::HClass(i), Choice::Hydra(h)) => {
            let c = classify(h);
            let in_class = match i {
                0 => c.h0,
                _ => c.h1,
            };
            if !in_class {
                return Err(ChopError::BadChoice(format!(
                    "{h:?} is not an H{i} hydra"
                )));
            }
            let wb = is_well_behaved(h, reg)?;
            if !wb.is_empty() {
                return Err(ChopError::BadChoice(format!(
                    "{h:?} is not well-behaved: {}",
                    wb[0]
                )));
            }
            Ok(())
        }
        (DomainKind::MultiAll(t), Choice::Term(s)) => {
            if !classify(s).tm {
                return Err(ChopError::BadChoice(format!("{s:?} is not term-class")));
            }
            if compare(s, t, reg)? != Ordering::Less {
                return Err(ChopError::BadChoice(format!(
                    "{s:?} does not lie below the head {t:?}"
                )));
            }
            Ok(())
        }
        (DomainKind::MultiHull(t, c1), Choice::Term(s)) => {
            if !classify(s).tm {
                return Err(ChopError::BadChoice(format!("{s:?} is not term-class")));
            }
            if compare(s, t, reg)? != Ordering::Less {
                return Err(ChopError::BadChoice(format!(
                    "{s:?} does not lie below the head {t:?}"
                )));
            }
            if !hull_member(s, c1, 1, reg)? {
                return Err(ChopError::BadChoice(format!(
                    "{s:?} is outside the level-1 hull over the local stack"
                )));
            }
            Ok(())
        }
        (_, _) => Err(ChopError::BadChoice(
            "choice kind does not match the domain kind".into(),
        )),
    }
}

fn nat_of(z: &Choice) -> u64 {
    match z {
        Choice::Nat(n) => *n,
        _ => 0,
    }
}

fn chop_rec(
    a: &HydraTerm,
    z: &Choice,
    mode: Mode,
    reg: &F0Registry,
    picked: &mut Option<HydraTerm>,
) -> Result<HydraTerm, ChopError> {
    match a {
        Zero => Err(ChopError::EmptyDomain),
        HydraTerm::Sum { parts } => {
            // rewrite the last summand
            let (last, init) = parts.split_last().expect("sums are non-empty");
            let mut out = init.to_vec();
            out.push(chop_rec(last, z, mode, reg, picked)?);
            Ok(sum(out))
        }
        HydraTerm::Mult { count, head: _ } => {
            let s = match z {
                Choice::Term(s) => s.clone(),
                _ => return Err(ChopError::BadChoice("multi domain expects a term".into())),
            };
            Ok(mult_response(*count, &s))
        }
        HydraTerm::Coll { level, stack, body } => {
            if stack.is_empty() && body.is_zero() {
                return Ok(match level {
                    // 1[n] = 0
                    0 => Zero,
                    // w1[z] = z
                    _ => match z {
                        Choice::Hydra(h) => h.clone(),
                        _ => return Err(ChopError::BadChoice("expected a hydra".into())),
                    },
                });
            }
            chop_collapse(*level, stack, body, z, mode, reg, picked)
        }
        HydraTerm::Exp { body } => {
            if body.is_zero() {
                // rho0[z] = z
                return match z {
                    Choice::Hydra(h) => Ok(h.clone()),
                    _ => Err(ChopError::BadChoice("expected a hydra".into())),
                };
            }
            chop_collapse(2, &[], body, z, mode, reg, picked)
        }
        HydraTerm::FColl { .. } | HydraTerm::Mu { .. } => Err(ChopError::NotAHydra),
    }
}

fn rebuild(level: Level, stack: &[HydraTerm], body: HydraTerm) -> HydraTerm {
    if level == 2 {
        exp_or_one(body)
    } else {
        coll(level, stack.to_vec(), body)
    }
}

fn chop_collapse(
    level: Level,
    stack: &[HydraTerm],
    body: &HydraTerm,
    z: &Choice,
    mode: Mode,
    reg: &F0Registry,
    picked: &mut Option<HydraTerm>,
) -> Result<HydraTerm, ChopError> {
    if body.is_zero() {
        // gap-fill for D_i(c ⊕ 0): respond with (n+2) copies of the level
        // constant, which sits strictly below any proper collapse
        let n = nat_of(z);
        let unit = match level {
            0 => one(),
            1 => crate::term::omega1(),
            _ => unreachable!("the exponential constant is handled earlier"),
        };
        let copies = usize::try_from(n.saturating_add(2).min(1 << 16)).unwrap();
        return Ok(sum(vec![unit; copies]));
    }
    if let Some(pred) = body.strip_one() {
        // successor body: drop the final one and double
        return Ok(double(rebuild(level, stack, pred)));
    }
    match domain(body, reg)? {
        DomainKind::Omega => Ok(rebuild(
            level,
            stack,
            chop_rec(body, z, mode, reg, picked)?,
        )),
        DomainKind::HClass(j) if j < level => Ok(rebuild(
            level,
            stack,
            chop_rec(body, z, mode, reg, picked)?,
        )),
        DomainKind::HClass(_) => {
            // body collapses at this level or above: split into the kept
            // head and the stack-extended right piece
            debug_assert!(level < 2);
            let b1 = chop_rec(body, &Choice::Hydra(one()), mode, reg, &mut None)?;
            let left = coll(level, stack.to_vec(), b1.clone());
            let mut ext = stack.to_vec();
            ext.push(exp_or_one(b1.clone()));
            ext.push(one());
            let right = coll(level, ext, b1);
            Ok(if level == 1 {
                sum(vec![left, right])
            } else {
                right
            })
        }
        DomainKind::MultiAll(t) => match level {
            1 => Ok(rebuild(level, stack, chop_rec(body, z, mode, reg, picked)?)),
            0 => {
                let n = nat_of(z);
                let cands = multi_enum(&t, stack, None, n, mode, reg)?;
                let s_n = select_max(&cands, reg)?;
                *picked = Some(s_n.clone());
                Ok(rebuild(
                    level,
                    stack,
                    chop_rec(body, &Choice::Term(s_n), mode, reg, &mut None)?,
                ))
            }
            _ => Ok(rebuild(level, stack, chop_rec(body, z, mode, reg, picked)?)),
        },
        DomainKind::MultiHull(t, c1) => match level {
            0 => {
                let n = nat_of(z);
                let cands = multi_enum(&t, stack, Some(&c1), n, mode, reg)?;
                let s_n = select_max(&cands, reg)?;
                *picked = Some(s_n.clone());
                Ok(rebuild(
                    level,
                    stack,
                    chop_rec(body, &Choice::Term(s_n), mode, reg, &mut None)?,
                ))
            }
            _ => Ok(rebuild(level, stack, chop_rec(body, z, mode, reg, picked)?)),
        },
        DomainKind::Empty | DomainKind::One => Err(ChopError::NoCase(format!(
            "collapse body {body:?} has an unexpected domain"
        ))),
    }
}

/// `(m·t)[s] = (m·s) + (m-1)`, with `(m·0) + b := b`.
fn mult_response(m: u32, s: &HydraTerm) -> HydraTerm {
    let mut parts = Vec::new();
    if !s.is_zero() {
        parts.push(mult(m, s.clone()));
    }
    for _ in 1..m {
        parts.push(one());
    }
    sum(parts)
}

/// A term of maximal value among the candidates; `0` when there are none.
pub fn select_max(
    candidates: &[HydraTerm],
    reg: &F0Registry,
) -> Result<HydraTerm, ChopError> {
    let mut best: Option<(HydraTerm, Value)> = None;
    for c in candidates {
        let v = value(c, reg)?;
        match &best {
            None => best = Some((c.clone(), v)),
            Some((_, bv)) => {
                if cmp_value(&v, bv) == Ordering::Greater {
                    best = Some((c.clone(), v));
                }
            }
        }
    }
    Ok(best.map(|(t, _)| t).unwrap_or(Zero))
}

// Cache of enumerated term pools keyed by (max size, registry symbols).
type PoolKey = (u64, Vec<String>);
static POOL: OnceLock<Mutex<HashMap<PoolKey, Arc<Vec<HydraTerm>>>>> = OnceLock::new();

/// All term-class trees over the constants `0`, `1`, `w1` and the symbols
/// `+`, `w^`, `D0`, `D1`, `D2`, `F` and the registered mu-symbols, of size
/// at most `max_size`, ordered by size.
pub fn enumerate_terms(max_size: u64, reg: &F0Registry) -> Arc<Vec<HydraTerm>> {
    let key: PoolKey = (max_size, reg.names().map(|s| s.to_string()).collect());
    let pool = POOL.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = pool.lock().unwrap().get(&key) {
        return hit.clone();
    }
    let computed = Arc::new(build_pool(max_size, reg));
    pool.lock().unwrap().insert(key, computed.clone());
    computed
}

fn build_pool(max_size: u64, reg: &F0Registry) -> Vec<HydraTerm> {
    let n = max_size as usize;
    // by_size[k] holds the trees of size exactly k (index 0 unused)
    let mut by_size: Vec<Vec<HydraTerm>> = vec![vec![]; n + 1];
    if n >= 1 {
        by_size[1] = vec![Zero, one(), crate::term::omega1()];
    }
    let arities: Vec<(String, usize)> = reg
        .names()
        .map(|s| {
            let a = reg.lookup(s).map(|sig| sig.arity).unwrap_or(1);
            (s.to_string(), a)
        })
        .collect();
    for k in 2..=n {
        let mut layer = Vec::new();
        // w^t over a smaller term (w^0 collapses to 1, already present)
        for t in &by_size[k - 1] {
            if !t.is_zero() {
                layer.push(exp(t.clone()));
            }
        }
        // D0/D1/F with a stack of D-class entries and an H-class body
        let mut stackings: Vec<(Vec<HydraTerm>, usize)> = vec![(vec![], 0)];
        // build stacks of total size <= k-2 from D-class pool entries
        let d_pool: Vec<&HydraTerm> = by_size[1..k]
            .iter()
            .flatten()
            .filter(|t| t.is_d_class())
            .collect();
        let mut frontier = vec![(Vec::<HydraTerm>::new(), 0usize)];
        while let Some((stack, used)) = frontier.pop() {
            for e in &d_pool {
                let sz = size(e) as usize;
                if used + sz <= k - 2 {
                    let mut s2 = stack.clone();
                    s2.push((*e).clone());
                    frontier.push((s2.clone(), used + sz));
                    stackings.push((s2, used + sz));
                }
            }
        }
        for (stack, used) in &stackings {
            let body_size = k - 1 - used;
            if body_size == 0 {
                continue;
            }
            for b in &by_size[body_size] {
                let bc = classify(b);
                if !bc.h {
                    continue;
                }
                if stack.is_empty() && b.is_zero() {
                    continue; // the constants are size-1 atoms
                }
                layer.push(coll(0, stack.clone(), b.clone()));
                layer.push(coll(1, stack.clone(), b.clone()));
                layer.push(crate::term::fcoll(stack.clone(), b.clone()));
            }
        }
        // sums: ordered sequences of >= 2 non-zero parts
        fn extend_sums(
            by_size: &[Vec<HydraTerm>],
            remaining: usize,
            acc: &mut Vec<HydraTerm>,
            out: &mut Vec<HydraTerm>,
        ) {
            if remaining == 0 {
                if acc.len() >= 2 {
                    out.push(HydraTerm::Sum { parts: acc.clone() });
                }
                return;
            }
            if acc.len() >= 1 && acc.len() + 1 <= remaining + acc.len() {
                // allow closing only via remaining == 0
            }
            for sz in 1..=remaining {
                for p in &by_size[sz] {
                    if p.is_zero() || matches!(p, HydraTerm::Sum { .. }) {
                        continue;
                    }
                    acc.push(p.clone());
                    extend_sums(by_size, remaining - sz, acc, out);
                    acc.pop();
                }
            }
        }
        let mut sums = Vec::new();
        extend_sums(&by_size, k, &mut Vec::new(), &mut sums);
        layer.extend(sums);
        // mu applications
        for (sym, arity) in &arities {
            let argc = arity - 1;
            // distribute k-1 over bound + argc args
            fn dist(
                by_size: &[Vec<HydraTerm>],
                slots: usize,
                remaining: usize,
                acc: &mut Vec<HydraTerm>,
                sym: &str,
                out: &mut Vec<HydraTerm>,
            ) {
                if slots == 0 {
                    if remaining == 0 {
                        let bound = acc[0].clone();
                        let args = acc[1..].to_vec();
                        out.push(HydraTerm::Mu {
                            sym: sym.to_string(),
                            bound: Box::new(bound),
                            args,
                        });
                    }
                    return;
                }
                for sz in 1..=remaining.saturating_sub(slots - 1) {
                    for t in &by_size[sz] {
                        acc.push(t.clone());
                        dist(by_size, slots - 1, remaining - sz, acc, sym, out);
                        acc.pop();
                    }
                }
            }
            let mut mus = Vec::new();
            dist(&by_size, 1 + argc, k - 1, &mut Vec::new(), sym, &mut mus);
            layer.extend(mus);
        }
        by_size[k] = layer;
    }
    by_size.into_iter().flatten().collect()
}

/// `multi_{t,0,n}(c0[, c1]; F0)`: terms below `t` within the size bound
/// that pass the level-0 hull over `c0` and, when given, the level-1 hull
/// over `c1`. Candidates of equal value are deduplicated.
pub fn multi_enum(
    t: &HydraTerm,
    c0: &[HydraTerm],
    c1: Option<&[HydraTerm]>,
    n: u64,
    mode: Mode,
    reg: &F0Registry,
) -> Result<Vec<HydraTerm>, ChopError> {
    let bound = double_exp(n);
    let cap = match mode {
        Mode::SpecExact => {
            if bound > SPEC_EXACT_FEASIBLE_MAX {
                return Err(ChopError::Infeasible { bound, cap: SPEC_EXACT_FEASIBLE_MAX });
            }
            bound
        }
        Mode::Capped(k) => bound.min(k),
    };
    let tv = value(t, reg)?;
    let pool = enumerate_terms(cap, reg);
    let mut out: Vec<HydraTerm> = Vec::new();
    let mut seen: Vec<Value> = Vec::new();
    for s in pool.iter() {
        let sv = match value(s, reg) {
            Ok(v) => v,
            // skip candidates outside the computable fragment
            Err(_) => continue,
        };
        if cmp_value(&sv, &tv) != Ordering::Less {
            continue;
        }
        if !hull_member(s, c0, 0, reg)? {
            continue;
        }
        if let Some(c1) = c1 {
            if !hull_member(s, c1, 1, reg)? {
                continue;
            }
        }
        if seen.iter().any(|v| cmp_value(v, &sv) == Ordering::Equal) {
            continue;
        }
        seen.push(sv);
        out.push(s.clone());
    }
    Ok(out)
}

/// All hydra-class trees of size at most `max_size`, ordered by size.
/// With `wb_only`, every level keeps only well-behaved trees, which also
/// prunes all compositions over ill-behaved pieces (well-behavedness is a
/// conjunction of per-collapse-node conditions).
pub fn enumerate_hydras(max_size: u64, wb_only: bool, reg: &F0Registry) -> Vec<HydraTerm> {
    let n = max_size as usize;
    let tm_pool = enumerate_terms(max_size.saturating_sub(1), reg);
    let mut tm_by_size: Vec<Vec<&HydraTerm>> = vec![vec![]; n + 1];
    for t in tm_pool.iter() {
        let sz = size(t) as usize;
        if sz <= n {
            tm_by_size[sz].push(t);
        }
    }
    let keep = |t: HydraTerm, reg: &F0Registry| -> Option<HydraTerm> {
        if wb_only && !is_well_behaved(&t, reg).map(|v| v.is_empty()).unwrap_or(false) {
            None
        } else {
            Some(t)
        }
    };
    let mut by_size: Vec<Vec<HydraTerm>> = vec![vec![]; n + 1];
    if n >= 1 {
        by_size[1] = vec![Zero, one(), crate::term::omega1(), crate::term::rho0()];
    }
    for k in 2..=n {
        let mut layer = Vec::new();
        // n·t with a term-class head (or rho0)
        for m in 1..k {
            let head_size = k - m;
            for h in &tm_by_size[head_size] {
                if !h.is_zero() {
                    if let Some(t) = keep(mult(m as u32, (*h).clone()), reg) {
                        layer.push(t);
                    }
                }
            }
            if head_size == 1 {
                if let Some(t) = keep(mult(m as u32, crate::term::rho0()), reg) {
                    layer.push(t);
                }
            }
        }
        // exponential over a smaller hydra
        for b in &by_size[k - 1] {
            if !b.is_zero() {
                if let Some(t) = keep(exp(b.clone()), reg) {
                    layer.push(t);
                }
            }
        }
        // collapses over D-class stacks and hydra bodies
        let d_pool: Vec<HydraTerm> = by_size[1..k]
            .iter()
            .flatten()
            .filter(|t| t.is_d_class())
            .cloned()
            .collect();
        let mut stackings: Vec<(Vec<HydraTerm>, usize)> = vec![(vec![], 0)];
        let mut frontier = vec![(Vec::<HydraTerm>::new(), 0usize)];
        while let Some((stack, used)) = frontier.pop() {
            for e in &d_pool {
                let sz = size(e) as usize;
                if used + sz <= k - 2 {
                    let mut s2 = stack.clone();
                    s2.push(e.clone());
                    frontier.push((s2.clone(), used + sz));
                    stackings.push((s2, used + sz));
                }
            }
        }
        for (stack, used) in &stackings {
            let body_size = k - 1 - used;
            if body_size == 0 {
                if !stack.is_empty() {
                    for level in 0..=1u8 {
                        if let Some(t) = keep(coll(level, stack.clone(), Zero), reg) {
                            layer.push(t);
                        }
                    }
                }
                continue;
            }
            for b in &by_size[body_size] {
                if stack.is_empty() && b.is_zero() {
                    continue;
                }
                for level in 0..=1u8 {
                    if let Some(t) = keep(coll(level, stack.clone(), b.clone()), reg) {
                        layer.push(t);
                    }
                }
            }
        }
        // sums of smaller hydras
        fn extend_sums(
            by_size: &[Vec<HydraTerm>],
            remaining: usize,
            acc: &mut Vec<HydraTerm>,
            out: &mut Vec<HydraTerm>,
        ) {
            if remaining == 0 {
                if acc.len() >= 2 {
                    out.push(HydraTerm::Sum { parts: acc.clone() });
                }
                return;
            }
            for sz in 1..=remaining {
                for p in &by_size[sz] {
                    if p.is_zero() || matches!(p, HydraTerm::Sum { .. }) {
                        continue;
                    }
                    acc.push(p.clone());
                    extend_sums(by_size, remaining - sz, acc, out);
                    acc.pop();
                }
            }
        }
        let mut sums = Vec::new();
        extend_sums(&by_size, k, &mut Vec::new(), &mut sums);
        // parts of wb trees are wb, so only flat sums need no re-check
        layer.extend(sums);
        by_size[k] = layer;
    }
    by_size.into_iter().flatten().collect()
}

/// One well-behavedness violation, with the path to the offending
/// collapse node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WbViolation {
    pub path: Vec<usize>,
    pub clause: &'static str,
    pub detail: String,
}

impl std::fmt::Display for WbViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} at {:?}: {}", self.clause, self.path, self.detail)
    }
}

/// Checks every collapse subtree `D_i(c ⊕ a)`: its guard pairs stay below
/// the stack threshold, and the multiple heads of both the stack and the
/// body live in the level-i hull over the stack.
pub fn is_well_behaved(a: &HydraTerm, reg: &F0Registry) -> Result<Vec<WbViolation>, ChopError> {
    let mut out = Vec::new();
    wb_walk(a, &mut Vec::new(), reg, &mut out)?;
    Ok(out)
}

fn wb_walk(
    a: &HydraTerm,
    path: &mut Vec<usize>,
    reg: &F0Registry,
    out: &mut Vec<WbViolation>,
) -> Result<(), ChopError> {
    let children: Vec<&HydraTerm> = match a {
        Zero => vec![],
        HydraTerm::Sum { parts } => parts.iter().collect(),
        HydraTerm::Mult { head, .. } => vec![head],
        HydraTerm::Coll { level, stack, body } => {
            wb_check_collapse(*level, stack, body, path, reg, out)?;
            stack.iter().chain(std::iter::once(&**body)).collect()
        }
        HydraTerm::Exp { body } => vec![body],
        HydraTerm::FColl { stack, body } => stack.iter().chain(std::iter::once(&**body)).collect(),
        HydraTerm::Mu { bound, args, .. } => {
            std::iter::once(&**bound).chain(args.iter()).collect()
        }
    };
    for (i, c) in children.into_iter().enumerate() {
        path.push(i);
        wb_walk(c, path, reg, out)?;
        path.pop();
    }
    Ok(())
}

fn wb_check_collapse(
    level: Level,
    stack: &[HydraTerm],
    body: &HydraTerm,
    path: &[usize],
    reg: &F0Registry,
    out: &mut Vec<WbViolation>,
) -> Result<(), ChopError> {
    if stack.is_empty() && body.is_zero() {
        return Ok(());
    }
    let mut threshold = Value::zero();
    for e in stack {
        threshold = cmp::add_value(&threshold, &value(e, reg)?);
    }
    // guard pairs of the stack entries and the body
    let mut pairs = Vec::new();
    for e in stack {
        pairs.extend(g_set(e, level));
    }
    pairs.extend(g_set(body, level));
    for p in pairs {
        let pv = pair_value(&p.stack, &p.body, reg)?;
        if cmp_value(&pv, &threshold) != Ordering::Less {
            out.push(WbViolation {
                path: path.to_vec(),
                clause: "guard-below-stack",
                detail: format!("guard pair over body {:?} reaches the stack threshold", p.body),
            });
        }
    }
    // multiple heads of the stack and the body must be hull members
    let mut heads = Vec::new();
    for e in stack {
        heads.extend(m_set(e, level));
    }
    heads.extend(m_set(body, level));
    for m in heads {
        if !hull_member(&m, stack, level, reg)? {
            out.push(WbViolation {
                path: path.to_vec(),
                clause: "head-in-hull",
                detail: format!("multiple head {m:?} escapes the level-{level} hull"),
            });
        }
    }
    Ok(())
}

/// One battle step: the hydra before the chop at index `n`, and the term
/// chosen at a multi site when one was selected.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct GameStep {
    pub n: u64,
    pub hydra: HydraTerm,
    pub choice: Option<HydraTerm>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(tag = "k", rename_all = "snake_case")]
pub enum GameOutcome {
    Died { at: usize },
    BudgetExhausted { budget: usize },
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct GameTrace {
    pub steps: Vec<GameStep>,
    pub outcome: GameOutcome,
}

impl GameTrace {
    /// Line-oriented text form: `n<TAB>term<TAB>choice`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for step in &self.steps {
            s.push_str(&format!(
                "{}\t{}\t{}\n",
                step.n,
                crate::parse::print_term(&step.hydra),
                step.choice
                    .as_ref()
                    .map(crate::parse::print_term)
                    .unwrap_or_else(|| "-".into())
            ));
        }
        s.push_str(&match &self.outcome {
            GameOutcome::Died { at } => format!("died\t{at}\n"),
            GameOutcome::BudgetExhausted { budget } => format!("budget\t{budget}\n"),
        });
        s
    }
}

/// Runs the battle `a_{n+1} = a_n[n]` from a well-behaved seed in `H_0`.
/// Every step is checked to strictly decrease.
pub fn battle(
    a0: &HydraTerm,
    n_start: u64,
    budget: usize,
    mode: Mode,
    reg: &F0Registry,
) -> Result<GameTrace, ChopError> {
    if !classify(a0).h0 {
        return Err(ChopError::Precondition(format!(
            "seed {a0:?} is not in H0"
        )));
    }
    let wb = is_well_behaved(a0, reg)?;
    if !wb.is_empty() {
        return Err(ChopError::Precondition(format!(
            "seed is not well-behaved: {}",
            wb[0]
        )));
    }
    let mut steps = Vec::new();
    let mut cur = a0.clone();
    for i in 0..=budget {
        let n = n_start + i as u64;
        if cur.is_zero() {
            steps.push(GameStep { n, hydra: cur, choice: None });
            return Ok(GameTrace { steps, outcome: GameOutcome::Died { at: i } });
        }
        let before = value(&cur, reg).map_err(ChopError::Term)?;
        let out = chop_full(&cur, &Choice::Nat(n), mode, reg)?;
        let after = value(&out.result, reg).map_err(ChopError::Term)?;
        if cmp_value(&after, &before) != Ordering::Less {
            return Err(ChopError::NoCase(format!(
                "step {n} failed to decrease: {:?} -> {:?}",
                cur, out.result
            )));
        }
        steps.push(GameStep { n, hydra: cur, choice: out.multi_choice.clone() });
        cur = out.result;
    }
    Ok(GameTrace { steps, outcome: GameOutcome::BudgetExhausted { budget } })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_term;
    use crate::term::{fcoll, int, omega1, rho0};

    fn reg() -> F0Registry {
        F0Registry::empty()
    }

    fn p(s: &str) -> HydraTerm {
        parse_term(s).unwrap()
    }

    #[test]
    fn domain_cases() {
        let r = reg();
        assert_eq!(domain(&Zero, &r).unwrap(), DomainKind::Empty);
        assert_eq!(domain(&one(), &r).unwrap(), DomainKind::One);
        assert_eq!(domain(&omega1(), &r).unwrap(), DomainKind::HClass(0));
        assert_eq!(domain(&rho0(), &r).unwrap(), DomainKind::HClass(1));
        assert_eq!(
            domain(&mult(3, omega1()), &r).unwrap(),
            DomainKind::MultiAll(omega1())
        );
        // sums take the last part's domain
        assert_eq!(domain(&p("w1 + 1"), &r).unwrap(), DomainKind::One);
        assert_eq!(domain(&p("1 + w1"), &r).unwrap(), DomainKind::HClass(0));
        // ([].5.1): successor body
        assert_eq!(domain(&p("D0(;1)"), &r).unwrap(), DomainKind::Omega);
        // ([].5.3): body collapses at the same level or above
        assert_eq!(domain(&p("D0(;D1(0))"), &r).unwrap(), DomainKind::Omega);
        assert_eq!(domain(&p("D1(;rho0)"), &r).unwrap(), DomainKind::Omega);
        // ([].5.2): lower-class bodies propagate
        assert_eq!(domain(&p("D1(;w1)"), &r).unwrap(), DomainKind::HClass(0));
        assert_eq!(domain(&p("D2(w1)"), &r).unwrap(), DomainKind::HClass(0));
        // ([].5.4): a level-1 collapse narrows a multi body by its stack
        assert_eq!(
            domain(&p("D1(;2*w1)"), &r).unwrap(),
            DomainKind::MultiHull(omega1(), vec![])
        );
        // ([].5.5): a level-0 collapse turns multi bodies into Omega
        assert_eq!(domain(&p("D0(;2*w1)"), &r).unwrap(), DomainKind::Omega);
        // exponential passthrough of multi domains
        assert_eq!(
            domain(&p("D2(2*rho0)"), &r).unwrap(),
            DomainKind::MultiAll(rho0())
        );
        // pure terms have no domain
        assert!(domain(&fcoll(vec![], one()), &r).is_err());
    }

    #[test]
    fn chop_base_cases() {
        let r = reg();
        let m = Mode::default();
        // 1[0] = 0
        assert_eq!(chop(&one(), &Choice::Nat(0), m, &r).unwrap(), Zero);
        // dom(a)=1 convention: a[n] := a[0]
        assert_eq!(chop(&one(), &Choice::Nat(9), m, &r).unwrap(), Zero);
        // D_{i+1}(0)[z] = z
        assert_eq!(
            chop(&omega1(), &Choice::Hydra(int(2)), m, &r).unwrap(),
            int(2)
        );
        assert_eq!(
            chop(&rho0(), &Choice::Hydra(omega1()), m, &r).unwrap(),
            omega1()
        );
        // class validation
        assert!(chop(&omega1(), &Choice::Hydra(omega1()), m, &r).is_err());
        // (m·t)[s] = (m·s)+(m-1)
        let a = mult(3, omega1());
        let got = chop(&a, &Choice::Term(one()), m, &r).unwrap();
        assert_eq!(got, p("3*1 + 1 + 1"));
        // (m·0)+b := b
        assert_eq!(chop(&a, &Choice::Term(Zero), m, &r).unwrap(), int(2));
        assert!(chop(&a, &Choice::Term(rho0()), m, &r).is_err());
    }

    #[test]
    fn chop_collapse_cases() {
        let r = reg();
        let m = Mode::default();
        // spec: chop(D0(;D0(0)), 7) = 2
        assert_eq!(chop(&p("D0(;1)"), &Choice::Nat(7), m, &r).unwrap(), int(2));
        // successor bodies keep their stack
        assert_eq!(
            chop(&p("D0(w1; 1 + 1)"), &Choice::Nat(0), m, &r).unwrap(),
            p("D0(w1; 1) + D0(w1; 1)")
        );
        // ([].5.3) with i=0: right piece only, stack extended
        assert_eq!(
            chop(&p("D0(;D1(0))"), &Choice::Nat(5), m, &r).unwrap(),
            p("D0(D2(1), 1; 1)")
        );
        // ([].5.3) with i=1: left + right
        assert_eq!(
            chop(&p("D1(;rho0)"), &Choice::Nat(5), m, &r).unwrap(),
            p("D1(;1) + D1(D2(1), 1; 1)")
        );
        // ([].5.2): propagation through a lower-class body
        assert_eq!(
            chop(&p("D1(;w1)"), &Choice::Hydra(int(2)), m, &r).unwrap(),
            p("D1(;1 + 1)")
        );
        // ([].6]): last summand
        assert_eq!(
            chop(&p("w1 + D0(;1)"), &Choice::Nat(0), m, &r).unwrap(),
            p("w1 + 1 + 1")
        );
        // w^(x+1)[n] = w^x + w^x, with w^1 handled by the one-guard
        assert_eq!(
            chop(&p("w^(w1 + 1)"), &Choice::Nat(3), m, &r).unwrap(),
            p("w^w1 + w^w1")
        );
        assert_eq!(chop(&p("w^1"), &Choice::Nat(3), m, &r).unwrap(), int(2));
    }

    #[test]
    fn multi_sets_and_selection() {
        let r = reg();
        // nothing lies below value zero
        let mu_free = multi_enum(&one(), &[], None, 1, Mode::default(), &r).unwrap();
        assert_eq!(mu_free, vec![Zero]);
        let none = multi_enum(&Zero, &[], None, 1, Mode::default(), &r).unwrap();
        assert!(none.is_empty());
        assert_eq!(select_max(&none, &r).unwrap(), Zero);
        assert_eq!(select_max(&[one(), int(2)], &r).unwrap(), int(2));
        // the empty-stack hull rejects collapse-guarded candidates
        let below_w1 = multi_enum(&omega1(), &[], None, 2, Mode::Capped(3), &r).unwrap();
        assert!(below_w1.iter().all(|s| g_set(s, 0).is_empty()));
        // a generous stack admits them
        let big = p("D2(rho0 + 1)");
        let wide = multi_enum(&omega1(), &[big], None, 2, Mode::Capped(3), &r).unwrap();
        assert!(wide.iter().any(|s| !g_set(s, 0).is_empty()));
        assert!(wide.len() >= below_w1.len());
        // exact mode feasibility gate
        assert!(matches!(
            multi_enum(&omega1(), &[], None, 2, Mode::SpecExact, &r),
            Err(ChopError::Infeasible { .. })
        ));
        assert!(multi_enum(&omega1(), &[], None, 1, Mode::SpecExact, &r).is_ok());
    }

    #[test]
    fn well_behaved_examples() {
        let r = reg();
        // any multiplicative hydra is well-behaved
        assert!(is_well_behaved(&p("3*w1"), &r).unwrap().is_empty());
        // a level-1 collapse over +, w^, w1 material
        assert!(is_well_behaved(&p("D1(;w^(w1 + 1))"), &r).unwrap().is_empty());
        // a stack entry whose guard reaches the threshold is flagged
        let bad = p("D0(D0(;w1); 1)");
        let violations = is_well_behaved(&bad, &r).unwrap();
        assert!(violations.iter().any(|v| v.clause == "guard-below-stack"));
        // a multiple head outside the empty hull is flagged
        let bad2 = p("D0(;2*D0(;w1))");
        let violations = is_well_behaved(&bad2, &r).unwrap();
        assert!(violations.iter().any(|v| v.clause == "head-in-hull"));
    }

    #[test]
    fn battle_derived_traces() {
        let r = reg();
        // seed D0(;D0(0)) dies at exactly step 3
        let t = battle(&p("D0(;1)"), 0, 10, Mode::default(), &r).unwrap();
        assert_eq!(t.outcome, GameOutcome::Died { at: 3 });
        let hydras: Vec<_> = t.steps.iter().map(|s| s.hydra.clone()).collect();
        assert_eq!(hydras, vec![p("D0(;1)"), int(2), int(1), Zero]);
        // already dead
        let t = battle(&Zero, 0, 10, Mode::default(), &r).unwrap();
        assert_eq!(t.outcome, GameOutcome::Died { at: 0 });
        // first step of D0(;D1(0)) is the stack-extending right piece
        let t = battle(&p("D0(;D1(0))"), 0, 1, Mode::default(), &r).unwrap();
        assert_eq!(t.steps[1].hydra, p("D0(D2(1), 1; 1)"));
        // preconditions
        assert!(battle(&omega1(), 0, 5, Mode::default(), &r).is_err());
        assert!(battle(&p("D0(D0(;w1); 1)"), 0, 5, Mode::default(), &r).is_err());
    }

    #[test]
    fn body_zero_collapse_gap_fill() {
        let r = reg();
        let a = p("D0(w1; 0)");
        assert_eq!(domain(&a, &r).unwrap(), DomainKind::Omega);
        let got = chop(&a, &Choice::Nat(1), Mode::default(), &r).unwrap();
        assert_eq!(got, int(3));
        assert_eq!(
            compare(&got, &a, &r).unwrap(),
            Ordering::Less,
        );
        let b = p("D1(w1; 0)");
        let got = chop(&b, &Choice::Nat(0), Mode::default(), &r).unwrap();
        assert_eq!(got, p("w1 + w1"));
        assert_eq!(compare(&got, &b, &r).unwrap(), Ordering::Less);
    }
}
