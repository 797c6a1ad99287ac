//! Size-bounded enumeration of notation trees with precomputed stats.
//!
//! Hull membership against a stack `c` at level `i` reduces to one scalar
//! comparison: a tree `s` lies in the hull iff `hmax_i(s) < v(c)`, where
//! `hmax_i` is the largest guard-pair value reachable from `s` through
//! multiple heads at level `i`. Well-behavedness of a composed node then
//! needs only the pieces' `hmax` values, so enumeration can keep pools of
//! well-behaved trees and check each new node in O(stack width).

use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::cmp::{add_value, cmp_value, eval_mu, value, Value};
use crate::error::TermError;
use crate::term::{classify, coll, exp, fcoll, mult, one, size, F0Registry, HydraTerm, Zero};

/// Max of two optional values (`None` = no constraint).
fn opt_max(a: Option<Value>, b: Option<Value>) -> Option<Value> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => Some(if cmp_value(&x, &y) == Ordering::Less { y } else { x }),
    }
}

/// Per-tree stats: the value and the hull ceilings at both levels.
#[derive(Clone, Debug)]
pub struct Stats {
    pub val: Value,
    /// Largest guard-pair value visible at level 0 (through heads).
    pub hmax0: Option<Value>,
    /// Same at level 1.
    pub hmax1: Option<Value>,
}

impl Stats {
    pub fn hmax(&self, level: u8) -> &Option<Value> {
        if level == 0 {
            &self.hmax0
        } else {
            &self.hmax1
        }
    }

    /// Scalar form of hull membership over a threshold value.
    pub fn in_hull(&self, level: u8, threshold: &Value) -> bool {
        match self.hmax(level) {
            None => true,
            Some(h) => cmp_value(h, threshold) == Ordering::Less,
        }
    }
}

/// Computes the stats of an arbitrary tree in one bottom-up pass.
pub fn stats(t: &HydraTerm, reg: &F0Registry) -> Result<Stats, TermError> {
    match t {
        Zero => Ok(Stats { val: Value::zero(), hmax0: None, hmax1: None }),
        HydraTerm::Sum { parts } => {
            let mut val = Value::zero();
            let (mut h0, mut h1) = (None, None);
            for p in parts {
                let s = stats(p, reg)?;
                val = add_value(&val, &s.val);
                h0 = opt_max(h0, s.hmax0);
                h1 = opt_max(h1, s.hmax1);
            }
            Ok(Stats { val, hmax0: h0, hmax1: h1 })
        }
        HydraTerm::Mult { count, head } => {
            let s = stats(head, reg)?;
            Ok(Stats {
                val: Value { limit: s.val.limit, ones: s.val.ones.saturating_mul(u64::from(*count)) },
                hmax0: s.hmax0,
                hmax1: s.hmax1,
            })
        }
        HydraTerm::Coll { level, stack, body } => {
            if stack.is_empty() && body.is_zero() {
                let val = if *level == 0 {
                    Value::finite(1)
                } else {
                    value(t, reg)?
                };
                return Ok(Stats { val, hmax0: None, hmax1: None });
            }
            let piece = pieces_stats(stack, body, reg)?;
            let pair = piece.pair;
            let val = value(t, reg)?;
            let h0 = opt_max(Some(pair.clone()), piece.h0);
            let h1 = if *level >= 1 {
                opt_max(Some(pair), piece.h1)
            } else {
                None
            };
            Ok(Stats { val, hmax0: h0, hmax1: h1 })
        }
        HydraTerm::Exp { body } => {
            let val = value(t, reg)?;
            let s = stats(body, reg)?;
            Ok(Stats { val, hmax0: s.hmax0, hmax1: s.hmax1 })
        }
        HydraTerm::FColl { stack, body } => {
            let piece = pieces_stats(stack, body, reg)?;
            let val = value(t, reg)?;
            Ok(Stats {
                val,
                hmax0: opt_max(Some(piece.pair.clone()), piece.h0),
                hmax1: opt_max(Some(piece.pair), piece.h1),
            })
        }
        HydraTerm::Mu { sym, bound, args } => {
            let result = eval_mu(sym, bound, args, reg)?;
            let val = value(&result, reg)?;
            let mut h0 = None;
            let mut h1 = None;
            for t in std::iter::once(&**bound).chain(args.iter()) {
                let s = stats(t, reg)?;
                h0 = opt_max(h0, s.hmax0);
                h1 = opt_max(h1, s.hmax1);
            }
            Ok(Stats { val, hmax0: h0, hmax1: h1 })
        }
    }
}

struct PieceStats {
    pair: Value,
    h0: Option<Value>,
    h1: Option<Value>,
    threshold: Value,
}

fn pieces_stats(
    stack: &[HydraTerm],
    body: &HydraTerm,
    reg: &F0Registry,
) -> Result<PieceStats, TermError> {
    let bs = stats(body, reg)?;
    let mut pair = if bs.val.is_zero() {
        Value::finite(1)
    } else {
        Value { limit: vec![crate::cmp::Atom::Omega(bs.val.clone())], ones: 0 }
    };
    let mut threshold = Value::zero();
    let mut h0 = bs.hmax0;
    let mut h1 = bs.hmax1;
    for e in stack {
        let es = stats(e, reg)?;
        pair = add_value(&pair, &es.val);
        threshold = add_value(&threshold, &es.val);
        h0 = opt_max(h0, es.hmax0);
        h1 = opt_max(h1, es.hmax1);
    }
    Ok(PieceStats { pair, h0, h1, threshold })
}

/// Fast well-behavedness: every collapse node's pieces must have
/// `hmax_level` strictly below the stack threshold.
pub fn well_behaved_fast(t: &HydraTerm, reg: &F0Registry) -> Result<bool, TermError> {
    fn walk(t: &HydraTerm, reg: &F0Registry) -> Result<(Stats, bool), TermError> {
        // recompute stats bottom-up while checking collapse nodes
        match t {
            HydraTerm::Coll { level, stack, body } => {
                if stack.is_empty() && body.is_zero() {
                    return Ok((stats(t, reg)?, true));
                }
                let mut ok = true;
                let mut h_here = None;
                for p in stack.iter().chain(std::iter::once(&**body)) {
                    let (ps, pok) = walk(p, reg)?;
                    ok &= pok;
                    h_here = opt_max(h_here, ps.hmax(*level).clone());
                }
                let piece = pieces_stats(stack, body, reg)?;
                if let Some(h) = h_here {
                    if cmp_value(&h, &piece.threshold) != Ordering::Less {
                        ok = false;
                    }
                }
                Ok((stats(t, reg)?, ok))
            }
            Zero => Ok((stats(t, reg)?, true)),
            HydraTerm::Sum { parts } => {
                let mut ok = true;
                for p in parts {
                    ok &= walk(p, reg)?.1;
                }
                Ok((stats(t, reg)?, ok))
            }
            HydraTerm::Mult { head, .. } => {
                let ok = walk(head, reg)?.1;
                Ok((stats(t, reg)?, ok))
            }
            HydraTerm::Exp { body } => {
                let ok = walk(body, reg)?.1;
                Ok((stats(t, reg)?, ok))
            }
            HydraTerm::FColl { stack, body } => {
                let mut ok = true;
                for p in stack.iter().chain(std::iter::once(&**body)) {
                    ok &= walk(p, reg)?.1;
                }
                Ok((stats(t, reg)?, ok))
            }
            HydraTerm::Mu { bound, args, .. } => {
                let mut ok = walk(bound, reg)?.1;
                for a in args {
                    ok &= walk(a, reg)?.1;
                }
                Ok((stats(t, reg)?, ok))
            }
        }
    }
    Ok(walk(t, reg)?.1)
}

/// One pooled tree with its precomputed stats and class tags.
#[derive(Clone, Debug)]
pub struct PoolEntry {
    pub term: HydraTerm,
    pub val: Value,
    pub hmax0: Option<Value>,
    pub hmax1: Option<Value>,
    pub tm: bool,
    pub h: bool,
    pub h0: bool,
    pub h1: bool,
    pub d_class: bool,
    pub size: u32,
    /// All collapse subtrees are well-behaved.
    pub wb: bool,
}

/// An enumerated universe of trees up to a size bound.
pub struct Pool {
    pub entries: Vec<PoolEntry>,
    /// Indices of term-class entries sorted by descending value
    /// (stable: ties keep enumeration order).
    pub terms_desc: Vec<u32>,
}

type PoolKey = (u64, bool, Vec<String>);
static POOLS: OnceLock<Mutex<HashMap<PoolKey, Arc<Pool>>>> = OnceLock::new();

/// Builds (or fetches) the pool of all grammar trees of size at most
/// `max_size`. With `wb_only`, collapses failing the well-behavedness
/// node condition are pruned together with everything built over them.
pub fn pool(max_size: u64, wb_only: bool, reg: &F0Registry) -> Arc<Pool> {
    let key: PoolKey = (max_size, wb_only, reg.names().map(|s| s.to_string()).collect());
    let pools = POOLS.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = pools.lock().unwrap().get(&key) {
        return hit.clone();
    }
    let built = Arc::new(build(max_size, wb_only, reg));
    pools.lock().unwrap().insert(key, built.clone());
    built
}

fn entry_of(term: HydraTerm, val: Value, h0m: Option<Value>, h1m: Option<Value>, wb: bool) -> PoolEntry {
    let c = classify(&term);
    let sz = size(&term) as u32;
    PoolEntry {
        d_class: term.is_d_class(),
        tm: c.tm,
        h: c.h,
        h0: c.h0,
        h1: c.h1,
        size: sz,
        term,
        val,
        hmax0: h0m,
        hmax1: h1m,
        wb,
    }
}

fn build(max_size: u64, wb_only: bool, reg: &F0Registry) -> Pool {
    let n = max_size as usize;
    let mut by_size: Vec<Vec<PoolEntry>> = vec![vec![]; n + 1];
    if n >= 1 {
        by_size[1] = vec![
            entry_of(Zero, Value::zero(), None, None, true),
            entry_of(one(), Value::finite(1), None, None, true),
            entry_of(crate::term::omega1(), value(&crate::term::omega1(), reg).unwrap(), None, None, true),
            entry_of(crate::term::rho0(), value(&crate::term::rho0(), reg).unwrap(), None, None, true),
        ];
    }
    let mu_arities: Vec<(String, usize)> = reg
        .names()
        .map(|s| (s.to_string(), reg.lookup(s).map(|g| g.arity).unwrap_or(1)))
        .collect();
    for k in 2..=n {
        let mut layer: Vec<PoolEntry> = Vec::new();
        // w^t / D2(t) over a non-zero smaller tree (H or Tm class)
        for e in &by_size[k - 1] {
            if e.term.is_zero() || !(e.h || e.tm) {
                continue;
            }
            if e.val.is_zero() {
                continue; // w^0 = 1 is already an atom
            }
            let t = exp(e.term.clone());
            let val = Value { limit: vec![crate::cmp::Atom::Omega(e.val.clone())], ones: 0 };
            layer.push(entry_of(t, val, e.hmax0.clone(), e.hmax1.clone(), e.wb));
        }
        // collapses and F nodes: stacks of D-class entries, H-class bodies
        let stack_budget = k.saturating_sub(2);
        let d_idx: Vec<(usize, usize)> = (1..k)
            .flat_map(|s| {
                by_size[s]
                    .iter()
                    .enumerate()
                    .filter(|(_, e)| e.d_class && (!wb_only || e.wb))
                    .map(move |(i, _)| (s, i))
                    .collect::<Vec<_>>()
            })
            .collect();
        // ordered stacks with total size <= budget
        let mut stacks: Vec<(Vec<(usize, usize)>, usize)> = vec![(vec![], 0)];
        let mut frontier: Vec<(Vec<(usize, usize)>, usize)> = vec![(vec![], 0)];
        while let Some((st, used)) = frontier.pop() {
            for &(s, i) in &d_idx {
                if used + s <= stack_budget {
                    let mut st2 = st.clone();
                    st2.push((s, i));
                    stacks.push((st2.clone(), used + s));
                    frontier.push((st2, used + s));
                }
            }
        }
        for (st, used) in &stacks {
            let body_size = k - 1 - used;
            let make = |level: u8,
                        entries: &Vec<(usize, usize)>,
                        body: &PoolEntry,
                        by_size: &Vec<Vec<PoolEntry>>|
             -> Option<PoolEntry> {
                // threshold and pair from piece stats
                let mut threshold = Value::zero();
                let mut pair = if body.val.is_zero() {
                    Value::finite(1)
                } else {
                    Value { limit: vec![crate::cmp::Atom::Omega(body.val.clone())], ones: 0 }
                };
                let mut h_pieces: Option<Value> = if level == 0 {
                    body.hmax0.clone()
                } else {
                    body.hmax1.clone()
                };
                let mut stack_terms = Vec::with_capacity(entries.len());
                for &(s, i) in entries {
                    let e = &by_size[s][i];
                    threshold = add_value(&threshold, &e.val);
                    pair = add_value(&pair, &e.val);
                    h_pieces = opt_max(
                        h_pieces,
                        if level == 0 { e.hmax0.clone() } else { e.hmax1.clone() },
                    );
                    stack_terms.push(e.term.clone());
                }
                let node_ok = match &h_pieces {
                    None => true,
                    Some(h) => cmp_value(h, &threshold) == Ordering::Less,
                };
                let wb = node_ok
                    && body.wb
                    && entries.iter().all(|&(s, i)| by_size[s][i].wb);
                if wb_only && !wb {
                    return None;
                }
                let term = if level == 2 {
                    fcoll(stack_terms, body.term.clone())
                } else {
                    coll(level, stack_terms, body.term.clone())
                };
                // hmax of the new node: its own pair joins at the visible levels
                let (h0m, h1m) = match level {
                    0 => (
                        opt_max(Some(pair.clone()), opt_max(body.hmax0.clone(), stack_hmax(entries, by_size, 0))),
                        None,
                    ),
                    1 => {
                        let h0 = opt_max(Some(pair.clone()), opt_max(body.hmax0.clone(), stack_hmax(entries, by_size, 0)));
                        let h1 = opt_max(Some(pair.clone()), opt_max(body.hmax1.clone(), stack_hmax(entries, by_size, 1)));
                        (h0, h1)
                    }
                    _ => {
                        // F nodes guard at both levels
                        let h0 = opt_max(Some(pair.clone()), opt_max(body.hmax0.clone(), stack_hmax(entries, by_size, 0)));
                        let h1 = opt_max(Some(pair.clone()), opt_max(body.hmax1.clone(), stack_hmax(entries, by_size, 1)));
                        (h0, h1)
                    }
                };
                let val = match level {
                    0 => Value { limit: vec![crate::cmp::Atom::Psi0(pair)], ones: 0 },
                    1 => Value { limit: vec![crate::cmp::Atom::Psi1(pair)], ones: 0 },
                    _ => Value { limit: vec![crate::cmp::Atom::FCol(pair)], ones: 0 },
                };
                Some(entry_of(term, val, h0m, h1m, wb))
            };
            if body_size == 0 {
                if st.is_empty() {
                    continue;
                }
                let zero_entry = by_size[1][0].clone();
                for level in [0u8, 1u8, 2u8] {
                    if let Some(e) = make(level, st, &zero_entry, &by_size) {
                        layer.push(e);
                    }
                }
                continue;
            }
            for bi in 0..by_size[body_size].len() {
                let body = by_size[body_size][bi].clone();
                if !body.h || (!wb_only.eq(&true) && false) {
                    if !body.h {
                        continue;
                    }
                }
                if wb_only && !body.wb {
                    continue;
                }
                if st.is_empty() && body.term.is_zero() {
                    continue;
                }
                for level in [0u8, 1u8, 2u8] {
                    if let Some(e) = make(level, st, &body, &by_size) {
                        layer.push(e);
                    }
                }
            }
        }
        // n·t with a term-class head (or rho0), n >= 1
        for m in 1..k {
            let head_size = k - m;
            for e in &by_size[head_size] {
                let head_ok = (e.tm || e.term == crate::term::rho0()) && !e.term.is_zero();
                if !head_ok || (wb_only && !e.wb) {
                    continue;
                }
                let term = mult(m as u32, e.term.clone());
                let val = Value {
                    limit: e.val.limit.clone(),
                    ones: e.val.ones.saturating_mul(m as u64),
                };
                layer.push(entry_of(term, val, e.hmax0.clone(), e.hmax1.clone(), e.wb));
            }
        }
        // sums: ordered sequences of >= 2 non-zero non-sum parts
        {
            let mut acc: Vec<(usize, usize)> = Vec::new();
            fn rec(
                by_size: &Vec<Vec<PoolEntry>>,
                wb_only: bool,
                remaining: usize,
                acc: &mut Vec<(usize, usize)>,
                out: &mut Vec<PoolEntry>,
            ) {
                if remaining == 0 {
                    if acc.len() >= 2 {
                        let mut parts = Vec::with_capacity(acc.len());
                        let mut val = Value::zero();
                        let (mut h0, mut h1) = (None, None);
                        let mut wb = true;
                        for &(s, i) in acc.iter() {
                            let e = &by_size[s][i];
                            parts.push(e.term.clone());
                            val = add_value(&val, &e.val);
                            h0 = opt_max(h0, e.hmax0.clone());
                            h1 = opt_max(h1, e.hmax1.clone());
                            wb &= e.wb;
                        }
                        out.push(entry_of(HydraTerm::Sum { parts }, val, h0, h1, wb));
                    }
                    return;
                }
                for s in 1..=remaining {
                    for i in 0..by_size[s].len() {
                        let e = &by_size[s][i];
                        if e.term.is_zero()
                            || matches!(e.term, HydraTerm::Sum { .. })
                            || !(e.h || e.tm)
                            || (wb_only && !e.wb)
                        {
                            continue;
                        }
                        acc.push((s, i));
                        rec(by_size, wb_only, remaining - s, acc, out);
                        acc.pop();
                    }
                }
            }
            rec(&by_size, wb_only, k, &mut acc, &mut layer);
        }
        // mu applications over term-class parts
        for (sym, arity) in &mu_arities {
            let slots = *arity; // bound + (arity-1) args
            let mut acc: Vec<(usize, usize)> = Vec::new();
            #[allow(clippy::too_many_arguments)]
            fn rec_mu(
                by_size: &Vec<Vec<PoolEntry>>,
                reg: &F0Registry,
                wb_only: bool,
                sym: &str,
                slots: usize,
                remaining: usize,
                acc: &mut Vec<(usize, usize)>,
                out: &mut Vec<PoolEntry>,
            ) {
                if slots == 0 {
                    if remaining != 0 {
                        return;
                    }
                    let bound = by_size[acc[0].0][acc[0].1].term.clone();
                    let args: Vec<HydraTerm> = acc[1..]
                        .iter()
                        .map(|&(s, i)| by_size[s][i].term.clone())
                        .collect();
                    let term = HydraTerm::Mu { sym: sym.to_string(), bound: Box::new(bound), args };
                    // value needs the evaluator; skip when outside the fragment
                    if let Ok(st) = stats(&term, reg) {
                        let wb = acc.iter().all(|&(s, i)| by_size[s][i].wb);
                        out.push(entry_of(term, st.val, st.hmax0, st.hmax1, wb));
                    }
                    return;
                }
                for s in 1..=remaining.saturating_sub(slots - 1) {
                    for i in 0..by_size[s].len() {
                        let e = &by_size[s][i];
                        if !e.tm || (wb_only && !e.wb) {
                            continue;
                        }
                        acc.push((s, i));
                        rec_mu(by_size, reg, wb_only, sym, slots - 1, remaining - s, acc, out);
                        acc.pop();
                    }
                }
            }
            rec_mu(&by_size, reg, wb_only, sym, slots, k - 1, &mut acc, &mut layer);
        }
        by_size[k] = layer;
    }
    let entries: Vec<PoolEntry> = by_size.into_iter().flatten().collect();
    let mut terms_desc: Vec<u32> = entries
        .iter()
        .enumerate()
        .filter(|(_, e)| e.tm)
        .map(|(i, _)| i as u32)
        .collect();
    terms_desc.sort_by(|&a, &b| cmp_value(&entries[b as usize].val, &entries[a as usize].val));
    Pool { entries, terms_desc }
}

fn stack_hmax(
    entries: &[(usize, usize)],
    by_size: &[Vec<PoolEntry>],
    level: u8,
) -> Option<Value> {
    let mut h = None;
    for &(s, i) in entries {
        let e = &by_size[s][i];
        h = opt_max(h, if level == 0 { e.hmax0.clone() } else { e.hmax1.clone() });
    }
    h
}
