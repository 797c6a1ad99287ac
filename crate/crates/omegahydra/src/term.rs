//! Hydra/ordinal notation trees.
//!
//! A notation is a tree over the symbols `0`, `+`, `·` (finite multiple),
//! the collapsing constructors `D0`, `D1`, the exponential `D2`/`w^`,
//! the Mostowski constant constructor `F`, and bounded mu-operators.
//! `D0(b1,..,bm ; a)` carries a local stack of notations available to the
//! body, written `b ⊕ a`.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::TermError;

/// Level of a collapsing constructor: 0 collapses below the first
/// uncountable, 1 collapses below the least admissible-like bound.
pub type Level = u8;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "k", rename_all = "snake_case")]
pub enum HydraTerm {
    Zero,
    /// Flattened sum with at least two non-zero parts.
    Sum { parts: Vec<HydraTerm> },
    /// `n · t` for n >= 1; the head is a term-class tree or the constant rho0.
    Mult { count: u32, head: Box<HydraTerm> },
    /// `D_level(stack ⊕ body)`. `Coll{level, [], Zero}` is the constant
    /// `D_level(0)` (value 1 for level 0, w1 for level 1).
    Coll {
        level: Level,
        stack: Vec<HydraTerm>,
        body: Box<HydraTerm>,
    },
    /// `D2(body)` = `w^body`. `Exp(Zero)` is the constant rho0.
    Exp { body: Box<HydraTerm> },
    /// The `F` symbol: term-class only, ordered between its `D0` partner
    /// and w1.
    FColl {
        stack: Vec<HydraTerm>,
        body: Box<HydraTerm>,
    },
    /// `f_A(bound; args)`: a bounded mu-operator application.
    Mu {
        sym: String,
        bound: Box<HydraTerm>,
        args: Vec<HydraTerm>,
    },
}

pub use HydraTerm::Zero;

impl fmt::Debug for HydraTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::parse::print_term(self))
    }
}

/// `1 = D0(0)`.
pub fn one() -> HydraTerm {
    HydraTerm::Coll {
        level: 0,
        stack: vec![],
        body: Box::new(Zero),
    }
}

/// `w1 = D1(0)`.
pub fn omega1() -> HydraTerm {
    HydraTerm::Coll {
        level: 1,
        stack: vec![],
        body: Box::new(Zero),
    }
}

/// `rho0 = D2(0)`.
pub fn rho0() -> HydraTerm {
    HydraTerm::Exp {
        body: Box::new(Zero),
    }
}

/// The integer `n` as the sum `1 + ... + 1`.
pub fn int(n: u32) -> HydraTerm {
    match n {
        0 => Zero,
        1 => one(),
        _ => HydraTerm::Sum {
            parts: (0..n).map(|_| one()).collect(),
        },
    }
}

/// `w^t`, collapsing `w^0` to `1` so the exponential never denotes rho0 by
/// accident.
pub fn exp_or_one(t: HydraTerm) -> HydraTerm {
    if t == Zero {
        one()
    } else {
        HydraTerm::Exp { body: Box::new(t) }
    }
}

/// `D2(t)` with `D2(0) = rho0`.
pub fn exp(t: HydraTerm) -> HydraTerm {
    HydraTerm::Exp { body: Box::new(t) }
}

pub fn coll(level: Level, stack: Vec<HydraTerm>, body: HydraTerm) -> HydraTerm {
    HydraTerm::Coll {
        level,
        stack,
        body: Box::new(body),
    }
}

pub fn fcoll(stack: Vec<HydraTerm>, body: HydraTerm) -> HydraTerm {
    HydraTerm::FColl {
        stack,
        body: Box::new(body),
    }
}

pub fn mult(count: u32, head: HydraTerm) -> HydraTerm {
    HydraTerm::Mult {
        count,
        head: Box::new(head),
    }
}

/// Flattened sum: zero parts dropped, nested sums spliced, empty sum is
/// `0` and a singleton is unwrapped.
pub fn sum(parts: Vec<HydraTerm>) -> HydraTerm {
    let mut flat = Vec::with_capacity(parts.len());
    for p in parts {
        match p {
            Zero => {}
            HydraTerm::Sum { parts: inner } => flat.extend(inner),
            other => flat.push(other),
        }
    }
    match flat.len() {
        0 => Zero,
        1 => flat.pop().unwrap(),
        _ => HydraTerm::Sum { parts: flat },
    }
}

/// `t · 2 := t + t` (the doubled response to a chopped successor).
pub fn double(t: HydraTerm) -> HydraTerm {
    sum(vec![t.clone(), t])
}

/// `w_k(t)`: the k-fold exponential tower over `t`.
pub fn omega_tower(k: u32, t: HydraTerm) -> HydraTerm {
    let mut cur = t;
    for _ in 0..k {
        cur = exp_or_one(cur);
    }
    cur
}

impl HydraTerm {
    pub fn is_zero(&self) -> bool {
        matches!(self, Zero)
    }

    /// True for the constants `D_i(0)` (i = 0,1) and `rho0 = D2(0)`.
    pub fn is_d_constant(&self) -> bool {
        match self {
            HydraTerm::Coll { stack, body, .. } => stack.is_empty() && body.is_zero(),
            HydraTerm::Exp { body } => body.is_zero(),
            _ => false,
        }
    }

    /// D-class: trees headed by one of the `D` symbols. These are the only
    /// trees admitted as stack entries.
    pub fn is_d_class(&self) -> bool {
        matches!(self, HydraTerm::Coll { .. } | HydraTerm::Exp { .. })
    }

    /// Syntactic successor: the tree ends in a final `+1` summand (or is
    /// `1` itself). Returns the predecessor when so.
    pub fn strip_one(&self) -> Option<HydraTerm> {
        match self {
            HydraTerm::Coll { level: 0, stack, body } if stack.is_empty() && body.is_zero() => {
                Some(Zero)
            }
            HydraTerm::Sum { parts } => {
                if parts.last().map(|p| *p == one()) == Some(true) {
                    Some(sum(parts[..parts.len() - 1].to_vec()))
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    /// Splits a sum into its parts (a non-sum is a singleton).
    pub fn summands(&self) -> Vec<&HydraTerm> {
        match self {
            HydraTerm::Sum { parts } => parts.iter().collect(),
            Zero => vec![],
            other => vec![other],
        }
    }
}

/// Class tags computed by the simultaneous inductive grammar.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct ClassSet {
    pub h0: bool,
    pub h1: bool,
    pub h: bool,
    pub d0: bool,
    pub d1: bool,
    pub tm: bool,
}

impl ClassSet {
    fn empty() -> Self {
        ClassSet::default()
    }
    pub fn is_wellformed(&self) -> bool {
        self.h || self.tm
    }
}

/// Computes the class tags of a tree. An ill-formed tree (one generated by
/// no grammar clause) gets the empty tag set.
pub fn classify(a: &HydraTerm) -> ClassSet {
    let mut c = ClassSet::empty();
    match a {
        Zero => {
            c.h0 = true;
            c.h1 = true;
            c.h = true;
            c.tm = true;
        }
        HydraTerm::Sum { parts } => {
            if parts.len() < 2 || parts.iter().any(|p| p.is_zero()) {
                return c;
            }
            let tags: Vec<ClassSet> = parts.iter().map(classify).collect();
            c.h = tags.iter().all(|t| t.h);
            c.h0 = tags.iter().all(|t| t.h0);
            c.h1 = tags.iter().all(|t| t.h1);
            c.tm = tags.iter().all(|t| t.tm);
            if !c.h && !c.tm {
                return ClassSet::empty();
            }
        }
        HydraTerm::Mult { count, head } => {
            if *count == 0 || head.is_zero() {
                return c;
            }
            let ht = classify(head);
            // head must be term-class or the constant rho0
            if ht.tm || **head == rho0() {
                c.h = true;
            }
        }
        HydraTerm::Coll { level, stack, body } => {
            if *level > 1 {
                return c;
            }
            if !stack.iter().all(|b| b.is_d_class() && classify(b).is_wellformed()) {
                return c;
            }
            let bt = classify(body);
            if !bt.h {
                return c;
            }
            c.h = true;
            c.tm = true;
            c.h1 = true;
            if *level == 0 {
                c.h0 = true;
                c.d0 = true;
            } else {
                c.d1 = true;
            }
        }
        HydraTerm::Exp { body } => {
            if body.is_zero() {
                // rho0: a hydra but neither a term nor in H1
                c.h = true;
            } else {
                let bt = classify(body);
                if !bt.h && !bt.tm {
                    return c;
                }
                c.h = bt.h;
                c.h0 = bt.h0;
                c.h1 = bt.h1;
                c.tm = bt.tm;
            }
        }
        HydraTerm::FColl { stack, body } => {
            if !stack.iter().all(|b| b.is_d_class() && classify(b).is_wellformed()) {
                return c;
            }
            if !classify(body).h {
                return c;
            }
            c.tm = true;
        }
        HydraTerm::Mu { bound, args, .. } => {
            if !classify(bound).tm || !args.iter().all(|t| classify(t).tm) {
                return c;
            }
            c.tm = true;
        }
    }
    c
}

/// Tree size `|a|`: constants count 1, `|n·t| = n + |t|`, the collapsing
/// and mu nodes add 1 over their arguments.
pub fn size(a: &HydraTerm) -> u64 {
    match a {
        Zero => 1,
        HydraTerm::Sum { parts } => parts.iter().map(size).sum(),
        HydraTerm::Mult { count, head } => u64::from(*count) + size(head),
        HydraTerm::Coll { stack, body, .. } => {
            if stack.is_empty() && body.is_zero() {
                1
            } else {
                1 + size(body) + stack.iter().map(size).sum::<u64>()
            }
        }
        HydraTerm::Exp { body } => {
            if body.is_zero() {
                1
            } else {
                size(body) + 1
            }
        }
        HydraTerm::FColl { stack, body } => 1 + size(body) + stack.iter().map(size).sum::<u64>(),
        HydraTerm::Mu { bound, args, .. } => 1 + size(bound) + args.iter().map(size).sum::<u64>(),
    }
}

/// A `(stack ⊕ body)` pair as found in guard sets.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct StackPair {
    pub stack: Vec<HydraTerm>,
    pub body: HydraTerm,
}

/// `G_i(a)`: the guard pairs of the collapsing subtrees at level >= i.
/// A `D_v(b⊕a)` contributes its own pair and recurses when `i <= v`, and
/// cuts off when `i > v`. `F` nodes contribute at both levels.
pub fn g_set(a: &HydraTerm, i: Level) -> BTreeSet<StackPair> {
    let mut out = BTreeSet::new();
    g_collect(a, i, &mut out);
    out
}

fn g_collect(a: &HydraTerm, i: Level, out: &mut BTreeSet<StackPair>) {
    match a {
        Zero => {}
        HydraTerm::Sum { parts } => parts.iter().for_each(|p| g_collect(p, i, out)),
        HydraTerm::Mult { .. } => {}
        HydraTerm::Coll { level, stack, body } => {
            if stack.is_empty() && body.is_zero() {
                return;
            }
            if i <= *level {
                out.insert(StackPair {
                    stack: stack.clone(),
                    body: (**body).clone(),
                });
                stack.iter().for_each(|b| g_collect(b, i, out));
                g_collect(body, i, out);
            }
        }
        HydraTerm::Exp { body } => g_collect(body, i, out),
        HydraTerm::FColl { stack, body } => {
            out.insert(StackPair {
                stack: stack.clone(),
                body: (**body).clone(),
            });
            stack.iter().for_each(|b| g_collect(b, i, out));
            g_collect(body, i, out);
        }
        HydraTerm::Mu { bound, args, .. } => {
            g_collect(bound, i, out);
            args.iter().for_each(|t| g_collect(t, i, out));
        }
    }
}

/// `M_i(a)`: the multiple heads visible at level i. `M_i(n·t) = {t}`;
/// `D_v` nodes recurse when `i <= v` and cut off otherwise.
pub fn m_set(a: &HydraTerm, i: Level) -> BTreeSet<HydraTerm> {
    let mut out = BTreeSet::new();
    m_collect(a, i, &mut out);
    out
}

fn m_collect(a: &HydraTerm, i: Level, out: &mut BTreeSet<HydraTerm>) {
    match a {
        Zero => {}
        HydraTerm::Sum { parts } => parts.iter().for_each(|p| m_collect(p, i, out)),
        HydraTerm::Mult { head, .. } => {
            out.insert((**head).clone());
        }
        HydraTerm::Coll { level, stack, body } => {
            if stack.is_empty() && body.is_zero() {
                return;
            }
            if i <= *level {
                stack.iter().for_each(|b| m_collect(b, i, out));
                m_collect(body, i, out);
            }
        }
        HydraTerm::Exp { body } => m_collect(body, i, out),
        HydraTerm::FColl { stack, body } => {
            stack.iter().for_each(|b| m_collect(b, i, out));
            m_collect(body, i, out);
        }
        HydraTerm::Mu { bound, args, .. } => {
            m_collect(bound, i, out);
            args.iter().for_each(|t| m_collect(t, i, out));
        }
    }
}

/// `stk(a)` for collapsing nodes.
pub fn stk(a: &HydraTerm) -> Result<&[HydraTerm], TermError> {
    match a {
        HydraTerm::Coll { stack, .. } => Ok(stack),
        _ => Err(TermError::NotACollapse),
    }
}

/// Evaluator hook for a registered mu-symbol: maps (bound, args) to a
/// result notation, which must compare strictly below the bound or be 0.
pub type MuEvaluator =
    Arc<dyn Fn(&HydraTerm, &[HydraTerm]) -> Result<HydraTerm, TermError> + Send + Sync>;

#[derive(Clone)]
pub struct FnSignature {
    pub name: String,
    pub arity: usize,
    pub evaluator: Option<MuEvaluator>,
}

/// The finite registry of mu-symbols in play.
#[derive(Clone, Default)]
pub struct F0Registry {
    entries: Vec<FnSignature>,
}

impl F0Registry {
    pub fn empty() -> Self {
        F0Registry::default()
    }

    pub fn register(&mut self, sig: FnSignature) -> Result<(), TermError> {
        if self.entries.iter().any(|e| e.name == sig.name) {
            return Err(TermError::DuplicateSymbol(sig.name));
        }
        self.entries.push(sig);
        Ok(())
    }

    pub fn lookup(&self, name: &str) -> Option<&FnSignature> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.name.as_str())
    }

    /// Evaluates `sym(bound; args)` to a result notation.
    pub fn eval(
        &self,
        sym: &str,
        bound: &HydraTerm,
        args: &[HydraTerm],
    ) -> Result<HydraTerm, TermError> {
        let sig = self
            .lookup(sym)
            .ok_or_else(|| TermError::UnknownSymbol(sym.to_string()))?;
        let f = sig
            .evaluator
            .as_ref()
            .ok_or_else(|| TermError::NoEvaluator(sym.to_string()))?;
        f(bound, args)
    }
}

impl fmt::Debug for F0Registry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries(self.entries.iter().map(|e| &e.name))
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_of_constants() {
        assert_eq!(size(&Zero), 1);
        assert_eq!(size(&one()), 1);
        assert_eq!(size(&omega1()), 1);
        assert_eq!(size(&rho0()), 1);
    }

    #[test]
    fn size_clause_table() {
        // |n·t| = |n| + |t|
        assert_eq!(size(&mult(3, omega1())), 4);
        // |D_v(b⊕a)| = 1 + |a| + sum |b_i|
        assert_eq!(size(&coll(0, vec![omega1()], one())), 3);
        // |D2(a)| = |a| + 1
        assert_eq!(size(&exp(one())), 2);
        // |w^t| = |t| + 1 (same constructor)
        assert_eq!(size(&exp(mult(2, omega1()))), 4);
        // |f(t; ts)| = 1 + |t| + sum
        let f = HydraTerm::Mu {
            sym: "f".into(),
            bound: Box::new(omega1()),
            args: vec![one(), one()],
        };
        assert_eq!(size(&f), 4);
        // sums add
        assert_eq!(size(&sum(vec![omega1(), one(), one()])), 3);
    }

    #[test]
    fn classify_constants() {
        let c = classify(&coll(0, vec![], Zero));
        assert!(c.h0 && c.h1 && c.h && c.tm && c.d0);
        let c = classify(&omega1());
        assert!(!c.h0 && c.h1 && c.h && c.tm && c.d1);
        let c = classify(&rho0());
        assert!(!c.h0 && !c.h1 && c.h && !c.tm);
        let c = classify(&Zero);
        assert!(c.h0 && c.h1 && c.h && c.tm);
    }

    #[test]
    fn classify_mu_is_term_only() {
        let f = HydraTerm::Mu {
            sym: "f".into(),
            bound: Box::new(one()),
            args: vec![],
        };
        let c = classify(&f);
        assert!(c.tm && !c.h && !c.h0 && !c.h1);
    }

    #[test]
    fn classify_collapse_raises_any_body_to_its_level() {
        // D0 over an H1 body is still in H0
        let c = classify(&coll(0, vec![], omega1()));
        assert!(c.h0 && c.d0);
        // D1 over anything is in H1 but not H0
        let c = classify(&coll(1, vec![], rho0()));
        assert!(c.h1 && !c.h0 && c.d1);
        // Mult is a hydra only
        let c = classify(&mult(2, omega1()));
        assert!(c.h && !c.h0 && !c.h1 && !c.tm);
        // Exp follows its body's classes
        let c = classify(&exp(mult(2, omega1())));
        assert!(c.h && !c.tm);
        let c = classify(&exp(omega1()));
        assert!(c.h && c.h1 && c.tm && !c.h0);
    }

    #[test]
    fn g_and_m_sets() {
        assert!(g_set(&Zero, 0).is_empty());
        assert!(g_set(&omega1(), 1).is_empty());
        assert!(g_set(&mult(2, omega1()), 1).is_empty());
        assert_eq!(
            m_set(&mult(5, omega1()), 0),
            BTreeSet::from([omega1()])
        );
        assert!(m_set(&Zero, 1).is_empty());

        // level cutoff: i > v gives the empty set
        let d0 = coll(0, vec![], sum(vec![omega1(), one()]));
        assert!(g_set(&d0, 1).is_empty());
        assert!(!g_set(&d0, 0).is_empty());

        // i <= v propagates through stacks and bodies
        let d1 = coll(1, vec![], mult(2, omega1()));
        assert_eq!(m_set(&d1, 0), BTreeSet::from([omega1()]));
        let pair = g_set(&d1, 1);
        assert_eq!(pair.len(), 1);
        assert_eq!(pair.iter().next().unwrap().body, mult(2, omega1()));
    }

    #[test]
    fn stk_accessor() {
        let d = coll(0, vec![omega1(), one()], Zero);
        assert_eq!(stk(&d).unwrap(), &[omega1(), one()]);
        assert!(stk(&coll(1, vec![], Zero)).unwrap().is_empty());
        assert!(stk(&Zero).is_err());
    }

    #[test]
    fn strip_one_detects_syntactic_successors() {
        assert_eq!(one().strip_one(), Some(Zero));
        assert_eq!(
            sum(vec![omega1(), one()]).strip_one(),
            Some(omega1())
        );
        assert_eq!(sum(vec![omega1(), one(), one()]).strip_one(), Some(sum(vec![omega1(), one()])));
        assert_eq!(omega1().strip_one(), None);
        assert_eq!(sum(vec![one(), omega1()]).strip_one(), None);
    }
}
