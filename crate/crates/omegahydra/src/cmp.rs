//! Comparison on the computable fragment.
//!
//! Every fragment tree is normalized to a descending multiset of principal
//! components; multisets compare lexicographically, which matches natural
//! sums of additively indecomposable values. Collapsing nodes of the same
//! level compare by their combined argument value; `F(b⊕a)` sits strictly
//! between its `D0` partner and `w1`. The exponential is fixed-point free:
//! `w^x` with `x` at or above a closure atom lands strictly above it.

use std::cmp::Ordering;

use crate::error::TermError;
use crate::term::{F0Registry, HydraTerm, Level};

const MAX_MU_DEPTH: u32 = 64;

/// A principal (additively indecomposable) component above 1.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Atom {
    /// `w^x` for a non-zero exponent value.
    Omega(Value),
    /// A level-0 collapse keyed by its combined argument value.
    Psi0(Value),
    /// An `F` constant keyed by the argument of its `D0` partner.
    FCol(Value),
    Omega1,
    /// A level-1 collapse.
    Psi1(Value),
    Rho0,
}

/// Normal form of a fragment value: descending limit components plus a
/// finite part.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Value {
    pub limit: Vec<Atom>,
    pub ones: u64,
}

impl Value {
    pub fn zero() -> Self {
        Value::default()
    }

    pub fn is_zero(&self) -> bool {
        self.limit.is_empty() && self.ones == 0
    }

    pub fn finite(n: u64) -> Self {
        Value { limit: vec![], ones: n }
    }

    pub fn as_integer(&self) -> Option<u64> {
        if self.limit.is_empty() {
            Some(self.ones)
        } else {
            None
        }
    }

    fn atom(a: Atom) -> Self {
        Value { limit: vec![a], ones: 0 }
    }
}

/// Places `w^x` in the normal form, collapsing `w^0` to 1.
fn omega_of(v: Value) -> Value {
    if v.is_zero() {
        Value::finite(1)
    } else {
        Value::atom(Atom::Omega(v))
    }
}

fn rank(a: &Atom) -> u8 {
    match a {
        Atom::Omega(_) => unreachable!("omega atoms compare by exponent"),
        Atom::Psi0(_) | Atom::FCol(_) => 1,
        Atom::Omega1 => 2,
        Atom::Psi1(_) => 3,
        Atom::Rho0 => 4,
    }
}

pub fn cmp_atom(a: &Atom, b: &Atom) -> Ordering {
    use Atom::*;
    match (a, b) {
        (Omega(x), Omega(y)) => cmp_value(x, y),
        // fixed-point-free exponential: w^x > E whenever x >= E
        (Omega(x), e) => match cmp_value(x, &Value::atom(e.clone())) {
            Ordering::Less => Ordering::Less,
            _ => Ordering::Greater,
        },
        (e, Omega(x)) => match cmp_value(x, &Value::atom(e.clone())) {
            Ordering::Less => Ordering::Greater,
            _ => Ordering::Less,
        },
        (Psi0(x), Psi0(y)) | (FCol(x), FCol(y)) | (Psi1(x), Psi1(y)) => cmp_value(x, y),
        // D0(x) < F(y) iff x <= y: F sits directly above its partner
        (Psi0(x), FCol(y)) => match cmp_value(x, y) {
            Ordering::Greater => Ordering::Greater,
            _ => Ordering::Less,
        },
        (FCol(x), Psi0(y)) => match cmp_value(x, y) {
            Ordering::Less => Ordering::Less,
            _ => Ordering::Greater,
        },
        _ => rank(a).cmp(&rank(b)),
    }
}

/// Lexicographic comparison of descending normal forms.
pub fn cmp_value(a: &Value, b: &Value) -> Ordering {
    for (x, y) in a.limit.iter().zip(b.limit.iter()) {
        match cmp_atom(x, y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    match a.limit.len().cmp(&b.limit.len()) {
        Ordering::Equal => a.ones.cmp(&b.ones),
        other => other,
    }
}

/// Natural sum of normal forms: merge descending.
pub fn add_value(a: &Value, b: &Value) -> Value {
    let mut limit = Vec::with_capacity(a.limit.len() + b.limit.len());
    let (mut i, mut j) = (0, 0);
    while i < a.limit.len() && j < b.limit.len() {
        if cmp_atom(&a.limit[i], &b.limit[j]) == Ordering::Less {
            limit.push(b.limit[j].clone());
            j += 1;
        } else {
            limit.push(a.limit[i].clone());
            i += 1;
        }
    }
    limit.extend_from_slice(&a.limit[i..]);
    limit.extend_from_slice(&b.limit[j..]);
    Value { limit, ones: a.ones + b.ones }
}

/// Combined value of a `(stack ⊕ body)` pair: stack entries plus `w^body`.
pub fn pair_value(
    stack: &[HydraTerm],
    body: &HydraTerm,
    reg: &F0Registry,
) -> Result<Value, TermError> {
    let mut acc = omega_of(value(body, reg)?);
    for e in stack {
        acc = add_value(&acc, &value(e, reg)?);
    }
    Ok(acc)
}

/// Normalizes a fragment tree to its value.
pub fn value(t: &HydraTerm, reg: &F0Registry) -> Result<Value, TermError> {
    value_depth(t, reg, 0)
}

fn value_depth(t: &HydraTerm, reg: &F0Registry, depth: u32) -> Result<Value, TermError> {
    if depth > MAX_MU_DEPTH {
        return Err(TermError::IllFormed("mu evaluation recurses too deep".into()));
    }
    Ok(match t {
        HydraTerm::Zero => Value::zero(),
        HydraTerm::Sum { parts } => {
            let mut acc = Value::zero();
            for p in parts {
                acc = add_value(&acc, &value_depth(p, reg, depth)?);
            }
            acc
        }
        HydraTerm::Mult { count, head } => {
            // n·t absorbs into the limit part from the left: only the
            // finite tail is repeated.
            let v = value_depth(head, reg, depth)?;
            Value {
                limit: v.limit,
                ones: v.ones.saturating_mul(u64::from(*count)),
            }
        }
        HydraTerm::Coll { level, stack, body } => {
            if stack.is_empty() && body.is_zero() {
                match level {
                    0 => Value::finite(1),
                    _ => Value::atom(Atom::Omega1),
                }
            } else {
                let arg = pair_value_depth(stack, body, reg, depth)?;
                match level {
                    0 => Value::atom(Atom::Psi0(arg)),
                    _ => Value::atom(Atom::Psi1(arg)),
                }
            }
        }
        HydraTerm::Exp { body } => {
            if body.is_zero() {
                Value::atom(Atom::Rho0)
            } else {
                omega_of(value_depth(body, reg, depth)?)
            }
        }
        HydraTerm::FColl { stack, body } => {
            Value::atom(Atom::FCol(pair_value_depth(stack, body, reg, depth)?))
        }
        HydraTerm::Mu { sym, bound, args } => {
            let result = eval_mu(sym, bound, args, reg)?;
            value_depth(&result, reg, depth + 1)?
        }
    })
}

fn pair_value_depth(
    stack: &[HydraTerm],
    body: &HydraTerm,
    reg: &F0Registry,
    depth: u32,
) -> Result<Value, TermError> {
    let mut acc = omega_of(value_depth(body, reg, depth)?);
    for e in stack {
        acc = add_value(&acc, &value_depth(e, reg, depth)?);
    }
    Ok(acc)
}

/// Evaluates a mu-application via its registered hook and checks the
/// result sits strictly below the bound (or is zero).
pub fn eval_mu(
    sym: &str,
    bound: &HydraTerm,
    args: &[HydraTerm],
    reg: &F0Registry,
) -> Result<HydraTerm, TermError> {
    let sig = reg
        .lookup(sym)
        .ok_or_else(|| TermError::UnknownSymbol(sym.to_string()))?;
    if sig.arity != 1 + args.len() {
        return Err(TermError::BadArity {
            sym: sym.to_string(),
            expect: sig.arity,
            got: 1 + args.len(),
        });
    }
    let result = reg.eval(sym, bound, args)?;
    if !result.is_zero() {
        let rv = value(&result, reg)?;
        let bv = value(bound, reg)?;
        if cmp_value(&rv, &bv) != Ordering::Less {
            return Err(TermError::EvalOutOfRange);
        }
    }
    Ok(result)
}

/// Total comparison of two fragment trees by value.
pub fn compare(a: &HydraTerm, b: &HydraTerm, reg: &F0Registry) -> Result<Ordering, TermError> {
    Ok(cmp_value(&value(a, reg)?, &value(b, reg)?))
}

/// Syntactic principal summands of a tree paired with their values,
/// in tree order.
fn principal_parts(
    t: &HydraTerm,
    reg: &F0Registry,
    out: &mut Vec<(HydraTerm, Value)>,
) -> Result<(), TermError> {
    match t {
        HydraTerm::Zero => {}
        HydraTerm::Sum { parts } => {
            for p in parts {
                principal_parts(p, reg, out)?;
            }
        }
        HydraTerm::Mult { count, head } => {
            let mut head_parts = Vec::new();
            principal_parts(head, reg, &mut head_parts)?;
            let mut ones: u64 = 0;
            for (syn, v) in head_parts {
                if v.limit.is_empty() {
                    ones += v.ones;
                } else {
                    out.push((syn, v));
                }
            }
            for _ in 0..ones.saturating_mul(u64::from(*count)) {
                out.push((crate::term::one(), Value::finite(1)));
            }
        }
        HydraTerm::Mu { sym, bound, args } => {
            let result = eval_mu(sym, bound, args, reg)?;
            principal_parts(&result, reg, out)?;
        }
        HydraTerm::Exp { body } if !body.is_zero() && value(body, reg)?.is_zero() => {
            out.push((crate::term::one(), Value::finite(1)));
        }
        other => {
            let v = value(other, reg)?;
            if !v.is_zero() {
                out.push((other.clone(), v));
            }
        }
    }
    Ok(())
}

/// A canonical representative of the natural sum `v(a) # v(b)`: the merged
/// descending sequence of principal summands.
pub fn natural_sum(
    a: &HydraTerm,
    b: &HydraTerm,
    reg: &F0Registry,
) -> Result<HydraTerm, TermError> {
    let mut parts = Vec::new();
    principal_parts(a, reg, &mut parts)?;
    principal_parts(b, reg, &mut parts)?;
    // stable: equal-valued parts keep their order
    parts.sort_by(|(_, u), (_, v)| cmp_value(v, u));
    Ok(crate::term::sum(parts.into_iter().map(|(s, _)| s).collect()))
}

/// Membership of `s` in the hull generated over the threshold list `c` at
/// level `i`: every guard pair of `s` lies strictly below the combined
/// value of `c`, and every multiple head is recursively a member. The base
/// constants and closure under `+`, `w^`, and mu-evaluation come for free
/// since their guard and head sets are empty or distribute.
pub fn hull_member(
    s: &HydraTerm,
    c: &[HydraTerm],
    i: Level,
    reg: &F0Registry,
) -> Result<bool, TermError> {
    let mut threshold = Value::zero();
    for e in c {
        threshold = add_value(&threshold, &value(e, reg)?);
    }
    hull_member_val(s, &threshold, i, reg)
}

pub(crate) fn hull_member_val(
    s: &HydraTerm,
    threshold: &Value,
    i: Level,
    reg: &F0Registry,
) -> Result<bool, TermError> {
    for pair in crate::term::g_set(s, i) {
        let pv = pair_value(&pair.stack, &pair.body, reg)?;
        if cmp_value(&pv, threshold) != Ordering::Less {
            return Ok(false);
        }
    }
    for m in crate::term::m_set(s, i) {
        if !hull_member_val(&m, threshold, i, reg)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{coll, exp, fcoll, int, mult, omega1, one, rho0, sum, Zero};
    use std::cmp::Ordering::*;

    fn reg() -> F0Registry {
        F0Registry::empty()
    }

    fn cmp(a: &HydraTerm, b: &HydraTerm) -> Ordering {
        compare(a, b, &reg()).unwrap()
    }

    #[test]
    fn base_strata() {
        assert_eq!(cmp(&Zero, &one()), Less);
        assert_eq!(cmp(&omega1(), &rho0()), Less);
        assert_eq!(cmp(&one(), &omega1()), Less);
        assert_eq!(cmp(&int(7), &int(9)), Less);
        assert_eq!(cmp(&int(3), &int(3)), Equal);
    }

    #[test]
    fn integers_below_collapses() {
        let psi = coll(0, vec![], one()); // D0(;1)
        assert_eq!(cmp(&int(1000), &psi), Less);
        assert_eq!(cmp(&psi, &omega1()), Less);
        let psi1 = coll(1, vec![], one());
        assert_eq!(cmp(&omega1(), &psi1), Less);
        assert_eq!(cmp(&psi1, &rho0()), Less);
    }

    #[test]
    fn mult_one_is_eq_but_distinct() {
        let t = coll(0, vec![], one());
        assert_ne!(mult(1, t.clone()), t);
        assert_eq!(cmp(&mult(1, t.clone()), &t), Equal);
        // left product absorbs into limits: 2·w1 = w1
        assert_eq!(cmp(&mult(2, omega1()), &omega1()), Equal);
        // but multiplies finite tails: 2·(w1+1) = w1+2
        assert_eq!(
            cmp(&mult(2, sum(vec![omega1(), one()])), &sum(vec![omega1(), int(2)])),
            Equal
        );
    }

    #[test]
    fn exponential_is_fixed_point_free() {
        let psi = coll(0, vec![], one());
        // w^2 < psi < w^psi
        assert_eq!(cmp(&exp(int(2)), &psi), Less);
        assert_eq!(cmp(&exp(psi.clone()), &psi), Greater);
        assert_eq!(cmp(&exp(psi.clone()), &omega1()), Less);
        // towers over rho0+1 dominate rho0
        let t = exp(sum(vec![rho0(), one()]));
        assert_eq!(cmp(&t, &rho0()), Greater);
    }

    #[test]
    fn f_sits_between_partner_and_omega1() {
        let d = coll(0, vec![], omega1());
        let f = fcoll(vec![], omega1());
        let d_bigger = coll(0, vec![], sum(vec![omega1(), one()]));
        assert_eq!(cmp(&d, &f), Less);
        assert_eq!(cmp(&f, &d_bigger), Less);
        assert_eq!(cmp(&f, &omega1()), Less);
        assert_eq!(cmp(&fcoll(vec![], one()), &f), Less);
    }

    #[test]
    fn collapse_compare_by_argument() {
        let a = coll(0, vec![], one()); // Psi(w)
        let b = coll(0, vec![], omega1()); // Psi(w^w1)
        assert_eq!(cmp(&a, &b), Less);
        let c = coll(0, vec![omega1()], one());
        assert_eq!(cmp(&a, &c), Less);
        assert_eq!(cmp(&coll(1, vec![], one()), &coll(1, vec![], rho0())), Less);
    }

    #[test]
    fn natural_sum_examples() {
        let r = reg();
        assert_eq!(natural_sum(&Zero, &omega1(), &r).unwrap(), omega1());
        // 1 # 1 = 2
        let two = natural_sum(&one(), &one(), &r).unwrap();
        assert_eq!(cmp(&two, &int(2)), Equal);
        // w1 # 1 merges descending
        let s = natural_sum(&omega1(), &one(), &r).unwrap();
        assert_eq!(s, sum(vec![omega1(), one()]));
        let s2 = natural_sum(&one(), &omega1(), &r).unwrap();
        assert_eq!(s2, sum(vec![omega1(), one()]));
    }

    #[test]
    fn hull_membership() {
        let r = reg();
        // base constants are always members
        assert!(hull_member(&Zero, &[], 0, &r).unwrap());
        assert!(hull_member(&omega1(), &[one()], 1, &r).unwrap());
        assert!(hull_member(&rho0(), &[], 1, &r).unwrap());
        // closure under + and w^
        assert!(hull_member(&exp(sum(vec![omega1(), one()])), &[], 0, &r).unwrap());
        // a proper level-1 collapse whose pair reaches the threshold fails
        let big = coll(1, vec![], rho0());
        assert!(!hull_member(&big, &[omega1()], 1, &r).unwrap());
        // and passes against a strictly larger threshold
        let huge = exp(sum(vec![rho0(), one()]));
        assert!(hull_member(&big, &[huge.clone()], 1, &r).unwrap());
        // monotone in c
        assert!(hull_member(&one(), &[omega1()], 0, &r).unwrap());
        assert!(hull_member(&one(), &[omega1(), huge], 0, &r).unwrap());
    }
}
