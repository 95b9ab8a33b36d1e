//! Context-free expressions: the regular operators plus `mu a. e`, a
//! least fixed point binding the placeholder `a` inside `e`. Star is not
//! a constructor here; the concrete syntax desugars `e*` to
//! `mu t. e.t + 1` with a fresh binder.
//!
//! A word is in the language when it can be derived by finitely many
//! unfoldings of `mu` expressions, so `mu a. a` denotes the empty
//! language even though it unfolds forever.
//!
//! Well-formedness as checked by [`Cfe::check_well_formed`] demands that
//! the expression is closed and that binder names are globally distinct.
//! Derived expressions (unfoldings, closure images from
//! [`Cfe::binding_subst`]) stay closed but may duplicate binders, since
//! substitution copies whole subterms; operations downstream only rely
//! on closedness.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::regex::Symbol;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Cfe {
    Phi,
    Eps,
    Sym(Symbol),
    /// A placeholder bound by an enclosing `Mu`.
    Var(String),
    Alt(Box<Cfe>, Box<Cfe>),
    Cat(Box<Cfe>, Box<Cfe>),
    Mu(String, Box<Cfe>),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WellFormedError {
    #[error("unbound placeholder `{0}`")]
    UnboundPlaceholder(String),
    #[error("binder `{0}` is used more than once")]
    DuplicateBinder(String),
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("expression is not a mu")]
pub struct NotAMu;

/// The closing substitution of an expression: binder name to a closed
/// expression that denotes the same language as the binder's occurrence
/// does in context.
pub type Binding = BTreeMap<String, Cfe>;

impl Cfe {
    pub fn sym(x: Symbol) -> Cfe {
        Cfe::Sym(x)
    }

    pub fn var(name: impl Into<String>) -> Cfe {
        Cfe::Var(name.into())
    }

    pub fn alt(l: Cfe, r: Cfe) -> Cfe {
        Cfe::Alt(Box::new(l), Box::new(r))
    }

    pub fn cat(l: Cfe, r: Cfe) -> Cfe {
        Cfe::Cat(Box::new(l), Box::new(r))
    }

    pub fn mu(name: impl Into<String>, body: Cfe) -> Cfe {
        Cfe::Mu(name.into(), Box::new(body))
    }

    pub fn symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<Symbol>) {
        match self {
            Cfe::Phi | Cfe::Eps | Cfe::Var(_) => {}
            Cfe::Sym(x) => {
                out.insert(*x);
            }
            Cfe::Alt(l, r) | Cfe::Cat(l, r) => {
                l.collect_symbols(out);
                r.collect_symbols(out);
            }
            Cfe::Mu(_, body) => body.collect_symbols(out),
        }
    }

    /// Closed and with globally distinct binders.
    pub fn check_well_formed(&self) -> Result<(), WellFormedError> {
        let mut seen = BTreeSet::new();
        let mut scope = Vec::new();
        self.wf(&mut seen, &mut scope)
    }

    fn wf<'a>(
        &'a self,
        seen: &mut BTreeSet<&'a str>,
        scope: &mut Vec<&'a str>,
    ) -> Result<(), WellFormedError> {
        match self {
            Cfe::Phi | Cfe::Eps | Cfe::Sym(_) => Ok(()),
            Cfe::Var(name) => {
                if scope.iter().any(|s| *s == name) {
                    Ok(())
                } else {
                    Err(WellFormedError::UnboundPlaceholder(name.clone()))
                }
            }
            Cfe::Alt(l, r) | Cfe::Cat(l, r) => {
                l.wf(seen, scope)?;
                r.wf(seen, scope)
            }
            Cfe::Mu(name, body) => {
                if !seen.insert(name) {
                    return Err(WellFormedError::DuplicateBinder(name.clone()));
                }
                scope.push(name);
                let out = body.wf(seen, scope);
                scope.pop();
                out
            }
        }
    }

    pub fn is_closed(&self) -> bool {
        fn go(e: &Cfe, scope: &mut Vec<String>) -> bool {
            match e {
                Cfe::Phi | Cfe::Eps | Cfe::Sym(_) => true,
                Cfe::Var(name) => scope.iter().any(|s| s == name),
                Cfe::Alt(l, r) | Cfe::Cat(l, r) => go(l, scope) && go(r, scope),
                Cfe::Mu(name, body) => {
                    scope.push(name.clone());
                    let out = go(body, scope);
                    scope.pop();
                    out
                }
            }
        }
        go(self, &mut Vec::new())
    }

    /// Replaces free occurrences of the placeholder `name` by `repl`.
    /// An inner binder of the same name shields its body.
    pub fn substitute(&self, name: &str, repl: &Cfe) -> Cfe {
        match self {
            Cfe::Phi | Cfe::Eps | Cfe::Sym(_) => self.clone(),
            Cfe::Var(n) => {
                if n == name {
                    repl.clone()
                } else {
                    self.clone()
                }
            }
            Cfe::Alt(l, r) => Cfe::alt(l.substitute(name, repl), r.substitute(name, repl)),
            Cfe::Cat(l, r) => Cfe::cat(l.substitute(name, repl), r.substitute(name, repl)),
            Cfe::Mu(n, body) => {
                if n == name {
                    self.clone()
                } else {
                    Cfe::mu(n.clone(), body.substitute(name, repl))
                }
            }
        }
    }

    /// One unfolding step: `mu a. e` becomes `e` with `a` replaced by
    /// the whole `mu` expression. Preserves the language.
    pub fn unfold(&self) -> Result<Cfe, NotAMu> {
        match self {
            Cfe::Mu(name, body) => Ok(body.substitute(name, self)),
            _ => Err(NotAMu),
        }
    }

    /// True when the empty word is in the language. Placeholders count
    /// as non-nullable, which is sound for `mu`: an unfolding path that
    /// reaches the binder again has not produced the empty word.
    pub fn is_nullable(&self) -> bool {
        match self {
            Cfe::Phi | Cfe::Sym(_) | Cfe::Var(_) => false,
            Cfe::Eps => true,
            Cfe::Alt(l, r) => l.is_nullable() || r.is_nullable(),
            Cfe::Cat(l, r) => l.is_nullable() && r.is_nullable(),
            Cfe::Mu(_, body) => body.is_nullable(),
        }
    }

    /// The set of syntactic subterms, including the expression itself.
    /// Subterms under a binder appear with their placeholders free.
    pub fn subterms(&self) -> BTreeSet<Cfe> {
        let mut out = BTreeSet::new();
        self.collect_subterms(&mut out);
        out
    }

    fn collect_subterms(&self, out: &mut BTreeSet<Cfe>) {
        out.insert(self.clone());
        match self {
            Cfe::Phi | Cfe::Eps | Cfe::Sym(_) | Cfe::Var(_) => {}
            Cfe::Alt(l, r) | Cfe::Cat(l, r) => {
                l.collect_subterms(out);
                r.collect_subterms(out);
            }
            Cfe::Mu(_, body) => body.collect_subterms(out),
        }
    }

    /// Binder name to the `Mu` subterm that introduces it.
    pub fn binder_map(&self) -> BTreeMap<String, Cfe> {
        let mut out = BTreeMap::new();
        fn go(e: &Cfe, out: &mut BTreeMap<String, Cfe>) {
            match e {
                Cfe::Phi | Cfe::Eps | Cfe::Sym(_) | Cfe::Var(_) => {}
                Cfe::Alt(l, r) | Cfe::Cat(l, r) => {
                    go(l, out);
                    go(r, out);
                }
                Cfe::Mu(name, body) => {
                    out.insert(name.clone(), e.clone());
                    go(body, out);
                }
            }
        }
        go(self, &mut out);
        out
    }

    /// The closing substitution: each binder in `self` is mapped to a
    /// closed expression equivalent to what the placeholder stands for.
    /// Built inside out; at each `mu a. e`, images collected from `e`
    /// get their free `a` replaced by the whole `mu` expression.
    pub fn binding_subst(&self) -> Binding {
        match self {
            Cfe::Phi | Cfe::Eps | Cfe::Sym(_) | Cfe::Var(_) => BTreeMap::new(),
            Cfe::Alt(l, r) | Cfe::Cat(l, r) => {
                let mut out = l.binding_subst();
                out.extend(r.binding_subst());
                out
            }
            Cfe::Mu(name, body) => {
                let mut out = BTreeMap::new();
                for (binder, image) in body.binding_subst() {
                    out.insert(binder, image.substitute(name, self));
                }
                out.insert(name.clone(), self.clone());
                out
            }
        }
    }

    /// Applies a closing substitution to an (open) subterm, replacing
    /// every free placeholder by its image.
    pub fn apply_binding(&self, binding: &Binding) -> Cfe {
        fn go(e: &Cfe, binding: &Binding, shadowed: &mut Vec<String>) -> Cfe {
            match e {
                Cfe::Phi | Cfe::Eps | Cfe::Sym(_) => e.clone(),
                Cfe::Var(name) => {
                    if shadowed.iter().any(|s| s == name) {
                        e.clone()
                    } else if let Some(image) = binding.get(name) {
                        image.clone()
                    } else {
                        e.clone()
                    }
                }
                Cfe::Alt(l, r) => Cfe::alt(go(l, binding, shadowed), go(r, binding, shadowed)),
                Cfe::Cat(l, r) => Cfe::cat(go(l, binding, shadowed), go(r, binding, shadowed)),
                Cfe::Mu(name, body) => {
                    shadowed.push(name.clone());
                    let out = Cfe::mu(name.clone(), go(body, binding, shadowed));
                    shadowed.pop();
                    out
                }
            }
        }
        go(self, binding, &mut Vec::new())
    }

    /// Guardedness: inside every `mu`, the body must be a right-nested
    /// sum of guards `x.e` with pairwise distinct guard symbols,
    /// optionally ending in `1`. Guarded expressions admit a predictive
    /// parser because each unfolding consumes a symbol before recursing.
    pub fn is_guarded(&self) -> bool {
        match self {
            Cfe::Phi | Cfe::Eps | Cfe::Sym(_) | Cfe::Var(_) => true,
            Cfe::Alt(l, r) | Cfe::Cat(l, r) => l.is_guarded() && r.is_guarded(),
            Cfe::Mu(_, body) => guarded_body(body),
        }
    }

    /// All words of length at most `max_len`, exactly realizing the
    /// derivation semantics: a word is included iff some finite
    /// unfolding derivation produces it.
    ///
    /// Enumeration is iterative deepening on unfolding depth. Branches
    /// whose minimal derivable word length already exceeds the budget
    /// are cut, which also disposes of unproductive recursion like
    /// `mu a. a`. A sweep that adds nothing once the depth has passed
    /// `(max_len + 1) * |subterms| + 1` ends the search; every word
    /// within the budget has a derivation not deeper than that.
    pub fn enumerate_words(&self, max_len: usize) -> BTreeSet<String> {
        let min = MinYield::compute(self);
        let bound = (max_len + 1) * self.subterms().len() + 1;
        let mut acc: BTreeSet<String> = BTreeSet::new();
        let mut depth = 1usize;
        loop {
            let swept = sweep(self, depth, max_len, &min);
            let progressed = swept.len() > acc.len();
            acc = swept;
            if !progressed && depth > bound {
                return acc;
            }
            depth += 1;
        }
    }
}

fn guarded_body(body: &Cfe) -> bool {
    let mut seen = BTreeSet::new();
    let mut cur = body;
    loop {
        match cur {
            Cfe::Alt(l, rest) => {
                if !guard(l, &mut seen) {
                    return false;
                }
                cur = rest;
            }
            Cfe::Eps => return true,
            last => return guard(last, &mut seen),
        }
    }
}

fn guard(g: &Cfe, seen: &mut BTreeSet<Symbol>) -> bool {
    match g {
        Cfe::Cat(head, tail) => match **head {
            Cfe::Sym(x) => seen.insert(x) && tail.is_guarded(),
            _ => false,
        },
        _ => false,
    }
}

/// Minimal derivable word length per binder, `usize::MAX` for
/// unproductive ones. Computed once on the original expression and then
/// looked up by binder name, which stays valid for every expression that
/// unfolding produces: substitution only ever copies original subterms.
struct MinYield {
    by_binder: BTreeMap<String, usize>,
}

impl MinYield {
    fn compute(root: &Cfe) -> MinYield {
        let binders = root.binder_map();
        let mut by_binder: BTreeMap<String, usize> =
            binders.keys().map(|k| (k.clone(), usize::MAX)).collect();
        loop {
            let mut changed = false;
            for (name, mu) in &binders {
                let body = match mu {
                    Cfe::Mu(_, body) => body,
                    _ => unreachable!("binder map only holds mu subterms"),
                };
                let v = eval_min(body, &by_binder);
                if v < by_binder[name] {
                    by_binder.insert(name.clone(), v);
                    changed = true;
                }
            }
            if !changed {
                return MinYield { by_binder };
            }
        }
    }

    fn of(&self, e: &Cfe) -> usize {
        eval_min(e, &self.by_binder)
    }
}

fn eval_min(e: &Cfe, by_binder: &BTreeMap<String, usize>) -> usize {
    match e {
        Cfe::Phi => usize::MAX,
        Cfe::Eps => 0,
        Cfe::Sym(_) => 1,
        // Unknown names only turn up on expressions the enumerator never
        // builds; 0 is the safe direction (no wrong pruning).
        Cfe::Var(name) | Cfe::Mu(name, _) => *by_binder.get(name).unwrap_or(&0),
        Cfe::Alt(l, r) => eval_min(l, by_binder).min(eval_min(r, by_binder)),
        Cfe::Cat(l, r) => eval_min(l, by_binder).saturating_add(eval_min(r, by_binder)),
    }
}

fn sweep(e: &Cfe, depth: usize, budget: usize, min: &MinYield) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    if min.of(e) > budget {
        return out;
    }
    match e {
        Cfe::Phi => {}
        Cfe::Eps => {
            out.insert(String::new());
        }
        Cfe::Sym(x) => {
            out.insert(x.to_string());
        }
        Cfe::Var(_) => {
            // Enumeration substitutes before descending, so placeholders
            // cannot be reached from a closed expression.
        }
        Cfe::Alt(l, r) => {
            out.extend(sweep(l, depth, budget, min));
            out.extend(sweep(r, depth, budget, min));
        }
        Cfe::Cat(l, r) => {
            let right_min = min.of(r);
            for u in sweep(l, depth, budget - right_min, min) {
                for v in sweep(r, depth, budget - u.chars().count(), min) {
                    let mut w = u.clone();
                    w.push_str(&v);
                    out.insert(w);
                }
            }
        }
        Cfe::Mu(_, _) => {
            if depth > 0 {
                let unfolded = e.unfold().expect("mu unfolds");
                out.extend(sweep(&unfolded, depth - 1, budget, min));
            }
        }
    }
    out
}

impl fmt::Display for Cfe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        render(self, 1, f)
    }
}

// Precedence levels: mu 0 (its body extends right as far as possible),
// alternation 1, concatenation 2, atoms 4.
fn prec(e: &Cfe) -> u8 {
    match e {
        Cfe::Phi | Cfe::Eps | Cfe::Sym(_) | Cfe::Var(_) => 4,
        Cfe::Cat(..) => 2,
        Cfe::Alt(..) => 1,
        Cfe::Mu(..) => 0,
    }
}

fn render(e: &Cfe, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let wrap = prec(e) < min;
    if wrap {
        f.write_str("(")?;
    }
    match e {
        Cfe::Phi => f.write_str("0")?,
        Cfe::Eps => f.write_str("1")?,
        Cfe::Sym(x) => write!(f, "{x}")?,
        Cfe::Var(name) => f.write_str(name)?,
        Cfe::Alt(l, r) => {
            render(l, 2, f)?;
            f.write_str("+")?;
            render(r, 1, f)?;
        }
        Cfe::Cat(l, r) => {
            render(l, 3, f)?;
            f.write_str(".")?;
            render(r, 2, f)?;
        }
        Cfe::Mu(name, body) => {
            write!(f, "mu {name}. ")?;
            render(body, 0, f)?;
        }
    }
    if wrap {
        f.write_str(")")?;
    }
    Ok(())
}
