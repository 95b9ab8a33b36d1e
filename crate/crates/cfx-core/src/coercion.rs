//! The target language for synthesized coercions: lambda terms over
//! parse-tree constructors, with pattern matching, general recursion,
//! and named primitives supplied by a registry.
//!
//! Evaluation is dynamically checked rather than typed. A stuck step
//! (applying a non-function, a pattern mismatch, an unmatched case)
//! yields the first-class value [`Value::Wrong`] instead of an error,
//! so a synthesized coercion that is wrong somewhere still runs to an
//! inspectable result. Recursion is unrestricted; callers bound it with
//! [`Fuel`].

use std::collections::{BTreeMap, BTreeSet};
use std::rc::Rc;
use std::sync::Arc;

use serde_json::Value as Json;
use thiserror::Error;

use crate::regex::Symbol;
use crate::trees::ParseTree;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Constructor {
    Eps,
    Sym,
    Inl,
    Inr,
    Seq,
    Fold,
    Just,
    Nothing,
    Pair,
    /// A symbol literal; the payload of a `Sym` node.
    Lit(Symbol),
}

impl Constructor {
    pub fn arity(&self) -> usize {
        match self {
            Constructor::Eps | Constructor::Nothing | Constructor::Lit(_) => 0,
            Constructor::Sym
            | Constructor::Inl
            | Constructor::Inr
            | Constructor::Fold
            | Constructor::Just => 1,
            Constructor::Seq | Constructor::Pair => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Pattern {
    Var(String),
    Con(Constructor, Vec<Pattern>),
}

impl Pattern {
    pub fn var(name: impl Into<String>) -> Pattern {
        Pattern::Var(name.into())
    }

    pub fn con(c: Constructor, args: Vec<Pattern>) -> Pattern {
        Pattern::Con(c, args)
    }

    fn collect_names<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Pattern::Var(n) => out.push(n),
            Pattern::Con(_, args) => {
                for a in args {
                    a.collect_names(out);
                }
            }
        }
    }

    pub fn names(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_names(&mut out);
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoercionTerm {
    Var(String),
    Con(Constructor, Vec<CoercionTerm>),
    Lam(Pattern, Rc<CoercionTerm>),
    App(Box<CoercionTerm>, Box<CoercionTerm>),
    Rec(String, Rc<CoercionTerm>),
    Case(Box<CoercionTerm>, Vec<(Pattern, CoercionTerm)>),
    Prim(String),
}

impl CoercionTerm {
    pub fn var(name: impl Into<String>) -> CoercionTerm {
        CoercionTerm::Var(name.into())
    }

    pub fn con(c: Constructor, args: Vec<CoercionTerm>) -> CoercionTerm {
        CoercionTerm::Con(c, args)
    }

    pub fn lam(pat: Pattern, body: CoercionTerm) -> CoercionTerm {
        CoercionTerm::Lam(pat, Rc::new(body))
    }

    pub fn app(f: CoercionTerm, a: CoercionTerm) -> CoercionTerm {
        CoercionTerm::App(Box::new(f), Box::new(a))
    }

    pub fn rec(name: impl Into<String>, body: CoercionTerm) -> CoercionTerm {
        CoercionTerm::Rec(name.into(), Rc::new(body))
    }

    pub fn case(scrut: CoercionTerm, branches: Vec<(Pattern, CoercionTerm)>) -> CoercionTerm {
        CoercionTerm::Case(Box::new(scrut), branches)
    }

    pub fn prim(id: impl Into<String>) -> CoercionTerm {
        CoercionTerm::Prim(id.into())
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            CoercionTerm::Var(n) => {
                if !bound.iter().any(|b| b == n) {
                    out.insert(n.clone());
                }
            }
            CoercionTerm::Con(_, args) => {
                for a in args {
                    a.collect_free(bound, out);
                }
            }
            CoercionTerm::Lam(pat, body) => {
                let depth = bound.len();
                bound.extend(pat.names().into_iter().map(String::from));
                body.collect_free(bound, out);
                bound.truncate(depth);
            }
            CoercionTerm::App(f, a) => {
                f.collect_free(bound, out);
                a.collect_free(bound, out);
            }
            CoercionTerm::Rec(name, body) => {
                bound.push(name.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
            CoercionTerm::Case(scrut, branches) => {
                scrut.collect_free(bound, out);
                for (pat, body) in branches {
                    let depth = bound.len();
                    bound.extend(pat.names().into_iter().map(String::from));
                    body.collect_free(bound, out);
                    bound.truncate(depth);
                }
            }
            CoercionTerm::Prim(_) => {}
        }
    }
}

/// Runtime values. `Wrong` marks a stuck evaluation; it flows through
/// constructors and case scrutinees like any other value.
#[derive(Clone, Debug)]
pub enum Value {
    Wrong,
    Con(Constructor, Vec<Value>),
    Closure {
        pat: Pattern,
        body: Rc<CoercionTerm>,
        env: Env,
    },
    RecClosure {
        name: String,
        body: Rc<CoercionTerm>,
        env: Env,
    },
    Prim(String),
}

impl PartialEq for Value {
    /// Data compares structurally; functions compare equal to nothing,
    /// themselves included.
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Value::Wrong, Value::Wrong) => true,
            (Value::Con(a, xs), Value::Con(b, ys)) => a == b && xs == ys,
            _ => false,
        }
    }
}

impl Value {
    pub fn is_wrong(&self) -> bool {
        matches!(self, Value::Wrong)
    }
}

#[derive(Clone, Debug, Default)]
pub struct Env(BTreeMap<String, Value>);

impl Env {
    pub fn new() -> Env {
        Env::default()
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.0.get(name)
    }

    pub fn insert(&mut self, name: String, v: Value) {
        self.0.insert(name, v);
    }

    pub fn with(&self, name: String, v: Value) -> Env {
        let mut out = self.clone();
        out.insert(name, v);
        out
    }
}

type PrimFn = Arc<dyn Fn(&Value) -> Value + Send + Sync>;

/// Named primitive functions a term may call through
/// [`CoercionTerm::Prim`]. Filled in by the synthesizer, read-only
/// during evaluation.
#[derive(Clone, Default)]
pub struct PrimRegistry {
    fns: BTreeMap<String, PrimFn>,
}

impl PrimRegistry {
    pub fn new() -> PrimRegistry {
        PrimRegistry::default()
    }

    pub fn register(
        &mut self,
        id: impl Into<String>,
        f: impl Fn(&Value) -> Value + Send + Sync + 'static,
    ) {
        self.fns.insert(id.into(), Arc::new(f));
    }

    pub fn contains(&self, id: &str) -> bool {
        self.fns.contains_key(id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.fns.keys().map(String::as_str)
    }

    fn get(&self, id: &str) -> Option<&PrimFn> {
        self.fns.get(id)
    }
}

impl std::fmt::Debug for PrimRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(self.fns.keys()).finish()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fuel {
    Unlimited,
    Limited(u64),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CoercionError {
    #[error("evaluation did not finish within {0} steps")]
    Diverged(u64),
    #[error("coercion produced a wrong value")]
    WrongResult,
    #[error("primitive `{0}` is not registered")]
    UnregisteredPrim(String),
}

struct Gauge {
    limit: u64,
    remaining: Option<u64>,
}

impl Gauge {
    fn new(fuel: Fuel) -> Gauge {
        match fuel {
            Fuel::Unlimited => Gauge {
                limit: 0,
                remaining: None,
            },
            Fuel::Limited(n) => Gauge {
                limit: n,
                remaining: Some(n),
            },
        }
    }

    fn tick(&mut self) -> Result<(), CoercionError> {
        if let Some(n) = &mut self.remaining {
            if *n == 0 {
                return Err(CoercionError::Diverged(self.limit));
            }
            *n -= 1;
        }
        Ok(())
    }
}

pub fn eval(
    term: &CoercionTerm,
    env: &Env,
    registry: &PrimRegistry,
    fuel: Fuel,
) -> Result<Value, CoercionError> {
    let mut gauge = Gauge::new(fuel);
    eval_in(term, env, registry, &mut gauge)
}

/// Evaluates `c` applied to `args`: one argument directly, two as a
/// pair. The result may be `Wrong`; callers that expect a shaped value
/// map that to [`CoercionError::WrongResult`] at the decoding step.
pub fn apply_coercion(
    c: &CoercionTerm,
    args: &[Value],
    registry: &PrimRegistry,
    fuel: Fuel,
) -> Result<Value, CoercionError> {
    let mut gauge = Gauge::new(fuel);
    let f = eval_in(c, &Env::new(), registry, &mut gauge)?;
    let arg = match args {
        [v] => v.clone(),
        [v1, v2] => Value::Con(Constructor::Pair, vec![v1.clone(), v2.clone()]),
        _ => panic!("coercions take one or two arguments, got {}", args.len()),
    };
    apply_value(&f, arg, registry, &mut gauge)
}

fn eval_in(
    term: &CoercionTerm,
    env: &Env,
    registry: &PrimRegistry,
    gauge: &mut Gauge,
) -> Result<Value, CoercionError> {
    // Evaluation depth is bounded by fuel rather than by the machine
    // stack, so grow the stack in segments when terms nest deeply.
    stacker::maybe_grow(64 * 1024, 16 * 1024 * 1024, || {
        eval_step(term, env, registry, gauge)
    })
}

fn eval_step(
    term: &CoercionTerm,
    env: &Env,
    registry: &PrimRegistry,
    gauge: &mut Gauge,
) -> Result<Value, CoercionError> {
    gauge.tick()?;
    match term {
        CoercionTerm::Var(name) => match env.get(name) {
            None => Ok(Value::Wrong),
            Some(Value::RecClosure {
                name: rec_name,
                body,
                env: captured,
            }) => {
                // Re-enter the recursive definition with itself in
                // scope; each lookup unrolls one level.
                let unrolled = captured.with(
                    rec_name.clone(),
                    Value::RecClosure {
                        name: rec_name.clone(),
                        body: Rc::clone(body),
                        env: captured.clone(),
                    },
                );
                let body = Rc::clone(body);
                eval_in(&body, &unrolled, registry, gauge)
            }
            Some(v) => Ok(v.clone()),
        },
        CoercionTerm::Con(c, args) => {
            let mut vs = Vec::with_capacity(args.len());
            for a in args {
                let v = eval_in(a, env, registry, gauge)?;
                if v.is_wrong() {
                    return Ok(Value::Wrong);
                }
                vs.push(v);
            }
            Ok(Value::Con(c.clone(), vs))
        }
        CoercionTerm::Lam(pat, body) => Ok(Value::Closure {
            pat: pat.clone(),
            body: Rc::clone(body),
            env: env.clone(),
        }),
        CoercionTerm::App(f, a) => {
            let fv = eval_in(f, env, registry, gauge)?;
            let av = eval_in(a, env, registry, gauge)?;
            apply_value(&fv, av, registry, gauge)
        }
        CoercionTerm::Rec(name, body) => {
            let knot = env.with(
                name.clone(),
                Value::RecClosure {
                    name: name.clone(),
                    body: Rc::clone(body),
                    env: env.clone(),
                },
            );
            eval_in(body, &knot, registry, gauge)
        }
        CoercionTerm::Case(scrut, branches) => {
            let sv = eval_in(scrut, env, registry, gauge)?;
            for (pat, body) in branches {
                if let Some(binds) = match_pattern(pat, &sv) {
                    let mut inner = env.clone();
                    for (n, v) in binds {
                        inner.insert(n, v);
                    }
                    return eval_in(body, &inner, registry, gauge);
                }
            }
            Ok(Value::Wrong)
        }
        CoercionTerm::Prim(id) => Ok(Value::Prim(id.clone())),
    }
}

fn apply_value(
    f: &Value,
    arg: Value,
    registry: &PrimRegistry,
    gauge: &mut Gauge,
) -> Result<Value, CoercionError> {
    gauge.tick()?;
    match f {
        Value::Closure { pat, body, env } => match match_pattern(pat, &arg) {
            Some(binds) => {
                let mut inner = env.clone();
                for (n, v) in binds {
                    inner.insert(n, v);
                }
                eval_in(body, &inner, registry, gauge)
            }
            None => Ok(Value::Wrong),
        },
        Value::RecClosure { name, body, env } => {
            let unrolled = env.with(
                name.clone(),
                Value::RecClosure {
                    name: name.clone(),
                    body: Rc::clone(body),
                    env: env.clone(),
                },
            );
            let forced = eval_in(body, &unrolled, registry, gauge)?;
            apply_value(&forced, arg, registry, gauge)
        }
        Value::Prim(id) => match registry.get(id) {
            Some(f) => Ok(f(&arg)),
            None => Err(CoercionError::UnregisteredPrim(id.clone())),
        },
        Value::Wrong | Value::Con(..) => Ok(Value::Wrong),
    }
}

/// A variable matches anything, `Wrong` and functions included; a
/// constructor pattern matches only the same constructor.
fn match_pattern(pat: &Pattern, v: &Value) -> Option<Vec<(String, Value)>> {
    let mut binds = Vec::new();
    if match_into(pat, v, &mut binds) {
        Some(binds)
    } else {
        None
    }
}

fn match_into(pat: &Pattern, v: &Value, binds: &mut Vec<(String, Value)>) -> bool {
    match (pat, v) {
        (Pattern::Var(n), _) => {
            binds.push((n.clone(), v.clone()));
            true
        }
        (Pattern::Con(pc, ps), Value::Con(vc, vs)) => {
            pc == vc
                && ps.len() == vs.len()
                && ps.iter().zip(vs).all(|(p, v)| match_into(p, v, binds))
        }
        (Pattern::Con(..), _) => false,
    }
}

pub fn tree_to_value(t: &ParseTree) -> Value {
    match t {
        ParseTree::Eps => Value::Con(Constructor::Eps, vec![]),
        ParseTree::Sym(x) => Value::Con(
            Constructor::Sym,
            vec![Value::Con(Constructor::Lit(*x), vec![])],
        ),
        ParseTree::Inl(t) => Value::Con(Constructor::Inl, vec![tree_to_value(t)]),
        ParseTree::Inr(t) => Value::Con(Constructor::Inr, vec![tree_to_value(t)]),
        ParseTree::Seq(l, r) => {
            Value::Con(Constructor::Seq, vec![tree_to_value(l), tree_to_value(r)])
        }
        ParseTree::Fold(t) => Value::Con(Constructor::Fold, vec![tree_to_value(t)]),
    }
}

pub fn value_to_tree(v: &Value) -> Option<ParseTree> {
    match v {
        Value::Con(Constructor::Eps, args) if args.is_empty() => Some(ParseTree::Eps),
        Value::Con(Constructor::Sym, args) => match args.as_slice() {
            [Value::Con(Constructor::Lit(x), lit_args)] if lit_args.is_empty() => {
                Some(ParseTree::Sym(*x))
            }
            _ => None,
        },
        Value::Con(Constructor::Inl, args) => match args.as_slice() {
            [t] => Some(ParseTree::inl(value_to_tree(t)?)),
            _ => None,
        },
        Value::Con(Constructor::Inr, args) => match args.as_slice() {
            [t] => Some(ParseTree::inr(value_to_tree(t)?)),
            _ => None,
        },
        Value::Con(Constructor::Seq, args) => match args.as_slice() {
            [l, r] => Some(ParseTree::seq(value_to_tree(l)?, value_to_tree(r)?)),
            _ => None,
        },
        Value::Con(Constructor::Fold, args) => match args.as_slice() {
            [t] => Some(ParseTree::fold(value_to_tree(t)?)),
            _ => None,
        },
        _ => None,
    }
}

/// `Just x` gives `Some(Some(x))`, `Nothing` gives `Some(None)`,
/// anything else `None`.
pub fn as_maybe(v: &Value) -> Option<Option<&Value>> {
    match v {
        Value::Con(Constructor::Just, args) => match args.as_slice() {
            [x] => Some(Some(x)),
            _ => None,
        },
        Value::Con(Constructor::Nothing, args) if args.is_empty() => Some(None),
        _ => None,
    }
}

pub fn as_pair(v: &Value) -> Option<(&Value, &Value)> {
    match v {
        Value::Con(Constructor::Pair, args) => match args.as_slice() {
            [a, b] => Some((a, b)),
            _ => None,
        },
        _ => None,
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TermJsonError {
    #[error("expected an object with a \"tag\" field")]
    NotAnObject,
    #[error("unknown tag `{0}`")]
    UnknownTag(String),
    #[error("unknown constructor `{0}`")]
    UnknownConstructor(String),
    #[error("missing field `{0}`")]
    MissingField(&'static str),
    #[error("field `sym` must hold a single character")]
    BadSymbol,
    #[error("constructor `{con}` takes {expected} arguments, got {got}")]
    ArityMismatch {
        con: String,
        expected: usize,
        got: usize,
    },
    #[error("pattern binds `{0}` more than once")]
    NonLinearPattern(String),
}

fn con_name(c: &Constructor) -> &'static str {
    match c {
        Constructor::Eps => "Eps",
        Constructor::Sym => "Sym",
        Constructor::Inl => "Inl",
        Constructor::Inr => "Inr",
        Constructor::Seq => "Seq",
        Constructor::Fold => "Fold",
        Constructor::Just => "Just",
        Constructor::Nothing => "Nothing",
        Constructor::Pair => "Pair",
        Constructor::Lit(_) => "Lit",
    }
}

fn con_to_json(c: &Constructor, obj: &mut serde_json::Map<String, Json>) {
    obj.insert("con".into(), con_name(c).into());
    if let Constructor::Lit(x) = c {
        obj.insert("sym".into(), x.to_string().into());
    }
}

fn con_from_json(obj: &serde_json::Map<String, Json>) -> Result<Constructor, TermJsonError> {
    let name = obj
        .get("con")
        .and_then(Json::as_str)
        .ok_or(TermJsonError::MissingField("con"))?;
    match name {
        "Eps" => Ok(Constructor::Eps),
        "Sym" => Ok(Constructor::Sym),
        "Inl" => Ok(Constructor::Inl),
        "Inr" => Ok(Constructor::Inr),
        "Seq" => Ok(Constructor::Seq),
        "Fold" => Ok(Constructor::Fold),
        "Just" => Ok(Constructor::Just),
        "Nothing" => Ok(Constructor::Nothing),
        "Pair" => Ok(Constructor::Pair),
        "Lit" => {
            let s = obj
                .get("sym")
                .and_then(Json::as_str)
                .ok_or(TermJsonError::MissingField("sym"))?;
            let mut chars = s.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) => Ok(Constructor::Lit(c)),
                _ => Err(TermJsonError::BadSymbol),
            }
        }
        other => Err(TermJsonError::UnknownConstructor(other.to_string())),
    }
}

fn pattern_to_json(p: &Pattern) -> Json {
    let mut obj = serde_json::Map::new();
    match p {
        Pattern::Var(n) => {
            obj.insert("tag".into(), "PVar".into());
            obj.insert("name".into(), n.as_str().into());
        }
        Pattern::Con(c, args) => {
            obj.insert("tag".into(), "PCon".into());
            con_to_json(c, &mut obj);
            obj.insert(
                "args".into(),
                Json::Array(args.iter().map(pattern_to_json).collect()),
            );
        }
    }
    Json::Object(obj)
}

fn pattern_from_json(v: &Json) -> Result<Pattern, TermJsonError> {
    let obj = v.as_object().ok_or(TermJsonError::NotAnObject)?;
    let tag = obj
        .get("tag")
        .and_then(Json::as_str)
        .ok_or(TermJsonError::NotAnObject)?;
    match tag {
        "PVar" => {
            let name = obj
                .get("name")
                .and_then(Json::as_str)
                .ok_or(TermJsonError::MissingField("name"))?;
            Ok(Pattern::Var(name.to_string()))
        }
        "PCon" => {
            let con = con_from_json(obj)?;
            let args = obj
                .get("args")
                .and_then(Json::as_array)
                .ok_or(TermJsonError::MissingField("args"))?;
            if args.len() != con.arity() {
                return Err(TermJsonError::ArityMismatch {
                    con: con_name(&con).to_string(),
                    expected: con.arity(),
                    got: args.len(),
                });
            }
            let args = args
                .iter()
                .map(pattern_from_json)
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Pattern::Con(con, args))
        }
        other => Err(TermJsonError::UnknownTag(other.to_string())),
    }
}

pub fn term_to_json(t: &CoercionTerm) -> Json {
    let mut obj = serde_json::Map::new();
    match t {
        CoercionTerm::Var(n) => {
            obj.insert("tag".into(), "Var".into());
            obj.insert("name".into(), n.as_str().into());
        }
        CoercionTerm::Con(c, args) => {
            obj.insert("tag".into(), "Con".into());
            con_to_json(c, &mut obj);
            obj.insert(
                "args".into(),
                Json::Array(args.iter().map(term_to_json).collect()),
            );
        }
        CoercionTerm::Lam(pat, body) => {
            obj.insert("tag".into(), "Lam".into());
            obj.insert("pat".into(), pattern_to_json(pat));
            obj.insert("body".into(), term_to_json(body));
        }
        CoercionTerm::App(f, a) => {
            obj.insert("tag".into(), "App".into());
            obj.insert("fn".into(), term_to_json(f));
            obj.insert("arg".into(), term_to_json(a));
        }
        CoercionTerm::Rec(name, body) => {
            obj.insert("tag".into(), "Rec".into());
            obj.insert("name".into(), name.as_str().into());
            obj.insert("body".into(), term_to_json(body));
        }
        CoercionTerm::Case(scrut, branches) => {
            obj.insert("tag".into(), "Case".into());
            obj.insert("scrutinee".into(), term_to_json(scrut));
            let branches: Vec<Json> = branches
                .iter()
                .map(|(pat, body)| {
                    let mut b = serde_json::Map::new();
                    b.insert("pat".into(), pattern_to_json(pat));
                    b.insert("body".into(), term_to_json(body));
                    Json::Object(b)
                })
                .collect();
            obj.insert("branches".into(), Json::Array(branches));
        }
        CoercionTerm::Prim(id) => {
            obj.insert("tag".into(), "Prim".into());
            obj.insert("id".into(), id.as_str().into());
        }
    }
    Json::Object(obj)
}

pub fn term_from_json(v: &Json) -> Result<CoercionTerm, TermJsonError> {
    let obj = v.as_object().ok_or(TermJsonError::NotAnObject)?;
    let tag = obj
        .get("tag")
        .and_then(Json::as_str)
        .ok_or(TermJsonError::NotAnObject)?;
    let field = |name: &'static str| obj.get(name).ok_or(TermJsonError::MissingField(name));
    let str_field = |name: &'static str| {
        obj.get(name)
            .and_then(Json::as_str)
            .ok_or(TermJsonError::MissingField(name))
    };
    match tag {
        "Var" => Ok(CoercionTerm::var(str_field("name")?)),
        "Con" => {
            let con = con_from_json(obj)?;
            let args = field("args")?
                .as_array()
                .ok_or(TermJsonError::MissingField("args"))?;
            if args.len() != con.arity() {
                return Err(TermJsonError::ArityMismatch {
                    con: con_name(&con).to_string(),
                    expected: con.arity(),
                    got: args.len(),
                });
            }
            let args = args
                .iter()
                .map(term_from_json)
                .collect::<Result<Vec<_>, _>>()?;
            Ok(CoercionTerm::Con(con, args))
        }
        "Lam" => {
            let pat = pattern_from_json(field("pat")?)?;
            check_linear(&pat)?;
            Ok(CoercionTerm::lam(pat, term_from_json(field("body")?)?))
        }
        "App" => Ok(CoercionTerm::app(
            term_from_json(field("fn")?)?,
            term_from_json(field("arg")?)?,
        )),
        "Rec" => Ok(CoercionTerm::rec(
            str_field("name")?,
            term_from_json(field("body")?)?,
        )),
        "Case" => {
            let scrut = term_from_json(field("scrutinee")?)?;
            let branches = field("branches")?
                .as_array()
                .ok_or(TermJsonError::MissingField("branches"))?;
            let branches = branches
                .iter()
                .map(|b| {
                    let b = b.as_object().ok_or(TermJsonError::NotAnObject)?;
                    let pat =
                        pattern_from_json(b.get("pat").ok_or(TermJsonError::MissingField("pat"))?)?;
                    check_linear(&pat)?;
                    let body =
                        term_from_json(b.get("body").ok_or(TermJsonError::MissingField("body"))?)?;
                    Ok((pat, body))
                })
                .collect::<Result<Vec<_>, TermJsonError>>()?;
            Ok(CoercionTerm::case(scrut, branches))
        }
        "Prim" => Ok(CoercionTerm::prim(str_field("id")?)),
        other => Err(TermJsonError::UnknownTag(other.to_string())),
    }
}

fn check_linear(pat: &Pattern) -> Result<(), TermJsonError> {
    let mut seen = BTreeSet::new();
    for name in pat.names() {
        if !seen.insert(name) {
            return Err(TermJsonError::NonLinearPattern(name.to_string()));
        }
    }
    Ok(())
}
