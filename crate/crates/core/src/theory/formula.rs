//! First-order formulas over a relational signature, with optional
//! relativization of quantifiers to Gaifman balls.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{domain, Error, Result};
use crate::structure::{Signature, Structure};
use crate::theory::types::TypeN;

pub type Var = usize;

/// Restricts a quantifier to `V^radius` of the listed variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Bound {
    pub radius: u32,
    pub centers: Vec<Var>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    /// `R(x_i1, ..., x_ik)`, `sym` indexing the structure's signature.
    Rel { sym: usize, args: Vec<Var> },
    Eq(Var, Var),
    /// Distance predicate `D^k(x, y)` of structures carrying distance predicates.
    Dist { k: u32, x: Var, y: Var },
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Exists { var: Var, bound: Option<Bound>, body: Box<Formula> },
    Forall { var: Var, bound: Option<Bound>, body: Box<Formula> },
}

impl Formula {
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn exists(var: Var, body: Formula) -> Formula {
        Formula::Exists { var, bound: None, body: Box::new(body) }
    }

    pub fn forall(var: Var, body: Formula) -> Formula {
        Formula::Forall { var, bound: None, body: Box::new(body) }
    }

    pub fn rel(sym: usize, args: Vec<Var>) -> Formula {
        Formula::Rel { sym, args }
    }

    /// Quantifier rank.
    pub fn depth(&self) -> u32 {
        match self {
            Formula::True | Formula::False | Formula::Rel { .. } | Formula::Eq(..) | Formula::Dist { .. } => 0,
            Formula::Not(f) => f.depth(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().map(Formula::depth).max().unwrap_or(0),
            Formula::Exists { body, .. } | Formula::Forall { body, .. } => 1 + body.depth(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Var>, out: &mut BTreeSet<Var>) {
        let mut add = |v: Var, bound: &Vec<Var>| {
            if !bound.contains(&v) {
                out.insert(v);
            }
        };
        match self {
            Formula::True | Formula::False => {}
            Formula::Rel { args, .. } => args.iter().for_each(|&v| add(v, bound)),
            Formula::Eq(x, y) | Formula::Dist { x, y, .. } => {
                add(*x, bound);
                add(*y, bound);
            }
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_free(bound, out)),
            Formula::Exists { var, bound: b, body } | Formula::Forall { var, bound: b, body } => {
                if let Some(b) = b {
                    b.centers.iter().for_each(|&v| add(v, bound));
                }
                bound.push(*var);
                body.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Largest variable index mentioned anywhere, bound or free.
    pub fn max_var(&self) -> Option<Var> {
        match self {
            Formula::True | Formula::False => None,
            Formula::Rel { args, .. } => args.iter().copied().max(),
            Formula::Eq(x, y) | Formula::Dist { x, y, .. } => Some(*x.max(y)),
            Formula::Not(f) => f.max_var(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().filter_map(Formula::max_var).max(),
            Formula::Exists { var, bound, body } | Formula::Forall { var, bound, body } => {
                let c = bound.as_ref().and_then(|b| b.centers.iter().copied().max());
                [Some(*var), c, body.max_var()].into_iter().flatten().max()
            }
        }
    }

    /// Every quantifier relativized to `V^radius(centers)`.
    pub fn relativize(&self, radius: u32, centers: &[Var]) -> Formula {
        let bound = Bound { radius, centers: centers.to_vec() };
        match self {
            Formula::Not(f) => Formula::not(f.relativize(radius, centers)),
            Formula::And(fs) => Formula::And(fs.iter().map(|f| f.relativize(radius, centers)).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|f| f.relativize(radius, centers)).collect()),
            Formula::Exists { var, body, .. } => Formula::Exists {
                var: *var,
                bound: Some(bound),
                body: Box::new(body.relativize(radius, centers)),
            },
            Formula::Forall { var, body, .. } => Formula::Forall {
                var: *var,
                bound: Some(bound),
                body: Box::new(body.relativize(radius, centers)),
            },
            atom => atom.clone(),
        }
    }

    /// Every quantifier carries a bound of the given radius.
    pub fn is_local(&self, radius: u32) -> bool {
        match self {
            Formula::Not(f) => f.is_local(radius),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().all(|f| f.is_local(radius)),
            Formula::Exists { bound, body, .. } | Formula::Forall { bound, body, .. } => {
                bound.as_ref().is_some_and(|b| b.radius == radius) && body.is_local(radius)
            }
            _ => true,
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn list(f: &mut fmt::Formatter<'_>, head: &str, fs: &[Formula]) -> fmt::Result {
            write!(f, "({head}")?;
            for x in fs {
                write!(f, " {x}")?;
            }
            write!(f, ")")
        }
        fn quant(f: &mut fmt::Formatter<'_>, q: &str, var: Var, bound: &Option<Bound>, body: &Formula) -> fmt::Result {
            match bound {
                None => write!(f, "({q} x{var} {body})"),
                Some(b) => {
                    let cs: Vec<String> = b.centers.iter().map(|c| format!("x{c}")).collect();
                    write!(f, "({q}-near {} [{}] x{var} {body})", b.radius, cs.join(" "))
                }
            }
        }
        match self {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::Rel { sym, args } => {
                write!(f, "(R{sym}")?;
                for a in args {
                    write!(f, " x{a}")?;
                }
                write!(f, ")")
            }
            Formula::Eq(x, y) => write!(f, "(= x{x} x{y})"),
            Formula::Dist { k, x, y } => write!(f, "(D{k} x{x} x{y})"),
            Formula::Not(g) => write!(f, "(not {g})"),
            Formula::And(fs) => list(f, "and", fs),
            Formula::Or(fs) => list(f, "or", fs),
            Formula::Exists { var, bound, body } => quant(f, "exists", *var, bound, body),
            Formula::Forall { var, bound, body } => quant(f, "forall", *var, bound, body),
        }
    }
}

/// Tarskian truth of `phi` at `tuple` (variable `i` is `tuple[i]`).
pub fn eval_formula(m: &Structure, phi: &Formula, tuple: &[usize]) -> Result<bool> {
    for &e in tuple {
        m.check_element(e)?;
    }
    if let Some(v) = phi.free_vars().into_iter().find(|&v| v >= tuple.len()) {
        return domain(format!("free variable x{v} is unbound"));
    }
    let width = phi.max_var().map_or(0, |v| v + 1).max(tuple.len());
    let mut env: Vec<Option<usize>> = vec![None; width];
    for (i, &e) in tuple.iter().enumerate() {
        env[i] = Some(e);
    }
    eval(m, phi, &mut env)
}

fn lookup(env: &[Option<usize>], v: Var) -> Result<usize> {
    env.get(v).copied().flatten().ok_or_else(|| Error::Domain(format!("variable x{v} is unbound")))
}

fn eval(m: &Structure, phi: &Formula, env: &mut Vec<Option<usize>>) -> Result<bool> {
    Ok(match phi {
        Formula::True => true,
        Formula::False => false,
        Formula::Rel { sym, args } => {
            if *sym >= m.signature().len() || m.signature().arity(*sym) != args.len() {
                return domain(format!("atom R{sym} does not match the signature"));
            }
            let t = args.iter().map(|&v| lookup(env, v)).collect::<Result<Vec<_>>>()?;
            m.holds(*sym, &t)
        }
        Formula::Eq(x, y) => lookup(env, *x)? == lookup(env, *y)?,
        Formula::Dist { k, x, y } => {
            let dp = m
                .distance_predicates()
                .filter(|dp| *k <= dp.cap)
                .ok_or_else(|| Error::Domain(format!("structure has no predicate D^{k}")))?;
            dp.distance(lookup(env, *x)?, lookup(env, *y)?).within(*k as u64)
        }
        Formula::Not(f) => !eval(m, f, env)?,
        Formula::And(fs) => {
            for f in fs {
                if !eval(m, f, env)? {
                    return Ok(false);
                }
            }
            true
        }
        Formula::Or(fs) => {
            for f in fs {
                if eval(m, f, env)? {
                    return Ok(true);
                }
            }
            false
        }
        Formula::Exists { var, bound, body } | Formula::Forall { var, bound, body } => {
            let want = matches!(phi, Formula::Exists { .. });
            let centers = match bound {
                Some(b) => Some(b.centers.iter().map(|&v| lookup(env, v)).collect::<Result<Vec<_>>>()?),
                None => None,
            };
            let saved = env[*var];
            let mut result = !want;
            for e in 0..m.size() {
                if let (Some(b), Some(cs)) = (bound, &centers) {
                    if !m.dist_to_tuple(cs, e).within(b.radius as u64) {
                        continue;
                    }
                }
                env[*var] = Some(e);
                if eval(m, body, env)? == want {
                    result = want;
                    break;
                }
            }
            env[*var] = saved;
            result
        }
    })
}

/// The Hintikka formula of `t`: true at `(M, ā)` iff `Th^n(M; ā) = t`, over
/// structures with signature `sig`. Its depth is exactly `n` unless the
/// universe is empty.
///
/// Free variables are `x0..x{ℓ-1}`; the quantified variable at nesting level
/// `i` is `x{ℓ+i}`. Absent parameters contribute no conjuncts.
pub fn characteristic_formula(t: TypeN, sig: &Signature) -> Result<Formula> {
    if let Some(t0) = t.type0() {
        return atomic_diagram(&t0, sig);
    }
    let arity = t.arity();
    let fresh = arity;
    let base = t.base();
    // extensions repeating a parameter are not stored; rebuild them so that
    // every branch reaches full depth
    let low = t.reduce_depth(t.depth() - 1)?;
    let mut kids = Vec::new();
    for p in (0..arity).filter(|&p| base.class_of(p) == Some(p)) {
        let map: Vec<Option<usize>> = (0..arity).map(Some).chain([Some(p)]).collect();
        kids.push(low.reindex(&map)?);
    }
    kids.extend(t.children());
    let mut conj = vec![atomic_diagram(&base, sig)?];
    let mut alternatives = Vec::new();
    for c in kids {
        let phi = characteristic_formula(c, sig)?;
        conj.push(Formula::exists(fresh, phi.clone()));
        alternatives.push(phi);
    }
    conj.push(Formula::forall(fresh, Formula::Or(alternatives)));
    Ok(Formula::And(conj))
}

fn atomic_diagram(t0: &crate::theory::types::Type0, sig: &Signature) -> Result<Formula> {
    let present: Vec<usize> = (0..t0.arity()).filter(|&p| t0.is_present(p)).collect();
    for (name, _) in t0.atoms() {
        if sig.index_of(&name).is_none() {
            return domain(format!("symbol {name} is not in the signature"));
        }
    }
    let mut lits = Vec::new();
    for (i, &p) in present.iter().enumerate() {
        for &q in &present[i + 1..] {
            let eq = Formula::Eq(p, q);
            lits.push(if t0.class_of(p) == t0.class_of(q) { eq } else { Formula::not(eq) });
        }
    }
    for (sym, s) in sig.symbols().iter().enumerate() {
        let mut idx = vec![0usize; s.arity];
        if present.is_empty() {
            continue;
        }
        loop {
            let args: Vec<usize> = idx.iter().map(|&i| present[i]).collect();
            let atom = Formula::rel(sym, args.clone());
            lits.push(if t0.holds(&s.name, &args) { atom } else { Formula::not(atom) });
            let mut k = s.arity;
            loop {
                if k == 0 {
                    break;
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < present.len() {
                    break;
                }
                idx[k] = 0;
            }
            if idx.iter().all(|&i| i == 0) {
                break;
            }
        }
    }
    if let Some(cap) = t0.distance_cap() {
        for (i, &p) in present.iter().enumerate() {
            for &q in &present[i + 1..] {
                let d = t0.capped_distance(p, q).unwrap();
                for k in 0..=cap {
                    let atom = Formula::Dist { k, x: p, y: q };
                    lits.push(if d <= k { atom } else { Formula::not(atom) });
                }
            }
        }
    }
    Ok(Formula::And(lits))
}

/// Parses the s-expression syntax used on the command line:
///
/// ```text
/// true | false | (= x y) | (R x y ..) | (not f) | (and f ..) | (or f ..)
/// (exists y f) | (forall y f)
/// ```
///
/// `x0, x1, ..` are the free variables; any other identifier in binding
/// position introduces a fresh bound variable.
pub fn parse_formula(src: &str, sig: &Signature) -> Result<Formula> {
    let tokens = tokenize(src);
    let mut pos = 0;
    let mut scope: Vec<(String, Var)> = Vec::new();
    let mut next_fresh = max_free_index(&tokens).map_or(0, |v| v + 1);
    let f = parse_expr(&tokens, &mut pos, sig, &mut scope, &mut next_fresh)?;
    if pos != tokens.len() {
        return Err(Error::Parse { line: 1, msg: format!("trailing input at token {pos}") });
    }
    Ok(f)
}

fn tokenize(src: &str) -> Vec<String> {
    src.replace('(', " ( ").replace(')', " ) ").split_whitespace().map(String::from).collect()
}

fn free_index(tok: &str) -> Option<usize> {
    tok.strip_prefix('x').and_then(|d| d.parse().ok())
}

fn max_free_index(tokens: &[String]) -> Option<usize> {
    tokens.iter().filter_map(|t| free_index(t)).max()
}

fn perr<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse { line: 1, msg: msg.into() })
}

fn resolve(tok: &str, scope: &[(String, Var)]) -> Result<Var> {
    if let Some((_, v)) = scope.iter().rev().find(|(n, _)| n == tok) {
        return Ok(*v);
    }
    free_index(tok).map_or_else(|| perr(format!("unbound variable {tok}")), Ok)
}

fn parse_expr(
    toks: &[String],
    pos: &mut usize,
    sig: &Signature,
    scope: &mut Vec<(String, Var)>,
    fresh: &mut Var,
) -> Result<Formula> {
    let tok = toks.get(*pos).ok_or(Error::Parse { line: 1, msg: "unexpected end".into() })?;
    *pos += 1;
    match tok.as_str() {
        "true" => return Ok(Formula::True),
        "false" => return Ok(Formula::False),
        "(" => {}
        other => return perr(format!("unexpected token {other}")),
    }
    let head = toks.get(*pos).cloned().ok_or(Error::Parse { line: 1, msg: "unexpected end".into() })?;
    *pos += 1;
    let f = match head.as_str() {
        "not" => Formula::not(parse_expr(toks, pos, sig, scope, fresh)?),
        "and" | "or" => {
            let mut fs = Vec::new();
            while toks.get(*pos).map(String::as_str) != Some(")") {
                fs.push(parse_expr(toks, pos, sig, scope, fresh)?);
            }
            if head == "and" {
                Formula::And(fs)
            } else {
                Formula::Or(fs)
            }
        }
        "exists" | "forall" => {
            let name = toks.get(*pos).cloned().ok_or(Error::Parse { line: 1, msg: "missing variable".into() })?;
            *pos += 1;
            let var = *fresh;
            *fresh += 1;
            scope.push((name, var));
            let body = parse_expr(toks, pos, sig, scope, fresh)?;
            scope.pop();
            if head == "exists" {
                Formula::exists(var, body)
            } else {
                Formula::forall(var, body)
            }
        }
        "=" => {
            let x = resolve(&toks[*pos], scope)?;
            let y = resolve(&toks[*pos + 1], scope)?;
            *pos += 2;
            Formula::Eq(x, y)
        }
        name => {
            let sym = sig.index_of(name).map_or_else(|| perr(format!("unknown symbol {name}")), Ok)?;
            let mut args = Vec::new();
            while toks.get(*pos).map(String::as_str) != Some(")") {
                let t = toks.get(*pos).ok_or(Error::Parse { line: 1, msg: "unexpected end".into() })?;
                args.push(resolve(t, scope)?);
                *pos += 1;
            }
            if args.len() != sig.arity(sym) {
                return perr(format!("{name} expects {} arguments", sig.arity(sym)));
            }
            Formula::rel(sym, args)
        }
    };
    if toks.get(*pos).map(String::as_str) != Some(")") {
        return perr("expected )");
    }
    *pos += 1;
    Ok(f)
}
