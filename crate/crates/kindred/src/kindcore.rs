//! Kind representations and the ordered algorithmic context (telescope).
//!
//! A single [`Kind`] tree serves both inference systems: the Haskell98 engine
//! restricts itself to the mono fragment (`*`, arrows, unification variables)
//! while the PolyKinds engine additionally uses named kind variables and
//! `forall`. The [`Context`] is an ordered sequence of entries in which every
//! entry may only mention variables introduced strictly to its left; that
//! order is what makes promotion and generalization well-scoped.

use std::collections::BTreeSet;
use std::fmt;

use crate::diag::{Diagnostic, ErrorCode};

/// Identity of a unification variable: an integer from a per-run monotone
/// counter, never reused. Printed as `^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UVar(pub u32);

impl fmt::Display for UVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "^{}", self.0)
    }
}

/// Kinds. `Star`, `Arrow` and `UVar` form the Haskell98 fragment; `KVar` and
/// `Forall` only appear in PolyKinds mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Kind {
    Star,
    Arrow(Box<Kind>, Box<Kind>),
    UVar(UVar),
    KVar(String),
    Forall(String, Box<Kind>),
}

impl Kind {
    pub fn arrow(dom: Kind, cod: Kind) -> Kind {
        Kind::Arrow(Box::new(dom), Box::new(cod))
    }

    pub fn forall(var: impl Into<String>, body: Kind) -> Kind {
        Kind::Forall(var.into(), Box::new(body))
    }

    /// Number of nodes; the size component of the unification measure.
    pub fn size(&self) -> usize {
        match self {
            Kind::Star | Kind::UVar(_) | Kind::KVar(_) => 1,
            Kind::Arrow(a, b) => 1 + a.size() + b.size(),
            Kind::Forall(_, b) => 1 + b.size(),
        }
    }

    /// Closed kinds contain no unification variables.
    pub fn is_closed(&self) -> bool {
        self.free_uvars().is_empty()
    }

    /// The mono fragment: no `forall` and no named kind variables.
    pub fn is_mono(&self) -> bool {
        match self {
            Kind::Star | Kind::UVar(_) => true,
            Kind::Arrow(a, b) => a.is_mono() && b.is_mono(),
            Kind::KVar(_) | Kind::Forall(_, _) => false,
        }
    }

    /// Free unification variables in first-occurrence (preorder) order.
    pub fn free_uvars(&self) -> Vec<UVar> {
        let mut seen = Vec::new();
        fn walk(k: &Kind, seen: &mut Vec<UVar>) {
            match k {
                Kind::UVar(v) => {
                    if !seen.contains(v) {
                        seen.push(*v);
                    }
                }
                Kind::Arrow(a, b) => {
                    walk(a, seen);
                    walk(b, seen);
                }
                Kind::Forall(_, b) => walk(b, seen),
                Kind::Star | Kind::KVar(_) => {}
            }
        }
        walk(self, &mut seen);
        seen
    }

    pub fn mentions_uvar(&self, v: UVar) -> bool {
        match self {
            Kind::UVar(u) => *u == v,
            Kind::Arrow(a, b) => a.mentions_uvar(v) || b.mentions_uvar(v),
            Kind::Forall(_, b) => b.mentions_uvar(v),
            Kind::Star | Kind::KVar(_) => false,
        }
    }

    /// Kind variable names free in this kind (enclosing `forall`s bind).
    pub fn free_kvars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        fn walk(k: &Kind, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
            match k {
                Kind::KVar(n) => {
                    if !bound.iter().any(|b| b == n) {
                        out.insert(n.clone());
                    }
                }
                Kind::Arrow(a, b) => {
                    walk(a, bound, out);
                    walk(b, bound, out);
                }
                Kind::Forall(v, b) => {
                    bound.push(v.clone());
                    walk(b, bound, out);
                    bound.pop();
                }
                Kind::Star | Kind::UVar(_) => {}
            }
        }
        walk(self, &mut Vec::new(), &mut out);
        out
    }

    /// Every variable name occurring anywhere in the kind, free or bound.
    /// Used to pick fresh binder names that stay distinct along every path.
    pub fn all_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        fn walk(k: &Kind, out: &mut BTreeSet<String>) {
            match k {
                Kind::KVar(n) => {
                    out.insert(n.clone());
                }
                Kind::Arrow(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                Kind::Forall(v, b) => {
                    out.insert(v.clone());
                    walk(b, out);
                }
                Kind::Star | Kind::UVar(_) => {}
            }
        }
        walk(self, &mut out);
        out
    }

    /// Substitute `repl` for free occurrences of the kind variable `name`.
    /// `repl` must be an atom (variable or `*`), so no capture can occur.
    pub fn subst_kvar(&self, name: &str, repl: &Kind) -> Kind {
        match self {
            Kind::KVar(n) if n == name => repl.clone(),
            Kind::KVar(_) | Kind::Star | Kind::UVar(_) => self.clone(),
            Kind::Arrow(a, b) => Kind::arrow(a.subst_kvar(name, repl), b.subst_kvar(name, repl)),
            Kind::Forall(v, b) if v == name => self.clone(),
            Kind::Forall(v, b) => Kind::Forall(v.clone(), Box::new(b.subst_kvar(name, repl))),
        }
    }
}

/// Alpha-equivalence of kinds: `forall` binders are compared by position,
/// everything else structurally.
pub fn alpha_eq(a: &Kind, b: &Kind) -> bool {
    fn go(a: &Kind, b: &Kind, ea: &mut Vec<String>, eb: &mut Vec<String>) -> bool {
        match (a, b) {
            (Kind::Star, Kind::Star) => true,
            (Kind::UVar(u), Kind::UVar(v)) => u == v,
            (Kind::KVar(x), Kind::KVar(y)) => {
                let ia = ea.iter().rposition(|n| n == x);
                let ib = eb.iter().rposition(|n| n == y);
                match (ia, ib) {
                    (Some(i), Some(j)) => i == j,
                    (None, None) => x == y,
                    _ => false,
                }
            }
            (Kind::Arrow(a1, b1), Kind::Arrow(a2, b2)) => {
                go(a1, a2, ea, eb) && go(b1, b2, ea, eb)
            }
            (Kind::Forall(x, b1), Kind::Forall(y, b2)) => {
                ea.push(x.clone());
                eb.push(y.clone());
                let r = go(b1, b2, ea, eb);
                ea.pop();
                eb.pop();
                r
            }
            _ => false,
        }
    }
    go(a, b, &mut Vec::new(), &mut Vec::new())
}

fn fmt_kind(k: &Kind, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
    match k {
        Kind::Star => f.write_str("*"),
        Kind::UVar(v) => write!(f, "{v}"),
        Kind::KVar(n) => f.write_str(n),
        Kind::Arrow(a, b) => {
            if prec > 0 {
                f.write_str("(")?;
            }
            fmt_kind(a, f, 1)?;
            f.write_str(" -> ")?;
            fmt_kind(b, f, 0)?;
            if prec > 0 {
                f.write_str(")")?;
            }
            Ok(())
        }
        Kind::Forall(v, b) => {
            if prec > 0 {
                f.write_str("(")?;
            }
            write!(f, "forall {v}")?;
            // Collapse consecutive binders: forall k1 k2. body
            let mut body = b.as_ref();
            while let Kind::Forall(v2, b2) = body {
                write!(f, " {v2}")?;
                body = b2;
            }
            f.write_str(". ")?;
            fmt_kind(body, f, 0)?;
            if prec > 0 {
                f.write_str(")")?;
            }
            Ok(())
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_kind(self, f, 0)
    }
}

/// One entry of the algorithmic context.
#[derive(Debug, Clone, PartialEq)]
pub enum Entry {
    /// A type constructor with its (possibly provisional) kind.
    TyCon(String, Kind),
    /// A type variable (datatype parameter or local `forall` binder).
    TyVar(String, Kind),
    /// A rigid kind variable in scope (signature skolem or annotation binder).
    KVar(String),
    /// An unsolved unification variable.
    Unsolved(UVar),
    /// A solved unification variable with its well-scoped solution.
    Solved(UVar, Kind),
    /// A scope marker naming the inference phase that pushed it.
    Marker(String),
}

impl Entry {
    fn name(&self) -> Option<&str> {
        match self {
            Entry::TyCon(n, _) | Entry::TyVar(n, _) | Entry::KVar(n) => Some(n),
            _ => None,
        }
    }

    fn uvar(&self) -> Option<UVar> {
        match self {
            Entry::Unsolved(v) | Entry::Solved(v, _) => Some(*v),
            _ => None,
        }
    }

    fn kind(&self) -> Option<&Kind> {
        match self {
            Entry::TyCon(_, k) | Entry::TyVar(_, k) | Entry::Solved(_, k) => Some(k),
            _ => None,
        }
    }
}

impl fmt::Display for Entry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Entry::TyCon(n, k) => write!(f, "{n} :: {k}"),
            Entry::TyVar(n, k) => write!(f, "{n} :: {k}"),
            Entry::KVar(n) => f.write_str(n),
            Entry::Unsolved(v) => write!(f, "{v}"),
            Entry::Solved(v, k) => write!(f, "{v} := {k}"),
            Entry::Marker(t) => write!(f, "<{t}>"),
        }
    }
}

#[derive(Debug, Clone, Default)]
struct Trace {
    next_step: u64,
    lines: Vec<String>,
}

/// The ordered algorithmic context. Owns the fresh-variable counter for one
/// inference run; distinct runs are independent.
#[derive(Debug, Clone, Default)]
pub struct Context {
    entries: Vec<Entry>,
    next_id: u32,
    trace: Option<Trace>,
}

impl Context {
    pub fn new() -> Context {
        Context::default()
    }

    /// Build a context from raw entries; the counter resumes above the
    /// largest id present. Intended for tests and generators.
    pub fn from_entries(entries: Vec<Entry>) -> Context {
        let next_id = entries
            .iter()
            .filter_map(|e| e.uvar())
            .map(|v| v.0 + 1)
            .max()
            .unwrap_or(0);
        Context { entries, next_id, trace: None }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn unsolved_count(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| matches!(e, Entry::Unsolved(_)))
            .count()
    }

    /// Enable collection of `STEP n: <op> | <context>` trace lines.
    pub fn enable_trace(&mut self) {
        if self.trace.is_none() {
            self.trace = Some(Trace::default());
        }
    }

    pub fn take_trace(&mut self) -> Vec<String> {
        match &mut self.trace {
            Some(t) => std::mem::take(&mut t.lines),
            None => Vec::new(),
        }
    }

    /// Record one context transition in the trace, if tracing is on.
    pub fn trace_step(&mut self, op: &str) {
        if let Some(mut t) = self.trace.take() {
            let rendered = self.render();
            t.lines.push(format!("STEP {}: {} | {}", t.next_step, op, rendered));
            t.next_step += 1;
            self.trace = Some(t);
        }
    }

    /// The context printed left-to-right.
    pub fn render(&self) -> String {
        let parts: Vec<String> = self.entries.iter().map(|e| e.to_string()).collect();
        parts.join(", ")
    }

    pub fn position_of_uvar(&self, v: UVar) -> Option<usize> {
        self.entries.iter().position(|e| e.uvar() == Some(v))
    }

    pub fn position_of_name(&self, name: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.name() == Some(name))
    }

    pub fn solution(&self, v: UVar) -> Option<&Kind> {
        self.entries.iter().find_map(|e| match e {
            Entry::Solved(u, k) if *u == v => Some(k),
            _ => None,
        })
    }

    pub fn is_unsolved(&self, v: UVar) -> bool {
        self.entries
            .iter()
            .any(|e| matches!(e, Entry::Unsolved(u) if *u == v))
    }

    pub fn lookup_tycon(&self, name: &str) -> Option<&Kind> {
        self.entries.iter().find_map(|e| match e {
            Entry::TyCon(n, k) if n == name => Some(k),
            _ => None,
        })
    }

    pub fn lookup_tyvar(&self, name: &str) -> Option<&Kind> {
        // Innermost binding wins; names are unique in well-formed contexts
        // but scanning right-to-left keeps lookups deterministic regardless.
        self.entries.iter().rev().find_map(|e| match e {
            Entry::TyVar(n, k) if n == name => Some(k),
            _ => None,
        })
    }

    fn binds_kvar(&self, name: &str) -> bool {
        self.entries
            .iter()
            .any(|e| matches!(e, Entry::KVar(n) if n == name))
    }

    /// Pick a kind-variable name based on `base` that no entry currently uses.
    pub fn fresh_kvar_name(&self, base: &str) -> String {
        if self.position_of_name(base).is_none() {
            return base.to_string();
        }
        let mut i = 2;
        loop {
            let cand = format!("{base}{i}");
            if self.position_of_name(&cand).is_none() {
                return cand;
            }
            i += 1;
        }
    }

    pub fn push_tycon(&mut self, name: impl Into<String>, kind: Kind) -> usize {
        self.entries.push(Entry::TyCon(name.into(), kind));
        self.trace_step("BIND");
        self.entries.len() - 1
    }

    pub fn push_tyvar(&mut self, name: impl Into<String>, kind: Kind) -> usize {
        self.entries.push(Entry::TyVar(name.into(), kind));
        self.trace_step("BIND");
        self.entries.len() - 1
    }

    pub fn push_kvar(&mut self, name: impl Into<String>) -> usize {
        self.entries.push(Entry::KVar(name.into()));
        self.trace_step("BIND");
        self.entries.len() - 1
    }

    pub fn push_marker(&mut self, tag: impl Into<String>) -> usize {
        self.entries.push(Entry::Marker(tag.into()));
        self.trace_step("MARKER");
        self.entries.len() - 1
    }

    /// Append a fresh unsolved unification variable; ids are strictly
    /// increasing within a run.
    pub fn fresh_uvar(&mut self) -> UVar {
        let v = UVar(self.next_id);
        self.next_id += 1;
        self.entries.push(Entry::Unsolved(v));
        self.trace_step("FRESH");
        v
    }

    /// Insert a fresh unsolved variable immediately left of `target`'s entry.
    /// This is the ordered insertion used by promotion.
    pub fn insert_unsolved_left_of(&mut self, target: UVar) -> UVar {
        let idx = self
            .position_of_uvar(target)
            .expect("promotion target must be declared in the context");
        let v = UVar(self.next_id);
        self.next_id += 1;
        self.entries.insert(idx, Entry::Unsolved(v));
        self.trace_step("INSERT");
        v
    }

    /// Replace the unsolved entry for `v` by `Solved(v, k)`.
    ///
    /// `k` must mention only entries strictly left of `v` and must not
    /// mention `v` itself; unification guards both conditions, so hitting
    /// either error here indicates a defect in the caller.
    pub fn solve_uvar(&mut self, v: UVar, k: Kind) -> Result<(), Diagnostic> {
        let idx = match self.position_of_uvar(v) {
            Some(i) if matches!(self.entries[i], Entry::Unsolved(_)) => i,
            Some(_) => {
                return Err(Diagnostic::bare(
                    ErrorCode::ScopeViolation,
                    format!("{v} is already solved"),
                ))
            }
            None => {
                return Err(Diagnostic::bare(
                    ErrorCode::UndeclaredUVar,
                    format!("{v} is not declared in the context"),
                ))
            }
        };
        if k.mentions_uvar(v) {
            return Err(Diagnostic::bare(
                ErrorCode::OccursViolation,
                format!("cannot solve {v} := {k}: the variable occurs in its own solution"),
            ));
        }
        for u in k.free_uvars() {
            match self.position_of_uvar(u) {
                Some(j) if j < idx => {}
                Some(_) => {
                    return Err(Diagnostic::bare(
                        ErrorCode::ScopeViolation,
                        format!("cannot solve {v} := {k}: {u} is declared to the right of {v}"),
                    ))
                }
                None => {
                    return Err(Diagnostic::bare(
                        ErrorCode::UndeclaredUVar,
                        format!("cannot solve {v} := {k}: {u} is not declared"),
                    ))
                }
            }
        }
        for n in k.free_kvars() {
            match self.position_of_name(&n) {
                Some(j) if j < idx => {}
                Some(_) => {
                    return Err(Diagnostic::bare(
                        ErrorCode::ScopeViolation,
                        format!("cannot solve {v} := {k}: '{n}' is bound to the right of {v}"),
                    ))
                }
                None => {
                    return Err(Diagnostic::bare(
                        ErrorCode::ScopeViolation,
                        format!("cannot solve {v} := {k}: '{n}' is not bound in the context"),
                    ))
                }
            }
        }
        self.entries[idx] = Entry::Solved(v, k);
        self.trace_step("SOLVE");
        Ok(())
    }

    /// Apply the context as a substitution: replace solved variables by their
    /// solutions, repeated to a fixpoint. Idempotent.
    pub fn apply(&self, k: &Kind) -> Kind {
        match k {
            Kind::Star => Kind::Star,
            Kind::KVar(_) => k.clone(),
            Kind::UVar(v) => match self.solution(*v) {
                // Solutions are well-scoped (strictly leftward), so the
                // chase terminates.
                Some(s) => self.apply(s),
                None => {
                    assert!(
                        self.position_of_uvar(*v).is_some(),
                        "undeclared unification variable {v} reached apply"
                    );
                    k.clone()
                }
            },
            Kind::Arrow(a, b) => Kind::arrow(self.apply(a), self.apply(b)),
            Kind::Forall(x, b) => {
                if self.binds_kvar(x) {
                    // A solution substituted into the body could mention the
                    // context's `x`; rename the binder to avoid capture. The
                    // fresh name must be free both in the context and in the
                    // body.
                    let names = b.all_names();
                    let mut i = 2;
                    let fresh = loop {
                        let cand = format!("{x}{i}");
                        i += 1;
                        if self.position_of_name(&cand).is_none() && !names.contains(&cand) {
                            break cand;
                        }
                    };
                    let renamed = b.subst_kvar(x, &Kind::KVar(fresh.clone()));
                    Kind::Forall(fresh, Box::new(self.apply(&renamed)))
                } else {
                    Kind::Forall(x.clone(), Box::new(self.apply(b)))
                }
            }
        }
    }

    /// Check every context invariant; returns the first violation.
    pub fn wf(&self) -> Result<(), Diagnostic> {
        let mut names: Vec<&str> = Vec::new();
        let mut uvars: Vec<UVar> = Vec::new();
        for (i, e) in self.entries.iter().enumerate() {
            if let Some(n) = e.name() {
                if names.contains(&n) {
                    return Err(Diagnostic::bare(
                        ErrorCode::ScopeViolation,
                        format!("entry {i}: name '{n}' appears more than once"),
                    ));
                }
            }
            if let Some(v) = e.uvar() {
                if uvars.contains(&v) {
                    return Err(Diagnostic::bare(
                        ErrorCode::ScopeViolation,
                        format!("entry {i}: {v} appears more than once"),
                    ));
                }
            }
            if let Some(k) = e.kind() {
                for u in k.free_uvars() {
                    if !uvars.contains(&u) {
                        return Err(Diagnostic::bare(
                            ErrorCode::UndeclaredUVar,
                            format!("entry {i}: {u} undeclared at this position"),
                        ));
                    }
                }
                for n in k.free_kvars() {
                    if !names.contains(&n.as_str()) {
                        return Err(Diagnostic::bare(
                            ErrorCode::ScopeViolation,
                            format!("entry {i}: kind variable '{n}' unbound at this position"),
                        ));
                    }
                }
            }
            if let Some(n) = e.name() {
                names.push(n);
            }
            if let Some(v) = e.uvar() {
                uvars.push(v);
            }
        }
        Ok(())
    }

    /// Haskell98 defaulting: solve every unsolved variable to `*`.
    /// Returns the delta of solutions introduced.
    pub fn default_all(&mut self) -> Vec<(UVar, Kind)> {
        let mut delta = Vec::new();
        for e in &mut self.entries {
            if let Entry::Unsolved(v) = e {
                delta.push((*v, Kind::Star));
                *e = Entry::Solved(*v, Kind::Star);
            }
        }
        if !delta.is_empty() {
            self.trace_step("DEFAULT");
        }
        delta
    }

    /// Drop `pos` and everything to its right.
    pub fn truncate_to(&mut self, pos: usize) {
        self.entries.truncate(pos);
        self.trace_step("POP");
    }
}
