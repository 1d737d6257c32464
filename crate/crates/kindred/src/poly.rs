//! The PolyKinds kind-inference engine.
//!
//! Groups are inferred behind a scope marker: parameters get unification
//! variables (unified with their annotations, whose free kind variables
//! become rigid binders scoped over the rest of the declaration), constructor
//! arguments are checked against `*`, and whatever stays unsolved is
//! generalized into a `forall` kind after the quantification check.
//!
//! Declarations with a standalone signature skip inference: the signature is
//! skolemized, the binders are matched against its argument kinds, and the
//! constructors are checked under it. Because signature kinds are bound
//! before any group runs, such declarations support polymorphic recursion.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::deps::group_topo;
use crate::diag::{Diagnostic, ErrorCode, Pos};
use crate::kindcore::{Context, Kind, UVar};
use crate::surface::{DataDecl, Mode, Program, SurfaceType, TyNode};
use crate::unify::unify;

/// A declaration with every binder and constructor argument kind made
/// explicit. Printed as
/// `data T @(k1 :: *) (a :: k1) = MkT (arg :: *) | ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct ElabDecl {
    pub name: String,
    /// Quantified kind variables, in quantifier order.
    pub quantified: Vec<String>,
    /// One explicit kind per source parameter; the kinds form a telescope
    /// under the quantified prefix.
    pub binders: Vec<(String, Kind)>,
    /// The closed kind of the type constructor.
    pub tycon_kind: Kind,
    pub ctors: Vec<ElabCtor>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElabCtor {
    pub name: String,
    /// Argument types with their kinds (constructor fields always live in `*`).
    pub args: Vec<(SurfaceType, Kind)>,
}

impl ElabDecl {
    /// Drop every annotation, recovering a plain declaration.
    pub fn erase(&self) -> DataDecl {
        DataDecl {
            name: self.name.clone(),
            params: self
                .binders
                .iter()
                .map(|(n, _)| crate::surface::Param {
                    name: n.clone(),
                    ann: None,
                    pos: Pos::NONE,
                })
                .collect(),
            ctors: self
                .ctors
                .iter()
                .map(|c| crate::surface::DataCon {
                    name: c.name.clone(),
                    args: c.args.iter().map(|(t, _)| t.clone()).collect(),
                    pos: Pos::NONE,
                })
                .collect(),
            pos: Pos::NONE,
        }
    }
}

impl fmt::Display for ElabDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "data {}", self.name)?;
        for q in &self.quantified {
            write!(f, " @({q} :: *)")?;
        }
        for (name, kind) in &self.binders {
            write!(f, " ({name} :: {kind})")?;
        }
        if !self.ctors.is_empty() {
            f.write_str(" = ")?;
            for (i, c) in self.ctors.iter().enumerate() {
                if i > 0 {
                    f.write_str(" | ")?;
                }
                f.write_str(&c.name)?;
                for (t, k) in &c.args {
                    write!(f, " ({t} :: {k})")?;
                }
            }
        }
        Ok(())
    }
}

/// Strip leading `forall`s, replacing each binder with a fresh unsolved
/// variable appended to the context.
pub fn instantiate(ctx: &mut Context, k: &Kind) -> Kind {
    let mut k = k.clone();
    while let Kind::Forall(v, body) = k {
        let u = ctx.fresh_uvar();
        k = body.subst_kvar(&v, &Kind::UVar(u));
        ctx.trace_step(&format!("INSTANTIATE {v} := {u}"));
    }
    k
}

/// The side condition on generalization: every unsolved variable reachable
/// from the group's provisional kinds must live right of the group's marker
/// (anything further left would escape into an enclosing scope), and the
/// variables must admit a telescope order. Unsolved entries carry no kind
/// annotations in this kind language, so any quantifier order is a valid
/// telescope and the second condition cannot fail.
pub fn quantification_check(
    ctx: &Context,
    marker_pos: usize,
    roots: &[UVar],
    subject: &str,
) -> Result<(), Diagnostic> {
    for &v in roots {
        match ctx.position_of_uvar(v) {
            Some(pos) if pos > marker_pos => {}
            Some(_) => {
                return Err(Diagnostic::bare(
                    ErrorCode::QuantificationCheck,
                    format!(
                        "cannot generalize {v} in '{subject}': it was introduced \
                         outside the group and would escape its scope"
                    ),
                ))
            }
            None => {
                return Err(Diagnostic::bare(
                    ErrorCode::QuantificationCheck,
                    format!("{v} is not declared while generalizing '{subject}'"),
                ))
            }
        }
    }
    Ok(())
}

/// A variable scheduled for quantification.
#[derive(Debug, Clone, PartialEq)]
enum QVar {
    Flex(UVar),
    Rigid(String),
}

/// Collect quantifiable variables of `k` in first-occurrence preorder:
/// unsolved unification variables, plus rigid kind variables introduced
/// right of the marker.
fn quantifiable(ctx: &Context, marker_pos: usize, k: &Kind) -> Vec<QVar> {
    fn walk(
        ctx: &Context,
        marker_pos: usize,
        k: &Kind,
        bound: &mut Vec<String>,
        out: &mut Vec<QVar>,
    ) {
        match k {
            Kind::Star => {}
            Kind::UVar(v) => {
                let q = QVar::Flex(*v);
                if !out.contains(&q) {
                    out.push(q);
                }
            }
            Kind::KVar(n) => {
                if bound.iter().any(|b| b == n) {
                    return;
                }
                if let Some(pos) = ctx.position_of_name(n) {
                    if pos > marker_pos {
                        let q = QVar::Rigid(n.clone());
                        if !out.contains(&q) {
                            out.push(q);
                        }
                    }
                }
            }
            Kind::Arrow(a, b) => {
                walk(ctx, marker_pos, a, bound, out);
                walk(ctx, marker_pos, b, bound, out);
            }
            Kind::Forall(v, b) => {
                bound.push(v.clone());
                walk(ctx, marker_pos, b, bound, out);
                bound.pop();
            }
        }
    }
    let mut out = Vec::new();
    walk(ctx, marker_pos, k, &mut Vec::new(), &mut out);
    out
}

fn rename_qvars(k: &Kind, mapping: &[(QVar, String)], bound: &mut Vec<String>) -> Kind {
    match k {
        Kind::Star => Kind::Star,
        Kind::UVar(v) => {
            for (q, name) in mapping {
                if *q == QVar::Flex(*v) {
                    return Kind::KVar(name.clone());
                }
            }
            k.clone()
        }
        Kind::KVar(n) => {
            if bound.iter().any(|b| b == n) {
                return k.clone();
            }
            for (q, name) in mapping {
                if *q == QVar::Rigid(n.clone()) {
                    return Kind::KVar(name.clone());
                }
            }
            k.clone()
        }
        Kind::Arrow(a, b) => Kind::arrow(
            rename_qvars(a, mapping, bound),
            rename_qvars(b, mapping, bound),
        ),
        Kind::Forall(v, b) => {
            bound.push(v.clone());
            let body = rename_qvars(b, mapping, bound);
            bound.pop();
            Kind::Forall(v.clone(), Box::new(body))
        }
    }
}

fn generalize_mapping(ctx: &Context, marker_pos: usize, k: &Kind) -> Vec<(QVar, String)> {
    let vars = quantifiable(ctx, marker_pos, k);
    let taken = k.all_names();
    let mut mapping: Vec<(QVar, String)> = Vec::with_capacity(vars.len());
    let mut next = 1;
    for q in vars {
        let name = loop {
            let cand = format!("k{next}");
            next += 1;
            if !taken.contains(&cand) && !mapping.iter().any(|(_, n)| *n == cand) {
                break cand;
            }
        };
        mapping.push((q, name));
    }
    mapping
}

/// Quantify the residual variables of `apply_ctx(ctx, k)` with fresh binder
/// names `k1, k2, …` in first-occurrence preorder. Rigid kind variables
/// introduced after the marker (annotation binders) are quantified the same
/// way, so the result is closed and alpha-canonical.
pub fn generalize(ctx: &Context, marker_pos: usize, k: &Kind) -> Kind {
    let applied = ctx.apply(k);
    let mapping = generalize_mapping(ctx, marker_pos, &applied);
    let body = rename_qvars(&applied, &mapping, &mut Vec::new());
    let mut out = body;
    for (_, name) in mapping.iter().rev() {
        out = Kind::forall(name.clone(), out);
    }
    out
}

/// Per-declaration checking state: type variables in scope and the mapping
/// from annotation kind-variable names to their inference-level variables.
struct DeclState {
    /// Surface type variable name -> its kind.
    scope: HashMap<String, Kind>,
    /// Annotation kind variable name -> rigid `KVar` (inference) or flexible
    /// `UVar` (signature checking, where they must match the skolems).
    ann_vars: HashMap<String, Kind>,
    flexible_ann_vars: bool,
}

impl DeclState {
    fn new(flexible_ann_vars: bool) -> DeclState {
        DeclState {
            scope: HashMap::new(),
            ann_vars: HashMap::new(),
            flexible_ann_vars,
        }
    }
}

/// Convert a surface annotation kind, binding each new free kind variable at
/// its first occurrence.
fn resolve_ann_kind(ctx: &mut Context, st: &mut DeclState, k: &Kind) -> Kind {
    fn walk(ctx: &mut Context, st: &mut DeclState, k: &Kind, bound: &mut Vec<String>) -> Kind {
        match k {
            Kind::Star => Kind::Star,
            Kind::UVar(_) => k.clone(),
            Kind::Arrow(a, b) => {
                let a2 = walk(ctx, st, a, bound);
                let b2 = walk(ctx, st, b, bound);
                Kind::arrow(a2, b2)
            }
            Kind::Forall(v, b) => {
                bound.push(v.clone());
                let b2 = walk(ctx, st, b, bound);
                bound.pop();
                Kind::Forall(v.clone(), Box::new(b2))
            }
            Kind::KVar(n) => {
                if bound.iter().any(|b| b == n) {
                    return k.clone();
                }
                if let Some(mapped) = st.ann_vars.get(n) {
                    return mapped.clone();
                }
                let mapped = if st.flexible_ann_vars {
                    Kind::UVar(ctx.fresh_uvar())
                } else {
                    let name = ctx.fresh_kvar_name(n);
                    ctx.push_kvar(name.clone());
                    Kind::KVar(name)
                };
                st.ann_vars.insert(n.clone(), mapped.clone());
                mapped
            }
        }
    }
    walk(ctx, st, k, &mut Vec::new())
}

fn infer_kind(
    ctx: &mut Context,
    st: &mut DeclState,
    t: &SurfaceType,
) -> Result<Kind, Diagnostic> {
    match &t.node {
        TyNode::Var(n) => match st.scope.get(n).cloned() {
            Some(k) => {
                let applied = ctx.apply(&k);
                Ok(instantiate(ctx, &applied))
            }
            None => Err(Diagnostic::new(
                ErrorCode::UnboundVar,
                t.pos,
                format!("type variable '{n}' is not bound by the declaration head or a forall"),
            )),
        },
        TyNode::TyCon(n) => match ctx.lookup_tycon(n).cloned() {
            Some(k) => {
                let applied = ctx.apply(&k);
                Ok(instantiate(ctx, &applied))
            }
            None => Err(Diagnostic::new(
                ErrorCode::UnboundTyCon,
                t.pos,
                format!("type constructor '{n}' is not declared"),
            )),
        },
        TyNode::Arrow(dom, cod) => {
            check_star(ctx, st, dom)?;
            check_star(ctx, st, cod)?;
            Ok(Kind::Star)
        }
        TyNode::App(f, a) => {
            let kf = infer_kind(ctx, st, f)?;
            let ka = infer_kind(ctx, st, a)?;
            let res = ctx.fresh_uvar();
            unify(ctx, &kf, &Kind::arrow(ka, Kind::UVar(res)))
                .map_err(|d| d.or_at(t.pos))?;
            Ok(Kind::UVar(res))
        }
        TyNode::Forall(v, body) => {
            let kv = ctx.fresh_uvar();
            let shadowed = st.scope.insert(v.clone(), Kind::UVar(kv));
            let result = check_star(ctx, st, body);
            match shadowed {
                Some(old) => {
                    st.scope.insert(v.clone(), old);
                }
                None => {
                    st.scope.remove(v);
                }
            }
            result?;
            Ok(Kind::Star)
        }
        TyNode::Annot(inner, ann) => {
            let expected = resolve_ann_kind(ctx, st, ann);
            let actual = infer_kind(ctx, st, inner)?;
            unify(ctx, &actual, &expected).map_err(|d| d.or_at(t.pos))?;
            Ok(ctx.apply(&expected))
        }
    }
}

fn check_star(ctx: &mut Context, st: &mut DeclState, t: &SurfaceType) -> Result<(), Diagnostic> {
    match &t.node {
        TyNode::Arrow(dom, cod) => {
            check_star(ctx, st, dom)?;
            check_star(ctx, st, cod)
        }
        _ => {
            let k = infer_kind(ctx, st, t)?;
            unify(ctx, &k, &Kind::Star).map_err(|d| d.or_at(t.pos))
        }
    }
}

fn decorate(d: Diagnostic, decl: &str, pos: Pos) -> Diagnostic {
    let mut d = d.or_at(pos);
    if !d.message.contains("in the declaration of") {
        d.message = format!("in the declaration of '{}': {}", decl, d.message);
    }
    d
}

/// Check a declaration against its standalone signature. The signature's
/// binders are skolemized to rigid variables, the declaration's binders are
/// matched against the instantiated argument kinds (unifying annotations
/// where present), and the constructors are checked against `*`. No
/// generalization happens: the signature is authoritative.
pub fn check_signature(
    ctx: &mut Context,
    name: &str,
    sig: &Kind,
    decl: &DataDecl,
) -> Result<ElabDecl, Diagnostic> {
    debug_assert!(sig.is_closed());
    let marker = ctx.push_marker(format!("sig:{name}"));
    let result = check_signature_in(ctx, name, sig, decl, marker);
    ctx.truncate_to(marker);
    result
}

fn check_signature_in(
    ctx: &mut Context,
    name: &str,
    sig: &Kind,
    decl: &DataDecl,
    _marker: usize,
) -> Result<ElabDecl, Diagnostic> {
    let mut st = DeclState::new(true);
    let mut skolems: Vec<String> = Vec::new();
    let mut remaining = sig.clone();
    let mut raw_binders: Vec<(String, Kind)> = Vec::new();

    for param in &decl.params {
        while let Kind::Forall(v, body) = remaining {
            let skolem = ctx.fresh_kvar_name(&v);
            ctx.push_kvar(skolem.clone());
            remaining = body.subst_kvar(&v, &Kind::KVar(skolem.clone()));
            skolems.push(skolem);
        }
        let (expected, rest) = match remaining {
            Kind::Arrow(dom, cod) => (*dom, *cod),
            _ => {
                return Err(Diagnostic::new(
                    ErrorCode::KindMismatch,
                    param.pos,
                    format!(
                        "'{name}' declares {} parameters but its signature '{sig}' \
                         provides only {}",
                        decl.params.len(),
                        raw_binders.len()
                    ),
                ));
            }
        };
        remaining = rest;
        if let Some(ann) = &param.ann {
            let resolved = resolve_ann_kind(ctx, &mut st, ann);
            unify(ctx, &resolved, &expected).map_err(|d| decorate(d, name, param.pos))?;
        }
        st.scope.insert(param.name.clone(), expected.clone());
        raw_binders.push((param.name.clone(), expected));
    }

    if !decl.ctors.is_empty() {
        let rest = ctx.apply(&remaining);
        if rest != Kind::Star {
            return Err(Diagnostic::new(
                ErrorCode::KindMismatch,
                decl.pos,
                format!(
                    "constructors of '{name}' build values, so the signature must \
                     end in '*' after its parameters, not '{rest}'"
                ),
            ));
        }
    }

    let mut ctors = Vec::with_capacity(decl.ctors.len());
    for c in &decl.ctors {
        let mut args = Vec::with_capacity(c.args.len());
        for arg in &c.args {
            check_star(ctx, &mut st, arg).map_err(|e| decorate(e, name, arg.pos))?;
            args.push((arg.clone(), Kind::Star));
        }
        ctors.push(ElabCtor { name: c.name.clone(), args });
    }

    let binders: Vec<(String, Kind)> = raw_binders
        .into_iter()
        .map(|(n, k)| (n, ctx.apply(&k)))
        .collect();
    for (n, k) in &binders {
        assert!(
            k.is_closed(),
            "binder '{n}' of '{name}' kept an unsolved kind {k} under its signature"
        );
    }
    Ok(ElabDecl {
        name: name.to_string(),
        quantified: skolems,
        binders,
        tycon_kind: sig.clone(),
        ctors,
    })
}

/// Everything a PolyKinds run produces.
#[derive(Debug, Clone)]
pub struct PolyRun {
    pub kinds: BTreeMap<String, Kind>,
    /// Elaborated declarations in source order.
    pub elab: Vec<ElabDecl>,
    pub trace: Vec<String>,
}

/// Infer polymorphic kinds for a whole program and elaborate every
/// declaration. Fails fast on the first diagnostic.
pub fn run_poly(p: &Program) -> Result<(BTreeMap<String, Kind>, Vec<ElabDecl>), Diagnostic> {
    run_poly_detailed(p, false).map(|r| (r.kinds, r.elab))
}

/// As [`run_poly`], optionally collecting the context trace.
pub fn run_poly_detailed(p: &Program, trace: bool) -> Result<PolyRun, Diagnostic> {
    assert_eq!(p.mode, Mode::Poly, "run_poly expects a program parsed in poly mode");
    let groups = group_topo(p)?;
    let mut ctx = Context::new();
    if trace {
        ctx.enable_trace();
    }
    let mut kinds = BTreeMap::new();
    let mut elabs: Vec<Option<ElabDecl>> = vec![None; p.decls.len()];

    // Signature kinds are known up front; binding them before any group runs
    // is what enables polymorphic recursion.
    for d in &p.decls {
        if let Some(sig) = p.sig_kind(&d.name) {
            ctx.push_tycon(d.name.clone(), sig.clone());
        }
    }

    for g in &groups {
        if g.members.len() == 1 {
            let i = g.members[0];
            let d = &p.decls[i];
            if let Some(sig) = p.sig_kind(&d.name).cloned() {
                let elab = check_signature(&mut ctx, &d.name, &sig, d)?;
                kinds.insert(d.name.clone(), sig);
                elabs[i] = Some(elab);
                continue;
            }
        }

        let group_tag = g
            .members
            .iter()
            .map(|&i| p.decls[i].name.as_str())
            .collect::<Vec<_>>()
            .join(",");
        let marker = ctx.push_marker(format!("group:{group_tag}"));

        let mut states: Vec<DeclState> = Vec::with_capacity(g.members.len());
        let mut param_vars: Vec<Vec<UVar>> = Vec::with_capacity(g.members.len());
        for &i in &g.members {
            let d = &p.decls[i];
            let mut st = DeclState::new(false);
            let mut vars = Vec::with_capacity(d.params.len());
            for param in &d.params {
                let ann = param
                    .ann
                    .as_ref()
                    .map(|a| resolve_ann_kind(&mut ctx, &mut st, a));
                let v = ctx.fresh_uvar();
                if let Some(ann) = ann {
                    unify(&mut ctx, &Kind::UVar(v), &ann)
                        .map_err(|e| decorate(e, &d.name, param.pos))?;
                }
                st.scope.insert(param.name.clone(), Kind::UVar(v));
                vars.push(v);
            }
            let mut spine = Kind::Star;
            for &v in vars.iter().rev() {
                spine = Kind::arrow(Kind::UVar(v), spine);
            }
            ctx.push_tycon(d.name.clone(), spine);
            states.push(st);
            param_vars.push(vars);
        }

        for (&i, st) in g.members.iter().zip(&mut states) {
            let d = &p.decls[i];
            for c in &d.ctors {
                for arg in &c.args {
                    check_star(&mut ctx, st, arg)
                        .map_err(|e| decorate(e, &d.name, arg.pos))?;
                }
            }
        }

        let spines: Vec<Kind> = g
            .members
            .iter()
            .map(|&i| {
                let provisional = ctx
                    .lookup_tycon(&p.decls[i].name)
                    .expect("group members were just bound")
                    .clone();
                ctx.apply(&provisional)
            })
            .collect();
        let mut roots = Vec::new();
        for s in &spines {
            for v in s.free_uvars() {
                if !roots.contains(&v) {
                    roots.push(v);
                }
            }
        }
        quantification_check(&ctx, marker, &roots, &group_tag)?;

        let mut finals = Vec::with_capacity(g.members.len());
        for ((&i, spine), vars) in g.members.iter().zip(&spines).zip(&param_vars) {
            let d = &p.decls[i];
            let mapping = generalize_mapping(&ctx, marker, spine);
            let body = rename_qvars(spine, &mapping, &mut Vec::new());
            let mut generalized = body;
            for (_, name) in mapping.iter().rev() {
                generalized = Kind::forall(name.clone(), generalized);
            }
            ctx.trace_step(&format!("GENERALIZE {} :: {generalized}", d.name));
            assert!(
                generalized.is_closed(),
                "generalization left '{}' open: {generalized}",
                d.name
            );

            let binders = d
                .params
                .iter()
                .zip(vars)
                .map(|(param, &v)| {
                    let k = ctx.apply(&Kind::UVar(v));
                    (param.name.clone(), rename_qvars(&k, &mapping, &mut Vec::new()))
                })
                .collect();
            let ctors = d
                .ctors
                .iter()
                .map(|c| ElabCtor {
                    name: c.name.clone(),
                    args: c.args.iter().map(|a| (a.clone(), Kind::Star)).collect(),
                })
                .collect();
            elabs[i] = Some(ElabDecl {
                name: d.name.clone(),
                quantified: mapping.iter().map(|(_, n)| n.clone()).collect(),
                binders,
                tycon_kind: generalized.clone(),
                ctors,
            });
            finals.push((d.name.clone(), generalized));
        }

        ctx.truncate_to(marker);
        for (name, k) in finals {
            kinds.insert(name.clone(), k.clone());
            ctx.push_tycon(name, k);
        }
    }

    let elab: Vec<ElabDecl> = elabs
        .into_iter()
        .map(|e| e.expect("every declaration is elaborated by its group"))
        .collect();
    Ok(PolyRun { kinds, elab, trace: ctx.take_trace() })
}
