//! The Haskell98 kind-inference engine.
//!
//! Each dependency group gets one unification variable per parameter plus a
//! provisional constructor kind `^k1 -> … -> ^kn -> *`; every constructor
//! argument type is checked against `*`; whatever remains unsolved after the
//! group is defaulted to `*`, so later groups only ever see closed kinds.

use std::collections::{BTreeMap, HashMap};

use crate::deps::{group_topo, Group};
use crate::diag::{Diagnostic, ErrorCode, Pos};
use crate::kindcore::{Context, Kind, UVar};
use crate::surface::{Mode, Program, SurfaceType, TyNode};
use crate::unify::unify;

/// Infer the kind of a type. `scope` maps the declaration's parameters to
/// their allocated unification variables; type constructors are looked up in
/// the context.
pub fn infer_type_kind(
    ctx: &mut Context,
    scope: &HashMap<String, UVar>,
    t: &SurfaceType,
) -> Result<Kind, Diagnostic> {
    match &t.node {
        TyNode::Var(n) => match scope.get(n) {
            Some(v) => Ok(Kind::UVar(*v)),
            None => Err(Diagnostic::new(
                ErrorCode::UnboundVar,
                t.pos,
                format!("type variable '{n}' is not bound by the declaration head"),
            )),
        },
        TyNode::TyCon(n) => match ctx.lookup_tycon(n) {
            Some(k) => Ok(k.clone()),
            None => Err(Diagnostic::new(
                ErrorCode::UnboundTyCon,
                t.pos,
                format!("type constructor '{n}' is not declared"),
            )),
        },
        TyNode::Arrow(dom, cod) => {
            check_type_star(ctx, scope, dom)?;
            check_type_star(ctx, scope, cod)?;
            Ok(Kind::Star)
        }
        TyNode::App(f, a) => {
            let kf = infer_type_kind(ctx, scope, f)?;
            let ka = infer_type_kind(ctx, scope, a)?;
            let res = ctx.fresh_uvar();
            unify(ctx, &kf, &Kind::arrow(ka, Kind::UVar(res)))
                .map_err(|d| d.or_at(t.pos))?;
            Ok(Kind::UVar(res))
        }
        TyNode::Forall(_, _) | TyNode::Annot(_, _) => Err(Diagnostic::new(
            ErrorCode::AnnotationInH98Mode,
            t.pos,
            "forall types and kind annotations require poly mode",
        )),
    }
}

/// Check a constructor argument type against `*`. Arrows push the check
/// into their components so errors land on the offending sub-type.
pub fn check_type_star(
    ctx: &mut Context,
    scope: &HashMap<String, UVar>,
    t: &SurfaceType,
) -> Result<(), Diagnostic> {
    match &t.node {
        TyNode::Arrow(dom, cod) => {
            check_type_star(ctx, scope, dom)?;
            check_type_star(ctx, scope, cod)
        }
        _ => {
            let k = infer_type_kind(ctx, scope, t)?;
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

/// Run inference for one dependency group against the given context. The
/// provisional constructor kinds stay open (defaulting is the caller's job),
/// so tests can observe the pre-defaulting state.
pub fn infer_group_h98(ctx: &mut Context, g: &Group, p: &Program) -> Result<(), Diagnostic> {
    let mut scopes: Vec<HashMap<String, UVar>> = Vec::with_capacity(g.members.len());
    for &i in &g.members {
        let d = &p.decls[i];
        let mut scope = HashMap::new();
        let mut kind = Kind::Star;
        let mut vars = Vec::with_capacity(d.params.len());
        for param in &d.params {
            let v = ctx.fresh_uvar();
            scope.insert(param.name.clone(), v);
            vars.push(v);
        }
        for v in vars.into_iter().rev() {
            kind = Kind::arrow(Kind::UVar(v), kind);
        }
        ctx.push_tycon(d.name.clone(), kind);
        scopes.push(scope);
    }
    for (&i, scope) in g.members.iter().zip(&scopes) {
        let d = &p.decls[i];
        for c in &d.ctors {
            for arg in &c.args {
                check_type_star(ctx, scope, arg)
                    .map_err(|e| decorate(e, &d.name, arg.pos))?;
            }
        }
    }
    Ok(())
}

/// One completed dependency group of a staged run.
#[derive(Debug, Clone)]
pub struct Stage {
    /// Declaration indices of the group, in source order.
    pub members: Vec<usize>,
    /// Pre-defaulting kinds of the members (may contain unification
    /// variables; mutually recursive members share them).
    pub schemes: BTreeMap<String, Kind>,
    /// Closed kinds after defaulting.
    pub finals: BTreeMap<String, Kind>,
    /// Solutions introduced by this group's defaulting.
    pub default_delta: Vec<(UVar, Kind)>,
}

/// Everything a Haskell98 run produces, including the observability hooks
/// the test oracles need.
#[derive(Debug, Clone)]
pub struct H98Run {
    /// Final closed kinds per type constructor.
    pub kinds: BTreeMap<String, Kind>,
    /// Pre-defaulting kinds (may contain unification variables); mutually
    /// recursive declarations share variables.
    pub schemes: BTreeMap<String, Kind>,
    /// Every solution introduced by defaulting, across all groups.
    pub default_delta: Vec<(UVar, Kind)>,
    /// Context transition log (empty unless tracing was requested).
    pub trace: Vec<String>,
}

/// Infer kinds for a whole program: group, infer, default, repeat. Later
/// groups see only closed kinds. Fails fast on the first diagnostic.
pub fn run_h98(p: &Program) -> Result<BTreeMap<String, Kind>, Diagnostic> {
    run_h98_detailed(p, false).map(|r| r.kinds)
}

/// Run group by group, keeping every completed stage. On failure the
/// completed stages are returned alongside the diagnostic, which belongs to
/// the first unreturned group. This is what the staged oracle bridges need:
/// the defaulting of one group is part of the judgment the next group is
/// checked against.
pub fn run_h98_stages(p: &Program) -> (Vec<Stage>, Option<Diagnostic>) {
    assert_eq!(p.mode, Mode::H98, "run_h98 expects a program parsed in h98 mode");
    let groups = match group_topo(p) {
        Ok(g) => g,
        Err(d) => return (Vec::new(), Some(d)),
    };
    let mut ctx = Context::new();
    let mut stages = Vec::with_capacity(groups.len());
    for g in &groups {
        match run_group(&mut ctx, g, p) {
            Ok(stage) => stages.push(stage),
            Err(d) => return (stages, Some(d)),
        }
    }
    (stages, None)
}

fn run_group(ctx: &mut Context, g: &Group, p: &Program) -> Result<Stage, Diagnostic> {
    let mark = ctx.push_marker(format!(
        "group:{}",
        g.members
            .iter()
            .map(|&i| p.decls[i].name.as_str())
            .collect::<Vec<_>>()
            .join(",")
    ));
    infer_group_h98(ctx, g, p)?;
    let mut schemes = BTreeMap::new();
    for &i in &g.members {
        let name = &p.decls[i].name;
        let provisional = ctx
            .lookup_tycon(name)
            .expect("group members were just bound")
            .clone();
        schemes.insert(name.clone(), ctx.apply(&provisional));
    }
    let default_delta = ctx.default_all();
    let mut finals = BTreeMap::new();
    for (name, scheme) in &schemes {
        let k = ctx.apply(scheme);
        debug_assert!(k.is_closed(), "defaulting must close every kind");
        finals.insert(name.clone(), k);
    }
    ctx.truncate_to(mark);
    for (name, k) in &finals {
        ctx.push_tycon(name.clone(), k.clone());
    }
    Ok(Stage { members: g.members.clone(), schemes, finals, default_delta })
}

/// As [`run_h98`], exposing pre-defaulting schemes, the defaulting delta,
/// and (optionally) the context trace.
pub fn run_h98_detailed(p: &Program, trace: bool) -> Result<H98Run, Diagnostic> {
    assert_eq!(p.mode, Mode::H98, "run_h98 expects a program parsed in h98 mode");
    let groups = group_topo(p)?;
    let mut ctx = Context::new();
    if trace {
        ctx.enable_trace();
    }
    let mut kinds = BTreeMap::new();
    let mut schemes = BTreeMap::new();
    let mut default_delta = Vec::new();
    for g in &groups {
        let stage = run_group(&mut ctx, g, p)?;
        kinds.extend(stage.finals);
        schemes.extend(stage.schemes);
        default_delta.extend(stage.default_delta);
    }
    Ok(H98Run { kinds, schemes, default_delta, trace: ctx.take_trace() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{declarative_accepts, principal_check, PrincipalOutcome};
    use crate::surface::parse_program;

    fn run(src: &str) -> Result<BTreeMap<String, Kind>, Diagnostic> {
        run_h98(&parse_program(src, Mode::H98).unwrap())
    }

    fn kind_text(src: &str, name: &str) -> String {
        run(src).unwrap().get(name).unwrap().to_string()
    }

    #[test]
    fn var_infers_its_scope_uvar() {
        let mut ctx = Context::new();
        let a = ctx.fresh_uvar();
        let scope: HashMap<String, UVar> = [("a".to_string(), a)].into();
        let t = SurfaceType::var("a");
        assert_eq!(infer_type_kind(&mut ctx, &scope, &t).unwrap(), Kind::UVar(a));
    }

    #[test]
    fn application_constrains_the_function() {
        // infer (f a) solves ^f to (^a or its promotion) -> ^r.
        let mut ctx = Context::new();
        let f = ctx.fresh_uvar();
        let a = ctx.fresh_uvar();
        let scope: HashMap<String, UVar> =
            [("f".to_string(), f), ("a".to_string(), a)].into();
        let t = SurfaceType::app(SurfaceType::var("f"), SurfaceType::var("a"));
        let k = infer_type_kind(&mut ctx, &scope, &t).unwrap();
        ctx.wf().unwrap();
        // Oracle: the final context equates ^f with ^a -> ^r.
        let expect = Kind::arrow(Kind::UVar(a), k);
        assert_eq!(ctx.apply(&Kind::UVar(f)), ctx.apply(&expect));
    }

    #[test]
    fn self_application_hits_the_occurs_check() {
        let mut ctx = Context::new();
        let a = ctx.fresh_uvar();
        let scope: HashMap<String, UVar> = [("a".to_string(), a)].into();
        let t = SurfaceType::app(SurfaceType::var("a"), SurfaceType::var("a"));
        let err = infer_type_kind(&mut ctx, &scope, &t).unwrap_err();
        assert_eq!(err.code, ErrorCode::OccursCheck);
    }

    #[test]
    fn unbound_names_are_reported() {
        let err = run("data T = MkT a").unwrap_err();
        assert_eq!(err.code, ErrorCode::UnboundVar);
        let err = run("data T = MkT (U T)").unwrap_err();
        assert_eq!(err.code, ErrorCode::UnboundTyCon);
    }

    #[test]
    fn maybe_param_stays_unsolved_until_defaulting() {
        let p = parse_program("data Maybe a = MkM", Mode::H98).unwrap();
        let g = group_topo(&p).unwrap();
        let mut ctx = Context::new();
        infer_group_h98(&mut ctx, &g[0], &p).unwrap();
        assert_eq!(ctx.unsolved_count(), 1);
    }

    #[test]
    fn recursive_list_keeps_param_open() {
        let p = parse_program("data List a = Nil | Cons a (List a)", Mode::H98).unwrap();
        let detailed = run_h98_detailed(&p, false).unwrap();
        // The recursive use is consistent; the element kind is pinned to *
        // by the Cons field `a`, giving * -> * after defaulting.
        assert_eq!(detailed.kinds.get("List").unwrap().to_string(), "* -> *");
        assert!(declarative_accepts(&p, &detailed.kinds));
        // And the scheme is principal at small scale.
        assert_eq!(
            principal_check(&p, &detailed.schemes, 2).unwrap(),
            PrincipalOutcome::Ok
        );
    }

    #[test]
    fn mutual_group_shares_constraints() {
        let p = parse_program("data T a = MkT (S a); data S a = MkS (T a)", Mode::H98)
            .unwrap();
        let detailed = run_h98_detailed(&p, false).unwrap();
        assert_eq!(detailed.kinds.get("T").unwrap().to_string(), "* -> *");
        assert_eq!(detailed.kinds.get("S").unwrap().to_string(), "* -> *");
        // Pre-defaulting, both schemes are kappa -> * with a shared variable.
        let t = detailed.schemes.get("T").unwrap();
        let s = detailed.schemes.get("S").unwrap();
        assert_eq!(t, s);
        assert!(matches!(t, Kind::Arrow(dom, _) if matches!(**dom, Kind::UVar(_))));
        assert_eq!(
            principal_check(&p, &detailed.schemes, 2).unwrap(),
            PrincipalOutcome::Ok
        );
    }

    #[test]
    fn golden_kinds() {
        assert_eq!(kind_text("data Maybe a = Nothing | Just a", "Maybe"), "* -> *");
        assert_eq!(
            kind_text("data App f a = MkApp (f a)", "App"),
            "(* -> *) -> * -> *"
        );
        assert_eq!(
            kind_text("data Fix f = MkFix (f (Fix f))", "Fix"),
            "(* -> *) -> *"
        );
        assert_eq!(kind_text("data E", "E"), "*");
    }

    #[test]
    fn self_application_program_is_rejected_naming_the_decl() {
        let err = run("data T a = MkT (a a)").unwrap_err();
        assert_eq!(err.code, ErrorCode::OccursCheck);
        assert!(err.message.contains("'T'"));
        assert_eq!(err.pos.line, 1);
    }

    #[test]
    fn tycon_self_argument_is_an_occurs_failure_not_unbound() {
        // F is in scope inside its own group; the oracle confirms no finite
        // kind fits (kf = (kf -> *) -> r has no closed solution).
        let p = parse_program("data F f = MkF (f F)", Mode::H98).unwrap();
        let err = run_h98(&p).unwrap_err();
        assert_eq!(err.code, ErrorCode::OccursCheck);
        for depth in 0..=2 {
            for k in crate::oracle::enumerate_monokinds(depth).unwrap() {
                let assign: BTreeMap<String, Kind> = [("F".to_string(), k)].into();
                assert!(!declarative_accepts(&p, &assign));
            }
        }
    }

    #[test]
    fn defaulting_delta_is_star_only_and_kinds_close() {
        let p = parse_program(
            "data C f = MkC (f B); data B = MkB; data P a b = MkP",
            Mode::H98,
        )
        .unwrap();
        let detailed = run_h98_detailed(&p, false).unwrap();
        assert!(!detailed.default_delta.is_empty());
        for (_, k) in &detailed.default_delta {
            assert_eq!(*k, Kind::Star);
        }
        for k in detailed.kinds.values() {
            assert!(k.is_closed());
        }
        assert_eq!(detailed.kinds.get("C").unwrap().to_string(), "(* -> *) -> *");
    }

    #[test]
    fn later_groups_use_closed_dependency_kinds() {
        let kinds = run("data T a = MkT (T Maybe)\ndata Maybe a = N | J a").unwrap();
        assert_eq!(kinds.get("T").unwrap().to_string(), "(* -> *) -> *");
    }

    #[test]
    fn trace_is_produced_on_request() {
        let p = parse_program("data Maybe a = Nothing | Just a", Mode::H98).unwrap();
        let detailed = run_h98_detailed(&p, true).unwrap();
        assert!(!detailed.trace.is_empty());
        assert!(detailed.trace[0].starts_with("STEP 0: "));
        assert!(detailed.trace.iter().any(|l| l.contains("UNIFY")));
    }
}
