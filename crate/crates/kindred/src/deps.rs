//! Dependency analysis: group mutually recursive declarations into strongly
//! connected components and order them so every group is inferred after the
//! groups it depends on. Forward references across the file are legal.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use crate::diag::Diagnostic;
use crate::diag::ErrorCode;
use crate::surface::{DataDecl, Program, SurfaceType, TyNode};

/// One strongly connected component of the dependency graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Group {
    /// Declaration indices, listed in source order.
    pub members: Vec<usize>,
    /// Topological index: every dependency outside the group lives in a
    /// group with a strictly smaller position.
    pub position: usize,
}

fn collect_tycons<'t>(t: &'t SurfaceType, out: &mut Vec<(&'t str, &'t SurfaceType)>) {
    match &t.node {
        TyNode::TyCon(n) => out.push((n, t)),
        TyNode::Var(_) => {}
        TyNode::App(f, a) => {
            collect_tycons(f, out);
            collect_tycons(a, out);
        }
        TyNode::Arrow(d, c) => {
            collect_tycons(d, out);
            collect_tycons(c, out);
        }
        TyNode::Forall(_, b) => collect_tycons(b, out),
        TyNode::Annot(inner, _) => collect_tycons(inner, out),
    }
}

/// The type constructors a declaration refers to. Every referenced name must
/// be declared in the program. (Kinds cannot mention type constructors, so
/// signatures and annotations contribute nothing here.)
pub fn dependencies(d: &DataDecl, p: &Program) -> Result<BTreeSet<String>, Diagnostic> {
    let mut occurrences = Vec::new();
    for c in &d.ctors {
        for arg in &c.args {
            collect_tycons(arg, &mut occurrences);
        }
    }
    let mut out = BTreeSet::new();
    for (name, node) in occurrences {
        if !p.declares(name) {
            return Err(Diagnostic::new(
                ErrorCode::UnboundTyCon,
                node.pos,
                format!("type constructor '{name}' is not declared"),
            ));
        }
        out.insert(name.to_string());
    }
    Ok(out)
}

/// Tarjan's algorithm with an explicit stack (no recursion), so stress
/// programs with long dependency chains cannot overflow.
struct Tarjan<'g> {
    graph: &'g [Vec<usize>],
    index: usize,
    indices: Vec<Option<usize>>,
    lowlink: Vec<usize>,
    stack: Vec<usize>,
    on_stack: Vec<bool>,
    component_of: Vec<Option<usize>>,
    components: Vec<Vec<usize>>,
}

impl<'g> Tarjan<'g> {
    fn new(graph: &'g [Vec<usize>]) -> Self {
        let n = graph.len();
        Tarjan {
            graph,
            index: 0,
            indices: vec![None; n],
            lowlink: vec![0; n],
            stack: Vec::new(),
            on_stack: vec![false; n],
            component_of: vec![None; n],
            components: Vec::new(),
        }
    }

    fn visit(&mut self, root: usize) {
        // Each frame is (vertex, next child offset).
        let mut frames: Vec<(usize, usize)> = vec![(root, 0)];
        self.indices[root] = Some(self.index);
        self.lowlink[root] = self.index;
        self.index += 1;
        self.stack.push(root);
        self.on_stack[root] = true;

        while let Some(frame) = frames.last_mut() {
            let v = frame.0;
            if frame.1 < self.graph[v].len() {
                let w = self.graph[v][frame.1];
                frame.1 += 1;
                match self.indices[w] {
                    None => {
                        self.indices[w] = Some(self.index);
                        self.lowlink[w] = self.index;
                        self.index += 1;
                        self.stack.push(w);
                        self.on_stack[w] = true;
                        frames.push((w, 0));
                    }
                    Some(wi) => {
                        if self.on_stack[w] {
                            self.lowlink[v] = self.lowlink[v].min(wi);
                        }
                    }
                }
            } else {
                frames.pop();
                if let Some(&(parent, _)) = frames.last() {
                    self.lowlink[parent] = self.lowlink[parent].min(self.lowlink[v]);
                }
                if self.lowlink[v] == self.indices[v].unwrap() {
                    let id = self.components.len();
                    let mut members = Vec::new();
                    while let Some(w) = self.stack.pop() {
                        self.on_stack[w] = false;
                        self.component_of[w] = Some(id);
                        members.push(w);
                        if w == v {
                            break;
                        }
                    }
                    members.sort_unstable();
                    self.components.push(members);
                }
            }
        }
    }
}

/// Compute the groups of `p` in reverse topological order (dependencies
/// first). Ties between independent groups are broken by the smallest source
/// index; members are listed in source order.
///
/// Declarations with a standalone signature never participate in a cycle:
/// their kinds are known up front, so edges *into* them are dropped before
/// the component analysis.
pub fn group_topo(p: &Program) -> Result<Vec<Group>, Diagnostic> {
    let n = p.decls.len();
    let mut graph: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, d) in p.decls.iter().enumerate() {
        for dep in dependencies(d, p)? {
            let j = p.decl_index(&dep).expect("dependencies only returns declared names");
            if p.has_sig(&p.decls[j].name) {
                continue; // the signature supplies this kind up front
            }
            graph[i].push(j);
        }
    }

    let mut tarjan = Tarjan::new(&graph);
    for v in 0..n {
        if tarjan.indices[v].is_none() {
            tarjan.visit(v);
        }
    }
    let component_of: Vec<usize> = tarjan.component_of.iter().map(|c| c.unwrap()).collect();
    let components = tarjan.components;

    // Canonical order: Kahn's algorithm over the component DAG, always
    // emitting the ready component with the smallest source index.
    let m = components.len();
    let mut succs: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); m]; // dep -> dependents
    let mut pending: Vec<usize> = vec![0; m]; // unemitted dependencies per component
    for (v, targets) in graph.iter().enumerate() {
        for &w in targets {
            let (cv, cw) = (component_of[v], component_of[w]);
            if cv != cw && succs[cw].insert(cv) {
                pending[cv] += 1;
            }
        }
    }
    let mut ready: BinaryHeap<Reverse<(usize, usize)>> = BinaryHeap::new();
    for (c, comp) in components.iter().enumerate() {
        if pending[c] == 0 {
            ready.push(Reverse((comp[0], c)));
        }
    }
    let mut groups = Vec::with_capacity(m);
    while let Some(Reverse((_, c))) = ready.pop() {
        let position = groups.len();
        groups.push(Group { members: components[c].clone(), position });
        for &dependent in &succs[c] {
            pending[dependent] -= 1;
            if pending[dependent] == 0 {
                ready.push(Reverse((components[dependent][0], dependent)));
            }
        }
    }
    debug_assert_eq!(groups.len(), m, "component DAG must be acyclic");
    Ok(groups)
}
