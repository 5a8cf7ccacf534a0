use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::Serialize;

use super::{ChainId, StochasticChain};

/// Transient classes whose largest column leak is below this are reported as
/// nearly closed.
pub const NEARLY_CLOSED_LEAK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassKind {
    Transient,
    Ergodic,
}

/// One communicating class.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateClass {
    pub kind: ClassKind,
    /// Member states (original indices, ascending).
    pub states: Vec<usize>,
    /// Largest probability mass any member column sends outside the class.
    pub leak: f64,
}

/// Partition of the state space into transient and ergodic classes, together
/// with the canonical ordering that puts the chain in block lower-triangular
/// form.
#[derive(Debug, Clone)]
pub struct StateClassification {
    chain_id: ChainId,
    n: usize,
    classes: Vec<StateClass>,
    transient_class_count: usize,
    transient_count: usize,
    class_of: Vec<usize>,
    canonical_order: Vec<usize>,
    position: Vec<usize>,
    absorbing: Vec<bool>,
    warnings: Vec<String>,
}

impl StateClassification {
    pub fn chain_id(&self) -> ChainId {
        self.chain_id
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// All classes in canonical order: transient first, then ergodic.
    pub fn classes(&self) -> &[StateClass] {
        &self.classes
    }

    pub fn transient_classes(&self) -> &[StateClass] {
        &self.classes[..self.transient_class_count]
    }

    /// Ergodic classes; class `m` in mask builders indexes this slice.
    pub fn ergodic_classes(&self) -> &[StateClass] {
        &self.classes[self.transient_class_count..]
    }

    /// Number of transient states.
    pub fn transient_count(&self) -> usize {
        self.transient_count
    }

    pub fn ergodic_count(&self) -> usize {
        self.n - self.transient_count
    }

    /// Index into [`classes`](Self::classes) of the class containing `state`.
    pub fn class_of(&self, state: usize) -> usize {
        self.class_of[state]
    }

    /// Index into [`ergodic_classes`](Self::ergodic_classes), if `state` is ergodic.
    pub fn ergodic_class_of(&self, state: usize) -> Option<usize> {
        self.class_of[state].checked_sub(self.transient_class_count)
    }

    pub fn is_ergodic(&self, state: usize) -> bool {
        self.class_of[state] >= self.transient_class_count
    }

    pub fn is_transient(&self, state: usize) -> bool {
        !self.is_ergodic(state)
    }

    pub fn is_absorbing(&self, state: usize) -> bool {
        self.absorbing[state]
    }

    pub fn absorbing_states(&self) -> Vec<usize> {
        (0..self.n).filter(|&i| self.absorbing[i]).collect()
    }

    pub fn ergodic_states(&self) -> Vec<usize> {
        (0..self.n).filter(|&i| self.is_ergodic(i)).collect()
    }

    /// Original indices listed in canonical order.
    pub fn canonical_order(&self) -> &[usize] {
        &self.canonical_order
    }

    /// Canonical position of each original state.
    pub fn position(&self) -> &[usize] {
        &self.position
    }

    /// Transient states in canonical order.
    pub fn transient_states(&self) -> &[usize] {
        &self.canonical_order[..self.transient_count]
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }
}

/// Strongly connected components of the transition graph (edge `j -> i`
/// whenever `T[i][j] > 0`), each tagged transient or ergodic, in canonical
/// order.
///
/// Transient classes are listed so that every transition goes from an
/// earlier class to a later one; among classes that are free to go next, the
/// one holding the smallest original index wins. Ergodic classes follow,
/// ordered by smallest member.
pub fn classify_states(chain: &StochasticChain) -> StateClassification {
    let n = chain.n();
    let succ: Vec<Vec<usize>> = (0..n)
        .map(|j| chain.column(j).map(|(i, _)| i).collect())
        .collect();
    let comps = tarjan(&succ);
    let ncomp = comps.len();
    let mut comp_of = vec![0usize; n];
    for (c, members) in comps.iter().enumerate() {
        for &v in members {
            comp_of[v] = c;
        }
    }

    // condensation edges, leak per component
    let mut out_edges: Vec<Vec<usize>> = vec![Vec::new(); ncomp];
    let mut indegree = vec![0usize; ncomp];
    let mut leak = vec![0.0f64; ncomp];
    for j in 0..n {
        let cj = comp_of[j];
        let mut col_leak = 0.0;
        for (i, v) in chain.column(j) {
            let ci = comp_of[i];
            if ci != cj {
                col_leak += v;
                out_edges[cj].push(ci);
            }
        }
        leak[cj] = leak[cj].max(col_leak);
    }
    for edges in &mut out_edges {
        edges.sort_unstable();
        edges.dedup();
    }
    for edges in &out_edges {
        for &c in edges {
            indegree[c] += 1;
        }
    }
    let ergodic: Vec<bool> = out_edges.iter().map(Vec::is_empty).collect();
    let min_state: Vec<usize> = comps
        .iter()
        .map(|m| *m.iter().min().expect("nonempty component"))
        .collect();

    // Kahn's algorithm over transient components, smallest member first
    let mut order = Vec::with_capacity(ncomp);
    let mut heap: BinaryHeap<Reverse<(usize, usize)>> = (0..ncomp)
        .filter(|&c| indegree[c] == 0 && !ergodic[c])
        .map(|c| Reverse((min_state[c], c)))
        .collect();
    while let Some(Reverse((_, c))) = heap.pop() {
        order.push(c);
        for &d in &out_edges[c] {
            indegree[d] -= 1;
            if indegree[d] == 0 && !ergodic[d] {
                heap.push(Reverse((min_state[d], d)));
            }
        }
    }
    let transient_class_count = order.len();
    let mut erg: Vec<usize> = (0..ncomp).filter(|&c| ergodic[c]).collect();
    erg.sort_by_key(|&c| min_state[c]);
    order.extend(erg);
    debug_assert_eq!(order.len(), ncomp);

    let mut classes = Vec::with_capacity(ncomp);
    let mut class_of = vec![0usize; n];
    let mut canonical_order = Vec::with_capacity(n);
    let mut warnings = Vec::new();
    for (k, &c) in order.iter().enumerate() {
        let mut states = comps[c].clone();
        states.sort_unstable();
        for &s in &states {
            class_of[s] = k;
        }
        canonical_order.extend_from_slice(&states);
        let kind = if ergodic[c] {
            ClassKind::Ergodic
        } else {
            ClassKind::Transient
        };
        if kind == ClassKind::Transient && leak[c] < NEARLY_CLOSED_LEAK {
            warnings.push(format!(
                "transient class containing {:?} leaks at most {:e} per step; results may be ill-conditioned",
                chain.label(states[0]),
                leak[c]
            ));
        }
        classes.push(StateClass {
            kind,
            states,
            leak: leak[c],
        });
    }
    let transient_count = classes[..transient_class_count]
        .iter()
        .map(|c| c.states.len())
        .sum();
    let mut position = vec![0usize; n];
    for (p, &s) in canonical_order.iter().enumerate() {
        position[s] = p;
    }
    let absorbing = (0..n)
        .map(|s| {
            let class = &classes[class_of[s]];
            class.kind == ClassKind::Ergodic
                && class.states.len() == 1
                && (chain.get(s, s) - 1.0).abs() <= chain.tol()
        })
        .collect();

    StateClassification {
        chain_id: chain.id(),
        n,
        classes,
        transient_class_count,
        transient_count,
        class_of,
        canonical_order,
        position,
        absorbing,
        warnings,
    }
}

/// Iterative Tarjan. Components come out in reverse topological order.
fn tarjan(succ: &[Vec<usize>]) -> Vec<Vec<usize>> {
    const UNSEEN: usize = usize::MAX;
    let n = succ.len();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut call: Vec<(usize, usize)> = Vec::new();
    let mut comps = Vec::new();
    let mut counter = 0;

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        call.push((root, 0));

        while let Some(top) = call.last_mut() {
            let v = top.0;
            if let Some(&w) = succ[v].get(top.1) {
                top.1 += 1;
                if index[w] == UNSEEN {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comps.push(comp);
            }
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
        }
    }
    comps
}
