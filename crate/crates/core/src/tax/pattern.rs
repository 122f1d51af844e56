use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rust_decimal::Decimal;

use super::tree::{Fragment, NodeId};
use super::TaxError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edge {
    /// parent-child
    Pc,
    /// ancestor-descendant
    Ad,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Cmp {
    fn holds(self, ord: Ordering) -> bool {
        match self {
            Cmp::Eq => ord == Ordering::Equal,
            Cmp::Ne => ord != Ordering::Equal,
            Cmp::Lt => ord == Ordering::Less,
            Cmp::Le => ord != Ordering::Greater,
            Cmp::Gt => ord == Ordering::Greater,
            Cmp::Ge => ord != Ordering::Less,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Cmp::Eq => "=",
            Cmp::Ne => "!=",
            Cmp::Lt => "<",
            Cmp::Le => "<=",
            Cmp::Gt => ">",
            Cmp::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValueTarget {
    Attribute(String),
    Text,
}

/// A comparison of an attribute (or the direct text) of the matched element
/// against a literal. Both sides are compared as numbers when both parse as
/// decimals, otherwise as strings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValuePredicate {
    pub target: ValueTarget,
    pub cmp: Cmp,
    pub literal: String,
}

impl ValuePredicate {
    pub fn attr(name: &str, cmp: Cmp, literal: impl Into<String>) -> Self {
        Self { target: ValueTarget::Attribute(name.to_string()), cmp, literal: literal.into() }
    }

    pub fn text(cmp: Cmp, literal: impl Into<String>) -> Self {
        Self { target: ValueTarget::Text, cmp, literal: literal.into() }
    }

    fn holds(&self, node: Fragment<'_>) -> bool {
        let owned;
        let value = match &self.target {
            ValueTarget::Attribute(a) => match node.attribute(a) {
                Some(v) => v,
                None => return false,
            },
            ValueTarget::Text => {
                owned = node.tree.text(node.root);
                owned.as_str()
            }
        };
        let ord = match (Decimal::from_str(value.trim()), Decimal::from_str(self.literal.trim())) {
            (Ok(a), Ok(b)) => a.cmp(&b),
            _ => value.cmp(self.literal.as_str()),
        };
        self.cmp.holds(ord)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternNode {
    /// Element tag to match; `None` matches any element.
    pub label: Option<String>,
    pub predicates: Vec<ValuePredicate>,
    /// Parent pattern node and the edge leading to this node.
    pub parent: Option<(usize, Edge)>,
    /// Projection keeps this node's whole subtree, not just the node.
    pub keep_subtree: bool,
}

/// A tree-shaped structural query. Node 0 is the root; every other node names
/// a parent with a smaller index, which keeps the pattern connected and
/// acyclic by construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternTree {
    nodes: Vec<PatternNode>,
    output: usize,
}

impl PatternTree {
    pub fn new(label: Option<&str>) -> Self {
        Self {
            nodes: vec![PatternNode {
                label: label.map(str::to_string),
                predicates: Vec::new(),
                parent: None,
                keep_subtree: false,
            }],
            output: 0,
        }
    }

    /// Shorthand for a root pattern on `label`.
    pub fn element(label: &str) -> Self {
        Self::new(Some(label))
    }

    /// Adds a node below `parent`, returning its index.
    pub fn add(&mut self, parent: usize, edge: Edge, label: Option<&str>) -> Result<usize, TaxError> {
        if parent >= self.nodes.len() {
            return Err(TaxError::InvalidPattern(format!("no pattern node {parent}")));
        }
        self.nodes.push(PatternNode {
            label: label.map(str::to_string),
            predicates: Vec::new(),
            parent: Some((parent, edge)),
            keep_subtree: false,
        });
        Ok(self.nodes.len() - 1)
    }

    pub fn with_predicate(mut self, node: usize, pred: ValuePredicate) -> Self {
        self.nodes[node].predicates.push(pred);
        self
    }

    /// Builder form of [`add`](Self::add); panics on an invalid parent.
    pub fn child(mut self, parent: usize, edge: Edge, label: &str) -> Self {
        self.add(parent, edge, Some(label)).expect("valid parent index");
        self
    }

    pub fn with_output(mut self, node: usize) -> Self {
        assert!(node < self.nodes.len(), "no pattern node {node}");
        self.output = node;
        self
    }

    pub fn keep_subtree(mut self, node: usize) -> Self {
        self.nodes[node].keep_subtree = true;
        self
    }

    pub fn last(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn nodes(&self) -> &[PatternNode] {
        &self.nodes
    }

    pub fn output(&self) -> usize {
        self.output
    }

    pub(crate) fn accepts(&self, idx: usize, node: Fragment<'_>) -> bool {
        let p = &self.nodes[idx];
        match node.tag() {
            None => false,
            Some(tag) => {
                p.label.as_deref().is_none_or(|l| l == tag)
                    && p.predicates.iter().all(|pr| pr.holds(node))
            }
        }
    }

    fn fmt_node(&self, idx: usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = &self.nodes[idx];
        f.write_str(n.label.as_deref().unwrap_or("*"))?;
        for p in &n.predicates {
            match &p.target {
                ValueTarget::Attribute(a) => write!(f, "[@{a} {} \"{}\"]", p.cmp.symbol(), p.literal)?,
                ValueTarget::Text => write!(f, "[text() {} \"{}\"]", p.cmp.symbol(), p.literal)?,
            }
        }
        if idx == self.output {
            f.write_str("$")?;
        }
        if n.keep_subtree {
            f.write_str("+")?;
        }
        let kids: Vec<_> = (0..self.nodes.len())
            .filter(|&c| matches!(self.nodes[c].parent, Some((p, _)) if p == idx))
            .collect();
        match kids.len() {
            0 => Ok(()),
            1 => self.fmt_edge(kids[0], f),
            _ => {
                f.write_str("{")?;
                for (i, &k) in kids.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    self.fmt_edge(k, f)?;
                }
                f.write_str("}")
            }
        }
    }

    fn fmt_edge(&self, idx: usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.nodes[idx].parent {
            Some((_, Edge::Ad)) => f.write_str("//")?,
            _ => f.write_str("/")?,
        }
        self.fmt_node(idx, f)
    }
}

/// Compact XPath-like rendering: `/` for pc, `//` for ad, `$` marks the
/// output node, `+` a subtree-keeping node, `{a, b}` sibling branches.
impl fmt::Display for PatternTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_node(0, f)
    }
}

/// One embedding of a pattern into a data tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessTree<'a> {
    /// Position of the matched tree in the input forest.
    pub tree_index: usize,
    pub fragment: Fragment<'a>,
    /// Image of each pattern node, indexed like the pattern's nodes.
    pub bindings: Vec<NodeId>,
    pub output: usize,
}

impl<'a> WitnessTree<'a> {
    pub fn output_node(&self) -> Fragment<'a> {
        self.fragment.tree.fragment(self.bindings[self.output])
    }

    pub fn image(&self, pattern_node: usize) -> Fragment<'a> {
        self.fragment.tree.fragment(self.bindings[pattern_node])
    }
}

/// All witnesses of `pattern` in `forest`, ordered by forest position and then
/// by the document order of the output node's image.
pub fn match_pattern<'a>(pattern: &PatternTree, forest: &[Fragment<'a>]) -> Vec<WitnessTree<'a>> {
    let mut out = Vec::new();
    for (ti, frag) in forest.iter().enumerate() {
        let tree = frag.tree;
        let mut bindings = vec![NodeId(0); pattern.nodes.len()];
        for cand in tree.subtree(frag.root) {
            if pattern.accepts(0, tree.fragment(cand)) {
                bindings[0] = cand;
                extend(pattern, *frag, 1, &mut bindings, &mut |b| {
                    out.push(WitnessTree {
                        tree_index: ti,
                        fragment: *frag,
                        bindings: b.to_vec(),
                        output: pattern.output,
                    })
                });
            }
        }
    }
    out.sort_by(|a, b| {
        (a.tree_index, a.bindings[a.output], &a.bindings).cmp(&(b.tree_index, b.bindings[b.output], &b.bindings))
    });
    out.dedup_by(|a, b| a.tree_index == b.tree_index && a.bindings == b.bindings);
    out
}

fn extend(
    pattern: &PatternTree,
    frag: Fragment<'_>,
    idx: usize,
    bindings: &mut Vec<NodeId>,
    emit: &mut dyn FnMut(&[NodeId]),
) {
    if idx == pattern.nodes.len() {
        emit(bindings);
        return;
    }
    let tree = frag.tree;
    let (parent, edge) = pattern.nodes[idx].parent.expect("non-root pattern node has a parent");
    let anchor = bindings[parent];
    let candidates: Vec<NodeId> = match edge {
        Edge::Pc => tree.child_elements(anchor).collect(),
        Edge::Ad => tree.subtree(anchor).skip(1).filter(|&n| tree.is_element(n)).collect(),
    };
    for c in candidates {
        if pattern.accepts(idx, tree.fragment(c)) {
            bindings[idx] = c;
            extend(pattern, frag, idx + 1, bindings, emit);
        }
    }
}
