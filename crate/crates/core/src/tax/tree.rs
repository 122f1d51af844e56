use std::fmt;

use roxmltree::Document;

use crate::xml::{escape, tag};

/// Stable node id. Ids are assigned in document (pre-)order, so comparing
/// ids compares document positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeKind {
    Element(String),
    Attribute { name: String, value: String },
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Node {
    kind: NodeKind,
    parent: Option<NodeId>,
    children: Vec<NodeId>,
    /// Id of the last node in this node's subtree.
    last: NodeId,
}

/// An ordered labeled tree. Attribute nodes are leaf children of their
/// element and precede its content children.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataTree {
    nodes: Vec<Node>,
}

impl DataTree {
    /// Parses an XML document. Whitespace-only text, comments and processing
    /// instructions are dropped.
    pub fn parse(text: &str) -> Result<DataTree, roxmltree::Error> {
        let doc = Document::parse(text)?;
        let mut b = Builder::default();
        b.copy_roxml(doc.root_element(), None);
        Ok(b.finish())
    }

    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn kind(&self, id: NodeId) -> &NodeKind {
        &self.nodes[id.index()].kind
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id.index()].parent
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.nodes[id.index()].children
    }

    pub fn tag(&self, id: NodeId) -> Option<&str> {
        match self.kind(id) {
            NodeKind::Element(t) => Some(t),
            _ => None,
        }
    }

    pub fn is_element(&self, id: NodeId) -> bool {
        matches!(self.kind(id), NodeKind::Element(_))
    }

    pub fn attribute(&self, id: NodeId, name: &str) -> Option<&str> {
        self.children(id).iter().find_map(|&c| match self.kind(c) {
            NodeKind::Attribute { name: n, value } if n == name => Some(value.as_str()),
            _ => None,
        })
    }

    /// Concatenated direct text children.
    pub fn text(&self, id: NodeId) -> String {
        self.children(id)
            .iter()
            .filter_map(|&c| match self.kind(c) {
                NodeKind::Text(t) => Some(t.as_str()),
                _ => None,
            })
            .collect()
    }

    pub fn child_elements(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.children(id).iter().copied().filter(|&c| self.is_element(c))
    }

    /// `id` and all nodes below it, in document order.
    pub fn subtree(&self, id: NodeId) -> impl Iterator<Item = NodeId> {
        (id.0..=self.nodes[id.index()].last.0).map(NodeId)
    }

    /// Proper ancestor test.
    pub fn is_ancestor(&self, ancestor: NodeId, node: NodeId) -> bool {
        ancestor < node && node <= self.nodes[ancestor.index()].last
    }

    pub fn fragment(&self, root: NodeId) -> Fragment<'_> {
        Fragment { tree: self, root }
    }

    pub fn as_fragment(&self) -> Fragment<'_> {
        self.fragment(self.root())
    }

    /// Copies the subtree rooted at `root` into a new tree, keeping only the
    /// nodes accepted by `keep`. A rejected node drops its whole subtree.
    pub fn extract(&self, root: NodeId, keep: impl Fn(NodeId) -> bool) -> DataTree {
        let mut b = Builder::default();
        self.copy_into(&mut b, root, None, &keep);
        b.finish()
    }

    fn copy_into(&self, b: &mut Builder, id: NodeId, parent: Option<NodeId>, keep: &dyn Fn(NodeId) -> bool) {
        let new = b.push(self.kind(id).clone(), parent);
        for &c in self.children(id) {
            if keep(c) {
                self.copy_into(b, c, Some(new), keep);
            }
        }
        b.close(new);
    }

    fn write_xml(&self, id: NodeId, out: &mut String) {
        match self.kind(id) {
            NodeKind::Element(t) => {
                let attrs: Vec<(&str, &str)> = self
                    .children(id)
                    .iter()
                    .filter_map(|&c| match self.kind(c) {
                        NodeKind::Attribute { name, value } => Some((name.as_str(), value.as_str())),
                        _ => None,
                    })
                    .collect();
                let content: Vec<NodeId> = self
                    .children(id)
                    .iter()
                    .copied()
                    .filter(|&c| !matches!(self.kind(c), NodeKind::Attribute { .. }))
                    .collect();
                out.push_str(&tag(t, &attrs, content.is_empty()));
                if !content.is_empty() {
                    for c in content {
                        self.write_xml(c, out);
                    }
                    out.push_str(&format!("</{t}>"));
                }
            }
            NodeKind::Text(t) => out.push_str(&escape(t)),
            // attributes are written by their element
            NodeKind::Attribute { .. } => {}
        }
    }
}

impl fmt::Display for DataTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.as_fragment().to_xml())
    }
}

/// A borrowed subtree: the unit the algebra operators pass around.
#[derive(Debug, Clone, Copy)]
pub struct Fragment<'a> {
    pub tree: &'a DataTree,
    pub root: NodeId,
}

impl<'a> Fragment<'a> {
    pub fn tag(&self) -> Option<&'a str> {
        self.tree.tag(self.root)
    }

    pub fn attribute(&self, name: &str) -> Option<&'a str> {
        self.tree.attribute(self.root, name)
    }

    pub fn child_elements(&self) -> impl Iterator<Item = Fragment<'a>> + 'a {
        let tree = self.tree;
        tree.child_elements(self.root).map(move |c| tree.fragment(c))
    }

    /// First child element with the given tag whose `attr` equals `value`.
    pub fn child_where(&self, tag: &str, attr: &str, value: &str) -> Option<Fragment<'a>> {
        self.child_elements()
            .find(|c| c.tag() == Some(tag) && c.attribute(attr) == Some(value))
    }

    pub fn to_tree(&self) -> DataTree {
        self.tree.extract(self.root, |_| true)
    }

    pub fn to_xml(&self) -> String {
        let mut s = String::new();
        self.tree.write_xml(self.root, &mut s);
        s
    }
}

impl PartialEq for Fragment<'_> {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self.tree, other.tree) && self.root == other.root
    }
}

impl Eq for Fragment<'_> {}

#[derive(Default)]
struct Builder {
    nodes: Vec<Node>,
}

impl Builder {
    fn push(&mut self, kind: NodeKind, parent: Option<NodeId>) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(Node { kind, parent, children: Vec::new(), last: id });
        if let Some(p) = parent {
            self.nodes[p.index()].children.push(id);
        }
        id
    }

    fn close(&mut self, id: NodeId) {
        self.nodes[id.index()].last = NodeId(self.nodes.len() as u32 - 1);
    }

    fn copy_roxml(&mut self, node: roxmltree::Node<'_, '_>, parent: Option<NodeId>) {
        let id = self.push(NodeKind::Element(node.tag_name().name().to_string()), parent);
        for a in node.attributes() {
            let aid = self.push(
                NodeKind::Attribute { name: a.name().to_string(), value: a.value().to_string() },
                Some(id),
            );
            self.close(aid);
        }
        for c in node.children() {
            if c.is_element() {
                self.copy_roxml(c, Some(id));
            } else if c.is_text() {
                let t = c.text().unwrap_or_default();
                if !t.trim().is_empty() {
                    let tid = self.push(NodeKind::Text(t.to_string()), Some(id));
                    self.close(tid);
                }
            }
        }
        self.close(id);
    }

    fn finish(self) -> DataTree {
        DataTree { nodes: self.nodes }
    }
}
