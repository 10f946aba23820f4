use crate::ast::{split_markers, AstNode, NodeKind};

/// Arena view of an [`AstNode`] tree. Node ids are pre-order positions.
#[derive(Debug)]
pub(crate) struct FlatTree<'a> {
    pub nodes: Vec<FlatNode<'a>>,
}

#[derive(Debug)]
pub(crate) struct FlatNode<'a> {
    pub node: &'a AstNode,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Position among the parent's children.
    pub index: usize,
    pub hash: u64,
    pub size: usize,
    pub leaves: usize,
    /// Entity path of the enclosing classes/methods/fields.
    pub path: String,
}

impl<'a> FlatTree<'a> {
    pub fn new(root: &'a AstNode) -> Self {
        let mut tree = FlatTree {
            nodes: Vec::with_capacity(root.node_count()),
        };
        tree.push(root, None, 0, String::new());
        tree
    }

    fn push(&mut self, node: &'a AstNode, parent: Option<usize>, index: usize, path: String) -> usize {
        let id = self.nodes.len();
        let child_path = if node.kind.is_entity() {
            let segment = entity_segment(node);
            if path.is_empty() {
                segment
            } else {
                format!("{path}.{segment}")
            }
        } else {
            path.clone()
        };
        self.nodes.push(FlatNode {
            node,
            parent,
            children: Vec::with_capacity(node.children.len()),
            index,
            hash: 0,
            size: 1,
            leaves: 0,
            path,
        });
        let mut child_hashes = Vec::with_capacity(node.children.len());
        for (i, child) in node.children.iter().enumerate() {
            let cid = self.push(child, Some(id), i, child_path.clone());
            self.nodes[id].children.push(cid);
            child_hashes.push(self.nodes[cid].hash);
        }
        let (size, leaves) = if node.children.is_empty() {
            (1, 1)
        } else {
            self.nodes[id]
                .children
                .iter()
                .fold((1, 0), |(s, l), &c| (s + self.nodes[c].size, l + self.nodes[c].leaves))
        };
        let n = &mut self.nodes[id];
        n.size = size;
        n.leaves = leaves;
        n.hash = crate::ast::hash_parts(node.kind, &node.label, child_hashes.into_iter());
        id
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn kind(&self, id: usize) -> NodeKind {
        self.nodes[id].node.kind
    }

    pub fn label(&self, id: usize) -> &'a str {
        &self.nodes[id].node.label
    }

    pub fn is_leaf(&self, id: usize) -> bool {
        self.nodes[id].children.is_empty()
    }

    /// Ids of the subtree rooted at `id`, in pre-order.
    pub fn subtree(&self, id: usize) -> std::ops::Range<usize> {
        id..id + self.nodes[id].size
    }

    pub fn ancestors(&self, id: usize) -> impl Iterator<Item = usize> + '_ {
        std::iter::successors(self.nodes[id].parent, move |&p| self.nodes[p].parent)
    }

    pub fn postorder(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.len());
        let mut stack = vec![(0usize, false)];
        while let Some((id, expanded)) = stack.pop() {
            if expanded {
                out.push(id);
            } else {
                stack.push((id, true));
                for &c in self.nodes[id].children.iter().rev() {
                    stack.push((c, false));
                }
            }
        }
        out
    }

    pub fn bfs(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.len());
        out.push(0);
        let mut i = 0;
        while i < out.len() {
            out.extend_from_slice(&self.nodes[out[i]].children);
            i += 1;
        }
        out
    }
}

/// Path segment contributed by an entity: methods get a `()` suffix so that
/// class and method segments can be told apart.
pub(crate) fn entity_segment(node: &AstNode) -> String {
    match node.kind {
        NodeKind::Method => format!("{}()", node.label),
        _ => node.label.clone(),
    }
}

/// Splits an entity label `name:Type` (markers removed) into its parts.
pub(crate) fn name_and_type(label: &str) -> (&str, &str) {
    let (_, bare) = split_markers(label);
    match bare.split_once(':') {
        Some((name, ty)) => (name, ty),
        None => (bare, ""),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{parse_fixture, structural_hash};

    #[test]
    fn flattening_records_structure_and_paths() {
        let root = parse_fixture(
            r#"(COMPILATION_UNIT "" (CLASS "A" (METHOD "m" (PARAMETER_LIST "" (PARAMETER "x:int")) (BODY "" (STATEMENT "s;"))) (FIELD "f:int")))"#,
        )
        .unwrap();
        let flat = FlatTree::new(&root);
        assert_eq!(flat.len(), 8);
        assert_eq!(flat.nodes[1].path, "");
        assert_eq!(flat.nodes[2].path, "A");
        assert_eq!(flat.nodes[4].path, "A.m()");
        assert_eq!(flat.nodes[7].path, "A");
        assert_eq!(flat.nodes[0].size, 8);
        assert_eq!(flat.nodes[0].leaves, 3);
        assert_eq!(flat.nodes[2].hash, structural_hash(&root.children[0].children[0]));
        assert_eq!(flat.bfs(), vec![0, 1, 2, 7, 3, 5, 4, 6]);
        assert_eq!(flat.ancestors(4).collect::<Vec<_>>(), vec![3, 2, 1, 0]);
        assert_eq!(flat.subtree(2), 2..7);
    }

    #[test]
    fn postorder_visits_children_first() {
        let root =
            parse_fixture(r#"(COMPILATION_UNIT "" (CLASS "A" (FIELD "a:int") (FIELD "b:int")) (CLASS "B"))"#).unwrap();
        let flat = FlatTree::new(&root);
        assert_eq!(flat.postorder(), vec![2, 3, 1, 4, 0]);
    }

    #[test]
    fn name_type_split_ignores_markers() {
        assert_eq!(name_and_type("x:int"), ("x", "int"));
        assert_eq!(name_and_type("@Inject svc:Service"), ("svc", "Service"));
        assert_eq!(name_and_type("odd"), ("odd", ""));
    }
}
