//! Edit script generation over a matching (Chawathe et al. style).
//!
//! The destination tree is walked breadth-first while a working copy of the
//! source tree is edited into shape: unmatched destination nodes are
//! inserted, relabeled pairs updated, nodes under the wrong parent moved, and
//! children brought into order along a longest common subsequence. Unmatched
//! source nodes are deleted last, in post-order.

use std::fmt;

use super::matcher::Matching;
use super::tree::FlatTree;
use super::DiffError;
use crate::ast::{AstNode, NodeKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EditKind {
    Insert,
    Delete,
    Update,
    Move,
}

impl EditKind {
    pub fn name(self) -> &'static str {
        match self {
            EditKind::Insert => "INSERT",
            EditKind::Delete => "DELETE",
            EditKind::Update => "UPDATE",
            EditKind::Move => "MOVE",
        }
    }
}

impl fmt::Display for EditKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Identifies a node of the tree being edited: either an original source
/// node (by source pre-order id) or a node created by an earlier INSERT (by
/// the destination pre-order id it was created for).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeRef {
    Source(usize),
    Target(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EditOperation {
    pub op: EditKind,
    pub node_kind: NodeKind,
    pub node: NodeRef,
    /// New parent for INSERT and MOVE, current parent for DELETE, `None` for
    /// UPDATE.
    pub parent: Option<NodeRef>,
    /// Child position at which INSERT and MOVE place the node, counted in
    /// the tree as it is when the operation is applied.
    pub position: usize,
    pub old_label: Option<String>,
    pub new_label: Option<String>,
    pub old_parent_path: Option<String>,
    pub new_parent_path: Option<String>,
    pub old_index: Option<usize>,
    pub new_index: Option<usize>,
    /// Source id of the parent the node had in the source tree.
    pub old_parent: Option<usize>,
}

impl EditOperation {
    /// For a MOVE: whether the node stays under the node that was its parent
    /// in the source tree.
    pub fn same_parent(&self) -> bool {
        match (self.parent, self.old_parent) {
            (Some(NodeRef::Source(p)), Some(q)) => p == q,
            _ => false,
        }
    }

    pub fn label(&self) -> &str {
        self.new_label.as_deref().or(self.old_label.as_deref()).unwrap_or("")
    }
}

pub fn edit_script(src: &AstNode, dst: &AstNode, m: &Matching) -> Result<Vec<EditOperation>, DiffError> {
    let s = FlatTree::new(src);
    let d = FlatTree::new(dst);
    let (src_partner, dst_partner) = validate(&s, &d, m)?;
    Ok(script_flat(&s, &d, &src_partner, &dst_partner))
}

/// Partner of every node on the other side, by pre-order id.
type Partners = Vec<Option<usize>>;

pub(crate) fn validate(s: &FlatTree<'_>, d: &FlatTree<'_>, m: &Matching) -> Result<(Partners, Partners), DiffError> {
    let mut src_partner = vec![None; s.len()];
    let mut dst_partner = vec![None; d.len()];
    for (a, b) in m.pairs() {
        if a >= s.len() || b >= d.len() {
            return Err(DiffError::InvalidMatching(format!("pair ({a}, {b}) is out of range")));
        }
        if src_partner[a].is_some() || dst_partner[b].is_some() {
            return Err(DiffError::InvalidMatching(format!("pair ({a}, {b}) is not injective")));
        }
        if s.kind(a) != d.kind(b) {
            return Err(DiffError::InvalidMatching(format!(
                "pair ({a}, {b}) matches {} with {}",
                s.kind(a),
                d.kind(b)
            )));
        }
        src_partner[a] = Some(b);
        dst_partner[b] = Some(a);
    }
    if src_partner[0] != Some(0) {
        return Err(DiffError::InvalidMatching("roots are not matched".into()));
    }
    Ok((src_partner, dst_partner))
}

struct WorkNode {
    parent: Option<usize>,
    children: Vec<usize>,
    label: String,
    node_ref: NodeRef,
}

struct Work<'s, 'd> {
    s: &'s FlatTree<'s>,
    d: &'d FlatTree<'d>,
    nodes: Vec<WorkNode>,
    /// Working id of the partner of each destination node.
    dst_to_work: Vec<Option<usize>>,
    work_to_dst: Vec<Option<usize>>,
    work_in_order: Vec<bool>,
    dst_in_order: Vec<bool>,
    ops: Vec<EditOperation>,
}

pub(crate) fn script_flat(
    s: &FlatTree<'_>,
    d: &FlatTree<'_>,
    src_partner: &[Option<usize>],
    dst_partner: &[Option<usize>],
) -> Vec<EditOperation> {
    let nodes = (0..s.len())
        .map(|id| WorkNode {
            parent: s.nodes[id].parent,
            children: s.nodes[id].children.clone(),
            label: s.label(id).to_string(),
            node_ref: NodeRef::Source(id),
        })
        .collect();
    let mut w = Work {
        s,
        d,
        nodes,
        dst_to_work: dst_partner.to_vec(),
        work_to_dst: src_partner.to_vec(),
        work_in_order: vec![false; s.len()],
        dst_in_order: vec![false; d.len()],
        ops: Vec::new(),
    };
    w.run();
    w.ops
}

impl Work<'_, '_> {
    fn run(&mut self) {
        for x in self.d.bfs() {
            let parent_in_work = self.d.nodes[x]
                .parent
                .map(|y| self.dst_to_work[y].expect("parents are processed before children"));
            let wid = match self.dst_to_work[x] {
                None => {
                    let z = parent_in_work.expect("the root is always matched");
                    let k = self.find_pos(x);
                    let wid = self.nodes.len();
                    self.nodes.push(WorkNode {
                        parent: Some(z),
                        children: Vec::new(),
                        label: self.d.label(x).to_string(),
                        node_ref: NodeRef::Target(x),
                    });
                    self.nodes[z].children.insert(k, wid);
                    self.work_to_dst.push(Some(x));
                    self.work_in_order.push(false);
                    self.dst_to_work[x] = Some(wid);
                    self.ops.push(EditOperation {
                        op: EditKind::Insert,
                        node_kind: self.d.kind(x),
                        node: NodeRef::Target(x),
                        parent: Some(self.nodes[z].node_ref),
                        position: k,
                        old_label: None,
                        new_label: Some(self.d.label(x).to_string()),
                        old_parent_path: None,
                        new_parent_path: Some(self.d.nodes[x].path.clone()),
                        old_index: None,
                        new_index: Some(self.d.nodes[x].index),
                        old_parent: None,
                    });
                    wid
                }
                Some(wid) => {
                    if self.nodes[wid].label != self.d.label(x) {
                        self.ops.push(EditOperation {
                            op: EditKind::Update,
                            node_kind: self.d.kind(x),
                            node: self.nodes[wid].node_ref,
                            parent: None,
                            position: 0,
                            old_label: Some(self.nodes[wid].label.clone()),
                            new_label: Some(self.d.label(x).to_string()),
                            old_parent_path: Some(self.s.nodes[wid].path.clone()),
                            new_parent_path: Some(self.d.nodes[x].path.clone()),
                            old_index: Some(self.s.nodes[wid].index),
                            new_index: Some(self.d.nodes[x].index),
                            old_parent: self.s.nodes[wid].parent,
                        });
                        self.nodes[wid].label = self.d.label(x).to_string();
                    }
                    if let Some(z) = parent_in_work {
                        if self.nodes[wid].parent != Some(z) {
                            self.detach(wid);
                            let k = self.find_pos(x);
                            self.attach(wid, z, k);
                            self.push_move(wid, x, z, k);
                        }
                    }
                    wid
                }
            };
            self.work_in_order[wid] = true;
            self.dst_in_order[x] = true;
            self.align_children(wid, x);
        }

        for id in self.s.postorder() {
            if self.work_to_dst[id].is_none() {
                debug_assert!(self.nodes[id].children.is_empty());
                let parent = self.nodes[id].parent;
                self.detach(id);
                self.ops.push(EditOperation {
                    op: EditKind::Delete,
                    node_kind: self.s.kind(id),
                    node: NodeRef::Source(id),
                    parent: parent.map(|p| self.nodes[p].node_ref),
                    position: 0,
                    old_label: Some(self.s.label(id).to_string()),
                    new_label: None,
                    old_parent_path: Some(self.s.nodes[id].path.clone()),
                    new_parent_path: None,
                    old_index: Some(self.s.nodes[id].index),
                    new_index: None,
                    old_parent: self.s.nodes[id].parent,
                });
            }
        }
    }

    fn push_move(&mut self, wid: usize, x: usize, z: usize, k: usize) {
        self.ops.push(EditOperation {
            op: EditKind::Move,
            node_kind: self.d.kind(x),
            node: self.nodes[wid].node_ref,
            parent: Some(self.nodes[z].node_ref),
            position: k,
            old_label: Some(self.s.label(wid).to_string()),
            new_label: Some(self.d.label(x).to_string()),
            old_parent_path: Some(self.s.nodes[wid].path.clone()),
            new_parent_path: Some(self.d.nodes[x].path.clone()),
            old_index: Some(self.s.nodes[wid].index),
            new_index: Some(self.d.nodes[x].index),
            old_parent: self.s.nodes[wid].parent,
        });
    }

    fn detach(&mut self, wid: usize) {
        if let Some(p) = self.nodes[wid].parent.take() {
            self.nodes[p].children.retain(|&c| c != wid);
        }
    }

    fn attach(&mut self, wid: usize, parent: usize, k: usize) {
        self.nodes[parent].children.insert(k, wid);
        self.nodes[wid].parent = Some(parent);
    }

    /// Position for the partner of `x` among its new siblings: right after
    /// the partner of the nearest in-order left sibling of `x`.
    fn find_pos(&self, x: usize) -> usize {
        let Some(y) = self.d.nodes[x].parent else { return 0 };
        let siblings = &self.d.nodes[y].children;
        let before = &siblings[..siblings.iter().position(|&c| c == x).unwrap_or(0)];
        let Some(&v) = before.iter().rev().find(|&&v| self.dst_in_order[v]) else {
            return 0;
        };
        let u = self.dst_to_work[v].expect("in-order nodes are matched");
        let parent = self.nodes[u].parent.expect("in-order nodes are attached");
        self.nodes[parent]
            .children
            .iter()
            .position(|&c| c == u)
            .map_or(0, |i| i + 1)
    }

    fn align_children(&mut self, wid: usize, x: usize) {
        for &c in &self.nodes[wid].children {
            self.work_in_order[c] = false;
        }
        for &c in &self.d.nodes[x].children {
            self.dst_in_order[c] = false;
        }
        let s1: Vec<usize> = self.nodes[wid]
            .children
            .iter()
            .copied()
            .filter(|&c| self.work_to_dst[c].is_some_and(|p| self.d.nodes[p].parent == Some(x)))
            .collect();
        let s2: Vec<usize> = self.d.nodes[x]
            .children
            .iter()
            .copied()
            .filter(|&c| self.dst_to_work[c].is_some_and(|p| self.nodes[p].parent == Some(wid)))
            .collect();
        let common = lcs(&s1, &s2, |a, b| self.work_to_dst[a] == Some(b));
        for &(a, b) in &common {
            self.work_in_order[a] = true;
            self.dst_in_order[b] = true;
        }
        for &b in &s2 {
            let a = self.dst_to_work[b].expect("filtered to matched nodes");
            if common.iter().any(|&(_, cb)| cb == b) {
                continue;
            }
            self.detach(a);
            let k = self.find_pos(b);
            self.attach(a, wid, k);
            self.push_move(a, b, wid, k);
            self.work_in_order[a] = true;
            self.dst_in_order[b] = true;
        }
    }
}

/// Longest common subsequence of `a` and `b` under `eq`, as index pairs of
/// the original elements. Ties prefer the earliest elements of `a`.
fn lcs(a: &[usize], b: &[usize], eq: impl Fn(usize, usize) -> bool) -> Vec<(usize, usize)> {
    let (n, m) = (a.len(), b.len());
    let mut table = vec![vec![0u32; m + 1]; n + 1];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            table[i][j] = if eq(a[i], b[j]) {
                table[i + 1][j + 1] + 1
            } else {
                table[i + 1][j].max(table[i][j + 1])
            };
        }
    }
    let mut out = Vec::with_capacity(table[0][0] as usize);
    let (mut i, mut j) = (0, 0);
    while i < n && j < m {
        if eq(a[i], b[j]) {
            out.push((a[i], b[j]));
            i += 1;
            j += 1;
        } else if table[i + 1][j] >= table[i][j + 1] {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}
