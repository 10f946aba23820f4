//! Test support: random trees for property tests and scripted git
//! repositories for mining tests.
//!
//! Random trees follow the placement rules of the source grammar and draw labels
//! from small alphabets so that equal subtrees, repeated leaves and label
//! collisions are common.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::ast::{AstNode, NodeKind};

pub mod git;

const NAMES: &[&str] = &["a", "b", "c", "run", "test", "get"];
const TYPES: &[&str] = &["int", "long", "String"];
const STATEMENTS: &[&str] = &["x = 1;", "y = 2;", "f();", "return x;", "i++;", "log(x);"];

fn pick<R: Rng + ?Sized>(rng: &mut R, options: &[&str]) -> String {
    options.choose(rng).copied().unwrap_or_default().to_string()
}

/// Random COMPILATION_UNIT with at most `max_nodes` nodes.
pub fn random_tree<R: Rng + ?Sized>(rng: &mut R, max_nodes: usize) -> AstNode {
    let mut budget = rng.gen_range(1..=max_nodes.max(1)) - 1;
    let mut root = AstNode::empty_unit();
    while budget >= 1 && rng.gen_bool(0.8) {
        budget -= 1;
        let class = random_class(rng, &mut budget, 0);
        root.children.push(class);
    }
    root
}

fn random_class<R: Rng + ?Sized>(rng: &mut R, budget: &mut usize, depth: usize) -> AstNode {
    let mut class = AstNode::new(NodeKind::Class, pick(rng, &["A", "B", "C"]));
    if *budget >= 1 && rng.gen_bool(0.2) {
        *budget -= 1;
        class
            .children
            .push(AstNode::new(NodeKind::DocComment, pick(rng, &["doc", "more doc"])));
    }
    while *budget >= 1 && rng.gen_bool(0.7) {
        let roll = rng.gen_range(0..10);
        if roll < 3 {
            *budget -= 1;
            let label = format!("{}:{}", pick(rng, NAMES), pick(rng, TYPES));
            class.children.push(AstNode::new(NodeKind::Field, label));
        } else if roll < 9 && *budget >= 4 {
            *budget -= 4;
            class.children.push(random_method(rng, budget));
        } else if depth < 1 {
            *budget -= 1;
            class.children.push(random_class(rng, budget, depth + 1));
        } else {
            break;
        }
    }
    class
}

fn random_method<R: Rng + ?Sized>(rng: &mut R, budget: &mut usize) -> AstNode {
    let mut children = Vec::new();
    if *budget >= 1 && rng.gen_bool(0.25) {
        *budget -= 1;
        children.push(AstNode::new(NodeKind::DocComment, pick(rng, &["doc", "returns x"])));
    }
    children.push(AstNode::new(NodeKind::ReturnType, pick(rng, &["void", "int"])));
    let mut params = AstNode::new(NodeKind::ParameterList, "");
    while *budget >= 1 && rng.gen_bool(0.4) {
        *budget -= 1;
        let label = format!("{}:{}", pick(rng, NAMES), pick(rng, TYPES));
        params.children.push(AstNode::new(NodeKind::Parameter, label));
    }
    children.push(params);
    children.push(random_body(rng, budget, 0));
    AstNode::with_children(NodeKind::Method, pick(rng, NAMES), children)
}

fn random_body<R: Rng + ?Sized>(rng: &mut R, budget: &mut usize, depth: usize) -> AstNode {
    let mut body = AstNode::new(NodeKind::Body, "");
    while *budget >= 1 && rng.gen_bool(0.65) {
        if depth < 2 && *budget >= 3 && rng.gen_bool(0.2) {
            *budget -= 3;
            let keyword = pick(rng, &["if", "while", "for"]);
            let mut stmt = AstNode::new(NodeKind::Statement, keyword.clone());
            stmt.children
                .push(AstNode::new(NodeKind::Condition, pick(rng, &["x > 0", "ok", "i < n"])));
            stmt.children.push(random_body(rng, budget, depth + 1));
            if keyword == "if" && *budget >= 1 && rng.gen_bool(0.3) {
                *budget -= 1;
                stmt.children.push(random_body(rng, budget, depth + 1));
            }
            body.children.push(stmt);
        } else {
            *budget -= 1;
            body.children
                .push(AstNode::new(NodeKind::Statement, pick(rng, STATEMENTS)));
        }
    }
    body
}

/// Applies a handful of random edits (relabel, insert, delete, move, swap)
/// to a copy of `tree`, keeping the node count at or below `max_nodes`.
pub fn mutate_tree<R: Rng + ?Sized>(rng: &mut R, tree: &AstNode, max_nodes: usize) -> AstNode {
    let mut out = tree.clone();
    let edits = rng.gen_range(1..=5);
    for _ in 0..edits {
        let count = out.node_count();
        match rng.gen_range(0..5) {
            0 => {
                let target = rng.gen_range(0..count);
                if let Some(node) = nth_mut(&mut out, target) {
                    if node.kind != NodeKind::CompilationUnit {
                        node.label = match node.kind {
                            NodeKind::Statement if node.children.is_empty() => pick(rng, STATEMENTS),
                            NodeKind::Parameter | NodeKind::Field => {
                                format!("{}:{}", pick(rng, NAMES), pick(rng, TYPES))
                            }
                            NodeKind::Body | NodeKind::ParameterList => String::new(),
                            _ => pick(rng, NAMES),
                        };
                    }
                }
            }
            1 if count < max_nodes => {
                let target = rng.gen_range(0..count);
                if let Some(node) = nth_mut(&mut out, target) {
                    let child = match node.kind {
                        NodeKind::Body => Some(AstNode::new(NodeKind::Statement, pick(rng, STATEMENTS))),
                        NodeKind::ParameterList => Some(AstNode::new(
                            NodeKind::Parameter,
                            format!("{}:{}", pick(rng, NAMES), pick(rng, TYPES)),
                        )),
                        NodeKind::Class => Some(AstNode::new(
                            NodeKind::Field,
                            format!("{}:{}", pick(rng, NAMES), pick(rng, TYPES)),
                        )),
                        NodeKind::CompilationUnit => Some(AstNode::new(NodeKind::Class, pick(rng, NAMES))),
                        _ => None,
                    };
                    if let Some(child) = child {
                        let at = rng.gen_range(0..=node.children.len());
                        node.children.insert(at, child);
                    }
                }
            }
            2 => {
                if count > 1 {
                    let target = rng.gen_range(1..count);
                    remove_nth(&mut out, target);
                }
            }
            3 => {
                // Move a statement into another body.
                let bodies = count_kind(&out, NodeKind::Body);
                if bodies >= 1 {
                    let from = rng.gen_range(0..bodies);
                    let taken = nth_of_kind_mut(&mut out, NodeKind::Body, from)
                        .filter(|b| !b.children.is_empty())
                        .map(|b| {
                            let i = rng.gen_range(0..b.children.len());
                            b.children.remove(i)
                        });
                    if let Some(stmt) = taken {
                        let bodies = count_kind(&out, NodeKind::Body);
                        let to = rng.gen_range(0..bodies);
                        if let Some(b) = nth_of_kind_mut(&mut out, NodeKind::Body, to) {
                            let at = rng.gen_range(0..=b.children.len());
                            b.children.insert(at, stmt);
                        }
                    }
                }
            }
            _ => {
                let target = rng.gen_range(0..count);
                if let Some(node) = nth_mut(&mut out, target) {
                    if node.children.len() >= 2 {
                        let i = rng.gen_range(0..node.children.len());
                        let j = rng.gen_range(0..node.children.len());
                        node.children.swap(i, j);
                    }
                }
            }
        }
    }
    out
}

fn nth_mut(node: &mut AstNode, n: usize) -> Option<&mut AstNode> {
    fn walk<'a>(node: &'a mut AstNode, n: &mut usize) -> Option<&'a mut AstNode> {
        if *n == 0 {
            return Some(node);
        }
        *n -= 1;
        for child in node.children.iter_mut() {
            if let Some(found) = walk(child, n) {
                return Some(found);
            }
        }
        None
    }
    let mut n = n;
    walk(node, &mut n)
}

fn remove_nth(root: &mut AstNode, n: usize) {
    fn walk(node: &mut AstNode, n: &mut usize) -> bool {
        for i in 0..node.children.len() {
            *n -= 1;
            if *n == 0 {
                node.children.remove(i);
                return true;
            }
            if walk(&mut node.children[i], n) {
                return true;
            }
        }
        false
    }
    let mut n = n;
    walk(root, &mut n);
}

fn count_kind(node: &AstNode, kind: NodeKind) -> usize {
    node.preorder().filter(|n| n.kind == kind).count()
}

fn nth_of_kind_mut(node: &mut AstNode, kind: NodeKind, n: usize) -> Option<&mut AstNode> {
    fn walk<'a>(node: &'a mut AstNode, kind: NodeKind, n: &mut usize) -> Option<&'a mut AstNode> {
        if node.kind == kind {
            if *n == 0 {
                return Some(node);
            }
            *n -= 1;
        }
        for child in node.children.iter_mut() {
            if let Some(found) = walk(child, kind, n) {
                return Some(found);
            }
        }
        None
    }
    let mut n = n;
    walk(node, kind, &mut n)
}

/// A random (src, dst) pair: usually dst is a mutation of src, sometimes an
/// unrelated tree.
pub fn random_tree_pair<R: Rng + ?Sized>(rng: &mut R, max_nodes: usize) -> (AstNode, AstNode) {
    let src = random_tree(rng, max_nodes);
    let dst = if rng.gen_bool(0.15) {
        random_tree(rng, max_nodes)
    } else {
        let mut dst = mutate_tree(rng, &src, max_nodes);
        while dst.node_count() > max_nodes {
            dst = mutate_tree(rng, &src, max_nodes);
        }
        dst
    };
    (src, dst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_trees_are_valid_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut total = 0;
        for _ in 0..2000 {
            let t = random_tree(&mut rng, 40);
            t.validate().unwrap();
            assert!(t.node_count() <= 40);
            total += t.node_count();
        }
        assert!(total > 2000 * 5, "trees are too small: {total}");
    }

    #[test]
    fn pairs_respect_the_size_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..500 {
            let (a, b) = random_tree_pair(&mut rng, 40);
            assert!(a.node_count() <= 40 && b.node_count() <= 40);
        }
    }
}
