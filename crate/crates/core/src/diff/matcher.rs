//! Node matching between two trees.
//!
//! 1. Top-down: largest subtrees first, a subtree whose structural hash is
//!    unique among the still-unmatched nodes of both trees is matched as a
//!    whole.
//! 2. Bottom-up: an unmatched container is matched to the unmatched
//!    same-kind container with the highest dice coefficient over matched leaf
//!    descendants, if that coefficient is at least [`DICE_THRESHOLD`]. Ties go
//!    to the smaller child-index distance, then to the earlier pre-order
//!    position.
//! 3. The roots are matched.
//! 4. Recovery: walking the destination tree breadth-first, the unmatched
//!    children of every matched pair are paired by equal hash, then equal
//!    kind and label, then a kind that occurs exactly once on both sides,
//!    then leaf label similarity.

use std::collections::{BTreeSet, HashMap};

use super::tree::FlatTree;
use crate::ast::AstNode;

pub const DICE_THRESHOLD: f64 = 0.5;

/// Minimum bigram similarity for pairing leftover leaves during recovery.
pub const LEAF_SIMILARITY_THRESHOLD: f64 = 0.5;

/// A set of (source id, destination id) pairs. Ids are pre-order positions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Matching {
    pairs: BTreeSet<(usize, usize)>,
}

impl Matching {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        Matching {
            pairs: pairs.into_iter().collect(),
        }
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().copied()
    }

    pub fn contains(&self, src: usize, dst: usize) -> bool {
        self.pairs.contains(&(src, dst))
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

pub fn match_trees(src: &AstNode, dst: &AstNode) -> Matching {
    let s = FlatTree::new(src);
    let d = FlatTree::new(dst);
    let state = match_flat(&s, &d);
    Matching::from_pairs(state.src.iter().enumerate().filter_map(|(i, m)| m.map(|j| (i, j))))
}

pub(crate) struct MatchState {
    pub src: Vec<Option<usize>>,
    pub dst: Vec<Option<usize>>,
}

impl MatchState {
    fn link(&mut self, s: usize, d: usize) {
        debug_assert!(self.src[s].is_none() && self.dst[d].is_none());
        self.src[s] = Some(d);
        self.dst[d] = Some(s);
    }
}

pub(crate) fn match_flat(s: &FlatTree<'_>, d: &FlatTree<'_>) -> MatchState {
    let mut m = MatchState {
        src: vec![None; s.len()],
        dst: vec![None; d.len()],
    };
    top_down(s, d, &mut m);
    bottom_up(s, d, &mut m);
    if m.src[0].is_none() && m.dst[0].is_none() && s.kind(0) == d.kind(0) {
        m.link(0, 0);
    }
    recover(s, d, &mut m);
    m
}

/// Roots only pair with roots.
fn root_compatible(s: usize, d: usize) -> bool {
    (s == 0) == (d == 0)
}

fn top_down(s: &FlatTree<'_>, d: &FlatTree<'_>, m: &mut MatchState) {
    let mut src_by_hash: HashMap<u64, Vec<usize>> = HashMap::new();
    for id in 0..s.len() {
        src_by_hash.entry(s.nodes[id].hash).or_default().push(id);
    }
    let mut dst_by_hash: HashMap<u64, Vec<usize>> = HashMap::new();
    for id in 0..d.len() {
        dst_by_hash.entry(d.nodes[id].hash).or_default().push(id);
    }

    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by_key(|&id| (std::cmp::Reverse(s.nodes[id].size), id));

    for sid in order {
        if m.src[sid].is_some() {
            continue;
        }
        let hash = s.nodes[sid].hash;
        let Some(dst_ids) = dst_by_hash.get(&hash) else {
            continue;
        };
        let mut free_src = src_by_hash[&hash].iter().filter(|&&x| m.src[x].is_none());
        let mut free_dst = dst_ids.iter().filter(|&&x| m.dst[x].is_none());
        let (Some(_), None) = (free_src.next(), free_src.next()) else {
            continue;
        };
        let (Some(&did), None) = (free_dst.next(), free_dst.next()) else {
            continue;
        };
        if !root_compatible(sid, did) {
            continue;
        }
        // Equal hashes imply equal shapes, so pre-order offsets line up.
        for offset in 0..s.nodes[sid].size {
            if m.src[sid + offset].is_none() && m.dst[did + offset].is_none() {
                m.link(sid + offset, did + offset);
            }
        }
    }
}

fn bottom_up(s: &FlatTree<'_>, d: &FlatTree<'_>, m: &mut MatchState) {
    for sid in s.postorder() {
        if sid == 0 || m.src[sid].is_some() || s.is_leaf(sid) {
            continue;
        }
        let kind = s.kind(sid);
        // common[a] = number of leaves of `sid` matched into the subtree of a.
        let mut common: HashMap<usize, usize> = HashMap::new();
        for leaf in s.subtree(sid).filter(|&x| s.is_leaf(x)) {
            let Some(partner) = m.src[leaf] else { continue };
            for anc in d.ancestors(partner) {
                if anc != 0 && m.dst[anc].is_none() && d.kind(anc) == kind {
                    *common.entry(anc).or_default() += 1;
                }
            }
        }
        let src_leaves = s.nodes[sid].leaves as f64;
        let src_index = s.nodes[sid].index as isize;
        let best = common
            .into_iter()
            .map(|(cand, shared)| {
                let dice = 2.0 * shared as f64 / (src_leaves + d.nodes[cand].leaves as f64);
                let distance = (d.nodes[cand].index as isize - src_index).unsigned_abs();
                (cand, dice, distance)
            })
            .filter(|&(_, dice, _)| dice >= DICE_THRESHOLD)
            .min_by(|a, b| {
                b.1.partial_cmp(&a.1)
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(a.2.cmp(&b.2))
                    .then(a.0.cmp(&b.0))
            });
        if let Some((cand, _, _)) = best {
            m.link(sid, cand);
        }
    }
}

fn recover(s: &FlatTree<'_>, d: &FlatTree<'_>, m: &mut MatchState) {
    for did in d.bfs() {
        let Some(sid) = m.dst[did] else { continue };
        recover_children(s, d, m, sid, did);
    }
}

fn recover_children(s: &FlatTree<'_>, d: &FlatTree<'_>, m: &mut MatchState, sid: usize, did: usize) {
    let free_src = |m: &MatchState| -> Vec<usize> {
        s.nodes[sid]
            .children
            .iter()
            .copied()
            .filter(|&c| m.src[c].is_none())
            .collect()
    };
    let free_dst = |m: &MatchState| -> Vec<usize> {
        d.nodes[did]
            .children
            .iter()
            .copied()
            .filter(|&c| m.dst[c].is_none())
            .collect()
    };

    // Equal hash, then equal kind and label, in child order.
    for same in [
        &(|a: usize, b: usize| s.nodes[a].hash == d.nodes[b].hash) as &dyn Fn(usize, usize) -> bool,
        &|a: usize, b: usize| s.kind(a) == d.kind(b) && s.label(a) == d.label(b),
    ] {
        let srcs = free_src(m);
        if srcs.is_empty() {
            return;
        }
        for x in free_dst(m) {
            if let Some(&y) = srcs.iter().find(|&&y| m.src[y].is_none() && same(y, x)) {
                m.link(y, x);
            }
        }
    }

    // A kind that is left exactly once on both sides.
    let srcs = free_src(m);
    let dsts = free_dst(m);
    for &x in &dsts {
        let kind = d.kind(x);
        let mut ys = srcs.iter().filter(|&&y| s.kind(y) == kind);
        let (Some(&y), None) = (ys.next(), ys.next()) else {
            continue;
        };
        if dsts.iter().filter(|&&x2| d.kind(x2) == kind).count() == 1 {
            m.link(y, x);
        }
    }

    // Leaves by label similarity.
    let srcs = free_src(m);
    let dsts = free_dst(m);
    let mut candidates = Vec::new();
    for &y in srcs.iter().filter(|&&y| s.is_leaf(y)) {
        for &x in dsts.iter().filter(|&&x| d.is_leaf(x) && d.kind(x) == s.kind(y)) {
            let sim = bigram_similarity(s.label(y), d.label(x));
            if sim >= LEAF_SIMILARITY_THRESHOLD {
                let distance = (s.nodes[y].index as isize - d.nodes[x].index as isize).unsigned_abs();
                candidates.push((sim, distance, x, y));
            }
        }
    }
    candidates.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
            .then(a.3.cmp(&b.3))
    });
    for (_, _, x, y) in candidates {
        if m.src[y].is_none() && m.dst[x].is_none() {
            m.link(y, x);
        }
    }
}

/// Dice coefficient over character bigram multisets.
pub(crate) fn bigram_similarity(a: &str, b: &str) -> f64 {
    if a == b {
        return 1.0;
    }
    let grams = |s: &str| -> Vec<(char, char)> {
        let chars: Vec<char> = s.chars().collect();
        let mut g: Vec<(char, char)> = chars.windows(2).map(|w| (w[0], w[1])).collect();
        g.sort_unstable();
        g
    };
    let (ga, gb) = (grams(a), grams(b));
    if ga.is_empty() || gb.is_empty() {
        return 0.0;
    }
    let (mut i, mut j, mut shared) = (0, 0, 0usize);
    while i < ga.len() && j < gb.len() {
        match ga[i].cmp(&gb[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                shared += 1;
                i += 1;
                j += 1;
            }
        }
    }
    2.0 * shared as f64 / (ga.len() + gb.len()) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::parse_fixture;
    use crate::testkit::random_tree_pair;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tree(text: &str) -> AstNode {
        parse_fixture(text).unwrap()
    }

    #[test]
    fn identical_trees_match_perfectly() {
        let t = tree(
            r#"(COMPILATION_UNIT "" (CLASS "A" (METHOD "m" (RETURN_TYPE "void") (PARAMETER_LIST "") (BODY "" (STATEMENT "s1;") (STATEMENT "s1;")))))"#,
        );
        let m = match_trees(&t, &t);
        assert_eq!(m.len(), t.node_count());
        for i in 0..t.node_count() {
            assert!(m.contains(i, i));
        }
    }

    #[test]
    fn appended_statement_leaves_only_it_unmatched() {
        let src =
            tree(r#"(COMPILATION_UNIT "" (CLASS "A" (METHOD "m" (BODY "" (STATEMENT "s1;") (STATEMENT "s2;")))))"#);
        let dst = tree(
            r#"(COMPILATION_UNIT "" (CLASS "A" (METHOD "m" (BODY "" (STATEMENT "s1;") (STATEMENT "s2;") (STATEMENT "s3;")))))"#,
        );
        let m = match_trees(&src, &dst);
        let expected: Vec<(usize, usize)> = (0..6).map(|i| (i, i)).collect();
        assert_eq!(m.pairs().collect::<Vec<_>>(), expected);
    }

    /// Enumerates every kind-preserving injective matching that pairs the
    /// roots and returns the smallest edit script length over all of them.
    fn brute_force_min_cost(src: &AstNode, dst: &AstNode) -> usize {
        #[allow(clippy::too_many_arguments)]
        fn go(
            sid: usize,
            s: &FlatTree<'_>,
            d: &FlatTree<'_>,
            used: &mut Vec<bool>,
            pairs: &mut Vec<(usize, usize)>,
            best: &mut usize,
            src: &AstNode,
            dst: &AstNode,
        ) {
            if sid == s.len() {
                let m = Matching::from_pairs(pairs.iter().copied());
                let cost = crate::diff::edit_script(src, dst, &m).unwrap().len();
                *best = (*best).min(cost);
                return;
            }
            go(sid + 1, s, d, used, pairs, best, src, dst);
            for did in 1..d.len() {
                if !used[did] && s.kind(sid) == d.kind(did) {
                    used[did] = true;
                    pairs.push((sid, did));
                    go(sid + 1, s, d, used, pairs, best, src, dst);
                    pairs.pop();
                    used[did] = false;
                }
            }
        }
        let s = FlatTree::new(src);
        let d = FlatTree::new(dst);
        let mut used = vec![false; d.len()];
        used[0] = true;
        let mut pairs = vec![(0, 0)];
        let mut best = usize::MAX;
        go(1, &s, &d, &mut used, &mut pairs, &mut best, src, dst);
        best
    }

    #[test]
    fn appended_statement_matching_is_optimal() {
        let src =
            tree(r#"(COMPILATION_UNIT "" (CLASS "A" (METHOD "m" (BODY "" (STATEMENT "s1;") (STATEMENT "s2;")))))"#);
        let dst = tree(
            r#"(COMPILATION_UNIT "" (CLASS "A" (METHOD "m" (BODY "" (STATEMENT "s1;") (STATEMENT "s2;") (STATEMENT "s3;")))))"#,
        );
        let ours = crate::diff::edit_script(&src, &dst, &match_trees(&src, &dst))
            .unwrap()
            .len();
        assert_eq!(ours, brute_force_min_cost(&src, &dst));
        assert_eq!(ours, 1);
    }

    #[test]
    fn renamed_class_matches_bottom_up_with_full_dice() {
        let src = tree(r#"(COMPILATION_UNIT "" (CLASS "A" (METHOD "m" (BODY "" (STATEMENT "s1;")))))"#);
        let dst = tree(r#"(COMPILATION_UNIT "" (CLASS "B" (METHOD "m" (BODY "" (STATEMENT "s1;")))))"#);
        let s = FlatTree::new(&src);
        let d = FlatTree::new(&dst);
        let mut m = MatchState {
            src: vec![None; s.len()],
            dst: vec![None; d.len()],
        };
        top_down(&s, &d, &mut m);
        assert_eq!(m.src[1], None);
        assert_eq!(m.src[2], Some(2));
        bottom_up(&s, &d, &mut m);
        assert_eq!(m.src[1], Some(1));
    }

    #[test]
    fn dice_below_threshold_is_not_matched_bottom_up() {
        // One of four leaves shared: dice = 2*1/(4+4) = 0.25.
        let src =
            tree(r#"(COMPILATION_UNIT "" (BODY "" (STATEMENT "a") (STATEMENT "b") (STATEMENT "c") (STATEMENT "d")))"#);
        let dst =
            tree(r#"(COMPILATION_UNIT "" (BODY "" (STATEMENT "a") (STATEMENT "x") (STATEMENT "y") (STATEMENT "z")))"#);
        let s = FlatTree::new(&src);
        let d = FlatTree::new(&dst);
        let mut m = MatchState {
            src: vec![None; s.len()],
            dst: vec![None; d.len()],
        };
        top_down(&s, &d, &mut m);
        bottom_up(&s, &d, &mut m);
        assert_eq!(m.src[1], None);
        // Recovery still pairs the bodies through the matched roots.
        let full = match_trees(&src, &dst);
        assert!(full.contains(1, 1));
    }

    #[test]
    fn bottom_up_prefers_higher_dice_then_nearer_index() {
        let src = tree(r#"(COMPILATION_UNIT "" (CLASS "X" (BODY "" (STATEMENT "a") (STATEMENT "b"))))"#);
        let dst = tree(
            r#"(COMPILATION_UNIT "" (CLASS "Y" (BODY "" (STATEMENT "a") (STATEMENT "q"))) (CLASS "Z" (BODY "" (STATEMENT "a1") (STATEMENT "b"))))"#,
        );
        // Both candidate classes share one leaf: dice ties at 0.5, the one at
        // the same child index wins.
        let m = match_trees(&src, &dst);
        assert!(m.contains(1, 1));
    }

    #[test]
    fn ambiguous_subtrees_are_resolved_through_parents() {
        let src = tree(
            r#"(COMPILATION_UNIT "" (CLASS "A" (METHOD "m1" (RETURN_TYPE "void") (PARAMETER_LIST "" (PARAMETER "a:int")) (BODY "" (STATEMENT "x = 1;"))) (METHOD "m2" (RETURN_TYPE "void") (PARAMETER_LIST "" (PARAMETER "a:int")) (BODY "" (STATEMENT "y = 2;")))))"#,
        );
        let dst = tree(
            r#"(COMPILATION_UNIT "" (CLASS "A" (METHOD "m1" (RETURN_TYPE "void") (PARAMETER_LIST "" (PARAMETER "a:int") (PARAMETER "b:int")) (BODY "" (STATEMENT "x = 1;"))) (METHOD "m2" (RETURN_TYPE "void") (PARAMETER_LIST "" (PARAMETER "a:int") (PARAMETER "b:int")) (BODY "" (STATEMENT "y = 2;")))))"#,
        );
        let m = match_trees(&src, &dst);
        // Everything in src is matched in place; the two new parameters are not.
        for (sid, did) in [(2, 2), (5, 5), (6, 7), (7, 8), (8, 9), (11, 12), (12, 14), (13, 15)] {
            assert!(m.contains(sid, did), "missing ({sid}, {did})");
        }
        assert_eq!(m.len(), src.node_count());
    }

    #[test]
    fn bigram_similarity_values() {
        assert_eq!(bigram_similarity("x = 1;", "x = 1;"), 1.0);
        assert_eq!(bigram_similarity("a:int", "b:int"), 0.75);
        assert_eq!(bigram_similarity("a", "b"), 0.0);
        assert!(bigram_similarity("foo(1);", "bar(2);") < 0.5);
    }

    #[test]
    fn random_matchings_are_injective_and_kind_preserving() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let (a, b) = random_tree_pair(&mut rng, 40);
            let m = match_trees(&a, &b);
            let sa = FlatTree::new(&a);
            let sb = FlatTree::new(&b);
            let mut seen_s = vec![false; sa.len()];
            let mut seen_d = vec![false; sb.len()];
            assert!(m.contains(0, 0));
            for (x, y) in m.pairs() {
                assert!(!seen_s[x] && !seen_d[y]);
                seen_s[x] = true;
                seen_d[y] = true;
                assert_eq!(sa.kind(x), sb.kind(y));
            }
        }
    }
}
