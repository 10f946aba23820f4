use super::{AstNode, NodeKind};

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// splitmix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

/// Hash of a node's own kind and label plus the ordered hashes of its
/// children. Independent of where the subtree sits in a larger tree.
pub(crate) fn hash_parts(kind: NodeKind, label: &str, child_hashes: impl Iterator<Item = u64>) -> u64 {
    let mut h = mix(0x5eed ^ kind as u64);
    h = mix(h ^ fnv1a(label.as_bytes()) ^ (label.len() as u64).rotate_left(32));
    let mut count = 0u64;
    for child in child_hashes {
        h = mix(h.rotate_left(5) ^ child);
        count += 1;
    }
    mix(h ^ count)
}

/// Stable 64-bit hash over (kind, label, children hashes in order).
pub fn structural_hash(node: &AstNode) -> u64 {
    hash_parts(node.kind, &node.label, node.children.iter().map(structural_hash))
}
