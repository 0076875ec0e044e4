//! Suffix tree construction and suffix enumeration.
//!
//! Trees are built online in linear time and then frozen into a compact
//! arena: every non-root node stores the `(start, end)` span of its
//! incoming edge label within the source string, child ids sorted by the
//! first character of the child's label, and an optional suffix-start
//! marker. The marker is the logical terminal: a node carries
//! `suffix_start = Some(p)` exactly when the root path spelling ends the
//! suffix that begins at source position `p`. No terminal character is
//! ever stored in a label, and the NUL character is reserved to represent
//! it in inputs (strings containing NUL are rejected).
//!
//! Structural guarantees, all checked by the test suite against a
//! brute-force enumeration:
//!
//! - the set of marked root paths equals the set of suffixes of the source;
//! - a source of length `l` yields at most `2l - 1` edges;
//! - children are ordered lexicographically by first label character, and
//!   no two children of a node start with the same character.

use std::collections::BTreeMap;
use std::fmt;

/// Construction symbol space: characters widened to u32, with one value
/// reserved for the virtual terminal. `char` never exceeds 0x10FFFF, so
/// u32::MAX is safely outside the alphabet.
const TERMINAL_SYM: u32 = u32::MAX;

/// Leaf edges grow with the current phase until construction finishes.
const OPEN_END: usize = usize::MAX;

/// Index of a node within its tree's arena. The root is always node 0.
pub type NodeId = usize;

/// Errors raised while building a tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeError {
    /// The input contained NUL, which is reserved as the terminal marker.
    TerminalInInput { position: usize },
}

impl fmt::Display for TreeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeError::TerminalInInput { position } => write!(
                f,
                "input contains the reserved terminal character (NUL) at character index {position}"
            ),
        }
    }
}

impl std::error::Error for TreeError {}

/// One node of a frozen suffix tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeNode {
    /// Start of the incoming edge label in the source (char index).
    pub label_start: usize,
    /// One past the end of the incoming edge label. The root carries the
    /// empty label `(0, 0)`.
    pub label_end: usize,
    /// Children ordered by the first character of their labels.
    pub children: Vec<NodeId>,
    /// `Some(p)` when the root path to this node spells the suffix that
    /// starts at 0-based source position `p`.
    pub suffix_start: Option<usize>,
}

/// One enumerated suffix of a source string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Suffix {
    /// The suffix characters.
    pub text: Vec<char>,
    /// 1-based position of the suffix within the source string.
    pub start_offset: usize,
}

impl Suffix {
    /// Length of the suffix in characters.
    pub fn len(&self) -> usize {
        self.text.len()
    }

    /// True only for the degenerate zero-length case, which enumeration
    /// never produces.
    pub fn is_empty(&self) -> bool {
        self.text.is_empty()
    }

    /// The suffix as an owned string.
    pub fn as_string(&self) -> String {
        self.text.iter().collect()
    }
}

/// A suffix tree over one source string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuffixTree {
    source: Vec<char>,
    nodes: Vec<TreeNode>,
}

impl SuffixTree {
    /// The source characters.
    pub fn source(&self) -> &[char] {
        &self.source
    }

    /// Source length in characters.
    pub fn source_len(&self) -> usize {
        self.source.len()
    }

    /// The root node id.
    pub fn root(&self) -> NodeId {
        0
    }

    /// Borrow a node by id.
    pub fn node(&self, id: NodeId) -> &TreeNode {
        &self.nodes[id]
    }

    /// Number of nodes, root included.
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Number of edges; each non-root node owns exactly the edge above it.
    pub fn edge_count(&self) -> usize {
        self.nodes.len().saturating_sub(1)
    }

    /// The label of the edge leading into `id`.
    pub fn label(&self, id: NodeId) -> &[char] {
        let n = &self.nodes[id];
        &self.source[n.label_start..n.label_end]
    }

    /// 1-based start offsets of all suffixes, ascending.
    pub fn leaf_positions(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .nodes
            .iter()
            .filter_map(|n| n.suffix_start.map(|p| p + 1))
            .collect();
        out.sort_unstable();
        out
    }

    /// All suffixes of length at least `min_len`, ordered by start offset
    /// ascending (longest first). `min_len` of zero behaves like one,
    /// since no zero-length suffix exists.
    pub fn enumerate_suffixes(&self, min_len: usize) -> Vec<Suffix> {
        let l = self.source.len();
        let mut out: Vec<Suffix> = Vec::new();
        // Depth-first walk tracking path depth; a marked node at depth d
        // ends the suffix of length d.
        let mut stack: Vec<(NodeId, usize)> = vec![(self.root(), 0)];
        while let Some((id, depth)) = stack.pop() {
            let node = &self.nodes[id];
            if let Some(start) = node.suffix_start {
                debug_assert_eq!(start, l - depth);
                if depth >= min_len && depth > 0 {
                    out.push(Suffix {
                        text: self.source[start..].to_vec(),
                        start_offset: start + 1,
                    });
                }
            }
            for &c in &node.children {
                let child = &self.nodes[c];
                stack.push((c, depth + (child.label_end - child.label_start)));
            }
        }
        out.sort_unstable_by_key(|s| s.start_offset);
        out
    }
}

/// Builds the suffix tree of `s`.
///
/// Construction is online and linear in the length of `s`; the result is
/// deterministic, so equal inputs produce identical arenas.
pub fn build_suffix_tree(s: &str) -> Result<SuffixTree, TreeError> {
    let source: Vec<char> = s.chars().collect();
    if let Some(position) = source.iter().position(|&c| c == '\0') {
        return Err(TreeError::TerminalInInput { position });
    }

    let mut syms: Vec<u32> = source.iter().map(|&c| c as u32).collect();
    syms.push(TERMINAL_SYM);

    let mut builder = Builder::new(syms);
    for pos in 0..builder.syms.len() {
        builder.extend(pos);
    }
    // The terminal is unique, so every pending suffix became explicit.
    debug_assert_eq!(builder.remainder, 0);

    Ok(freeze(&builder, source))
}

// ---- online construction ----

struct RawNode {
    start: usize,
    end: usize,
    children: BTreeMap<u32, usize>,
    link: usize,
}

struct Builder {
    syms: Vec<u32>,
    nodes: Vec<RawNode>,
    active_node: usize,
    active_edge: usize,
    active_len: usize,
    remainder: usize,
    need_link: Option<usize>,
}

impl Builder {
    fn new(syms: Vec<u32>) -> Self {
        Builder {
            syms,
            nodes: vec![RawNode {
                start: 0,
                end: 0,
                children: BTreeMap::new(),
                link: 0,
            }],
            active_node: 0,
            active_edge: 0,
            active_len: 0,
            remainder: 0,
            need_link: None,
        }
    }

    fn push_node(&mut self, start: usize, end: usize) -> usize {
        self.nodes.push(RawNode {
            start,
            end,
            children: BTreeMap::new(),
            link: 0,
        });
        self.nodes.len() - 1
    }

    fn edge_len(&self, id: usize, pos: usize) -> usize {
        let n = &self.nodes[id];
        let end = if n.end == OPEN_END { pos + 1 } else { n.end };
        end - n.start
    }

    /// Chain suffix links between nodes touched in the same phase.
    fn add_link(&mut self, to: usize) {
        if let Some(prev) = self.need_link.take() {
            self.nodes[prev].link = to;
        }
        self.need_link = Some(to);
    }

    fn extend(&mut self, pos: usize) {
        self.need_link = None;
        self.remainder += 1;
        while self.remainder > 0 {
            if self.active_len == 0 {
                self.active_edge = pos;
            }
            let first = self.syms[self.active_edge];
            match self.nodes[self.active_node].children.get(&first).copied() {
                None => {
                    // No edge starts with this symbol: hang a fresh leaf
                    // directly off the active node.
                    let leaf = self.push_node(pos, OPEN_END);
                    self.nodes[self.active_node].children.insert(first, leaf);
                    let an = self.active_node;
                    self.add_link(an);
                }
                Some(next) => {
                    let len = self.edge_len(next, pos);
                    if self.active_len >= len {
                        // The active point lies past this edge: walk down.
                        self.active_node = next;
                        self.active_edge += len;
                        self.active_len -= len;
                        continue;
                    }
                    if self.syms[self.nodes[next].start + self.active_len] == self.syms[pos] {
                        // Current symbol already on the edge: the suffix is
                        // implicitly present, finish the phase.
                        self.active_len += 1;
                        let an = self.active_node;
                        self.add_link(an);
                        break;
                    }
                    // Mid-edge mismatch: split the edge and branch.
                    let old_start = self.nodes[next].start;
                    let split = self.push_node(old_start, old_start + self.active_len);
                    self.nodes[self.active_node].children.insert(first, split);
                    self.nodes[next].start += self.active_len;
                    let next_first = self.syms[self.nodes[next].start];
                    let leaf = self.push_node(pos, OPEN_END);
                    self.nodes[split].children.insert(next_first, next);
                    self.nodes[split].children.insert(self.syms[pos], leaf);
                    self.add_link(split);
                }
            }
            self.remainder -= 1;
            if self.active_node == 0 && self.active_len > 0 {
                self.active_len -= 1;
                self.active_edge = pos + 1 - self.remainder;
            } else if self.active_node != 0 {
                self.active_node = self.nodes[self.active_node].link;
            }
        }
    }
}

/// Converts the raw construction arena into the public form: terminal
/// symbols are trimmed from labels, the bare-terminal leaf is dropped,
/// and each retained suffix becomes a `suffix_start` marker on the node
/// where its trimmed path ends.
fn freeze(builder: &Builder, source: Vec<char>) -> SuffixTree {
    let l = source.len();
    let raw_len = builder.syms.len(); // l + 1, terminal included

    let mut nodes = vec![TreeNode {
        label_start: 0,
        label_end: 0,
        children: Vec::new(),
        suffix_start: None,
    }];

    // (raw child id, public parent id, parent depth); BTreeMap iteration
    // already yields children in symbol order, which equals char order.
    let mut stack: Vec<(usize, usize, usize)> = Vec::new();
    let root_children: Vec<usize> = builder.nodes[0].children.values().copied().collect();
    for raw_id in root_children.into_iter().rev() {
        stack.push((raw_id, 0, 0));
    }

    while let Some((raw_id, parent, parent_depth)) = stack.pop() {
        let raw = &builder.nodes[raw_id];
        let raw_end = if raw.end == OPEN_END { raw_len } else { raw.end };
        let is_leaf = raw.end == OPEN_END;
        let label_start = raw.start;
        let label_end = raw_end.min(l);

        if label_start >= label_end {
            // Label was the terminal alone: the parent's path spells a
            // whole suffix. At the root that suffix is empty; drop it.
            if parent_depth > 0 {
                debug_assert!(nodes[parent].suffix_start.is_none());
                nodes[parent].suffix_start = Some(l - parent_depth);
            }
            continue;
        }

        let depth = parent_depth + (label_end - label_start);
        let id = nodes.len();
        nodes.push(TreeNode {
            label_start,
            label_end,
            children: Vec::new(),
            suffix_start: if is_leaf { Some(l - depth) } else { None },
        });
        nodes[parent].children.push(id);

        if !is_leaf {
            let children: Vec<usize> = raw.children.values().copied().collect();
            for c in children.into_iter().rev() {
                stack.push((c, id, depth));
            }
        }
    }

    SuffixTree { source, nodes }
}
