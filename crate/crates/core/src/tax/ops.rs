use std::collections::{BTreeSet, HashMap};
use std::hash::Hash;

use super::pattern::{match_pattern, PatternTree, WitnessTree};
use super::tree::{DataTree, Fragment, NodeId, NodeKind};
use super::TaxError;
use crate::model::AggregateFn;
use crate::number::MeasureValue;

/// Emits, per witness, the complete subtree bound to the pattern's output node.
pub fn selection<'a>(pattern: &PatternTree, forest: &[Fragment<'a>]) -> Vec<Fragment<'a>> {
    selection_where(pattern, forest, |_| true)
}

/// Selection with an extra condition evaluated on each witness.
pub fn selection_where<'a>(
    pattern: &PatternTree,
    forest: &[Fragment<'a>],
    condition: impl Fn(&WitnessTree<'a>) -> bool,
) -> Vec<Fragment<'a>> {
    match_pattern(pattern, forest)
        .into_iter()
        .filter(|w| condition(w))
        .map(|w| w.output_node())
        .collect()
}

/// Prunes matched trees to the pattern-bound nodes and the paths connecting
/// them. One output tree is produced per distinct image of the pattern root;
/// bound elements keep their attributes, and nodes flagged `keep_subtree`
/// keep all their content. Trees without a witness are dropped.
pub fn projection(pattern: &PatternTree, forest: &[Fragment<'_>]) -> Vec<DataTree> {
    let witnesses = match_pattern(pattern, forest);
    let mut roots: Vec<(usize, NodeId)> = witnesses.iter().map(|w| (w.tree_index, w.bindings[0])).collect();
    roots.sort();
    roots.dedup();

    let mut out = Vec::with_capacity(roots.len());
    for (ti, root) in roots {
        let tree = forest[ti].tree;
        let mut keep = BTreeSet::new();
        let mut whole = BTreeSet::new();
        for w in witnesses.iter().filter(|w| w.tree_index == ti && w.bindings[0] == root) {
            for (idx, node) in pattern.nodes().iter().enumerate() {
                let mut n = w.bindings[idx];
                if node.keep_subtree {
                    whole.insert(n);
                }
                // walk up to the image of the pattern parent (or the root)
                let stop = node.parent.map(|(p, _)| w.bindings[p]).unwrap_or(root);
                keep.insert(n);
                while n != stop {
                    n = tree.parent(n).expect("pattern image lies below its parent image");
                    keep.insert(n);
                }
            }
        }
        let is_kept = |n: NodeId| {
            keep.contains(&n)
                || whole.iter().any(|&w| tree.is_ancestor(w, n))
                || (matches!(tree.kind(n), NodeKind::Attribute { .. })
                    && tree.parent(n).is_some_and(|p| keep.contains(&p)))
        };
        out.push(tree.extract(root, is_kept));
    }
    out
}

#[derive(Debug, Clone)]
pub struct Group<'a, K> {
    pub key: K,
    pub members: Vec<Fragment<'a>>,
}

/// Groups in first-appearance order of their key; members in input order.
#[derive(Debug, Clone)]
pub struct GroupedForest<'a, K> {
    pub groups: Vec<Group<'a, K>>,
}

impl<K> GroupedForest<'_, K> {
    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn member_count(&self) -> usize {
        self.groups.iter().map(|g| g.members.len()).sum()
    }
}

/// Partitions `forest` by `key`. A tree on which the key is undefined is a
/// [`TaxError::KeyError`].
pub fn group_forest<'a, K, F>(forest: &[Fragment<'a>], key: F) -> Result<GroupedForest<'a, K>, TaxError>
where
    K: Eq + Hash + Clone,
    F: Fn(&Fragment<'a>) -> Option<K>,
{
    let mut index: HashMap<K, usize> = HashMap::new();
    let mut groups: Vec<Group<'a, K>> = Vec::new();
    for (i, tree) in forest.iter().enumerate() {
        let k = key(tree).ok_or(TaxError::KeyError { index: i })?;
        match index.get(&k) {
            Some(&g) => groups[g].members.push(*tree),
            None => {
                index.insert(k.clone(), groups.len());
                groups.push(Group { key: k, members: vec![*tree] });
            }
        }
    }
    Ok(GroupedForest { groups })
}

/// One `(key, value)` per group, in group order. `sum` and `count` of an
/// empty group are zero; `min`, `max` and `avg` are errors there.
pub fn aggregate<K, T, F>(
    groups: &GroupedForest<'_, K>,
    extract: F,
    function: AggregateFn,
) -> Result<Vec<(K, T)>, TaxError>
where
    K: Clone,
    T: MeasureValue,
    F: Fn(&Fragment<'_>) -> Option<T>,
{
    let mut out = Vec::with_capacity(groups.len());
    for (gi, g) in groups.groups.iter().enumerate() {
        if function == AggregateFn::Count {
            out.push((g.key.clone(), T::from_count(g.members.len())));
            continue;
        }
        let values = g
            .members
            .iter()
            .map(&extract)
            .collect::<Option<Vec<T>>>()
            .ok_or(TaxError::ExtractError { group: gi })?;
        let empty = TaxError::EmptyGroupError { group: gi, function: function.as_str() };
        let v = match function {
            AggregateFn::Sum => values.iter().fold(T::zero(), |a, &b| a + b),
            AggregateFn::Min => fold_extreme(&values, |a, b| b < a).ok_or(empty)?,
            AggregateFn::Max => fold_extreme(&values, |a, b| b > a).ok_or(empty)?,
            AggregateFn::Avg => {
                if values.is_empty() {
                    return Err(empty);
                }
                let sum = values.iter().fold(T::zero(), |a, &b| a + b);
                sum / T::from_count(values.len())
            }
            AggregateFn::Count => unreachable!(),
        };
        out.push((g.key.clone(), v));
    }
    Ok(out)
}

fn fold_extreme<T: Copy>(values: &[T], better: impl Fn(T, T) -> bool) -> Option<T> {
    let mut it = values.iter().copied();
    let first = it.next()?;
    Some(it.fold(first, |a, b| if better(a, b) { b } else { a }))
}
