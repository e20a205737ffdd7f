"""TreeTensor: a tree-node root paired with a mirroring constraint tree.

Values are persistent: every mutator returns a new TreeTensor that shares
all untouched subtrees with the original.
"""

from __future__ import annotations

from typing import Iterable, Mapping

import numpy as np

from . import constraints as _c
from .errors import ConstraintViolation, PathNotFound
from .leaf import TensorLeaf, from_array, make_leaf
from .node import (
    Node,
    Path,
    TreeNode,
    ValueNode,
    iter_leaves,
    structure_equal as _structure_equal,
)


class TreeTensor:
    __slots__ = ("root", "constraints")

    def __init__(self, root: TreeNode, constraints: _c.ConstraintTree | None = None):
        if not isinstance(root, TreeNode):
            raise TypeError("TreeTensor root must be a tree node")
        self.root = root
        self.constraints = constraints if constraints is not None else _c.TRIVIAL

    def __eq__(self, other):
        if not isinstance(other, TreeTensor):
            return NotImplemented
        return self.root == other.root and self.constraints == other.constraints

    def __repr__(self):
        items = ", ".join(f"{'/'.join(p)}: {l!r}" for p, l in iter_leaves(self.root))
        return f"TreeTensor({{{items}}})"

    def with_constraints(self, placements: Mapping[Path, _c.Constraint]) -> "TreeTensor":
        """Attach constraints built from placements; validates in full."""
        ct = _c.build_constraint_tree(self.root, dict(placements))
        return TreeTensor(self.root, ct)


def _coerce(value) -> Node:
    if isinstance(value, Node):
        return value
    if isinstance(value, TreeTensor):
        return value.root
    if isinstance(value, TensorLeaf):
        return ValueNode(value)
    if isinstance(value, Mapping):
        return TreeNode({k: _coerce(v) for k, v in value.items()})
    if isinstance(value, np.ndarray):
        return ValueNode(from_array(value))
    if isinstance(value, bool):
        return ValueNode(make_leaf((), "bool", [value]))
    if isinstance(value, int):
        return ValueNode(make_leaf((), "i64", [value]))
    if isinstance(value, float):
        return ValueNode(make_leaf((), "f64", [value]))
    raise TypeError(f"cannot build a node from {type(value).__name__}")


def build_tree(pairs: Mapping) -> TreeTensor:
    """Build a TreeTensor (empty constraints) from a nested mapping.

    Values may be leaves, nodes, nested mappings, numpy arrays or python
    scalars (which become scalar leaves).
    """
    root = _coerce(dict(pairs))
    return TreeTensor(root)


def get(tree: TreeTensor, path: Iterable[str]) -> Node:
    """Return the node at path (shared with the tree, not copied)."""
    cur: Node = tree.root
    try:
        for key in path:
            cur = cur._children[key]
    except (AttributeError, KeyError):
        raise PathNotFound(tuple(path)) from None
    return cur


def _set_node(node: TreeNode, path: Path, value: Node) -> TreeNode:
    key, rest = path[0], path[1:]
    children = dict(node.children)
    if rest:
        child = children.get(key)
        if not isinstance(child, TreeNode):
            raise PathNotFound(path)
        children[key] = _set_node(child, rest, value)
    else:
        children[key] = value
    return TreeNode(children)


def _remove_node(node: TreeNode, path: Path) -> TreeNode:
    key, rest = path[0], path[1:]
    children = dict(node.children)
    if key not in children:
        raise PathNotFound(path)
    if rest:
        child = children[key]
        if not isinstance(child, TreeNode):
            raise PathNotFound(path)
        children[key] = _remove_node(child, rest)
    else:
        del children[key]
    return TreeNode(children)


def _extend_constraints(ct: _c.ConstraintTree, path: Path, node: Node) -> _c.ConstraintTree:
    """Constraint tree for a root where `node` was inserted at `path`.

    The inserted position keeps its existing constraint when it existed,
    otherwise it receives the inherited part of its parent's constraint;
    either way the constraint is distributed over the new subtree's shape.
    """
    if not path:
        sub = _c.mirror(node, _c.EMPTY)
        sub = _c.ConstraintTree(ct.constraint, sub.children)
        return _c.distribute(sub)
    key, rest = path[0], path[1:]
    children = dict(ct.children)
    child = children.get(key)
    if child is None:
        child = _c.ConstraintTree(_c.inherit(ct.constraint))
    children[key] = _extend_constraints(child, rest, node)
    return _c.ConstraintTree(ct.constraint, children)


def set(tree: TreeTensor, path: Iterable[str], value) -> TreeTensor:
    """Persistent set; validates the result and fails atomically."""
    path = tuple(path)
    node = _coerce(value)
    if not path:
        if not isinstance(node, TreeNode):
            raise PathNotFound(path, "cannot replace the root with a value node")
        new_root = node
    else:
        # parent must exist
        get(tree, path[:-1])
        new_root = _set_node(tree.root, path, node)
    ct = _extend_constraints(tree.constraints, path, node)
    if not ct.is_trivial:
        bad = _c.violations(new_root, ct)
        if bad:
            raise ConstraintViolation(bad[0][0], bad[0][1])
    return TreeTensor(new_root, ct)


def _drop_constraint(ct: _c.ConstraintTree, path: Path) -> _c.ConstraintTree:
    key, rest = path[0], path[1:]
    children = dict(ct.children)
    if key in children:
        if rest:
            children[key] = _drop_constraint(children[key], rest)
        else:
            del children[key]
    return _c.ConstraintTree(ct.constraint, children)


def remove(tree: TreeTensor, path: Iterable[str]) -> TreeTensor:
    """Persistent removal of the node at path."""
    path = tuple(path)
    if not path:
        raise PathNotFound(path, "cannot remove the root")
    get(tree, path)
    new_root = _remove_node(tree.root, path)
    ct = _drop_constraint(tree.constraints, path)
    if not ct.is_trivial:
        bad = _c.violations(new_root, ct)
        if bad:
            raise ConstraintViolation(bad[0][0], bad[0][1])
    return TreeTensor(new_root, ct)


def structure_equal(a, b) -> bool:
    """Recursive key-set equality; accepts trees or bare nodes."""
    na = a.root if isinstance(a, TreeTensor) else a
    nb = b.root if isinstance(b, TreeTensor) else b
    return _structure_equal(na, nb)


def leaves(tree) -> list[tuple[Path, object]]:
    """Depth-first, key-ascending (path, leaf) pairs."""
    node = tree.root if isinstance(tree, TreeTensor) else tree
    return list(iter_leaves(node))


def _copy_node(node: Node) -> Node:
    if isinstance(node, ValueNode):
        return ValueNode(node.leaf.copy())
    return TreeNode({k: _copy_node(c) for k, c in node.children.items()})


def deep_copy(tree: TreeTensor) -> TreeTensor:
    """A tree sharing no leaf storage with the original."""
    return TreeTensor(_copy_node(tree.root), tree.constraints)


def validate_full(tree: TreeTensor) -> list[tuple[Path, _c.Constraint]]:
    """All constraint violations; empty list means ok."""
    return _c.violations(tree.root, tree.constraints)


def rebuild(pairs: list[tuple[Path, object]]) -> TreeTensor:
    """Build a tree from (path, leaf) pairs (inverse of leaves())."""
    nested: dict = {}
    for path, leaf in pairs:
        cur = nested
        for key in path[:-1]:
            cur = cur.setdefault(key, {})
        if not path:
            raise PathNotFound(path, "leaf at empty path")
        cur[path[-1]] = ValueNode(leaf)
    return build_tree(nested)
