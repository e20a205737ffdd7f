"""Tree nodes: value nodes wrapping a leaf payload, tree nodes mapping keys
to children.

Nodes never reference their parents, so a node may be shared by any number
of trees; all mutation elsewhere in the package is copy-on-path. Children
iterate in ascending lexicographic key order.
"""

from __future__ import annotations

from types import MappingProxyType
from typing import Iterator, Mapping

from .errors import BadKey, DuplicateKey, EmptyKey

PATH_SEP = "/"
_RESERVED_PREFIX = "__"

Path = tuple[str, ...]


def check_key(key) -> str:
    if not isinstance(key, str) or key == "":
        raise EmptyKey(f"keys must be non-empty strings, got {key!r}")
    if PATH_SEP in key:
        raise BadKey(f"key {key!r} contains reserved separator {PATH_SEP!r}")
    if key.startswith(_RESERVED_PREFIX):
        raise BadKey(f"key {key!r} uses reserved prefix {_RESERVED_PREFIX!r}")
    return key


def path_from_string(s: str) -> Path:
    return tuple(p for p in s.split(PATH_SEP) if p != "") if s else ()


def path_to_string(p: Path) -> str:
    return PATH_SEP.join(p)


class Node:
    __slots__ = ()

    @property
    def is_leaf(self) -> bool:
        return isinstance(self, ValueNode)


class ValueNode(Node):
    """Wraps one leaf payload (a TensorLeaf, or a StructuredLeaf from subside)."""

    __slots__ = ("leaf",)

    def __init__(self, leaf):
        self.leaf = leaf

    def __eq__(self, other):
        if not isinstance(other, ValueNode):
            return NotImplemented
        return self.leaf == other.leaf

    def __hash__(self):
        return hash(("value", self.leaf))

    def __repr__(self):
        return f"ValueNode({self.leaf!r})"


class TreeNode(Node):
    """An ordered mapping from keys to child nodes."""

    __slots__ = ("_children",)

    def __init__(self, children: Mapping[str, Node] | None = None):
        items = sorted((children or {}).items())
        seen = set()
        for k, _ in items:
            check_key(k)
            if k in seen:
                raise DuplicateKey(f"duplicate key {k!r}")
            seen.add(k)
        self._children = dict(items)

    @classmethod
    def _from_validated(cls, children: dict) -> "TreeNode":
        """Internal: children dict already key-checked and in sorted order."""
        node = cls.__new__(cls)
        node._children = children
        return node

    @property
    def children(self) -> Mapping[str, Node]:
        return MappingProxyType(self._children)

    def get(self, key: str) -> Node | None:
        return self._children.get(key)

    def keys(self):
        return self._children.keys()

    def __len__(self):
        return len(self._children)

    def __iter__(self):
        return iter(self._children)

    def __eq__(self, other):
        if not isinstance(other, TreeNode):
            return NotImplemented
        return self._children == other._children

    def __hash__(self):
        return hash(("tree", tuple(self._children.items())))

    def __repr__(self):
        return f"TreeNode({self._children!r})"


def structure_equal(a: Node, b: Node) -> bool:
    """True iff the key sets match recursively; leaf contents are ignored."""
    if isinstance(a, ValueNode) and isinstance(b, ValueNode):
        return True
    if isinstance(a, TreeNode) and isinstance(b, TreeNode):
        if a.keys() != b.keys():
            return False
        return all(structure_equal(a.get(k), b.get(k)) for k in a)
    return False


def iter_leaves(node: Node, prefix: Path = ()) -> Iterator[tuple[Path, object]]:
    """Depth-first, key-ascending (path, payload) pairs."""
    if isinstance(node, ValueNode):
        yield prefix, node.leaf
    else:
        for k, child in node.children.items():
            yield from iter_leaves(child, prefix + (k,))


def count_leaves(node: Node) -> int:
    if isinstance(node, ValueNode):
        return 1
    return sum(count_leaves(c) for c in node.children.values())


def get_node(node: Node, path: Path) -> Node | None:
    """Follow a path; None if it does not exist."""
    cur = node
    for key in path:
        if not isinstance(cur, TreeNode):
            return None
        cur = cur.get(key)
        if cur is None:
            return None
    return cur
