"""Constraint DSL, algebra, inheritance and constraint-tree machinery.

A constraint is a canonical conjunction (``Sum``) of atoms, each flagged as
inheriting or non-inheriting. Inheriting atoms hold for a tree node iff they
hold on all descendants; non-inheriting atoms are pinned to a single node
and their inherited form is the empty constraint.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import ConstraintViolation, PathNotFound
from .leaf import TensorLeaf
from .node import Node, Path, TreeNode, ValueNode, count_leaves, get_node

# ---------------------------------------------------------------------------
# atoms


@dataclass(frozen=True)
class DtypeIs:
    dtype: str


@dataclass(frozen=True)
class NdimIs:
    n: int


@dataclass(frozen=True)
class DimEquals:
    axis: int
    size: int


@dataclass(frozen=True)
class DimAtLeast:
    axis: int
    size: int


@dataclass(frozen=True)
class DeviceIs:
    tag: str


@dataclass(frozen=True)
class LeafCountIs:
    """Subtree leaf count; non-inheriting only."""

    n: int


@dataclass(frozen=True)
class ShapesEqual:
    """Leaves at the given relative paths share one shape; non-inheriting only."""

    paths: tuple[Path, ...]


@dataclass(frozen=True)
class SharedPrefix:
    """Leaves at the given relative paths agree on the first k dims."""

    paths: tuple[Path, ...]
    k: int


_LEAF_ATOMS = (DtypeIs, NdimIs, DimEquals, DimAtLeast, DeviceIs)
_NODE_ATOMS = (LeafCountIs, ShapesEqual, SharedPrefix)


def _leaf_atom_holds(atom, leaf: TensorLeaf) -> bool:
    if isinstance(atom, DtypeIs):
        return leaf.dtype == atom.dtype
    if isinstance(atom, NdimIs):
        return leaf.ndim == atom.n
    if isinstance(atom, DimEquals):
        return atom.axis < leaf.ndim and leaf.shape[atom.axis] == atom.size
    if isinstance(atom, DimAtLeast):
        return atom.axis < leaf.ndim and leaf.shape[atom.axis] >= atom.size
    if isinstance(atom, DeviceIs):
        return leaf.device == atom.tag
    raise TypeError(f"not a leaf atom: {atom!r}")


def _node_atom_holds(atom, node: Node) -> bool:
    if isinstance(atom, LeafCountIs):
        return count_leaves(node) == atom.n
    shapes = []
    for p in atom.paths:
        target = get_node(node, p)
        if not isinstance(target, ValueNode) or not isinstance(target.leaf, TensorLeaf):
            return False
        shapes.append(target.leaf.shape)
    if isinstance(atom, ShapesEqual):
        return all(s == shapes[0] for s in shapes)
    if isinstance(atom, SharedPrefix):
        return all(len(s) >= atom.k and s[: atom.k] == shapes[0][: atom.k] for s in shapes)
    raise TypeError(f"not a node atom: {atom!r}")


def _atom_key(entry):
    inh, atom = entry
    fields = tuple(
        v if not isinstance(v, tuple) else repr(v) for v in vars(atom).values()
    )
    return (type(atom).__name__, fields, inh)


# ---------------------------------------------------------------------------
# constraints


class Constraint:
    """Canonical conjunction of (inherit-flag, atom) entries; () is empty."""

    __slots__ = ("entries",)

    def __init__(self, entries: Iterable[tuple[bool, object]] = ()):
        dedup = sorted(set(entries), key=_atom_key)
        for inh, atom in dedup:
            if inh and isinstance(atom, _NODE_ATOMS):
                raise ValueError(f"{type(atom).__name__} cannot be inheriting")
        self.entries = tuple(dedup)

    def __eq__(self, other):
        if not isinstance(other, Constraint):
            return NotImplemented
        return self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def __bool__(self):
        return bool(self.entries)

    def __repr__(self):
        if not self.entries:
            return "Empty"
        parts = [
            f"{'I' if inh else 'N'}:{atom!r}" for inh, atom in self.entries
        ]
        return f"Sum[{', '.join(parts)}]"


EMPTY = Constraint()


def inherit_atom(atom) -> Constraint:
    return Constraint([(True, atom)])


def noninherit_atom(atom) -> Constraint:
    return Constraint([(False, atom)])


def c_sum(cs: Sequence[Constraint]) -> Constraint:
    entries = []
    for c in cs:
        entries.extend(c.entries)
    return Constraint(entries)


def is_empty(c: Constraint) -> bool:
    return not c.entries


def inherit(c: Constraint) -> Constraint:
    """The inherit map: keeps inheriting atoms, drops the rest."""
    return Constraint([(inh, atom) for inh, atom in c.entries if inh])


def _atom_implies(a1, a2) -> bool:
    if a1 == a2:
        return True
    if isinstance(a1, DimAtLeast) and isinstance(a2, DimAtLeast):
        return a1.axis == a2.axis and a1.size >= a2.size
    if isinstance(a1, DimEquals) and isinstance(a2, DimAtLeast):
        return a1.axis == a2.axis and a1.size >= a2.size
    return False


def covers(c1: Constraint, c2: Constraint) -> bool:
    """True iff every node satisfying c1 satisfies c2 (decided syntactically)."""
    return all(
        any(inh1 == inh2 and _atom_implies(a1, a2) for inh1, a1 in c1.entries)
        for inh2, a2 in c2.entries
    )


def equals(c1: Constraint, c2: Constraint) -> bool:
    return covers(c1, c2) and covers(c2, c1)


def satisfies(c: Constraint, n: Node) -> bool:
    """Full (recursive) satisfaction check of a constraint on a node."""
    for inh, atom in c.entries:
        if inh:
            if not _inherit_holds(atom, n):
                return False
        else:
            if isinstance(atom, _NODE_ATOMS):
                if not _node_atom_holds(atom, n):
                    return False
            else:
                # leaf atom pinned to a node: false unless a matching value node
                if not (
                    isinstance(n, ValueNode)
                    and isinstance(n.leaf, TensorLeaf)
                    and _leaf_atom_holds(atom, n.leaf)
                ):
                    return False
    return True


def _inherit_holds(atom, n: Node) -> bool:
    if isinstance(n, ValueNode):
        return isinstance(n.leaf, TensorLeaf) and _leaf_atom_holds(atom, n.leaf)
    return all(_inherit_holds(atom, c) for c in n.children.values())


def _local_ok(c: Constraint, n: Node) -> bool:
    """Non-recursive check used for validation over a distributed tree.

    Inheriting atoms are checked only at value nodes: after distribution
    every descendant carries them, so the local check is complete and each
    failure is reported once, at the most specific path.
    """
    for inh, atom in c.entries:
        if inh:
            if isinstance(n, ValueNode) and not (
                isinstance(n.leaf, TensorLeaf) and _leaf_atom_holds(atom, n.leaf)
            ):
                return False
        else:
            if isinstance(atom, _NODE_ATOMS):
                if not _node_atom_holds(atom, n):
                    return False
            elif not (
                isinstance(n, ValueNode)
                and isinstance(n.leaf, TensorLeaf)
                and _leaf_atom_holds(atom, n.leaf)
            ):
                return False
    return True


# ---------------------------------------------------------------------------
# constraint trees


class ConstraintTree:
    """Tree of constraints mirroring a node tree position-for-position."""

    __slots__ = ("constraint", "children", "_trivial")

    def __init__(self, constraint: Constraint = EMPTY, children: dict | None = None):
        self.constraint = constraint
        self.children = dict(sorted((children or {}).items()))
        self._trivial = is_empty(constraint) and all(
            c.is_trivial for c in self.children.values()
        )

    @property
    def is_trivial(self) -> bool:
        return self._trivial

    def child(self, key: str) -> "ConstraintTree":
        return self.children.get(key, ConstraintTree())

    def __eq__(self, other):
        if not isinstance(other, ConstraintTree):
            return NotImplemented
        if self._trivial or other._trivial:
            # an all-empty tree is equal to any all-empty tree regardless of
            # how much of the mirror shape it materializes
            return self._trivial and other._trivial
        return self.constraint == other.constraint and self.children == other.children

    def __repr__(self):
        return f"ConstraintTree({self.constraint!r}, {self.children!r})"


#: shared all-empty tree used as the default for unconstrained TreeTensors
TRIVIAL = ConstraintTree()


def mirror(node: Node, constraint: Constraint = EMPTY) -> ConstraintTree:
    """All-`constraint` tree with the same shape as `node`."""
    if isinstance(node, ValueNode):
        return ConstraintTree(constraint)
    return ConstraintTree(
        constraint, {k: mirror(c, constraint) for k, c in node.children.items()}
    )


def distribute(ct: ConstraintTree) -> ConstraintTree:
    """One top-down pass: child <- child + inherit(parent).

    A single pass reaches the fixpoint because the inherit map is idempotent.
    """
    inherited = inherit(ct.constraint)
    children = {
        k: distribute(ConstraintTree(c_sum([child.constraint, inherited]), child.children))
        for k, child in ct.children.items()
    }
    return ConstraintTree(ct.constraint, children)


def place(ct: ConstraintTree, path: Path, constraint: Constraint) -> ConstraintTree:
    if not path:
        return ConstraintTree(c_sum([ct.constraint, constraint]), ct.children)
    head, rest = path[0], path[1:]
    if head not in ct.children:
        raise PathNotFound(path)
    children = dict(ct.children)
    children[head] = place(children[head], rest, constraint)
    return ConstraintTree(ct.constraint, children)


def violations(node: Node, ct: ConstraintTree, prefix: Path = ()) -> list[tuple[Path, Constraint]]:
    """All (path, constraint) pairs failing the local check."""
    if ct.is_trivial:
        return []
    out = []
    if not _local_ok(ct.constraint, node):
        out.append((prefix, ct.constraint))
    if isinstance(node, TreeNode):
        for k, child in node.children.items():
            out.extend(violations(child, ct.child(k), prefix + (k,)))
    return out


def build_constraint_tree(node: Node, placements: dict[Path, Constraint]) -> ConstraintTree:
    """Place constraints, distribute inherited parts down, then validate.

    Raises ConstraintViolation on the first violating position.
    """
    ct = mirror(node)
    for path, constraint in placements.items():
        if get_node(node, tuple(path)) is None and tuple(path) != ():
            raise PathNotFound(path)
        ct = place(ct, tuple(path), constraint)
    ct = distribute(ct)
    bad = violations(node, ct)
    if bad:
        path, constraint = bad[0]
        raise ConstraintViolation(path, constraint)
    return ct
