"""Textual (JSON) external representations.

Tree documents (`.ttj`): tree nodes are objects keyed by child name; value
nodes are objects with `"__leaf__": true` plus shape/dtype/data/device.
Without the `__leaf__` flag an object is always a tree node, even if its
children happen to be named shape/dtype/data. Constraint placements ride
along under the reserved top-level key `"__constraints__"`.

Constraint spec documents (`.ttc`): a JSON list of placements
`{"path": "x/c", "inherit": true, "atoms": [{"kind": ..., ...}]}`.
Axis indices are 0-based.

Serialization is canonical: children in ascending key order, minimal
separators, floats in shortest round-trip decimal form. Equal trees yield
byte-identical documents.
"""

from __future__ import annotations

import json

from . import constraints as _c
from .errors import (
    BadPath,
    DtypeUnknown,
    ParseError,
    ShapeDataMismatch,
    UnknownAtomKind,
)
from .functional import StackedLeaf, StructuredLeaf
from .leaf import DTYPES, TensorLeaf, make_leaf
from .node import Node, Path, TreeNode, ValueNode, path_from_string, path_to_string
from .padding import PaddedGroup
from .tree import TreeTensor


def _leaf_obj(leaf: TensorLeaf) -> dict:
    obj = {
        "__leaf__": True,
        "shape": list(leaf.shape),
        "dtype": leaf.dtype,
        "data": leaf.data,
        "device": leaf.device,
    }
    if isinstance(leaf, StackedLeaf):
        obj["stacked_seq"] = True
    return obj


def _payload_obj(payload):
    if isinstance(payload, TensorLeaf):
        return _leaf_obj(payload)
    if isinstance(payload, (list, tuple)):
        return [_payload_obj(p) for p in payload]
    return {k: _payload_obj(v) for k, v in payload.items()}


def _node_obj(node: Node):
    if isinstance(node, ValueNode):
        leaf = node.leaf
        if isinstance(leaf, StructuredLeaf):
            return {"__structured__": True, "payload": _payload_obj(leaf.payload)}
        return _leaf_obj(leaf)
    return {k: _node_obj(c) for k, c in node.children.items()}


_ATOM_TO_OBJ = {
    _c.DtypeIs: lambda a: {"kind": "dtype", "value": a.dtype},
    _c.NdimIs: lambda a: {"kind": "ndim", "value": a.n},
    _c.DimEquals: lambda a: {"kind": "dim_equals", "axis": a.axis, "value": a.size},
    _c.DimAtLeast: lambda a: {"kind": "dim_at_least", "axis": a.axis, "value": a.size},
    _c.DeviceIs: lambda a: {"kind": "device", "value": a.tag},
    _c.LeafCountIs: lambda a: {"kind": "leaf_count", "value": a.n},
    _c.ShapesEqual: lambda a: {
        "kind": "shapes_equal",
        "paths": [path_to_string(p) for p in a.paths],
    },
    _c.SharedPrefix: lambda a: {
        "kind": "shared_prefix",
        "paths": [path_to_string(p) for p in a.paths],
        "k": a.k,
    },
}


def _constraint_entries(ct: _c.ConstraintTree, prefix: Path = ()) -> list:
    entries = []
    if ct.constraint.entries:
        by_flag: dict[bool, list] = {}
        for inh, atom in ct.constraint.entries:
            by_flag.setdefault(inh, []).append(atom)
        for inh in sorted(by_flag):
            entries.append(
                {
                    "path": path_to_string(prefix),
                    "inherit": inh,
                    "atoms": [_ATOM_TO_OBJ[type(a)](a) for a in by_flag[inh]],
                }
            )
    for k in ct.children:
        entries.extend(_constraint_entries(ct.children[k], prefix + (k,)))
    return entries


def serialize_tree(tree: TreeTensor) -> str:
    """Canonical document for a tree, constraints included."""
    doc = _node_obj(tree.root)
    placements = _constraint_entries(tree.constraints)
    if placements:
        doc["__constraints__"] = placements
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def _parse_leaf(obj: dict) -> TensorLeaf:
    for field in ("shape", "dtype", "data"):
        if field not in obj:
            raise ParseError(f"leaf object missing {field!r}")
    if obj["dtype"] not in DTYPES:
        raise DtypeUnknown(f"unknown dtype {obj['dtype']!r}")
    leaf = make_leaf(obj["shape"], obj["dtype"], obj["data"], obj.get("device", "cpu"))
    if obj.get("stacked_seq"):
        leaf = StackedLeaf(leaf.array.copy(), device=leaf.device)
    return leaf


def _parse_payload(obj):
    if isinstance(obj, list):
        return [_parse_payload(p) for p in obj]
    if isinstance(obj, dict):
        if obj.get("__leaf__") is True:
            return _parse_leaf(obj)
        return {k: _parse_payload(v) for k, v in obj.items()}
    raise ParseError(f"bad structured payload element: {obj!r}")


def _parse_node(obj) -> Node:
    if not isinstance(obj, dict):
        raise ParseError(f"expected an object, got {type(obj).__name__}")
    if obj.get("__leaf__") is True:
        return ValueNode(_parse_leaf(obj))
    if obj.get("__structured__") is True:
        return ValueNode(StructuredLeaf(_parse_payload(obj["payload"])))
    return TreeNode({k: _parse_node(v) for k, v in obj.items()})


_ATOM_PARSERS = {
    "dtype": lambda o: _c.DtypeIs(o["value"]),
    "ndim": lambda o: _c.NdimIs(int(o["value"])),
    "dim_equals": lambda o: _c.DimEquals(int(o["axis"]), int(o["value"])),
    "dim_at_least": lambda o: _c.DimAtLeast(int(o["axis"]), int(o["value"])),
    "device": lambda o: _c.DeviceIs(o["value"]),
    "leaf_count": lambda o: _c.LeafCountIs(int(o["value"])),
    "shapes_equal": lambda o: _c.ShapesEqual(
        tuple(path_from_string(p) for p in o["paths"])
    ),
    "shared_prefix": lambda o: _c.SharedPrefix(
        tuple(path_from_string(p) for p in o["paths"]), int(o["k"])
    ),
}


def _parse_placements(entries) -> dict[Path, _c.Constraint]:
    if not isinstance(entries, list):
        raise ParseError("constraint spec must be a list of placements")
    placements: dict[Path, _c.Constraint] = {}
    for entry in entries:
        if not isinstance(entry, dict) or "path" not in entry or "atoms" not in entry:
            raise ParseError(f"bad placement entry: {entry!r}")
        raw_path = entry["path"]
        if not isinstance(raw_path, str):
            raise BadPath(f"placement path must be a string, got {raw_path!r}")
        path = path_from_string(raw_path)
        inh = bool(entry.get("inherit", True))
        atoms = []
        for aobj in entry["atoms"]:
            kind = aobj.get("kind")
            if kind not in _ATOM_PARSERS:
                raise UnknownAtomKind(f"unknown atom kind {kind!r}")
            try:
                atoms.append(_ATOM_PARSERS[kind](aobj))
            except (KeyError, TypeError, ValueError) as exc:
                raise ParseError(f"bad atom {aobj!r}: {exc}") from exc
        c = _c.Constraint([(inh, a) for a in atoms])
        placements[path] = _c.c_sum([placements.get(path, _c.EMPTY), c])
    return placements


def parse_tree(text: str) -> TreeTensor:
    """Parse a tree document; inverse of serialize_tree."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from exc
    if not isinstance(obj, dict):
        raise ParseError("top level must be an object")
    entries = obj.pop("__constraints__", None)
    root = _parse_node(obj)
    if not isinstance(root, TreeNode):
        raise ParseError("root must be a tree node")
    tree = TreeTensor(root)
    if entries:
        tree = tree.with_constraints(_parse_placements(entries))
    return tree


def parse_constraint_spec(text: str) -> dict[Path, _c.Constraint]:
    """Parse a standalone constraint spec document (.ttc)."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from exc
    return _parse_placements(obj)


# ---------------------------------------------------------------------------
# outer structures (subside/rise endpoints)


def _outer_obj(outer):
    if isinstance(outer, TreeTensor):
        return {"kind": "tree", "value": _node_obj(outer.root)}
    if isinstance(outer, (list, tuple)):
        return {"kind": "seq", "items": [_outer_obj(x) for x in outer]}
    return {"kind": "map", "entries": {k: _outer_obj(v) for k, v in outer.items()}}


def serialize_outer(outer) -> str:
    """Document for an outer container of trees (lists/dicts/trees)."""
    return json.dumps(_outer_obj(outer), sort_keys=True, separators=(",", ":"))


def _parse_outer_obj(obj):
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ParseError(f"bad outer-structure element: {obj!r}")
    kind = obj["kind"]
    if kind == "tree":
        node = _parse_node(obj["value"])
        if not isinstance(node, TreeNode):
            raise ParseError("embedded tree must be a tree node")
        return TreeTensor(node)
    if kind == "seq":
        return [_parse_outer_obj(x) for x in obj["items"]]
    if kind == "map":
        return {k: _parse_outer_obj(v) for k, v in obj["entries"].items()}
    raise ParseError(f"unknown outer kind {kind!r}")


def parse_outer(text: str):
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from exc
    return _parse_outer_obj(obj)


# ---------------------------------------------------------------------------
# padded groups


def serialize_padded_group(g: PaddedGroup) -> str:
    doc = {
        "__padded_group__": True,
        "stacked": _node_obj(g.stacked.root),
        "lengths": _node_obj(g.lengths.root),
        "fill": g.fill,
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def parse_padded_group(text: str) -> PaddedGroup:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from exc
    if not isinstance(obj, dict) or obj.get("__padded_group__") is not True:
        raise ParseError("not a padded-group document")
    stacked = _parse_node(obj["stacked"])
    lengths = _parse_node(obj["lengths"])
    if not isinstance(stacked, TreeNode) or not isinstance(lengths, TreeNode):
        raise ParseError("padded-group trees must be tree nodes")
    return PaddedGroup(TreeTensor(stacked), TreeTensor(lengths), obj["fill"])
