"""tensortree: trees of dense arrays with function lifting, mismatch
policies, an inheritable constraint system, group padding and a CLI."""

from . import errors
from .constraints import (
    EMPTY,
    Constraint,
    ConstraintTree,
    DeviceIs,
    DimAtLeast,
    DimEquals,
    DtypeIs,
    LeafCountIs,
    NdimIs,
    SharedPrefix,
    ShapesEqual,
    build_constraint_tree,
    c_sum,
    covers,
    equals,
    inherit,
    inherit_atom,
    is_empty,
    noninherit_atom,
    satisfies,
)
from .functional import StackedLeaf, StructuredLeaf, filter, mask, reduce, rise, subside
from .io_formats import (
    parse_constraint_spec,
    parse_outer,
    parse_padded_group,
    parse_tree,
    serialize_outer,
    serialize_padded_group,
    serialize_tree,
)
from .leaf import (
    TensorLeaf,
    cat,
    ew_binary,
    ew_nary,
    ew_unary,
    from_array,
    make_leaf,
    scalar,
    split,
    stack,
    zeros_like,
)
from .lift import (
    INNER,
    STRICT,
    MismatchPolicy,
    lift_multi,
    lift_unary,
    lifted_cat,
    lifted_shape,
    lifted_split,
    lifted_stack,
    lifted_surface,
    merge_keys,
)
from .node import Node, Path, TreeNode, ValueNode, path_from_string, path_to_string
from .padding import PaddedGroup, group_pad, unpad
from .tree import (
    TreeTensor,
    build_tree,
    deep_copy,
    get,
    leaves,
    rebuild,
    remove,
    set,
    structure_equal,
    validate_full,
)

__version__ = "0.1.0"
