"""FPQ-trees: PQ-trees over cyclic orders with non-reversible Q-nodes.

A tree represents a family of cyclic orders of its leaf set.  P-node
children permute freely, Q-node children keep their sequence up to
reversal, F-node children keep their sequence exactly.  Node choices are
local: reversing a Q-node reverses the sequence of its child blocks but
never the readings inside the blocks.

Reduction works on cyclic orders.  It is implemented by cutting the tree
open at a leaf outside the constrained set (re-rooting), running a linear
Booth-Lueker style template pass extended with orientation-locked F
handling, and closing the cycle again.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations, product

from .errors import (
    INCOMPATIBLE,
    InternalError,
    LeafNotPresent,
    LeafSetMismatch,
    TooLarge,
)

LEAF, P, Q, F = "leaf", "P", "Q", "F"

# ---------------------------------------------------------------------------
# Nodes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Node:
    kind: str
    children: tuple = ()
    leaf: object = None
    origin: object = field(default=None, compare=False)

    def is_leaf(self) -> bool:
        return self.kind == LEAF

    def __repr__(self):  # compact, used in assertion messages
        return format_tree(self)


def leaf(x) -> Node:
    return Node(LEAF, leaf=x)


def pnode(children, origin=None) -> Node:
    return Node(P, tuple(children), origin=origin)


def qnode(children) -> Node:
    return Node(Q, tuple(children))


def fnode(children) -> Node:
    return Node(F, tuple(children))


def _leaf_key(x):
    return (0, x) if isinstance(x, int) else (1, str(x))


def leaves(t: Node) -> frozenset:
    if t.is_leaf():
        return frozenset((t.leaf,))
    out = set()
    stack = [t]
    while stack:
        n = stack.pop()
        if n.is_leaf():
            out.add(n.leaf)
        else:
            stack.extend(n.children)
    return frozenset(out)


def leaf_sequence(t: Node) -> tuple:
    """Leaves in stored reading order."""
    if t.is_leaf():
        return (t.leaf,)
    out = []
    stack = [t]
    while stack:
        n = stack.pop()
        if n.is_leaf():
            out.append(n.leaf)
        else:
            stack.extend(reversed(n.children))
    return tuple(out)


def inner_nodes(t: Node):
    """(path, node) pairs for inner nodes, preorder; path is a child-index tuple."""
    out = []
    stack = [((), t)]
    while stack:
        path, n = stack.pop()
        if n.is_leaf():
            continue
        out.append((path, n))
        for i, c in enumerate(n.children):
            stack.append((path + (i,), c))
    return sorted(out)


def node_at(t: Node, path: tuple) -> Node:
    n = t
    for i in path:
        n = n.children[i]
    return n


def replace_at(t: Node, path: tuple, sub: Node) -> Node:
    if not path:
        return sub
    i = path[0]
    kids = list(t.children)
    kids[i] = replace_at(kids[i], path[1:], sub)
    return Node(t.kind, tuple(kids), t.leaf, t.origin)


# ---------------------------------------------------------------------------
# Simplification
# ---------------------------------------------------------------------------


def simplify(t: Node, cyclic: bool = True) -> Node:
    """Normal form: no empty or 1-child inner nodes, no 2-child Q, F-chains
    flattened; with ``cyclic`` the root is additionally spliced when it has
    degree 2 in the unrooted sense.

    2-child F-nodes below P/Q parents are kept: dropping their orientation
    would change the represented order set.
    """

    def rec(n: Node) -> Node | None:
        if n.is_leaf():
            return n
        kids = [k for k in (rec(c) for c in n.children) if k is not None]
        if n.kind == F:
            flat = []
            for k in kids:
                flat.extend(k.children if k.kind == F else (k,))
            kids = flat
        if not kids:
            return None
        if len(kids) == 1:
            return kids[0]
        kind = P if (n.kind == Q and len(kids) == 2) else n.kind
        return Node(kind, tuple(kids), origin=n.origin)

    root = rec(t)
    if root is None:
        raise InternalError("tree simplified to nothing")
    if not cyclic:
        return root
    while not root.is_leaf() and len(root.children) == 2:
        c1, c2 = root.children
        if c1.is_leaf() and c2.is_leaf():
            if root.kind != P:
                root = pnode(root.children)
            break
        inner, other = (c1, c2) if not c1.is_leaf() else (c2, c1)
        if inner.kind == P:
            root = Node(P, inner.children + (other,), origin=inner.origin)
        else:
            root = Node(inner.kind, (other,) + inner.children)
        if root.kind == F:
            flat = []
            for k in root.children:
                flat.extend(k.children if k.kind == F else (k,))
            root = Node(F, tuple(flat))
    if not root.is_leaf() and root.kind == F and len(root.children) == 2:
        root = pnode(root.children)
    # a root Q over three blocks allows both cyclic arrangements, i.e. it
    # is a P-node in disguise; canonicalize so fixedness sees it as one
    if not root.is_leaf() and root.kind == Q and len(root.children) == 3:
        root = pnode(root.children)
    return root


def mirror(t: Node) -> Node:
    """Tree whose orders are exactly the reversals of t's orders."""
    if t.is_leaf():
        return t
    kids = tuple(mirror(c) for c in t.children)
    if t.kind in (Q, F):
        kids = tuple(reversed(kids))
    return Node(t.kind, kids, origin=t.origin)


# ---------------------------------------------------------------------------
# Denotational semantics (oracle grade, exponential)
# ---------------------------------------------------------------------------


def canonical_cycle(seq: tuple) -> tuple:
    """Lexicographically minimal rotation; reflections stay distinct."""
    if len(seq) <= 1:
        return tuple(seq)
    rots = [seq[i:] + seq[:i] for i in range(len(seq))]
    return min(rots, key=lambda r: tuple(_leaf_key(x) for x in r))


def readings(t: Node) -> list[tuple]:
    """All linear leaf readings allowed by the node choices."""
    if t.is_leaf():
        return [(t.leaf,)]
    child_readings = [readings(c) for c in t.children]
    out = []
    if t.kind == P:
        for perm in permutations(range(len(t.children))):
            for combo in product(*(child_readings[i] for i in perm)):
                out.append(sum(combo, ()))
    else:
        orders = [range(len(t.children))]
        if t.kind == Q:
            orders.append(range(len(t.children) - 1, -1, -1))
        for idxs in orders:
            for combo in product(*(child_readings[i] for i in idxs)):
                out.append(sum(combo, ()))
    return out


def orders(t: Node, limit: int = 9) -> frozenset:
    """The set of cyclic orders t represents (canonical-rotation tuples)."""
    n = len(leaves(t))
    if n > limit:
        raise TooLarge(f"orders() guarded at {limit} leaves, tree has {n}")
    return frozenset(canonical_cycle(r) for r in readings(t))


# ---------------------------------------------------------------------------
# Projection
# ---------------------------------------------------------------------------


def project(t: Node, s) -> Node:
    s = frozenset(s)
    if not s:
        raise ValueError("projection to an empty leaf set")
    missing = s - leaves(t)
    if missing:
        raise LeafNotPresent(sorted(missing, key=_leaf_key))

    def rec(n: Node) -> Node | None:
        if n.is_leaf():
            return n if n.leaf in s else None
        kids = tuple(k for k in (rec(c) for c in n.children) if k is not None)
        if not kids:
            return None
        return Node(n.kind, kids, origin=n.origin)

    return simplify(rec(t))


# ---------------------------------------------------------------------------
# Reduction
# ---------------------------------------------------------------------------


class _Fail(Exception):
    pass


@dataclass
class _Partial:
    """A processed subtree split into an empty side and a full side.

    ``pieces`` is a list of (subtree, is_full) in one realizable reading
    order; empties and fulls are each contiguous.  ``free`` says whether the
    reversed piece list is realizable as well (False once an F-node ordering
    is baked in).
    """

    pieces: list
    free: bool

    def empties_first(self) -> bool:
        return not self.pieces[0][1]

    def oriented(self, want_empties_first: bool):
        if self.empties_first() == want_empties_first:
            return list(self.pieces)
        if self.free:
            return list(reversed(self.pieces))
        return None


def _group(nodes: list[Node], origin) -> Node:
    return nodes[0] if len(nodes) == 1 else pnode(nodes, origin=origin)


def _split_children(results):
    empties, fulls, partials = [], [], []
    for tag in results:
        kind, payload = tag
        if kind == "empty":
            empties.append(payload)
        elif kind == "full":
            fulls.append(payload)
        else:
            partials.append(payload)
    return empties, fulls, partials


def _match_side_pattern(seq, want_empties_first: bool):
    """Match E* [Pa] F* (or its mirror) against a child result sequence.

    Returns the piece list or None.  The boundary partial is oriented to
    keep the full side towards the full block.
    """
    first, second = ("empty", "full") if want_empties_first else ("full", "empty")
    pieces = []
    state = 0  # 0: leading complete block, 1: past the partial
    for tag in seq:
        kind, payload = tag
        if kind == "partial":
            if state != 0:
                return None
            oriented = payload.oriented(want_empties_first)
            if oriented is None:
                return None
            pieces.extend(oriented)
            state = 1
            continue
        if kind == first and state == 0:
            pieces.append((payload, kind == "full"))
        elif kind == second:
            if state == 0:
                state = 1
            pieces.append((payload, kind == "full"))
        elif kind == first and state == 1:
            return None
        else:
            return None
    return pieces


def _process(node: Node, info) -> tuple:
    """Bottom-up template pass below the pertinent root.

    Returns ("empty", node), ("full", node) or ("partial", _Partial); raises
    _Fail when the constrained leaves cannot be gathered at one end.
    """
    nleaves, count = info[id(node)]
    if count == 0:
        return ("empty", node)
    if count == nleaves:
        return ("full", node)
    results = [_process(c, info) for c in node.children]

    if node.kind == P:
        empties, fulls, partials = _split_children(results)
        if len(partials) > 1:
            raise _Fail
        org = node.origin
        if not partials:
            pieces = [(_group(empties, org), False), (_group(fulls, org), True)]
            return ("partial", _Partial(pieces, True))
        p = partials[0]
        e_grp = [(_group(empties, org), False)] if empties else []
        f_grp = [(_group(fulls, org), True)] if fulls else []
        oriented = p.oriented(True)
        if oriented is not None:
            return ("partial", _Partial(e_grp + oriented + f_grp, p.free))
        # orientation-locked with fulls first: mirror assembly
        return ("partial", _Partial(f_grp + list(p.pieces) + e_grp, False))

    # Q / F node: gather towards one end in some admissible child order
    attempts = [list(results)]
    if node.kind == Q:
        attempts.append(list(reversed(results)))
    for seq in attempts:
        for want_e_first in (True, False):
            pieces = _match_side_pattern(seq, want_e_first)
            if pieces is None:
                continue
            spliced = [t for t in seq if t[0] == "partial"]
            free = node.kind == Q and all(p[1].free for p in spliced)
            return ("partial", _Partial(pieces, free))
    raise _Fail


def _root_template(node: Node, info) -> Node:
    nleaves, count = info[id(node)]
    if count == nleaves:
        return node
    results = [_process(c, info) for c in node.children]

    if node.kind == P:
        empties, fulls, partials = _split_children(results)
        org = node.origin
        if len(partials) > 2:
            raise _Fail
        if not partials:
            sub = _group(fulls, org)
            return pnode(empties + [sub], origin=org) if empties else sub
        f_grp = [(_group(fulls, org), True)] if fulls else []
        if len(partials) == 1:
            p = partials[0]
            oriented = p.oriented(True)
            if oriented is not None:
                pieces = oriented + f_grp
            else:
                pieces = f_grp + list(p.pieces)
            kind = Q if p.free else F
        else:
            p1, p2 = partials
            pieces = None
            for a, b in ((p1, p2), (p2, p1)):
                left = a.oriented(True)
                right = b.oriented(False)
                if left is not None and right is not None:
                    pieces = left + f_grp + right
                    kind = Q if (a.free and b.free) else F
                    break
            if pieces is None:
                raise _Fail
        pseudo = Node(kind, tuple(pc[0] for pc in pieces))
        return pnode(empties + [pseudo], origin=org) if empties else pseudo

    # Q / F pertinent root: pattern E* [Pa] F* [Pa'] E* in an admissible
    # child order; the node keeps its children in place (partials spliced)
    attempts = [list(results)]
    if node.kind == Q:
        attempts.append(list(reversed(results)))
    for seq in attempts:
        pieces = _match_root_pattern(seq)
        if pieces is None:
            continue
        spliced = [t for t in seq if t[0] == "partial"]
        locked = node.kind == F or any(not p[1].free for p in spliced)
        kind = F if locked else Q
        return Node(kind, tuple(pc[0] for pc in pieces))
    raise _Fail


def _match_root_pattern(seq):
    """Match E* [Pa] F* [Pa'] E* with correctly oriented boundary partials."""
    pieces = []
    state = 0  # 0 leading E*, 1 F*, 2 trailing E*
    for tag in seq:
        kind, payload = tag
        if kind == "partial":
            if state == 0:
                oriented = payload.oriented(True)
                if oriented is None:
                    return None
                pieces.extend(oriented)
                state = 1
            elif state == 1:
                oriented = payload.oriented(False)
                if oriented is None:
                    return None
                pieces.extend(oriented)
                state = 2
            else:
                return None
        elif kind == "empty":
            if state == 1:
                state = 2
            pieces.append((payload, False))
        else:  # full
            if state == 0:
                state = 1
            elif state == 2:
                return None
            pieces.append((payload, True))
    return pieces


def _leaf_info(t: Node, s: frozenset) -> dict:
    """id(node) -> (leaf count, count of leaves in s), bottom-up."""
    info: dict[int, tuple[int, int]] = {}

    def rec(n: Node):
        if n.is_leaf():
            entry = (1, 1 if n.leaf in s else 0)
        else:
            total = inside = 0
            for c in n.children:
                a, b = rec(c)
                total += a
                inside += b
            entry = (total, inside)
        info[id(n)] = entry
        return entry

    rec(t)
    return info


def _reduce_linear(root: Node, s: frozenset):
    info = _leaf_info(root, s)
    target = len(s)
    # pertinent root: deepest node containing every constrained leaf
    path = []
    node = root
    while not node.is_leaf():
        down = None
        for i, c in enumerate(node.children):
            if info[id(c)][1] == target:
                down = i
                break
        if down is None:
            break
        path.append(down)
        node = node.children[down]
    if node.is_leaf():
        return root
    try:
        new_sub = _root_template(node, info)
    except _Fail:
        return INCOMPATIBLE
    return simplify(replace_at(root, tuple(path), new_sub), cyclic=False)


def _reroot_drop(t: Node, cut_leaf) -> Node:
    """Linear tree over L(t) minus the cut leaf whose frontiers are exactly
    t's cyclic orders cut open right after that leaf."""
    path = []
    node = t
    while not node.is_leaf():
        for i, c in enumerate(node.children):
            if cut_leaf in leaves(c):
                path.append((node, i))
                node = c
                break
    lifted = None
    for depth, (n, idx) in enumerate(path):
        # neighbours of n in cyclic order are (parent, c_0, ..., c_k);
        # cutting at c_idx lists the rest starting after it, with the old
        # parent direction (lifted) in its slot
        extra = [] if depth == 0 else ([lifted] if lifted is not None else [])
        seq = list(n.children[idx + 1 :]) + extra + list(n.children[:idx])
        if depth == len(path) - 1:
            # n is the parent of the cut leaf: seq becomes the new root
            if len(seq) == 1:
                return simplify(seq[0], cyclic=False)
            return simplify(Node(n.kind, tuple(seq), origin=n.origin), cyclic=False)
        if not seq:
            lifted = None
        elif len(seq) == 1:
            lifted = seq[0]
        else:
            lifted = Node(n.kind, tuple(seq), origin=n.origin)
    raise InternalError("cut leaf not found")


def reduce(t: Node, s) -> Node:
    """Tree representing exactly the orders of t where s is consecutive,
    or INCOMPATIBLE when that set is empty."""
    s = frozenset(s)
    all_leaves = leaves(t)
    missing = s - all_leaves
    if missing:
        raise LeafNotPresent(sorted(missing, key=_leaf_key))
    t = simplify(t)
    if len(s) <= 1 or len(s) >= len(all_leaves) - 1:
        return t
    cut = min(all_leaves - s, key=_leaf_key)
    linear = _reroot_drop(t, cut)
    reduced = _reduce_linear(linear, s)
    if reduced is INCOMPATIBLE:
        return INCOMPATIBLE
    if reduced.is_leaf():
        return simplify(pnode([leaf(cut), reduced]))
    if reduced.kind == P:
        back = pnode((leaf(cut),) + reduced.children, origin=reduced.origin)
    else:
        back = Node(reduced.kind, (leaf(cut),) + reduced.children)
    return simplify(back)


# ---------------------------------------------------------------------------
# Intersection
# ---------------------------------------------------------------------------


def _with_origins(t: Node, counter: list) -> Node:
    if t.is_leaf():
        return t
    kids = tuple(_with_origins(c, counter) for c in t.children)
    origin = t.origin
    if t.kind == P:
        origin = counter[0]
        counter[0] += 1
    return Node(t.kind, kids, origin=origin)


def _median(t: Node, a, b, c):
    """Path of the unique node splitting leaves a, b, c pairwise."""

    def lca_path(x, y):
        px, py = _leaf_path(t, x), _leaf_path(t, y)
        i = 0
        while i < len(px) and i < len(py) and px[i] == py[i]:
            i += 1
        return px[:i]

    cands = [lca_path(a, b), lca_path(a, c), lca_path(b, c)]
    return max(cands, key=len)


def _leaf_path(t: Node, x) -> tuple:
    path = []
    node = t
    while not node.is_leaf():
        for i, c in enumerate(node.children):
            if x in leaves(c):
                path.append(i)
                node = c
                break
        else:
            raise LeafNotPresent(x)
    return tuple(path)


def _cyc_dir(pa: int, pb: int, pc: int, n: int) -> int:
    return 1 if (pb - pa) % n < (pc - pa) % n else -1


def _orient_triple(t: Node, a, b, c):
    """Restrict t to orders whose restriction to {a,b,c} is the cyclic
    order (a,b,c); t must already have the three leaves pairwise groupable
    (reductions done), so the filter is a single node orientation."""
    mpath = _median(t, a, b, c)
    m = node_at(t, mpath)
    is_root = not mpath
    pos = []
    for x in (a, b, c):
        px = _leaf_path(t, x)
        if px[: len(mpath)] != mpath or len(px) == len(mpath):
            pos.append(0)  # reaches m from the parent side
        else:
            pos.append(px[len(mpath)] + (0 if is_root else 1))
    n_slots = len(m.children) + (0 if is_root else 1)
    cur = _cyc_dir(pos[0], pos[1], pos[2], n_slots)

    if m.kind == F:
        return t if cur == 1 else INCOMPATIBLE
    if m.kind == Q:
        sub = fnode(m.children if cur == 1 else tuple(reversed(m.children)))
        return replace_at(t, mpath, sub)
    if m.kind == P:
        if len(m.children) + (0 if is_root else 1) != 3:
            raise InternalError("direction filter hit a free P-node")
        sub = fnode(m.children if cur == 1 else tuple(reversed(m.children)))
        return replace_at(t, mpath, sub)
    raise InternalError("median is a leaf")


def _rep_leaf(n: Node):
    return min(leaves(n), key=_leaf_key)


def intersect(t1: Node, t2: Node):
    """(tree, stem map) with orders(tree) = orders(t1) & orders(t2), or
    INCOMPATIBLE.  The stem map sends each P-node of the result (by path)
    to the path of the unique P-node of t2 it stems from."""
    l1, l2 = leaves(t1), leaves(t2)
    if l1 != l2:
        raise LeafSetMismatch((sorted(l1 - l2, key=_leaf_key),
                               sorted(l2 - l1, key=_leaf_key)))
    t1 = simplify(t1)
    counter = [0]
    t = _with_origins(simplify(t2), counter)
    origin_paths = {
        node.origin: path for path, node in inner_nodes(t) if node.kind == P
    }
    n = len(l1)

    t1_inner = inner_nodes(t1)
    for _, node in t1_inner:
        for c in node.children:
            sub = leaves(c)
            if 2 <= len(sub) <= n - 2:
                t = reduce(t, sub)
                if t is INCOMPATIBLE:
                    return INCOMPATIBLE
    for _, node in t1_inner:
        if node.kind not in (Q, F):
            continue
        kids = node.children
        for i in range(len(kids) - 1):
            sub = leaves(kids[i]) | leaves(kids[i + 1])
            if 2 <= len(sub) <= n - 2:
                t = reduce(t, sub)
                if t is INCOMPATIBLE:
                    return INCOMPATIBLE
    for path, node in t1_inner:
        if node.kind != F:
            continue
        if path == ():
            if len(node.children) < 3:
                continue
            trip = tuple(_rep_leaf(node.children[i]) for i in range(3))
        else:
            outside = l1 - leaves(node)
            r = min(outside, key=_leaf_key)
            trip = (r, _rep_leaf(node.children[0]), _rep_leaf(node.children[1]))
        t = _orient_triple(t, *trip)
        if t is INCOMPATIBLE:
            return INCOMPATIBLE
        t = simplify(t)

    t = simplify(t)
    stems = {}
    for path, node in inner_nodes(t):
        if node.kind == P and node.origin is not None:
            stems[path] = origin_paths.get(node.origin)
    return t, stems


def equivalent(t1: Node, t2: Node) -> bool:
    """Semantic equality of represented order sets.

    Exact (via order enumeration) up to 9 leaves; structural canonical-form
    comparison beyond, which is sound for simplified trees.
    """
    l1, l2 = leaves(t1), leaves(t2)
    if l1 != l2:
        raise LeafSetMismatch((sorted(l1 - l2, key=_leaf_key),
                               sorted(l2 - l1, key=_leaf_key)))
    if len(l1) <= 9:
        return orders(t1) == orders(t2)
    return _canon_key(t1) == _canon_key(t2)


def _canon_key(t: Node):
    t = simplify(t)
    if len(leaves(t)) > 2:
        cut = min(leaves(t), key=_leaf_key)
        t = _reroot_drop(t, cut)
        t = (cut, _node_key(t))
        return t
    return ("tiny", tuple(sorted(leaves(t), key=_leaf_key)))


def _node_key(n: Node):
    if n.is_leaf():
        return ("L", _leaf_key(n.leaf))
    keys = tuple(_node_key(c) for c in n.children)
    if n.kind == P:
        return ("P", tuple(sorted(keys)))
    if n.kind == Q:
        return ("Q", min(keys, tuple(reversed(keys))))
    return ("F", keys)


# ---------------------------------------------------------------------------
# Textual notation
# ---------------------------------------------------------------------------


def parse_tree(text: str) -> Node:
    """Parse ``P(a, Q[b, c], F[d, e])``; integer tokens become int leaves."""
    pos = 0

    def skip_ws():
        nonlocal pos
        while pos < len(text) and text[pos] in " \t\n":
            pos += 1

    def parse_node() -> Node:
        nonlocal pos
        skip_ws()
        start = pos
        while pos < len(text) and (text[pos].isalnum() or text[pos] == "_"):
            pos += 1
        token = text[start:pos]
        skip_ws()
        if token in ("P", "Q", "F") and pos < len(text) and text[pos] in "([":
            close = ")" if text[pos] == "(" else "]"
            pos += 1
            kids = []
            while True:
                kids.append(parse_node())
                skip_ws()
                if pos >= len(text):
                    raise ValueError("unterminated node")
                if text[pos] == ",":
                    pos += 1
                    continue
                if text[pos] == close:
                    pos += 1
                    break
                raise ValueError(f"unexpected {text[pos]!r} at {pos}")
            return Node(token, tuple(kids))
        if not token:
            raise ValueError(f"expected a leaf or node at {pos}")
        return leaf(int(token) if token.isdigit() else token)

    node = parse_node()
    skip_ws()
    if pos != len(text):
        raise ValueError(f"trailing input at {pos}")
    return simplify(node)


def format_tree(t: Node) -> str:
    if t.is_leaf():
        return str(t.leaf)
    inner = ", ".join(format_tree(c) for c in t.children)
    if t.kind == P:
        return f"P({inner})"
    return f"{t.kind}[{inner}]"
