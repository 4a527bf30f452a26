"""Parse trees for a single UVG-DL: structural checking, vector
completeness, dominance-link satisfaction, and bounded brute-force
enumeration.

A parse tree is an ordered derivation tree of the underlying CFG whose
internal nodes carry the production applied (as a (vector id, production
id) pair) and, after annotation, the multiset of productions used in the
subderivation.  Instance tags are plumbing: they record a grouping of
production uses into vector instances but are ignored by structural
equality and by the checker, which searches for a satisfying grouping
itself.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Optional

from . import multiset as ms
from .errors import MalformedTreeError
from .grammar import UVGDLGrammar, ProdKey
from .limits import BudgetMeter, ResourceLimits


class ParseTree:
    """Internal node (vector, production, children) or terminal leaf."""

    __slots__ = ("vector", "production", "instance", "children", "terminal",
                 "multiset", "_key")

    def __init__(self, vector=None, production=None, instance=0, children=(),
                 terminal=None, multiset=None):
        self.vector = vector
        self.production = production
        self.instance = instance
        self.children = tuple(children)
        self.terminal = terminal
        self.multiset = multiset
        self._key = None

    @staticmethod
    def leaf(terminal: str) -> "ParseTree":
        return ParseTree(terminal=terminal)

    @staticmethod
    def node(vector, production, children, instance=0) -> "ParseTree":
        return ParseTree(vector=vector, production=production,
                         children=children, instance=instance)

    @property
    def is_leaf(self) -> bool:
        return self.terminal is not None

    @property
    def prod_key(self) -> ProdKey:
        return (self.vector, self.production)

    def structure_key(self):
        """Preorder label sequence; instance tags and annotations excluded."""
        if self._key is None:
            if self.is_leaf:
                self._key = ((1, self.terminal),)
            else:
                parts = [(0, self.vector, self.production)]
                for c in self.children:
                    parts.extend(c.structure_key())
                self._key = tuple(parts)
        return self._key

    def __eq__(self, other):
        if not isinstance(other, ParseTree):
            return NotImplemented
        return self.structure_key() == other.structure_key()

    def __hash__(self):
        return hash(self.structure_key())

    def __repr__(self):
        if self.is_leaf:
            return f"Leaf({self.terminal!r})"
        return f"Node({self.vector}/{self.production}, {len(self.children)} children)"

    def walk(self, path=()):
        """Yield (path, node) in preorder; paths are child-index tuples."""
        yield path, self
        for i, c in enumerate(self.children):
            yield from c.walk(path + (i,))

    def at(self, path) -> "ParseTree":
        node = self
        for i in path:
            node = node.children[i]
        return node


# An InstanceAssignment maps each internal node's path to the instance
# index (within that node's vector) it belongs to.
InstanceAssignment = dict


@dataclass(frozen=True)
class Verdict:
    ok: bool
    reason: str = ""
    witness: Optional[InstanceAssignment] = None

    def __bool__(self):
        return self.ok


# ---------------------------------------------------------------------------
# Structure and annotation


def check_cfg_structure(g: UVGDLGrammar, tree: ParseTree, path=()) -> None:
    """Raise MalformedTreeError unless the tree is a derivation tree of the
    underlying CFG (child labels match the production rhs in order)."""
    if tree.is_leaf:
        raise MalformedTreeError(f"{path}: bare terminal leaf at tree root position")
    try:
        prod = g.production(tree.prod_key)
    except KeyError:
        raise MalformedTreeError(
            f"{path}: unknown production {tree.prod_key}"
        )
    if len(tree.children) != len(prod.rhs):
        raise MalformedTreeError(
            f"{path}: production {tree.prod_key} has {len(prod.rhs)} rhs "
            f"symbols but node has {len(tree.children)} children"
        )
    for i, (sym, child) in enumerate(zip(prod.rhs, tree.children)):
        if g.is_terminal(sym):
            if not child.is_leaf or child.terminal != sym:
                raise MalformedTreeError(
                    f"{path + (i,)}: expected terminal leaf {sym!r}"
                )
        else:
            if child.is_leaf:
                raise MalformedTreeError(
                    f"{path + (i,)}: expected a {sym!r} subtree, found leaf"
                )
            child_prod = g.production(child.prod_key) if _known(g, child) else None
            if child_prod is None or child_prod.lhs != sym:
                raise MalformedTreeError(
                    f"{path + (i,)}: child production does not rewrite {sym!r}"
                )
            check_cfg_structure(g, child, path + (i,))


def _known(g, node):
    try:
        g.production(node.prod_key)
        return True
    except KeyError:
        return False


def annotate_multisets(tree: ParseTree) -> ParseTree:
    """Return a copy in which every internal node's multiset field equals
    {own production} plus the union of the children's multisets.  Idempotent."""
    if tree.is_leaf:
        return tree
    children = tuple(annotate_multisets(c) for c in tree.children)
    f = ms.union(
        ms.from_elements([tree.prod_key]),
        *[c.multiset for c in children if c.multiset is not None],
    )
    return ParseTree(vector=tree.vector, production=tree.production,
                     instance=tree.instance, children=children,
                     terminal=None, multiset=f)


def root_multiset(tree: ParseTree):
    if tree.multiset is not None:
        return tree.multiset
    return annotate_multisets(tree).multiset


def tree_yield(tree: ParseTree) -> str:
    """Left-to-right frontier terminals, space-joined ('' for epsilon)."""
    tokens = []

    def go(node):
        if node.is_leaf:
            tokens.append(node.terminal)
        else:
            for c in node.children:
                go(c)

    go(tree)
    return " ".join(tokens)


def instances_used(g: UVGDLGrammar, tree: ParseTree) -> int:
    """Number of vector instances in a vector-balanced tree."""
    counts = ms.thaw(root_multiset(tree))
    per_vector = {}
    for (vid, pid), c in counts.items():
        per_vector[vid] = max(per_vector.get(vid, 0), c)
    return sum(per_vector.values())


# ---------------------------------------------------------------------------
# Checking


def _vector_balance(g: UVGDLGrammar, f) -> Optional[str]:
    """None if every vector's productions occur equally often, else a
    description of the first imbalance."""
    counts = ms.thaw(f)
    by_vector = {}
    for (vid, pid), c in counts.items():
        by_vector.setdefault(vid, {})[pid] = c
    for vid, used in sorted(by_vector.items()):
        vector = g.vector(vid)
        values = {used.get(p.id, 0) for p in vector.productions}
        if len(values) != 1:
            return (f"vector {vid!r} is incomplete: production counts "
                    f"{sorted((p.id, used.get(p.id, 0)) for p in vector.productions)}")
    return None


def _collect_uses(tree: ParseTree):
    uses = {}
    for path, node in tree.walk():
        if not node.is_leaf:
            uses.setdefault(node.prod_key, []).append(path)
    return uses


def _in_scope(scope_path, use_path) -> bool:
    return use_path[: len(scope_path)] == scope_path


def hall_filter(g: UVGDLGrammar, tree: ParseTree) -> Verdict:
    """Fast necessary condition for dominance satisfiability: inside every
    subtree, each production must be used at least as often as the number
    of dominance obligations for it whose scope lies in that subtree.
    Rejects only trees check_parse_tree rejects; may over-accept."""
    uses = _collect_uses(tree)
    # (target prod key -> list of scope paths) over the whole tree
    scopes = {}
    for key, paths in uses.items():
        prod = g.production(key)
        for link in prod.dominance:
            tkey = (key[0], link.target)
            for p in paths:
                scopes.setdefault(tkey, []).append(p + (link.occ,))
    for tkey, scope_paths in sorted(scopes.items()):
        target_paths = uses.get(tkey, [])
        for node_path, _ in tree.walk():
            need = sum(1 for s in scope_paths if _in_scope(node_path, s))
            have = sum(1 for u in target_paths if _in_scope(node_path, u))
            if have < need:
                return Verdict(
                    False,
                    f"dominance counting fails at {node_path}: {need} "
                    f"obligation(s) for {tkey} but only {have} use(s)",
                )
    return Verdict(True)


def _vector_links(g: UVGDLGrammar, vid: str):
    links = []
    for p in g.vector(vid).productions:
        for d in p.dominance:
            links.append((p.id, d.occ, d.target))
    return links


def _search_vector_grouping(g, vid, n, uses_by_pid, meter):
    """Assign instance labels 0..n-1 to each production's uses so that all
    dominance links hold within each instance.  Returns {pid: label list
    aligned with uses_by_pid[pid]} or None."""
    pids = sorted(uses_by_pid)
    links = _vector_links(g, vid)

    assignment = {}

    def consistent(pid):
        # check links touching pid against productions assigned so far
        for (carrier, occ, target) in links:
            if carrier not in assignment or target not in assignment:
                continue
            if pid not in (carrier, target):
                continue
            carrier_by_label = {}
            for path, label in zip(uses_by_pid[carrier], assignment[carrier]):
                carrier_by_label[label] = path + (occ,)
            for path, label in zip(uses_by_pid[target], assignment[target]):
                if not _in_scope(carrier_by_label[label], path):
                    return False
        return True

    def backtrack(i):
        meter.spend()
        if i == len(pids):
            return True
        pid = pids[i]
        if i == 0:
            # instance labels are arbitrary, so the first production's
            # labelling can be fixed without loss of generality
            assignment[pid] = list(range(n))
            if consistent(pid) and backtrack(i + 1):
                return True
            del assignment[pid]
            return False
        for perm in itertools.permutations(range(n)):
            assignment[pid] = list(perm)
            if consistent(pid) and backtrack(i + 1):
                return True
        assignment.pop(pid, None)
        return False

    if backtrack(0):
        return dict(assignment)
    return None


def check_parse_tree(g: UVGDLGrammar, tree: ParseTree,
                     limits: Optional[ResourceLimits] = None) -> Verdict:
    """Accept iff the tree is (a) a derivation of the underlying CFG from
    the start symbol, (b) vector-complete, and (c) admits an instance
    assignment satisfying every dominance link.  On acceptance the verdict
    carries a witness assignment (node path -> instance index).

    Malformed trees raise MalformedTreeError; semantic rejection is a
    Verdict with ok=False.
    """
    limits = limits or ResourceLimits.from_env()
    check_cfg_structure(g, tree)
    root_prod = g.production(tree.prod_key)
    if root_prod.lhs != g.start:
        return Verdict(False, f"root rewrites {root_prod.lhs!r}, not the "
                              f"start symbol {g.start!r}")

    f = root_multiset(tree)
    imbalance = _vector_balance(g, f)
    if imbalance is not None:
        return Verdict(False, imbalance)

    hall = hall_filter(g, tree)
    if not hall:
        return Verdict(False, hall.reason)

    uses = _collect_uses(tree)
    by_vector = {}
    for (vid, pid), paths in uses.items():
        by_vector.setdefault(vid, {})[pid] = paths

    meter = BudgetMeter(limits.search_budget, "instance-assignment search")
    witness: InstanceAssignment = {}
    for vid, uses_by_pid in sorted(by_vector.items()):
        n = len(next(iter(uses_by_pid.values())))
        grouping = _search_vector_grouping(g, vid, n, uses_by_pid, meter)
        if grouping is None:
            return Verdict(False,
                           f"no instance assignment satisfies the dominance "
                           f"links of vector {vid!r}")
        for pid, labels in grouping.items():
            for path, label in zip(uses_by_pid[pid], labels):
                witness[path] = label
    return Verdict(True, witness=witness)


def validate_instance_assignment(g: UVGDLGrammar, tree: ParseTree,
                                 assignment: InstanceAssignment) -> bool:
    """Replay a witness: each instance groups exactly one use of every
    production of its vector, and every dominance link is satisfied."""
    groups = {}
    for path, node in tree.walk():
        if node.is_leaf:
            continue
        if path not in assignment:
            return False
        key = (node.vector, assignment[path])
        groups.setdefault(key, {})
        pid = node.production
        if pid in groups[key]:
            return False
        groups[key][pid] = path
    for (vid, _), members in groups.items():
        vector = g.vector(vid)
        if set(members) != {p.id for p in vector.productions}:
            return False
        for p in vector.productions:
            for link in p.dominance:
                scope = members[p.id] + (link.occ,)
                if not _in_scope(scope, members[link.target]):
                    return False
    return True


def relabel_instances(tree: ParseTree, assignment: InstanceAssignment,
                      path=()) -> ParseTree:
    if tree.is_leaf:
        return tree
    children = tuple(relabel_instances(c, assignment, path + (i,))
                     for i, c in enumerate(tree.children))
    return ParseTree(vector=tree.vector, production=tree.production,
                     instance=assignment.get(path, 0), children=children,
                     multiset=tree.multiset)


# ---------------------------------------------------------------------------
# Bounded enumeration (the brute-force oracle)


def _max_vector_size(g: UVGDLGrammar) -> int:
    return max((len(v.productions) for v in g.vectors), default=1)


def _instance_lower_bound(counts) -> int:
    # every vector needs at least max-production-count instances
    per_vector = {}
    for (vid, _), c in counts.items():
        per_vector[vid] = max(per_vector.get(vid, 0), c)
    return sum(per_vector.values())


def enumerate_derivations(g: UVGDLGrammar, max_vectors: Optional[int] = None,
                          target: Optional[str] = None, instance_factor: int = 2,
                          limits: Optional[ResourceLimits] = None):
    """All parse trees accepted by check_parse_tree, bounded either by a
    vector-instance budget or by a target terminal string (with at most
    len(target) * instance_factor instances), in canonical order.

    This is deliberately brute force: candidate CFG trees are generated
    exhaustively and filtered through the checker.  Higher modules use it
    as their independent oracle.
    """
    if (max_vectors is None) == (target is None):
        raise ValueError("exactly one of max_vectors/target must be given")
    limits = limits or ResourceLimits.from_env()
    meter = BudgetMeter(limits.search_budget, "derivation enumeration")

    if target is not None:
        tokens = tuple(target.split())
        q_cap = max(1, len(tokens)) * instance_factor
    else:
        q_cap = max_vectors
        tokens = None
    node_budget = q_cap * _max_vector_size(g)

    def gen_symbol(symbol, budget, counts, pos):
        """Yield (tree, budget_left, counts_after, pos_after)."""
        meter.spend()
        if g.is_terminal(symbol):
            if tokens is not None:
                if pos < len(tokens) and tokens[pos] == symbol:
                    yield ParseTree.leaf(symbol), budget, counts, pos + 1
                return
            yield ParseTree.leaf(symbol), budget, counts, pos
            return
        if budget < 1:
            return
        for v, p in sorted(g.productions_with_lhs(symbol),
                           key=lambda vp: (vp[0].id, vp[1].id)):
            key = (v.id, p.id)
            new_counts = dict(counts)
            new_counts[key] = new_counts.get(key, 0) + 1
            if new_counts[key] > q_cap:
                continue
            if _instance_lower_bound(new_counts) > q_cap:
                continue
            for children, b2, c2, pos2 in gen_seq(p.rhs, 0, budget - 1,
                                                  new_counts, pos):
                yield (ParseTree.node(v.id, p.id, children), b2, c2, pos2)

    def gen_seq(symbols, i, budget, counts, pos):
        if i == len(symbols):
            yield (), budget, counts, pos
            return
        for first, b2, c2, pos2 in gen_symbol(symbols[i], budget, counts, pos):
            for rest, b3, c3, pos3 in gen_seq(symbols, i + 1, b2, c2, pos2):
                yield (first,) + rest, b3, c3, pos3

    accepted = []
    tree_meter = BudgetMeter(limits.max_trees, "enumerated trees")
    for tree, _, counts, pos in gen_symbol(g.start, node_budget, {}, 0):
        if tokens is not None and pos != len(tokens):
            continue
        annotated = annotate_multisets(tree)
        verdict = check_parse_tree(g, annotated, limits=limits)
        if not verdict:
            continue
        if max_vectors is not None and instances_used(g, annotated) > max_vectors:
            continue
        tree_meter.spend()
        accepted.append(relabel_instances(annotated, verdict.witness))
    accepted.sort(key=lambda t: t.structure_key())
    return accepted


def language_strings(g: UVGDLGrammar, max_vectors: int,
                     limits: Optional[ResourceLimits] = None):
    """Deduplicated, sorted yields of all derivations within the bound."""
    return sorted({tree_yield(t)
                   for t in enumerate_derivations(g, max_vectors=max_vectors,
                                                  limits=limits)})


# ---------------------------------------------------------------------------
# Documents


def tree_to_doc(tree: ParseTree) -> dict:
    if tree.is_leaf:
        return {"terminal": tree.terminal}
    doc = {
        "vector": tree.vector,
        "production": tree.production,
        "instance": tree.instance,
        "children": [tree_to_doc(c) for c in tree.children],
    }
    if tree.multiset is not None:
        doc["multiset"] = [[vid, pid, c] for (vid, pid), c in tree.multiset]
    return doc


def tree_from_doc(doc) -> ParseTree:
    if not isinstance(doc, dict):
        raise MalformedTreeError("tree document must be an object")
    if "terminal" in doc:
        return ParseTree.leaf(doc["terminal"])
    for key in ("vector", "production"):
        if key not in doc:
            raise MalformedTreeError(f"tree node missing field {key!r}")
    children = tuple(tree_from_doc(c) for c in doc.get("children", []))
    multiset = None
    if "multiset" in doc:
        multiset = tuple(sorted(((vid, pid), c) for vid, pid, c in doc["multiset"]))
    return ParseTree(vector=doc["vector"], production=doc["production"],
                     instance=doc.get("instance", 0), children=children,
                     multiset=multiset)


def tree_from_json(text: str) -> ParseTree:
    return tree_from_doc(json.loads(text))


def tree_to_json(tree: ParseTree) -> str:
    return json.dumps(tree_to_doc(tree), indent=2) + "\n"


def tree_to_dot(tree: ParseTree, name="parse_tree") -> str:
    lines = [f"digraph {name} {{", "  node [fontname=\"Helvetica\"];"]
    counter = itertools.count()

    def emit(node):
        nid = f"n{next(counter)}"
        if node.is_leaf:
            lines.append(f'  {nid} [label="{node.terminal}", shape=plaintext];')
        else:
            label = f"{node.vector}/{node.production}#{node.instance}"
            lines.append(f'  {nid} [label="{label}", shape=box];')
            for c in node.children:
                cid = emit(c)
                lines.append(f"  {nid} -> {cid};")
        return nid

    emit(tree)
    lines.append("}")
    return "\n".join(lines) + "\n"
