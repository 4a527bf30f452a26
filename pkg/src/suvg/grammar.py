"""Representation, loading, and validation of UVG-DL and SynchUVG-DL grammars.

A UVG-DL groups context-free productions into vectors.  Every vector has
exactly one synchronous production; each asynchronous production with a
nonterminal on its right-hand side designates one of them as its heir.
Dominance links constrain a right-hand side occurrence to dominate a later
use of another production of the same vector.

Grammar values are immutable after loading; all operations here are pure.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from .errors import GrammarFormatError

SYNC = "sync"
ASYNC = "async"

# A production is addressed by (vector id, production id) throughout the
# package; two vectors may carry textually identical productions.
ProdKey = tuple


@dataclass(frozen=True)
class DominanceLink:
    occ: int  # rhs position of the dominating nonterminal occurrence
    target: str  # production id within the same vector


@dataclass(frozen=True)
class Production:
    id: str
    lhs: str
    rhs: tuple[str, ...]
    role: str = ASYNC
    heir: Optional[int] = None
    dominance: tuple[DominanceLink, ...] = ()


@dataclass(frozen=True)
class Vector:
    id: str
    lexeme: str
    productions: tuple[Production, ...]

    def production(self, prod_id: str) -> Production:
        for p in self.productions:
            if p.id == prod_id:
                return p
        raise KeyError(prod_id)

    @property
    def sync_production(self) -> Production:
        for p in self.productions:
            if p.role == SYNC:
                return p
        raise ValueError(f"vector {self.id} has no synchronous production")


@dataclass(frozen=True)
class UVGDLGrammar:
    name: str
    terminals: frozenset
    nonterminals: frozenset
    start: str
    vectors: tuple[Vector, ...]

    def vector(self, vector_id: str) -> Vector:
        for v in self.vectors:
            if v.id == vector_id:
                return v
        raise KeyError(vector_id)

    def production(self, key: ProdKey) -> Production:
        return self.vector(key[0]).production(key[1])

    def is_terminal(self, name: str) -> bool:
        return name in self.terminals

    def is_nonterminal(self, name: str) -> bool:
        return name in self.nonterminals

    def productions_with_lhs(self, symbol: str):
        """(vector, production) pairs whose lhs is ``symbol``, in grammar order."""
        out = []
        for v in self.vectors:
            for p in v.productions:
                if p.lhs == symbol:
                    out.append((v, p))
        return out

    def all_productions(self):
        for v in self.vectors:
            for p in v.productions:
                yield v, p

    def production_multiset_of_vector(self, vector_id: str):
        return tuple((vector_id, p.id) for p in self.vector(vector_id).productions)


# Non-heir nonterminal occurrences are the attachment points of
# synchronization links: (production id, rhs position).
def non_heir_occurrences(g: UVGDLGrammar, vector: Vector):
    occs = []
    for p in vector.productions:
        for i, sym in enumerate(p.rhs):
            if g.is_nonterminal(sym) and not (p.role == ASYNC and p.heir == i):
                occs.append((p.id, i))
    return occs


@dataclass(frozen=True)
class OccurrenceRef:
    vector: str
    production: str
    occ: int


@dataclass(frozen=True)
class SyncLink:
    left: tuple[str, int]  # (production id, rhs position) in the left vector
    right: tuple[str, int]


@dataclass(frozen=True)
class VectorPair:
    left_vector: str
    right_vector: str
    links: tuple[SyncLink, ...]


@dataclass(frozen=True)
class SynchUVGDL:
    left: UVGDLGrammar
    right: UVGDLGrammar
    pairs: tuple[VectorPair, ...]

    def pair_for_left(self, vector_id: str) -> VectorPair:
        for pr in self.pairs:
            if pr.left_vector == vector_id:
                return pr
        raise KeyError(vector_id)

    def pair_for_right(self, vector_id: str) -> VectorPair:
        for pr in self.pairs:
            if pr.right_vector == vector_id:
                return pr
        raise KeyError(vector_id)

    def pair_id(self, pair: VectorPair) -> str:
        return f"{pair.left_vector}~{pair.right_vector}"

    def pair_by_id(self, pid: str) -> VectorPair:
        for pr in self.pairs:
            if self.pair_id(pr) == pid:
                return pr
        raise KeyError(pid)


@dataclass(frozen=True)
class CFG:
    """Underlying context-free grammar: vector membership erased."""

    terminals: frozenset
    nonterminals: frozenset
    start: str
    productions: tuple[tuple[str, tuple[str, ...]], ...]  # (lhs, rhs) multiset


@dataclass(frozen=True)
class Finding:
    code: str
    message: str
    path: str


@dataclass(frozen=True)
class ValidationReport:
    findings: tuple[Finding, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.findings

    def __iter__(self):
        return iter(self.findings)


# ---------------------------------------------------------------------------
# Loading and dumping


def _expect(doc, key, kind, path):
    if key not in doc:
        raise GrammarFormatError(f"missing required field {key!r}", path)
    value = doc[key]
    if not isinstance(value, kind):
        raise GrammarFormatError(
            f"field {key!r} must be {kind.__name__}", f"{path}.{key}"
        )
    return value


def _load_production(doc, path) -> Production:
    pid = _expect(doc, "id", str, path)
    lhs = _expect(doc, "lhs", str, path)
    rhs_raw = _expect(doc, "rhs", list, path)
    rhs = []
    for i, sym in enumerate(rhs_raw):
        if not isinstance(sym, str):
            raise GrammarFormatError("rhs symbols must be strings", f"{path}.rhs[{i}]")
        rhs.append(sym)
    role = _expect(doc, "role", str, path)
    if role not in (SYNC, ASYNC):
        raise GrammarFormatError(
            f"role must be {SYNC!r} or {ASYNC!r}, got {role!r}", f"{path}.role"
        )
    heir = doc.get("heir")
    if heir is not None and not isinstance(heir, int):
        raise GrammarFormatError("heir must be an integer rhs index", f"{path}.heir")
    dominance = []
    for i, d in enumerate(doc.get("dominance", [])):
        dpath = f"{path}.dominance[{i}]"
        occ = _expect(d, "occ", int, dpath)
        target = _expect(d, "target", str, dpath)
        dominance.append(DominanceLink(occ=occ, target=target))
    return Production(
        id=pid, lhs=lhs, rhs=tuple(rhs), role=role, heir=heir,
        dominance=tuple(dominance),
    )


def _load_uvgdl(doc, path="$") -> UVGDLGrammar:
    name = _expect(doc, "name", str, path)
    terminals = _expect(doc, "terminals", list, path)
    nonterminals = _expect(doc, "nonterminals", list, path)
    start = _expect(doc, "start", str, path)
    vectors_raw = _expect(doc, "vectors", list, path)
    vectors = []
    for vi, vdoc in enumerate(vectors_raw):
        vpath = f"{path}.vectors[{vi}]"
        vid = _expect(vdoc, "id", str, vpath)
        lexeme = _expect(vdoc, "lexeme", str, vpath)
        prods_raw = _expect(vdoc, "productions", list, vpath)
        prods = [
            _load_production(pdoc, f"{vpath}.productions[{pi}]")
            for pi, pdoc in enumerate(prods_raw)
        ]
        vectors.append(Vector(id=vid, lexeme=lexeme, productions=tuple(prods)))
    g = UVGDLGrammar(
        name=name,
        terminals=frozenset(terminals),
        nonterminals=frozenset(nonterminals),
        start=start,
        vectors=tuple(vectors),
    )
    _check_references(g, path)
    return g


def _check_references(g: UVGDLGrammar, path):
    """Reject dangling references and duplicate ids outright; everything
    softer is a validation finding."""
    seen_vec = set()
    declared = g.terminals | g.nonterminals
    for vi, v in enumerate(g.vectors):
        vpath = f"{path}.vectors[{vi}]"
        if v.id in seen_vec:
            raise GrammarFormatError(f"duplicate vector id {v.id!r}", vpath)
        seen_vec.add(v.id)
        seen_prod = set()
        prod_ids = {p.id for p in v.productions}
        for pi, p in enumerate(v.productions):
            ppath = f"{vpath}.productions[{pi}]"
            if p.id in seen_prod:
                raise GrammarFormatError(f"duplicate production id {p.id!r}", ppath)
            seen_prod.add(p.id)
            if p.lhs not in declared:
                raise GrammarFormatError(f"undeclared symbol {p.lhs!r}", f"{ppath}.lhs")
            for si, sym in enumerate(p.rhs):
                if sym not in declared:
                    raise GrammarFormatError(
                        f"undeclared symbol {sym!r}", f"{ppath}.rhs[{si}]"
                    )
            for di, d in enumerate(p.dominance):
                if d.target not in prod_ids:
                    raise GrammarFormatError(
                        f"dominance target {d.target!r} not in vector {v.id!r}",
                        f"{ppath}.dominance[{di}].target",
                    )


def _load_synch(doc, path="$") -> SynchUVGDL:
    left = _load_uvgdl(_expect(doc, "left", dict, path), f"{path}.left")
    right = _load_uvgdl(_expect(doc, "right", dict, path), f"{path}.right")
    pairs_raw = _expect(doc, "pairs", list, path)
    pairs = []
    for i, pdoc in enumerate(pairs_raw):
        ppath = f"{path}.pairs[{i}]"
        lv = _expect(pdoc, "left_vector", str, ppath)
        rv = _expect(pdoc, "right_vector", str, ppath)
        links = []
        for li, ldoc in enumerate(pdoc.get("links", [])):
            lpath = f"{ppath}.links[{li}]"
            lraw = _expect(ldoc, "left", list, lpath)
            rraw = _expect(ldoc, "right", list, lpath)
            for end, raw in (("left", lraw), ("right", rraw)):
                if len(raw) != 2 or not isinstance(raw[0], str) or not isinstance(raw[1], int):
                    raise GrammarFormatError(
                        "link endpoint must be [productionId, occ]", f"{lpath}.{end}"
                    )
            links.append(SyncLink(left=(lraw[0], lraw[1]), right=(rraw[0], rraw[1])))
        try:
            left.vector(lv)
        except KeyError:
            raise GrammarFormatError(f"unknown left vector {lv!r}", f"{ppath}.left_vector")
        try:
            right.vector(rv)
        except KeyError:
            raise GrammarFormatError(f"unknown right vector {rv!r}", f"{ppath}.right_vector")
        pairs.append(VectorPair(left_vector=lv, right_vector=rv, links=tuple(links)))
    return SynchUVGDL(left=left, right=right, pairs=tuple(pairs))


def load_grammar(document):
    """Load a grammar from JSON text or an already-parsed document.

    Returns a UVGDLGrammar, or a SynchUVGDL when the document carries
    left/right/pairs keys.  Raises GrammarFormatError on schema violations,
    dangling references, and duplicate ids.
    """
    if isinstance(document, (str, bytes)):
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as e:
            raise GrammarFormatError(f"not valid JSON: {e}", "$")
    else:
        doc = document
    if not isinstance(doc, dict):
        raise GrammarFormatError("top-level document must be an object", "$")
    if "pairs" in doc or "left" in doc or "right" in doc:
        return _load_synch(doc)
    return _load_uvgdl(doc)


def load_grammar_file(path):
    with open(path, "r", encoding="utf-8") as fh:
        return load_grammar(fh.read())


def _dump_production(p: Production) -> dict:
    doc = {
        "id": p.id,
        "lhs": p.lhs,
        "rhs": list(p.rhs),
        "role": p.role,
        "dominance": [{"occ": d.occ, "target": d.target} for d in p.dominance],
    }
    if p.heir is not None:
        doc["heir"] = p.heir
    return doc


def _dump_uvgdl(g: UVGDLGrammar) -> dict:
    return {
        "name": g.name,
        "terminals": sorted(g.terminals),
        "nonterminals": sorted(g.nonterminals),
        "start": g.start,
        "vectors": [
            {
                "id": v.id,
                "lexeme": v.lexeme,
                "productions": [_dump_production(p) for p in v.productions],
            }
            for v in g.vectors
        ],
    }


def dump_grammar(g) -> dict:
    """Inverse of load_grammar: a JSON-serializable document."""
    if isinstance(g, SynchUVGDL):
        return {
            "left": _dump_uvgdl(g.left),
            "right": _dump_uvgdl(g.right),
            "pairs": [
                {
                    "left_vector": pr.left_vector,
                    "right_vector": pr.right_vector,
                    "links": [
                        {"left": list(l.left), "right": list(l.right)}
                        for l in pr.links
                    ],
                }
                for pr in g.pairs
            ],
        }
    return _dump_uvgdl(g)


def dump_grammar_text(g) -> str:
    return json.dumps(dump_grammar(g), indent=2, sort_keys=False) + "\n"


# ---------------------------------------------------------------------------
# Validation


def validate_uvgdl(g: UVGDLGrammar) -> ValidationReport:
    """Check every type invariant; findings are data, not failures."""
    findings = []

    def flag(code, message, path):
        findings.append(Finding(code=code, message=message, path=path))

    if g.terminals & g.nonterminals:
        overlap = sorted(g.terminals & g.nonterminals)
        flag("symbol-overlap",
             f"terminals and nonterminals overlap: {overlap}", "symbols")
    if g.start not in g.nonterminals:
        flag("bad-start", f"start symbol {g.start!r} is not a declared nonterminal",
             "start")

    for v in g.vectors:
        vpath = f"vectors[{v.id}]"
        if not v.productions:
            flag("empty-vector", "vector has no productions", vpath)
            continue
        sync_count = sum(1 for p in v.productions if p.role == SYNC)
        if sync_count != 1:
            flag("sync-not-unique",
                 f"vector must have exactly one synchronous production, has {sync_count}",
                 vpath)
        if not any(g.is_terminal(s) for p in v.productions for s in p.rhs):
            flag("not-lexicalized",
                 "no production in this vector contains a terminal", vpath)
        for p in v.productions:
            ppath = f"{vpath}.productions[{p.id}]"
            nonterm_positions = [
                i for i, s in enumerate(p.rhs) if g.is_nonterminal(s)
            ]
            if p.role == SYNC and p.heir is not None:
                flag("heir-on-sync",
                     "synchronous productions do not designate a heir",
                     f"{ppath}.heir")
            if p.role == ASYNC:
                if nonterm_positions and p.heir is None:
                    flag("heir-missing",
                         "asynchronous production with rhs nonterminals must "
                         "designate a heir", f"{ppath}.heir")
                if p.heir is not None and p.heir not in nonterm_positions:
                    flag("heir-not-nonterminal",
                         f"heir index {p.heir} does not address a nonterminal "
                         "rhs position", f"{ppath}.heir")
                if not nonterm_positions and p.heir is not None:
                    flag("heir-without-nonterminal",
                         "asynchronous production with no rhs nonterminal has "
                         "no heir", f"{ppath}.heir")
            for di, d in enumerate(p.dominance):
                dpath = f"{ppath}.dominance[{di}]"
                if d.occ not in nonterm_positions:
                    flag("dominance-occ-not-nonterminal",
                         f"dominance occurrence {d.occ} does not address a "
                         "nonterminal rhs position", f"{dpath}.occ")
                if d.target == p.id:
                    flag("dominance-self-link",
                         "a production cannot dominate itself", f"{dpath}.target")

    findings.sort(key=lambda f: (f.path, f.code))
    return ValidationReport(findings=tuple(findings))


def validate_synch(gs: SynchUVGDL) -> ValidationReport:
    """Check pair and link invariants; assumes both components pass
    validate_uvgdl."""
    findings = []

    def flag(code, message, path):
        findings.append(Finding(code=code, message=message, path=path))

    seen_left, seen_right = set(), set()
    for pr in gs.pairs:
        ppath = f"pairs[{pr.left_vector}~{pr.right_vector}]"
        if pr.left_vector in seen_left:
            flag("left-vector-repaired",
                 f"left vector {pr.left_vector!r} appears in more than one pair",
                 ppath)
        if pr.right_vector in seen_right:
            flag("right-vector-repaired",
                 f"right vector {pr.right_vector!r} appears in more than one pair",
                 ppath)
        seen_left.add(pr.left_vector)
        seen_right.add(pr.right_vector)

        try:
            lv = gs.left.vector(pr.left_vector)
            rv = gs.right.vector(pr.right_vector)
        except KeyError:
            continue  # load_grammar already rejects dangling vector ids

        left_occs = set(non_heir_occurrences(gs.left, lv))
        right_occs = set(non_heir_occurrences(gs.right, rv))
        left_used, right_used = [], []
        for li, link in enumerate(pr.links):
            lpath = f"{ppath}.links[{li}]"
            if link.left not in left_occs:
                flag("bad-left-occurrence",
                     f"{link.left} is not a non-heir nonterminal occurrence of "
                     f"vector {pr.left_vector!r}", f"{lpath}.left")
            if link.right not in right_occs:
                flag("bad-right-occurrence",
                     f"{link.right} is not a non-heir nonterminal occurrence of "
                     f"vector {pr.right_vector!r}", f"{lpath}.right")
            left_used.append(link.left)
            right_used.append(link.right)
        if len(set(left_used)) != len(left_used):
            flag("mapping-not-injective-left",
                 "two links share a left occurrence", ppath)
        if len(set(right_used)) != len(right_used):
            flag("mapping-not-injective",
                 "two links share a right occurrence", ppath)
        missing_left = left_occs - set(left_used)
        if missing_left:
            flag("mapping-not-total-left",
                 f"left occurrences not covered by the mapping: {sorted(missing_left)}",
                 ppath)
        missing_right = right_occs - set(right_used)
        if missing_right:
            flag("mapping-not-total-right",
                 f"right occurrences not covered by the mapping: {sorted(missing_right)}",
                 ppath)

    unpaired_left = {v.id for v in gs.left.vectors} - seen_left
    for vid in sorted(unpaired_left):
        flag("unpaired-vector", f"left vector {vid!r} is in no pair", f"left.vectors[{vid}]")
    unpaired_right = {v.id for v in gs.right.vectors} - seen_right
    for vid in sorted(unpaired_right):
        flag("unpaired-vector", f"right vector {vid!r} is in no pair",
             f"right.vectors[{vid}]")

    findings.sort(key=lambda f: (f.path, f.code))
    return ValidationReport(findings=tuple(findings))


def underlying_cfg(g: UVGDLGrammar) -> CFG:
    """The CFG obtained by taking the union of all vectors (heirs, roles,
    and dominance links erased; the production multiset keeps duplicates)."""
    return CFG(
        terminals=g.terminals,
        nonterminals=g.nonterminals,
        start=g.start,
        productions=tuple((p.lhs, p.rhs) for _, p in g.all_productions()),
    )
