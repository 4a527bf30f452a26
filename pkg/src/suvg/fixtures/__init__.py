"""Bundled fixture grammars and trees.

g_ab       aⁿ$bⁿ with a dominance link from each spine production to its b
g_dom      one vector whose dominance link forces which branch holds the 'a'
g_amb      balanced-bracket grammar with exponentially many trees per size
gs_ab      synchronous mirror pair: aⁿ$bⁿ on the left, bⁿ$aⁿ on the right
gs_scope   syntax/semantics pair for quantifier scope: the left grammar
           derives clause chains like "every man thinks some official said
           some Norwegian arrived"; the right grammar derives prefix-form
           semantic terms whose quantifier productions float freely, so one
           syntactic tree translates to every scope order
"""

from __future__ import annotations

import json
from pathlib import Path

from ..derivation import ParseTree, tree_from_doc
from ..grammar import (
    DominanceLink, Production, SynchUVGDL, SyncLink, UVGDLGrammar, Vector,
    VectorPair, load_grammar,
)

_HERE = Path(__file__).parent

GRAMMAR_FIXTURES = ("g_ab", "g_dom", "g_amb", "gs_ab", "gs_scope")


def fixture_path(name: str) -> Path:
    for candidate in (_HERE / f"{name}.json", _HERE / "trees" / f"{name}.json"):
        if candidate.exists():
            return candidate
    raise FileNotFoundError(name)


def load_fixture(name: str):
    """Load a bundled grammar fixture by name (g_ab, gs_scope, ...)."""
    return load_grammar(fixture_path(name).read_text(encoding="utf-8"))


def load_fixture_tree(name: str) -> ParseTree:
    doc = json.loads(fixture_path(name).read_text(encoding="utf-8"))
    return tree_from_doc(doc)


def sentence1_tree() -> ParseTree:
    """The syntactic parse of 'every man thinks some official said some
    Norwegian arrived' (the grammar admits exactly one)."""
    return load_fixture_tree("scope_sentence1")


# ---------------------------------------------------------------------------
# Reading equivalence for quantifier prefixes

_QUANT_TOKENS = {"forall", "exists"}


def quantifier_prefix(semantic_yield: str):
    """The (quantifier, variable) prefix of a semantic yield string."""
    tokens = semantic_yield.split()
    prefix = []
    i = 0
    while i + 1 < len(tokens) and tokens[i] in _QUANT_TOKENS:
        prefix.append((tokens[i], tokens[i + 1]))
        i += 3  # quantifier, variable, restrictor noun
    return tuple(prefix)


def scope_reading_key(semantic_yield: str):
    """Canonical form of the quantifier prefix: adjacent quantifiers of the
    same kind commute, so maximal same-quantifier runs are sorted.  Two
    yields with the same key are logically equivalent readings."""
    prefix = quantifier_prefix(semantic_yield)
    canonical = []
    i = 0
    while i < len(prefix):
        j = i
        while j < len(prefix) and prefix[j][0] == prefix[i][0]:
            j += 1
        canonical.extend(sorted(prefix[i:j]))
        i = j
    return tuple(canonical)


# ---------------------------------------------------------------------------
# Scaled quantifier family (k nominal arguments, k clause vectors)


def make_scope_family(k: int) -> SynchUVGDL:
    """A gs_scope-shaped pair with k NP vectors and k clause vectors: one
    fixed syntactic tree translates to all k! scope orders."""
    if k < 1:
        raise ValueError("k must be >= 1")
    verbs = [f"verb{i}" for i in range(1, k + 1)]
    nouns = [f"noun{i}" for i in range(1, k + 1)]
    variables = [f"u{i}" for i in range(1, k + 1)]
    quantifiers = [f"q{i}" for i in range(1, k + 1)]

    left_vectors = []
    right_vectors = []
    pairs = []
    for i in range(k):
        final = i == k - 1
        v_rhs = (verbs[i],) if final else (verbs[i], "S")
        left_vectors.append(Vector(
            id=f"cl{i + 1}", lexeme=verbs[i],
            productions=(
                Production(id="s", lhs="S", rhs=("NP", "VP"), role="async",
                           heir=1, dominance=(DominanceLink(1, "v"),)),
                Production(id="v", lhs="VP", rhs=v_rhs, role="sync"),
            ),
        ))
        left_vectors.append(Vector(
            id=f"np{i + 1}", lexeme=nouns[i],
            productions=(
                Production(id="np", lhs="NP", rhs=(nouns[i],), role="sync"),
            ),
        ))
        pred_rhs = (verbs[i], "X") if final else (verbs[i], "X", "F")
        right_vectors.append(Vector(
            id=f"cl{i + 1}", lexeme=verbs[i],
            productions=(
                Production(id="pred", lhs="F", rhs=pred_rhs, role="sync"),
            ),
        ))
        right_vectors.append(Vector(
            id=f"np{i + 1}", lexeme=variables[i],
            productions=(
                Production(id="scope", lhs="F",
                           rhs=(quantifiers[i], variables[i], "F"),
                           role="async", heir=2,
                           dominance=(DominanceLink(2, "var"),)),
                Production(id="var", lhs="X", rhs=(variables[i],), role="sync"),
            ),
        ))
        clause_links = [SyncLink(left=("s", 0), right=("pred", 1))]
        if not final:
            clause_links.append(SyncLink(left=("v", 1), right=("pred", 2)))
        pairs.append(VectorPair(left_vector=f"cl{i + 1}",
                                right_vector=f"cl{i + 1}",
                                links=tuple(clause_links)))
        pairs.append(VectorPair(left_vector=f"np{i + 1}",
                                right_vector=f"np{i + 1}", links=()))

    left = UVGDLGrammar(
        name=f"scope{k}_syntax",
        terminals=frozenset(verbs) | frozenset(nouns),
        nonterminals=frozenset({"S", "NP", "VP"}),
        start="S",
        vectors=tuple(left_vectors),
    )
    right = UVGDLGrammar(
        name=f"scope{k}_semantics",
        terminals=frozenset(verbs) | frozenset(variables) | frozenset(quantifiers),
        nonterminals=frozenset({"F", "X"}),
        start="F",
        vectors=tuple(right_vectors),
    )
    return SynchUVGDL(left=left, right=right, pairs=tuple(pairs))


def scope_family_tree(gs: SynchUVGDL, k: int) -> ParseTree:
    """The canonical left tree of make_scope_family(k): clause i embeds
    clause i+1."""

    def clause(i):
        noun = gs.left.vector(f"np{i}").productions[0].rhs[0]
        np = ParseTree.node(f"np{i}", "np", (ParseTree.leaf(noun),))
        verb = gs.left.vector(f"cl{i}").production("v").rhs[0]
        if i == k:
            vp = ParseTree.node(f"cl{i}", "v", (ParseTree.leaf(verb),))
        else:
            vp = ParseTree.node(f"cl{i}", "v", (ParseTree.leaf(verb), clause(i + 1)))
        return ParseTree.node(f"cl{i}", "s", (np, vp))

    return clause(1)
