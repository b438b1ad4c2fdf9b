"""Finite graphs of finite groups, words, and normal forms.

Serre conventions: every geometric edge is a pair of opposite directed edges
e, ē with bar(bar(e)) = e, bar(e) != e, o(e) = t(ē).  Directed edge 2i and
2i+1 form geometric pair i.  Loops (o = t) are allowed — an HNN extension is
the one-vertex, one-loop case.

A word is an alternating sequence g0, e1, g1, ..., en, gn based at a vertex:
g0 lives in the group of the start vertex and each gi thereafter in the group
of t(ei); the edges form a path in the underlying graph.  Elements of the
fundamental group are the loop words; open words (used as coset
representatives for tree vertices) carry distinct start/end vertices.

Reduction implements the Britton pinch  f · η_f(c) · f̄  →  η_f̄(c)  until no
pinch applies, then decomposes every syllable against a fixed right-coset
transversal of the incoming edge image, pushing edge-group corrections to the
left.  The result is the canonical normal form: head element followed by
alternating (edge, transversal representative) pairs.  Transversal
representatives are least-element-index, with the identity representing the
coset of the image subgroup itself, so normal forms are reproducible across
runs.  The syllable length of a normal form counts its nontrivial
vertex-group syllables (the head plus representatives); stable letters of an
HNN word therefore contribute edges but not syllables, which matches the
translation-length reading for cyclically reduced words over amalgams and
free products.
"""

from __future__ import annotations

from .finite import FiniteGroup, GroupHom, Subgroup, check_hom


class SerreGraph:
    """Directed-edge graph with involution.

    ``pairs`` is a list of (origin, terminus) per geometric edge; geometric
    edge i yields directed edges 2i (o→t) and 2i+1 (t→o).
    """

    def __init__(self, num_vertices: int, pairs):
        if num_vertices < 1:
            raise ValueError("graph needs at least one vertex")
        self.num_vertices = num_vertices
        self.pairs = tuple((int(o), int(t)) for o, t in pairs)
        for o, t in self.pairs:
            if not (0 <= o < num_vertices and 0 <= t < num_vertices):
                raise ValueError(f"edge endpoint out of range: ({o}, {t})")
        self.num_edges = 2 * len(self.pairs)

    def bar(self, e: int) -> int:
        return e ^ 1

    def geometric(self, e: int) -> int:
        return e >> 1

    def o(self, e: int) -> int:
        o, t = self.pairs[e >> 1]
        return o if (e & 1) == 0 else t

    def t(self, e: int) -> int:
        o, t = self.pairs[e >> 1]
        return t if (e & 1) == 0 else o

    def edges_at(self, v: int):
        """Directed edges with origin v, ascending."""
        return [e for e in range(self.num_edges) if self.o(e) == v]

    def is_connected(self) -> bool:
        seen = {0}
        stack = [0]
        while stack:
            v = stack.pop()
            for e in range(self.num_edges):
                if self.o(e) == v and self.t(e) not in seen:
                    seen.add(self.t(e))
                    stack.append(self.t(e))
        return len(seen) == self.num_vertices


class GraphOfGroups:
    """A SerreGraph with finite vertex/edge groups and edge monomorphisms.

    ``egroups[i]`` is the group of geometric edge i (shared by both directed
    edges, which is how the invariant egroup(e) = egroup(ē) is enforced);
    ``inj[e]`` is the monomorphism egroup(e) → vgroup(t(e)) for each directed
    edge e.
    """

    def __init__(self, graph: SerreGraph, vgroups, egroups, inj):
        self.graph = graph
        self.vgroups = tuple(vgroups)
        self.egroups = tuple(egroups)
        self.inj = tuple(inj)
        if len(self.vgroups) != graph.num_vertices:
            raise ValueError("one vertex group per vertex required")
        if len(self.egroups) != len(graph.pairs):
            raise ValueError("one edge group per geometric edge required")
        if len(self.inj) != graph.num_edges:
            raise ValueError("one monomorphism per directed edge required")
        self._images = {}

    def vgroup(self, v: int) -> FiniteGroup:
        return self.vgroups[v]

    def egroup(self, e: int) -> FiniteGroup:
        return self.egroups[e >> 1]

    def image(self, e: int) -> frozenset:
        """Image of inj(e) inside vgroup(t(e)), cached."""
        if e not in self._images:
            self._images[e] = frozenset(self.inj[e].map)
        return self._images[e]

    def classify(self) -> str:
        g = self.graph
        if g.num_vertices == 2 and len(g.pairs) == 1 and g.pairs[0][0] != g.pairs[0][1]:
            return "amalgam"
        if g.num_vertices == 1 and len(g.pairs) == 1:
            return "hnn"
        return "general"


def validate(gog: GraphOfGroups):
    """Report-style invariant check; returns a list of violation strings
    (empty means OK)."""
    problems = []
    g = gog.graph
    for e in range(g.num_edges):
        h = gog.inj[e]
        if h.source is not gog.egroup(e):
            problems.append(f"inj({e}) source is not egroup({e})")
            continue
        if h.target is not gog.vgroup(g.t(e)):
            problems.append(f"inj({e}) target is not vgroup(t({e}))")
            continue
        ok, pair = check_hom(h)
        if not ok:
            problems.append(f"inj({e}) is not a homomorphism (violates at {pair})")
        elif not h.is_injective():
            problems.append(f"inj({e}) is not injective")
    if not g.is_connected():
        problems.append("underlying graph is not connected")
    return problems


class GroupWord:
    """Alternating word g0, e1, g1, ..., en, gn along a path.

    ``head`` is g0 in vgroup(start); ``pairs`` is a tuple of (edge, element)
    with each element in vgroup(t(edge)).
    """

    __slots__ = ("gog", "start", "head", "pairs")

    def __init__(self, gog: GraphOfGroups, start: int, head: int, pairs=()):
        self.gog = gog
        self.start = start
        self.head = head
        self.pairs = tuple((int(e), int(x)) for e, x in pairs)
        g = gog.graph
        if not 0 <= start < g.num_vertices:
            raise ValueError(f"bad start vertex {start}")
        if not 0 <= head < gog.vgroup(start).order:
            raise ValueError(f"head {head} out of range at vertex {start}")
        at = start
        for e, x in self.pairs:
            if not 0 <= e < g.num_edges:
                raise ValueError(f"bad edge {e}")
            if g.o(e) != at:
                raise ValueError(f"edge {e} does not continue the path at {at}")
            at = g.t(e)
            if not 0 <= x < gog.vgroup(at).order:
                raise ValueError(f"element {x} out of range at vertex {at}")

    @property
    def end(self) -> int:
        if not self.pairs:
            return self.start
        return self.gog.graph.t(self.pairs[-1][0])

    def is_loop(self) -> bool:
        return self.end == self.start

    def __mul__(self, other: "GroupWord") -> "GroupWord":
        if other.start != self.end:
            raise ValueError(
                f"cannot concatenate: path ends at {self.end}, next starts at {other.start}"
            )
        if not self.pairs:
            G = self.gog.vgroup(self.start)
            return GroupWord(self.gog, self.start, G.op(self.head, other.head), other.pairs)
        e_last, x_last = self.pairs[-1]
        G = self.gog.vgroup(self.end)
        merged = self.pairs[:-1] + ((e_last, G.op(x_last, other.head)),) + other.pairs
        return GroupWord(self.gog, self.start, self.head, merged)

    def inverse(self) -> "GroupWord":
        gog = self.gog
        g = gog.graph
        if not self.pairs:
            G = gog.vgroup(self.start)
            return GroupWord(gog, self.start, G.inv[self.head], ())
        # (g0, (e1,g1),...,(en,gn))^-1 = (gn^-1, (ēn, g_{n-1}^-1), ..., (ē1, g0^-1))
        elements = [self.head] + [x for _, x in self.pairs]
        verts = [self.start] + [g.t(e) for e, _ in self.pairs]
        edges = [e for e, _ in self.pairs]
        new_head = gog.vgroup(verts[-1]).inv[elements[-1]]
        new_pairs = []
        for i in range(len(edges) - 1, -1, -1):
            new_pairs.append((g.bar(edges[i]), gog.vgroup(verts[i]).inv[elements[i]]))
        return GroupWord(gog, verts[-1], new_head, new_pairs)

    def key(self):
        """Flat deterministic sort key: edge count, then (vertex, element,
        edge) data lexicographically."""
        flat = [self.start, self.head]
        for e, x in self.pairs:
            flat.extend((e, x))
        return (len(self.pairs), tuple(flat))

    def __eq__(self, other):
        return (
            isinstance(other, GroupWord)
            and self.start == other.start
            and self.head == other.head
            and self.pairs == other.pairs
        )

    def __lt__(self, other):
        return self.key() < other.key()

    def __hash__(self):
        return hash((self.start, self.head, self.pairs))

    def __repr__(self):
        bits = [f"v{self.start}:{self.head}"]
        for e, x in self.pairs:
            bits.append(f"e{e}")
            bits.append(str(x))
        return "Word(" + " ".join(bits) + ")"


def identity_word(gog: GraphOfGroups, v: int) -> GroupWord:
    return GroupWord(gog, v, gog.vgroup(v).identity, ())


class Transversals:
    """Right-coset representative tables per directed edge.

    For directed edge e with image H = inj(e)(egroup) ≤ vgroup(t(e)), each
    element g decomposes uniquely as g = inj(e)(c) · x with x the chosen
    representative of the right coset H·g.  Representatives are least element
    index, except the coset H itself which the identity represents.
    """

    def __init__(self, gog: GraphOfGroups, seed: int = 0):
        # seed is accepted for interface stability; the least-index rule is
        # already deterministic so it changes nothing.
        self.gog = gog
        self.seed = seed
        self.reps = {}
        self.decomp = {}
        g = gog.graph
        for e in range(g.num_edges):
            G = gog.vgroup(g.t(e))
            h = gog.inj[e]
            image = sorted(h.map)
            pre = {h.map[c]: c for c in range(h.source.order)}
            seen = {}
            reps = []
            for x in range(G.order):
                if x in seen:
                    continue
                coset = sorted(G.table[y][x] for y in image)
                rep = G.identity if G.identity in coset else coset[0]
                reps.append(rep)
                for z in coset:
                    seen[z] = rep
            table = {}
            for gg in range(G.order):
                x = seen[gg]
                hx = G.table[gg][G.inv[x]]  # g * x^-1 ∈ H
                table[gg] = (pre[hx], x)
            self.reps[e] = reps
            self.decomp[e] = table


def fix_transversals(gog: GraphOfGroups, seed: int = 0) -> Transversals:
    return Transversals(gog, seed)


class NormalForm:
    """Canonical reduced word plus bookkeeping."""

    __slots__ = ("word", "kind", "transversals")

    def __init__(self, word: GroupWord, kind: str, transversals: Transversals):
        self.word = word
        self.kind = kind
        self.transversals = transversals

    def key(self):
        return self.word.key()

    def __eq__(self, other):
        return isinstance(other, NormalForm) and self.word == other.word

    def __hash__(self):
        return hash(self.word)

    def __repr__(self):
        return f"NormalForm({self.word!r}, {self.kind})"


def _pinch_pass(gog, head, items, order):
    """Apply Britton pinches until none fire.  items is a mutable list of
    [edge, element].  Returns the new head."""
    g = gog.graph
    changed = True
    while changed:
        changed = False
        indices = range(len(items) - 1)
        if order == "rl":
            indices = range(len(items) - 2, -1, -1)
        for j in indices:
            e1, h1 = items[j]
            e2, _ = items[j + 1]
            if e2 != g.bar(e1):
                continue
            if h1 not in gog.image(e1):
                continue
            inj = gog.inj[e1]
            c = inj.map.index(h1)
            corr = gog.inj[g.bar(e1)].map[c]
            Gm = gog.vgroup(g.o(e1))
            h2 = items[j + 1][1]
            merged = Gm.op(corr, h2)
            if j == 0:
                head = Gm.op(head, merged)
            else:
                items[j - 1][1] = Gm.op(items[j - 1][1], merged)
            del items[j : j + 2]
            changed = True
            break
    return head


def reduce_word(w: GroupWord, gog: GraphOfGroups, transversals: Transversals,
                order: str = "rl") -> NormalForm:
    """Reduce to the canonical normal form.

    ``order`` chooses the pinch scanning direction ("lr" or "rl"); both reach
    the same normal form (asserted by the property tests), the parameter
    exists so that the confluence claim is testable.
    """
    if order not in ("lr", "rl"):
        raise ValueError(f"unknown sweep order {order!r}")
    g = gog.graph
    head = w.head
    items = [[e, x] for e, x in w.pairs]
    head = _pinch_pass(gog, head, items, order)
    # canonical decomposition sweep, right to left, corrections pushed left
    for j in range(len(items) - 1, -1, -1):
        e, x = items[j]
        c, rep = transversals.decomp[e][x]
        items[j][1] = rep
        corr = gog.inj[g.bar(e)].map[c]
        Gm = gog.vgroup(g.o(e))
        if j == 0:
            head = Gm.op(head, corr)
        else:
            items[j - 1][1] = Gm.op(items[j - 1][1], corr)
    out = GroupWord(gog, w.start, head, [(e, x) for e, x in items])
    return NormalForm(out, gog.classify(), transversals)


def words_equal(u: GroupWord, w: GroupWord, gog: GraphOfGroups,
                transversals: Transversals) -> bool:
    if u.start != w.start:
        raise ValueError(f"basepoint mismatch: {u.start} vs {w.start}")
    return reduce_word(u, gog, transversals).word == reduce_word(w, gog, transversals).word


def syllable_length(nf: NormalForm) -> int:
    """Number of nontrivial vertex-group syllables of the canonical form."""
    w = nf.word
    gog = w.gog
    n = 0
    if w.head != gog.vgroup(w.start).identity:
        n += 1
    g = gog.graph
    for e, x in w.pairs:
        if x != gog.vgroup(g.t(e)).identity:
            n += 1
    return n


def cyclically_reduce(w: GroupWord, gog: GraphOfGroups,
                      transversals: Transversals):
    """Return (core, conjugator) with w = conjugator · core · conjugator⁻¹.

    The core is cyclically reduced: no Britton pinch applies to the cyclic
    word, and the trailing syllable of its representation is the identity
    (so the seam between the last and first syllables is fully merged).
    The conjugator is an open word from w's basepoint to the core's.
    """
    if not w.is_loop():
        raise ValueError("cyclic reduction needs a loop word")
    g = gog.graph
    cur = reduce_word(w, gog, transversals).word
    conj = identity_word(gog, w.start)
    guard = 0
    while cur.pairs:
        guard += 1
        if guard > 100_000:
            raise RuntimeError("cyclic reduction failed to stabilize")
        n = len(cur.pairs)
        e_last, x_last = cur.pairs[-1]
        G_at = gog.vgroup(cur.start)
        f1 = cur.pairs[0][0]
        seam = G_at.op(x_last, cur.head)
        pinchable = n >= 2 and f1 == g.bar(e_last) and seam in gog.image(e_last)
        if not pinchable and x_last == G_at.identity:
            break
        # rotate one notch: conjugate by the prefix p = (head, first edge);
        # the rotated word merges the seam syllable and ends with (f1, 1)
        p = GroupWord(gog, cur.start, cur.head,
                      ((f1, gog.vgroup(g.t(f1)).identity),))
        id_t = gog.vgroup(g.t(f1)).identity
        if n == 1:
            rotated = GroupWord(gog, g.t(f1),
                                gog.vgroup(g.t(f1)).op(cur.pairs[0][1], cur.head),
                                ((f1, id_t),))
        else:
            rotated = GroupWord(
                gog, g.t(f1), cur.pairs[0][1],
                tuple(cur.pairs[1:-1]) + ((e_last, seam), (f1, id_t)),
            )
        conj = conj * p
        cur = reduce_word(rotated, gog, transversals).word
    return cur, reduce_word(conj, gog, transversals).word


# -- word JSON --------------------------------------------------------------


def word_to_json(w: GroupWord):
    out = ["g", w.start, w.head]
    for e, x in w.pairs:
        out.extend(["e", e, "g", w.gog.graph.t(e), x])
    return out


def word_from_json(data, gog: GraphOfGroups) -> GroupWord:
    if not isinstance(data, list) or len(data) < 3 or data[0] != "g":
        raise ValueError("word JSON must start with ['g', vertex, element]")
    start, head = int(data[1]), int(data[2])
    pairs = []
    i = 3
    while i < len(data):
        if data[i] != "e" or i + 4 >= len(data):
            raise ValueError(f"expected ['e', edge, 'g', vertex, element] at position {i}")
        e = int(data[i + 1])
        if data[i + 2] != "g":
            raise ValueError(f"expected 'g' token at position {i + 2}")
        v, x = int(data[i + 3]), int(data[i + 4])
        if v != gog.graph.t(e):
            raise ValueError(f"vertex {v} is not the terminus of edge {e}")
        pairs.append((e, x))
        i += 5
    return GroupWord(gog, start, head, pairs)


# -- convenient constructors ------------------------------------------------


def amalgam(A: FiniteGroup, B: FiniteGroup, C: FiniteGroup,
            into_a, into_b) -> GraphOfGroups:
    """A ∗_C B: vertex 0 carries A, vertex 1 carries B; directed edge 0 runs
    0→1 (inj into B), edge 1 runs 1→0 (inj into A)."""
    graph = SerreGraph(2, [(0, 1)])
    inj_b = GroupHom(C, B, into_b)
    inj_a = GroupHom(C, A, into_a)
    return GraphOfGroups(graph, [A, B], [C], [inj_b, inj_a])


def free_product(A: FiniteGroup, B: FiniteGroup) -> GraphOfGroups:
    from .finite import make_cyclic

    C = make_cyclic(1)
    return amalgam(A, B, C, [A.identity], [B.identity])


def hnn_sub(B: FiniteGroup, A_elements, alpha_images) -> GraphOfGroups:
    """HNN extension of B over the subgroup with elements A_elements, with
    α given by the image of each element (aligned with sorted order).  The
    single geometric loop gives directed edges 0 (the stable letter t,
    inj = α) and 1 (the reverse direction, inj = inclusion), so the Britton
    pinch t⁻¹ · a · t → α(a) holds for a in the domain subgroup."""
    A_sorted = sorted(A_elements)
    pos = {a: i for i, a in enumerate(A_sorted)}
    table = [[pos[B.table[a][b]] for b in A_sorted] for a in A_sorted]
    A = FiniteGroup(table)
    incl = GroupHom(A, B, A_sorted)
    am = GroupHom(A, B, [alpha_images[i] for i in range(len(A_sorted))])
    graph = SerreGraph(1, [(0, 0)])
    return GraphOfGroups(graph, [B], [A], [am, incl])
