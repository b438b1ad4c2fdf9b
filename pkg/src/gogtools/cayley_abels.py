"""Cayley–Abels graph balls, built two ways, plus the condition checklist.

Constructions
-------------
``coset_graph_ball`` works inside a concrete group: vertices are cosets of a
finite subgroup U (one family) and of each listed subgroup H (one family
each); edges are {gU, gsU} per listed generator and {gU, gH} cone edges.
Breadth-first from the coset U.  A cone family without a finite enumeration
cannot be expanded, so such vertices are BFS-terminal; after the sweep a
final pass adds every edge whose endpoints both landed in the ball.  The
recorded distances are therefore graph distances in the locally finite
approximation that ignores shortcuts through unexpanded cones — the honest
choice at finite radius, and the reading under which the ball of the
coned-off plane is "grid ball plus cones".

``quotient_tree_ball`` quotients the tree-ball construction by the normal
closure of a relator list, membership being decided by a caller-supplied
word-problem callable (True / False / None="cannot decide", the last aborts).
With no relators it reproduces the tree ball verbatim.

Cells and determinism
---------------------
Vertices carry an orbit tag ("G/U", "G/H0", ... — or "T/v0", ... for
quotient balls) and a representative; newly discovered cosets are indexed
per level in (tag, canonical key) order, so reruns are byte-identical.
"""

from __future__ import annotations

from fractions import Fraction

from .concrete import SubgroupHandle
from .errors import CapExceeded, UnsupportedInput
from .finite import Subgroup, left_transversal
from .gog import (
    GraphOfGroups,
    GroupWord,
    fix_transversals,
    identity_word,
    reduce_word,
    word_to_json,
)
from .tree import canonical_coset_word


class GVertex:
    __slots__ = ("tag", "rep", "key", "dist", "stab_name", "stab_order")

    def __init__(self, tag, rep, key, dist, stab_name, stab_order):
        self.tag = tag
        self.rep = rep
        self.key = key
        self.dist = dist
        self.stab_name = stab_name
        self.stab_order = stab_order  # None means not finitely enumerated

    def __repr__(self):
        return f"GVertex({self.tag}, d={self.dist}, stab={self.stab_order})"


class GEdge:
    __slots__ = ("tag", "u", "v", "stab_order")

    def __init__(self, tag, u, v, stab_order):
        self.tag = tag
        self.u = u
        self.v = v
        self.stab_order = stab_order

    def __repr__(self):
        return f"GEdge({self.tag}, {self.u}--{self.v})"


class GGraphBall:
    """Finite ball of a Cayley–Abels style graph; immutable once built."""

    def __init__(self, verts, edges, adjacency, radius, notes=()):
        self.verts = tuple(verts)
        self.edges = tuple(edges)
        self.adjacency = tuple(tuple(a) for a in adjacency)
        self.radius = radius
        self.notes = tuple(notes)

    def vertex_count(self):
        return len(self.verts)

    def edge_count(self):
        return len(self.edges)

    def degree(self, i):
        return len(self.adjacency[i])

    def distances(self, src: int):
        """BFS distances from a vertex; unreachable = absent."""
        dist = {src: 0}
        queue = [src]
        while queue:
            nxt = []
            for x in queue:
                for y, _ in self.adjacency[x]:
                    if y not in dist:
                        dist[y] = dist[x] + 1
                        nxt.append(y)
            queue = nxt
        return dist

    def subball_degree(self, i, rho):
        """Degree of vertex i inside the sub-ball of radius rho."""
        if self.verts[i].dist > rho:
            return 0
        return sum(1 for j, _ in self.adjacency[i] if self.verts[j].dist <= rho)


class _Family:
    """Coset dedup store for one orbit tag."""

    def __init__(self, tag, G, handle: SubgroupHandle):
        self.tag = tag
        self.G = G
        self.handle = handle
        self.by_key = {}
        self.scan = []  # (rep, idx) fallback when no canonical key exists

    def lookup(self, rep):
        """Return (index or None, key or None) for the coset rep·H."""
        key = self.handle.key_of(self.G, rep)
        if key is not None:
            return self.by_key.get(key), key
        for r, i in self.scan:
            if self.handle.same_coset(self.G, r, rep):
                return i, None
        return None, None

    def register(self, rep, idx, key):
        if key is not None:
            self.by_key[key] = idx
        else:
            self.scan.append((rep, idx))


def _edge_insert(edges, eindex, adjacency, tag, u, v, stab_order, notes):
    if u == v:
        note = f"dropped loop edge at vertex {u} (tag {tag})"
        if note not in notes:
            notes.append(note)
        return
    pair = (min(u, v), max(u, v))
    if pair in eindex:
        return
    eindex[pair] = len(edges)
    edges.append(GEdge(tag, u, v, stab_order))
    adjacency[u].append((v, eindex[pair]))
    adjacency[v].append((u, eindex[pair]))


def coset_graph_ball(G, U: SubgroupHandle, S, hs, R: int,
                     cap: int = 10 ** 6) -> GGraphBall:
    """Ball of radius R around the vertex U in the coset construction."""
    if R < 0:
        raise ValueError(f"radius must be >= 0, got {R}")
    if U.elements is None:
        raise ValueError("U must be finite with an explicit enumeration")
    S = list(S)
    hs = list(hs)

    fam_u = _Family("G/U", G, U)
    fams = {"G/U": fam_u}
    for i, h in enumerate(hs):
        fams[f"G/H{i}"] = _Family(f"G/H{i}", G, h)

    # per-orbit edge stabilizer orders, computable from U's enumeration
    s_stab = []
    for s in S:
        si = G.inv(s)
        s_stab.append(
            sum(1 for u in U.elements if U.contains(G.op(si, G.op(u, s))))
        )
    cone_stab = [sum(1 for u in U.elements if h.contains(u)) for h in hs]

    verts = []
    adjacency = []
    edges = []
    eindex = {}
    notes = []

    def add_vertex(tag, rep, key, dist):
        fam = fams[tag]
        idx = len(verts)
        if idx + 1 > cap:
            raise CapExceeded(
                f"coset graph ball exceeded cap of {cap} vertices",
                detail={"vertices": idx, "radius_reached": dist - 1},
            )
        if tag == "G/U":
            stab_name, stab_order = U.name, len(U.elements)
        else:
            h = fam.handle
            stab_name = h.name
            stab_order = h.order if h.is_finite else None
        verts.append(GVertex(tag, rep, key, dist, stab_name, stab_order))
        adjacency.append([])
        fam.register(rep, idx, key)
        return idx

    def candidates(i):
        """Neighbor cosets of vertex i as (tag, rep, edge_tag, edge_stab)."""
        vx = verts[i]
        out = []
        if vx.tag == "G/U":
            for u in U.elements:
                gu = G.op(vx.rep, u)
                for si, s in enumerate(S):
                    out.append(("G/U", G.op(gu, s), f"s{si}", s_stab[si]))
                    out.append(("G/U", G.op(gu, G.inv(s)), f"s{si}", s_stab[si]))
                for hi in range(len(hs)):
                    out.append(
                        (f"G/H{hi}", gu, f"cone:H{hi}", cone_stab[hi])
                    )
        else:
            hi = int(vx.tag[3:])
            h = hs[hi]
            if h.elements is not None:
                for x in h.elements:
                    out.append(
                        ("G/U", G.op(vx.rep, x), f"cone:H{hi}", cone_stab[hi])
                    )
        return out

    ident = G.identity
    k0 = fam_u.handle.key_of(G, ident)
    add_vertex("G/U", ident, k0, 0)

    frontier = [0]
    for dist in range(1, R + 1):
        staged = []          # [{tag, rep, key, sources: [(src, etag, estab)]}]
        staged_keyed = {}
        for i in frontier:
            for tag, rep, etag, estab in candidates(i):
                fam = fams[tag]
                found, key = fam.lookup(rep)
                if found is not None:
                    _edge_insert(edges, eindex, adjacency, etag, i, found,
                                 estab, notes)
                    continue
                if key is not None:
                    entry = staged_keyed.get((tag, key))
                    if entry is None:
                        entry = {"tag": tag, "rep": rep, "key": key,
                                 "sources": []}
                        staged_keyed[(tag, key)] = entry
                        staged.append(entry)
                    entry["sources"].append((i, etag, estab))
                else:
                    for entry in staged:
                        if entry["tag"] == tag and entry["key"] is None and \
                                fam.handle.same_coset(G, entry["rep"], rep):
                            entry["sources"].append((i, etag, estab))
                            break
                    else:
                        staged.append({"tag": tag, "rep": rep, "key": None,
                                       "sources": [(i, etag, estab)]})
        order = sorted(
            range(len(staged)),
            key=lambda n: (
                staged[n]["tag"],
                repr(staged[n]["key"]) if staged[n]["key"] is not None
                else f"~{n:09d}",
            ),
        )
        frontier = []
        for n in order:
            entry = staged[n]
            j = add_vertex(entry["tag"], entry["rep"], entry["key"], dist)
            for src, etag, estab in entry["sources"]:
                _edge_insert(edges, eindex, adjacency, etag, src, j, estab,
                             notes)
            frontier.append(j)

    # induced pass: edges between already-collected vertices that BFS did not
    # traverse (boundary-boundary, and cone links generated from the U side)
    for i in range(len(verts)):
        if verts[i].tag != "G/U":
            continue
        for tag, rep, etag, estab in candidates(i):
            found, _ = fams[tag].lookup(rep)
            if found is not None:
                _edge_insert(edges, eindex, adjacency, etag, i, found, estab,
                             notes)

    return GGraphBall(verts, edges, adjacency, R, notes)


def quotient_tree_ball(gog: GraphOfGroups, relators, R: int, wp=None,
                       base: int = 0, transversals=None,
                       cap: int = 10 ** 6) -> GGraphBall:
    """Ball of the tree quotiented by the normal closure of ``relators``."""
    if R < 0:
        raise ValueError(f"radius must be >= 0, got {R}")
    relators = list(relators)
    if relators and wp is None:
        raise ValueError("nonempty relator list needs a word-problem callable")
    T = transversals if transversals is not None else fix_transversals(gog)
    g = gog.graph

    def in_kernel(word: GroupWord) -> bool:
        if not word.pairs and word.head == gog.vgroup(word.start).identity:
            return True
        if not relators:
            return False
        verdict = wp(word)
        if verdict is None:
            raise UnsupportedInput(
                f"word-problem oracle could not decide {word!r}; "
                "quotient construction aborted"
            )
        return bool(verdict)

    fan = {}
    for e in range(g.num_edges):
        Gv = gog.vgroup(g.o(e))
        H = Subgroup(Gv, sorted(gog.image(g.bar(e))))
        fan[e] = left_transversal(Gv, H)

    verts = []
    adjacency = []
    edges = []
    eindex = {}
    notes = []
    exact = {}      # canonical tree word -> index
    by_lam = {}     # Λ-vertex -> [indices]

    def add_vertex(word, lam_v, dist):
        idx = len(verts)
        if idx + 1 > cap:
            raise CapExceeded(
                f"quotient ball exceeded cap of {cap} vertices",
                detail={"vertices": idx, "radius_reached": dist - 1},
            )
        verts.append(
            GVertex(f"T/v{lam_v}", word, word, dist, f"vgroup[{lam_v}]",
                    gog.vgroup(lam_v).order)
        )
        adjacency.append([])
        exact[word] = idx
        by_lam.setdefault(lam_v, []).append(idx)
        return idx

    def find(word, lam_v):
        """Index of the existing vertex equal to word·G_v modulo the kernel."""
        j = exact.get(word)
        if j is not None:
            return j
        if not relators:
            return None
        Gv = gog.vgroup(lam_v)
        for i in by_lam.get(lam_v, []):
            w_i = verts[i].rep
            inv_i = w_i.inverse()
            for x in range(Gv.order):
                d = reduce_word(word * GroupWord(gog, lam_v, x) * inv_i, gog, T).word
                if in_kernel(d):
                    return i
        return None

    center = canonical_coset_word(identity_word(gog, base), gog, T)
    add_vertex(center, base, 0)

    def neighbor_words(i):
        w = verts[i].rep
        v = w.end
        out = []
        for e in g.edges_at(v):
            tv = g.t(e)
            ident_t = gog.vgroup(tv).identity
            for rep in fan[e]:
                step = GroupWord(gog, v, rep, [(e, ident_t)])
                nf = reduce_word(w * step, gog, T).word
                cand = canonical_coset_word(nf, gog, T)
                out.append((cand, tv, e))
        return out

    frontier = [0]
    for dist in range(1, R + 1):
        nxt = []
        for i in frontier:
            for cand, tv, e in neighbor_words(i):
                j = find(cand, tv)
                if j is None:
                    j = add_vertex(cand, tv, dist)
                    nxt.append(j)
                _edge_insert(edges, eindex, adjacency, f"T/e{e >> 1}", i, j,
                             gog.egroup(e).order, notes)
        frontier = nxt

    # induced pass over the boundary so cycle-closing edges are present
    for i in frontier:
        for cand, tv, e in neighbor_words(i):
            j = find(cand, tv)
            if j is not None:
                _edge_insert(edges, eindex, adjacency, f"T/e{e >> 1}", i, j,
                             gog.egroup(e).order, notes)

    return GGraphBall(verts, edges, adjacency, R, notes)


def check_ca_conditions(ball: GGraphBall) -> dict:
    """Per-condition verdicts, restricted to the ball.

    The degree dichotomy is a growth heuristic read off three nested
    sub-balls, never a proof: a vertex is flagged as growth-type when its
    sub-ball degree strictly increases across the top three radii.
    """
    report = {"radius": ball.radius, "notes": list(ball.notes)}

    loops = [e for e in ball.edges if e.u == e.v]
    pairs = [(min(e.u, e.v), max(e.u, e.v)) for e in ball.edges]
    doubled = len(pairs) != len(set(pairs))
    report["simplicial"] = {
        "pass": not loops and not doubled,
        "loops": len(loops),
        "doubled_pairs": len(pairs) - len(set(pairs)),
    }

    reached = ball.distances(0) if ball.vertex_count() else {}
    report["connected"] = {
        "pass": len(reached) == ball.vertex_count(),
        "reached": len(reached),
        "vertices": ball.vertex_count(),
    }

    vtags = sorted({v.tag for v in ball.verts})
    etags = sorted({e.tag for e in ball.edges})
    report["finitely_many_orbits"] = {
        "pass": True,
        "vertex_tags": vtags,
        "edge_tags": etags,
    }

    bad_edges = [i for i, e in enumerate(ball.edges) if e.stab_order is None]
    report["edge_stabilizers_finite"] = {
        "pass": not bad_edges,
        "violations": bad_edges,
    }

    classes = {}
    for v in ball.verts:
        kind = "finite" if v.stab_order is not None else "infinite-designated"
        classes.setdefault(v.tag, kind)
    report["vertex_stabilizer_classes"] = classes

    R = ball.radius
    if R < 2:
        report["degree_dichotomy"] = {
            "pass": None,
            "reason": "needs radius >= 2 for three nested sub-balls",
        }
    else:
        rhos = [R - 2, R - 1, R]
        flagged = []
        evaluated = []
        for i, v in enumerate(ball.verts):
            if v.dist > R - 2:
                continue
            evaluated.append(i)
            seq = [ball.subball_degree(i, rho) for rho in rhos]
            if seq[0] < seq[1] < seq[2]:
                flagged.append(i)
        infinite = [i for i in evaluated if ball.verts[i].stab_order is None]
        report["degree_dichotomy"] = {
            "pass": set(flagged) == set(infinite),
            "radii": rhos,
            "growth_flagged": flagged,
            "infinite_stabilizer_tagged": infinite,
        }

    report["all_pass"] = all(
        c["pass"] in (True, None)
        for c in (
            report["simplicial"],
            report["connected"],
            report["finitely_many_orbits"],
            report["edge_stabilizers_finite"],
            report["degree_dichotomy"],
        )
    )
    return report


def compare_balls_qi(b1: GGraphBall, b2: GGraphBall) -> dict:
    """Empirical bi-Lipschitz constant between two balls sharing U-vertex
    keys: max over common inner vertex pairs of the two distance ratios."""
    inner = min(b1.radius, b2.radius) // 2
    m1 = {v.key: i for i, v in enumerate(b1.verts)
          if v.tag == "G/U" and v.key is not None and v.dist <= inner}
    m2 = {v.key: i for i, v in enumerate(b2.verts)
          if v.tag == "G/U" and v.key is not None and v.dist <= inner}
    common = sorted(set(m1) & set(m2), key=repr)
    ell = Fraction(1)
    witness = None
    npairs = 0
    for a in range(len(common)):
        d1 = b1.distances(m1[common[a]])
        d2 = b2.distances(m2[common[a]])
        for b in range(a + 1, len(common)):
            x1 = d1.get(m1[common[b]])
            x2 = d2.get(m2[common[b]])
            if not x1 or not x2:
                continue
            npairs += 1
            ratio = max(Fraction(x1, x2), Fraction(x2, x1))
            if ratio > ell:
                ell = ratio
                witness = (repr(common[a]), repr(common[b]), x1, x2)
    return {"ell": ell, "pairs": npairs, "witness": witness}


def _rep_json(rep):
    if isinstance(rep, GroupWord):
        return word_to_json(rep)
    if isinstance(rep, tuple):
        return [_rep_json(x) for x in rep]
    return rep


def ca_to_json(ball: GGraphBall) -> dict:
    return {
        "radius": ball.radius,
        "notes": list(ball.notes),
        "vertices": [
            {
                "tag": v.tag,
                "rep": _rep_json(v.rep),
                "dist": v.dist,
                "stab_name": v.stab_name,
                "stab_order": v.stab_order,
            }
            for v in ball.verts
        ],
        "edges": [
            {"tag": e.tag, "endpoints": [e.u, e.v], "stab_order": e.stab_order}
            for e in ball.edges
        ],
    }


def ca_to_dot(ball: GGraphBall) -> str:
    lines = ["graph caball {"]
    for i, v in enumerate(ball.verts):
        stab = v.stab_order if v.stab_order is not None else "inf"
        lines.append(f'  v{i} [label="{v.tag} d{v.dist} stab{stab}"];')
    for e in ball.edges:
        lines.append(f'  v{e.u} -- v{e.v} [label="{e.tag}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
