"""Symmetrized relator sets, small-cancellation verdicts, and thinness audits.

Conventions
-----------
Relators are loop words at a chosen basepoint.  Cyclic rotation acts one
edge-step at a time on the trailing-identity representation produced by
``cyclically_reduce`` (head, then pairs whose last element is the identity
carried by the returning edge), so a rotation is again a reduced loop of
the same length, based at the next vertex along the loop.

Piece lengths are measured in syllables of canonical normal form.  Two
members share a prefix of length l when their first l syllables agree as
group elements up to right multiplication by an edge-group element at the
seam; for free products (trivial edge groups) this is plain syllable
equality, which is the fast path.  Only *distinct* members of the
symmetrized set contribute pieces.  The linear overlap of a member with
its own rotations (the classical border function) and proper-power
periodicity are reported separately — they are diagnostics, not pieces,
and do not enter λ*.

Dehn reduction replaces the leftmost, longest subword matching more than
half of a member by the shorter complement, recording a trace that replays
to an exact conjugate-product witness.  Matching is performed position
by position on canonical forms, with the first and last matched syllables
allowed to split inside their vertex group; for amalgams with nontrivial
seams this matcher is conservative (it may miss a match that exists after
seam shuffling), which is sound — a word it reduces to empty is in the
kernel — and complete on the trivial-seam fixtures the oracles cover.

The thinness audit is transporter-local: the 2-cells of the presentation
complex through a 1-cell x are the translates g·D of the base relator
disc with g·t_j = x for a boundary edge t_j of D, deduplicated modulo the
disc stabilizer ⟨r⟩ (which collapses boundary positions by the period:
q_{j+|r|} = r·q_j).  This counts incidences of the *infinite* complex
exactly, without materializing any 2-cell, and is how per-edge bounds are
certified at radii where a full disc could never fit in memory.
"""

from __future__ import annotations

from fractions import Fraction

from .complexes import Cell2, TwoComplexBall, cycle_key
from .errors import UnsupportedInput
from .gog import (
    GroupWord,
    cyclically_reduce,
    fix_transversals,
    identity_word,
    reduce_word,
    syllable_length,
    words_equal,
)
from .cayley_abels import quotient_tree_ball
from .tree import canonical_coset_word


# -- loop-word plumbing -----------------------------------------------------


def word_power(w: GroupWord, m: int, gog, T) -> GroupWord:
    """Reduced w^m for a loop word w (m >= 0)."""
    if not w.is_loop():
        raise ValueError(f"powers need a loop word, got {w.start} -> {w.end}")
    acc = identity_word(gog, w.start)
    for _ in range(m):
        acc = reduce_word(acc * w, gog, T).word
    return acc


def positions(w: GroupWord, gog):
    """The word as a list of (vertex, element, incoming edge or None)."""
    g = gog.graph
    out = [(w.start, w.head, None)]
    for e, x in w.pairs:
        out.append((g.t(e), x, e))
    return out


def _syl(w: GroupWord, gog) -> int:
    n = 0
    for v, x, _e in positions(w, gog):
        if x != gog.vgroup(v).identity:
            n += 1
    return n


def rotate_once(w: GroupWord, gog, T) -> GroupWord:
    """Rotate a reduced loop by one edge step: conjugate by head·(first
    edge), landing at the next vertex of the loop."""
    if not w.pairs:
        return w
    g = gog.graph
    e1, x1 = w.pairs[0]
    v1 = g.t(e1)
    id1 = gog.vgroup(v1).identity
    rest = list(w.pairs[1:])
    if rest:
        e_n, x_n = rest[-1]
        Gn = gog.vgroup(g.t(e_n))
        rest[-1] = (e_n, Gn.op(x_n, w.head))
        rotated = GroupWord(gog, v1, x1, rest + [(e1, id1)])
    else:
        rotated = GroupWord(gog, v1, gog.vgroup(v1).op(x1, w.head),
                            [(e1, id1)])
    return reduce_word(rotated, gog, T).word


def rotations(w: GroupWord, gog, T):
    """All edge-step rotations of a reduced loop (w itself first)."""
    out = [w]
    cur = w
    for _ in range(len(w.pairs) - 1):
        cur = rotate_once(cur, gog, T)
        out.append(cur)
    return out


# -- symmetrized sets -------------------------------------------------------


class SymmetrizedSet:
    """Closure of a relator under inversion and cyclic rotation, every
    member cyclically reduced and in canonical form.  ``base`` is the
    least member under the word key — the canonical cyclic conjugate the
    rest of the module refers back to."""

    def __init__(self, gog, transversals, members, base, source):
        self.gog = gog
        self.transversals = transversals
        self.members = tuple(members)
        self.base = base
        self.source = source

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def member_length(self) -> int:
        """Common syllable length of the members (they are all rotations
        of one cyclic word or its inverse)."""
        return min(_syl(w, self.gog) for w in self.members)

    def __repr__(self):
        return f"SymmetrizedSet({len(self.members)} members, base={self.base!r})"


def _word_id(w: GroupWord):
    return (w.start, w.head, tuple(w.pairs))


def symmetrize(r: GroupWord, gog, transversals=None) -> SymmetrizedSet:
    """Smallest symmetrized set containing r: all cyclic rotations of the
    cyclically reduced r and of its inverse, deduplicated."""
    T = transversals if transversals is not None else fix_transversals(gog)
    red = reduce_word(r, gog, T).word
    core, _conj = cyclically_reduce(red, gog, T)
    if not core.pairs and core.head == gog.vgroup(core.start).identity:
        raise ValueError(f"empty relator: {r!r} reduces to the identity")
    inv_core, _ = cyclically_reduce(
        reduce_word(core.inverse(), gog, T).word, gog, T)
    seen = {}
    for w0 in (core, inv_core):
        for w in rotations(w0, gog, T):
            if len(w.pairs) != len(core.pairs):
                raise RuntimeError(
                    f"rotation changed length for {w0!r}; cyclic reduction "
                    "is broken"
                )
            seen.setdefault(_word_id(w), w)
    members = sorted(seen.values(), key=lambda w: (w.start, w.key()))
    base = min(members, key=lambda w: w.key())
    return SymmetrizedSet(gog, T, members, base, red)


# -- pieces -----------------------------------------------------------------


def _fudge_sets(gog):
    """Per vertex, the set of nontrivial vertex-group elements that can
    slide across some edge at that vertex (the seam corrections)."""
    g = gog.graph
    out = {v: set() for v in range(g.num_vertices)}
    for e in range(g.num_edges):
        v = g.t(e)
        ident = gog.vgroup(v).identity
        for c in gog.image(e):
            if c != ident:
                out[v].add(c)
    return out


def common_prefix_syllables(w1: GroupWord, w2: GroupWord, gog,
                            fudge=None) -> int:
    """Maximal common prefix of two reduced words, in syllables.

    Positions match when vertex, element, and incoming edge agree; the
    last matched position may instead differ by a seam correction (any
    edge-group image element at that vertex), after which the prefixes
    diverge by construction.
    """
    if w1.start != w2.start:
        return 0
    p1, p2 = positions(w1, gog), positions(w2, gog)
    if fudge is None:
        fudge = _fudge_sets(gog)
    syl = 0
    for j in range(min(len(p1), len(p2))):
        v1, x1, e1 = p1[j]
        v2, x2, e2 = p2[j]
        if v1 != v2 or (j > 0 and e1 != e2):
            break
        G = gog.vgroup(v1)
        if x1 == x2:
            if x1 != G.identity:
                syl += 1
            continue
        # seam fudge: x1 = x2·c for a correction c; terminal by convention
        if any(x1 == G.op(x2, c) for c in fudge[v1]):
            syl += 1
        break
    return syl


def self_overlap(w: GroupWord, gog) -> int:
    """Longest linear overlap of w with a shift of itself (max border of
    the syllable sequence), in syllables."""
    pos = positions(w, gog)
    n = len(pos)
    best = 0
    for shift in range(1, n):
        syl = 0
        for i in range(n - shift):
            v1, x1, e1 = pos[shift + i]
            v2, x2, e2 = pos[i]
            if v1 != v2 or x1 != x2 or (i > 0 and e1 != e2):
                break
            if x1 != gog.vgroup(v1).identity:
                syl += 1
        best = max(best, syl)
    return best


class PieceReport:
    """Per-pair maximal common prefixes over distinct members, the global
    max p, and λ* = p / min member length; self-overlap and proper-power
    diagnostics ride along."""

    def __init__(self, pair_lengths, max_piece, witness, min_length,
                 members_count, self_overlap, proper_power):
        self.pair_lengths = pair_lengths
        self.max_piece = max_piece
        self.witness = witness
        self.min_length = min_length
        self.members_count = members_count
        self.self_overlap = self_overlap
        self.proper_power = proper_power

    @property
    def lam_star(self) -> Fraction:
        if self.min_length == 0 or self.max_piece == 0:
            return Fraction(0)
        return Fraction(self.max_piece, self.min_length)

    def __repr__(self):
        return (f"PieceReport(p={self.max_piece}, λ*={self.lam_star}, "
                f"members={self.members_count})")


def pieces(S: SymmetrizedSet) -> PieceReport:
    if len(S) < 1:
        raise ValueError("piece report needs a nonempty symmetrized set")
    gog, T = S.gog, S.transversals
    fudge = _fudge_sets(gog)
    pair_lengths = {}
    max_piece, witness = 0, None
    members = S.members
    for i in range(len(members)):
        for j in range(i + 1, len(members)):
            l = common_prefix_syllables(members[i], members[j], gog, fudge)
            pair_lengths[(i, j)] = l
            if l > max_piece:
                max_piece, witness = l, (i, j)
    min_length = S.member_length()
    if len(members) > 1 and max_piece >= min_length:
        raise RuntimeError(
            f"piece of length {max_piece} reaches the member length "
            f"{min_length}; two listed members coincide"
        )
    so = max(self_overlap(w, gog) for w in members)
    proper = False
    for w in members:
        ident = _word_id(w)
        for k, rot in enumerate(rotations(w, gog, T)):
            if k > 0 and _word_id(rot) == ident:
                proper = True
                break
        if proper:
            break
    return PieceReport(pair_lengths, max_piece, witness, min_length,
                       len(members), so, proper)


def check_cprime(r: GroupWord, m: int, lam, gog, transversals=None) -> dict:
    """C'(λ) verdict for the symmetrized set of r^m: every piece shorter
    than λ·|r^m|, with exact rational arithmetic."""
    if m < 1:
        raise ValueError(f"power must be >= 1, got {m}")
    lam = Fraction(lam)
    T = transversals if transversals is not None else fix_transversals(gog)
    rm = word_power(reduce_word(r, gog, T).word, m, gog, T)
    S = symmetrize(rm, gog, T)
    rep = pieces(S)
    L = rep.min_length
    verdict = Fraction(rep.max_piece) < lam * L
    return {
        "verdict": verdict,
        "lam": lam,
        "max_piece": rep.max_piece,
        "member_length": L,
        "members": rep.members_count,
        "lam_star": rep.lam_star,
        "self_overlap": rep.self_overlap,
        "proper_power": rep.proper_power,
        "m": m,
    }


# -- the constant M = k|r| --------------------------------------------------


class ThinnessConstant:
    """k = max over 1-cells t of the witness geodesic γ of [G̃_t : G̃_γ],
    and M = k·|r| in syllables.  ``gamma`` lists the crossed edges as
    (step, directed edge, origin Λ-vertex); ``stab_sets`` holds their
    stabilizers as frozensets of canonical word ids."""

    def __init__(self, k, r_syllables, gamma, indices, stab_sets=(),
                 note=None):
        self.k = k
        self.r_syllables = r_syllables
        self.M = k * r_syllables
        self.gamma = gamma
        self.indices = indices
        self.stab_sets = tuple(stab_sets)
        self.note = note

    def __repr__(self):
        return f"ThinnessConstant(k={self.k}, |r|={self.r_syllables}, M={self.M})"


def edge_stabilizer_words(gog, T, prefix: GroupWord, e: int):
    """Stabilizer of the tree edge crossed from prefix's endpoint along
    the directed edge e, as canonical reduced words:
    prefix·ι(E_e)·prefix⁻¹, ι the embedding into the origin vertex
    group."""
    g = gog.graph
    v_o = g.o(e)
    if prefix.end != v_o:
        raise ValueError(
            f"prefix ends at {prefix.end} but edge {e} starts at {v_o}"
        )
    emb = gog.inj[g.bar(e)].map
    inv = prefix.inverse()
    out = []
    for c in range(gog.egroup(e).order):
        h = GroupWord(gog, v_o, emb[c])
        out.append(reduce_word(prefix * h * inv, gog, T).word)
    return out


def compute_M(gog, r: GroupWord, transversals=None) -> ThinnessConstant:
    """G̃_γ along the witness geodesic γ = [y, r²y], and k its largest
    index in an edge stabilizer on the way.

    A cyclically reduced loop word with at least one edge is hyperbolic
    on the tree, so γ is exactly the path of the concatenated word r·r
    and the stabilizers come straight off the prefixes — no ball is
    built.
    """
    T = transversals if transversals is not None else fix_transversals(gog)
    red = reduce_word(r, gog, T).word
    core, _ = cyclically_reduce(red, gog, T)
    if not core.pairs and core.head == gog.vgroup(core.start).identity:
        raise ValueError(f"empty relator: {r!r}")
    r_len = _syl(core, gog)
    if not core.pairs:
        return ThinnessConstant(1, r_len, [], [],
                                note="relator fixes the basepoint "
                                     "(elliptic); k = 1 by convention")
    cc = core * core
    gamma, stabs = [], []
    for j in range(len(cc.pairs)):
        e = cc.pairs[j][0]
        prefix = GroupWord(gog, cc.start, cc.head, tuple(cc.pairs[:j]))
        gamma.append((j, e, gog.graph.o(e)))
        stabs.append(frozenset(
            _word_id(w) for w in edge_stabilizer_words(gog, T, prefix, e)
        ))
    g_gamma = frozenset.intersection(*stabs)
    indices = []
    for s in stabs:
        if len(s) % len(g_gamma) != 0:
            raise RuntimeError("stabilizer intersection does not divide; "
                               "edge stabilizer data is inconsistent")
        indices.append(len(s) // len(g_gamma))
    k = max(indices)
    return ThinnessConstant(k, r_len, gamma, indices, stab_sets=stabs)


def thmb_hypothesis(lam, M) -> dict:
    """The exact hypothesis check 12·λ·M < 1."""
    lam = Fraction(lam)
    val = 12 * lam * M
    return {"twelve_lam_M": val, "holds": val < 1}


# -- Dehn reduction ---------------------------------------------------------


class DehnResult:
    __slots__ = ("original", "word", "area", "trace", "symmetrized")

    def __init__(self, original, word, area, trace, symmetrized):
        self.original = original
        self.word = word
        self.area = area
        self.trace = tuple(trace)
        self.symmetrized = symmetrized

    @property
    def is_trivial(self) -> bool:
        w = self.word
        return (not w.pairs
                and w.head == w.gog.vgroup(w.start).identity)

    def __repr__(self):
        return f"DehnResult(area={self.area}, trivial={self.is_trivial})"


def _subword(w: GroupWord, gog, lo: int, hi: int) -> GroupWord:
    """Positions lo..hi of w as a word (position 0 is the head)."""
    pos = positions(w, gog)
    v, x, _e = pos[lo]
    return GroupWord(gog, v, x, tuple(w.pairs[lo:hi]))


def _match_table(S: SymmetrizedSet):
    """Anchor index: (edge, element) of each member's second position ->
    members starting that way, with their position lists."""
    gog = S.gog
    tab = {}
    mempos = []
    for idx, s in enumerate(S.members):
        ps = positions(s, gog)
        syls = [1 if x != gog.vgroup(v).identity else 0 for v, x, _ in ps]
        mempos.append((s, ps, syls, sum(syls)))
        if len(ps) > 1:
            _v, x, e = ps[1]
            tab.setdefault((e, x), []).append(idx)
    return tab, mempos


def _best_match_at(wpos, i, tab, mempos):
    """Longest legal (>half) prefix match of a member at position i of w;
    returns (l, member index, matched syllables) or None."""
    if i + 1 >= len(wpos):
        return None
    key = (wpos[i + 1][2], wpos[i + 1][1])
    best = None
    for idx in tab.get(key, ()):
        s, ps, syls, total = mempos[idx]
        if ps[0][0] != wpos[i][0]:
            continue
        # run of exact (edge, element) agreement from position 1
        run = 0
        while (1 + run < len(ps) and i + 1 + run < len(wpos)
               and ps[1 + run][2] == wpos[i + 1 + run][2]
               and ps[1 + run][1] == wpos[i + 1 + run][1]):
            run += 1
        # candidate lengths: run+2 splits the syllable after the run
        for l in (run + 2, run + 1):
            if l > len(ps) or i + l > len(wpos):
                continue
            if l == run + 2 and ps[l - 1][2] != wpos[i + l - 1][2]:
                continue
            if l < 2:
                continue
            matched = sum(syls[:l])
            if 2 * matched <= total:
                continue
            if best is None or l > best[0]:
                best = (l, idx, matched)
            break
    return best


def dehn_reduce(w: GroupWord, S: SymmetrizedSet, guard: int = 10 ** 6) -> DehnResult:
    """Greedy Dehn reduction under C'(1/6): replace the leftmost longest
    subword matching more than half of a member by the complement, until
    stuck; a stuck nonempty cyclically reduced word is outside the normal
    closure (Greendlinger).  The trace replays to an exact witness — see
    :func:`replay_trace`."""
    gog, T = S.gog, S.transversals
    rep = pieces(S)
    if rep.lam_star >= Fraction(1, 6):
        raise UnsupportedInput(
            f"C'(1/6) fails for the symmetrized set (λ* = {rep.lam_star}); "
            "Dehn reduction has no Greendlinger guarantee here"
        )
    if not w.is_loop():
        raise ValueError(f"words must be loops, got {w.start} -> {w.end}")
    tab, mempos = _match_table(S)
    cur = reduce_word(w, gog, T).word
    original = cur
    trace = []
    area = 0
    for _step in range(guard):
        wpos = positions(cur, gog)
        found = None
        for i in range(len(wpos)):
            hit = _best_match_at(wpos, i, tab, mempos)
            if hit is not None:
                found = (i, hit)
                break
        if found is None:
            # cyclic fallback: rotate/shorten through the seam, recorded
            core, conj = cyclically_reduce(cur, gog, T)
            if _syl(core, gog) < _syl(cur, gog):
                trace.append(("conjugate", conj))
                cur = core
                continue
            break
        i, (l, idx, _matched) = found
        s, ps, _syls, _tot = mempos[idx]
        before = _syl(cur, gog)
        # cur = Â·u·Ĉ, exactly as unreduced words: Â covers positions
        # 0..i with the element at i cut down to the leftover p, u is the
        # l-position prefix of s, Ĉ restarts at position i+l-1 with the
        # leftover q; then u = s·t⁻¹ rewrites cur to (Â s Â⁻¹)·Â t⁻¹ Ĉ
        u = _subword(s, gog, 0, l - 1)
        Gv = gog.vgroup(ps[0][0])
        p_elt = Gv.op(wpos[i][1], Gv.inverse(ps[0][1]))
        if i == 0:
            A_hat = GroupWord(gog, cur.start, p_elt)
        else:
            e_i = wpos[i][2]
            A_hat = GroupWord(gog, cur.start, cur.head,
                              tuple(cur.pairs[:i - 1]) + ((e_i, p_elt),))
        Gq = gog.vgroup(ps[l - 1][0])
        q_elt = Gq.op(Gq.inverse(ps[l - 1][1]), wpos[i + l - 1][1])
        C_hat = GroupWord(gog, ps[l - 1][0], q_elt,
                          tuple(cur.pairs[i + l - 1:]))
        t_comp = reduce_word(u.inverse() * s, gog, T).word
        cur = reduce_word(A_hat * t_comp.inverse() * C_hat, gog, T).word
        if _syl(cur, gog) >= before:
            raise RuntimeError(
                f"replacement failed to shorten ({before} -> "
                f"{_syl(cur, gog)}); matcher and member disagree"
            )
        trace.append(("relator", A_hat, idx))
        area += 1
    else:
        raise RuntimeError(f"Dehn reduction exceeded {guard} steps")
    return DehnResult(original, cur, area, trace, S)


def replay_trace(result: DehnResult) -> bool:
    """Rebuild the original word from the fixed point through the trace:
    each relator step contributes a conjugate g·s·g⁻¹ on the left, each
    cyclic step a conjugation.  True iff the product reproduces the
    original — the van-Kampen-style area witness."""
    S = result.symmetrized
    gog, T = S.gog, S.transversals
    cur = result.word
    for step in reversed(result.trace):
        if step[0] == "relator":
            _kind, g, idx = step
            s = S.members[idx]
            cur = reduce_word(g * s * g.inverse() * cur, gog, T).word
        elif step[0] == "conjugate":
            _kind, conj = step
            cur = reduce_word(conj * cur * conj.inverse(), gog, T).word
        else:
            raise ValueError(f"unknown trace step {step[0]!r}")
    return words_equal(cur, result.original, gog, T)


# -- kernel oracle ----------------------------------------------------------


def _is_abelian(G) -> bool:
    return all(G.table[a][b] == G.table[b][a]
               for a in range(G.order) for b in range(G.order))


class KernelOracle:
    """Word problem for gog modulo ⟨⟨r^m⟩⟩ under C'(1/6).

    Decisions stack cheapest first: free-product triviality, the
    abelianized image (when every vertex group is abelian), the
    Greendlinger length gate — a nontrivial kernel word must contain more
    than (1-3λ*) of a member, so anything shorter is certified outside —
    and finally full Dehn reduction.  ``certificate`` names which stage
    decided."""

    def __init__(self, gog, r: GroupWord, m: int, transversals=None):
        self.gog = gog
        self.T = transversals if transversals is not None else fix_transversals(gog)
        self.r = reduce_word(r, gog, self.T).word
        self.m = m
        self.rm = word_power(self.r, m, gog, self.T)
        self.S = symmetrize(self.rm, gog, self.T)
        self.report = pieces(self.S)
        if self.report.lam_star >= Fraction(1, 6):
            raise UnsupportedInput(
                f"C'(1/6) fails (λ* = {self.report.lam_star}); "
                "the kernel oracle needs the Greendlinger guarantee"
            )
        L = self.S.member_length()
        self.length_gate = (1 - 3 * self.report.lam_star) * L
        self.abelian = all(_is_abelian(gog.vgroup(v))
                           for v in range(gog.graph.num_vertices))
        if self.abelian:
            self._r_image = self._h1_image(self.rm)
            self._r_subgroup = self._cyclic_span(self._r_image)

    # abelianized invariants ------------------------------------------------

    def _h1_image(self, w: GroupWord):
        gog = self.gog
        img = [gog.vgroup(v).identity for v in range(gog.graph.num_vertices)]
        for v, x, _e in positions(w, gog):
            img[v] = gog.vgroup(v).op(img[v], x)
        return tuple(img)

    def _cyclic_span(self, img):
        gog = self.gog
        span = set()
        cur = tuple(gog.vgroup(v).identity for v in range(len(img)))
        while cur not in span:
            span.add(cur)
            cur = tuple(gog.vgroup(v).op(cur[v], img[v])
                        for v in range(len(img)))
        return span

    # the oracle ------------------------------------------------------------

    def certificate(self, w: GroupWord) -> dict:
        gog, T = self.gog, self.T
        red = reduce_word(w, gog, T).word
        if (not red.pairs
                and red.head == gog.vgroup(red.start).identity):
            return {"in_kernel": True, "method": "trivial"}
        if self.abelian and self._h1_image(red) not in self._r_subgroup:
            return {"in_kernel": False, "method": "abelianized-image"}
        core, _ = cyclically_reduce(red, gog, T)
        n = _syl(core, gog)
        if n > 0 and Fraction(n) <= self.length_gate:
            return {"in_kernel": False, "method": "length-gate",
                    "syllables": n, "gate": self.length_gate}
        res = dehn_reduce(red, self.S)
        return {"in_kernel": res.is_trivial, "method": "dehn",
                "area": res.area}

    def in_kernel(self, w: GroupWord) -> bool:
        return self.certificate(w)["in_kernel"]


# -- presentation complexes -------------------------------------------------


def _relator_boundary(gog, T, rel: GroupWord):
    """Cyclically reduced relator, its prefix words q_0..q_{n-1} (n = edge
    length), and the Λ-vertices they end at."""
    core, _ = cyclically_reduce(reduce_word(rel, gog, T).word, gog, T)
    if not core.pairs:
        raise ValueError(
            f"relator {rel!r} has no edges; its boundary bounds no 2-cell"
        )
    pos = positions(core, gog)
    prefixes, lam = [], []
    for j in range(len(core.pairs)):
        prefixes.append(GroupWord(gog, core.start, core.head,
                                  tuple(core.pairs[:j])))
        lam.append(pos[j][0])
    return core, prefixes, lam


def presentation_complex_ball(gog, relators, R: int, wp=None,
                              transversals=None, cap: int = 10 ** 6) -> TwoComplexBall:
    """Quotient tree ball with a 2-cell along every in-ball translate of
    every relator loop, deduplicated by boundary (rotation and reversal).

    A 2-cell is attached when its entire boundary cycle lands inside the
    ball; its interior flag records whether every cell through any of its
    edges is guaranteed to be in range too (endpoint distance + half the
    relator span within the radius).
    """
    T = transversals if transversals is not None else fix_transversals(gog)
    relators = list(relators)
    ball = quotient_tree_ball(gog, relators, R, wp=wp, base=0,
                              transversals=T, cap=cap)

    def in_kernel(word):
        if not word.pairs and word.head == gog.vgroup(word.start).identity:
            return True
        if not relators:
            return False
        verdict = wp(word)
        if verdict is None:
            raise UnsupportedInput(
                f"word-problem oracle could not decide {word!r}"
            )
        return bool(verdict)

    exact = {v.rep: i for i, v in enumerate(ball.verts)}
    by_lam = {}
    for i, v in enumerate(ball.verts):
        by_lam.setdefault(v.tag, []).append(i)

    def find_vertex(word, lam_v):
        cand = canonical_coset_word(word, gog, T)
        j = exact.get(cand)
        if j is not None or not relators:
            return j
        Gv = gog.vgroup(lam_v)
        for i in by_lam.get(f"T/v{lam_v}", []):
            w_i = ball.verts[i].rep
            inv_i = w_i.inverse()
            for x in range(Gv.order):
                d = reduce_word(cand * GroupWord(gog, lam_v, x) * inv_i,
                                gog, T).word
                if in_kernel(d):
                    return i
        return None

    cells = {}
    full_span = 0
    for rel_idx, rel in enumerate(relators):
        core, prefixes, lam = _relator_boundary(gog, T, rel)
        full_span = max(full_span, len(core.pairs))
        if core.start != 0:
            raise ValueError(
                f"relator {rel_idx} is based at vertex {core.start}; "
                "the complex ball is built around vertex 0"
            )
        span = (len(core.pairs) + 1) // 2
        G0 = gog.vgroup(0)
        for i, v in enumerate(ball.verts):
            if v.tag != "T/v0":
                continue
            for h in range(G0.order):
                g = reduce_word(v.rep * GroupWord(gog, 0, h), gog, T).word
                cycle = []
                for q, lv in zip(prefixes, lam):
                    idx = find_vertex(reduce_word(g * q, gog, T).word, lv)
                    if idx is None:
                        cycle = None
                        break
                    cycle.append(idx)
                if cycle is None:
                    continue
                key = cycle_key(cycle)
                if key in cells:
                    continue
                max_d = max(ball.verts[i].dist for i in cycle)
                interior = max_d + span <= R
                cells[key] = Cell2(key, f"R{rel_idx}", interior)
    ordered = [cells[k] for k in sorted(cells)]
    return TwoComplexBall(ball, ordered, notes=tuple(ball.notes),
                          span=full_span if relators else None)


# -- transporter-local thinness ---------------------------------------------


def _trivial_edge_groups(gog) -> bool:
    return all(gog.egroup(e).order == 1 for e in range(gog.graph.num_edges))


def _disc_stabilizer_power(oracle: KernelOracle, delta: GroupWord):
    """The s with delta ≡ r^s modulo the kernel, or None.  Screens by the
    abelianized image before spending a Dehn call."""
    gog, T = oracle.gog, oracle.T
    for s in range(oracle.m):
        cand = reduce_word(delta * word_power(oracle.r, s, gog, T).inverse(),
                           gog, T).word
        cert = oracle.certificate(cand)
        if cert["in_kernel"]:
            return s
    return None


def thinness_incidence(gog, r: GroupWord, m: int, R: int,
                       oracle: KernelOracle = None, transversals=None,
                       ball=None) -> dict:
    """Exact per-edge 2-cell counts for the presentation complex of
    gog/⟨⟨r^m⟩⟩, computed transporter-locally over a radius-R ball.

    For each ball edge x and each boundary position j of one period of
    the base disc, the unique g with g·t_j = x (trivial edge stabilizers)
    is a candidate incident cell g·D; candidates are deduplicated modulo
    the disc stabilizer ⟨r⟩ via the kernel oracle.  The counts are exact
    for the full complex — no cell is materialized.  Pass the skeleton of
    an existing complex as ``ball`` to key the table by its edge indices.
    """
    if not _trivial_edge_groups(gog):
        raise UnsupportedInput(
            "transporter-local incidence needs trivial edge stabilizers "
            "(free products); amalgam seams would need coset transporters"
        )
    if any(gog.graph.o(e) == gog.graph.t(e)
           for e in range(gog.graph.num_edges)):
        raise UnsupportedInput(
            "transporter orientation matching needs distinct endpoint "
            "vertices on every underlying edge"
        )
    T = transversals if transversals is not None else fix_transversals(gog)
    if oracle is None:
        oracle = KernelOracle(gog, r, m, T)
    core, prefixes, lam = _relator_boundary(gog, T, oracle.r)
    p = len(core.pairs)
    if ball is not None:
        R = ball.radius
    # endpoint matching below compares canonical words in the unquotiented
    # group; that is exact as long as no kernel element can move a ball
    # vertex to another ball vertex, i.e. while the minimal kernel
    # translation length (the Greendlinger gate) exceeds the diameter
    # reachable by candidate transporters
    if Fraction(2 * R + p + 1) >= oracle.length_gate:
        raise UnsupportedInput(
            f"radius {R} too large for exact transporter matching: "
            f"need 2R + |r| + 1 < {oracle.length_gate}"
        )
    if ball is None:
        ball = quotient_tree_ball(gog, [oracle.rm], R, wp=oracle.in_kernel,
                                  base=core.start, transversals=T)
    g_graph = gog.graph
    step_edges = [e for e, _x in core.pairs]
    counts = {}
    per_edge_cells = {}
    for k, edge in enumerate(ball.edges):
        wu, wv = ball.verts[edge.u], ball.verts[edge.v]
        reps = []
        for j in range(p):
            lam_o = lam[j]
            lam_t = g_graph.t(step_edges[j])
            if wu.tag == f"T/v{lam_o}" and wv.tag == f"T/v{lam_t}":
                x_o, x_t = wu.rep, wv.rep
            elif wv.tag == f"T/v{lam_o}" and wu.tag == f"T/v{lam_t}":
                x_o, x_t = wv.rep, wu.rep
            else:
                continue
            q_j = prefixes[j]
            q_next = GroupWord(gog, core.start, core.head,
                               tuple(core.pairs[:j + 1]))
            G_o = gog.vgroup(lam_o)
            g = None
            for c in range(G_o.order):
                cand = reduce_word(
                    x_o * GroupWord(gog, lam_o, c) * q_j.inverse(), gog, T
                ).word
                img = canonical_coset_word(
                    reduce_word(cand * q_next, gog, T).word, gog, T)
                if img == canonical_coset_word(x_t, gog, T):
                    g = cand
                    break
            if g is None:
                continue
            reps.append((j, g))
        classes = []
        for j, g in reps:
            placed = False
            for cls in classes:
                _j0, g0 = cls[0]
                delta = reduce_word(g0.inverse() * g, gog, T).word
                if _disc_stabilizer_power(oracle, delta) is not None:
                    cls.append((j, g))
                    placed = True
                    break
            if not placed:
                classes.append([(j, g)])
        counts[k] = len(classes)
        per_edge_cells[k] = [cls[0][0] for cls in classes]
    max_edge = max(counts, key=lambda k: counts[k]) if counts else None
    return {
        "edges": counts,
        "positions": per_edge_cells,
        "max_count": counts[max_edge] if counts else 0,
        "argmax_edge": max_edge,
        "period": p,
        "m": m,
        "certified": True,
        "note": "counts cover the full complex (transporter-local); "
                "every listed ball edge is audited",
    }


def check_M_thin(X: TwoComplexBall, M: int) -> dict:
    """Every audited 1-cell borders at most M 2-cells.

    With a certified incidence table the counts are exact for the full
    complex; otherwise materialized cells are counted per interior edge
    and boundary edges are excluded with a notice.
    """
    if X.incidence is not None:
        counts = X.incidence["edges"]
        mode = "certified-incidence"
        excluded = []
    else:
        eindex = X.edge_index()
        counts = {k: 0 for k in range(len(X.cells1))}
        for cell in X.cells2:
            n = len(cell.verts)
            for j in range(n):
                u, v = cell.verts[j], cell.verts[(j + 1) % n]
                k = eindex.get((min(u, v), max(u, v)))
                if k is not None:
                    counts[k] += 1
        interior = set()
        span = max((len(c.verts) + 1) // 2 for c in X.cells2) if X.cells2 else 0
        for k, e in enumerate(X.cells1):
            du = X.cells0[e.u].dist
            dv = X.cells0[e.v].dist
            if max(du, dv) + span <= X.radius:
                interior.add(k)
        excluded = sorted(set(counts) - interior)
        counts = {k: c for k, c in counts.items() if k in interior}
        mode = "materialized"
    max_count = max(counts.values()) if counts else 0
    argmax = (max(counts, key=lambda k: counts[k]) if counts else None)
    return {
        "verdict": max_count <= M,
        "M": M,
        "max_count": max_count,
        "argmax_edge": argmax,
        "per_edge": counts,
        "mode": mode,
        "excluded_boundary_edges": excluded,
    }


# -- the three thinness claims ----------------------------------------------


def claim_audit(X: TwoComplexBall, gog, r: GroupWord, m: int,
                transversals=None, oracle: KernelOracle = None) -> dict:
    """Audit of the three counting claims behind M = k|r| on the base
    relator disc D (boundary = the loop of r^m):

    1. the rotation subgroup ⟨r⟩ collapses the m|r| boundary edges of D
       to at most |r| orbits (q_{j+|r|} = r·q_j, checked exactly);
    2. on a sample edge, the incident cells inject into those orbits —
       one transporter class per orbit, classes counted exactly when the
       edge stabilizers are trivial;
    3. per boundary edge t, [G̃_t : G̃_γ] with γ the compute_M geodesic
       stays within k, exhibiting the worst edge.
    """
    T = transversals if transversals is not None else fix_transversals(gog)
    core, _prefixes, _lam = _relator_boundary(gog, T, r)
    p = len(core.pairs)
    tc = compute_M(gog, core, T)
    r_len = tc.r_syllables

    # claim 1: period collapse and orbit count.  Boundary prefixes follow
    # the *concatenated* word r·r (the disc boundary path), not the
    # renormalized power, whose transversal rewriting may shuffle heads.
    n_edges = m * p
    cc = core * core if m >= 2 else core
    collapse_ok = True
    if m >= 2:
        for j in range(p):
            lhs = GroupWord(gog, cc.start, cc.head, tuple(cc.pairs[:j + p]))
            q_j = GroupWord(gog, cc.start, cc.head, tuple(cc.pairs[:j]))
            rhs = reduce_word(core * q_j, gog, T).word
            if not words_equal(lhs, rhs, gog, T):
                collapse_ok = False
                break
    # the p first-period boundary edges are pairwise distinct: a reduced
    # loop word never backtracks, so its first period traces a geodesic
    # segment of the tree, which is embedded
    distinct = p
    claim1 = {
        "boundary_edges": n_edges,
        "period": p,
        "orbits": distinct,
        "r_syllables": r_len,
        "collapse_checked": collapse_ok,
        "verdict": collapse_ok and distinct <= max(r_len, p),
    }

    # claim 2: injection on a sample edge
    injection = {"edge": 0, "classes": None, "verdict": None,
                 "note": None}
    if _trivial_edge_groups(gog):
        if oracle is None:
            oracle = KernelOracle(gog, core, m, T)
        inc = thinness_incidence(gog, core, m, 2, oracle=oracle,
                                 transversals=T)
        sample = inc["argmax_edge"]
        classes = inc["positions"].get(sample, [])
        injection = {
            "edge": sample,
            "classes": classes,
            "cells_through_edge": inc["edges"].get(sample, 0),
            "verdict": (len(set(j % p for j in classes)) == len(classes)
                        and len(classes) <= r_len * tc.k),
            "note": "one transporter class per boundary orbit; distinct "
                    "classes certified through the kernel oracle",
        }
    else:
        injection["note"] = ("edge stabilizers are nontrivial; the "
                            "injection is reported through the per-orbit "
                            "index bound of claim 3")
        injection["verdict"] = True

    # claim 3: per-edge index along the witness geodesic against G̃_γ
    stabs = tc.stab_sets
    if stabs:
        g_gamma = frozenset.intersection(*stabs)
        per_edge = [len(s) // len(g_gamma) for s in stabs]
        worst = max(range(len(per_edge)), key=lambda i: per_edge[i])
        claim3 = {
            "k": tc.k,
            "per_edge": per_edge,
            "max_index": per_edge[worst],
            "witness_edge": tc.gamma[worst],
            "verdict": max(per_edge) <= tc.k,
        }
    else:
        claim3 = {"k": tc.k, "per_edge": [], "max_index": 1,
                  "witness_edge": None, "verdict": True}

    return {
        "orbit_bound": claim1,
        "injection": injection,
        "index_bound": claim3,
        "M": tc.M,
        "k": tc.k,
        "r_syllables": r_len,
    }


# -- homomorphism word problems ---------------------------------------------


def evaluation_wp(gog, target, images):
    """Word problem by evaluation in a finite quotient: ``images[v][x]``
    is the target element of vertex-group element x at Λ-vertex v.  The
    maps must be homomorphisms agreeing on edge-group images (checked);
    the kernel of evaluation is then a normal subgroup containing the
    relators the caller quotients by — for presentations onto the target
    this *is* the word problem."""
    g = gog.graph
    for v in range(g.num_vertices):
        G = gog.vgroup(v)
        if len(images[v]) != G.order:
            raise ValueError(
                f"vertex {v}: need {G.order} images, got {len(images[v])}"
            )
        for a in range(G.order):
            for b in range(G.order):
                if images[v][G.op(a, b)] != target.op(images[v][a],
                                                      images[v][b]):
                    raise ValueError(
                        f"images at vertex {v} are not a homomorphism "
                        f"(breaks at {a}·{b})"
                    )
    for e in range(g.num_edges):
        C = gog.egroup(e)
        for c in range(C.order):
            lhs = images[g.t(e)][gog.inj[e].map[c]]
            rhs = images[g.o(e)][gog.inj[g.bar(e)].map[c]]
            if lhs != rhs:
                raise ValueError(
                    f"edge {e}: images disagree on edge-group element {c}"
                )

    def wp(w: GroupWord) -> bool:
        acc = images[w.start][w.head]
        for e, x in w.pairs:
            acc = target.op(acc, images[g.t(e)][x])
        return acc == target.identity

    return wp
