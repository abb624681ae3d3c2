"""Combinatorial and geometric machinery of the Fuchsian group: generators,
fundamental domain, cusps, word decompositions, coset and double-coset
enumeration.

Groups are described by a symmetric generating set, the sides of a polygonal
fundamental domain with their pairing generators, and one entry of cusp data
per inequivalent cusp.  The built-in ``gamma2`` is the principal congruence
group of level 2; ``punctured_torus`` is a rank-2 free group of hyperbolic
generators whose commutator stabilizes the single cusp (the natural test bed
for twists that are non-unitary away from the cusps).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import backend
from .hyperbolic import (
    EQ_TOL,
    BoundaryPoint,
    GroupElement,
    PointH,
    frobenius_mu,
    hyperbolic_distance,
    moebius_apply,
    moebius_boundary,
    point_pair_invariant,
)

ROW_TOL = 1e-8          # lower-row entries are discrete; this separates 0 from not-0
KEY_SCALE = 1e6


# ----------------------------------------------------------------------
# words
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class Word:
    """Reduced word in the symmetric generators, as a tuple of indices."""

    letters: tuple = ()

    def __len__(self):
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)


def free_reduce(letters, invmap):
    out = []
    for l in letters:
        if out and invmap[out[-1]] == l:
            out.pop()
        else:
            out.append(int(l))
    return tuple(out)


def make_word(group: "GroupData", letters) -> Word:
    letters = tuple(int(l) for l in letters)
    for l in letters:
        if not 0 <= l < len(group.generators):
            raise ValueError(f"invalid generator index {l}")
    for x, y in zip(letters, letters[1:]):
        if group.invmap[x] == y:
            raise ValueError(f"word not reduced at letters ({x}, {y})")
    return Word(letters)


def word_evaluate(group: "GroupData", w: Word) -> GroupElement:
    """Ordered product of the generators named by the word."""
    g = GroupElement.identity()
    for l in w:
        if not 0 <= l < len(group.generators):
            raise ValueError(f"invalid generator index {l}")
        g = g * group.generators[l]
    return g


def word_inverse(group: "GroupData", w: Word) -> Word:
    return Word(tuple(group.invmap[l] for l in reversed(tuple(w))))


def word_concat(group: "GroupData", *words) -> Word:
    letters = []
    for w in words:
        letters.extend(tuple(w))
    return Word(free_reduce(letters, group.invmap))


def word_power(group: "GroupData", w: Word, p: int) -> Word:
    if p == 0:
        return Word()
    base = w if p > 0 else word_inverse(group, w)
    return word_concat(group, *([base] * abs(p)))


# ----------------------------------------------------------------------
# fundamental-domain sides
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class Side:
    """One geodesic side of the fundamental polygon.

    kind 'vline': the vertical Re z = x0; kind 'circle': |z - center| = radius
    with the center real.  ``orient`` fixes the inside so that value() <= 0 on
    the domain; it is derived from the basepoint, never supplied by hand.
    ``pairing`` is the generator index carrying this side onto its partner.
    """

    kind: str
    x0: float = 0.0
    center: float = 0.0
    radius: float = 0.0
    orient: float = 1.0
    pairing: int = -1

    def value(self, x: float, y: float) -> float:
        if self.kind == "vline":
            return self.orient * (x - self.x0)
        dx = x - self.center
        return self.orient * (self.radius * self.radius - (dx * dx + y * y))

    def on_geodesic(self, x: float, y: float, tol: float = 1e-7) -> bool:
        return abs(self.value(x, y)) <= tol


def _orient_side(kind, x0, center, radius, z0: PointH) -> float:
    if kind == "vline":
        return 1.0 if z0.x <= x0 else -1.0
    dx = z0.x - center
    inside_disc = dx * dx + z0.y * z0.y < radius * radius
    return -1.0 if inside_disc else 1.0


# ----------------------------------------------------------------------
# cusp and group data
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class CuspData:
    representative: BoundaryPoint
    sigma: GroupElement
    stabilizer_generator: GroupElement
    stabilizer_word: Word

    @property
    def sigma_inv(self) -> GroupElement:
        return self.sigma.inverse()


class GroupData:
    """Immutable description of the group: generators, domain, cusps."""

    def __init__(self, name, generators, invmap, sides, z0, z1, cusps,
                 class_ball_length=6, validate=True):
        self.name = name
        self.generators = [g if isinstance(g, GroupElement) else GroupElement(*g)
                           for g in generators]
        self.invmap = tuple(int(i) for i in invmap)
        self.sides = tuple(sides)
        self.z0 = z0
        self.z1 = z1
        self.cusps = tuple(cusps)
        self.gen_mats = np.array([g.entries() for g in self.generators], dtype=float)
        if validate:
            self._validate()
        self.gen_parabolic = tuple(g.is_parabolic() for g in self.generators)
        self.class_of_gen, self.parabolic_classes = self._parabolic_classes(class_ball_length)

    # -- validation ----------------------------------------------------

    def _validate(self):
        l = len(self.generators)
        if sorted(self.invmap) != list(range(l)):
            raise ValueError("invmap is not a permutation")
        for i, j in enumerate(self.invmap):
            if not (self.generators[i] * self.generators[j]).is_identity(1e-9):
                raise ValueError(f"generator {j} is not inverse to {i}")
        for s in self.sides:
            if not 0 <= s.pairing < l:
                raise ValueError("side pairing index out of range")
        if not self.contains(self.z0, tol=-1e-9):
            raise ValueError("z0 is not interior to the fundamental domain")
        if not self.contains(self.z1, tol=1e-12):
            raise ValueError("z1 is not in the fundamental domain")
        if hyperbolic_distance(self.z0, self.z1) < 1e-6:
            raise ValueError("z1 must differ from z0")
        self._validate_side_pairings()
        for k, cusp in enumerate(self.cusps):
            img = moebius_boundary(cusp.sigma, BoundaryPoint.infinity())
            if not img.close_to(cusp.representative, 1e-9):
                raise ValueError(f"cusp {k}: sigma does not map infinity to it")
            conj = cusp.sigma_inv * cusp.stabilizer_generator * cusp.sigma
            if not conj.close_to(GroupElement(1.0, 1.0, 0.0, 1.0), 1e-9):
                raise ValueError(f"cusp {k}: sigma^-1 gamma sigma != unit translation")
            ev = word_evaluate(self, cusp.stabilizer_word)
            if not ev.close_to(cusp.stabilizer_generator, 1e-9):
                raise ValueError(f"cusp {k}: stabilizer word does not evaluate")

    def _validate_side_pairings(self):
        for idx, s in enumerate(self.sides):
            g = self.generators[s.pairing]
            for x, y in _side_samples(s):
                w = moebius_apply(g, PointH(x, y))
                if not any(t.on_geodesic(w.x, w.y) for t in self.sides):
                    raise ValueError(
                        f"side {idx}: pairing generator does not map it onto a side")

    def _parabolic_classes(self, L):
        para = [i for i, p in enumerate(self.gen_parabolic) if p]
        class_of = [-1] * len(self.generators)
        classes = []
        if not para:
            return tuple(class_of), ()
        fixed = {i: _parabolic_fixed_point(self.generators[i]) for i in para}
        ball = [g for _, g in enumerate_ball(self, L)]
        for i in para:
            if class_of[i] >= 0:
                continue
            cid = len(classes)
            members = [i]
            class_of[i] = cid
            orbit_i = _boundary_orbit(ball, fixed[i])
            for j in para:
                if class_of[j] >= 0 or j == i:
                    continue
                if any(fixed[j].close_to(q, 1e-6) for q in orbit_i):
                    class_of[j] = cid
                    members.append(j)
            classes.append(tuple(members))
        return tuple(class_of), tuple(classes)

    # -- geometry ------------------------------------------------------

    def contains(self, z: PointH, tol: float = 1e-9) -> bool:
        return all(s.value(z.x, z.y) <= tol for s in self.sides)

    def side_values(self, z: PointH):
        return [s.value(z.x, z.y) for s in self.sides]


def _side_samples(s: Side):
    if s.kind == "vline":
        return [(s.x0, 0.6), (s.x0, 1.3), (s.x0, 2.9)]
    return [(s.center + s.radius * math.cos(t), s.radius * math.sin(t))
            for t in (0.45, 1.1, 2.2)]


def _parabolic_fixed_point(g: GroupElement) -> BoundaryPoint:
    if abs(g.c) < ROW_TOL:
        return BoundaryPoint.infinity()
    return BoundaryPoint((g.a - g.d) / (2.0 * g.c))


def _boundary_orbit(ball, p: BoundaryPoint):
    return [moebius_boundary(g, p) for g in ball]


# ----------------------------------------------------------------------
# built-in groups and config loading
# ----------------------------------------------------------------------

def builtin_group(name: str) -> GroupData:
    """Return a built-in group dataset; names: gamma2, punctured_torus."""
    r2 = math.sqrt(2.0)
    if name == "gamma2":
        S = GroupElement(1, 2, 0, 1)
        T = GroupElement(1, 0, 2, 1)
        z0 = PointH(0.0, 1.0)
        sides = [
            Side("vline", x0=-1.0, orient=_orient_side("vline", -1.0, 0, 0, z0), pairing=0),
            Side("vline", x0=1.0, orient=_orient_side("vline", 1.0, 0, 0, z0), pairing=1),
            Side("circle", center=-0.5, radius=0.5,
                 orient=_orient_side("circle", 0, -0.5, 0.5, z0), pairing=2),
            Side("circle", center=0.5, radius=0.5,
                 orient=_orient_side("circle", 0, 0.5, 0.5, z0), pairing=3),
        ]
        cusps = [
            CuspData(BoundaryPoint.infinity(),
                     GroupElement(r2, 0.0, 0.0, 1.0 / r2), S, Word((0,))),
            CuspData(BoundaryPoint(0.0),
                     GroupElement(0.0, -1.0 / r2, r2, 0.0), T.inverse(), Word((3,))),
            CuspData(BoundaryPoint(1.0),
                     GroupElement(r2, 0.0, r2, 1.0 / r2), T * S.inverse(), Word((2, 1))),
        ]
        return GroupData("gamma2",
                         [S, S.inverse(), T, T.inverse()], [1, 0, 3, 2],
                         sides, z0, PointH(0.137, 0.921), cusps)
    if name == "punctured_torus":
        A = GroupElement(2, 1, 1, 1)
        B = GroupElement(2, -1, -1, 1)
        z0 = PointH(0.0, 1.0)
        r6 = math.sqrt(6.0)
        sides = [
            Side("vline", x0=-1.0, orient=_orient_side("vline", -1.0, 0, 0, z0), pairing=3),
            Side("vline", x0=1.0, orient=_orient_side("vline", 1.0, 0, 0, z0), pairing=1),
            Side("circle", center=-0.5, radius=0.5,
                 orient=_orient_side("circle", 0, -0.5, 0.5, z0), pairing=0),
            Side("circle", center=0.5, radius=0.5,
                 orient=_orient_side("circle", 0, 0.5, 0.5, z0), pairing=2),
        ]
        comm = A * B * A.inverse() * B.inverse()
        cusps = [
            CuspData(BoundaryPoint.infinity(),
                     GroupElement(r6, 0.0, 0.0, 1.0 / r6), comm, Word((0, 2, 1, 3))),
        ]
        return GroupData("punctured_torus",
                         [A, A.inverse(), B, B.inverse()], [1, 0, 3, 2],
                         sides, z0, PointH(0.179, 1.143), cusps)
    raise ValueError(f"unknown builtin group {name!r}")


def group_from_config(cfg: dict) -> GroupData:
    """Build a group from a config block (builtin name or explicit data)."""
    if "builtin" in cfg:
        return builtin_group(cfg["builtin"])
    gens = [GroupElement(*row) for row in cfg["generators"]]
    invmap = cfg["invmap"]
    z0 = PointH(*cfg["z0"])
    z1 = PointH(*cfg["z1"])
    sides = []
    for s in cfg["sides"]:
        if s["kind"] == "vline":
            sides.append(Side("vline", x0=float(s["x"]),
                              orient=_orient_side("vline", float(s["x"]), 0, 0, z0),
                              pairing=int(s["pairing"])))
        elif s["kind"] == "circle":
            sides.append(Side("circle", center=float(s["center"]), radius=float(s["radius"]),
                              orient=_orient_side("circle", 0, float(s["center"]),
                                                  float(s["radius"]), z0),
                              pairing=int(s["pairing"])))
        else:
            raise ValueError(f"unknown side kind {s['kind']!r}")
    cusps = []
    for c in cfg["cusps"]:
        rep = (BoundaryPoint.infinity() if c["representative"] == "inf"
               else BoundaryPoint(float(c["representative"])))
        sigma = GroupElement(*c["sigma"])
        word = Word(tuple(int(l) for l in c["stabilizer_word"]))
        stab = GroupElement.identity()
        for l in word:
            stab = stab * gens[l]
        cusps.append(CuspData(rep, sigma, stab, word))
    return GroupData(cfg.get("name", "custom"), gens, invmap, sides, z0, z1, cusps)


# ----------------------------------------------------------------------
# ball enumeration
# ----------------------------------------------------------------------

def _scan(group: GroupData, L, mu_max, left=None, right=None):
    """Backend word scan of tau = left * gamma * right over reduced words.

    Returns the raw node arrays (mats, parent, letter, depth); node matrices
    are the tau products, not sign-canonicalized.
    """
    if left is None and right is None:
        gens = group.gen_mats
        seed = np.array([1.0, 0.0, 0.0, 1.0])
    else:
        left = GroupElement.identity() if left is None else left
        right = GroupElement.identity() if right is None else right
        rinv = right.inverse()
        gens = np.array([(rinv * g * right).entries() for g in group.generators])
        seed = np.array((left * right).entries())
    return backend.word_scan(gens, np.array(group.invmap, dtype=np.int64),
                             seed, int(L), float(mu_max))


def _word_of_node(parent, letter, idx) -> tuple:
    out = []
    while idx > 0:
        out.append(int(letter[idx]))
        idx = int(parent[idx])
    return tuple(reversed(out))


def enumerate_ball(group: GroupData, L: int, mu_max: float = np.inf):
    """All reduced words of length <= L with their elements, deduplicated.

    For free groups (every built-in) deduplication is a no-op, but collisions
    are still removed by canonical matrix key as a safeguard for
    config-supplied groups with relations.
    """
    mats, parent, letter, depth = _scan(group, L, mu_max)
    seen = {}
    out = []
    for i in range(len(mats)):
        g = GroupElement(*mats[i])
        k = g.key()
        if k in seen:
            continue
        seen[k] = i
        out.append((Word(_word_of_node(parent, letter, i)), g))
    return out


def ball_mu_bound(group: GroupData, L: int) -> float:
    """Crude upper bound for mu over the length-L ball (used as scan budget)."""
    top = max(frobenius_mu(g) for g in group.generators)
    return 2.0 * (top ** L) * 4.0


# ----------------------------------------------------------------------
# domain reduction and the invariant height
# ----------------------------------------------------------------------

def reduce_to_domain(group: GroupData, z: PointH, max_iter: int = 10 ** 6):
    """Greedy descent toward the Dirichlet domain of z0.

    Repeatedly applies the inverse of whichever generator image of z0 is
    nearest until z0 itself is nearest; the visited word is returned with
    eval(word) * z_input = z_output.
    """
    gen_z0 = [moebius_apply(g, group.z0) for g in group.generators]
    letters = []
    cur = z
    for _ in range(max_iter):
        d0 = point_pair_invariant(cur, group.z0)
        best, best_d = -1, d0 - 1e-14
        for j, gz in enumerate(gen_z0):
            dj = point_pair_invariant(cur, gz)
            if dj < best_d:
                best, best_d = j, dj
        if best < 0:
            w = Word(free_reduce(reversed(letters), group.invmap))
            return cur, w
        cur = moebius_apply(group.generators[group.invmap[best]], cur)
        letters.append(group.invmap[best])
    raise RuntimeError("reduce_to_domain did not terminate; malformed group data")


def invariant_height(group: GroupData, z: PointH, L: int) -> float:
    """max over cusps a and the length-<=L ball of Im(sigma_a^-1 gamma z)."""
    if L < 1:
        raise ValueError("invariant_height requires L >= 1")
    mats, _, _, _ = _scan(group, L, np.inf)
    best = 0.0
    for cusp in group.cusps:
        si = cusp.sigma_inv
        m = si.c * mats[:, 0] + si.d * mats[:, 2]
        n = si.c * mats[:, 1] + si.d * mats[:, 3]
        den = (m * z.x + n) ** 2 + (m * z.y) ** 2
        best = max(best, float(np.max(z.y / den)))
    return best


# ----------------------------------------------------------------------
# normal presentation (geodesic tracing)
# ----------------------------------------------------------------------

class VertexHit(Exception):
    """Geodesic passes within tolerance of a vertex of the tessellation."""


def _geodesic(p: complex, q: complex):
    """Parametrize the geodesic from p to q as z(t), t in [0,1]."""
    if abs(p.real - q.real) < 1e-12:
        x = p.real
        ly0, ly1 = math.log(p.imag), math.log(q.imag)

        def path(t):
            return complex(x, math.exp((1.0 - t) * ly0 + t * ly1))
    else:
        c = (abs(q) ** 2 - abs(p) ** 2) / (2.0 * (q.real - p.real))
        th0 = math.atan2(p.imag, p.real - c)
        th1 = math.atan2(q.imag, q.real - c)
        r = abs(p - complex(c, 0.0))

        def path(t):
            th = (1.0 - t) * th0 + t * th1
            return complex(c + r * math.cos(th), r * math.sin(th))
    return path


def _first_exit(group: GroupData, q: complex, vertex_tol=1e-9):
    """First side of F crossed by the geodesic z0 -> q; q must lie outside F.

    Each side geodesic is crossed at most once, so the crossing parameter per
    side is found by bisection on the side constraint.
    """
    p = complex(group.z0.x, group.z0.y)
    path = _geodesic(p, q)
    hits = []
    for i, s in enumerate(group.sides):
        v0 = s.value(p.real, p.imag)
        v1 = s.value(q.real, q.imag)
        if v1 <= 0.0 or v0 >= 0.0:
            continue
        lo, hi = 0.0, 1.0
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            zm = path(mid)
            if s.value(zm.real, zm.imag) > 0.0:
                hi = mid
            else:
                lo = mid
        hits.append((0.5 * (lo + hi), i))
    if not hits:
        raise VertexHit("no exit side found (target on the boundary?)")
    hits.sort()
    if len(hits) > 1 and hits[1][0] - hits[0][0] < vertex_tol:
        raise VertexHit("geodesic passes through a vertex")
    return hits[0][1]


def _trace_normal(group: GroupData, gamma: GroupElement, z1: PointH,
                  max_steps: int = 10 ** 6):
    """Trace the tessellation from F toward gamma z1, collecting letters.

    Returns (letters, zetas) where zetas[j] is the center eta_1..eta_j z0.
    """
    target = moebius_apply(gamma, z1)
    ginv = GroupElement.identity()   # inverse of the running product
    letters = []
    zetas = []
    for _ in range(max_steps):
        q = moebius_apply(ginv, target)
        qc = complex(q.x, q.y)
        if group.contains(q, tol=1e-10):
            return letters, zetas
        side = group.sides[_first_exit(group, qc)]
        eta = group.invmap[side.pairing]   # crossing side s enters pairing(s)^-1 F
        letters.append(eta)
        ginv = group.generators[group.invmap[eta]] * ginv
        zetas.append(moebius_apply(ginv.inverse(), group.z0))
    raise RuntimeError("normal presentation trace did not terminate")


def normal_presentation(group: GroupData, gamma: GroupElement,
                        seed: int = 1234) -> Word:
    """Canonical word for gamma from the geodesic tracing construction.

    If the geodesic meets a vertex within tolerance, z1 is perturbed by a
    deterministic seeded offset of magnitude ~1e-6 and the trace restarts.
    """
    w, _ = normal_presentation_traced(group, gamma, seed=seed)
    return w


def normal_presentation_traced(group: GroupData, gamma: GroupElement,
                               seed: int = 1234):
    rng = np.random.default_rng(seed)
    z1 = group.z1
    for attempt in range(12):
        try:
            letters, zetas = _trace_normal(group, gamma, z1)
            break
        except VertexHit:
            off = rng.normal(size=2) * 1e-6
            z1 = PointH(group.z1.x + off[0], max(group.z1.y + off[1], 1e-8))
    else:
        raise RuntimeError("normal presentation kept hitting vertices")
    word = Word(free_reduce(letters, group.invmap))
    if not word_evaluate(group, word).close_to(gamma, 1e-8):
        raise RuntimeError("normal presentation does not evaluate back to gamma; "
                           "inconsistent group data")
    return word, zetas


# ----------------------------------------------------------------------
# tranches
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class Tranches:
    blocks: tuple      # of Word
    classes: tuple     # parabolic class id per block, or None


def tranche_decompose(group: GroupData, w: Word) -> Tranches:
    """Split a word into maximal runs within one parabolic conjugacy class."""
    blocks, classes = [], []
    cur, cur_class = [], None
    for l in w:
        cls = group.class_of_gen[l] if group.gen_parabolic[l] else None
        if cur and cls is not None and cls == cur_class:
            cur.append(l)
            continue
        if cur:
            blocks.append(Word(tuple(cur)))
            classes.append(cur_class)
        cur, cur_class = [l], cls
    if cur:
        blocks.append(Word(tuple(cur)))
        classes.append(cur_class)
    return Tranches(tuple(blocks), tuple(classes))


def tranche_bound_check(group: GroupData, L: int, seed: int = 1234):
    """Sup of (number of tranches)/(log mu + 1) over the ball, with the
    per-step distance-decrease checks along every traced presentation.

    Returns (sup_ratio, table, violations): table rows are per word length
    (length, count, max ratio); violations collect failures of the strict
    single-step decrease (non-parabolic letters) and the two-step decrease
    (consecutive letters not parabolic of one class).
    """
    sup_ratio = 0.0
    per_len = {}
    violations = {"single": [], "double": []}
    for w, g in enumerate_ball(group, L):
        if g.is_identity():
            continue
        word, zetas = normal_presentation_traced(group, g, seed=seed)
        k = len(tranche_decompose(group, word).blocks)
        ratio = k / (math.log(frobenius_mu(g)) + 1.0)
        sup_ratio = max(sup_ratio, ratio)
        n = len(word)
        cnt, mx = per_len.get(n, (0, 0.0))
        per_len[n] = (cnt + 1, max(mx, ratio))
        target = moebius_apply(g, group.z1)
        dists = [hyperbolic_distance(group.z0, target)]
        dists += [hyperbolic_distance(z, target) for z in zetas]
        letters = tuple(word)
        for j, l in enumerate(letters):
            if not group.gen_parabolic[l]:
                if not dists[j + 1] < dists[j] + 1e-12:
                    violations["single"].append((word, j))
        for j in range(len(letters) - 1):
            a, b = letters[j], letters[j + 1]
            same_parabolic = (group.gen_parabolic[a] and group.gen_parabolic[b]
                              and group.class_of_gen[a] == group.class_of_gen[b])
            if not same_parabolic:
                if not dists[j + 2] < dists[j] + 1e-12:
                    violations["double"].append((word, j))
    table = [(n,) + per_len[n] for n in sorted(per_len)]
    return sup_ratio, table, violations


# ----------------------------------------------------------------------
# cosets and double cosets
# ----------------------------------------------------------------------

def _canonical_row(m, n):
    if m < -ROW_TOL or (abs(m) <= ROW_TOL and n < 0.0):
        return -m, -n, -1.0
    return m, n, 1.0


def _row_key(m, n):
    return (round(m * KEY_SCALE), round(n * KEY_SCALE))


@dataclass
class CosetSet:
    """Representatives of Gamma_a \\ Gamma seen through sigma_a^-1 (.) right.

    taus[i] holds sigma_a^-1 gamma_i right as an (a,b,c,d) row with canonical
    lower-row sign; words[i] is the word of gamma_i; lengths[i] the minimal
    word length met in the coset.  ``right`` is sigma_a for the spec-normal
    coordinates or sigma_b when evaluating at another cusp.
    """

    cusp: int
    taus: np.ndarray
    words: list
    lengths: np.ndarray
    L: int
    mu_max: float


def coset_scan(group: GroupData, cusp: int, L: int, mu_max: float,
               right: GroupElement | None = None) -> CosetSet:
    cdata = group.cusps[cusp]
    right = cdata.sigma if right is None else right
    mats, parent, letter, depth = _scan(group, L, mu_max,
                                        left=cdata.sigma_inv, right=right)
    seen = {}
    order = []
    for i in range(len(mats)):
        m, n, sgn = _canonical_row(mats[i, 2], mats[i, 3])
        k = _row_key(m, n)
        if k not in seen:
            seen[k] = i
            order.append(i)
    taus = np.empty((len(order), 4))
    words = []
    lengths = np.empty(len(order), dtype=np.int32)
    for j, i in enumerate(order):
        row = mats[i]
        _, _, sgn = _canonical_row(row[2], row[3])
        taus[j] = sgn * row
        words.append(Word(_word_of_node(parent, letter, i)))
        lengths[j] = depth[i]
    return CosetSet(cusp, taus, words, lengths, L, mu_max)


def coset_representatives(group: GroupData, cusp: int, L: int,
                          mu_max: float | None = None):
    """One (Word, GroupElement) pair per coset met by the length-<=L ball.

    In sigma_a-conjugated coordinates the representative is shifted by powers
    of the stabilizer so that the upper-left entry alpha lies in [0, |m|)
    (alpha in [0,1) on the identity coset).
    """
    if mu_max is None:
        mu_max = ball_mu_bound(group, L)
    cs = coset_scan(group, cusp, L, mu_max)
    cdata = group.cusps[cusp]
    out = []
    for j in range(len(cs.taus)):
        alpha, beta, m, n = cs.taus[j]
        if abs(m) > ROW_TOL:
            p = -math.floor(alpha / abs(m))     # 0 <= alpha < |m|
        else:
            p = -math.floor(beta / abs(n))      # translation part into [0, 1)
        word = word_concat(group, word_power(group, cdata.stabilizer_word, p),
                           cs.words[j])
        out.append((word, word_evaluate(group, word)))
    return out


@dataclass(frozen=True)
class DoubleCosetEntry:
    c: float
    d: float
    omega: GroupElement     # element of sigma_a^-1 Gamma sigma_b with row (c, d)
    word: Word              # word of sigma_a omega sigma_b^-1 in Gamma


@dataclass
class DoubleCosetData:
    cusp_a: int
    cusp_b: int
    delta: bool
    entries: tuple
    c_max: float
    saturated: bool
    L: int
    mu_max: float

    def moduli(self):
        out = []
        for e in self.entries:
            if not out or abs(e.c - out[-1]) > 1e-9:
                out.append(e.c)
        return out

    def at_modulus(self, c, tol=1e-9):
        return [e for e in self.entries if abs(e.c - c) <= tol]


def double_cosets(group: GroupData, cusp_a: int, cusp_b: int, L: int,
                  c_max: float, mu_max: float | None = None) -> DoubleCosetData:
    """Double-coset classes (c, d mod c) of sigma_a^-1 Gamma sigma_b.

    Saturation is empirical: the scan is re-run with L+2 and a 4x norm budget
    and the data is taken from the bigger scan; the flag records whether the
    smaller scan already produced the same class list below c_max.
    """
    if c_max <= 0:
        raise ValueError("c_max must be positive")
    if mu_max is None:
        mu_max = 48.0 * (c_max * c_max + 40.0)
    small = _double_coset_keys(group, cusp_a, cusp_b, L, mu_max, c_max)
    big = _double_coset_scan(group, cusp_a, cusp_b, L + 2, 4.0 * mu_max, c_max)
    saturated = set(small) == set(k for k, _ in big)
    entries = tuple(e for _, e in sorted(big, key=lambda t: (t[0][0], t[0][1])))
    return DoubleCosetData(cusp_a, cusp_b, cusp_a == cusp_b, entries,
                           c_max, saturated, L + 2, 4.0 * mu_max)


def _double_coset_scan(group, cusp_a, cusp_b, L, mu_max, c_max):
    ca, cb = group.cusps[cusp_a], group.cusps[cusp_b]
    mats, parent, letter, depth = _scan(group, L, mu_max,
                                        left=ca.sigma_inv, right=cb.sigma)
    best = {}
    for i in range(len(mats)):
        c0, d0, sgn = _canonical_row(mats[i, 2], mats[i, 3])
        if c0 <= ROW_TOL:
            if cusp_a != cusp_b:
                raise RuntimeError("c = 0 element across inequivalent cusps")
            continue
        if c0 > c_max + 1e-9:
            continue
        q = math.floor(d0 / c0)
        d_mod = d0 - q * c0
        if c0 - d_mod < 1e-9:
            d_mod = 0.0
            q += 1
        k = (round(c0 * KEY_SCALE), round(d_mod * KEY_SCALE))
        if k in best and best[k][0] <= depth[i]:
            continue
        best[k] = (depth[i], i, sgn, q)
    out = []
    for k, (dep, i, sgn, q) in best.items():
        tau = sgn * mats[i]
        # right-normalize d into [0, c): omega = tau * n(-q)
        a, b, c0, d0 = tau
        a2, b2, d2 = a, b - q * a, d0 - q * c0
        # left-normalize a' into [0, c): omega = n(p) * omega
        p = -math.floor(a2 / c0)
        omega = GroupElement(a2 + p * c0, b2 + p * d2, c0, d2)
        word = word_concat(group,
                           word_power(group, group.cusps[cusp_a].stabilizer_word, p),
                           Word(_word_of_node(parent, letter, i)),
                           word_power(group, group.cusps[cusp_b].stabilizer_word, -q))
        out.append(((omega.c, omega.d), DoubleCosetEntry(omega.c, omega.d, omega, word)))
    return out


def _double_coset_keys(group, cusp_a, cusp_b, L, mu_max, c_max):
    return [k for k, _ in _double_coset_scan(group, cusp_a, cusp_b, L, mu_max, c_max)]
