"""Fast-multipole acceleration of the outgoing Yukawa sums.

A binary adaptive tree over the spheres feeds the classical pipeline:
per-sphere outgoing expansions are shifted to leaf nodes and up the
tree, converted to incoming expansions across well-separated node
pairs, pushed down, and evaluated at the quadrature points; close pairs
are summed directly.  Every pass has an exact transpose, so the
accelerated operators keep the adjoint identity to rounding.

Translations are assembled as rotate / shift-along-z / rotate-back
products; spatial gradients reuse the differentiated z-shift at zero
separation with equal source and target scales.
"""

from math import factorial

import numpy as np

from . import _fmmkernels, _opkernels
from .errors import ConfigurationError, DomainError, SingularInputError
from .harmonics import basis_size
from ._kernels import harmonic_norms

_FACT_CACHE = {}


def _fact_table(pmax):
    n = 2 * pmax + 2
    if n not in _FACT_CACHE:
        _FACT_CACHE[n] = np.array([float(factorial(k)) for k in range(n + 1)])
    return _FACT_CACHE[n]


# ---------------------------------------------------------------------------
# public translation operators (dense matrices acting on coefficients)
# ---------------------------------------------------------------------------


def translation_operator(kind, shift, r_source, r_target, kappa, pmax):
    """Dense translation operator for ``shift`` = source - target center."""
    shift = np.asarray(shift, dtype=np.float64)
    nb = basis_size(pmax)
    out = np.empty((nb, nb))
    kind_id = {"m2m": _fmmkernels.M2M, "m2l": _fmmkernels.M2L,
               "l2l": _fmmkernels.L2L}[kind]
    if kind == "m2l":
        rho = np.linalg.norm(shift)
        if rho <= r_source + r_target:
            raise DomainError(
                "multipole-to-local conversion requires well-separated "
                f"centers (got separation {rho:.3g} for radii "
                f"{r_source:.3g} + {r_target:.3g})")
    _fmmkernels.pair_operator(kind_id, shift[0], shift[1], shift[2],
                              r_source, r_target, kappa, pmax,
                              _fact_table(pmax), out)
    return out


def m2m(shift, r_source, r_target, kappa, pmax, coeffs):
    """Re-center an outgoing expansion (valid at large distance)."""
    return translation_operator("m2m", shift, r_source, r_target,
                                kappa, pmax) @ coeffs


def m2l(shift, r_source, r_target, kappa, pmax, coeffs):
    """Convert an outgoing expansion into an incoming one."""
    return translation_operator("m2l", shift, r_source, r_target,
                                kappa, pmax) @ coeffs


def l2l(shift, r_source, r_target, kappa, pmax, coeffs):
    """Re-center an incoming expansion (valid inside the target ball)."""
    return translation_operator("l2l", shift, r_source, r_target,
                                kappa, pmax) @ coeffs


# proper rotations taking e_x (resp. e_y) onto e_z
_EX_ROT = np.array([[0.0, 0.0, -1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]])
_EY_ROT = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]])


def grad_translations_at_zero(kind, r_scale, kappa, pmax):
    """The three directional derivatives of a null translation.

    Returns (gx, gy, gz): d/dh of the translation operator for a shift
    h*e_alpha at equal source/target scales, evaluated at h = 0.  Only
    degrees differing by one couple.
    """
    from .rotations import rotation_blocks
    nb = basis_size(pmax)
    gz = np.empty((nb, nb))
    kind_id = {"m2m": _fmmkernels.M2M, "l2l": _fmmkernels.L2L}[kind]
    _fmmkernels.grad_z_operator(kind_id, r_scale, kappa, pmax,
                                _fact_table(pmax), gz)
    out = []
    for rot in (_EX_ROT, _EY_ROT):
        d = rotation_blocks(rot, pmax)
        out.append(d.T @ gz @ d)
    out.append(gz)
    return out[0], out[1], out[2]


# ---------------------------------------------------------------------------
# tree
# ---------------------------------------------------------------------------


class _Node:
    __slots__ = ("lo", "hi", "center", "radius", "src_radius", "children",
                 "parent", "far", "near")

    def __init__(self, lo, hi):
        self.lo = lo
        self.hi = hi
        self.center = None
        self.radius = 0.0       # bounds member balls (valid evaluation zone)
        self.src_radius = 0.0   # bounds member centers (outgoing singularities)
        self.children = ()
        self.parent = -1
        self.far = []
        self.near = []


class FmmTree:
    """Binary adaptive hierarchy of sphere clusters.

    Spheres are permuted so every node owns a contiguous index range;
    node balls bound the member spheres including their radii.
    """

    def __init__(self, centers, radii, leaf_size=8, mac=2.0):
        m = centers.shape[0]
        self.leaf_size = leaf_size
        self.mac = mac
        self.perm = np.arange(m)
        self.nodes = []
        self._build(centers, radii, 0, m)
        self.centers = centers
        self.radii = radii
        self._set_geometry(centers, radii)
        self._interactions()

    def _build(self, centers, radii, lo, hi, parent=-1):
        idx = len(self.nodes)
        node = _Node(lo, hi)
        node.parent = parent
        self.nodes.append(node)
        if hi - lo > self.leaf_size:
            sub = self.perm[lo:hi]
            pts = centers[sub]
            extent = pts.max(axis=0) - pts.min(axis=0)
            axis = int(np.argmax(extent))
            order = np.argsort(pts[:, axis], kind="stable")
            self.perm[lo:hi] = sub[order]
            mid = lo + (hi - lo) // 2
            a = self._build(centers, radii, lo, mid, idx)
            b = self._build(centers, radii, mid, hi, idx)
            node.children = (a, b)
        return idx

    def _set_geometry(self, centers, radii):
        for node in reversed(self.nodes):
            sub = self.perm[node.lo:node.hi]
            c = centers[sub].mean(axis=0)
            dist = np.linalg.norm(centers[sub] - c, axis=1)
            node.center = c
            node.radius = float(np.max(dist + radii[sub]))
            node.src_radius = float(np.max(dist))

    def _admissible(self, a, b):
        na, nb_ = self.nodes[a], self.nodes[b]
        dist = np.linalg.norm(na.center - nb_.center)
        return dist >= self.mac * (na.radius + nb_.radius)

    def _interactions(self):
        stack = [(0, 0)]
        while stack:
            a, b = stack.pop()
            na, nb_ = self.nodes[a], self.nodes[b]
            if self._admissible(a, b):
                na.far.append(b)
                continue
            a_leaf = not na.children
            b_leaf = not nb_.children
            if a_leaf and b_leaf:
                na.near.append(b)
                continue
            # split the bigger cluster (target a receives, source b emits)
            if b_leaf or (not a_leaf and na.radius >= nb_.radius):
                for c in na.children:
                    stack.append((c, b))
            else:
                for c in nb_.children:
                    stack.append((a, c))

    @property
    def leaves(self):
        return [i for i, n in enumerate(self.nodes) if not n.children]

    def depth(self):
        d = {0: 0}
        best = 0
        for i, n in enumerate(self.nodes):
            if i:
                d[i] = d[n.parent] + 1
                best = max(best, d[i])
        return best


def build_tree(solute, leaf_size=8, mac=2.0):
    """Adaptive binary tree over the solute's spheres."""
    return FmmTree(solute.centers, solute.radii, leaf_size, mac)


# ---------------------------------------------------------------------------
# the far-field engine plugged into OperatorContext
# ---------------------------------------------------------------------------


class FarField:
    """Linear-scaling backend for the outgoing-sum entry points.

    Parameters
    ----------
    pmax : expansion order of the tree passes (>= the context lmax;
        defaults to lmax when bound)
    leaf_size, mac : tree granularity and the well-separatedness factor
    """

    def __init__(self, pmax=None, leaf_size=8, mac=2.0,
                 m2l_cache_budget=4e8):
        if pmax is not None and pmax < 1:
            raise ConfigurationError("pmax must be >= 1")
        self.pmax = pmax
        self.leaf_size = leaf_size
        self.mac = mac
        self.m2l_cache_budget = m2l_cache_budget
        self.ctx = None

    # -- setup ---------------------------------------------------------

    def bind(self, ctx):
        if self.pmax is None:
            self.pmax = ctx.lmax
        self.ctx = ctx
        pmax = self.pmax
        self.nbp = basis_size(pmax)
        self.norms_p = harmonic_norms(pmax)
        self.fact = _fact_table(pmax)
        kappa = ctx.kappa
        tree = FmmTree(ctx.centers, ctx.radii, self.leaf_size, self.mac)
        self.tree = tree
        nodes = tree.nodes
        nn = len(nodes)

        def op(kind, shift, rs, rt):
            out = np.empty((self.nbp, self.nbp))
            _fmmkernels.pair_operator(kind, shift[0], shift[1], shift[2],
                                      rs, rt, kappa, pmax, self.fact, out)
            return out

        # per-sphere shifts into the owning leaf
        m = ctx.n_spheres
        self.sphere_leaf = np.empty(m, dtype=np.int64)
        self.p2m_ops = np.empty((m, self.nbp, self.nbp))
        for li in tree.leaves:
            node = nodes[li]
            for s in tree.perm[node.lo:node.hi]:
                self.sphere_leaf[s] = li
                shift = ctx.centers[s] - node.center
                self.p2m_ops[s] = op(_fmmkernels.M2M, shift,
                                     ctx.radii[s], node.radius)
        # child -> parent shifts and parent -> child shifts
        self.up_ops = {}
        self.down_ops = {}
        for i, node in enumerate(nodes):
            for c in node.children:
                child = nodes[c]
                self.up_ops[c] = op(_fmmkernels.M2M, child.center - node.center,
                                    child.radius, node.radius)
                self.down_ops[c] = op(_fmmkernels.L2L, node.center - child.center,
                                      node.radius, child.radius)
        # far-pair conversions; cached as dense operators while they
        # fit the memory budget, rebuilt on the fly otherwise
        pair_t = []
        pair_s = []
        for t, node in enumerate(nodes):
            for s in node.far:
                pair_t.append(t)
                pair_s.append(s)
        self.pair_t = np.asarray(pair_t, dtype=np.int64)
        self.pair_s = np.asarray(pair_s, dtype=np.int64)
        self.node_centers = np.array([n.center for n in nodes])
        self.node_radii = np.array([n.radius for n in nodes])
        self.m2l_ops = None
        if len(pair_t) * self.nbp * self.nbp * 8 <= self.m2l_cache_budget:
            self.m2l_ops = [
                (t, s, op(_fmmkernels.M2L,
                          nodes[s].center - nodes[t].center,
                          nodes[s].radius, nodes[t].radius))
                for t, s in zip(pair_t, pair_s)]
        # near lists in CSR form over leaves
        leaves = tree.leaves
        self.leaf_ids = leaves
        tgt_ptr = [0]
        tgt_pts = []
        src_ptr = [0]
        src_idx = []
        nleb = ctx.n_leb
        for li in leaves:
            node = nodes[li]
            for s in tree.perm[node.lo:node.hi]:
                tgt_pts.extend(range(s * nleb, (s + 1) * nleb))
            tgt_ptr.append(len(tgt_pts))
            for nb_id in node.near:
                near = nodes[nb_id]
                src_idx.extend(tree.perm[near.lo:near.hi])
            src_ptr.append(len(src_idx))
        self.near_tgt_ptr = np.asarray(tgt_ptr, dtype=np.int64)
        self.near_tgt_pts = np.asarray(tgt_pts, dtype=np.int64)
        self.near_src_ptr = np.asarray(src_ptr, dtype=np.int64)
        self.near_src_idx = np.asarray(src_idx, dtype=np.int64)
        self.leaf_centers = np.array([nodes[li].center for li in leaves])
        self.leaf_scales = np.array([nodes[li].radius for li in leaves])
        self.topo = self._topological()
        self._leaf_grad_ops = None
        self._sphere_grad_ops = None

    def _topological(self):
        depth = [0] * len(self.tree.nodes)
        for i, n in enumerate(self.tree.nodes):
            if i:
                depth[i] = depth[n.parent] + 1
        return sorted(range(len(self.tree.nodes)), key=lambda i: depth[i])

    # -- shared passes --------------------------------------------------

    def _pad(self, coeffs):
        """Zero-pad (or truncate, for pmax < lmax) into the tree order."""
        m, nb = coeffs.shape
        if nb == self.nbp:
            return coeffs
        out = np.zeros((m, self.nbp))
        k = min(nb, self.nbp)
        out[:, :k] = coeffs[:, :k]
        return out

    def _upward(self, coeffs):
        nodes = self.tree.nodes
        multipoles = np.zeros((len(nodes), self.nbp))
        padded = self._pad(np.asarray(coeffs))
        per_sphere = np.einsum("jab,jb->ja", self.p2m_ops, padded)
        for li in self.leaf_ids:
            node = nodes[li]
            sub = self.tree.perm[node.lo:node.hi]
            multipoles[li] = per_sphere[sub].sum(axis=0)
        for i in reversed(self.topo):
            if i in self.up_ops:
                multipoles[self.tree.nodes[i].parent] += \
                    self.up_ops[i] @ multipoles[i]
        return multipoles

    def _horizontal(self, multipoles):
        locals_ = np.zeros_like(multipoles)
        if self.m2l_ops is not None:
            for t, s, mat in self.m2l_ops:
                locals_[t] += mat @ multipoles[s]
        elif self.pair_t.size:
            _fmmkernels.m2l_sweep(self.pair_t, self.pair_s,
                                  self.node_centers, self.node_radii,
                                  self.ctx.kappa, self.pmax, self.fact,
                                  multipoles, locals_)
        return locals_

    def _horizontal_transpose(self, locals_adj):
        multi_adj = np.zeros_like(locals_adj)
        if self.m2l_ops is not None:
            for t, s, mat in self.m2l_ops:
                multi_adj[s] += mat.T @ locals_adj[t]
        elif self.pair_t.size:
            _fmmkernels.m2l_sweep_transpose(self.pair_t, self.pair_s,
                                            self.node_centers,
                                            self.node_radii, self.ctx.kappa,
                                            self.pmax, self.fact,
                                            locals_adj, multi_adj)
        return multi_adj

    def _downward(self, locals_):
        for i in self.topo:
            if i in self.down_ops:
                locals_[i] += self.down_ops[i] @ locals_[self.tree.nodes[i].parent]
        return locals_

    def _leaf_locals(self, coeffs):
        return self._downward(self._horizontal(self._upward(coeffs)))

    # -- entry points ----------------------------------------------------

    def eval(self, coeffs):
        ctx = self.ctx
        phi = np.zeros(ctx.pointsf.shape[0])
        locals_ = self._leaf_locals(coeffs)
        leaf_coeffs = np.ascontiguousarray(locals_[self.leaf_ids])
        _fmmkernels.regular_eval(self.pmax, ctx.kappa, ctx.pointsf,
                                 ctx.eval_mask, self.near_tgt_ptr,
                                 self.near_tgt_pts, self.leaf_centers,
                                 self.leaf_scales, leaf_coeffs,
                                 self.norms_p, phi)
        dmin = _opkernels.yukawa_eval(
            ctx.lmax, ctx.kappa, ctx.pointsf, ctx.eval_mask,
            self.near_tgt_ptr, self.near_tgt_pts, self.near_src_ptr,
            self.near_src_idx, ctx.centers, ctx.radii, ctx.khat_r,
            np.ascontiguousarray(coeffs), ctx.norms, phi)
        if dmin < 1e-10:
            raise SingularInputError(
                "a quadrature point coincides with a sphere center")
        return phi

    def accumulate(self, weights):
        ctx = self.ctx
        nodes = self.tree.nodes
        nn = len(nodes)
        leaf_in = np.zeros((len(self.leaf_ids), self.nbp))
        _fmmkernels.regular_accum(self.pmax, ctx.kappa, ctx.pointsf,
                                  ctx.eval_mask, self.near_tgt_ptr,
                                  self.near_tgt_pts, self.leaf_centers,
                                  self.leaf_scales, weights, self.norms_p,
                                  leaf_in)
        locals_adj = np.zeros((nn, self.nbp))
        locals_adj[self.leaf_ids] = leaf_in
        # transpose of the downward pass (runs bottom-up)
        for i in reversed(self.topo):
            if i in self.down_ops:
                locals_adj[nodes[i].parent] += \
                    self.down_ops[i].T @ locals_adj[i]
        multi_adj = self._horizontal_transpose(locals_adj)
        # transpose of the upward pass (runs top-down)
        for i in self.topo:
            if i in self.up_ops:
                multi_adj[i] += self.up_ops[i].T @ multi_adj[nodes[i].parent]
        acc_far = np.zeros((ctx.n_spheres, self.nbp))
        for li in self.leaf_ids:
            node = nodes[li]
            sub = self.tree.perm[node.lo:node.hi]
            acc_far[sub] = np.einsum("jab,a->jb", self.p2m_ops[sub],
                                     multi_adj[li])
        acc = np.zeros((ctx.n_spheres, ctx.nb))
        k = min(ctx.nb, self.nbp)
        acc[:, :k] = acc_far[:, :k]
        _opkernels.yukawa_accum(ctx.lmax, ctx.kappa, ctx.pointsf,
                                ctx.eval_mask, self.near_tgt_ptr,
                                self.near_tgt_pts, self.near_src_ptr,
                                self.near_src_idx, ctx.centers, ctx.radii,
                                ctx.khat_r, weights, ctx.norms, acc)
        return acc

    # -- gradient variants ------------------------------------------------

    def _leaf_grads(self):
        if self._leaf_grad_ops is None:
            ops = {}
            for li, scale in zip(self.leaf_ids, self.leaf_scales):
                ops[li] = grad_translations_at_zero(
                    "l2l", scale, self.ctx.kappa, self.pmax)
            self._leaf_grad_ops = ops
        return self._leaf_grad_ops

    def _sphere_grads(self):
        if self._sphere_grad_ops is None:
            cache = {}
            ops = []
            for r in self.ctx.radii:
                key = round(float(r), 12)
                if key not in cache:
                    cache[key] = grad_translations_at_zero(
                        "m2m", float(r), self.ctx.kappa, self.pmax)
                ops.append(cache[key])
            self._sphere_grad_ops = ops
        return self._sphere_grad_ops

    def eval_with_gradient(self, coeffs):
        ctx = self.ctx
        npts = ctx.pointsf.shape[0]
        phi = np.zeros(npts)
        gphi = np.zeros((npts, 3))
        locals_ = self._leaf_locals(coeffs)
        leaf_coeffs = np.ascontiguousarray(locals_[self.leaf_ids])
        _fmmkernels.regular_eval(self.pmax, ctx.kappa, ctx.pointsf,
                                 ctx.eval_mask, self.near_tgt_ptr,
                                 self.near_tgt_pts, self.leaf_centers,
                                 self.leaf_scales, leaf_coeffs,
                                 self.norms_p, phi)
        grads = self._leaf_grads()
        for axis in range(3):
            shifted = np.empty_like(leaf_coeffs)
            for row, li in enumerate(self.leaf_ids):
                # gradient field carries the negated derivative operator
                shifted[row] = -(grads[li][axis] @ leaf_coeffs[row])
            comp = np.zeros(npts)
            _fmmkernels.regular_eval(self.pmax, ctx.kappa, ctx.pointsf,
                                     ctx.eval_mask, self.near_tgt_ptr,
                                     self.near_tgt_pts, self.leaf_centers,
                                     self.leaf_scales, shifted,
                                     self.norms_p, comp)
            gphi[:, axis] = comp
        _opkernels.yukawa_eval_grad(ctx.lmax, ctx.kappa, ctx.pointsf,
                                    ctx.eval_mask, self.near_tgt_ptr,
                                    self.near_tgt_pts, self.near_src_ptr,
                                    self.near_src_idx, ctx.centers, ctx.radii,
                                    ctx.khat_r, np.ascontiguousarray(coeffs),
                                    ctx.norms, phi, gphi)
        return phi, gphi

    def accumulate_with_gradient(self, weights):
        ctx = self.ctx
        nodes = self.tree.nodes
        nn = len(nodes)
        leaf_in = np.zeros((len(self.leaf_ids), self.nbp))
        _fmmkernels.regular_accum(self.pmax, ctx.kappa, ctx.pointsf,
                                  ctx.eval_mask, self.near_tgt_ptr,
                                  self.near_tgt_pts, self.leaf_centers,
                                  self.leaf_scales, weights, self.norms_p,
                                  leaf_in)
        locals_adj = np.zeros((nn, self.nbp))
        locals_adj[self.leaf_ids] = leaf_in
        for i in reversed(self.topo):
            if i in self.down_ops:
                locals_adj[nodes[i].parent] += \
                    self.down_ops[i].T @ locals_adj[i]
        multi_adj = self._horizontal_transpose(locals_adj)
        for i in self.topo:
            if i in self.up_ops:
                multi_adj[i] += self.up_ops[i].T @ multi_adj[nodes[i].parent]
        acc_far = np.zeros((ctx.n_spheres, self.nbp))
        for li in self.leaf_ids:
            node = nodes[li]
            sub = self.tree.perm[node.lo:node.hi]
            acc_far[sub] = np.einsum("jab,a->jb", self.p2m_ops[sub],
                                     multi_adj[li])
        k = min(ctx.nb, self.nbp)
        acc = np.zeros((ctx.n_spheres, ctx.nb))
        acc[:, :k] = acc_far[:, :k]
        gacc = np.zeros((ctx.n_spheres, ctx.nb, 3))
        sphere_grads = self._sphere_grads()
        for j in range(ctx.n_spheres):
            for axis in range(3):
                gacc[j, :k, axis] = (sphere_grads[j][axis].T
                                     @ acc_far[j])[:k]
        _opkernels.yukawa_accum_grad(ctx.lmax, ctx.kappa, ctx.pointsf,
                                     ctx.eval_mask, self.near_tgt_ptr,
                                     self.near_tgt_pts, self.near_src_ptr,
                                     self.near_src_idx, ctx.centers,
                                     ctx.radii, ctx.khat_r, weights,
                                     ctx.norms, acc, gacc)
        return acc, gacc
