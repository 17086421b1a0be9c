"""Experiment: gap between the M4 LP optimum and a 1e-3-mesh grid min."""
import numpy as np
import longrun as lr


def cell(x, a, y, b):
    # objective contribution of one (x, y) cell: ||x a - y b||_1
    return np.abs(x[None, None, :] * a[:, None, None] - y[None, None, :] * b[None, :, None]).sum(axis=2)


def grid_min(u, v, mesh=1e-3):
    U = u.points_matrix(); V = v.points_matrix()
    uw, vw = u.weights, v.weights

    def ax(hi):
        n = int(round(hi / mesh))
        g = np.arange(n + 1) * mesh
        if g[-1] < hi - 1e-15:
            g = np.append(g, hi)
        else:
            g[-1] = hi
        return g

    if len(u) == 1 and len(v) == 1:
        return np.abs(U[0] - V[0]).sum()
    if len(u) == 2 and len(v) == 1:
        b1 = ax(vw[0])  # == [0,1]
        f = cell(U[0], np.array([uw[0]]), V[0], b1)[0] + cell(U[1], np.array([uw[1]]), V[0], vw[0] - b1)[0]
        return f.min()
    if len(u) == 1 and len(v) == 2:
        a1 = ax(uw[0])
        f = cell(U[0], a1, V[0], np.array([vw[0]]))[:, 0] + cell(U[0], uw[0] - a1, V[1], np.array([vw[1]]))[:, 0]
        return f.min()
    a1 = ax(uw[0]); a2 = ax(uw[1]); b1 = ax(vw[0]); b2 = ax(vw[1])
    F11 = cell(U[0], a1, V[0], b1)
    F12 = cell(U[0], uw[0] - a1, V[1], b2)
    F21 = cell(U[1], a2, V[0], vw[0] - b1)
    F22 = cell(U[1], uw[1] - a2, V[1], vw[1] - b2)
    best = np.inf
    chunk = 16
    for s in range(0, b1.size, chunk):
        e = min(s + chunk, b1.size)
        m1 = (F11[:, s:e, None] + F12[:, None, :]).min(axis=0)  # (chunk, Nb2)
        m2 = (F21[:, s:e, None] + F22[:, None, :]).min(axis=0)
        best = min(best, (m1 + m2).min())
    return best


def make_pair(rng, style):
    def point():
        c = rng.uniform(0, 1, size=2)
        if style == "lattice":
            c = np.round(c / c.sum(), 3)
            if c.sum() <= 0:
                c = np.array([0.5, 0.5])
            c[1] = 1 - c[0]
        elif style == "coarse":
            c = np.round(c / c.sum() * 8) / 8
            c[1] = 1 - c[0]
        else:
            c = c / c.sum()
        return lr.SimplexPoint(c)

    def weights(n):
        w = rng.uniform(0.1, 1, size=n)
        if style == "lattice":
            w = np.round(w / w.sum(), 3)
            w[-1] = 1 - w[:-1].sum()
        elif style == "coarse":
            w = np.maximum(np.round(w / w.sum() * 8) / 8, 0.125)
            w[-1] = 1 - w[:-1].sum()
        else:
            w = w / w.sum()
        return w

    nu, nv = rng.integers(1, 3), rng.integers(1, 3)
    u = lr.BeliefDist([point() for _ in range(nu)], weights(nu))
    v = lr.BeliefDist([point() for _ in range(nv)], weights(nv))
    return u, v


def _sweep():
  for style in ("uniform", "lattice", "coarse"):
    gaps = []
    rng = np.random.default_rng(20240511)
    for trial in range(20):
        u, v = make_pair(rng, style)
        d, _ = lr.dstar_distance(u, v)
        g = grid_min(u, v)
        gaps.append(g - d)
    gaps = np.array(gaps)
    print(f"{style:8s}: max gap {gaps.max():.3e}  min gap {gaps.min():.3e}  n>(1e-6): {(np.abs(gaps) > 1e-6).sum()}")
