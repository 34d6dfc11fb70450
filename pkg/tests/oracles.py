"""Reference computations that share no code with the package's algorithms.

Frames are built from the four elementary DH motions multiplied one by one.
Dynamics come from the Lagrangian: the mass matrix is assembled from per-link
COM Jacobians, Coriolis terms from Christoffel symbols of finite-differenced
mass matrices, gravity from finite differences of the potential energy.
"""

import numpy as np


def rot_z(t):
    c, s = np.cos(t), np.sin(t)
    return np.array([[c, -s, 0, 0], [s, c, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1.0]])


def rot_x(t):
    c, s = np.cos(t), np.sin(t)
    return np.array([[1, 0, 0, 0], [0, c, -s, 0], [0, s, c, 0], [0, 0, 0, 1.0]])


def trans(x, y, z):
    T = np.eye(4)
    T[:3, 3] = (x, y, z)
    return T


def elementary_dh(theta, a, d, alpha):
    return rot_z(theta) @ trans(0, 0, d) @ trans(a, 0, 0) @ rot_x(alpha)


class LagrangianOracle:
    """Rigid serial chain described by plain tuples.

    ``rows``: (theta_offset, a, d, alpha, revolute) per joint.
    ``links``: (mass, com_in_frame, inertia_3x3) per link.
    ``point_masses``: extra (link_index, point_in_frame, mass) entries.
    """

    def __init__(self, rows, links, base=np.eye(4), gravity=(0, 0, -9.81), point_masses=()):
        self.rows = rows
        self.links = [(m, np.asarray(c, float), np.asarray(I, float)) for m, c, I in links]
        self.base = np.asarray(base, float)
        self.g = np.asarray(gravity, float)
        self.point_masses = list(point_masses)
        self.n = len(rows)

    @classmethod
    def from_model(cls, model, point_masses=()):
        rows = [(r.theta_offset, r.a, r.d, r.alpha, r.revolute) for r in model.chain.rows]
        links = [(l.mass, l.com, l.inertia) for l in model.links]
        return cls(rows, links, model.chain.base_pose.matrix, model.gravity, point_masses)

    def frames(self, q):
        T = self.base.copy()
        out = [T]
        for (off, a, d, alpha, rev), qi in zip(self.rows, q):
            if rev:
                T = T @ elementary_dh(off + qi, a, d, alpha)
            else:
                T = T @ elementary_dh(off, a, d + qi, alpha)
            out.append(T)
        return out

    def _bodies(self):
        for i, (m, c, I) in enumerate(self.links):
            yield i, m, c, I
        for i, p, m in self.point_masses:
            yield i, m, np.asarray(p, float), np.zeros((3, 3))

    def _point_jacobians(self, F, i, p_world):
        Jv = np.zeros((3, self.n))
        Jw = np.zeros((3, self.n))
        for j in range(i + 1):
            z = F[j][:3, 2]
            if self.rows[j][4]:
                Jv[:, j] = np.cross(z, p_world - F[j][:3, 3])
                Jw[:, j] = z
            else:
                Jv[:, j] = z
        return Jv, Jw

    def mass_matrix(self, q):
        F = self.frames(q)
        M = np.zeros((self.n, self.n))
        for i, m, c, I in self._bodies():
            R = F[i + 1][:3, :3]
            p = F[i + 1][:3, 3] + R @ c
            Jv, Jw = self._point_jacobians(F, i, p)
            M += m * Jv.T @ Jv + Jw.T @ (R @ I @ R.T) @ Jw
        return M

    def potential(self, q):
        F = self.frames(q)
        V = 0.0
        for i, m, c, _ in self._bodies():
            p = F[i + 1][:3, 3] + F[i + 1][:3, :3] @ c
            V -= m * self.g @ p
        return V

    def kinetic(self, q, qd):
        return 0.5 * qd @ self.mass_matrix(q) @ qd

    def torques(self, q, qd, qdd, h=1e-5):
        q, qd, qdd = (np.asarray(v, float) for v in (q, qd, qdd))
        n = self.n
        dM = np.zeros((n, n, n))  # dM[k] = dM/dq_k
        G = np.zeros(n)
        for k in range(n):
            e = np.zeros(n)
            e[k] = h
            dM[k] = (self.mass_matrix(q + e) - self.mass_matrix(q - e)) / (2 * h)
            G[k] = (self.potential(q + e) - self.potential(q - e)) / (2 * h)
        C = np.zeros(n)
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    gamma = 0.5 * (dM[k][i, j] + dM[j][i, k] - dM[i][j, k])
                    C[i] += gamma * qd[j] * qd[k]
        return self.mass_matrix(q) @ qdd + C + G


def fd_jacobian(frames_fn, q, h=1e-6):
    """Central-difference twist Jacobian of the last frame.

    Angular columns come from the skew part of dR/dq R^T.
    """
    q = np.asarray(q, float)
    n = q.size
    J = np.zeros((6, n))
    for k in range(n):
        e = np.zeros(n)
        e[k] = h
        Tp = frames_fn(q + e)[-1]
        Tm = frames_fn(q - e)[-1]
        J[:3, k] = (Tp[:3, 3] - Tm[:3, 3]) / (2 * h)
        dR = (Tp[:3, :3] - Tm[:3, :3]) / (2 * h)
        W = dR @ frames_fn(q)[-1][:3, :3].T
        J[3:, k] = (W[2, 1], W[0, 2], W[1, 0])
    return J


def planar_ik(l1, l2, x, y, elbow=1):
    """Law-of-cosines inverse kinematics of a planar 2R arm."""
    c2 = (x * x + y * y - l1 * l1 - l2 * l2) / (2 * l1 * l2)
    q2 = elbow * np.arccos(c2)
    q1 = np.arctan2(y, x) - np.arctan2(l2 * np.sin(q2), l1 + l2 * np.cos(q2))
    return q1, q2
