"""Matrix-group arithmetic, decompositions, and function-extension machinery.

Elements of the rotation, diagonal, unipotent, special-linear, general-linear
and affine groups are carried as plain ndarrays inside a tagged
:class:`GroupElement`.  All operations are pure; nothing here mutates its
arguments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation, DomainError

ORDERINGS = ("KNA", "KAN", "NAK", "ANK")

ROTATION = "rotation"
POSITIVE_DIAGONAL = "positive_diagonal"
UNIPOTENT = "unipotent"
SPECIAL_LINEAR = "special_linear"
GL_PLUS = "general_linear_plus"
GL_MINUS = "general_linear_minus"
AFFINE = "affine"

TAGS = (ROTATION, POSITIVE_DIAGONAL, UNIPOTENT, SPECIAL_LINEAR, GL_PLUS,
        GL_MINUS, AFFINE)

_ATOL = 1e-12


@dataclass(frozen=True)
class GroupElement:
    """Tagged element of one of the supported matrix groups.

    ``translation`` is present only for the affine tag, in which case the
    element represents the pair ``(translation, matrix)`` with product law
    ``(a, g)(b, h) = (a + g b, g h)``.
    """

    tag: str
    matrix: np.ndarray
    translation: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def __post_init__(self):
        object.__setattr__(self, "matrix", np.asarray(self.matrix, dtype=float))
        if self.translation is not None:
            object.__setattr__(self, "translation",
                               np.asarray(self.translation, dtype=float))


def _check_square(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ContractViolation(f"expected a square matrix, got shape {m.shape}")
    return m


def rotation(m) -> GroupElement:
    m = _check_square(m)
    if not np.allclose(m.T @ m, np.eye(m.shape[0]), atol=_ATOL):
        raise ContractViolation("matrix is not orthogonal to 1e-12")
    if abs(np.linalg.det(m) - 1.0) > 1e-10:
        raise ContractViolation("rotation must have determinant +1")
    return GroupElement(ROTATION, m)


def positive_diagonal(d, unit_det: bool = False) -> GroupElement:
    d = np.asarray(d, dtype=float)
    if d.ndim == 2:
        if np.any(d[~np.eye(d.shape[0], dtype=bool)] != 0.0):
            raise ContractViolation("off-diagonal entries must be exactly zero")
        d = np.diag(d)
    if np.any(d <= 0.0):
        raise DomainError("diagonal entries must be positive")
    if unit_det and abs(np.prod(d) - 1.0) > _ATOL:
        raise ContractViolation("SL-embedded diagonal must have unit product")
    return GroupElement(POSITIVE_DIAGONAL, np.diag(d))


def unipotent(m) -> GroupElement:
    m = _check_square(m)
    if np.any(np.diag(m) != 1.0) or np.any(np.tril(m, -1) != 0.0):
        raise ContractViolation("unipotent matrix must be unit upper triangular")
    return GroupElement(UNIPOTENT, m)


def special_linear(m) -> GroupElement:
    m = _check_square(m)
    if abs(np.linalg.det(m) - 1.0) > _ATOL:
        raise ContractViolation("special linear matrix must have det 1 to 1e-12")
    return GroupElement(SPECIAL_LINEAR, m)


def general_linear(m) -> GroupElement:
    """Classify an invertible matrix into the GL+ or GL- component."""
    m = _check_square(m)
    det = np.linalg.det(m)
    if det == 0.0 or not np.isfinite(det):
        raise DomainError("matrix is singular")
    return GroupElement(GL_PLUS if det > 0 else GL_MINUS, m)


def affine(translation, m) -> GroupElement:
    m = _check_square(m)
    translation = np.asarray(translation, dtype=float)
    if translation.shape != (m.shape[0],):
        raise ContractViolation("translation length must match matrix size")
    if np.linalg.det(m) == 0.0:
        raise DomainError("linear part is singular")
    return GroupElement(AFFINE, m, translation)


def reflection(n: int) -> np.ndarray:
    """The fixed reflection J = diag(-1, 1, ..., 1)."""
    j = np.eye(n)
    j[0, 0] = -1.0
    return j


def identity_element(tag: str, n: int) -> GroupElement:
    """Group identity for the given tag.

    For the GL- component, carrying the transported group structure
    g * h = J (Jg Jh), the identity element is J itself.
    """
    if tag == AFFINE:
        return affine(np.zeros(n), np.eye(n))
    if tag == GL_MINUS:
        return GroupElement(GL_MINUS, reflection(n))
    return GroupElement(tag, np.eye(n))


_VALIDATORS = {
    ROTATION: rotation,
    POSITIVE_DIAGONAL: positive_diagonal,
    UNIPOTENT: unipotent,
    SPECIAL_LINEAR: special_linear,
}


def compose(g: GroupElement, h: GroupElement) -> GroupElement:
    """Group product.  GL- uses the transported law g * h = J (Jg Jh)."""
    if g.tag != h.tag:
        raise ContractViolation(f"incompatible tags {g.tag!r} and {h.tag!r}")
    if g.tag == AFFINE:
        return affine(g.translation + g.matrix @ h.translation,
                      g.matrix @ h.matrix)
    if g.tag == GL_MINUS:
        j = reflection(g.n)
        return GroupElement(GL_MINUS, j @ (j @ g.matrix) @ (j @ h.matrix))
    prod = g.matrix @ h.matrix
    if g.tag in _VALIDATORS:
        return _VALIDATORS[g.tag](prod)
    return GroupElement(g.tag, prod)


def invert(g: GroupElement) -> GroupElement:
    """Group inverse; composing with it gives identity_element(tag, n)."""
    if g.tag == AFFINE:
        minv = np.linalg.inv(g.matrix)
        return affine(-(minv @ g.translation), minv)
    if g.tag == ROTATION:
        return GroupElement(ROTATION, g.matrix.T.copy())
    if g.tag == GL_MINUS:
        j = reflection(g.n)
        return GroupElement(GL_MINUS, j @ np.linalg.inv(g.matrix) @ j)
    det = np.linalg.det(g.matrix)
    if det == 0.0 or not np.isfinite(det):
        raise DomainError("matrix is singular")
    return GroupElement(g.tag, np.linalg.inv(g.matrix))


# ---------------------------------------------------------------------------
# Iwasawa decomposition


@dataclass(frozen=True)
class IwasawaFactors:
    """Triple (k, n, a) together with the product ordering it recomposes in."""

    k: GroupElement
    n: GroupElement
    a: GroupElement
    ordering: str

    def recompose(self) -> np.ndarray:
        mats = {"K": self.k.matrix, "N": self.n.matrix, "A": self.a.matrix}
        x, y, z = self.ordering
        return mats[x] @ mats[y] @ mats[z]


def _qr_positive(m: np.ndarray):
    q, r = np.linalg.qr(m)
    s = np.sign(np.diag(r))
    s[s == 0] = 1.0
    return q * s[None, :], s[:, None] * r


def _split_triangular(r: np.ndarray, a_side: str):
    """Split an upper triangular positive-diagonal R into unipotent and diagonal."""
    d = np.diag(r).copy()
    if a_side == "right":            # R = n a  ->  columns scaled
        nm = r / d[None, :]
    else:                            # R = a n  ->  rows scaled
        nm = r / d[:, None]
    np.fill_diagonal(nm, 1.0)
    nm = np.triu(nm)
    return nm, d


def iwasawa_decompose(g, ordering: str = "KNA") -> IwasawaFactors:
    """Decompose a special-linear matrix in the requested factor ordering.

    KNA and KAN come from column Gram-Schmidt (QR with positive diagonal);
    NAK and ANK place the rotation on the right and come from the QR
    factorization of the inverse.
    """
    if ordering not in ORDERINGS:
        raise ContractViolation(f"unknown ordering {ordering!r}")
    m = g.matrix if isinstance(g, GroupElement) else _check_square(g)
    if abs(np.linalg.det(m) - 1.0) > 1e-10:
        raise ContractViolation("Iwasawa decomposition requires det 1 to 1e-10")
    if ordering in ("KNA", "KAN"):
        q, r = _qr_positive(m)
    else:
        q1, r1 = _qr_positive(np.linalg.inv(m))
        q = q1.T
        r = np.linalg.inv(r1)
    nm, d = _split_triangular(r, "right" if ordering in ("KNA", "NAK") else "left")
    return IwasawaFactors(k=GroupElement(ROTATION, q),
                          n=unipotent(nm),
                          a=positive_diagonal(d),
                          ordering=ordering)


def reorder_iwasawa(f: IwasawaFactors, target: str) -> IwasawaFactors:
    """Re-express Iwasawa factors in another ordering.

    Swapping A past N on the same side of K conjugates the unipotent factor
    by the diagonal one (which keeps it unipotent) and leaves k and a fixed;
    moving K across requires a fresh decomposition of the recomposed matrix.
    """
    if target not in ORDERINGS:
        raise ContractViolation(f"unknown ordering {target!r}")
    if target == f.ordering:
        return f
    same_side = {frozenset(("KNA", "KAN")), frozenset(("NAK", "ANK"))}
    if frozenset((f.ordering, target)) in same_side:
        d = np.diag(f.a.matrix)
        ratio = d[:, None] / d[None, :]
        if f.ordering in ("KNA", "NAK"):     # ...n a... -> ...a n'...
            nm = f.n.matrix * (1.0 / ratio)  # n' = a^-1 n a
        else:                                # ...a n... -> ...n' a...
            nm = f.n.matrix * ratio          # n' = a n a^-1
        return IwasawaFactors(f.k, unipotent(np.triu(nm)), f.a, target)
    return iwasawa_decompose(special_linear(f.recompose()), target)


# ---------------------------------------------------------------------------
# GL+ = SL x R+*  and the GL- transport


@dataclass(frozen=True)
class GlPlusFactorization:
    s: GroupElement          # special linear part
    t: float                 # det(g)^(1/n) > 0

    def recompose(self) -> np.ndarray:
        return self.s.matrix * self.t


def split_gl_plus(g) -> GlPlusFactorization:
    m = g.matrix if isinstance(g, GroupElement) else _check_square(g)
    det = np.linalg.det(m)
    if det <= 0.0:
        raise DomainError("split_gl_plus requires positive determinant")
    t = det ** (1.0 / m.shape[0])
    return GlPlusFactorization(special_linear(m / t), float(t))


def gl_minus_transport(g) -> GroupElement:
    """The bijection GL- -> GL+ given by g -> J g."""
    m = g.matrix if isinstance(g, GroupElement) else _check_square(g)
    if np.linalg.det(m) >= 0.0:
        raise DomainError("gl_minus_transport requires negative determinant")
    return GroupElement(GL_PLUS, reflection(m.shape[0]) @ m)


def transported_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Product on GL- transported along g -> Jg:  a * b = J (Ja Jb)."""
    j = reflection(np.asarray(a).shape[-1])
    return j @ (j @ a) @ (j @ b)


# ---------------------------------------------------------------------------
# Function extensions (tilde and the G x K lift)


def _apply(m, v):
    return np.einsum("...ij,...j->...i", m, v)


def tilde_extend(f):
    """Extend f on the affine group to the auxiliary triple group.

    The extension ft(A, X, Y) = f(X A, X Y) restricts to f at X = I and is
    invariant under (A, X, Y) -> (T A, X T^-1, T Y).  Arguments are raw
    arrays (vector, matrix, matrix) and may be batched.
    """
    def ft(a_vec, x_mat, y_mat):
        a_vec = np.asarray(a_vec, dtype=float)
        x_mat = np.asarray(x_mat, dtype=float)
        y_mat = np.asarray(y_mat, dtype=float)
        return f(_apply(x_mat, a_vec), x_mat @ y_mat)
    return ft


def tilde_extend_solvable(f):
    """Extend f on the solvable group N x| A to the triple N x A x A.

    ft(n, a, b) = f(a n a^-1, a b); restricting at a = I recovers f, and
    ft(s n s^-1, a s^-1, b s) = ft(n, a, b) for diagonal s.
    """
    def ft(n_mat, a_mat, b_mat):
        n_mat = np.asarray(n_mat, dtype=float)
        a_mat = np.asarray(a_mat, dtype=float)
        b_mat = np.asarray(b_mat, dtype=float)
        a_inv = np.linalg.inv(a_mat)
        return f(a_mat @ n_mat @ a_inv, a_mat @ b_mat)
    return ft


def upsilon_extend(f):
    """Lift f on G to G x K by uf(g, k1) = f(g k1)."""
    def uf(g_mat, k_mat):
        return f(np.asarray(g_mat, dtype=float) @ np.asarray(k_mat, dtype=float))
    return uf


# ---------------------------------------------------------------------------
# Coordinate charts


def strict_upper_indices(n: int):
    return np.triu_indices(n, 1)


def unipotent_from_coords(x, n: int) -> np.ndarray:
    """Unit upper-triangular matrix from strict-upper coordinates (row-major)."""
    x = np.asarray(x, dtype=float)
    m = np.eye(n)
    m[strict_upper_indices(n)] = x
    return m


def unipotent_coords(m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    return m[strict_upper_indices(m.shape[0])]


def diagonal_from_log(u) -> np.ndarray:
    """SL-embedded positive diagonal from its n-1 free log-coordinates."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    full = np.concatenate([u, [-u.sum()]])
    return np.diag(np.exp(full))


def diagonal_log_coords(m) -> np.ndarray:
    d = np.diag(np.asarray(m, dtype=float))
    return np.log(d[:-1])


def so2_matrix(theta):
    theta = np.asarray(theta, dtype=float)
    c, s = np.cos(theta), np.sin(theta)
    m = np.empty(theta.shape + (2, 2))
    m[..., 0, 0] = c
    m[..., 0, 1] = -s
    m[..., 1, 0] = s
    m[..., 1, 1] = c
    return m


def so2_angle(m):
    m = np.asarray(m, dtype=float)
    return np.arctan2(m[..., 1, 0], m[..., 0, 0])


def euler_zyz_matrix(alpha, beta, gamma) -> np.ndarray:
    """Rotation Rz(alpha) Ry(beta) Rz(gamma)."""
    def rz(t):
        c, s = np.cos(t), np.sin(t)
        return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])

    def ry(t):
        c, s = np.cos(t), np.sin(t)
        return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])

    return rz(alpha) @ ry(beta) @ rz(gamma)


def euler_zyz_angles(m) -> tuple[float, float, float]:
    """ZYZ Euler angles of a 3x3 rotation, gamma = 0 at the gimbal poles."""
    m = np.asarray(m, dtype=float)
    beta = float(np.arccos(np.clip(m[2, 2], -1.0, 1.0)))
    if np.sin(beta) > 1e-12:
        alpha = float(np.arctan2(m[1, 2], m[0, 2]))
        gamma = float(np.arctan2(m[2, 1], -m[2, 0]))
    elif m[2, 2] > 0:
        alpha = float(np.arctan2(m[1, 0], m[0, 0]))
        gamma = 0.0
    else:
        alpha = float(np.arctan2(-m[1, 0], -m[0, 0]))
        gamma = 0.0
    return alpha, beta, gamma


def gl2_ank_coords(m):
    """ANK + scale chart of 2x2 GL+ matrices, vectorized over leading axes.

    Returns (x, u, theta, s) with  M = e^s * diag(e^u, e^-u) [[1, x],[0, 1]] R(theta).
    """
    m = np.asarray(m, dtype=float)
    det = m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    if np.any(det <= 0.0):
        raise DomainError("gl2_ank_coords requires positive determinant")
    t = np.sqrt(det)
    s00 = m[..., 0, 0] / t
    s01 = m[..., 0, 1] / t
    s10 = m[..., 1, 0] / t
    s11 = m[..., 1, 1] / t
    theta = np.arctan2(s10, s11)
    a2 = np.hypot(s10, s11)
    u = -np.log(a2)
    sin_t, cos_t = np.sin(theta), np.cos(theta)
    x = (s00 * sin_t + s01 * cos_t) * a2
    return x, u, theta, np.log(t)


def gl2_ank_matrix(x, u, theta, s):
    """Inverse of :func:`gl2_ank_coords`, vectorized over leading axes."""
    x, u, theta, s = np.broadcast_arrays(*(np.asarray(v, dtype=float)
                                           for v in (x, u, theta, s)))
    a1 = np.exp(u)
    a2 = np.exp(-u)
    c, si = np.cos(theta), np.sin(theta)
    scale = np.exp(s)
    m = np.empty(x.shape + (2, 2))
    # a n = [[a1, a1 x], [0, a2]], times R(theta), times e^s
    m[..., 0, 0] = scale * (a1 * c + a1 * x * si)
    m[..., 0, 1] = scale * (-a1 * si + a1 * x * c)
    m[..., 1, 0] = scale * (a2 * si)
    m[..., 1, 1] = scale * (a2 * c)
    return m


# ---------------------------------------------------------------------------
# Random elements


def random_element(tag: str, n: int, rng: np.random.Generator) -> GroupElement:
    """Reproducible random element: Gaussian entries projected onto the group."""
    if tag == ROTATION:
        q, _ = _qr_positive(rng.standard_normal((n, n)))
        if np.linalg.det(q) < 0:
            q[:, -1] *= -1.0
        return GroupElement(ROTATION, q)
    if tag == POSITIVE_DIAGONAL:
        u = rng.standard_normal(n - 1)
        return positive_diagonal(np.diag(diagonal_from_log(u)))
    if tag == UNIPOTENT:
        return unipotent(unipotent_from_coords(rng.standard_normal(n * (n - 1) // 2), n))
    if tag == SPECIAL_LINEAR:
        m = _random_gl_plus(n, rng)
        return special_linear(m / np.linalg.det(m) ** (1.0 / n))
    if tag == GL_PLUS:
        return GroupElement(GL_PLUS, _random_gl_plus(n, rng))
    if tag == GL_MINUS:
        return GroupElement(GL_MINUS, reflection(n) @ _random_gl_plus(n, rng))
    if tag == AFFINE:
        return affine(rng.standard_normal(n), _random_gl_plus(n, rng))
    raise ContractViolation(f"unknown tag {tag!r}")


def _random_gl_plus(n: int, rng: np.random.Generator) -> np.ndarray:
    while True:
        m = rng.standard_normal((n, n))
        det = np.linalg.det(m)
        if abs(det) > 1e-6:
            if det < 0:
                m[:, 0] *= -1.0
            return m
