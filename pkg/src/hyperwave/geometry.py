"""Geometry of the similarity coordinates on (1+d)-dimensional Minkowski
space: Jacobians, metric, Christoffel symbols and the contracted-Christoffel
consistency check.

Tensors are evaluated at a single spacetime point (s, y) with y a
d-dimensional spatial vector; index 0 is the hyperboloidal time direction.
Radial callers use `geometry_tables`, which places y on the first axis.
"""

import numpy as np

from .model import HEIGHT, HeightFunction

__all__ = [
    "hsc_jacobian",
    "hsc_inverse_jacobian",
    "metric",
    "inverse_metric",
    "christoffel",
    "sqrt_det",
    "contracted_christoffel_residual",
    "geometry_tables",
]

# 6th-order central difference weights on a 7-point stencil.
_CD6_OFFSETS = np.array([-3, -2, -1, 1, 2, 3])
_CD6_WEIGHTS = np.array([-1.0 / 60.0, 3.0 / 20.0, -3.0 / 4.0, 3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0])


def _grad_h(y, height):
    r = np.linalg.norm(y)
    if r == 0.0:
        return np.zeros_like(y)
    return height.dh(r) * y / r


def _hess_h(y, height):
    d = y.size
    r = np.linalg.norm(y)
    if r == 0.0:
        return height.d2h(0.0) * np.eye(d)
    yhat = y / r
    proj = np.eye(d) - np.outer(yhat, yhat)
    return height.d2h(r) * np.outer(yhat, yhat) + height.dh_over_y(r) * proj


def _scale(y, height):
    """The positive scalar y.grad(h) - h entering every inverse formula."""
    r = np.linalg.norm(y)
    return r * height.dh(r) - height.h(r)


def hsc_jacobian(s, y, height: HeightFunction = HEIGHT):
    y = np.atleast_1d(np.asarray(y, dtype=float))
    d = y.size
    es = np.exp(-s)
    jac = np.zeros((d + 1, d + 1))
    jac[0, 0] = -es * height.h(np.linalg.norm(y))
    jac[0, 1:] = es * _grad_h(y, height)
    jac[1:, 0] = -es * y
    jac[1:, 1:] = es * np.eye(d)
    return jac


def hsc_inverse_jacobian(s, y, height: HeightFunction = HEIGHT):
    """Jacobian of the inverse coordinate map, expressed at the point (s, y)."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    d = y.size
    es = np.exp(s)
    D = _scale(y, height)
    gh = _grad_h(y, height)
    inv = np.zeros((d + 1, d + 1))
    inv[0, 0] = es / D
    inv[0, 1:] = -es * gh / D
    inv[1:, 0] = es * y / D
    inv[1:, 1:] = es * (np.eye(d) - np.outer(y, gh) / D)
    return inv


def metric(s, y, height: HeightFunction = HEIGHT):
    y = np.atleast_1d(np.asarray(y, dtype=float))
    d = y.size
    e2s = np.exp(-2.0 * s)
    h = height.h(np.linalg.norm(y))
    gh = _grad_h(y, height)
    g = np.zeros((d + 1, d + 1))
    g[0, 0] = e2s * (-h * h + y @ y)
    g[0, 1:] = g[1:, 0] = e2s * (h * gh - y)
    g[1:, 1:] = e2s * (np.eye(d) - np.outer(gh, gh))
    return g


def inverse_metric(s, y, height: HeightFunction = HEIGHT):
    y = np.atleast_1d(np.asarray(y, dtype=float))
    d = y.size
    e2s = np.exp(2.0 * s)
    gh = _grad_h(y, height)
    D = _scale(y, height)
    w = 1.0 - gh @ gh
    g = np.zeros((d + 1, d + 1))
    g[0, 0] = -e2s * w / D**2
    g[0, 1:] = g[1:, 0] = e2s * (-w * y / D**2 - gh / D)
    g[1:, 1:] = e2s * (
        np.eye(d) - w * np.outer(y, y) / D**2 - (np.outer(y, gh) + np.outer(gh, y)) / D
    )
    return g


def christoffel(s, y, height: HeightFunction = HEIGHT):
    """Christoffel symbols Gamma[lam, mu, nu]; independent of s."""
    del s
    y = np.atleast_1d(np.asarray(y, dtype=float))
    d = y.size
    D = _scale(y, height)
    hess = _hess_h(y, height)
    gamma = np.zeros((d + 1, d + 1, d + 1))
    gamma[0, 0, 0] = -1.0
    gamma[0, 1:, 1:] = hess / D
    for k in range(d):
        gamma[k + 1, 1:, 0] = gamma[k + 1, 0, 1:] = -np.eye(d)[k]
        gamma[k + 1, 1:, 1:] = hess / D * y[k]
    return gamma


def sqrt_det(s, y, d=None, height: HeightFunction = HEIGHT):
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if d is None:
        d = y.size
    return np.exp(-(d + 1) * s) * _scale(y, height)


def contracted_christoffel_residual(s, y, height: HeightFunction = HEIGHT, step=None):
    """Residual of (1/sqrt|g|) d_mu(g^{mu nu} sqrt|g|) = -g^{kl} Gamma^nu_{kl},
    with the divergence taken by 6th-order central differences.

    The flux scales like e^{-(d-1)s}, so the s-direction step shrinks with
    the dimension to keep the truncation error near 1e-9.
    """
    y = np.atleast_1d(np.asarray(y, dtype=float))
    d = y.size
    if step is None:
        step = 0.02 / max(2.0, d - 1.0)

    def flux(sv, yv):
        return inverse_metric(sv, yv, height) * sqrt_det(sv, yv, d, height)

    div = np.zeros(d + 1)
    for o, w in zip(_CD6_OFFSETS, _CD6_WEIGHTS):
        div += w * flux(s + o * step, y)[0, :]
    for i in range(d):
        e = np.zeros(d)
        e[i] = step
        for o, w in zip(_CD6_OFFSETS, _CD6_WEIGHTS):
            div += w * flux(s, y + o * e)[i + 1, :]
    div /= step

    gamma = christoffel(s, y, height)
    ginv = inverse_metric(s, y, height)
    contracted = np.einsum("kl,nkl->n", ginv, gamma)
    return np.max(np.abs(div / sqrt_det(s, y, d, height) + contracted))


def geometry_tables(s, r, d, height: HeightFunction = HEIGHT):
    """All geometric data at the radial point y = r e_1 in d space dimensions."""
    y = np.zeros(d)
    y[0] = float(r)
    jac = hsc_jacobian(s, y, height)
    inv_jac = hsc_inverse_jacobian(s, y, height)
    return {
        "jacobian": jac,
        "inverse_jacobian": inv_jac,
        "metric": metric(s, y, height),
        "inverse_metric": inverse_metric(s, y, height),
        "christoffel": christoffel(s, y, height),
        "sqrt_det": sqrt_det(s, y, d, height),
        "jacobian_identity_error": float(np.max(np.abs(jac @ inv_jac - np.eye(d + 1)))),
    }
