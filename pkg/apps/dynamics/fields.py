"""
Vector fields and residuals on flat state vectors.

These kernels are what the integrator evaluates at every stage, so they take
and return plain numpy arrays. The services module wraps them in state types.

Layouts:
    rescaled    X1 X2 Y1 Y2 L t u
    polynomial  X1 X2 Y1 Y2 L t u W
    hat         hX1 hX2 hY1 hY2 hL
    profile     f1 df1 f2 df2 u du
    planar      X1 Y1 L
    multi       X(k) Y(k) L t u
    quasi       X1 X2 X3 Y1 Y2 Y3 L t u
"""

import math

import numpy as np

from apps.core.exceptions import DomainExitError


def _coupling_ratio(Y1, Y2):
    if not Y1 > 0:
        raise DomainExitError("Y1 left the positive half-line", Y1=Y1)
    return Y2 * Y2 / Y1


def rescaled_field(params, y, w=None):
    """
    Rescaled soliton system. w stands for Y2^2/Y1; callers pass the carried
    W of the polynomial form when Y1 is too small to divide by.
    """
    X1, X2, Y1, Y2, L = y[0], y[1], y[2], y[3], y[4]
    d1, d2 = params.d1, params.d2
    if w is None:
        w = _coupling_ratio(Y1, Y2)

    half_eps_l2 = 0.5 * params.epsilon * L * L
    S = d1 * X1 * X1 + d2 * X2 * X2 - half_eps_l2
    coupling = params.A3 * w * w

    return np.array(
        [
            X1 * (S - 1) + (params.A1 / d1) * Y1 * Y1 + half_eps_l2 + coupling / d1,
            X2 * (S - 1) + (params.A2 / d2) * Y2 * Y2 + half_eps_l2 - 2 * coupling / d2,
            Y1 * (S - X1),
            Y2 * (S - X2),
            L * S,
            L,
            d1 * X1 + d2 * X2 - 1,
        ]
    )


def polynomial_field(params, y, use_w=True):
    """Rescaled system with W = Y2^2/Y1 as an extra variable, W' = W(S + X1 - 2 X2)."""
    X1, X2, W = y[0], y[1], y[7]
    w = W if use_w else _coupling_ratio(y[2], y[3])
    head = rescaled_field(params, y, w=w)
    S = params.d1 * X1 * X1 + params.d2 * X2 * X2 - 0.5 * params.epsilon * y[4] * y[4]
    return np.append(head, W * (S + X1 - 2 * X2))


def locus(params, y, w=None):
    """(S1, S2): the Einstein locus is S1 = S2 = 0, the soliton locus S1, S2 < 0."""
    X1, X2, Y1, Y2, L = y[0], y[1], y[2], y[3], y[4]
    if w is None:
        w = _coupling_ratio(Y1, Y2)
    n = params.n
    S1 = (
        params.d1 * X1 * X1
        + params.d2 * X2 * X2
        + params.A1 * Y1 * Y1
        + params.A2 * Y2 * Y2
        - params.A3 * w * w
        - 1
        + (n - 1) * 0.5 * params.epsilon * L * L
    )
    S2 = params.d1 * X1 + params.d2 * X2 - 1
    return S1, S2


def rescaled_conservation(params, y, w=None):
    """S1 - (C + eps u) L^2; zero along exact solutions with matching (C, u)."""
    S1, _ = locus(params, y, w=w)
    L, u = y[4], y[6]
    return S1 - (params.C + params.epsilon * u) * L * L


def hat_field(params, y):
    hX1, hX2, hY1, hY2, hL = y[0], y[1], y[2], y[3], y[4]
    d1, d2 = params.d1, params.d2
    w = _coupling_ratio(hY1, hY2)
    coupling = params.A3 * w * w
    half_eps = 0.5 * params.epsilon

    return np.array(
        [
            -hX1 * hL + (params.A1 / d1) * hY1 * hY1 + coupling / d1 + half_eps,
            -hX2 * hL + (params.A2 / d2) * hY2 * hY2 - 2 * coupling / d2 + half_eps,
            -hX1 * hY1,
            -hX2 * hY2,
            half_eps - d1 * hX1 * hX1 - d2 * hX2 * hX2,
        ]
    )


def hat_conservation(params, y):
    """Einstein conservation law in hat variables; zero on Einstein trajectories."""
    hX1, hX2, hY1, hY2, hL = y[0], y[1], y[2], y[3], y[4]
    w = _coupling_ratio(hY1, hY2)
    return (
        params.d1 * hX1 * hX1
        + params.d2 * hX2 * hX2
        + params.A1 * hY1 * hY1
        + params.A2 * hY2 * hY2
        - params.A3 * w * w
        + (params.n - 1) * 0.5 * params.epsilon
        - hL * hL
    )


def hat_constraint(params, y):
    return y[4] - params.d1 * y[0] - params.d2 * y[1]


def profile_field(params, y, einstein=True, m=math.inf):
    """
    Second-order equations for the warping functions, written as a first
    order system. In Einstein mode u is frozen at zero. In soliton mode a
    finite m adds the quasi-Einstein term du^2/m to u''.
    """
    f1, df1, f2, df2, du = y[0], y[1], y[2], y[3], y[5]
    if not (f1 > 0 and f2 > 0):
        raise DomainExitError("warping function collapsed", f1=f1, f2=f2)

    d1, d2 = params.d1, params.d2
    if einstein:
        du = 0.0
    x1, x2 = df1 / f1, df2 / f2
    trace_l = d1 * x1 + d2 * x2
    ratio = f1 * f1 / f2**4
    r1 = (params.A1 / d1) / (f1 * f1) + (params.A3 / d1) * ratio
    r2 = (params.A2 / d2) / (f2 * f2) - (2 * params.A3 / d2) * ratio
    half_eps = 0.5 * params.epsilon

    ddf1 = f1 * (x1 * x1 + r1 - trace_l * x1 + du * x1 + half_eps)
    ddf2 = f2 * (x2 * x2 + r2 - trace_l * x2 + du * x2 + half_eps)

    if einstein:
        return np.array([df1, ddf1, df2, ddf2, 0.0, 0.0])

    ddu = d1 * ddf1 / f1 + d2 * ddf2 / f2 - half_eps
    if math.isfinite(m):
        ddu += du * du / m
    return np.array([df1, ddf1, df2, ddf2, du, ddu])


def planar_y2_squared(params, X1, Y1, eps_l2):
    """
    Y2^2 on the Einstein locus, from the '-' branch of
        A3 w^2 - A2 Y1^2 w - Q Y1^2 = 0,
    written in the cancellation-free form -2 Q Y1^2 / (A2 Y1^2 + sqrt(...)).
    """
    d1, d2, n = params.d1, params.d2, params.n
    X2 = (1 - d1 * X1) / d2
    Q = d1 * X1 * X1 + d2 * X2 * X2 + params.A1 * Y1 * Y1 + (n - 1) * 0.5 * eps_l2 - 1
    a2y = params.A2 * Y1 * Y1
    radicand = a2y * a2y + 4 * params.A3 * Q * Y1 * Y1
    if radicand < 0:
        raise DomainExitError("planar flow reached the boundary of its domain", radicand=radicand)
    w = -2 * Q * Y1 * Y1 / (a2y + math.sqrt(radicand))
    if w < 0:
        if w > -1e-14:
            return 0.0
        raise DomainExitError("planar flow left the real Y2 region", Y2_squared=w)
    return w


def planar_rates(params, X1, Y1, eps_l2):
    """(X1', Y1', L'/L) of the planar Einstein-locus reduction."""
    d1, d2 = params.d1, params.d2
    X2 = (1 - d1 * X1) / d2
    w = planar_y2_squared(params, X1, Y1, eps_l2)
    S = d1 * X1 * X1 + d2 * X2 * X2 - 0.5 * eps_l2
    coupling = params.A3 * w * w / (Y1 * Y1) if params.A3 else 0.0
    return (
        X1 * (S - 1) + (params.A1 / d1) * Y1 * Y1 + 0.5 * eps_l2 + coupling / d1,
        Y1 * (S - X1),
        S,
    )


def planar_field(params, y):
    X1, Y1, L = y[0], y[1], y[2]
    dX1, dY1, rate = planar_rates(params, X1, Y1, params.epsilon * L * L)
    return np.array([dX1, dY1, L * rate])


def multi_field(params, y):
    k = params.size
    dims = np.asarray(params.dims)
    lambdas = np.asarray(params.lambdas)
    X, Y = y[:k], y[k : 2 * k]
    L = y[2 * k]

    half_eps_l2 = 0.5 * params.epsilon * L * L
    S = float(dims @ (X * X)) - half_eps_l2
    return np.concatenate(
        [
            X * (S - 1) + lambdas * Y * Y + half_eps_l2,
            Y * (S - X),
            [L * S, L, float(dims @ X) - 1],
        ]
    )


def multi_conservation(params, y):
    k = params.size
    dims = np.asarray(params.dims)
    lambdas = np.asarray(params.lambdas)
    X, Y = y[:k], y[k : 2 * k]
    L = y[2 * k]
    return (
        float(dims @ (X * X))
        + float((dims * lambdas) @ (Y * Y))
        + (params.n - 1) * 0.5 * params.epsilon * L * L
        - 1
    )


def multi_constraint(params, y):
    k = params.size
    return float(np.asarray(params.dims) @ y[:k]) - 1


def quasi_field(params, y):
    X1, X2, X3, Y1, Y2, Y3, L = (y[i] for i in range(7))
    d1, d2, m = params.d1, params.d2, params.m
    w = _coupling_ratio(Y1, Y2)
    coupling = params.submersion * w * w

    half_eps_l2 = 0.5 * params.epsilon * L * L
    S = d1 * X1 * X1 + d2 * X2 * X2 + m * X3 * X3 - half_eps_l2
    return np.array(
        [
            X1 * (S - 1) + (params.A1 / d1) * Y1 * Y1 + half_eps_l2 + coupling / d1,
            X2 * (S - 1) + (params.A2 / d2) * Y2 * Y2 + half_eps_l2 - 2 * coupling / d2,
            X3 * (S - 1) + (params.A3 / m) * Y3 * Y3 + half_eps_l2,
            Y1 * (S - X1),
            Y2 * (S - X2),
            Y3 * (S - X3),
            L * S,
            L,
            d1 * X1 + d2 * X2 + m * X3 - 1,
        ]
    )


def quasi_conservation(params, y):
    X1, X2, X3, Y1, Y2, Y3, L = (y[i] for i in range(7))
    w = _coupling_ratio(Y1, Y2)
    return (
        params.d1 * X1 * X1
        + params.d2 * X2 * X2
        + params.m * X3 * X3
        + params.A1 * Y1 * Y1
        + params.A2 * Y2 * Y2
        + params.A3 * Y3 * Y3
        - params.submersion * w * w
        + (params.n - 1) * 0.5 * params.epsilon * L * L
        - 1
    )


def quasi_constraint(params, y):
    return params.d1 * y[0] + params.d2 * y[1] + params.m * y[2] - 1
