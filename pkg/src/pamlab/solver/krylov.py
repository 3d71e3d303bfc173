"""Lanczos approximation of ``exp(t A) v`` for symmetric ``A``."""

from __future__ import annotations

import numpy as np
from scipy import linalg

from ..errors import NumericError


def expm_action(A, v: np.ndarray, t: float, m: int = 40, tol: float = 1e-13, max_steps: int = 1000000):
    """Propagate ``v`` to time ``t`` with adaptive substeps.

    Each substep builds an ``m``-dimensional Krylov space (full
    reorthogonalisation) and accepts the step when the usual a posteriori
    estimate ``beta_m |e_m^T exp(tau T) e_1|`` is below ``tol`` per unit time.
    Steps are capped at ``rho*tau <= 500`` (``rho`` a Gershgorin bound on the
    spectral radius); beyond that the estimate can miss localised modes.
    Returns ``(w, info)``.
    """
    n = v.size
    w = np.array(v, dtype=np.float64)
    if t == 0 or n == 0:
        return w, {"steps": 0, "rejected": 0, "err": 0.0}
    m = min(m, n)
    anorm = abs(A).sum(axis=1).max() if n else 0.0
    tau_max = t if anorm == 0 else min(t, 500.0 / anorm)
    tau = tau_max
    done, steps, rejected, err_total = 0.0, 0, 0, 0.0
    while done < t:
        if steps > max_steps:
            raise NumericError("Krylov propagation exceeded step budget", steps=steps, time=done)
        nv = np.linalg.norm(w)
        if nv == 0:
            break
        V = np.zeros((m + 1, n))
        alpha = np.zeros(m)
        beta = np.zeros(m)
        V[0] = w / nv
        k = m
        for j in range(m):
            x = A @ V[j]
            alpha[j] = V[j] @ x
            x -= alpha[j] * V[j]
            if j > 0:
                x -= beta[j - 1] * V[j - 1]
            x -= V[: j + 1].T @ (V[: j + 1] @ x)
            beta[j] = np.linalg.norm(x)
            if beta[j] < 1e-14 * max(anorm, 1.0):
                k = j + 1
                break
            V[j + 1] = x / beta[j]
        happy = k < m or beta[k - 1] < 1e-14 * max(anorm, 1.0)
        T = np.diag(alpha[:k]) + np.diag(beta[: k - 1], 1) + np.diag(beta[: k - 1], -1)
        while True:
            step = min(tau, t - done)
            # expm keeps the small trailing entries accurate for short steps
            y = linalg.expm(step * T)[:, 0]
            err = 0.0 if happy else beta[k - 1] * abs(y[-1])
            if err <= tol * step / t or step < 1e-300:
                break
            tau = step * 0.5
            rejected += 1
        w = nv * (V[:k].T @ y)
        done += step
        err_total += err * nv
        steps += 1
        if err < 0.1 * tol * step / t:
            tau = min(step * 1.5, tau_max)
    return w, {"steps": steps, "rejected": rejected, "err": err_total}
