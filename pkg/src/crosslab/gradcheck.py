"""Central finite-difference verification of reverse-mode gradients."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .autodiff import Tensor
from .errors import NumericsError


@dataclass
class GradCheckReport:
    max_rel_error: float
    worst_param: str
    failures: list[tuple[str, int, float]] = field(default_factory=list)
    n_checked: int = 0

    def ok(self, tol: float) -> bool:
        return self.max_rel_error <= tol


def grad(loss_fn: Callable[[], Tensor], params: Sequence[Tensor]) -> list[np.ndarray]:
    """Evaluate ``loss_fn`` once and return d(loss)/d(param) for each param.

    Parameters that the loss never touches get an exactly-zero gradient.
    """
    for p in params:
        p.grad = None
    loss = loss_fn()
    if not isinstance(loss, Tensor):
        raise NumericsError("loss function must return a Tensor")
    loss.backward()
    return [p.grad.copy() if p.grad is not None else np.zeros_like(p.data) for p in params]


def finite_diff_check(
    loss_fn: Callable[[], Tensor],
    params: Sequence[Tensor],
    step: float = 1e-5,
    tol: float = 1e-4,
    max_entries_per_param: int | None = None,
    rng: np.random.Generator | None = None,
) -> GradCheckReport:
    """Compare analytic gradients against central differences.

    The error for each entry is |analytic - numeric| normalized by
    max(|analytic|, |numeric|, 1), so it is relative for O(1) gradients and
    absolute for vanishing ones. ``max_entries_per_param`` subsamples large
    parameters (deterministically when ``rng`` is seeded).
    """
    if step <= 0:
        raise NumericsError("finite-difference step must be positive")
    analytic = grad(loss_fn, params)

    worst = 0.0
    worst_name = ""
    failures: list[tuple[str, int, float]] = []
    n_checked = 0
    for p, g in zip(params, analytic):
        name = p.name or f"param{id(p)}"
        flat = p.data.reshape(-1)
        gflat = g.reshape(-1)
        idxs = np.arange(flat.size)
        if max_entries_per_param is not None and flat.size > max_entries_per_param:
            r = rng if rng is not None else np.random.default_rng(0)
            idxs = r.choice(flat.size, size=max_entries_per_param, replace=False)
            idxs.sort()
        for i in idxs:
            orig = flat[i]
            flat[i] = orig + step
            up = float(loss_fn().data)
            flat[i] = orig - step
            down = float(loss_fn().data)
            flat[i] = orig
            numeric = (up - down) / (2.0 * step)
            err = abs(gflat[i] - numeric) / max(abs(gflat[i]), abs(numeric), 1.0)
            n_checked += 1
            if err > worst:
                worst = err
                worst_name = name
            if err > tol:
                failures.append((name, int(i), float(err)))

    return GradCheckReport(max_rel_error=worst, worst_param=worst_name,
                           failures=failures, n_checked=n_checked)
