"""Regularized training of finite RePU networks.

Full-batch gradient descent on

    MSE(g) + lambda * (||W||_F^2 + sum_i (a_i^2 + eps^2)^(1/p)) / 2

with the subgradient taken to be 0 at the activation kinks. The eps
smoothing matters for p >= 3 where |a|^(2/p) has infinite slope at 0.
Every `rebalance_every` steps the per-unit scale freedom is used to
re-equalize |a_i|^(2/p) with ||w_i||^2 exactly; this changes no
predicted value and can only shrink the regularizer, so the objective
never jumps upward at a rebalance.

The scheduled learning rate is a cap, not the step actually taken:
each step backtracks (halves) until the objective stops increasing.
Cubed activations make the landscape stiff enough that any fixed step
small enough to be stable early is utterly sluggish late; backtracking
rides the stability boundary instead. Everything stays deterministic
given the seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .networks import CostBreakdown, RepuNet, cost

__all__ = ["FitConfig", "FitResult", "FitDiverged", "fit", "lambda_sweep", "SweepRow"]


class FitDiverged(RuntimeError):
    """Raised when the loss goes non-finite; carries the trace so far."""

    def __init__(self, message, loss_trace):
        super().__init__(message)
        self.loss_trace = np.asarray(loss_trace)


@dataclass(frozen=True)
class FitConfig:
    p: int
    k: int
    lam: float
    xs: np.ndarray  # (n, d)
    ys: np.ndarray  # (n,)
    steps: int = 6000
    lr: float = 0.05
    lr_schedule: str = "cosine"  # or "constant"
    seed: int = 0
    eps: float = 1e-8
    rebalance_every: int = 100
    init_scale: float = 0.5
    record_every: int = 50

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError("lambda must be positive")
        if self.k < 1:
            raise ValueError("width must be at least 1")
        xs = np.atleast_2d(np.asarray(self.xs, dtype=float))
        ys = np.asarray(self.ys, dtype=float)
        if len(xs) != len(ys) or len(xs) == 0:
            raise ValueError("need matching, nonempty xs and ys")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)


@dataclass(frozen=True)
class FitResult:
    net: RepuNet
    loss_trace: np.ndarray
    objective_trace: np.ndarray
    cost_trace: list[CostBreakdown] = field(repr=False, default_factory=list)
    canonical_cost: float = 0.0


def _rebalance_inplace(W, b, a, p):
    norms = np.linalg.norm(W, axis=1)
    live = (norms > 1e-12) & (np.abs(a) > 1e-12)
    if not np.any(live):
        return
    r = np.sqrt(np.abs(a[live]) ** (1.0 / p) / norms[live])
    W[live] *= r[:, None]
    b[live] *= r
    a[live] /= r**p


_BACKTRACK_MAX = 30


def fit(config: FitConfig) -> FitResult:
    rng = np.random.default_rng(config.seed)
    X, y = config.xs, config.ys
    n, d = X.shape
    p, k, lam, eps = config.p, config.k, config.lam, config.eps

    W = rng.normal(0.0, config.init_scale, size=(k, d))
    proj = X @ W.T
    b = rng.uniform(proj.min(axis=0), proj.max(axis=0))
    a = rng.normal(0.0, 0.2, size=k)
    c = float(np.mean(y))

    def forward(W, b, a, c):
        with np.errstate(over="ignore", invalid="ignore"):
            z = X @ W.T - b
            zp = np.maximum(z, 0.0)
            act = zp**p
            res = act @ a + c - y
            mse = float(res @ res) / n
            reg = 0.5 * (
                float(np.sum(W * W)) + float(np.sum((a * a + eps * eps) ** (1.0 / p)))
            )
        return z, zp, act, res, mse, mse + lam * reg

    losses = np.empty(config.steps)
    objectives = np.empty(config.steps)
    cost_trace: list[CostBreakdown] = []

    for step in range(config.steps):
        if config.lr_schedule == "cosine":
            lr = config.lr * (0.05 + 0.95 * 0.5 * (1 + np.cos(np.pi * step / config.steps)))
        else:
            lr = config.lr
        z, zp, act, res, mse, obj = forward(W, b, a, c)
        losses[step] = mse
        objectives[step] = obj
        if not np.isfinite(obj):
            raise FitDiverged(
                f"objective became non-finite at step {step}", losses[: step + 1]
            )

        grad_a = (2.0 / n) * (act.T @ res)
        grad_c = (2.0 / n) * float(np.sum(res))
        dz = (2.0 / n) * res[:, None] * a * (p * zp ** (p - 1) if p > 1 else (z > 0))
        grad_W = dz.T @ X
        grad_b = -dz.sum(axis=0)

        grad_a += lam * (a / p) * (a * a + eps * eps) ** (1.0 / p - 1.0)
        grad_W += lam * W

        # A kink can make the subgradient a non-descent direction, so after
        # exhausting the halvings the (tiny, finite) step is taken anyway
        # rather than stalling in place.
        for _ in range(_BACKTRACK_MAX):
            new = (W - lr * grad_W, b - lr * grad_b, a - lr * grad_a, c - lr * grad_c)
            if forward(*new)[-1] <= obj:
                break
            lr *= 0.5
        else:
            if not np.isfinite(forward(*new)[-1]):
                raise FitDiverged(
                    f"no finite step found at step {step}", losses[: step + 1]
                )
        W, b, a, c = new

        if config.rebalance_every and (step + 1) % config.rebalance_every == 0:
            _rebalance_inplace(W, b, a, p)
        if config.record_every and (step + 1) % config.record_every == 0:
            cost_trace.append(cost(RepuNet(p, W.copy(), b.copy(), a.copy(), c)))

    net = RepuNet(p, W, b, a, c)
    final = cost(net)
    return FitResult(
        net=net,
        loss_trace=losses,
        objective_trace=objectives,
        cost_trace=cost_trace,
        canonical_cost=final.canonical_cost,
    )


@dataclass(frozen=True)
class SweepRow:
    lam: float
    final_loss: float
    canonical_cost: float


def lambda_sweep(config: FitConfig, lambdas, threads: int = 1) -> list[SweepRow]:
    """One fit per lambda; rows in the given order.

    Costs are expected to decrease with lambda but that is reported,
    not asserted. threads > 1 runs the fits concurrently.
    """
    lambdas = list(lambdas)
    if not lambdas:
        return []
    configs = [replace(config, lam=float(l)) for l in lambdas]

    def run(cfg):
        r = fit(cfg)
        return SweepRow(cfg.lam, float(r.loss_trace[-1]), r.canonical_cost)

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(run, configs))
    return [run(cfg) for cfg in configs]
