"""Derivative-free training loops over a noisy scalar cost.

Three solvers share one evaluation-budget contract: a run consumes exactly
`budget` cost calls, every call is recorded, and the reported learning curve
is the monotone best-so-far envelope of the raw evaluations.  All solvers
start from the best of n_ini uniformly drawn parameter vectors.

SVHC and the elite-set zeroth-order search are reconstructions from their
one-line descriptions; their hyperparameters are explicit config, not
canonical values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import pi, tau
from typing import Callable

import numpy as np

from .ansatz import Ansatz, execute
from .metrics import histogram_to_distribution, js_divergence
from .readout import ConfusionMatrix, PerQubitFlipModel, apply_channel_sampled, correct
from .sim import Distribution, probabilities, sample


class BudgetExhausted(RuntimeError):
    """Raised by CostContext.evaluate once the evaluation budget is spent."""


@dataclass(frozen=True)
class LearningCurve:
    """Everything recorded during one run, one entry per cost evaluation."""

    seed: int | None
    costs: np.ndarray
    best_costs: np.ndarray
    improvements: tuple[tuple[int, np.ndarray], ...]
    best_params: np.ndarray
    best_cost: float
    final_params: np.ndarray


class CostContext:
    """Budgeted, recording wrapper around a scalar cost function.

    Owns the run's RNG: both cost-side sampling and optimizer proposals draw
    from the same stream, so a (config, seed) pair pins the whole run.
    """

    def __init__(
        self,
        cost_fn: Callable[[np.ndarray], float],
        param_count: int,
        budget: int,
        rng: np.random.Generator,
        seed: int | None = None,
    ) -> None:
        if param_count < 1:
            raise ValueError(f"param_count must be >= 1, got {param_count}")
        if budget < 1:
            raise ValueError(f"budget must be >= 1, got {budget}")
        self._cost_fn = cost_fn
        self.param_count = param_count
        self.budget = budget
        self.rng = rng
        self.seed = seed
        self.evaluations = 0
        self.costs: list[float] = []
        self.best_costs: list[float] = []
        self.improvements: list[tuple[int, np.ndarray]] = []
        self.best_cost = float("inf")
        self.best_params: np.ndarray | None = None

    @classmethod
    def from_function(
        cls,
        cost_fn: Callable[[np.ndarray], float],
        param_count: int,
        budget: int,
        rng: np.random.Generator,
        seed: int | None = None,
    ) -> "CostContext":
        """Wrap an arbitrary objective (used by toy problems and tests)."""
        return cls(cost_fn, param_count, budget, rng, seed)

    @classmethod
    def for_circuit(
        cls,
        ansatz: Ansatz,
        target: Distribution,
        budget: int,
        shots: int,
        rng: np.random.Generator,
        exact_mode: bool = False,
        channel: PerQubitFlipModel | None = None,
        confusion: ConfusionMatrix | None = None,
        seed: int | None = None,
    ) -> "CostContext":
        """Circuit-training cost: run the ansatz, read out, compare to target.

        Shot mode samples `shots` measurements, optionally corrupts them with
        the flip channel, and corrects through the confusion matrix when one
        is supplied.  Exact mode scores the statevector probabilities directly
        and bypasses sampling and readout entirely.
        """
        if not exact_mode and shots < 1:
            raise ValueError(f"shots must be >= 1, got {shots}")

        if exact_mode:

            def cost_fn(params: np.ndarray) -> float:
                model = probabilities(execute(ansatz, params))
                return js_divergence(model, target)

        else:

            def cost_fn(params: np.ndarray) -> float:
                dist = probabilities(execute(ansatz, params))
                h = sample(dist, shots, rng)
                if channel is not None:
                    h = apply_channel_sampled(h, channel, rng)
                model = histogram_to_distribution(h)
                if confusion is not None:
                    model = correct(model, confusion)
                return js_divergence(model, target)

        return cls(cost_fn, ansatz.param_count, budget, rng, seed)

    def evaluate(self, params: np.ndarray) -> float:
        """Score one parameter vector, recording it against the budget."""
        if self.evaluations >= self.budget:
            raise BudgetExhausted(f"budget of {self.budget} evaluations spent")
        theta = np.asarray(params, dtype=float)
        if theta.shape != (self.param_count,):
            raise ValueError(f"expected {self.param_count} parameters, got shape {theta.shape}")
        cost = float(self._cost_fn(theta))
        self.evaluations += 1
        self.costs.append(cost)
        if cost < self.best_cost:
            self.best_cost = cost
            self.best_params = theta.copy()
            self.improvements.append((self.evaluations - 1, self.best_params))
        self.best_costs.append(self.best_cost)
        return cost

    def curve(self, final_params: np.ndarray) -> LearningCurve:
        if self.best_params is None:
            raise RuntimeError("no evaluations recorded")
        return LearningCurve(
            seed=self.seed,
            costs=np.array(self.costs),
            best_costs=np.array(self.best_costs),
            improvements=tuple(self.improvements),
            best_params=self.best_params,
            best_cost=self.best_cost,
            final_params=np.asarray(final_params, dtype=float).copy(),
        )


def evaluate_cost(params: np.ndarray, ctx: CostContext) -> float:
    return ctx.evaluate(params)


@dataclass(frozen=True)
class InitResult:
    params: np.ndarray
    cost: float
    evaluations: int
    pool: tuple[tuple[float, np.ndarray], ...]


def init_search(ctx: CostContext, n_ini: int) -> InitResult:
    """Evaluate n_ini uniform random parameter vectors, return the argmin."""
    if n_ini < 1:
        raise ValueError(f"n_ini must be >= 1, got {n_ini}")
    pool: list[tuple[float, np.ndarray]] = []
    for _ in range(n_ini):
        cand = ctx.rng.uniform(0.0, tau, ctx.param_count)
        pool.append((ctx.evaluate(cand), cand))
    best_cost, best_params = min(pool, key=lambda t: t[0])
    return InitResult(best_params, best_cost, n_ini, tuple(pool))


# --- solver configs ---


@dataclass(frozen=True)
class AdamConfig:
    alpha: float = 0.2
    beta1: float = 0.9
    beta2: float = 0.999
    fd_step: float = pi / 20
    eps: float = 1e-8


@dataclass(frozen=True)
class SvhcConfig:
    sigma: float = 0.3
    subset_size: int | None = None  # None -> ceil(L/4)
    suppression_period: int = 25


@dataclass(frozen=True)
class ZooConfig:
    elite_size: int = 8
    elite_prob: float = 0.95
    region_width: float = pi
    region_shrink: float = 0.9
    stall_limit: int = 15
    suppression_period: int = 25


@dataclass(frozen=True)
class OptimizerConfig:
    kind: str
    budget: int = 2000
    shots: int = 3000
    n_ini_multiplier: int = 3
    adam: AdamConfig = field(default_factory=AdamConfig)
    svhc: SvhcConfig = field(default_factory=SvhcConfig)
    zoo: ZooConfig = field(default_factory=ZooConfig)

    def __post_init__(self) -> None:
        if self.kind not in ("adam", "svhc", "zoo"):
            raise ValueError(f"unknown optimizer kind {self.kind!r}")
        if self.budget < 1:
            raise ValueError(f"budget must be >= 1, got {self.budget}")
        if self.shots < 1:
            raise ValueError(f"shots must be >= 1, got {self.shots}")
        if self.n_ini_multiplier < 1:
            raise ValueError(f"n_ini_multiplier must be >= 1, got {self.n_ini_multiplier}")

    def n_ini(self, param_count: int) -> int:
        return self.n_ini_multiplier * param_count


def _check_budget(ctx: CostContext, cfg: OptimizerConfig) -> int:
    n_ini = cfg.n_ini(ctx.param_count)
    if ctx.budget < n_ini + 1:
        raise ValueError(
            f"budget {ctx.budget} too small: initialization alone needs {n_ini} "
            f"evaluations, and the solver needs at least one more"
        )
    return n_ini


# --- solvers ---


def run_adam(ctx: CostContext, cfg: OptimizerConfig) -> LearningCurve:
    """ADAM on a central finite-difference gradient.

    Each step spends 2L evaluations on the gradient probes plus one on the
    incumbent itself — without the incumbent evaluation the recorded best
    would sit O(h^2) above the model actually trained.
    """
    a = cfg.adam
    n_ini = _check_budget(ctx, cfg)
    theta = init_search(ctx, n_ini).params.copy()
    n = ctx.param_count
    m = np.zeros(n)
    v = np.zeros(n)
    t = 0
    try:
        while True:
            t += 1
            ctx.evaluate(theta)
            grad = np.zeros(n)
            for i in range(n):
                step = np.zeros(n)
                step[i] = a.fd_step
                grad[i] = (ctx.evaluate(theta + step) - ctx.evaluate(theta - step)) / (
                    2.0 * a.fd_step
                )
            m = a.beta1 * m + (1.0 - a.beta1) * grad
            v = a.beta2 * v + (1.0 - a.beta2) * grad * grad
            m_hat = m / (1.0 - a.beta1**t)
            v_hat = v / (1.0 - a.beta2**t)
            theta = theta - a.alpha * m_hat / (np.sqrt(v_hat) + a.eps)
    except BudgetExhausted:
        pass
    return ctx.curve(theta)


def run_svhc(ctx: CostContext, cfg: OptimizerConfig) -> LearningCurve:
    """Stochastic hill climbing: Gaussian steps on a random coordinate subset,
    accepted on strict improvement; the incumbent's cost is refreshed every
    suppression period to shake off lucky shot-noise values.
    """
    s = cfg.svhc
    n_ini = _check_budget(ctx, cfg)
    ini = init_search(ctx, n_ini)
    x, fx = ini.params.copy(), ini.cost
    n = ctx.param_count
    k = s.subset_size if s.subset_size is not None else -(-n // 4)
    if not 1 <= k <= n:
        raise ValueError(f"subset_size must be in [1, {n}], got {k}")
    iteration = 0
    try:
        while True:
            iteration += 1
            if s.suppression_period > 0 and iteration % s.suppression_period == 0:
                fx = ctx.evaluate(x)
                continue
            y = x.copy()
            idx = ctx.rng.choice(n, size=k, replace=False)
            y[idx] += ctx.rng.normal(0.0, s.sigma, size=k)
            fy = ctx.evaluate(y)
            if fy < fx:
                x, fx = y, fy
    except BudgetExhausted:
        pass
    return ctx.curve(x)


def run_zoo(ctx: CostContext, cfg: OptimizerConfig) -> LearningCurve:
    """Elite-set zeroth-order search: sample inside a shrinking box around a
    random elite with probability elite_prob, else uniformly; the box shrinks
    after stall_limit consecutive non-improving candidates, and elite costs
    are refreshed every suppression period.
    """
    z = cfg.zoo
    if z.elite_size < 1:
        raise ValueError(f"elite_size must be >= 1, got {z.elite_size}")
    if not 0.0 <= z.elite_prob <= 1.0:
        raise ValueError(f"elite_prob must be in [0, 1], got {z.elite_prob}")
    n_ini = _check_budget(ctx, cfg)
    pool = sorted(init_search(ctx, n_ini).pool, key=lambda t: t[0])
    elites = [(c, p.copy()) for c, p in pool[: z.elite_size]]
    n = ctx.param_count
    width = z.region_width
    stall = 0
    iteration = 0
    try:
        while True:
            iteration += 1
            if z.suppression_period > 0 and iteration % z.suppression_period == 0:
                best_params = elites[0][1]
                elites[0] = (ctx.evaluate(best_params), best_params)
                elites.sort(key=lambda t: t[0])
                continue
            if ctx.rng.random() < z.elite_prob:
                base = elites[ctx.rng.integers(len(elites))][1]
                cand = base + ctx.rng.uniform(-width, width, n)
            else:
                cand = ctx.rng.uniform(0.0, tau, n)
            c = ctx.evaluate(cand)
            if c < elites[-1][0]:
                elites[-1] = (c, cand)
                elites.sort(key=lambda t: t[0])
                stall = 0
            else:
                stall += 1
                if stall >= z.stall_limit:
                    width *= z.region_shrink
                    stall = 0
    except BudgetExhausted:
        pass
    return ctx.curve(elites[0][1])


_SOLVERS = {"adam": run_adam, "svhc": run_svhc, "zoo": run_zoo}


def run(ctx: CostContext, cfg: OptimizerConfig) -> LearningCurve:
    """Dispatch on cfg.kind; consumes the context's entire budget."""
    return _SOLVERS[cfg.kind](ctx, cfg)
