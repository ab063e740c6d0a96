"""Genetic-programming symbolic regression with an error/complexity Pareto front.

The search is steady-state: every iteration breeds ``batch_size`` children
from tournament-selected parents, refines their constants, and replaces the
oldest members of the population. A hall of fame keeps the lowest
validation-loss expression seen at each complexity; the Pareto front is read
off the hall of fame.

Every child draws randomness from its own Philox stream keyed by
``(seed, iteration, slot)``, so results do not depend on how child evaluation
is scheduled across workers.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import expr as ex
from .fileio import atomic_write_text
from .expr import Binary, Const, Expression, Unary, Var


class SrFitError(RuntimeError):
    pass


@dataclass
class SrConfig:
    iterations: int = 5000
    max_size: int = 10
    max_depth: int = 10
    population_size: int = 100
    operators: tuple = ex.DEFAULT_OPERATORS
    parsimony_coefficient: float = 0.0
    tournament_size: int = 5
    mutation_prob: float = 0.7
    crossover_prob: float = 0.3
    constant_optimizer_steps: int = 8
    batch_size: int = 1
    validation_fraction: float = 0.2
    hof_migration_prob: float = 0.1
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        self.operators = tuple(self.operators)
        for name in ("mutation_prob", "crossover_prob", "hof_migration_prob", "validation_fraction"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.mutation_prob + self.crossover_prob <= 0:
            raise ValueError("mutation_prob + crossover_prob must be positive")
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.max_size < 1 or self.max_depth < 1:
            raise ValueError("max_size and max_depth must be >= 1")
        if self.tournament_size < 1 or self.batch_size < 1 or self.workers < 1:
            raise ValueError("tournament_size, batch_size and workers must be >= 1")
        if self.parsimony_coefficient < 0:
            raise ValueError("parsimony_coefficient must be >= 0")
        unknown = set(self.operators) - set(ex.DEFAULT_OPERATORS)
        if unknown:
            raise ValueError(f"unknown operators: {sorted(unknown)}")


@dataclass(frozen=True)
class ScoredExpr:
    expr: Expression
    loss: float
    complexity: int
    train_loss: float = math.nan

    @property
    def text(self) -> str:
        return ex.to_text(self.expr)


@dataclass
class ParetoFront:
    entries: list
    history: np.ndarray = field(default_factory=lambda: np.zeros(0))
    n_features: int = 1

    def __post_init__(self):
        validate_front(self.entries)

    def __len__(self):
        return len(self.entries)

    def best(self) -> ScoredExpr:
        return min(self.entries, key=lambda s: (s.loss, s.complexity))

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["complexity", "loss", "expression_text"])
        for s in self.entries:
            w.writerow([s.complexity, repr(float(s.loss)), s.text])
        text = buf.getvalue()
        if path is not None:
            atomic_write_text(path, text)
        return text


def validate_front(entries):
    """Check sorting and non-dominance; raises ``ValueError`` on violation."""
    for prev, cur in zip(entries, entries[1:]):
        if not cur.complexity > prev.complexity:
            raise ValueError("front complexities must be strictly increasing")
        if not cur.loss < prev.loss:
            raise ValueError("front losses must be strictly decreasing")


def read_front_csv(path) -> list[tuple[int, float, Expression]]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [(int(r["complexity"]), float(r["loss"]), ex.parse_text(r["expression_text"])) for r in rows]


# --------------------------------------------------------------------------- #
# fast evaluation with an external constant vector

def _eval_c(e, X, cvals, pos):
    """Evaluate with constants taken from ``cvals`` in preorder; ``pos`` is a one-element list."""
    if isinstance(e, Const):
        v = cvals[pos[0]]
        pos[0] += 1
        return np.full(X.shape[0], v)
    if isinstance(e, Var):
        return X[:, e.index]
    if isinstance(e, Unary):
        return ex._apply_unary(e.op, _eval_c(e.child, X, cvals, pos))
    left = _eval_c(e.left, X, cvals, pos)
    return ex._apply_binary(e.op, left, _eval_c(e.right, X, cvals, pos))


def _predict(e, X, cvals):
    return _eval_c(e, X, cvals, [0])


def _mse(pred, y):
    r = pred - y
    loss = float(np.dot(r, r) / r.size)
    return loss if math.isfinite(loss) else math.inf


def refine_constants(e: Expression, X, y, steps: int) -> Expression:
    """Levenberg-Marquardt on the tree's constants against training MSE."""
    c = np.array(ex.constants(e), dtype=float)
    if c.size == 0 or steps <= 0:
        return e
    r = _predict(e, X, c) - y
    loss = float(np.dot(r, r))
    if not math.isfinite(loss):
        return e
    lam = 1e-6
    for _ in range(steps):
        J = np.empty((X.shape[0], c.size))
        for k in range(c.size):
            h = 1e-7 * max(1.0, abs(c[k]))
            ck = c.copy()
            ck[k] += h
            J[:, k] = (_predict(e, X, ck) - y - r) / h
        if not np.all(np.isfinite(J)):
            break
        improved = False
        for _ in range(6):
            A = np.vstack([J, math.sqrt(lam) * np.diag(np.sqrt(np.sum(J * J, axis=0)) + 1e-12)])
            b = np.concatenate([-r, np.zeros(c.size)])
            step = np.linalg.lstsq(A, b, rcond=None)[0]
            trial = c + step
            rt = _predict(e, X, trial) - y
            lt = float(np.dot(rt, rt))
            if math.isfinite(lt) and lt < loss:
                gain = loss - lt
                c, r, loss = trial, rt, lt
                lam = max(lam / 10.0, 1e-12)
                improved = True
                break
            lam *= 10.0
        if not improved or gain <= 1e-15 * max(loss, 1e-300):
            break
    if not np.all(np.isfinite(c)):
        return e
    return ex.with_constants(e, c)


# --------------------------------------------------------------------------- #
# variation operators

def _stream(seed, generation, slot):
    ss = np.random.SeedSequence(int(seed) & (2**64 - 1), spawn_key=(int(generation), int(slot)))
    return np.random.Generator(np.random.Philox(ss))


def _fits(e, cfg):
    return ex.complexity(e) <= cfg.max_size and ex.depth(e) <= cfg.max_depth


def _subtree_mutation(rng, e, cfg, n_features):
    nodes = ex.preorder(e)
    i = int(rng.integers(len(nodes)))
    budget = cfg.max_size - (len(nodes) - ex.complexity(nodes[i]))
    new = ex.random_expr(rng, max(1, budget), n_features, cfg.operators, cfg.max_depth)
    return ex.replace_at(e, i, new)


def _point_mutation(rng, e, cfg, n_features):
    nodes = ex.preorder(e)
    i = int(rng.integers(len(nodes)))
    node = nodes[i]
    if isinstance(node, Unary):
        ops = [op for op in cfg.operators if op in ex.UNARY_OPS and op != node.op]
        if ops:
            return ex.replace_at(e, i, Unary(ops[int(rng.integers(len(ops)))], node.child))
        return e
    if isinstance(node, Binary):
        ops = [op for op in cfg.operators if op in ex.BINARY_OPS and op != node.op]
        if ops:
            return ex.replace_at(e, i, Binary(ops[int(rng.integers(len(ops)))], node.left, node.right))
        return e
    return ex.replace_at(e, i, ex.random_leaf(rng, n_features))


def _constant_mutation(rng, e, cfg, n_features):
    c = ex.constants(e)
    if not c:
        return _point_mutation(rng, e, cfg, n_features)
    k = int(rng.integers(len(c)))
    c[k] = c[k] * (1.0 + rng.normal(0.0, 0.5)) + rng.normal(0.0, 0.1)
    return ex.with_constants(e, c)


def _crossover(rng, e, donor, cfg):
    nodes = ex.preorder(e)
    i = int(rng.integers(len(nodes)))
    budget = cfg.max_size - (len(nodes) - ex.complexity(nodes[i]))
    pool = [n for n in ex.preorder(donor) if ex.complexity(n) <= budget]
    if not pool:
        return e
    return ex.replace_at(e, i, pool[int(rng.integers(len(pool)))])


# --------------------------------------------------------------------------- #
# search

@dataclass
class _Individual:
    expr: Expression
    train_loss: float
    val_loss: float
    complexity: int


class _Search:
    def __init__(self, X, y, cfg: SrConfig):
        self.cfg = cfg
        self.n_features = X.shape[1]
        n = X.shape[0]
        if n < 5:
            train = val = np.arange(n)
        else:
            perm = _stream(cfg.seed, 2**32 - 1, 0).permutation(n)
            n_val = min(n - 1, max(1, int(round(cfg.validation_fraction * n))))
            val, train = np.sort(perm[:n_val]), np.sort(perm[n_val:])
        self.Xtr, self.ytr = X[train], y[train]
        self.Xva, self.yva = X[val], y[val]

    def score(self, e) -> _Individual:
        c = np.array(ex.constants(e), dtype=float)
        tr = _mse(_predict(e, self.Xtr, c), self.ytr)
        va = _mse(_predict(e, self.Xva, c), self.yva) if math.isfinite(tr) else math.inf
        if not math.isfinite(va):
            tr = va = math.inf
        return _Individual(e, tr, va, ex.complexity(e))

    def finish(self, e) -> _Individual:
        e = ex.fold_constants(e)
        e = refine_constants(e, self.Xtr, self.ytr, self.cfg.constant_optimizer_steps)
        return self.score(e)

    def effective(self, ind):
        return ind.train_loss * (1.0 + self.cfg.parsimony_coefficient * ind.complexity)

    def tournament(self, rng, pop):
        idx = rng.integers(len(pop), size=self.cfg.tournament_size)
        best = min(idx, key=lambda i: (self.effective(pop[i]), i))
        return pop[int(best)].expr

    def breed(self, rng, pop, hof_exprs):
        cfg = self.cfg
        for _ in range(10):
            if hof_exprs and rng.random() < cfg.hof_migration_prob:
                parent = hof_exprs[int(rng.integers(len(hof_exprs)))]
            else:
                parent = self.tournament(rng, pop)
            u = rng.random() * (cfg.mutation_prob + cfg.crossover_prob)
            if u < cfg.crossover_prob:
                child = _crossover(rng, parent, self.tournament(rng, pop), cfg)
            else:
                kind = int(rng.integers(3))
                mutate = (_subtree_mutation, _point_mutation, _constant_mutation)[kind]
                child = mutate(rng, parent, cfg, self.n_features)
            if _fits(child, cfg):
                return child
        return ex.random_expr(rng, cfg.max_size, self.n_features, cfg.operators, cfg.max_depth)


def _update_hof(hof, ind):
    if not math.isfinite(ind.val_loss):
        return
    cur = hof.get(ind.complexity)
    if cur is None or ind.val_loss < cur.val_loss:
        hof[ind.complexity] = ind


def _front_from_hof(hof) -> list:
    entries = []
    for c in sorted(hof):
        ind = hof[c]
        if not entries or ind.val_loss < entries[-1].loss:
            entries.append(ScoredExpr(ind.expr, ind.val_loss, c, ind.train_loss))
    return entries


def fit(X, y, cfg: SrConfig | None = None) -> ParetoFront:
    """Evolve expressions for ``y ~ f(X)`` and return the validation-loss Pareto front.

    Losses on the front are mean squared errors on the validation rows; an
    expression with any singular row (train or validation) is never admitted.
    """
    cfg = cfg or SrConfig()
    X = ex.as_features(X)
    y = np.asarray(y, dtype=float).ravel()
    if X.shape[0] != y.size:
        raise ValueError("X and y must have the same number of rows")
    if y.size < 2:
        raise ValueError("need at least 2 rows")
    if not np.all(np.isfinite(y)) or not np.all(np.isfinite(X)):
        raise ValueError("X and y must be finite")

    with np.errstate(all="ignore"):
        return _run(X, y, cfg)


def _run(X, y, cfg):
    s = _Search(X, y, cfg)
    init_rng = _stream(cfg.seed, 0, 0)
    seeds = [Const(float(np.mean(s.ytr)))] + [Var(i) for i in range(s.n_features)]
    exprs = seeds[: cfg.population_size]
    while len(exprs) < cfg.population_size:
        exprs.append(ex.random_expr(init_rng, cfg.max_size, s.n_features, cfg.operators, cfg.max_depth))
    pop = [s.finish(e) for e in exprs]
    hof = {}
    for ind in pop:
        _update_hof(hof, ind)

    history = np.empty(cfg.iterations)
    oldest = 0
    pool = ThreadPoolExecutor(cfg.workers) if cfg.workers > 1 and cfg.batch_size > 1 else None
    try:
        for it in range(1, cfg.iterations + 1):
            hof_exprs = [hof[c].expr for c in sorted(hof)]

            def make(slot, it=it, hof_exprs=hof_exprs):
                rng = _stream(cfg.seed, it, slot)
                return s.finish(s.breed(rng, pop, hof_exprs))

            slots = range(cfg.batch_size)
            children = list(pool.map(make, slots)) if pool else [make(k) for k in slots]
            # merge barrier: children are applied in slot order
            for child in children:
                pop[oldest] = child
                oldest = (oldest + 1) % len(pop)
                _update_hof(hof, child)
            history[it - 1] = min((h.val_loss for h in hof.values()), default=math.inf)
    finally:
        if pool:
            pool.shutdown()

    if not hof:
        raise SrFitError("every candidate expression was singular on the data")
    return ParetoFront(_front_from_hof(hof), history, s.n_features)


_LOSS_FLOOR = 1e-30


def select_model(front: ParetoFront, policy: str = "best_loss") -> ScoredExpr:
    """Pick an entry from the front.

    ``best_loss`` returns the lowest-loss entry. ``score`` returns the entry
    with the largest drop in log-loss per added node relative to its
    predecessor on the front; the first entry scores 0.
    """
    entries = front.entries if isinstance(front, ParetoFront) else list(front)
    if not entries:
        raise ValueError("empty Pareto front")
    if policy == "best_loss":
        return min(entries, key=lambda s: (s.loss, s.complexity))
    if policy != "score":
        raise ValueError(f"unknown selection policy {policy!r}")
    best, best_score = entries[0], 0.0
    for prev, cur in zip(entries, entries[1:]):
        drop = math.log(max(prev.loss, _LOSS_FLOOR)) - math.log(max(cur.loss, _LOSS_FLOOR))
        score = drop / (cur.complexity - prev.complexity)
        if score > best_score:
            best, best_score = cur, score
    return best
