"""Path-loss-to-AoA estimators and beam-directivity fitting.

All estimators take the differential path loss ``x`` in dB, measured in the
S21 sense: ``x = S21 - S21_model(boresight)``, which is ``10 n_R log10 cos
theta_R`` for a noiseless free-space link and therefore <= 0 off boresight.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from . import datasets, expr as ex, sr
from .datasets import SweepDataset

MODES = ("sr", "direct", "poly")


class EstimatorError(ValueError):
    pass


class UnidentifiableError(EstimatorError):
    """The data carries no angular information for a required exponent."""


# --------------------------------------------------------------------------- #
# directivity exponents

@dataclass(frozen=True)
class DirectivityFit:
    """Fitted exponents; ``None`` where the data never moves that angle."""

    n_t: int | None
    m_t: int | None
    n_r: int | None
    m_r: int | None
    refined: tuple
    gain_offset_db: float
    residual_rms_db: float

    def as_tuple(self):
        return (self.n_t, self.m_t, self.n_r, self.m_r)


_EXPONENT_NAMES = ("n_t", "m_t", "n_r", "m_r")


def _log_cos_column(angle):
    c = np.cos(np.asarray(angle, dtype=float))
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(np.where(c > 0, c, np.nan))


def fit_directivity(sweeps, scenario: str | None = None, fit_gain: bool = True, grid=range(1, 65)) -> DirectivityFit:
    """Fit (n_T, m_T, n_R, m_R) from one or more sweeps of known geometry.

    The residual ``S21 + PL_baseline`` is linear in the exponents. A
    coordinate-wise search over the integer ``grid`` (started from the rounded
    least-squares solution) gives the integer exponents; one Newton step on
    the continuous problem gives ``refined``. With ``fit_gain`` a common dB
    offset on the peak gains is profiled out.
    """
    if isinstance(sweeps, SweepDataset):
        sweeps = [sweeps]
    cols, targets, angle_keys = [], [], set()
    for ds in sweeps:
        if scenario is not None and ds.scenario != scenario:
            raise EstimatorError(f"sweep scenario {ds.scenario!r} does not match {scenario!r}")
        tx, rx = datasets.row_pointings(ds)
        block = np.column_stack([
            _log_cos_column(tx.theta_rad), _log_cos_column(tx.phi_rad),
            _log_cos_column(rx.theta_rad), _log_cos_column(rx.phi_rad),
        ])
        if np.any(~np.isfinite(block)):
            raise EstimatorError("sweep contains pattern-null pointings")
        cols.append(block)
        targets.append(ds.s21_db + datasets.baseline_per_row(ds))
        angle_keys |= {(ds.meta["pointing"].get("rotated"), p, a) for p, a in zip(ds.plane, ds.angle_deg)}
    if len(angle_keys) < 5:
        raise UnidentifiableError("need at least 5 distinct angular positions")
    A = np.vstack(cols)
    r = np.concatenate(targets)

    identifiable = np.max(np.abs(A), axis=0) > 1e-12
    if not identifiable[2]:
        raise UnidentifiableError("receiver azimuth never leaves boresight; n_R is unidentifiable")
    if not identifiable.any():
        raise UnidentifiableError("all rows at boresight")
    idx = np.flatnonzero(identifiable)
    D = A[:, idx]
    if fit_gain:
        D = np.column_stack([D, np.ones(len(r))])

    def sse(n_int):
        coef = np.concatenate([n_int, []])
        pred = A[:, idx] @ coef
        res = r - pred
        if fit_gain:
            res = res - res.mean()
        return float(res @ res)

    grid = np.asarray(list(grid), dtype=float)
    ls = np.linalg.lstsq(D, r, rcond=None)[0][: idx.size]
    current = np.array([grid[np.argmin(np.abs(grid - v))] for v in ls])
    best = sse(current)
    for _ in range(50):
        changed = False
        for k in range(idx.size):
            trial = current.copy()
            scores = []
            for g in grid:
                trial[k] = g
                scores.append(sse(trial))
            j = int(np.argmin(scores))
            if scores[j] < best - 1e-12 * max(best, 1.0):
                current[k], best, changed = grid[j], scores[j], True
        if not changed:
            break

    # one Newton step on the quadratic SSE lands on the continuous optimum
    x0 = np.concatenate([current, [0.0]]) if fit_gain else current.copy()
    grad = -2.0 * D.T @ (r - D @ x0)
    hess = 2.0 * D.T @ D
    refined_vec = x0 - np.linalg.lstsq(hess, grad, rcond=None)[0]
    res = r - D @ refined_vec

    ints = [None] * 4
    refined = [None] * 4
    for j, k in enumerate(idx):
        ints[k] = int(current[j])
        refined[k] = float(refined_vec[j])
    return DirectivityFit(
        *ints,
        refined=tuple(refined),
        gain_offset_db=float(refined_vec[-1]) if fit_gain else 0.0,
        residual_rms_db=float(np.sqrt(np.mean(res**2))),
    )


# --------------------------------------------------------------------------- #
# closed-form inversions

def _arccos_clamped(v):
    v = np.asarray(v, dtype=float)
    clamped = int(np.count_nonzero((v > 1.0) | (v < -1.0)))
    return np.arccos(np.clip(v, -1.0, 1.0)), clamped


@dataclass(frozen=True)
class DirectInversionModel:
    n_r: float
    offset_rad: float = 0.0

    def __post_init__(self):
        if not self.n_r > 0:
            raise ValueError("n_r must be positive")
        if not math.isfinite(self.offset_rad):
            raise ValueError("offset must be finite")


@dataclass(frozen=True)
class PolyCosineModel:
    """``cos theta ~ a x^2 + b x + c``; with ``eq13_form`` the quadratic is
    instead read as ``10 n_r log10 cos theta``."""

    a: float
    b: float
    c: float
    eq13_form: bool = False
    n_r: float | None = None

    def q(self, x):
        x = np.asarray(x, dtype=float)
        return self.a * x**2 + self.b * x + self.c


def _check_pair(delta_pl_db, theta_rad, minimum=1):
    x = np.asarray(delta_pl_db, dtype=float).ravel()
    t = np.asarray(theta_rad, dtype=float).ravel()
    if x.size != t.size:
        raise EstimatorError("delta_pl and theta must have equal length")
    if x.size < minimum:
        raise EstimatorError(f"need at least {minimum} samples, got {x.size}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(t))):
        raise EstimatorError("inputs must be finite")
    return x, t


def direct_raw(n_r, delta_pl_db):
    with np.errstate(over="ignore"):
        v = 10.0 ** (np.asarray(delta_pl_db, dtype=float) / (10.0 * n_r))
    return _arccos_clamped(v)


def fit_direct_inversion(delta_pl_db, theta_rad, n_r) -> DirectInversionModel:
    """Fix ``n_r`` and fit the additive angle offset (mean residual)."""
    x, t = _check_pair(delta_pl_db, theta_rad)
    if not n_r > 0:
        raise EstimatorError("n_r must be positive")
    raw, _ = direct_raw(n_r, x)
    return DirectInversionModel(float(n_r), float(np.mean(t - raw)))


def predict_direct(m: DirectInversionModel, delta_pl_db):
    raw, _ = direct_raw(m.n_r, delta_pl_db)
    return raw + m.offset_rad


def fit_poly_cosine(delta_pl_db, theta_rad, eq13_form: bool = False, n_r=None) -> PolyCosineModel:
    """Least squares of cos(theta) on [x^2, x, 1].

    Rank-deficient designs (e.g. every sample at one angle and one ΔPL) get the
    minimum-norm solution, which still reproduces the constant surrogate.
    """
    x, t = _check_pair(delta_pl_db, theta_rad, minimum=3)
    A = np.column_stack([x**2, x, np.ones_like(x)])
    if eq13_form:
        if not (n_r and n_r > 0):
            raise EstimatorError("eq13_form needs a positive n_r")
        c = np.cos(t)
        if np.any(c <= 0):
            raise EstimatorError("eq13_form needs theta < 90 deg")
        target = 10.0 * n_r * np.log10(c)
    else:
        target = np.cos(t)
    coef = np.linalg.lstsq(A, target, rcond=None)[0]
    return PolyCosineModel(*map(float, coef), eq13_form=eq13_form, n_r=n_r if eq13_form else None)


def poly_raw(m: PolyCosineModel, delta_pl_db):
    with np.errstate(over="ignore", invalid="ignore"):
        q = m.q(delta_pl_db)
        if m.eq13_form:
            q = 10.0 ** (q / (10.0 * m.n_r))
    return _arccos_clamped(q)


def predict_poly(m: PolyCosineModel, delta_pl_db):
    return poly_raw(m, delta_pl_db)[0]


# --------------------------------------------------------------------------- #
# tagged model

@dataclass
class AoaModel:
    """One fitted estimator plus the feature definition and fit metadata.

    ``kind`` is ``"sr"`` (``estimator`` is an :class:`~pathloss_aoa.expr`
    tree), ``"direct"`` or ``"poly"``.
    """

    kind: str
    estimator: object
    features: tuple = ("delta_pl_db",)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        expected = {"sr": (ex.Const, ex.Var, ex.Unary, ex.Binary),
                    "direct": DirectInversionModel, "poly": PolyCosineModel}
        if self.kind not in expected:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if not isinstance(self.estimator, expected[self.kind]):
            raise TypeError(f"{self.kind} model holds a {type(self.estimator).__name__}")
        self.features = tuple(self.features)

    def predict(self, X):
        """Angles in radians. ``X`` is ΔPL (1-D) or rows matching ``features``."""
        X = np.asarray(X, dtype=float)
        if self.kind == "sr":
            return ex.evaluate(self.estimator, ex.as_features(X, len(self.features)))
        x = X if X.ndim == 1 else X[:, 0]
        if self.kind == "direct":
            return predict_direct(self.estimator, x)
        return predict_poly(self.estimator, x)

    def clamp_count(self, X) -> int:
        X = np.asarray(X, dtype=float)
        x = X if X.ndim == 1 else X[:, 0]
        if self.kind == "direct":
            return direct_raw(self.estimator.n_r, x)[1]
        if self.kind == "poly":
            return poly_raw(self.estimator, x)[1]
        return 0

    def expression_text(self, digits: int | None = None) -> str:
        """Closed form as text; ``x0`` is ΔPL in dB."""
        if self.kind == "sr":
            return ex.to_pretty(self.estimator, digits) if digits else ex.to_text(self.estimator)
        fmt = (lambda v: f"{v:.{digits}g}") if digits else ex.format_constant
        e = self.estimator
        if self.kind == "direct":
            return f"arccos(10^(x0 / (10 * {fmt(e.n_r)}))) + {fmt(e.offset_rad)}"
        q = f"{fmt(e.a)} * x0^2 + {fmt(e.b)} * x0 + {fmt(e.c)}"
        if e.eq13_form:
            q = f"10^(({q}) / (10 * {fmt(e.n_r)}))"
        return f"arccos(clamp({q}, -1, 1))"

    @property
    def complexity(self) -> int:
        if self.kind == "sr":
            return ex.complexity(self.estimator)
        # node counts of the closed forms above
        return 10 if self.kind == "direct" else 13

    def to_dict(self) -> dict:
        if self.kind == "sr":
            params = {"expression": ex.to_text(self.estimator)}
        else:
            params = dataclasses.asdict(self.estimator)
        return {"schema": "pathloss_aoa.model/1", "kind": self.kind, "params": params,
                "features": list(self.features), "meta": self.meta}

    @classmethod
    def from_dict(cls, d: dict) -> "AoaModel":
        kind, params = d["kind"], d["params"]
        if kind == "sr":
            est = ex.parse_text(params["expression"])
        elif kind == "direct":
            est = DirectInversionModel(**params)
        elif kind == "poly":
            est = PolyCosineModel(**params)
        else:
            raise ValueError(f"unknown model kind {kind!r}")
        return cls(kind, est, tuple(d.get("features", ("delta_pl_db",))), dict(d.get("meta", {})))


def fit_unconstrained(features, theta_rad, cfg: sr.SrConfig | None = None, feature_names=("delta_pl_db",)) -> AoaModel:
    """Symbolic regression of theta on the features; the knee of the front is kept."""
    X = np.asarray(features, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[0] == 0:
        raise EstimatorError("no feature rows")
    if X.shape[1] != len(feature_names):
        raise EstimatorError("feature_names does not match the feature columns")
    cfg = cfg or sr.SrConfig()
    front = sr.fit(X, theta_rad, cfg)
    chosen = sr.select_model(front, "score")
    meta = {
        "selection": "score",
        "validation_mse": chosen.loss,
        "front": [{"complexity": s.complexity, "loss": s.loss, "expression": s.text} for s in front.entries],
        "seed": cfg.seed,
    }
    model = AoaModel("sr", chosen.expr, tuple(feature_names), meta)
    model.front = front
    return model


# --------------------------------------------------------------------------- #
# full pipeline

def sweep_features(ds: SweepDataset, feature_names=("delta_pl_db",)) -> np.ndarray:
    cols = []
    tx, _ = datasets.row_pointings(ds)
    for name in feature_names:
        if name == "delta_pl_db":
            cols.append(datasets.delta_pl_features(ds))
        elif name == "theta_t_rad":
            cols.append(np.asarray(tx.theta_rad, dtype=float))
        else:
            raise EstimatorError(f"unknown feature {name!r}")
    return np.column_stack(cols)


def azimuth_rows(ds: SweepDataset) -> SweepDataset:
    return ds.select(ds.plane == "H")


def saber_fit(
    mode: str,
    sweep: SweepDataset,
    scenario: str | None = None,
    cfg: sr.SrConfig | None = None,
    directivity: DirectivityFit | None = None,
    characterization=None,
    feature_names=("delta_pl_db",),
    eq13_form: bool = False,
) -> AoaModel:
    """Fit one estimator on a sweep with known geometry.

    ΔPL is computed per row against the boresight model, the directivity
    exponents are fitted (from ``characterization`` sweeps if given, else from
    ``sweep`` itself) unless passed in, and the chosen estimator is fitted on
    the azimuth-plane rows.
    """
    if mode not in MODES:
        raise EstimatorError(f"unknown mode {mode!r}; expected one of {MODES}")
    if scenario is not None and sweep.scenario != scenario:
        raise EstimatorError(f"dataset scenario {sweep.scenario!r} does not match {scenario!r}")
    rows = azimuth_rows(sweep)
    if len(rows) == 0:
        raise EstimatorError("no azimuth-plane rows")
    theta = datasets.truth_theta_r(rows)

    if mode == "sr":
        model = fit_unconstrained(sweep_features(rows, feature_names), theta, cfg, feature_names)
    else:
        if directivity is None:
            directivity = fit_directivity(characterization or [sweep], scenario or sweep.scenario)
        n_r = directivity.n_r
        if n_r is None:
            raise UnidentifiableError("n_R was not identified")
        x = datasets.delta_pl_features(rows)
        if mode == "direct":
            model = AoaModel("direct", fit_direct_inversion(x, theta, n_r))
        else:
            model = AoaModel("poly", fit_poly_cosine(x, theta, eq13_form=eq13_form, n_r=n_r))
        model.meta["directivity"] = {
            "n_t": directivity.n_t, "m_t": directivity.m_t,
            "n_r": directivity.n_r, "m_r": directivity.m_r,
            "refined": list(directivity.refined),
        }
    X = sweep_features(rows, model.features)
    model.meta.update({
        "scenario": sweep.scenario,
        "geometry": sweep.meta.get("geometry"),
        "data_hash": sweep.content_hash(),
        "data_seed": sweep.meta.get("seed"),
        "clamp_count": model.clamp_count(X),
    })
    if cfg is not None:
        model.meta.setdefault("seed", cfg.seed)
    return model


def saber_predict(model: AoaModel, pl_test):
    """Apply the fitted closed form to new ΔPL input (dB) or feature rows."""
    return model.predict(pl_test)
