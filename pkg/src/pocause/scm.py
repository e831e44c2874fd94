"""Structural simulators and brute-force counterfactual oracles.

The estimators in this package lean on two assumptions: treatment is
exogenous given covariates, and the structural response moves one way in
the latent noise. Neither is checkable from one observational table. This
module builds worlds where both are true (or deliberately false), so the
identification formulas can be compared against ground truth computed the
honest way: fix the latent draw, evaluate every counterfactual, average.

A model is mean + noise + coupling + treatment policy + covariate law:

* LinearMean with Additive coupling gives Y = A x + B c + b + U, the
  plainest monotone continuous mechanism.
* TabularMean maps a scalar uniform latent through per-(x, c) cut points
  onto a fixed ascending list of outcome levels, producing discrete
  outcomes with atoms (the regime where observed evidence carries mass).
* NonMonotoneTest flips the latent's direction once treatment crosses
  flip_at. It exists to be caught: estimates built on the monotone
  assumption should disagree with the oracle here, and the monotonicity
  and trajectory diagnostics should flag it.

The policy depends on covariates only, never on the latent draw, so
conditional exogeneity holds by construction. All randomness flows through
counter-based streams (derived_rng), which keeps every simulation and
oracle call reproducible from a single seed regardless of call order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .dataset import DataTable, TableSchema, Variable
from .errors import ConfigError, NoSupportError
from .ordering import (
    Lexicographic,
    Ordering,
    OrderSpec,
    ScalarScore,
    compare,
    indicator_below,
    lexicographic_default,
    order_from_dict,
)

MAX_TABULAR_STATES = 1000

# Fixed stream indices so same-seed calls to different entry points stay
# statistically independent of each other.
_STREAM_SIMULATE = 0
_STREAM_ORACLE_JOINT = 1
_STREAM_ORACLE_EVIDENCE = 2
_STREAM_MONOTONICITY = 3
_STREAM_PROBE = 4
_STREAM_TRAJECTORIES = 5


def derived_rng(seed: int, index: int) -> np.random.Generator:
    """Generator for stream `index` under `seed`.

    Streams are Philox counters keyed by seed XOR index, so any (seed,
    index) pair names the same infinite sequence on every machine and in
    every thread. Resampling schemes should draw replicate b from stream b.
    """
    s, i = int(seed), int(index)
    if s < 0 or i < 0:
        raise ConfigError(f"seed and stream index must be >= 0, got {seed} and {index}")
    return np.random.Generator(np.random.Philox(key=s ^ i))


def _matrix(v, name: str) -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 2:
        raise ConfigError(f"{name} must be a 2-d array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ConfigError(f"{name} contains non-finite entries")
    return arr


def _vector(v, name: str) -> np.ndarray:
    arr = np.asarray(v, dtype=float).ravel()
    if not np.all(np.isfinite(arr)):
        raise ConfigError(f"{name} contains non-finite entries")
    return arr


def _match_rows(rows: np.ndarray, levels: np.ndarray, what: str) -> np.ndarray:
    """Index of each row in a declared level table, by exact value."""
    if rows.shape[1] != levels.shape[1]:
        raise ConfigError(
            f"{what} rows have {rows.shape[1]} columns, levels have {levels.shape[1]}"
        )
    if levels.shape[1] == 0:
        return np.zeros(rows.shape[0], dtype=int)
    eq = np.all(rows[:, None, :] == levels[None, :, :], axis=2)
    hit = eq.any(axis=1)
    if not hit.all():
        bad = rows[~hit][0]
        raise NoSupportError(f"{what} value {bad.tolist()} is not a declared level")
    return eq.argmax(axis=1)


# ---------------------------------------------------------------------------
# Mechanism pieces.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LinearMean:
    """Outcome location A x + B c + b."""

    treat_coef: tuple  # (n_outcomes, n_treatments)
    cov_coef: tuple    # (n_outcomes, n_covariates); may be empty-width
    intercept: tuple   # (n_outcomes,)

    def __post_init__(self):
        a = _matrix(self.treat_coef, "treat_coef")
        b0 = _vector(self.intercept, "intercept")
        if self.cov_coef is None:
            b = np.zeros((a.shape[0], 0))
        else:
            b = np.asarray(self.cov_coef, dtype=float)
            if b.ndim == 1:
                b = b.reshape(a.shape[0], -1) if b.size else np.zeros((a.shape[0], 0))
            b = _matrix(b, "cov_coef") if b.size else b
        if a.shape[0] != b0.size or (b.size and b.shape[0] != a.shape[0]):
            raise ConfigError(
                "treat_coef, cov_coef and intercept disagree on the outcome dimension"
            )
        object.__setattr__(self, "treat_coef", a)
        object.__setattr__(self, "cov_coef", b)
        object.__setattr__(self, "intercept", b0)

    @property
    def n_outcomes(self) -> int:
        return self.treat_coef.shape[0]

    @property
    def n_treatments(self) -> int:
        return self.treat_coef.shape[1]

    @property
    def n_covariates(self) -> int:
        return self.cov_coef.shape[1]

    def value(self, X: np.ndarray, C: np.ndarray) -> np.ndarray:
        out = X @ self.treat_coef.T + self.intercept
        if self.n_covariates:
            out = out + C @ self.cov_coef.T
        return out

    def as_dict(self) -> dict:
        return {
            "kind": "linear",
            "treat_coef": self.treat_coef.tolist(),
            "cov_coef": self.cov_coef.tolist(),
            "intercept": self.intercept.tolist(),
        }


@dataclass(frozen=True)
class TabularMean:
    """Discrete mechanism: a scalar uniform latent cut into outcome levels.

    For each (x, c) cell, cuts[ix, ic] splits (0, 1) into len(levels)
    intervals; the latent's interval picks the outcome row. Levels must be
    strictly ascending under the model's outcome order, which is what makes
    the mechanism monotone in the latent.
    """

    x_levels: tuple   # (n_x, n_treatments)
    c_levels: tuple   # (n_c, n_covariates); one empty row when no covariates
    cuts: tuple       # (n_x, n_c, n_states - 1), nondecreasing in (0, 1)
    levels: tuple     # (n_states, n_outcomes)

    def __post_init__(self):
        xl = _matrix(self.x_levels, "x_levels")
        cl = np.asarray(self.c_levels, dtype=float)
        if cl.ndim == 1 and cl.size == 0:
            cl = np.zeros((1, 0))
        cl = cl if cl.size or cl.shape[0] else np.zeros((1, 0))
        if cl.ndim != 2:
            raise ConfigError(f"c_levels must be 2-d, got shape {cl.shape}")
        lv = _matrix(self.levels, "levels")
        cuts = np.asarray(self.cuts, dtype=float)
        n_states = lv.shape[0]
        if n_states < 2:
            raise ConfigError("a tabular mechanism needs at least two outcome levels")
        if n_states > MAX_TABULAR_STATES:
            raise ConfigError(
                f"{n_states} outcome levels exceeds the cap of {MAX_TABULAR_STATES}"
            )
        want = (xl.shape[0], cl.shape[0], n_states - 1)
        if cuts.shape != want:
            raise ConfigError(f"cuts must have shape {want}, got {cuts.shape}")
        if not np.all(np.isfinite(cuts)) or np.any(cuts < 0) or np.any(cuts > 1):
            raise ConfigError("cuts must lie in [0, 1]")
        if np.any(np.diff(cuts, axis=2) < 0):
            raise ConfigError("cuts must be nondecreasing within each (x, c) cell")
        if len({row.tobytes() for row in xl}) != xl.shape[0]:
            raise ConfigError("x_levels contains duplicate rows")
        if cl.shape[1] and len({row.tobytes() for row in cl}) != cl.shape[0]:
            raise ConfigError("c_levels contains duplicate rows")
        object.__setattr__(self, "x_levels", xl)
        object.__setattr__(self, "c_levels", cl)
        object.__setattr__(self, "cuts", cuts)
        object.__setattr__(self, "levels", lv)

    @property
    def n_outcomes(self) -> int:
        return self.levels.shape[1]

    @property
    def n_treatments(self) -> int:
        return self.x_levels.shape[1]

    @property
    def n_covariates(self) -> int:
        return self.c_levels.shape[1]

    @property
    def n_states(self) -> int:
        return self.levels.shape[0]

    def outcome(self, X: np.ndarray, C: np.ndarray, u: np.ndarray) -> np.ndarray:
        ix = _match_rows(X, self.x_levels, "treatment")
        ic = _match_rows(C, self.c_levels, "covariate")
        state = np.empty(len(u), dtype=int)
        cell = ix * self.c_levels.shape[0] + ic
        for cell_id in np.unique(cell):
            mask = cell == cell_id
            row = self.cuts[cell_id // self.c_levels.shape[0],
                            cell_id % self.c_levels.shape[0]]
            state[mask] = np.searchsorted(row, u[mask], side="right")
        return self.levels[state]

    def state_probs(self, x, c) -> np.ndarray:
        ix = _match_rows(np.atleast_2d(np.asarray(x, float)), self.x_levels, "treatment")[0]
        ic = _match_rows(np.atleast_2d(np.asarray(c, float)).reshape(1, -1),
                         self.c_levels, "covariate")[0]
        edges = np.concatenate(([0.0], self.cuts[ix, ic], [1.0]))
        return np.diff(edges)

    def as_dict(self) -> dict:
        return {
            "kind": "tabular",
            "x_levels": self.x_levels.tolist(),
            "c_levels": self.c_levels.tolist(),
            "cuts": self.cuts.tolist(),
            "levels": self.levels.tolist(),
        }


@dataclass(frozen=True)
class UniformBox:
    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = _vector(self.lo, "lo")
        hi = _vector(self.hi, "hi")
        if lo.size != hi.size or lo.size == 0 or np.any(hi <= lo):
            raise ConfigError("uniform box needs lo < hi componentwise")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dimension(self) -> int:
        return self.lo.size

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return self.lo + (self.hi - self.lo) * rng.random((n, self.dimension))

    def contains(self, u: np.ndarray) -> bool:
        return bool(np.all(u >= self.lo) and np.all(u <= self.hi))

    def as_dict(self) -> dict:
        return {"kind": "uniform_box", "lo": self.lo.tolist(), "hi": self.hi.tolist()}


@dataclass(frozen=True)
class GaussianDiag:
    mean: tuple
    sd: tuple

    def __post_init__(self):
        m = _vector(self.mean, "mean")
        s = _vector(self.sd, "sd")
        if m.size != s.size or m.size == 0 or np.any(s <= 0):
            raise ConfigError("gaussian noise needs matching mean/sd with sd > 0")
        object.__setattr__(self, "mean", m)
        object.__setattr__(self, "sd", s)

    @property
    def dimension(self) -> int:
        return self.mean.size

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return self.mean + self.sd * rng.standard_normal((n, self.dimension))

    def contains(self, u: np.ndarray) -> bool:
        return True

    def as_dict(self) -> dict:
        return {"kind": "gaussian_diag", "mean": self.mean.tolist(), "sd": self.sd.tolist()}


@dataclass(frozen=True)
class Additive:
    """Latent enters as-is: monotone by construction."""

    def sign(self, X: np.ndarray) -> np.ndarray:
        return np.ones(X.shape[0])

    def u_transform(self, X: np.ndarray, u: np.ndarray) -> np.ndarray:
        return u

    def as_dict(self) -> dict:
        return {"kind": "additive"}


@dataclass(frozen=True)
class NonMonotoneTest:
    """Reverses the latent's direction once x[0] reaches flip_at.

    Linear mechanisms get Y = mean - U on the flipped side; tabular ones
    read the cut table at 1 - u. Either way the common-latent monotonicity
    the estimators assume is broken across the flip, on purpose.
    """

    flip_at: float = 0.5

    def __post_init__(self):
        f = float(self.flip_at)
        if not np.isfinite(f):
            raise ConfigError(f"flip_at must be finite, got {self.flip_at!r}")
        object.__setattr__(self, "flip_at", f)

    def sign(self, X: np.ndarray) -> np.ndarray:
        return np.where(X[:, 0] >= self.flip_at, -1.0, 1.0)

    def u_transform(self, X: np.ndarray, u: np.ndarray) -> np.ndarray:
        flipped = X[:, 0] >= self.flip_at
        return np.where(flipped[:, None] if u.ndim == 2 else flipped, 1.0 - u, u)

    def as_dict(self) -> dict:
        return {"kind": "nonmonotone_test", "flip_at": self.flip_at}


@dataclass(frozen=True)
class TreatmentPolicy:
    """Softmax choice over a finite treatment support, driven by covariates only."""

    support: tuple    # (n_levels, n_treatments)
    logits: tuple     # (n_levels,)
    covariate_logits: tuple | None = None  # (n_levels, n_covariates)

    def __post_init__(self):
        sup = _matrix(self.support, "policy support")
        lg = _vector(self.logits, "policy logits")
        if sup.shape[0] != lg.size or sup.shape[0] == 0:
            raise ConfigError("policy support and logits disagree on the level count")
        if len({row.tobytes() for row in sup}) != sup.shape[0]:
            raise ConfigError("policy support contains duplicate rows")
        cl = self.covariate_logits
        if cl is not None:
            cl = _matrix(cl, "covariate_logits")
            if cl.shape[0] != sup.shape[0]:
                raise ConfigError("covariate_logits rows must match the support")
        object.__setattr__(self, "support", sup)
        object.__setattr__(self, "logits", lg)
        object.__setattr__(self, "covariate_logits", cl)

    @property
    def n_levels(self) -> int:
        return self.support.shape[0]

    def probabilities(self, c) -> np.ndarray:
        eta = self.logits.copy()
        if self.covariate_logits is not None:
            eta = eta + self.covariate_logits @ np.asarray(c, dtype=float)
        eta -= eta.max()
        w = np.exp(eta)
        return w / w.sum()

    def sample(self, C: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """One support row per data row; one uniform per row, in row order."""
        n = C.shape[0]
        u = rng.random(n)
        idx = np.empty(n, dtype=int)
        if C.shape[1] == 0 or self.covariate_logits is None:
            cum = np.cumsum(self.probabilities(np.zeros(C.shape[1])))
            idx[:] = np.minimum(np.searchsorted(cum, u, side="right"), self.n_levels - 1)
        else:
            uniq, inv = np.unique(C, axis=0, return_inverse=True)
            for k, row in enumerate(uniq):
                mask = inv == k
                cum = np.cumsum(self.probabilities(row))
                idx[mask] = np.minimum(
                    np.searchsorted(cum, u[mask], side="right"), self.n_levels - 1
                )
        return self.support[idx]

    def as_dict(self) -> dict:
        out = {"support": self.support.tolist(), "logits": self.logits.tolist()}
        out["covariate_logits"] = (
            None if self.covariate_logits is None else self.covariate_logits.tolist()
        )
        return out


@dataclass(frozen=True)
class CovariateDist:
    support: tuple  # (n_profiles, n_covariates)
    probs: tuple    # (n_profiles,)

    def __post_init__(self):
        sup = _matrix(self.support, "covariate support")
        p = _vector(self.probs, "covariate probs")
        if sup.shape[0] != p.size or sup.shape[0] == 0:
            raise ConfigError("covariate support and probs disagree on the profile count")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
            raise ConfigError("covariate probs must be nonnegative and sum to 1")
        if len({row.tobytes() for row in sup}) != sup.shape[0]:
            raise ConfigError("covariate support contains duplicate rows")
        object.__setattr__(self, "support", sup)
        object.__setattr__(self, "probs", p / p.sum())

    @property
    def dimension(self) -> int:
        return self.support.shape[1]

    def sample_rows(self, n: int, rng: np.random.Generator) -> np.ndarray:
        cum = np.cumsum(self.probs)
        idx = np.minimum(
            np.searchsorted(cum, rng.random(n), side="right"), len(cum) - 1
        )
        return self.support[idx]

    def as_dict(self) -> dict:
        return {"support": self.support.tolist(), "probs": self.probs.tolist()}


# ---------------------------------------------------------------------------
# The assembled model.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScmSpec:
    mean: LinearMean | TabularMean
    noise: UniformBox | GaussianDiag
    coupling: Additive | NonMonotoneTest
    policy: TreatmentPolicy
    covariates: CovariateDist | None = None
    order: OrderSpec | None = None  # defaults to lexicographic over outcomes

    def __post_init__(self):
        m = self.mean
        if self.policy.support.shape[1] != m.n_treatments:
            raise ConfigError(
                f"policy support is {self.policy.support.shape[1]}-dimensional, "
                f"mechanism expects {m.n_treatments} treatment columns"
            )
        if self.covariates is None:
            if m.n_covariates != 0:
                raise ConfigError(
                    "mechanism uses covariates but no covariate distribution was given"
                )
            if self.policy.covariate_logits is not None:
                raise ConfigError("policy covariate_logits given without covariates")
        else:
            if self.covariates.dimension != m.n_covariates:
                raise ConfigError(
                    f"covariate distribution is {self.covariates.dimension}-dimensional, "
                    f"mechanism expects {m.n_covariates}"
                )
            cl = self.policy.covariate_logits
            if cl is not None and cl.shape[1] != m.n_covariates:
                raise ConfigError("covariate_logits columns must match the covariates")
        if isinstance(m, TabularMean):
            if not isinstance(self.noise, UniformBox) or self.noise.dimension != 1 \
                    or self.noise.lo[0] != 0.0 or self.noise.hi[0] != 1.0:
                raise ConfigError(
                    "a tabular mechanism needs scalar uniform_box noise on (0, 1)"
                )
            _match_rows(self.policy.support, m.x_levels, "policy support")
            if self.covariates is not None:
                _match_rows(self.covariates.support, m.c_levels, "covariate support")
        else:
            if self.noise.dimension != m.n_outcomes:
                raise ConfigError(
                    f"noise is {self.noise.dimension}-dimensional, "
                    f"outcomes are {m.n_outcomes}-dimensional"
                )
        order = self.order
        if order is not None and order.dimension != m.n_outcomes:
            raise ConfigError(
                f"order is over {order.dimension} components, "
                f"outcomes have {m.n_outcomes}"
            )
        if isinstance(m, TabularMean):
            eff = order if order is not None else lexicographic_default(m.n_outcomes)
            for k in range(m.n_states - 1):
                if compare(m.levels[k], m.levels[k + 1], eff) is not Ordering.LESS:
                    raise ConfigError(
                        f"tabular levels must ascend under the outcome order; "
                        f"level {k} does not precede level {k + 1}"
                    )

    @property
    def n_outcomes(self) -> int:
        return self.mean.n_outcomes

    @property
    def n_treatments(self) -> int:
        return self.mean.n_treatments

    @property
    def n_covariates(self) -> int:
        return self.mean.n_covariates

    @property
    def outcome_order(self) -> OrderSpec:
        return self.order if self.order is not None else lexicographic_default(self.n_outcomes)

    def outcomes(self, X: np.ndarray, C: np.ndarray, U: np.ndarray) -> np.ndarray:
        """Structural response for row-aligned treatments, covariates, latents."""
        X = np.asarray(X, dtype=float)
        C = np.asarray(C, dtype=float)
        U = np.asarray(U, dtype=float)
        if isinstance(self.mean, TabularMean):
            u_eff = self.coupling.u_transform(X, U[:, 0])
            return self.mean.outcome(X, C, u_eff)
        mu = self.mean.value(X, C)
        return mu + self.coupling.sign(X)[:, None] * U

    def as_dict(self) -> dict:
        return {
            "mean": self.mean.as_dict(),
            "noise": self.noise.as_dict(),
            "coupling": self.coupling.as_dict(),
            "policy": self.policy.as_dict(),
            "covariates": None if self.covariates is None else self.covariates.as_dict(),
            "order": None if self.order is None else self.order.as_dict(),
        }


def scm_from_dict(obj: dict) -> ScmSpec:
    if not isinstance(obj, dict):
        raise ConfigError(f"model spec must be a JSON object, got {type(obj).__name__}")
    extra = set(obj) - {"mean", "noise", "coupling", "policy", "covariates", "order"}
    if extra:
        raise ConfigError(f"unknown model spec fields: {sorted(extra)}")
    for key in ("mean", "noise", "policy"):
        if not isinstance(obj.get(key), dict):
            raise ConfigError(f"model spec needs a {key!r} object")

    mean_obj = dict(obj["mean"])
    mean_kind = mean_obj.pop("kind", None)
    if mean_kind == "linear":
        mean = LinearMean(
            treat_coef=mean_obj.pop("treat_coef", None),
            cov_coef=mean_obj.pop("cov_coef", None),
            intercept=mean_obj.pop("intercept", None),
        )
    elif mean_kind == "tabular":
        mean = TabularMean(
            x_levels=mean_obj.pop("x_levels", None),
            c_levels=mean_obj.pop("c_levels", []),
            cuts=mean_obj.pop("cuts", None),
            levels=mean_obj.pop("levels", None),
        )
    else:
        raise ConfigError(f"unknown mean kind {mean_kind!r}")
    if mean_obj:
        raise ConfigError(f"unknown mean fields: {sorted(mean_obj)}")

    noise_obj = dict(obj["noise"])
    noise_kind = noise_obj.pop("kind", None)
    if noise_kind == "uniform_box":
        noise = UniformBox(lo=noise_obj.pop("lo", None), hi=noise_obj.pop("hi", None))
    elif noise_kind == "gaussian_diag":
        noise = GaussianDiag(mean=noise_obj.pop("mean", None), sd=noise_obj.pop("sd", None))
    else:
        raise ConfigError(f"unknown noise kind {noise_kind!r}")
    if noise_obj:
        raise ConfigError(f"unknown noise fields: {sorted(noise_obj)}")

    coupling_obj = dict(obj.get("coupling") or {"kind": "additive"})
    coupling_kind = coupling_obj.pop("kind", None)
    if coupling_kind == "additive":
        coupling = Additive()
    elif coupling_kind == "nonmonotone_test":
        coupling = NonMonotoneTest(flip_at=coupling_obj.pop("flip_at", 0.5))
    else:
        raise ConfigError(f"unknown coupling kind {coupling_kind!r}")
    if coupling_obj:
        raise ConfigError(f"unknown coupling fields: {sorted(coupling_obj)}")

    pol = dict(obj["policy"])
    policy = TreatmentPolicy(
        support=pol.pop("support", None),
        logits=pol.pop("logits", None),
        covariate_logits=pol.pop("covariate_logits", None),
    )
    if pol:
        raise ConfigError(f"unknown policy fields: {sorted(pol)}")

    covariates = None
    if obj.get("covariates") is not None:
        cov = dict(obj["covariates"])
        covariates = CovariateDist(
            support=cov.pop("support", None), probs=cov.pop("probs", None)
        )
        if cov:
            raise ConfigError(f"unknown covariates fields: {sorted(cov)}")

    order = order_from_dict(obj["order"]) if obj.get("order") is not None else None
    return ScmSpec(
        mean=mean,
        noise=noise,
        coupling=coupling,
        policy=policy,
        covariates=covariates,
        order=order,
    )


def load_scm(path) -> ScmSpec:
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read model spec {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"model spec {path} is not valid JSON: {exc}") from exc
    return scm_from_dict(obj)


def simulate(spec: ScmSpec, n: int, seed: int = 0, *, return_latent: bool = False):
    """Draw an observational table (columns y*, x*, c*) from the model.

    Draw order is fixed (covariates, then policy, then latent noise) so a
    seed pins the table exactly. With return_latent=True also returns the
    latent matrix, row-aligned; tests use it to confirm the policy never
    peeks at the noise.
    """
    n = int(n)
    if n <= 0:
        raise ConfigError(f"need a positive sample size, got {n}")
    rng = derived_rng(seed, _STREAM_SIMULATE)
    if spec.covariates is None:
        C = np.zeros((n, 0))
    else:
        C = spec.covariates.sample_rows(n, rng)
    X = spec.policy.sample(C, rng)
    U = spec.noise.sample(n, rng)
    Y = spec.outcomes(X, C, U)

    variables = []
    columns: dict[str, np.ndarray] = {}
    for j in range(spec.n_outcomes):
        name = f"y{j + 1}"
        variables.append(Variable(name=name, role="outcome", position=j))
        columns[name] = Y[:, j].copy()
    for j in range(spec.n_treatments):
        name = f"x{j + 1}"
        variables.append(Variable(name=name, role="treatment"))
        columns[name] = X[:, j].copy()
    for j in range(spec.n_covariates):
        name = f"c{j + 1}"
        variables.append(Variable(name=name, role="covariate"))
        columns[name] = C[:, j].copy()
    table = DataTable(
        schema=TableSchema(variables=tuple(variables)),
        columns=columns,
        source="simulated",
    )
    return (table, U) if return_latent else table


# ---------------------------------------------------------------------------
# Counterfactual events and oracles.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CfClause:
    """One counterfactual requirement: Y(x) strictly before `below`,
    and/or at-or-after `at_least`, under the outcome order."""

    x: tuple
    below: tuple | None = None
    at_least: tuple | None = None

    def __post_init__(self):
        if self.below is None and self.at_least is None:
            raise ConfigError("a counterfactual clause needs at least one bound")
        object.__setattr__(self, "x", tuple(float(v) for v in self.x))
        for name in ("below", "at_least"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, tuple(float(t) for t in v))


@dataclass(frozen=True)
class CounterfactualEvent:
    clauses: tuple

    def __post_init__(self):
        object.__setattr__(self, "clauses", tuple(self.clauses))
        if not self.clauses:
            raise ConfigError("a counterfactual event needs at least one clause")


def flip_event(thresholds, treatments) -> CounterfactualEvent:
    """The chain event: each threshold is missed under its earlier treatment
    and reached under its later one. One threshold gives the plain flip."""
    ts = [tuple(float(v) for v in t) for t in thresholds]
    xs = [tuple(float(v) for v in x) for x in treatments]
    if len(xs) != len(ts) + 1 or not ts:
        raise ConfigError(
            f"a chain with {len(ts)} thresholds needs {len(ts) + 1} treatments"
        )
    clauses = []
    for i, y in enumerate(ts):
        clauses.append(CfClause(x=xs[i], below=y))
        clauses.append(CfClause(x=xs[i + 1], at_least=y))
    return CounterfactualEvent(clauses=tuple(clauses))


def _event_mask(spec: ScmSpec, event: CounterfactualEvent, c, U: np.ndarray) -> np.ndarray:
    order = spec.outcome_order
    n = U.shape[0]
    c_arr = np.asarray(c, dtype=float).ravel()
    C = np.broadcast_to(c_arr, (n, c_arr.size))
    ok = np.ones(n, dtype=bool)
    cf_cache: dict[bytes, np.ndarray] = {}
    for clause in event.clauses:
        x_arr = np.asarray(clause.x, dtype=float)
        key = x_arr.tobytes()
        if key not in cf_cache:
            X = np.broadcast_to(x_arr, (n, x_arr.size))
            cf_cache[key] = spec.outcomes(X, C, U)
        Yx = cf_cache[key]
        if clause.below is not None:
            ok &= indicator_below(Yx, clause.below, order)[0]
        if clause.at_least is not None:
            ok &= ~indicator_below(Yx, clause.at_least, order)[0]
    return ok


@dataclass(frozen=True)
class OracleResult:
    value: float
    std_error: float
    n_mc: int
    n_used: int
    exact: bool = False


def oracle_joint(
    spec: ScmSpec, event: CounterfactualEvent, c=(), n_mc: int = 200_000, seed: int = 0
) -> OracleResult:
    """P(event | C=c) by sharing one latent draw across all counterfactuals.

    This is the ground truth the identification formulas are supposed to
    recover: no CDFs, no modeling, just the mechanism run both ways.
    """
    n_mc = int(n_mc)
    if n_mc <= 0:
        raise ConfigError(f"need a positive Monte Carlo size, got {n_mc}")
    rng = derived_rng(seed, _STREAM_ORACLE_JOINT)
    U = spec.noise.sample(n_mc, rng)
    ok = _event_mask(spec, event, c, U)
    v = float(ok.mean())
    return OracleResult(
        value=v,
        std_error=float(np.sqrt(v * (1.0 - v) / n_mc)),
        n_mc=n_mc,
        n_used=n_mc,
        exact=False,
    )


def oracle_evidence(
    spec: ScmSpec,
    thresholds,
    treatments,
    evidence_y,
    evidence_x,
    c=(),
    n_mc: int = 200_000,
    seed: int = 0,
    atom_tol: float = 1e-9,
) -> OracleResult:
    """P(chain flips | observed Y(evidence_x) = evidence_y, C=c).

    Linear mechanisms are inverted exactly: the observation pins the latent
    to a point, so the answer is 0 or 1 with no Monte Carlo error. Tabular
    mechanisms get rejection sampling against the observed atom.
    """
    event = flip_event(thresholds, treatments)
    ev_y = np.asarray(evidence_y, dtype=float).ravel()
    ev_x = np.asarray(evidence_x, dtype=float).ravel()
    c_arr = np.asarray(c, dtype=float).ravel()
    if ev_y.size != spec.n_outcomes:
        raise ConfigError(
            f"evidence outcome has {ev_y.size} components, expected {spec.n_outcomes}"
        )

    if isinstance(spec.mean, LinearMean):
        mu = spec.mean.value(ev_x.reshape(1, -1), c_arr.reshape(1, -1))[0]
        s = spec.coupling.sign(ev_x.reshape(1, -1))[0]
        u_star = s * (ev_y - mu)
        if not spec.noise.contains(u_star):
            raise NoSupportError(
                "the observed outcome cannot occur under this mechanism "
                f"(implied latent {u_star.tolist()} is outside the noise support)"
            )
        ok = _event_mask(spec, event, c_arr, u_star.reshape(1, -1))
        return OracleResult(
            value=float(ok[0]), std_error=0.0, n_mc=1, n_used=1, exact=True
        )

    n_mc = int(n_mc)
    if n_mc <= 0:
        raise ConfigError(f"need a positive Monte Carlo size, got {n_mc}")
    rng = derived_rng(seed, _STREAM_ORACLE_EVIDENCE)
    U = spec.noise.sample(n_mc, rng)
    X = np.broadcast_to(ev_x, (n_mc, ev_x.size))
    C = np.broadcast_to(c_arr, (n_mc, c_arr.size))
    Yx = spec.outcomes(X, C, U)
    match = np.max(np.abs(Yx - ev_y), axis=1) <= atom_tol
    n_used = int(match.sum())
    if n_used == 0:
        raise NoSupportError(
            f"no draws produced the observed outcome {ev_y.tolist()} "
            f"under treatment {ev_x.tolist()}; it has no support there"
        )
    ok = _event_mask(spec, event, c_arr, U[match])
    v = float(ok.mean())
    return OracleResult(
        value=v,
        std_error=float(np.sqrt(v * (1.0 - v) / n_used)),
        n_mc=n_mc,
        n_used=n_used,
        exact=False,
    )


@dataclass(frozen=True)
class MonotonicityReport:
    max_violation: float
    std_error: float
    at_pair: tuple
    at_threshold: tuple
    n_mc: int


def check_monotonicity(
    spec: ScmSpec,
    thresholds,
    pairs=None,
    c=None,
    n_mc: int = 100_000,
    seed: int = 0,
) -> MonotonicityReport:
    """Largest two-sided counterfactual flip over a probe grid.

    For treatments xa, xb and threshold y, a common-latent monotone
    mechanism sends every latent the same way, so at most one of
    P(Y(xa) before y, Y(xb) at-or-after y) and its mirror is positive.
    The reported violation is the smaller of the two, maximized over the
    grid; a mechanism that keeps it at zero (up to Monte Carlo noise) is
    consistent with the assumption, one that pushes it well above zero is
    caught red-handed.
    """
    order = spec.outcome_order
    if pairs is None:
        sup = spec.policy.support
        pairs = [
            (tuple(sup[i]), tuple(sup[j]))
            for i, j in combinations(range(sup.shape[0]), 2)
        ]
    if not pairs:
        raise ConfigError("need at least one treatment pair to probe")
    thresholds = [tuple(float(v) for v in t) for t in thresholds]
    if not thresholds:
        raise ConfigError("need at least one threshold to probe")
    if c is None:
        c = () if spec.covariates is None else tuple(spec.covariates.support[0])
    c_arr = np.asarray(c, dtype=float).ravel()

    n_mc = int(n_mc)
    rng = derived_rng(seed, _STREAM_MONOTONICITY)
    U = spec.noise.sample(n_mc, rng)
    C = np.broadcast_to(c_arr, (n_mc, c_arr.size))

    distinct = {}
    for xa, xb in pairs:
        for x in (xa, xb):
            key = np.asarray(x, dtype=float).tobytes()
            if key not in distinct:
                X = np.broadcast_to(np.asarray(x, dtype=float), (n_mc, len(x)))
                distinct[key] = spec.outcomes(X, C, U)

    strict_cache: dict[tuple, np.ndarray] = {}

    def strict(x, y):
        key = (np.asarray(x, dtype=float).tobytes(), np.asarray(y, dtype=float).tobytes())
        if key not in strict_cache:
            strict_cache[key] = indicator_below(distinct[key[0]], y, order)[0]
        return strict_cache[key]

    best = (-1.0, 0.0, pairs[0], thresholds[0])
    for xa, xb in pairs:
        for y in thresholds:
            sa = strict(xa, y)
            sb = strict(xb, y)
            v1 = float(np.mean(sa & ~sb))
            v2 = float(np.mean(sb & ~sa))
            v = min(v1, v2)
            if v > best[0]:
                best = (v, float(np.sqrt(v * (1.0 - v) / n_mc)), (xa, xb), y)
    return MonotonicityReport(
        max_violation=best[0],
        std_error=best[1],
        at_pair=best[2],
        at_threshold=best[3],
        n_mc=n_mc,
    )


def _sorted_rows(rows: np.ndarray, order: OrderSpec) -> np.ndarray:
    if isinstance(order, ScalarScore):
        scores = rows @ np.asarray(order.weights, dtype=float)
        return rows[np.argsort(scores, kind="stable")]
    assert isinstance(order, Lexicographic)
    keys = []
    for pos, direction in zip(reversed(order.priority), reversed(order.direction)):
        col = rows[:, pos]
        keys.append(col if direction == "asc" else -col)
    return rows[np.lexsort(tuple(keys))]


def monotonicity_probe(
    spec: ScmSpec, n_thresholds: int = 50, n_pilot: int = 4000, seed: int = 0
):
    """Thresholds and treatment pairs worth probing: evenly spaced order
    statistics of pilot counterfactual outcomes, against every support pair."""
    if n_thresholds < 1 or n_pilot < n_thresholds:
        raise ConfigError("need n_pilot >= n_thresholds >= 1")
    order = spec.outcome_order
    c = () if spec.covariates is None else tuple(spec.covariates.support[0])
    c_arr = np.asarray(c, dtype=float).ravel()
    rng = derived_rng(seed, _STREAM_PROBE)
    U = spec.noise.sample(n_pilot, rng)
    C = np.broadcast_to(c_arr, (n_pilot, c_arr.size))
    blocks = []
    for x in spec.policy.support:
        X = np.broadcast_to(x, (n_pilot, x.size))
        blocks.append(spec.outcomes(X, C, U))
    pool = _sorted_rows(np.vstack(blocks), order)
    picks = np.linspace(0, pool.shape[0] - 1, n_thresholds).round().astype(int)
    thresholds = [tuple(row) for row in pool[picks]]
    sup = spec.policy.support
    pairs = [
        (tuple(sup[i]), tuple(sup[j])) for i, j in combinations(range(sup.shape[0]), 2)
    ]
    return thresholds, pairs


@dataclass(frozen=True)
class TrajectorySet:
    x_grid: np.ndarray     # (n_grid, n_treatments)
    u_values: np.ndarray   # (n_u, noise dimension)
    outcomes: np.ndarray   # (n_u, n_grid, n_outcomes)
    crossing_count: int


def export_trajectories(
    spec: ScmSpec, x_grid, c=None, n_u: int = 20, seed: int = 0
) -> TrajectorySet:
    """Outcome curves x -> Y(x; u) for a handful of latent draws.

    Under a common-latent monotone mechanism the curves never cross: two
    latents keep their outcome ranking across the whole treatment grid.
    crossing_count totals the rank flips over all curve pairs (ties are
    skipped), so monotone worlds report 0 and the flip construction shows
    one crossing per pair.
    """
    grid = np.atleast_2d(np.asarray(x_grid, dtype=float))
    if grid.shape[1] != spec.n_treatments or grid.shape[0] < 2:
        raise ConfigError(
            f"need a grid of at least 2 treatment rows with {spec.n_treatments} columns"
        )
    n_u = int(n_u)
    if n_u < 2:
        raise ConfigError("need at least two latent draws to compare")
    if c is None:
        c = () if spec.covariates is None else tuple(spec.covariates.support[0])
    c_arr = np.asarray(c, dtype=float).ravel()
    order = spec.outcome_order

    rng = derived_rng(seed, _STREAM_TRAJECTORIES)
    U = spec.noise.sample(n_u, rng)
    C = np.broadcast_to(c_arr, (n_u, c_arr.size))
    curves = np.empty((n_u, grid.shape[0], spec.n_outcomes))
    for g in range(grid.shape[0]):
        X = np.broadcast_to(grid[g], (n_u, grid.shape[1]))
        curves[:, g, :] = spec.outcomes(X, C, U)

    crossings = 0
    for i, j in combinations(range(n_u), 2):
        signs = []
        for g in range(grid.shape[0]):
            s = compare(curves[i, g], curves[j, g], order)
            if s is not Ordering.EQUAL:
                signs.append(int(s))
        crossings += sum(
            1 for k in range(1, len(signs)) if signs[k] != signs[k - 1]
        )
    return TrajectorySet(
        x_grid=grid, u_values=U, outcomes=curves, crossing_count=crossings
    )
