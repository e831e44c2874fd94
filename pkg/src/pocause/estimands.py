"""Probabilities of causation for threshold events on ordered outcomes.

The estimands answer "did setting the treatment to x1 rather than x0 push
the outcome from below the threshold y to at-or-above it?" for a unit with
covariates c:

* pns: probability the treatment is both necessary and sufficient,
  P(Y(x0) below y, Y(x1) at-or-above y | c).
* pn: probability of necessity among units that were treated and reached
  the threshold.
* ps: probability of sufficiency among untreated units that fell short.
* evidence variants: the same, further conditioned on having actually
  observed outcome y' under treatment x'.
* multi variants: a chain x_0, ..., x_P with a threshold y_p between each
  consecutive pair, all required to flip jointly.
* marginal: pns averaged over the empirical covariate distribution.

Everything is computed from conditional CDF values at the thresholds (the
RhoPair numbers), which is what makes these identifiable from observational
data in the first place: under conditional exogeneity plus a monotone
structural response, the joint law of the counterfactuals collapses onto
those CDFs. The formulas here are exact under those assumptions; checking
the assumptions is the job of the scm module's oracles.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .cdf import EmpiricalCdf, LogisticCdf, RhoPair
from .dataset import DataTable
from .errors import ConfigError, NotIdentifiedError
from .ordering import OrderSpec, lexicographic_default, order_from_dict

QUERY_KINDS = (
    "pns",
    "pn",
    "ps",
    "pns_evidence",
    "pns_multi",
    "pns_multi_evidence",
    "marginal_pns",
)

_SINGLE_KINDS = ("pns", "pn", "ps", "pns_evidence", "marginal_pns")
_EVIDENCE_KINDS = ("pns_evidence", "pns_multi_evidence")

DEFAULT_ATOM_TOL = 1e-9


def _prob(v, name: str) -> float:
    x = float(v)
    if not np.isfinite(x) or x < 0.0 or x > 1.0:
        raise ConfigError(f"{name} must be a probability in [0, 1], got {v!r}")
    return x


# ---------------------------------------------------------------------------
# Point formulas. Pure functions of CDF values; no data in sight.
# ---------------------------------------------------------------------------


def pns_point(rho0: float, rho1: float) -> float:
    """max(rho0 - rho1, 0): mass the treatment shift moves across y."""
    r0 = _prob(rho0, "rho0")
    r1 = _prob(rho1, "rho1")
    return max(r0 - r1, 0.0)


def pn_point(rho0: float, rho1: float) -> float:
    r0 = _prob(rho0, "rho0")
    r1 = _prob(rho1, "rho1")
    if r1 == 1.0:
        raise NotIdentifiedError(
            "pn denominator 1 - rho1 is zero: under x1 the outcome never "
            "reaches the threshold, so necessity is conditioned on a null event"
        )
    return max((r0 - r1) / (1.0 - r1), 0.0)


def ps_point(rho0: float, rho1: float) -> float:
    r0 = _prob(rho0, "rho0")
    r1 = _prob(rho1, "rho1")
    if r0 == 0.0:
        raise NotIdentifiedError(
            "ps denominator rho0 is zero: under x0 the outcome always reaches "
            "the threshold, so sufficiency is conditioned on a null event"
        )
    return max((r0 - r1) / r0, 0.0)


def binary_poc(p_y1_given_x1: float, p_y1_given_x0: float) -> tuple[float, float, float]:
    """The classic binary-outcome special case, as (pns, pn, ps).

    p_y1_given_x1 and p_y1_given_x0 are success probabilities under each
    treatment arm. Equivalent to the threshold formulas with
    rho = 1 - P(success): kept separate so the two routes can be checked
    against each other.
    """
    p11 = _prob(p_y1_given_x1, "p_y1_given_x1")
    p10 = _prob(p_y1_given_x0, "p_y1_given_x0")
    pns = max(p11 - p10, 0.0)
    if p11 == 0.0:
        raise NotIdentifiedError(
            "pn denominator P(y1 | x1) is zero: success never occurs under x1"
        )
    if p10 == 1.0:
        raise NotIdentifiedError(
            "ps denominator P(y0 | x0) is zero: success always occurs under x0"
        )
    return pns, pns / p11, pns / (1.0 - p10)


def pns_evidence_point(
    rho0: float,
    rho1: float,
    evidence_strict: float,
    evidence_weak: float,
    *,
    atom_tol: float = DEFAULT_ATOM_TOL,
) -> tuple[float, str]:
    """pns further conditioned on an observed outcome, as (value, case).

    evidence_strict / evidence_weak are the CDF pair at the observed
    outcome y' under the observed treatment x'. When the observation sits
    on an atom (weak - strict > atom_tol, case "evidence_case_a") the
    answer is a ratio of interval overlaps; when it has zero mass (case
    "evidence_case_b") it degenerates to a 0/1 indicator of whether the
    evidence pins the latent state inside the flip interval.
    """
    r0 = _prob(rho0, "rho0")
    r1 = _prob(rho1, "rho1")
    ev_s = _prob(evidence_strict, "evidence_strict")
    ev_w = _prob(evidence_weak, "evidence_weak")
    if ev_s > ev_w:
        raise ConfigError(
            f"evidence strict CDF {ev_s} exceeds weak CDF {ev_w}; "
            "the estimator should have clipped this"
        )
    if float(atom_tol) < 0:
        raise ConfigError(f"atom_tol must be >= 0, got {atom_tol}")
    beta = ev_w - ev_s
    if beta > atom_tol:
        alpha = min(r0, ev_w) - max(r1, ev_s)
        return max(alpha / beta, 0.0), "evidence_case_a"
    return (1.0 if (r1 <= ev_s < r0) else 0.0), "evidence_case_b"


def _multi_vectors(rho_upper, rho_lower) -> tuple[np.ndarray, np.ndarray]:
    up = np.asarray(rho_upper, dtype=float).ravel()
    lo = np.asarray(rho_lower, dtype=float).ravel()
    if up.size == 0 or up.size != lo.size:
        raise ConfigError(
            f"need equal-length nonempty CDF vectors, got {up.size} and {lo.size}"
        )
    for v, name in ((up, "rho_upper"), (lo, "rho_lower")):
        if not np.all(np.isfinite(v)) or np.any(v < 0) or np.any(v > 1):
            raise ConfigError(f"{name} entries must be probabilities in [0, 1]")
    return up, lo


def pns_multi_point(rho_upper, rho_lower) -> float:
    """Joint flip probability along a treatment chain.

    rho_upper[p] is the CDF of threshold y_p under the chain's previous
    treatment x_{p-1}; rho_lower[p] is the CDF of y_p under x_p. Each step
    confines the latent state to [rho_lower[p], rho_upper[p]); the chain
    succeeds on the intersection.
    """
    up, lo = _multi_vectors(rho_upper, rho_lower)
    return max(float(np.min(up)) - float(np.max(lo)), 0.0)


def pns_multi_evidence_point(
    rho_upper,
    rho_lower,
    evidence_strict: float,
    evidence_weak: float,
    *,
    atom_tol: float = DEFAULT_ATOM_TOL,
) -> tuple[float, str]:
    """Chain flip probability given an observed outcome, as (value, case)."""
    up, lo = _multi_vectors(rho_upper, rho_lower)
    ev_s = _prob(evidence_strict, "evidence_strict")
    ev_w = _prob(evidence_weak, "evidence_weak")
    if ev_s > ev_w:
        raise ConfigError(
            f"evidence strict CDF {ev_s} exceeds weak CDF {ev_w}; "
            "the estimator should have clipped this"
        )
    if float(atom_tol) < 0:
        raise ConfigError(f"atom_tol must be >= 0, got {atom_tol}")
    hi = float(np.min(up))
    lo_max = float(np.max(lo))
    beta = ev_w - ev_s
    if beta > atom_tol:
        gamma = min(hi, ev_w) - max(lo_max, ev_s)
        return max(gamma / beta, 0.0), "evidence_case_a"
    return (1.0 if (lo_max <= ev_s < hi) else 0.0), "evidence_case_b"


# ---------------------------------------------------------------------------
# Queries and evaluation against a table.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Evidence:
    y: tuple[float, ...]
    x: tuple[float, ...]


@dataclass(frozen=True)
class CovariateRow:
    """Covariates to be read from a data row at evaluation time."""

    row: int


def _vec(v, name: str) -> tuple[float, ...]:
    try:
        out = tuple(float(x) for x in v)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a list of numbers, got {v!r}") from None
    if not out or not all(np.isfinite(out)):
        raise ConfigError(f"{name} must be a nonempty finite vector, got {v!r}")
    return out


@dataclass(frozen=True)
class PoCQuery:
    """A fully specified causal question.

    thresholds holds one vector for the single-threshold kinds and the
    chain y_1..y_P for the multi kinds; treatments holds (x0, x1) or the
    chain x_0..x_P. covariates is the conditioning vector c, a CovariateRow
    reference, or None (marginal queries, or tables with no covariates).
    order defaults to lexicographic ascending on outcome positions.
    """

    kind: str
    thresholds: tuple[tuple[float, ...], ...]
    treatments: tuple[tuple[float, ...], ...]
    covariates: tuple[float, ...] | CovariateRow | None = None
    evidence: Evidence | None = None
    order: OrderSpec | None = None

    def __post_init__(self):
        if self.kind not in QUERY_KINDS:
            raise ConfigError(f"unknown query kind {self.kind!r}")
        if self.kind in _SINGLE_KINDS:
            if len(self.thresholds) != 1:
                raise ConfigError(f"{self.kind} takes exactly one threshold")
            if len(self.treatments) != 2:
                raise ConfigError(f"{self.kind} takes exactly two treatments (x0, x1)")
        else:
            p = len(self.thresholds)
            if p < 1:
                raise ConfigError("multi queries need at least one threshold")
            if len(self.treatments) != p + 1:
                raise ConfigError(
                    f"a chain with {p} thresholds needs {p + 1} treatments, "
                    f"got {len(self.treatments)}"
                )
        if (self.evidence is None) == (self.kind in _EVIDENCE_KINDS):
            need = "requires" if self.kind in _EVIDENCE_KINDS else "does not take"
            raise ConfigError(f"{self.kind} {need} an evidence block")
        if self.kind == "marginal_pns" and isinstance(self.covariates, (tuple, CovariateRow)):
            raise ConfigError("marginal_pns averages over covariates; drop the c field")


def load_query(path) -> PoCQuery:
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read query file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"query file {path} is not valid JSON: {exc}") from exc
    return query_from_dict(obj)


def query_from_dict(obj: dict) -> PoCQuery:
    """Parse the JSON form of a query.

    Single-threshold kinds use "threshold", "x0", "x1"; multi kinds use
    "thresholds" and "treatments" lists. "c" is a number list or
    {"row": k}. Evidence kinds add {"evidence": {"y": [...], "x": [...]}}.
    An "order" object is optional.
    """
    if not isinstance(obj, dict):
        raise ConfigError(f"query must be a JSON object, got {type(obj).__name__}")
    kind = obj.get("kind")
    if kind not in QUERY_KINDS:
        raise ConfigError(f"unknown query kind {kind!r}")
    known = {"kind", "threshold", "thresholds", "x0", "x1", "treatments", "c",
             "evidence", "order"}
    extra = set(obj) - known
    if extra:
        raise ConfigError(f"unknown query fields: {sorted(extra)}")

    if kind in _SINGLE_KINDS:
        for key in ("threshold", "x0", "x1"):
            if key not in obj:
                raise ConfigError(f"{kind} query needs {key!r}")
        thresholds = (_vec(obj["threshold"], "threshold"),)
        treatments = (_vec(obj["x0"], "x0"), _vec(obj["x1"], "x1"))
    else:
        for key in ("thresholds", "treatments"):
            if key not in obj:
                raise ConfigError(f"{kind} query needs {key!r}")
        thresholds = tuple(
            _vec(t, f"thresholds[{i}]") for i, t in enumerate(obj["thresholds"])
        )
        treatments = tuple(
            _vec(t, f"treatments[{i}]") for i, t in enumerate(obj["treatments"])
        )

    covariates = None
    if "c" in obj and obj["c"] is not None:
        c = obj["c"]
        if isinstance(c, dict):
            if set(c) != {"row"}:
                raise ConfigError('covariate reference must be {"row": k}')
            covariates = CovariateRow(row=int(c["row"]))
        else:
            covariates = _vec(c, "c")

    evidence = None
    if obj.get("evidence") is not None:
        ev = obj["evidence"]
        if not isinstance(ev, dict) or set(ev) != {"y", "x"}:
            raise ConfigError('evidence must be {"y": [...], "x": [...]}')
        evidence = Evidence(y=_vec(ev["y"], "evidence.y"), x=_vec(ev["x"], "evidence.x"))

    order = order_from_dict(obj["order"]) if obj.get("order") is not None else None
    return PoCQuery(
        kind=kind,
        thresholds=thresholds,
        treatments=treatments,
        covariates=covariates,
        evidence=evidence,
        order=order,
    )


def query_as_dict(query: PoCQuery) -> dict:
    out: dict = {"kind": query.kind}
    if query.kind in _SINGLE_KINDS:
        out["threshold"] = list(query.thresholds[0])
        out["x0"] = list(query.treatments[0])
        out["x1"] = list(query.treatments[1])
    else:
        out["thresholds"] = [list(t) for t in query.thresholds]
        out["treatments"] = [list(t) for t in query.treatments]
    if isinstance(query.covariates, CovariateRow):
        out["c"] = {"row": query.covariates.row}
    elif query.covariates is not None:
        out["c"] = list(query.covariates)
    if query.evidence is not None:
        out["evidence"] = {"y": list(query.evidence.y), "x": list(query.evidence.x)}
    if query.order is not None:
        out["order"] = query.order.as_dict()
    return out


@dataclass(frozen=True)
class EstimatorConfig:
    method: str = "logistic"  # "logistic" | "empirical"
    ridge: float = 0.0
    atom_tol: float = DEFAULT_ATOM_TOL

    def __post_init__(self):
        if self.method not in ("logistic", "empirical"):
            raise ConfigError(f"unknown estimator method {self.method!r}")
        if self.ridge < 0:
            raise ConfigError(f"ridge must be >= 0, got {self.ridge}")
        if self.atom_tol < 0:
            raise ConfigError(f"atom_tol must be >= 0, got {self.atom_tol}")


@dataclass(frozen=True)
class PoCEstimate:
    value: float
    kind: str
    case: str  # "closed_form" | "evidence_case_a" | "evidence_case_b"
    clamped_at_zero: bool
    components: dict[str, float] = field(default_factory=dict)
    diagnostics: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "kind": self.kind,
            "case": self.case,
            "clamped_at_zero": self.clamped_at_zero,
            "components": dict(self.components),
            "diagnostics": list(self.diagnostics),
        }


def build_estimator(table: DataTable, order: OrderSpec, config: EstimatorConfig):
    if config.method == "empirical":
        return EmpiricalCdf(table, order)
    return LogisticCdf(table, order, ridge=config.ridge)


def _resolve_covariates(table: DataTable, query: PoCQuery) -> tuple[float, ...]:
    n_c = len(table.schema.covariate_names)
    cov = query.covariates
    if isinstance(cov, CovariateRow):
        if not (0 <= cov.row < table.n_rows):
            raise ConfigError(
                f"covariate row {cov.row} out of range for a {table.n_rows}-row table"
            )
        return tuple(float(v) for v in table.covariates()[cov.row])
    if cov is None:
        if n_c == 0:
            return ()
        raise ConfigError(
            f"query needs a covariate vector 'c' ({n_c} values) for this table"
        )
    if len(cov) != n_c:
        raise ConfigError(f"query c has {len(cov)} values, table has {n_c} covariates")
    return cov


def _gather(estimator, query: PoCQuery, c) -> tuple[dict[str, RhoPair], list[str]]:
    """Pull every CDF pair the query needs, named for the report."""
    pairs: dict[str, RhoPair] = {}
    if query.kind in _SINGLE_KINDS:
        y = query.thresholds[0]
        pairs["rho_y_x0"] = estimator.rho_pair(y, query.treatments[0], c)
        pairs["rho_y_x1"] = estimator.rho_pair(y, query.treatments[1], c)
    else:
        for p, y in enumerate(query.thresholds, start=1):
            pairs[f"rho_y{p}_x{p - 1}"] = estimator.rho_pair(
                y, query.treatments[p - 1], c
            )
            pairs[f"rho_y{p}_x{p}"] = estimator.rho_pair(y, query.treatments[p], c)
    if query.evidence is not None:
        pairs["rho_ev"] = estimator.rho_pair(query.evidence.y, query.evidence.x, c)
    notes = list(getattr(estimator, "diagnostics", ()))
    clips = getattr(estimator, "clip_count", 0)
    if clips:
        notes.append(f"strict/weak CDF order violated and clipped {clips} time(s)")
    return pairs, notes


def evaluate_query(
    table: DataTable,
    query: PoCQuery,
    config: EstimatorConfig | None = None,
) -> PoCEstimate:
    """Answer a query against a loaded table."""
    config = config or EstimatorConfig()
    n_outcomes = len(table.schema.outcome_names)
    if n_outcomes == 0:
        raise ConfigError("table has no outcome columns")
    order = query.order if query.order is not None else lexicographic_default(n_outcomes)

    if query.kind == "marginal_pns":
        return marginal_pns(table, query, config)

    c = _resolve_covariates(table, query)
    estimator = build_estimator(table, order, config)
    pairs, notes = _gather(estimator, query, c)
    components = {name: pair.strict for name, pair in pairs.items()}

    if query.kind in ("pns", "pn", "ps"):
        r0 = pairs["rho_y_x0"].strict
        r1 = pairs["rho_y_x1"].strict
        fn = {"pns": pns_point, "pn": pn_point, "ps": ps_point}[query.kind]
        value = fn(r0, r1)
        return PoCEstimate(
            value=value,
            kind=query.kind,
            case="closed_form",
            clamped_at_zero=bool(r0 - r1 < 0),
            components=components,
            diagnostics=tuple(notes),
        )

    if query.kind == "pns_evidence":
        ev = pairs["rho_ev"]
        components["rho_ev_weak"] = ev.weak
        value, case = pns_evidence_point(
            pairs["rho_y_x0"].strict,
            pairs["rho_y_x1"].strict,
            ev.strict,
            ev.weak,
            atom_tol=config.atom_tol,
        )
        clamped = case == "evidence_case_a" and value == 0.0
        return PoCEstimate(
            value=value,
            kind=query.kind,
            case=case,
            clamped_at_zero=clamped,
            components=components,
            diagnostics=tuple(notes),
        )

    p_count = len(query.thresholds)
    upper = [pairs[f"rho_y{p}_x{p - 1}"].strict for p in range(1, p_count + 1)]
    lower = [pairs[f"rho_y{p}_x{p}"].strict for p in range(1, p_count + 1)]

    if query.kind == "pns_multi":
        value = pns_multi_point(upper, lower)
        return PoCEstimate(
            value=value,
            kind=query.kind,
            case="closed_form",
            clamped_at_zero=bool(min(upper) - max(lower) < 0),
            components=components,
            diagnostics=tuple(notes),
        )

    ev = pairs["rho_ev"]
    components["rho_ev_weak"] = ev.weak
    value, case = pns_multi_evidence_point(
        upper, lower, ev.strict, ev.weak, atom_tol=config.atom_tol
    )
    clamped = case == "evidence_case_a" and value == 0.0
    return PoCEstimate(
        value=value,
        kind=query.kind,
        case=case,
        clamped_at_zero=clamped,
        components=components,
        diagnostics=tuple(notes),
    )


def marginal_pns(
    table: DataTable,
    query: PoCQuery,
    config: EstimatorConfig | None = None,
) -> PoCEstimate:
    """pns averaged over the table's empirical covariate distribution.

    Uses one estimator for all covariate profiles, weighting each distinct
    profile by its frequency. Stratum failures from the empirical estimator
    propagate; a profile you observed but cannot evaluate is a real answer.
    """
    config = config or EstimatorConfig()
    if query.kind != "marginal_pns":
        raise ConfigError(f"marginal_pns got a {query.kind!r} query")
    n_outcomes = len(table.schema.outcome_names)
    order = query.order if query.order is not None else lexicographic_default(n_outcomes)
    estimator = build_estimator(table, order, config)
    y = query.thresholds[0]
    x0, x1 = query.treatments

    cov = table.covariates()
    if cov.shape[1] == 0:
        profiles = [()]
        weights = np.array([1.0])
    else:
        uniq, counts = np.unique(cov, axis=0, return_counts=True)
        profiles = [tuple(row) for row in uniq]
        weights = counts / counts.sum()

    total = 0.0
    clamped_profiles = 0
    for profile, w in zip(profiles, weights):
        r0 = estimator.rho_pair(y, x0, profile).strict
        r1 = estimator.rho_pair(y, x1, profile).strict
        if r0 - r1 < 0:
            clamped_profiles += 1
        total += w * pns_point(r0, r1)

    notes = list(getattr(estimator, "diagnostics", ()))
    clips = getattr(estimator, "clip_count", 0)
    if clips:
        notes.append(f"strict/weak CDF order violated and clipped {clips} time(s)")
    return PoCEstimate(
        value=float(total),
        kind="marginal_pns",
        case="closed_form",
        clamped_at_zero=clamped_profiles == len(profiles),
        components={
            "n_profiles": float(len(profiles)),
            "clamped_profiles": float(clamped_profiles),
        },
        diagnostics=tuple(notes),
    )
