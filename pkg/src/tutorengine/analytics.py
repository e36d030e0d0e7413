"""Item-response analytics: descriptives, odds-ratio effect sizes, and a
fixed-effects logistic fitter.

Odds ratios convert to Cohen's d on two scales: the default divides
ln(OR) by 1.6 (the logistic-to-normal scale constant that matches the
published effect-size tables this engine reproduces); the alternative is
the textbook ln(OR) * sqrt(3)/pi. Random-effects modeling is out of
scope here; export the records and fit GLMMs in external tooling.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import IoFailure, NonPositiveOR, Separation, SingularDesign

CONDITIONS = ("Class", "Human", "ITS")
TESTS = ("Pre", "Post", "Delayed")

OR_TO_D_PAPER_SCALE = 1.6
OR_TO_D_SQRT3_PI = math.sqrt(3.0) / math.pi

GRADIENT_TOL = 1e-8
MAX_ITERATIONS = 100
SEPARATION_COEF_LIMIT = 30.0

CSV_HEADER = ["participant", "item", "condition", "test", "correct", "week", "cycle"]


@dataclass(frozen=True)
class ItemResponseRecord:
    participant: str
    item: str
    condition: str  # Class | Human | ITS
    test: str       # Pre | Post | Delayed
    correct: bool
    week: int = 0
    cycle: int = 0
    # False when the item was left unanswered (scored incorrect, flagged).
    answered: bool = True

    def __post_init__(self):
        assert self.condition in CONDITIONS, self.condition
        assert self.test in TESTS, self.test
        assert self.week >= 0


@dataclass(frozen=True)
class EffectSize:
    odds_ratio: float
    cohens_d: float


@dataclass(frozen=True)
class LogisticFit:
    coefficients: dict[str, float]
    log_likelihood: float
    converged: bool
    iterations: int


def descriptives(records: list[ItemResponseRecord]) -> dict[tuple[str, str], tuple[float, int]]:
    """(condition, test) -> (proportion correct, n); empty cells absent."""
    cells: dict[tuple[str, str], list[int]] = {}
    for r in records:
        cells.setdefault((r.condition, r.test), []).append(1 if r.correct else 0)
    return {key: (sum(vals) / len(vals), len(vals)) for key, vals in cells.items()}


def or_to_d(odds_ratio: float, mode: str = "paper") -> float:
    """Convert an odds ratio to Cohen's d."""
    if odds_ratio <= 0:
        raise NonPositiveOR(f"odds ratio must be positive, got {odds_ratio}")
    if mode == "paper":
        return math.log(odds_ratio) / OR_TO_D_PAPER_SCALE
    if mode == "sqrt3pi":
        return math.log(odds_ratio) * OR_TO_D_SQRT3_PI
    raise ValueError(f"unknown mode {mode!r}")


def effect_size(odds_ratio: float, mode: str = "paper") -> EffectSize:
    return EffectSize(odds_ratio=odds_ratio, cohens_d=or_to_d(odds_ratio, mode))


# ---------------------------------------------------------------------------
# fixed-effects logistic regression (IRLS)
# ---------------------------------------------------------------------------

def _design_terms(design: str) -> tuple[bool, bool, bool]:
    """Returns (condition main, test main, interaction) flags."""
    design = design.replace(" ", "")
    if design in ("1", ""):
        return False, False, False
    if design == "condition":
        return True, False, False
    if design == "test":
        return False, True, False
    if design == "condition+test":
        return True, True, False
    if design in ("condition*test", "test*condition"):
        return True, True, True
    raise ValueError(f"unsupported design {design!r}")


def design_matrix(records: list[ItemResponseRecord], design: str = "condition*test"):
    """Treatment coding with Class/Pre as the reference cell.

    Dummy columns exist only for non-reference levels (and interaction
    cells) actually present in the records, so partial datasets stay
    full rank.
    """
    with_condition, with_test, with_interaction = _design_terms(design)
    seen_conditions = {r.condition for r in records}
    seen_tests = {r.test for r in records}
    seen_cells = {(r.condition, r.test) for r in records}
    cond_levels = [c for c in CONDITIONS[1:] if c in seen_conditions]
    test_levels = [t for t in TESTS[1:] if t in seen_tests]
    cells = [(c, t) for c in cond_levels for t in test_levels if (c, t) in seen_cells]

    names = ["(Intercept)"]
    if with_condition:
        names += [f"condition[{c}]" for c in cond_levels]
    if with_test:
        names += [f"test[{t}]" for t in test_levels]
    if with_interaction:
        names += [f"condition[{c}]:test[{t}]" for c, t in cells]

    rows = []
    y = []
    for r in records:
        row = [1.0]
        if with_condition:
            row += [1.0 if r.condition == c else 0.0 for c in cond_levels]
        if with_test:
            row += [1.0 if r.test == t else 0.0 for t in test_levels]
        if with_interaction:
            row += [1.0 if (r.condition, r.test) == cell else 0.0 for cell in cells]
        rows.append(row)
        y.append(1.0 if r.correct else 0.0)
    return np.array(rows), np.array(y), names


def _log_likelihood(eta: np.ndarray, y: np.ndarray) -> float:
    # log L = sum y*eta - log(1 + e^eta), computed stably
    return float(np.sum(y * eta - np.logaddexp(0.0, eta)))


def fit_logistic(
    records: list[ItemResponseRecord],
    design: str = "condition*test",
) -> LogisticFit:
    """Maximum-likelihood fit by iteratively reweighted least squares.

    Stops when the gradient max-norm falls to 1e-8 (converged) or after
    100 iterations (converged False, typical of quasi-separated data).
    Step-halving keeps the log-likelihood nondecreasing. A coefficient
    max-norm above 30 raises Separation; a singular weighted normal
    matrix raises SingularDesign.
    """
    X, y, names = design_matrix(records, design)
    if len(records) == 0:
        raise SingularDesign("no records to fit")
    beta = np.zeros(X.shape[1])
    eta = X @ beta
    ll = _log_likelihood(eta, y)
    converged = False
    iterations = 0

    for iterations in range(1, MAX_ITERATIONS + 1):
        mu = 1.0 / (1.0 + np.exp(-eta))
        gradient = X.T @ (y - mu)
        if float(np.max(np.abs(gradient))) <= GRADIENT_TOL:
            converged = True
            iterations -= 1
            break
        w = np.clip(mu * (1.0 - mu), 1e-12, None)
        xtwx = X.T @ (X * w[:, None])
        try:
            delta = np.linalg.solve(xtwx, gradient)
        except np.linalg.LinAlgError as exc:
            raise SingularDesign(f"weighted normal matrix is singular: {exc}") from exc
        if not np.all(np.isfinite(delta)):
            raise SingularDesign("non-finite update step")

        # step-halving: never accept a step that lowers the log-likelihood
        step = 1.0
        for _ in range(40):
            candidate = beta + step * delta
            candidate_ll = _log_likelihood(X @ candidate, y)
            if candidate_ll >= ll - 1e-12:
                break
            step *= 0.5
        beta = beta + step * delta
        eta = X @ beta
        ll = _log_likelihood(eta, y)

        if float(np.max(np.abs(beta))) > SEPARATION_COEF_LIMIT:
            raise Separation(
                f"coefficients diverging (max |beta| > {SEPARATION_COEF_LIMIT}); "
                "data are likely separated")

    return LogisticFit(
        coefficients=dict(zip(names, (float(b) for b in beta))),
        log_likelihood=ll,
        converged=converged,
        iterations=iterations,
    )


# ---------------------------------------------------------------------------
# record IO
# ---------------------------------------------------------------------------

def export_records(records: list[ItemResponseRecord], path: str | Path) -> None:
    """Write records as CSV (header + one row per record); round-trips."""
    try:
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_HEADER)
            for r in records:
                writer.writerow([r.participant, r.item, r.condition, r.test,
                                 int(r.correct), r.week, r.cycle])
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def import_records(path: str | Path) -> list[ItemResponseRecord]:
    try:
        with Path(path).open(newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            return [
                ItemResponseRecord(
                    participant=row["participant"],
                    item=row["item"],
                    condition=row["condition"],
                    test=row["test"],
                    correct=bool(int(row["correct"])),
                    week=int(row["week"]),
                    cycle=int(row["cycle"]),
                )
                for row in reader
            ]
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc


def analysis_report(records: list[ItemResponseRecord],
                    design: str = "condition*test") -> dict:
    """JSON-ready summary: descriptives, fit, and per-term effect sizes."""
    table = descriptives(records)
    report = {
        "n": len(records),
        "descriptives": [
            {"condition": c, "test": t,
             "proportion": round(p, 6), "n": n}
            for (c, t), (p, n) in sorted(table.items())
        ],
    }
    try:
        fit = fit_logistic(records, design)
        effects = []
        for term, coef in fit.coefficients.items():
            if term == "(Intercept)":
                continue
            odds = math.exp(coef)
            effects.append({
                "term": term,
                "oddsRatio": round(odds, 6),
                "d": round(or_to_d(odds, "paper"), 6),
                "dSqrt3Pi": round(or_to_d(odds, "sqrt3pi"), 6),
            })
        report["fit"] = {
            "design": design,
            "coefficients": {k: round(v, 10) for k, v in fit.coefficients.items()},
            "logLikelihood": round(fit.log_likelihood, 10),
            "converged": fit.converged,
            "iterations": fit.iterations,
        }
        report["effects"] = effects
    except (SingularDesign, Separation) as exc:
        report["fit"] = {"error": exc.code, "message": str(exc)}
    return report
