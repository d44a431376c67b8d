"""Verification reports: one row per checked identity instance."""

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .scalar import EXACT, FLOAT

CSV_COLUMNS = ("suite", "identity", "paper_ref", "lhs", "rhs", "pass", "seed", "trial")


def describe(value):
    """A short deterministic string for a scalar, tensor or functional."""
    from .law import PolyFunctional
    from .malliavin import RandomField
    from .measure import TensorFn

    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, PolyFunctional):
        return f"poly(d={value.d}, degree={value.degree}, digest={_digest(value)})"
    if isinstance(value, RandomField):
        return f"field(d={value.d}, orders={list(value.terms)})"
    if isinstance(value, TensorFn):
        return f"tensor(order={value.order}, d={value.d})"
    if isinstance(value, np.ndarray) and value.ndim == 0:
        return describe(value[()])
    return str(value)


def _digest(F):
    """Value of ``F`` at the uniform probability vector, as a fingerprint."""
    from .law import poly_eval

    if F.mode == EXACT:
        mu = [Fraction(1, F.d)] * F.d
    else:
        mu = [1.0 / F.d] * F.d
    return describe(poly_eval(F, np.array(mu, dtype=object if F.mode == EXACT else float)))


@dataclass
class CheckResult:
    identity: str
    description: str
    lhs: str
    rhs: str
    passed: bool
    seed: int
    trial: int

    def row(self, suite):
        return {
            "suite": suite,
            "identity": self.identity,
            "paper_ref": self.description,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "pass": self.passed,
            "seed": self.seed,
            "trial": self.trial,
        }


@dataclass
class VerificationReport:
    suite: str
    params: dict = field(default_factory=dict)
    results: list = field(default_factory=list)

    def add(self, identity, description, lhs, rhs, passed, seed, trial):
        self.results.append(
            CheckResult(identity, description, describe(lhs), describe(rhs), bool(passed), int(seed), int(trial))
        )

    def extend(self, other):
        self.results.extend(other.results)

    @property
    def failures(self):
        return sum(1 for r in self.results if not r.passed)

    @property
    def ok(self):
        return self.failures == 0

    def failed(self):
        return [r for r in self.results if not r.passed]

    def by_identity(self):
        """``identity -> (checks, failures)``."""
        out = {}
        for r in self.results:
            n, f = out.get(r.identity, (0, 0))
            out[r.identity] = (n + 1, f + (not r.passed))
        return out

    def as_dict(self):
        return {
            "suite": self.suite,
            "params": {k: describe(v) if not isinstance(v, (int, list, tuple)) else v for k, v in self.params.items()},
            "results": [
                {k: v for k, v in r.row(self.suite).items() if k != "suite"} for r in self.results
            ],
            "failures": self.failures,
        }

    def to_json(self):
        return json.dumps(self.as_dict(), sort_keys=True, indent=2) + "\n"

    def csv_rows(self):
        return [r.row(self.suite) for r in self.results]


def reports_to_json(reports):
    payload = {"reports": [r.as_dict() for r in reports], "failures": sum(r.failures for r in reports)}
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def reports_to_csv(reports):
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for rep in reports:
        for row in rep.csv_rows():
            row = dict(row, **{"pass": "true" if row["pass"] else "false"})
            writer.writerow(row)
    return buf.getvalue()
