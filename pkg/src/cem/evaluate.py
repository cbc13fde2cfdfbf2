"""Feed explanations back through the classifier and tally how often they hold up."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .explain import Explanation, explain
from .model import DenseAutoencoder, DenseNetwork, predict
from .objective import Example
from .solver import SolverConfig


@dataclass
class EvalRow:
    example_id: str
    t0: int
    pp_success: bool
    pp_class: int
    pp_match: bool
    pp_nonzero: int
    pn_success: bool
    pn_class: int
    pn_switch: bool
    pn_nonzero: int


@dataclass
class EvalReport:
    """Rates are conditioned on solver success; a rate is None when nothing succeeded."""

    n_examples: int
    pp_successes: int
    pn_successes: int
    pp_matches: int
    pn_switches: int
    pp_match_rate: float | None
    pn_switch_rate: float | None
    pp_solver_success_rate: float
    pn_solver_success_rate: float
    pp_mean_nonzero: float | None
    pn_mean_nonzero: float | None
    rows: list[EvalRow] = field(default_factory=list)

    def summary(self) -> dict:
        out = asdict(self)
        out.pop("rows")
        out["pp_match_rate_defined"] = self.pp_match_rate is not None
        out["pn_switch_rate_defined"] = self.pn_switch_rate is not None
        return out


def eval_row(expl: Explanation, x0: np.ndarray, net: DenseNetwork) -> EvalRow:
    pp_class = int(np.argmax(predict(net, expl.pp.delta)))
    pn_class = int(np.argmax(predict(net, x0 + expl.pn.delta)))
    return EvalRow(
        example_id=expl.example_id,
        t0=expl.t0,
        pp_success=bool(expl.pp.success),
        pp_class=pp_class,
        pp_match=pp_class == expl.t0,
        pp_nonzero=int(np.count_nonzero(expl.pp.delta)),
        pn_success=bool(expl.pn.success),
        pn_class=pn_class,
        pn_switch=pn_class != expl.t0,
        pn_nonzero=int(np.count_nonzero(expl.pn.delta)),
    )


def _rate(num: int, den: int) -> float | None:
    return num / den if den else None


def aggregate(rows: Sequence[EvalRow]) -> EvalReport:
    if not rows:
        raise ValueError("empty dataset")
    pp_ok = [r for r in rows if r.pp_success]
    pn_ok = [r for r in rows if r.pn_success]
    pp_matches = sum(r.pp_match for r in pp_ok)
    pn_switches = sum(r.pn_switch for r in pn_ok)
    n = len(rows)
    return EvalReport(
        n_examples=n,
        pp_successes=len(pp_ok),
        pn_successes=len(pn_ok),
        pp_matches=pp_matches,
        pn_switches=pn_switches,
        pp_match_rate=_rate(pp_matches, len(pp_ok)),
        pn_switch_rate=_rate(pn_switches, len(pn_ok)),
        pp_solver_success_rate=len(pp_ok) / n,
        pn_solver_success_rate=len(pn_ok) / n,
        pp_mean_nonzero=float(np.mean([r.pp_nonzero for r in pp_ok])) if pp_ok else None,
        pn_mean_nonzero=float(np.mean([r.pn_nonzero for r in pn_ok])) if pn_ok else None,
        rows=list(rows),
    )


def evaluate(
    dataset: Sequence[Example],
    net: DenseNetwork,
    ae: DenseAutoencoder | None = None,
    cfg: SolverConfig = SolverConfig(),
    lo=0.0,
    hi=1.0,
    background=None,
) -> EvalReport:
    """Explain every example and check that PPs keep and PNs flip the class."""
    if not dataset:
        raise ValueError("empty dataset")
    rows = []
    for ex in dataset:
        expl = explain(ex, net, ae, cfg, lo=lo, hi=hi, background=background)
        rows.append(eval_row(expl, ex.x0, net))
    return aggregate(rows)


ROW_FIELDS = [f for f in EvalRow.__dataclass_fields__]


def format_table(report: EvalReport) -> str:
    """Per-example rows as CSV with a header line."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ROW_FIELDS)
    for r in report.rows:
        w.writerow([int(v) if isinstance(v, bool) else v for v in asdict(r).values()])
    return buf.getvalue()


def format_summary(report: EvalReport) -> str:
    return json.dumps(report.summary(), sort_keys=True, indent=2) + "\n"
