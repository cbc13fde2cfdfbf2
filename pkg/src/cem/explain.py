"""Contrastive explanations: a pertinent negative and a pertinent positive per input."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import DenseAutoencoder, DenseNetwork, ShapeError, predict
from .objective import Example, Mode
from .solver import FeasibleSpace, PerturbationResult, SolverConfig, c_search


@dataclass
class Explanation:
    example_id: str
    t0: int
    pp: PerturbationResult
    pn: PerturbationResult
    pn_target_class: int
    narrative: str = ""


def explain(
    ex: Example,
    net: DenseNetwork,
    ae: DenseAutoencoder | None = None,
    cfg: SolverConfig = SolverConfig(),
    lo=0.0,
    hi=1.0,
    background=None,
    feature_names: Sequence[str] | None = None,
) -> Explanation:
    """Solve for the pertinent negative, then the pertinent positive.

    ``lo``, ``hi`` and ``background`` (scalars or per-feature vectors) define
    the data box and the no-signal level. The autoencoder term is active only
    when ``cfg.gamma > 0``, which requires ``ae``. Failed solves are kept in the
    result with ``success=False``.
    """
    if cfg.gamma > 0 and ae is None:
        raise ValueError("gamma > 0 requires an autoencoder")
    ex.check(net)
    if ae is not None and ae.input_dim != net.input_dim:
        raise ShapeError("autoencoder and classifier dimensions differ")
    pn = c_search(ex, net, ae, FeasibleSpace.build(ex.x0, Mode.PN, lo, hi, background), cfg)
    pp = c_search(ex, net, ae, FeasibleSpace.build(ex.x0, Mode.PP, lo, hi, background), cfg)
    target = int(np.argmax(predict(net, ex.x0 + pn.delta)))
    expl = Explanation(ex.example_id, ex.t0, pp, pn, target)
    expl.narrative = render_narrative(expl, feature_names)
    return expl


def _feature_list(idx: np.ndarray, names: Sequence[str] | None) -> str:
    items = [str(i) if names is None else str(names[i]) for i in idx]
    return "[" + ", ".join(items) + "]"


def render_narrative(expl: Explanation, feature_names: Sequence[str] | None = None) -> str:
    """One sentence naming the features that must be present and those that must stay absent.

    Template::

        Input <id> is classified as class <t0> because features [i, j] are present
        and because features [k] are absent

    A failed or empty mode is stated as "no pertinent positive features were
    found" / "no pertinent negative features were found".
    """
    dim = len(expl.pp.delta)
    if feature_names is not None and len(feature_names) != dim:
        raise ValueError(f"{len(feature_names)} feature names for {dim} features")
    pp_idx = np.flatnonzero(expl.pp.delta) if expl.pp.success else np.array([], dtype=int)
    pn_idx = np.flatnonzero(expl.pn.delta) if expl.pn.success else np.array([], dtype=int)
    if len(pp_idx):
        present = f"features {_feature_list(pp_idx, feature_names)} are present"
    else:
        present = "no pertinent positive features were found"
    if len(pn_idx):
        absent = f"features {_feature_list(pn_idx, feature_names)} are absent"
    else:
        absent = "no pertinent negative features were found"
    return f"Input {expl.example_id} is classified as class {expl.t0} because {present} and because {absent}"


def _result_record(res: PerturbationResult) -> dict:
    idx = np.flatnonzero(res.delta)
    return {
        "success": bool(res.success),
        "c_used": float(res.c_used),
        "achieved_class": int(res.achieved_class),
        "elastic_net_value": float(res.elastic_net_value),
        "iterations_run": int(res.iterations_run),
        "dim": len(res.delta),
        "delta": [[int(i), float(res.delta[i])] for i in idx],
        "candidate_log": [[int(s), float(v), bool(ok)] for s, v, ok in res.candidate_log],
    }


def _result_from_record(rec: dict, mode: Mode) -> PerturbationResult:
    delta = np.zeros(int(rec["dim"]))
    for i, v in rec["delta"]:
        delta[int(i)] = float(v)
    return PerturbationResult(
        delta=delta,
        success=bool(rec["success"]),
        achieved_class=int(rec["achieved_class"]),
        elastic_net_value=float(rec["elastic_net_value"]),
        c_used=float(rec["c_used"]),
        iterations_run=int(rec["iterations_run"]),
        candidate_log=[(int(s), float(v), bool(ok)) for s, v, ok in rec["candidate_log"]],
        mode=mode,
    )


def to_record(expl: Explanation) -> dict:
    """JSON-ready dict; deltas are stored sparsely as ``[index, value]`` pairs."""
    return {
        "example_id": expl.example_id,
        "t0": int(expl.t0),
        "pp": _result_record(expl.pp),
        "pn": _result_record(expl.pn),
        "pn_target_class": int(expl.pn_target_class),
        "narrative": expl.narrative,
    }


def from_record(rec: dict) -> Explanation:
    return Explanation(
        example_id=str(rec["example_id"]),
        t0=int(rec["t0"]),
        pp=_result_from_record(rec["pp"], Mode.PP),
        pn=_result_from_record(rec["pn"], Mode.PN),
        pn_target_class=int(rec["pn_target_class"]),
        narrative=rec["narrative"],
    )


def dumps_record(expl: Explanation) -> str:
    return json.dumps(to_record(expl), sort_keys=True)
