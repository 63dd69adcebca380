"""Stable JSON file formats and report serialization.

Formats (labels, not indices, at the file boundary):

  space    {"points": [...], "metric": "euclidean"|"torus"|"matrix",
            "coords": [[...], ...] | "matrix": [[...], ...]}
  measure  {"space": <space>, "weights": [{"atom": id, "num": n, "den": d}, ...]}
  sequence {"space": <space>, "terms": [<weights>, ...], "limit": <weights>}
  instance {"xi": <measure>, "sets": [[id, ...], ...],
            "targets": [{"num": n, "den": d}, ...]}
  system   {"space": <space>, "map": {id: id, ...}}
"""
from __future__ import annotations

import json
from fractions import Fraction

from .convergence import ConvergenceReport, MeasureSequence
from .decomposition import DecompositionInstance, DecompositionResult, VerificationVerdict
from .errors import BottleneckOTError
from .measures import DiscreteMeasure, make_measure
from .spaces import FiniteMetricSpace, build_space
from .stability import MapSystem, StabilityReport

_METRIC_TOKENS = {
    "euclidean": "euclidean",
    "torus": "flat-torus",
    "matrix": "explicit-matrix",
}


class MalformedInput(BottleneckOTError):
    """File contents do not match the documented schema."""


def parse_space(obj) -> FiniteMetricSpace:
    try:
        points = obj["points"]
        metric = _METRIC_TOKENS[obj.get("metric", "euclidean")]
        if metric == "explicit-matrix":
            return build_space(points, metric, matrix=obj["matrix"])
        return build_space(points, metric, coords=obj["coords"])
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedInput(f"bad space object: {exc}") from exc


def space_to_obj(space: FiniteMetricSpace):
    if space.metric_rule == "explicit-matrix":
        return {
            "points": list(space.point_ids),
            "metric": "matrix",
            "matrix": [list(row) for row in space.dist],
        }
    token = "euclidean" if space.metric_rule == "euclidean" else "torus"
    return {
        "points": list(space.point_ids),
        "metric": token,
        "coords": [list(v) for v in space.coords],
    }


def parse_weights(space: FiniteMetricSpace, entries) -> DiscreteMeasure:
    try:
        pairs = [
            (space.index_of(e["atom"]), Fraction(int(e["num"]), int(e["den"])))
            for e in entries
        ]
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise MalformedInput(f"bad weights array: {exc}") from exc
    return make_measure(space, pairs)


def weights_to_obj(mu: DiscreteMeasure):
    return [
        {"atom": mu.space.point_ids[a], "num": w.numerator, "den": w.denominator}
        for a, w in sorted(mu.weights.items())
    ]


def load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise MalformedInput(f"cannot read {path}: {exc}") from exc


def parse_measure(obj) -> DiscreteMeasure:
    try:
        space = parse_space(obj["space"])
        return parse_weights(space, obj["weights"])
    except (KeyError, TypeError) as exc:
        raise MalformedInput(f"bad measure object: {exc}") from exc


def load_measure_file(path) -> DiscreteMeasure:
    return parse_measure(load_json(path))


def measure_to_obj(mu: DiscreteMeasure):
    return {"space": space_to_obj(mu.space), "weights": weights_to_obj(mu)}


def parse_sequence(obj) -> MeasureSequence:
    try:
        space = parse_space(obj["space"])
        terms = [parse_weights(space, term) for term in obj["terms"]]
        limit = parse_weights(space, obj["limit"])
    except (KeyError, TypeError) as exc:
        raise MalformedInput(f"bad sequence object: {exc}") from exc
    return MeasureSequence.build(terms, limit)


def load_sequence_file(path) -> MeasureSequence:
    return parse_sequence(load_json(path))


def parse_instance(obj) -> DecompositionInstance:
    try:
        xi = parse_measure(obj["xi"])
        sets = [
            frozenset(xi.space.index_of(pid) for pid in block)
            for block in obj["sets"]
        ]
        targets = [Fraction(int(t["num"]), int(t["den"])) for t in obj["targets"]]
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise MalformedInput(f"bad instance object: {exc}") from exc
    return DecompositionInstance.build(xi, sets, targets)


def load_instance_file(path) -> DecompositionInstance:
    return parse_instance(load_json(path))


def parse_system(obj) -> MapSystem:
    try:
        space = parse_space(obj["space"])
        mapping = {
            space.index_of(src): space.index_of(dst)
            for src, dst in obj["map"].items()
        }
        if len(mapping) != space.n_points:
            raise MalformedInput("map must cover every point exactly once")
        return MapSystem.build(space, mapping)
    except (KeyError, TypeError, AttributeError) as exc:
        raise MalformedInput(f"bad system object: {exc}") from exc


def load_system_file(path) -> MapSystem:
    return parse_system(load_json(path))


def fraction_str(f: Fraction) -> str:
    return f"{f.numerator}/{f.denominator}" if f.denominator != 1 else str(f.numerator)


def dumps_sorted(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def decomposition_to_obj(instance: DecompositionInstance, result: DecompositionResult,
                         verdict: VerificationVerdict):
    ids = instance.xi.space.point_ids
    return {
        "components": [
            [
                {"atom": ids[a], "num": w.numerator, "den": w.denominator}
                for a, w in sorted(nu.weights.items())
            ]
            for nu in result.components
        ],
        "trace": [{"case": label, "depth": depth} for label, depth in result.trace],
        "max_depth": result.max_depth,
        "verification": str(verdict),
    }


def convergence_to_obj(report: ConvergenceReport, space: FiniteMetricSpace):
    ids = space.point_ids

    def verdict_obj(v):
        return {
            "name": v.name,
            "passed": v.passed,
            "stabilization_index": v.stabilization_index,
            "failure_index": v.failure_index,
            "witness_atoms": sorted(ids[a] for a in v.witness_atoms)
            if v.witness_atoms else None,
            "improving": v.improving,
        }

    witness = None
    if report.witness:
        criterion, index, atoms = report.witness
        witness = {
            "criterion": criterion,
            "index": index,
            "atoms": sorted(ids[a] for a in atoms) if atoms else None,
        }
    return {
        "overall": report.overall,
        "characterization_verdict": report.characterization_verdict,
        "direct_verdict": report.direct_verdict,
        "witness": witness,
        "criteria": [verdict_obj(v) for v in report.verdicts],
        "delta": [f"{d:.12g}" for d in report.deltas],
        "w1": [f"{w:.12g}" for w in report.w1s],
        "notes": list(report.notes),
    }


def stability_to_obj(report: StabilityReport, space: FiniteMetricSpace):
    ids = space.point_ids

    def record_obj(r):
        return {
            "label": r.label,
            "seed": r.seed,
            "weights": [
                {"atom": ids[a], "num": n, "den": d} for a, n, d in r.weights
            ],
            "sup_distance": f"{r.sup_distance:.12g}",
            "argmax_step": r.argmax_step,
            "allowance": None if r.allowance is None else f"{r.allowance:.12g}",
        }

    params = {}
    for key, value in report.params.items():
        if isinstance(value, float):
            params[key] = f"{value:.12g}"
        elif isinstance(value, (list, tuple)):
            params[key] = [
                f"{v:.12g}" if isinstance(v, float) else v for v in value
            ]
        else:
            params[key] = value
    return {
        "notion": report.notion,
        "verdict": report.verdict,
        "params": params,
        "witness": record_obj(report.witness) if report.witness else None,
        "probes": [record_obj(r) for r in report.records],
        "notes": list(report.notes),
    }
