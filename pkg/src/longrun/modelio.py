"""Model files: structured JSON documents describing the supported models.

Every file carries ``"version": "v1"`` and a ``"kind"`` among
``belief_dist_pair``, ``gambling_house``, ``finite_mdp``, ``pomdp``,
``informed_game``, ``matrix_family``.  States, actions and signals are
string lists; transitions are arrays of (target, probability) pairs;
matrices are row-major nested arrays.  Unknown fields are rejected.  One
complete sample per kind ships under ``sample_models/``.
"""

from __future__ import annotations

import json

import numpy as np

from .core import BeliefDist, InvalidArgumentError, SimplexPoint
from .dp import FiniteMDP, GamblingHouse
from .metric import MatrixFamily
from .partialobs import InformedGame, PomdpModel

KINDS = (
    "belief_dist_pair",
    "gambling_house",
    "finite_mdp",
    "pomdp",
    "informed_game",
    "matrix_family",
)


class ModelFileError(InvalidArgumentError):
    """Schema violation; carries the offending field's path."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"field {field!r}: {message}")


def _require(doc: dict, field: str, types, path: str = ""):
    where = f"{path}.{field}" if path else field
    if field not in doc:
        raise ModelFileError(where, "missing")
    value = doc[field]
    if not isinstance(value, types):
        raise ModelFileError(where, f"expected {types}, got {type(value).__name__}")
    return value


def _reject_unknown(doc: dict, allowed, path: str = ""):
    for key in doc:
        if key not in allowed:
            where = f"{path}.{key}" if path else key
            raise ModelFileError(where, "unknown field")


def _string_list(doc, field, path=""):
    values = _require(doc, field, list, path)
    where = f"{path}.{field}" if path else field
    if not values or not all(isinstance(s, str) for s in values):
        raise ModelFileError(where, "must be a nonempty list of strings")
    if len(set(values)) != len(values):
        raise ModelFileError(where, "contains duplicates")
    return values


def _pairs_to_row(pairs, labels, where):
    row = np.zeros(len(labels))
    if not isinstance(pairs, list) or not pairs:
        raise ModelFileError(where, "must be a nonempty list of (target, probability) pairs")
    for n, pair in enumerate(pairs):
        if not (isinstance(pair, list) and len(pair) == 2):
            raise ModelFileError(f"{where}[{n}]", "expected a (target, probability) pair")
        target, prob = pair
        if target not in labels:
            raise ModelFileError(f"{where}[{n}]", f"unknown target {target!r}")
        if not isinstance(prob, (int, float)):
            raise ModelFileError(f"{where}[{n}]", "probability must be a number")
        row[labels.index(target)] += float(prob)
    return row


def _belief(doc, field, index_set):
    atoms = _require(doc, field, list)
    points, weights = [], []
    for n, atom in enumerate(atoms):
        where = f"{field}[{n}]"
        if not isinstance(atom, dict):
            raise ModelFileError(where, "expected an object with point and weight")
        _reject_unknown(atom, ("point", "weight"), where)
        point = _require(atom, "point", list, where)
        if len(point) != len(index_set):
            raise ModelFileError(f"{where}.point", "length does not match index_set")
        weight = _require(atom, "weight", (int, float), where)
        try:
            points.append(SimplexPoint(point, labels=index_set))
        except InvalidArgumentError as exc:
            raise ModelFileError(f"{where}.point", str(exc)) from None
        weights.append(float(weight))
    try:
        return BeliefDist(points, weights)
    except InvalidArgumentError as exc:
        raise ModelFileError(field, str(exc)) from None


def _load_belief_dist_pair(doc):
    _reject_unknown(doc, ("version", "kind", "index_set", "u", "v"))
    index_set = _string_list(doc, "index_set")
    return _belief(doc, "u", index_set), _belief(doc, "v", index_set)


def _load_gambling_house(doc):
    _reject_unknown(doc, ("version", "kind", "states", "payoffs", "transitions"))
    states = _string_list(doc, "states")
    payoffs = _require(doc, "payoffs", list)
    if len(payoffs) != len(states):
        raise ModelFileError("payoffs", "length does not match states")
    trans = _require(doc, "transitions", dict)
    _reject_unknown(trans, states, "transitions")
    options = []
    for s in states:
        opts = _require(trans, s, list, "transitions")
        rows = [
            _pairs_to_row(o, states, f"transitions.{s}[{n}]") for n, o in enumerate(opts)
        ]
        if not rows:
            raise ModelFileError(f"transitions.{s}", "needs at least one option")
        options.append(np.array(rows))
    try:
        return GamblingHouse(states, payoffs, options)
    except InvalidArgumentError as exc:
        raise ModelFileError("transitions", str(exc)) from None


def _load_finite_mdp(doc):
    _reject_unknown(doc, ("version", "kind", "states", "actions", "payoffs", "transitions"))
    states = _string_list(doc, "states")
    actions = _string_list(doc, "actions")
    payoffs = np.asarray(_require(doc, "payoffs", list), dtype=float)
    if payoffs.shape != (len(states), len(actions)):
        raise ModelFileError("payoffs", "must be row-major [state][action]")
    trans = _require(doc, "transitions", dict)
    _reject_unknown(trans, states, "transitions")
    q = np.zeros((len(states), len(actions), len(states)))
    for k, s in enumerate(states):
        per_state = _require(trans, s, dict, "transitions")
        _reject_unknown(per_state, actions, f"transitions.{s}")
        for a, act in enumerate(actions):
            q[k, a] = _pairs_to_row(
                _require(per_state, act, list, f"transitions.{s}"),
                states,
                f"transitions.{s}.{act}",
            )
    try:
        return FiniteMDP(states, actions, q, payoffs)
    except InvalidArgumentError as exc:
        raise ModelFileError("transitions", str(exc)) from None


def _load_pomdp(doc):
    _reject_unknown(
        doc,
        ("version", "kind", "states", "actions", "signals", "payoffs", "transitions", "initial"),
    )
    states = _string_list(doc, "states")
    actions = _string_list(doc, "actions")
    signals = _string_list(doc, "signals")
    payoffs = np.asarray(_require(doc, "payoffs", list), dtype=float)
    if payoffs.shape != (len(states), len(actions)):
        raise ModelFileError("payoffs", "must be row-major [state][action]")
    initial = _require(doc, "initial", list)
    if len(initial) != len(states):
        raise ModelFileError("initial", "length does not match states")
    trans = _require(doc, "transitions", dict)
    _reject_unknown(trans, states, "transitions")
    q = np.zeros((len(states), len(actions), len(signals), len(states)))
    for k, s in enumerate(states):
        per_state = _require(trans, s, dict, "transitions")
        _reject_unknown(per_state, actions, f"transitions.{s}")
        for a, act in enumerate(actions):
            where = f"transitions.{s}.{act}"
            entries = _require(per_state, act, list, f"transitions.{s}")
            if not entries:
                raise ModelFileError(where, "must be nonempty")
            for n, entry in enumerate(entries):
                if not (isinstance(entry, list) and len(entry) == 2
                        and isinstance(entry[0], list) and len(entry[0]) == 2):
                    raise ModelFileError(
                        f"{where}[{n}]", "expected [[signal, target], probability]"
                    )
                (sig, target), prob = entry
                if sig not in signals:
                    raise ModelFileError(f"{where}[{n}]", f"unknown signal {sig!r}")
                if target not in states:
                    raise ModelFileError(f"{where}[{n}]", f"unknown target {target!r}")
                if not isinstance(prob, (int, float)):
                    raise ModelFileError(f"{where}[{n}]", "probability must be a number")
                q[k, a, signals.index(sig), states.index(target)] += float(prob)
    try:
        return PomdpModel(states, actions, signals, q, payoffs, initial)
    except InvalidArgumentError as exc:
        raise ModelFileError("transitions", str(exc)) from None


def _load_informed_game(doc):
    _reject_unknown(
        doc,
        ("version", "kind", "states", "actions1", "actions2", "signals",
         "payoffs", "transitions", "initial"),
    )
    states = _string_list(doc, "states")
    actions1 = _string_list(doc, "actions1")
    actions2 = _string_list(doc, "actions2")
    signals = _string_list(doc, "signals")
    payoffs = np.asarray(_require(doc, "payoffs", list), dtype=float)
    if payoffs.shape != (len(states), len(actions1), len(actions2)):
        raise ModelFileError("payoffs", "must be row-major [state][action1][action2]")
    initial = np.asarray(_require(doc, "initial", list), dtype=float)
    if initial.shape != (len(states), len(signals)):
        raise ModelFileError("initial", "must be row-major [state][signal]")
    trans = _require(doc, "transitions", dict)
    _reject_unknown(trans, states, "transitions")
    qbar = np.zeros((len(states), len(actions1), len(states), len(signals)))
    for k, s in enumerate(states):
        per_state = _require(trans, s, dict, "transitions")
        _reject_unknown(per_state, actions1, f"transitions.{s}")
        for i, act in enumerate(actions1):
            where = f"transitions.{s}.{act}"
            entries = _require(per_state, act, list, f"transitions.{s}")
            for n, entry in enumerate(entries):
                if not (isinstance(entry, list) and len(entry) == 2
                        and isinstance(entry[0], list) and len(entry[0]) == 2):
                    raise ModelFileError(
                        f"{where}[{n}]", "expected [[target, signal], probability]"
                    )
                (target, sig), prob = entry
                if target not in states:
                    raise ModelFileError(f"{where}[{n}]", f"unknown target {target!r}")
                if sig not in signals:
                    raise ModelFileError(f"{where}[{n}]", f"unknown signal {sig!r}")
                if not isinstance(prob, (int, float)):
                    raise ModelFileError(f"{where}[{n}]", "probability must be a number")
                qbar[k, i, states.index(target), signals.index(sig)] += float(prob)
    try:
        return InformedGame(states, actions1, actions2, signals, qbar, payoffs, initial)
    except InvalidArgumentError as exc:
        raise ModelFileError("transitions", str(exc)) from None


def _load_matrix_family(doc):
    _reject_unknown(doc, ("version", "kind", "index_set", "matrices"))
    index_set = _string_list(doc, "index_set")
    matrices = np.asarray(_require(doc, "matrices", list), dtype=float)
    if matrices.ndim != 3 or matrices.shape[0] != len(index_set):
        raise ModelFileError("matrices", "must be one row-major matrix per index entry")
    try:
        return MatrixFamily(matrices)
    except InvalidArgumentError as exc:
        raise ModelFileError("matrices", str(exc)) from None


_LOADERS = {
    "belief_dist_pair": _load_belief_dist_pair,
    "gambling_house": _load_gambling_house,
    "finite_mdp": _load_finite_mdp,
    "pomdp": _load_pomdp,
    "informed_game": _load_informed_game,
    "matrix_family": _load_matrix_family,
}


def parse_model(doc) -> tuple:
    """Validate a parsed JSON document; returns ``(kind, payload)``."""
    if not isinstance(doc, dict):
        raise ModelFileError("", "top level must be an object")
    version = _require(doc, "version", str)
    if version != "v1":
        raise ModelFileError("version", f"unsupported version {version!r}")
    kind = _require(doc, "kind", str)
    if kind not in KINDS:
        raise ModelFileError("kind", f"unknown kind {kind!r}")
    return kind, _LOADERS[kind](doc)


def load_model_file(path) -> tuple:
    """Read and validate a model file; returns ``(kind, payload)``."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ModelFileError("", f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ModelFileError("", f"invalid JSON in {path}: {exc}") from None
    return parse_model(doc)


def load_evaluation_file(path):
    """A custom evaluation: a JSON array of weights or {"weights": [...]}."""
    from .core import Evaluation

    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelFileError("", f"cannot read evaluation file {path}: {exc}") from None
    if isinstance(doc, dict):
        _reject_unknown(doc, ("weights",))
        doc = _require(doc, "weights", list)
    if not isinstance(doc, list):
        raise ModelFileError("weights", "expected a JSON array of stage weights")
    try:
        return Evaluation(np.asarray(doc, dtype=float))
    except (InvalidArgumentError, ValueError) as exc:
        raise ModelFileError("weights", str(exc)) from None
