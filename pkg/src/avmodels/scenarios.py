"""Scenario files: JSON descriptions of the two models.

Street-graph form::

    {"vertices": ["A", ...],
     "edges": [["A", "Main_Street", "B"], ...],
     "car": {"position": "Main_Street", "destination": "High_Street"},
     "obstacles": [{"position": "High_Street",
                    "moves": ["random", {"turn": 0}, "leave"]}]}

Grid form::

    {"width": 10, "height": 10,
     "static": [{"kind": "Building", "x": 0, "y": 0, "w": 4, "h": 4}],
     "mobile": [{"kind": "Pedestrian", "x": 3, "y": 5, "speed": 1,
                 "transparent": true, "moves": ["right", "random"]}],
     "car": {"x": 6, "y": 9, "speed": 1, "moves": ["up", "up"]},
     "dist_min": 4}
"""
from __future__ import annotations

import json
from typing import Union

from .control_model import ControlScenario, GraphMap, ObstacleScript, Turn, \
    LEAVE, RANDOM
from .perception import CarSpec, GridScenario, ObstacleRec, DIRECTIONS
from .grid_model import RANDOM_DIR

Scenario = Union[ControlScenario, GridScenario]


class ScenarioError(ValueError):
    pass


def load_scenario(path: str) -> Scenario:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as e:
        raise ScenarioError(f"cannot read {path}: {e}")
    except json.JSONDecodeError as e:
        raise ScenarioError(f"{path} is not valid JSON: {e}")
    return scenario_from_json(data)


def scenario_from_json(data) -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be a JSON object")
    if "edges" in data or "vertices" in data:
        return _graph_scenario(data)
    if "width" in data or "height" in data:
        return _grid_scenario(data)
    raise ScenarioError("scenario has neither street-graph keys (vertices/edges)"
                        " nor grid keys (width/height)")


def _req(data: dict, key: str, where: str):
    if key not in data:
        raise ScenarioError(f"{where}: missing {key!r}")
    return data[key]


def _nat(value, where: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or value < 0:
        raise ScenarioError(f"{where}: expected a non-negative integer, got {value!r}")
    return value


def _graph_scenario(data) -> ControlScenario:
    vertices = _req(data, "vertices", "scenario")
    raw_edges = _req(data, "edges", "scenario")
    if not isinstance(vertices, list) or not all(
            isinstance(v, (str, int)) and not isinstance(v, bool) for v in vertices):
        raise ScenarioError("vertices: expected a list of names or numbers")
    edges = []
    for i, e in enumerate(raw_edges):
        if (not isinstance(e, list) or len(e) != 3
                or not isinstance(e[1], str)
                or not all(isinstance(x, (str, int)) for x in (e[0], e[2]))):
            raise ScenarioError(f"edges[{i}]: expected [source, street, target]")
        edges.append((e[0], e[1], e[2]))
    try:
        gmap = GraphMap(tuple(vertices), tuple(edges))
    except Exception as e:
        raise ScenarioError(f"bad street graph: {e}")
    car = _req(data, "car", "scenario")
    if not isinstance(car, dict):
        raise ScenarioError("car: expected an object")
    position = _req(car, "position", "car")
    destination = _req(car, "destination", "car")
    obstacles = []
    for i, ob in enumerate(data.get("obstacles", [])):
        where = f"obstacles[{i}]"
        if not isinstance(ob, dict):
            raise ScenarioError(f"{where}: expected an object")
        street = _req(ob, "position", where)
        moves = []
        for j, mv in enumerate(ob.get("moves", [])):
            if mv in (RANDOM, LEAVE):
                moves.append(mv)
            elif isinstance(mv, dict) and set(mv) == {"turn"}:
                moves.append(Turn(_nat(mv["turn"], f"{where}.moves[{j}].turn")))
            else:
                raise ScenarioError(f'{where}.moves[{j}]: expected "random", '
                                    f'"leave" or {{"turn": n}}, got {mv!r}')
        obstacles.append(ObstacleScript(street, tuple(moves)))
    try:
        return ControlScenario(gmap, position, destination, tuple(obstacles))
    except Exception as e:
        raise ScenarioError(f"bad scenario: {e}")


_MOVE_WORDS = set(DIRECTIONS) | {RANDOM_DIR}


def _moves(raw, where: str):
    if not isinstance(raw, list):
        raise ScenarioError(f"{where}: expected a list")
    for j, mv in enumerate(raw):
        if mv not in _MOVE_WORDS:
            raise ScenarioError(f"{where}[{j}]: expected one of "
                                f"{sorted(_MOVE_WORDS)}, got {mv!r}")
    return tuple(raw)


def _grid_scenario(data) -> GridScenario:
    width = _nat(_req(data, "width", "scenario"), "width")
    height = _nat(_req(data, "height", "scenario"), "height")
    static = []
    for i, ob in enumerate(data.get("static", [])):
        where = f"static[{i}]"
        if not isinstance(ob, dict):
            raise ScenarioError(f"{where}: expected an object")
        try:
            static.append(ObstacleRec(
                kind=str(_req(ob, "kind", where)),
                x=_nat(_req(ob, "x", where), f"{where}.x"),
                y=_nat(_req(ob, "y", where), f"{where}.y"),
                w=_nat(ob.get("w", 1), f"{where}.w"),
                h=_nat(ob.get("h", 1), f"{where}.h"),
                transparent=bool(ob.get("transparent", False)),
            ))
        except ValueError as e:
            raise ScenarioError(f"{where}: {e}")
    mobile = []
    for i, ob in enumerate(data.get("mobile", [])):
        where = f"mobile[{i}]"
        if not isinstance(ob, dict):
            raise ScenarioError(f"{where}: expected an object")
        try:
            mobile.append(ObstacleRec(
                kind=str(_req(ob, "kind", where)),
                x=_nat(_req(ob, "x", where), f"{where}.x"),
                y=_nat(_req(ob, "y", where), f"{where}.y"),
                w=_nat(ob.get("w", 1), f"{where}.w"),
                h=_nat(ob.get("h", 1), f"{where}.h"),
                speed=_nat(ob.get("speed", 1), f"{where}.speed"),
                transparent=bool(ob.get("transparent", False)),
                cyclic=bool(ob.get("cyclic", False)),
                moves=_moves(_req(ob, "moves", where), f"{where}.moves"),
            ))
        except ValueError as e:
            raise ScenarioError(f"{where}: {e}")
    raw_car = _req(data, "car", "scenario")
    if not isinstance(raw_car, dict):
        raise ScenarioError("car: expected an object")
    try:
        car = CarSpec(
            x=_nat(_req(raw_car, "x", "car"), "car.x"),
            y=_nat(_req(raw_car, "y", "car"), "car.y"),
            speed=_nat(raw_car.get("speed", 1), "car.speed"),
            cyclic=bool(raw_car.get("cyclic", False)),
            moves=_moves(raw_car.get("moves", []), "car.moves"),
        )
    except ValueError as e:
        raise ScenarioError(f"car: {e}")
    try:
        return GridScenario(width, height, tuple(static), tuple(mobile), car,
                            dist_min=_nat(data.get("dist_min", 0), "dist_min"))
    except ValueError as e:
        raise ScenarioError(f"bad scenario: {e}")
