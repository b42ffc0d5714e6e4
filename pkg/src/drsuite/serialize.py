"""JSON envelopes for every model family. Round trips are bit-faithful:
floats serialize via Python's shortest-round-trip repr."""

from __future__ import annotations

import numpy as np

from .cart import RegressionTreeModel, tree_from_dict, tree_to_dict
from .ensemble import BoostedModel, ForestModel
from .errors import InvalidArgument
from .horizon import AutoRegressiveTreeModel
from .mbcrt import ControlLeafModel, DisturbanceTree, MbcrtModel, VariablePartition


def _disturbance_tree_to_json(dt: DisturbanceTree) -> dict:
    return {
        "tree": tree_to_dict(dt.tree),
        "response": dt.response,
        "leaves": [
            {
                "region_id": lm.region_id,
                "intercept": lm.intercept,
                "coefficients": [float(c) for c in lm.coefficients],
                "n_samples": lm.n_samples,
                "rmse": lm.rmse,
            }
            for lm in dt.leaves.values()
        ],
    }


def _disturbance_tree_from_json(data: dict) -> DisturbanceTree:
    leaves = {
        rec["region_id"]: ControlLeafModel(
            intercept=rec["intercept"],
            coefficients=np.array(rec["coefficients"], dtype=float),
            region_id=rec["region_id"],
            n_samples=rec["n_samples"],
            rmse=rec["rmse"],
        )
        for rec in data["leaves"]
    }
    return DisturbanceTree(tree=tree_from_dict(data["tree"]), leaves=leaves,
                           response=data["response"])


def model_to_json(model) -> dict:
    if isinstance(model, RegressionTreeModel):
        return {"type": "tree", "tree": tree_to_dict(model)}
    if isinstance(model, ForestModel):
        return {
            "type": "forest",
            "meta": {"mtry": model.mtry, "bootstrap": model.bootstrap,
                     "seed": model.seed, "oob_error": model.oob_error},
            "trees": [tree_to_dict(t) for t in model.trees],
        }
    if isinstance(model, BoostedModel):
        return {
            "type": "brt",
            "meta": {"init": model.init, "shrinkage": model.shrinkage},
            "trees": [tree_to_dict(t) for t in model.stages],
        }
    if isinstance(model, AutoRegressiveTreeModel):
        return {
            "type": "ar",
            "meta": {"delta": model.delta, "response": model.response,
                     "exogenous": list(model.exogenous)},
            "base": model_to_json(model.base),
        }
    if isinstance(model, MbcrtModel):
        return {
            "type": "mbcrt",
            "meta": {
                "controls": list(model.partition.controls),
                "disturbances": list(model.partition.disturbances),
                "x_safe": {k: list(v) for k, v in model.x_safe.items()},
                "interval_minutes": model.interval_minutes,
                "delta": model.delta,
            },
            "power": _disturbance_tree_to_json(model.power),
            "zones": [_disturbance_tree_to_json(z) for z in model.zones],
        }
    raise InvalidArgument(f"cannot serialize model of type {type(model).__name__}")


def model_from_json(data: dict):
    kind = data.get("type")
    if kind == "tree":
        return tree_from_dict(data["tree"])
    if kind == "forest":
        meta = data["meta"]
        return ForestModel(
            trees=[tree_from_dict(t) for t in data["trees"]],
            mtry=meta["mtry"], bootstrap=meta["bootstrap"], seed=meta["seed"],
            oob_error=meta["oob_error"],
        )
    if kind == "brt":
        meta = data["meta"]
        return BoostedModel(init=meta["init"],
                            stages=[tree_from_dict(t) for t in data["trees"]],
                            shrinkage=meta["shrinkage"])
    if kind == "ar":
        meta = data["meta"]
        return AutoRegressiveTreeModel(
            base=model_from_json(data["base"]),
            delta=meta["delta"], response=meta["response"],
            exogenous=list(meta["exogenous"]),
        )
    if kind == "mbcrt":
        meta = data["meta"]
        return MbcrtModel(
            power=_disturbance_tree_from_json(data["power"]),
            zones=[_disturbance_tree_from_json(z) for z in data["zones"]],
            partition=VariablePartition(controls=tuple(meta["controls"]),
                                        disturbances=tuple(meta["disturbances"])),
            x_safe={k: (v[0], v[1]) for k, v in meta["x_safe"].items()},
            interval_minutes=meta["interval_minutes"],
            delta=meta["delta"],
        )
    raise InvalidArgument(f"unknown model envelope type {kind!r}")
