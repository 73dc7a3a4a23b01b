"""
JSON codecs - 精确有理数的 "num/den" 字符串编码
JointDist / CheckResult / 见证对象的序列化；所有精确值均以最简分数字符串输出。
"""

import hashlib
import json
import os
from enum import Enum
from fractions import Fraction
from typing import Any, Dict

from src.depcheck import CheckResult, MonotonePairWitness, OrthantWitness
from src.errors import ConfigError
from src.exactdist import JointDist, from_atoms, to_rational
from src.upper_sets import UpperSet


def format_rational(value) -> str:
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def jsonable(obj: Any) -> Any:
    """Recursively convert Fractions, tuples and enums into JSON-ready values."""
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, Fraction):
        return format_rational(obj)
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, (int, float, str)):
        return obj
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return [jsonable(v) for v in sorted(obj)]
    if isinstance(obj, JointDist):
        return dist_to_dict(obj)
    if isinstance(obj, CheckResult):
        return check_result_to_dict(obj)
    if hasattr(obj, "to_dict"):
        return jsonable(obj.to_dict())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


# --- JointDist ---

def dist_to_dict(d: JointDist) -> Dict[str, Any]:
    return {
        "n": d.n,
        "atoms": [
            {"outcome": [format_rational(v) for v in outcome], "prob": format_rational(p)}
            for outcome, p in d.atoms
        ],
    }


def dist_from_dict(obj: Dict[str, Any], field: str = "dist") -> JointDist:
    if not isinstance(obj, dict) or "atoms" not in obj:
        raise ConfigError(f"{field}: expected an object with 'n' and 'atoms'")
    atoms = []
    for k, atom in enumerate(obj["atoms"]):
        try:
            outcome = [to_rational(v, f"{field}.atoms[{k}].outcome") for v in atom["outcome"]]
            prob = to_rational(atom["prob"], f"{field}.atoms[{k}].prob")
        except (KeyError, TypeError) as e:
            raise ConfigError(f"{field}.atoms[{k}]: malformed atom ({e})") from e
        atoms.append((outcome, prob))
    return from_atoms(atoms, obj.get("n"))


# --- Witnesses and results ---

def upper_set_to_dict(u: UpperSet) -> Dict[str, Any]:
    return {
        "coords": list(u.coords),
        "minimal_elements": [[format_rational(v) for v in p] for p in u.minimal_elements],
        "signs": list(u.signs),
    }


def witness_to_dict(w) -> Any:
    if w is None:
        return None
    if isinstance(w, OrthantWitness):
        return {
            "type": "orthant",
            "thresholds": [format_rational(v) for v in w.thresholds],
            "mode": w.mode.value,
            "lhs": format_rational(w.lhs),
            "rhs": format_rational(w.rhs),
        }
    if isinstance(w, MonotonePairWitness):
        return {
            "type": "monotone_pair",
            "A1": list(w.a1),
            "A2": list(w.a2),
            "U1": upper_set_to_dict(w.u1),
            "U2": upper_set_to_dict(w.u2),
            "sign_profile_1": list(w.sign_profile_1),
            "sign_profile_2": list(w.sign_profile_2),
            "covariance": format_rational(w.covariance),
        }
    return jsonable(w)


def check_result_to_dict(result: CheckResult) -> Dict[str, Any]:
    return {
        "property": result.property.value,
        "verdict": result.verdict.value,
        "witness": witness_to_dict(result.witness),
        "work_counters": dict(sorted(result.work_counters.items())),
        "context": jsonable(result.context),
    }


# --- Files ---

def canonical_dumps(obj: Any) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def config_hash(obj: Any) -> str:
    compact = json.dumps(jsonable(obj), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(compact.encode("utf-8")).hexdigest()


def read_json(path: str) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON ({e})") from e


def write_json(path: str, obj: Any):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(canonical_dumps(obj))


__all__ = [
    "format_rational", "jsonable",
    "dist_to_dict", "dist_from_dict", "upper_set_to_dict",
    "witness_to_dict", "check_result_to_dict",
    "canonical_dumps", "config_hash", "read_json", "write_json",
]
