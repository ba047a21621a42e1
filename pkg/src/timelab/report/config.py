"""Scenario files: loading, schema validation and sweep expansion."""
import copy
import hashlib
import itertools
import json
import math
from importlib import resources

import jsonschema

from ..errors import ConfigurationError

SCHEMA_NAME = "scenario.schema.json"


def load_schema():
    text = resources.files(__package__).joinpath(SCHEMA_NAME).read_text(encoding="utf-8")
    return json.loads(text)


_VALIDATOR = jsonschema.Draft202012Validator(load_schema())


def _field_of(error):
    path = [p for p in error.absolute_path if isinstance(p, str)]
    if error.validator == "additionalProperties" and isinstance(error.instance, dict):
        extra = sorted(set(error.instance) - set(error.schema.get("properties", {})))
        if extra:
            return extra[0]
    if error.validator == "required":
        # "'m' is a required property"
        return error.message.split("'")[1] if "'" in error.message else (path[-1] if path else None)
    return path[-1] if path else None


def validate(config):
    """Raise :class:`ConfigurationError` naming the first offending field."""
    if not isinstance(config, dict):
        raise ConfigurationError("scenario must be a JSON object")
    errors = sorted(_VALIDATOR.iter_errors(config), key=lambda e: (len(e.absolute_path), e.path))
    if errors:
        # prefer the most specific error
        err = max(errors, key=lambda e: len(e.absolute_path))
        field = _field_of(err)
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise ConfigurationError(f"{where}: {err.message}", field=field)
    return config


def load_config(source):
    """Read and validate a scenario from a path, a JSON string or a dict."""
    if isinstance(source, dict):
        config = copy.deepcopy(source)
    else:
        text = str(source)
        if not text.lstrip().startswith("{"):
            try:
                with open(text, encoding="utf-8") as fh:
                    text = fh.read()
            except OSError as exc:
                raise ConfigurationError(f"cannot read scenario {source!r}: {exc}",
                                         field="path") from exc
        try:
            config = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"invalid JSON: {exc}") from exc
    return validate(config)


def canonical_json(config):
    return json.dumps(config, sort_keys=True, separators=(",", ":"))


def config_hash(config):
    return hashlib.sha256(canonical_json(config).encode("utf-8")).hexdigest()[:12]


def scenario_id(config):
    return config.get("id") or f"{config['kind']}-{config_hash(config)}"


def heavy_mass(value):
    """JSON ``null`` means an infinitely heavy pointer."""
    return math.inf if value is None else float(value)


def _set_path(params, dotted, value):
    keys = dotted.split(".")
    node = params
    for k in keys[:-1]:
        if not isinstance(node, dict) or k not in node:
            raise ConfigurationError(f"sweep axis {dotted!r} names an unknown parameter",
                                     field=dotted)
        node = node[k]
    if not isinstance(node, dict):
        raise ConfigurationError(f"sweep axis {dotted!r} names an unknown parameter", field=dotted)
    node[keys[-1]] = value


def _known_parameters(kind):
    schema = load_schema()["$defs"].get(kind, {})
    names = set(schema.get("properties", {}))
    for sub in schema.get("allOf", []):
        ref = sub.get("$ref", "").rsplit("/", 1)[-1]
        names |= set(load_schema()["$defs"].get(ref, {}).get("properties", {}))
    return names


def expand_sweep(config):
    """Member scenarios of a sweep, in Cartesian-product order.

    Returns a list of ``(axis_values, member_config)`` where
    ``axis_values`` maps each axis name to its value for that member.
    """
    validate(config)
    if config["kind"] != "sweep":
        raise ConfigurationError("not a sweep scenario", field="kind")
    base = config["base"]
    if base["kind"] == "sweep":
        raise ConfigurationError("nested sweeps are not supported", field="base")
    axes = config["axes"]
    names = [a["name"] for a in axes]
    if len(set(names)) != len(names):
        raise ConfigurationError("duplicate sweep axis", field="axes")
    known = _known_parameters(base["kind"])
    for name in names:
        head = name.split(".")[0]
        if head not in known:
            raise ConfigurationError(f"sweep axis {name!r} names an unknown parameter",
                                     field=name)
    members = []
    for combo in itertools.product(*(a["values"] for a in axes)):
        member = copy.deepcopy(base)
        member.pop("id", None)
        for name, value in zip(names, combo):
            _set_path(member["params"], name, value)
        validate(member)
        members.append((dict(zip(names, combo)), member))
    return members
