"""JSON schemas of CLI result files and a validator over them."""

import json
from functools import lru_cache
from importlib import resources

import jsonschema
from referencing import Registry, Resource

SCHEMA_FILES = {
    "manifest": "manifest.schema.json",
    "approx": "approx_result.schema.json",
    "exact": "exact_result.schema.json",
    "error_report": "error_report.schema.json",
}


def load_schema(name):
    text = resources.files("lapdiag").joinpath("schemas", SCHEMA_FILES[name]).read_text("utf-8")
    return json.loads(text)


@lru_cache(maxsize=None)
def _registry():
    registry = Registry()
    for name in SCHEMA_FILES:
        schema = load_schema(name)
        registry = registry.with_resource(schema["$id"], Resource.from_contents(schema))
    return registry


def validate(document, name):
    """Raise :class:`jsonschema.ValidationError` if ``document`` does not match."""
    schema = load_schema(name)
    cls = jsonschema.validators.validator_for(schema)
    cls(schema, registry=_registry()).validate(document)
