"""
The JSON Schemas urnlab reads specifications with and writes reports under.
"""
from __future__ import annotations

from importlib.resources import files
import json

from jsonschema import ValidationError
from jsonschema.validators import Draft202012Validator, extend
from referencing import Registry
from referencing.jsonschema import DRAFT202012

_SCHEMAS = files("urnlab") / "schemas"

NAMES = (
    "common",
    "urn-spec",
    "classify",
    "phi-matrix",
    "qpoly",
    "cone",
    "verify",
)


def _load(name: str):
    return json.loads((_SCHEMAS / f"{name}.json").read_text(encoding="utf-8"))


def square_matrix(validator, property, instance, schema):
    """
    The ``squareMatrix`` keyword: the named property is an s-by-s array.
    """
    if not validator.is_type(instance, "object"):
        return
    matrix = instance.get(property)
    if not validator.is_type(matrix, "array"):
        return
    size = len(matrix)
    for i, row in enumerate(matrix):
        if validator.is_type(row, "array") and len(row) != size:
            yield ValidationError(
                f"row {i} of {property} has {len(row)} entries, "
                f"expected {size}",
            )


def matches_rows(validator, properties, instance, schema):
    """
    The ``matchesRows`` keyword: a vector has one entry per matrix row.
    """
    if not validator.is_type(instance, "object"):
        return
    vector_name, matrix_name = properties
    vector, matrix = instance.get(vector_name), instance.get(matrix_name)
    if not (
        validator.is_type(vector, "array")
        and validator.is_type(matrix, "array")
    ):
        return
    if len(vector) != len(matrix):
        yield ValidationError(
            f"{vector_name} has {len(vector)} entries but {matrix_name} "
            f"has {len(matrix)} rows",
        )


UrnlabValidator = extend(
    Draft202012Validator,
    validators={"squareMatrix": square_matrix, "matchesRows": matches_rows},
)

SCHEMAS = {name: _load(name) for name in NAMES}
REGISTRY: Registry = Registry().with_resources(
    (schema["$id"], DRAFT202012.create_resource(schema))
    for schema in SCHEMAS.values()
)


def validator_for(name: str):
    """
    A validator for one of the bundled schemas, resolving shared definitions.
    """
    return UrnlabValidator(SCHEMAS[name], registry=REGISTRY)
