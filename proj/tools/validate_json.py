#!/usr/bin/env python3
"""Validate hkflow JSON outputs against the schemas shipped in schemas/.

usage: validate_json.py SCHEMA_DIR SCHEMA_NAME FILE [FILE ...]
A FILE of '-' reads standard input. Exit status 0 when every file validates.
"""
import json
import pathlib
import sys

import jsonschema
from referencing import Registry, Resource


def load_registry(schema_dir):
    resources = []
    for path in sorted(pathlib.Path(schema_dir).glob("*.schema.json")):
        contents = json.loads(path.read_text())
        resources.append((path.name, Resource.from_contents(contents)))
    return Registry().with_resources(resources)


def main(argv):
    if len(argv) < 4:
        print(__doc__.strip(), file=sys.stderr)
        return 2
    schema_dir, name, files = argv[1], argv[2], argv[3:]
    registry = load_registry(schema_dir)
    schema = registry.contents(name)
    validator_cls = jsonschema.validators.validator_for(schema)
    validator_cls.check_schema(schema)
    validator = validator_cls(schema, registry=registry)
    failures = 0
    for f in files:
        text = sys.stdin.read() if f == "-" else pathlib.Path(f).read_text()
        errors = sorted(validator.iter_errors(json.loads(text)), key=lambda e: list(e.path))
        for e in errors[:5]:
            print(f"{f}: {'/'.join(map(str, e.path))}: {e.message}", file=sys.stderr)
        failures += bool(errors)
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
