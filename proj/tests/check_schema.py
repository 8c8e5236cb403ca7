"""Checks the shipped JSON Schema against the script fixtures."""

import json
import pathlib
import sys

import jsonschema

ROOT = pathlib.Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "tests" / "fixtures"

# Span balance is beyond a node-level schema; the validator owns these.
STRUCTURAL_ONLY = {"end_without_begin.json", "empty_span.json"}


def main():
    schema = json.loads((ROOT / "schema" / "audio_script.schema.json").read_text())
    validator = jsonschema.Draft202012Validator(schema)
    failures = []
    valid = [FIXTURES / "listing1.json", FIXTURES / "listing1_full.json"]
    valid += sorted((FIXTURES / "valid").glob("*.json"))
    for path in valid:
        errors = list(validator.iter_errors(json.loads(path.read_text())))
        if errors:
            failures.append(f"{path.name}: {errors[0].message}")
    for path in sorted((FIXTURES / "malformed").glob("*.json")):
        try:
            document = json.loads(path.read_text())
        except json.JSONDecodeError:
            continue
        accepted = validator.is_valid(document)
        if accepted != (path.name in STRUCTURAL_ONLY):
            failures.append(f"{path.name}: schema accepted={accepted}")
    for line in failures:
        print(line)
    print(f"{len(valid)} valid fixtures checked, {len(failures)} failure(s)")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
