"""Embedded golden cases: allocation ground truths and cost benchmarks."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources


@dataclass(frozen=True)
class GoldenCase:
    name: str
    kind: str
    inputs: dict
    expected: dict
    metadata: dict


_REQUIRED_KEYS = ("name", "kind", "inputs", "expected", "metadata")


def fixture_names() -> list[str]:
    root = resources.files("fairpool").joinpath("data")
    return sorted(
        entry.name[: -len(".json")]
        for entry in root.iterdir()
        if entry.name.endswith(".json")
    )


def load_fixture(name: str) -> GoldenCase:
    root = resources.files("fairpool").joinpath("data")
    candidate = root.joinpath(f"{name}.json")
    if not candidate.is_file():
        raise KeyError(f"no fixture named {name!r}; have {fixture_names()}")
    return parse_fixture(candidate.read_text(encoding="utf-8"), name)


def parse_fixture(text: str, name: str) -> GoldenCase:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"fixture {name!r} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ValueError(f"fixture {name!r} must be a JSON object")
    missing = [key for key in _REQUIRED_KEYS if key not in raw]
    if missing:
        raise ValueError(f"fixture {name!r} is missing keys: {missing}")
    if raw["name"] != name:
        raise ValueError(
            f"fixture file {name!r} declares mismatching name {raw['name']!r}"
        )
    return GoldenCase(
        name=raw["name"],
        kind=raw["kind"],
        inputs=raw["inputs"],
        expected=raw["expected"],
        metadata=raw["metadata"],
    )
