"""Artifact files: line-delimited JSON records plus CSV plot tables.

Every stream artifact (bounds, test sets, results) starts with a header
record carrying ``schema_version`` and the artifact kind, followed by one
record per entry.  Floats are serialised with Python's shortest round-trip
representation, so loading reproduces the exact values and re-serialising
reproduces the exact bytes; infinities use the JSON-extension ``Infinity``
token that the stdlib emits and accepts.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

from .campaign import (
    AmplitudeBoundMap,
    Component,
    GeneratedTest,
    TestResult,
    TestSet,
)
from .signals import ShapeKind, TestCase

SCHEMA_VERSION = 1


class SchemaError(ValueError):
    """An artifact file does not match the expected schema."""


def _dump(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"))


def _write_records(path, kind: str, header_extra: dict, records) -> None:
    lines = [_dump({"record": "header", "schema_version": SCHEMA_VERSION,
                    "kind": kind, **header_extra})]
    lines.extend(_dump(r) for r in records)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _read_records(path, kind: str) -> tuple[dict, list[dict]]:
    text = Path(path).read_text(encoding="utf-8")
    rows = []
    for ln, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rows.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}:{ln}: not valid JSON: {exc}") from exc
    if not rows:
        raise SchemaError(f"{path}: empty artifact")
    header, body = rows[0], rows[1:]
    if header.get("record") != "header":
        raise SchemaError(f"{path}: first record must be the header")
    if header.get("schema_version") != SCHEMA_VERSION:
        raise SchemaError(
            f"{path}: schema_version {header.get('schema_version')!r}, "
            f"expected {SCHEMA_VERSION}"
        )
    if header.get("kind") != kind:
        raise SchemaError(f"{path}: artifact kind {header.get('kind')!r}, expected {kind!r}")
    return header, body


# -- bounds ---------------------------------------------------------------

def save_bounds(path, bound_map: AmplitudeBoundMap) -> None:
    _write_records(
        path,
        "bounds",
        {"probes": bound_map.probes,
         "unresolved": [list(p) for p in bound_map.unresolved]},
        ({"record": "bound", "frequency": f, "bound": b}
         for f, b in zip(bound_map.frequencies, bound_map.bounds)),
    )


def load_bounds(path) -> AmplitudeBoundMap:
    header, body = _read_records(path, "bounds")
    pairs = []
    for row in body:
        if row.get("record") != "bound":
            raise SchemaError(f"{path}: unexpected record {row.get('record')!r}")
        pairs.append((float(row["frequency"]), float(row["bound"])))
    try:
        return AmplitudeBoundMap(
            frequencies=tuple(f for f, _ in pairs),
            bounds=tuple(b for _, b in pairs),
            unresolved=tuple((float(a), float(b)) for a, b in header.get("unresolved", [])),
            probes=int(header.get("probes", 0)),
        )
    except (KeyError, ValueError) as exc:
        raise SchemaError(f"{path}: {exc}") from exc


# -- test sets ------------------------------------------------------------

def _test_to_dict(test: GeneratedTest) -> dict:
    c = test.case
    return {
        "shape": c.shape.value,
        "amp_gain": c.amp_gain,
        "time_gain": c.time_gain,
        "periods": c.periods,
        "sample_interval": c.sample_interval,
        "target_frequency": test.target_frequency,
        "bound": test.bound,
        "snap_error": test.snap_error,
    }


def _test_from_dict(d: dict) -> GeneratedTest:
    return GeneratedTest(
        case=TestCase(
            shape=ShapeKind(d["shape"]),
            amp_gain=float(d["amp_gain"]),
            time_gain=float(d["time_gain"]),
            periods=int(d["periods"]),
            sample_interval=float(d["sample_interval"]),
        ),
        target_frequency=float(d["target_frequency"]),
        bound=float(d["bound"]),
        snap_error=float(d["snap_error"]),
    )


def save_test_set(path, test_set: TestSet) -> None:
    _write_records(
        path,
        "tests",
        {"seed": test_set.seed,
         "frequency_step": test_set.frequency_step,
         "shapes": [s.value for s in test_set.shapes]},
        ({"record": "test", **_test_to_dict(t)} for t in test_set.tests),
    )


def load_test_set(path) -> TestSet:
    header, body = _read_records(path, "tests")
    tests = []
    for row in body:
        if row.get("record") != "test":
            raise SchemaError(f"{path}: unexpected record {row.get('record')!r}")
        try:
            tests.append(_test_from_dict(row))
        except (KeyError, ValueError) as exc:
            raise SchemaError(f"{path}: bad test record: {exc}") from exc
    try:
        shapes = tuple(ShapeKind(s) for s in header["shapes"])
        return TestSet(
            tests=tuple(tests),
            seed=int(header["seed"]),
            frequency_step=float(header["frequency_step"]),
            shapes=shapes,
        )
    except (KeyError, ValueError) as exc:
        raise SchemaError(f"{path}: bad header: {exc}") from exc


# -- results --------------------------------------------------------------

def save_results(path, results) -> None:
    def rows():
        for r in results:
            yield {
                "record": "result",
                "test": _test_to_dict(r.test),
                "dnl": r.dnl,
                "components": [[c.frequency, c.amplitude, c.dof] for c in r.components],
                "actuator_sat_fraction": r.actuator_saturation_fraction,
                "sensor_sat_fraction": r.sensor_saturation_fraction,
                "deviation_mean": r.deviation_mean,
                "diverged": r.diverged,
            }

    _write_records(path, "results", {}, rows())


def load_results(path) -> tuple[TestResult, ...]:
    _, body = _read_records(path, "results")
    results = []
    for row in body:
        if row.get("record") != "result":
            raise SchemaError(f"{path}: unexpected record {row.get('record')!r}")
        try:
            components = tuple(
                Component(
                    frequency=float(f),
                    amplitude=float(a),
                    dof=None if d is None else float(d),
                )
                for f, a, d in row["components"]
            )
            results.append(
                TestResult(
                    test=_test_from_dict(row["test"]),
                    dnl=float(row["dnl"]),
                    components=components,
                    actuator_saturation_fraction=float(row["actuator_sat_fraction"]),
                    sensor_saturation_fraction=float(row["sensor_sat_fraction"]),
                    deviation_mean=float(row["deviation_mean"]),
                    diverged=bool(row["diverged"]),
                )
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise SchemaError(f"{path}: bad result record: {exc}") from exc
    return tuple(results)


# -- reports and tables ---------------------------------------------------

def save_json_report(path, payload: dict) -> None:
    """Single-object JSON report with a schema version, stable formatting."""
    body = {"schema_version": SCHEMA_VERSION, **payload}
    Path(path).write_text(
        json.dumps(body, sort_keys=True, indent=2, allow_nan=True) + "\n",
        encoding="utf-8",
    )


def load_json_report(path) -> dict:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON: {exc}") from exc
    if payload.get("schema_version") != SCHEMA_VERSION:
        raise SchemaError(f"{path}: unexpected schema_version")
    return payload


def _cell(value) -> str:
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    return str(value)


def save_csv(path, header: tuple[str, ...], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
