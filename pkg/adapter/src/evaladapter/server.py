"""Reference external evaluator speaking the line-delimited JSON protocol.

The engine launches this program with pipes on stdin/stdout and sends one
UTF-8 JSON object per line::

    {"v": 1, "alpha": 1.0, "resolution": 224, "num_classes": 21, "metadata": {}}

For every request line the server writes exactly one response line and
flushes it, then exits 0 when its input closes. A successful response is::

    {"map": 25.0, "cpu_time_s": 0.2}

optionally with a ``params_m`` field; anything the server cannot answer
becomes a JSON error object such as ``{"error": "unknown_theta"}``, which the
engine records as a failed design point and moves past.

Two modes exist. ``replay`` answers from a measured results table, a CSV with
the header ``alpha,resolution,map,cpu_time_s,params_m`` (the params_m column
is optional), and is what integration tests run against. ``stub`` marks the
seam where a real pipeline would go: a production evaluator would build the
detection model for the requested width and resolution, train it, measure mAP
on a validation set, and time CPU inference; the stub answers every request
with a not_implemented error instead.

This file deliberately has no imports beyond the standard library and no
package-relative imports, so it can be launched directly by path.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

PROTOCOL_VERSION = 1
RESULTS_HEADER = ("alpha", "resolution", "map", "cpu_time_s", "params_m")


class TableError(ValueError):
    """The replay table file is missing, malformed, or inconsistent."""


def _parse_resolution(cell: str) -> int:
    value = float(cell)
    if not value.is_integer():
        raise ValueError(f"resolution must be integral, got {cell!r}")
    return int(value)


def load_table(path: str) -> dict[tuple[float, int], dict]:
    """Parse a results CSV into a {(alpha, resolution): response} map.

    Raises TableError for a bad header, unparseable cells, nonpositive
    values, or duplicate design points.
    """
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise TableError(f"could not read replay table {path}: {exc}") from None
    if not rows:
        raise TableError("replay table is empty, expected a header row")
    header = tuple(rows[0])
    if header not in (RESULTS_HEADER, RESULTS_HEADER[:4]):
        raise TableError(
            f"header must be {','.join(RESULTS_HEADER)} (params_m optional), "
            f"got {','.join(header)!r}"
        )

    table: dict[tuple[float, int], dict] = {}
    for number, row in enumerate(rows[1:], start=1):
        if not row:
            continue
        if len(row) != len(header):
            raise TableError(f"row {number}: expected {len(header)} columns, got {len(row)}")
        try:
            alpha = float(row[0])
            resolution = _parse_resolution(row[1])
            map_pct = float(row[2])
            cpu_time_s = float(row[3])
            params_cell = row[4].strip() if len(row) == 5 else ""
            params_m = float(params_cell) if params_cell else None
        except ValueError as exc:
            raise TableError(f"row {number}: {exc}") from None
        if map_pct <= 0 or cpu_time_s <= 0 or (params_m is not None and params_m <= 0):
            raise TableError(f"row {number}: map, cpu_time_s, and params_m must be positive")
        key = (alpha, resolution)
        if key in table:
            raise TableError(
                f"row {number}: duplicate entry for alpha={alpha} resolution={resolution}"
            )
        response = {"map": map_pct, "cpu_time_s": cpu_time_s}
        if params_m is not None:
            response["params_m"] = params_m
        table[key] = response
    return table


def _request_theta(request: dict) -> tuple[float, int]:
    alpha = request["alpha"]
    resolution = request["resolution"]
    if isinstance(alpha, bool) or not isinstance(alpha, (int, float)):
        raise ValueError("alpha must be a number")
    if isinstance(resolution, bool) or not isinstance(resolution, int):
        raise ValueError("resolution must be an integer")
    return (float(alpha), resolution)


def replay_responder(table: dict[tuple[float, int], dict]):
    def respond(request: dict) -> dict:
        version = request.get("v")
        if version != PROTOCOL_VERSION:
            return {"error": f"unsupported_protocol_version: {version!r}"}
        try:
            key = _request_theta(request)
        except (KeyError, ValueError) as exc:
            return {"error": f"bad_request: {exc}"}
        response = table.get(key)
        if response is None:
            return {"error": "unknown_theta"}
        return dict(response)

    return respond


def stub_responder(request: dict) -> dict:
    return {
        "error": "not_implemented",
        "detail": "stub evaluator: a real one would train the requested model, "
        "measure mAP, and time CPU inference here",
    }


def serve(stdin, stdout, respond) -> int:
    """Answer one response line per request line until end-of-input."""
    for line in stdin:
        if not line.strip():
            continue
        try:
            request = json.loads(line)
            if not isinstance(request, dict):
                raise ValueError("request must be a JSON object")
        except (json.JSONDecodeError, ValueError) as exc:
            reply = {"error": f"bad_request: {exc}"}
        else:
            reply = respond(request)
        stdout.write(json.dumps(reply) + "\n")
        stdout.flush()
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="evaladapter",
        description="External evaluator for design-space searches: replays a "
        "measured results table or stubs a training pipeline over stdio.",
    )
    modes = parser.add_subparsers(dest="mode", required=True)
    replay = modes.add_parser("replay", help="Answer requests from a results CSV.")
    replay.add_argument(
        "--table",
        required=True,
        help="CSV with header alpha,resolution,map,cpu_time_s[,params_m].",
    )
    modes.add_parser("stub", help="Answer every request with a not_implemented error.")
    args = parser.parse_args(argv)

    if args.mode == "replay":
        try:
            respond = replay_responder(load_table(args.table))
        except TableError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
    else:
        respond = stub_responder

    sys.stdin.reconfigure(encoding="utf-8")
    sys.stdout.reconfigure(encoding="utf-8")
    return serve(sys.stdin, sys.stdout, respond)


if __name__ == "__main__":
    sys.exit(main())
