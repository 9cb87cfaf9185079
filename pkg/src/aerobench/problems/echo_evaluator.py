"""Reference external evaluator for protocol tests.

Reads line-delimited JSON requests on stdin and answers each with a metrics
map derived deterministically from the numeric design values, so the harness
can verify round-trips without any aerodynamic model. Supported modes via
argv[1]: "echo" (default), "crash" (exit after the first request), and
"garbage" (reply with non-JSON).

Run as: python -m aerobench.problems.echo_evaluator [mode]
"""
from __future__ import annotations

import json
import sys


def metrics_for(params: dict, operating_point: dict) -> dict:
    numeric = [v for v in params.values() if isinstance(v, (int, float))]
    total = float(sum(numeric))
    return {
        "param_sum": total,
        "param_count": float(len(numeric)),
        "weight": float(operating_point.get("weight", 1.0)),
    }


def main(argv: list[str]) -> int:
    mode = argv[1] if len(argv) > 1 else "echo"
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        request = json.loads(line)
        if mode == "garbage":
            sys.stdout.write("not json at all\n")
            sys.stdout.flush()
            continue
        reply = {
            "id": request.get("id"),
            "metrics": metrics_for(
                request.get("params", {}), request.get("operating_point", {})
            ),
        }
        sys.stdout.write(json.dumps(reply) + "\n")
        sys.stdout.flush()
        if mode == "crash":
            return 1
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
