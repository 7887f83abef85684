"""Reference textsim/1 sidecar backed by the lexical token-F1 scorer.

Run with `python -m chaptereval.ref_sidecar`. It exists so the protocol
client can be exercised end to end without any neural backend, and doubles
as the executable specification of the wire format:

  1. print {"protocol":"textsim/1","backend":...} once on startup
  2. read one JSON request per line: {"id","candidate","reference"}
  3. on {"flush":true}, answer one {"id","score"} line per buffered request
     followed by {"done":true}
  4. exit 0 on stdin EOF; protocol violations get an {"error":...} line and
     a nonzero exit
"""
from __future__ import annotations

import json
import sys

from .textsim import lexical_f1

BACKEND_ID = "lexical-f1/1"


def serve(stdin=None, stdout=None) -> int:
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout

    def emit(obj) -> None:
        stdout.write(json.dumps(obj, ensure_ascii=False) + "\n")
        stdout.flush()

    emit({"protocol": "textsim/1", "backend": BACKEND_ID})

    pending = []
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        try:
            message = json.loads(line)
        except json.JSONDecodeError:
            emit({"error": f"not valid JSON: {line[:200]}"})
            return 1
        if not isinstance(message, dict):
            emit({"error": "each request line must be a JSON object"})
            return 1
        if message.get("flush") is True:
            for request in pending:
                emit({"id": request["id"], "score": lexical_f1(request["candidate"], request["reference"])})
            emit({"done": True})
            pending = []
            continue
        missing = [key for key in ("id", "candidate", "reference") if key not in message]
        if missing:
            emit({"error": f"request missing key(s): {', '.join(missing)}"})
            return 1
        pending.append(message)
    return 0


if __name__ == "__main__":
    sys.exit(serve())
