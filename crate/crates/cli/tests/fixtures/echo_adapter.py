#!/usr/bin/env python3
"""Stand-in sentiment adapter speaking the NDJSON stdio protocol.

Labels come from a handful of keywords, so no model is needed. Flags
simulate misbehaving adapters:

  --crash-after N    exit with status 3 after answering N requests
  --bad-handshake    print a handshake that is not JSON
  --garble           answer with an unknown label
"""

import json
import sys

POSITIVE = {"good", "great", "hope", "recovery", "boom", "strong"}
NEGATIVE = {"bad", "crisis", "recession", "layoffs", "lost", "collapse", "unemployment"}


def label(text):
    words = set(text.lower().replace("#", " ").split())
    pos, neg = len(words & POSITIVE), len(words & NEGATIVE)
    if pos > neg:
        return "positive", 0.9
    if neg > pos:
        return "negative", 0.9
    return "neutral", 0.6


def main(argv):
    crash_after = None
    if "--crash-after" in argv:
        crash_after = int(argv[argv.index("--crash-after") + 1])
    if "--bad-handshake" in argv:
        print("hello there", flush=True)
        return 0
    garble = "--garble" in argv

    print(json.dumps({"ready": True, "model": "echo-stub"}), flush=True)
    answered = 0
    for line in sys.stdin:
        if not line.strip():
            continue
        if crash_after is not None and answered >= crash_after:
            sys.stderr.write("echo-stub: simulated crash\n")
            return 3
        try:
            req = json.loads(line)
            rid, text = req["id"], req["text"]
        except (ValueError, KeyError, TypeError) as exc:
            print(json.dumps({"id": None, "error": str(exc)}), flush=True)
            continue
        lab, score = label(text)
        if garble:
            lab = "ecstatic"
        print(json.dumps({"id": rid, "label": lab, "score": score}), flush=True)
        answered += 1
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
